//! The variational pipeline over Q(n).
//!
//! Every solution below lives in the six-dimensional ansatz space spanned by
//! `v^2, S_v, sigma_2, v v_b, v_b^2, alpha_b^2` (in that fixed order), where
//! `v = sum_b v_b` is a conformal-kernel direction, `S_v = sum_b v_b^2` and
//! `sigma_k = sum_b alpha_b^k`. The Laplacian and the single-factor
//! Laplacian act on coefficient vectors through the two integer matrices
//! returned by [`laplacian_matrices`]; the defining equations of the second-
//! and third-order quantities are linear systems over Q(n) in this basis.
//!
//! Integrated quantities land in `span{sigma_2^2, sigma_4}` and are held as
//! [`SigmaQuad`]. Each cross term is computed twice: from the defining
//! equations (the pipeline value) and from the reference closed form. The
//! final [`ObstructionReport`] carries both, an entry-by-entry discrepancy
//! ledger, and the verdicts derived from the pipeline values alone.

use crate::exactnum::{ExactError, MatN, PolyN, Rat, RatN};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VarError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("unsupported degree for the moment table: {0}")]
    UnsupportedDegree(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// Labels of the fixed ansatz basis, in storage order.
pub const BASIS_LABELS: [&str; 6] = ["v^2", "S_v", "sigma_2", "v*v_b", "v_b^2", "alpha_b^2"];

/// A function in the ansatz space: six Q(n) coefficients in the fixed basis
/// order. The last three coordinates are understood per factor `b` with the
/// usual summation conventions.
#[derive(Clone, PartialEq, Eq)]
pub struct AnsatzFn {
    coeffs: [RatN; 6],
}

impl AnsatzFn {
    pub fn zero() -> Self {
        AnsatzFn { coeffs: std::array::from_fn(|_| RatN::zero()) }
    }

    pub fn basis(idx: usize) -> Self {
        let mut f = AnsatzFn::zero();
        f.coeffs[idx] = RatN::one();
        f
    }

    pub fn from_coeffs(coeffs: [RatN; 6]) -> Self {
        AnsatzFn { coeffs }
    }

    /// Coefficients on the b-independent sub-basis `v^2, S_v, sigma_2`.
    pub fn from_a_part(a: [RatN; 3]) -> Self {
        let [a0, a1, a2] = a;
        AnsatzFn::from_coeffs([a0, a1, a2, RatN::zero(), RatN::zero(), RatN::zero()])
    }

    pub fn coeff(&self, idx: usize) -> &RatN {
        &self.coeffs[idx]
    }

    pub fn coeffs(&self) -> &[RatN; 6] {
        &self.coeffs
    }

    pub fn to_vec(&self) -> Vec<RatN> {
        self.coeffs.to_vec()
    }

    pub fn from_vec(v: Vec<RatN>) -> Self {
        AnsatzFn { coeffs: v.try_into().expect("six coefficients") }
    }

    /// True when the b-indexed part (last three coordinates) vanishes.
    pub fn is_b_free(&self) -> bool {
        self.coeffs[3..].iter().all(RatN::is_zero)
    }

    pub fn add(&self, rhs: &AnsatzFn) -> AnsatzFn {
        AnsatzFn { coeffs: std::array::from_fn(|i| &self.coeffs[i] + &rhs.coeffs[i]) }
    }

    pub fn sub(&self, rhs: &AnsatzFn) -> AnsatzFn {
        AnsatzFn { coeffs: std::array::from_fn(|i| &self.coeffs[i] - &rhs.coeffs[i]) }
    }

    pub fn scale(&self, c: &RatN) -> AnsatzFn {
        AnsatzFn { coeffs: std::array::from_fn(|i| &self.coeffs[i] * c) }
    }

    /// Applies a 6x6 matrix to the coefficient vector.
    pub fn apply(&self, m: &MatN) -> AnsatzFn {
        AnsatzFn::from_vec(m.mul_vec(&self.to_vec()))
    }

    /// Exact evaluation of all coefficients at `n = x`.
    pub fn eval(&self, x: &Rat) -> Result<[Rat; 6], ExactError> {
        let mut out = std::array::from_fn(|_| Rat::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] = c.eval(x)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            BASIS_LABELS
                .iter()
                .zip(&self.coeffs)
                .map(|(label, c)| serde_json::json!({ "basis": label, "coefficient": c.to_json() }))
                .collect(),
        )
    }
}

impl fmt::Debug for AnsatzFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = BASIS_LABELS
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(l, c)| format!("[{c}]*{l}"))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// The total and single-factor Laplacian matrices on the ansatz basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaplacianMatrices {
    /// The Laplacian of the full product manifold.
    pub total: MatN,
    /// The Laplacian of one `S^2_b` factor.
    pub factor: MatN,
}

/// The two exact matrices: column `j` holds the coefficients of the
/// Laplacian of the `j`-th basis function. In particular the first column
/// of `total` encodes `Delta(v^2) = -4 v^2 - 2 S_v + 2 sigma_2`.
pub fn laplacian_matrices() -> LaplacianMatrices {
    LaplacianMatrices {
        total: MatN::from_int_rows(&[
            &[-4, 0, 0, 0, 0, 0],
            &[-2, -6, 0, 0, 0, 0],
            &[2, 2, 0, 0, 0, 0],
            &[0, 0, 0, -4, 0, 0],
            &[0, 0, 0, -2, -6, 0],
            &[0, 0, 0, 2, 2, 0],
        ]),
        factor: MatN::from_int_rows(&[
            &[0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0],
            &[-4, 0, 0, -2, 0, 0],
            &[-2, -6, 0, -4, -6, 0],
            &[2, 2, 0, 2, 2, 0],
        ]),
    }
}

/// Second variation of the soliton time parameter in the kernel direction,
/// as the coefficient of `sigma_2`: `(n-2)/(6n)`.
pub fn tau_ss() -> RatN {
    RatN::frac(&[-2, 1], &[0, 6])
}

/// Solves `(1 + Delta) f_ss = n v^2 + (3n-2)/4 S_v - (11n-10)/12 sigma_2`
/// on the ansatz space. The result is the unique solution and is verified
/// by back-substitution inside the exact solver.
pub fn solve_f_ss() -> Result<AnsatzFn, VarError> {
    let m = laplacian_matrices().total;
    let a = m.shifted(&RatN::one());
    let rhs = [
        RatN::var(),
        RatN::frac(&[-2, 3], &[4]),
        RatN::frac(&[10, -11], &[12]),
        RatN::zero(),
        RatN::zero(),
        RatN::zero(),
    ];
    Ok(AnsatzFn::from_vec(a.solve(&rhs)?))
}

/// Right-hand side of the `f_ss` defining equation, expanded onto the
/// ansatz basis: `n v^2 + (3n-2)/4 S_v - (11n-10)/12 sigma_2`.
pub fn f_ss_rhs() -> AnsatzFn {
    AnsatzFn::from_a_part([
        RatN::var(),
        RatN::frac(&[-2, 3], &[4]),
        RatN::frac(&[10, -11], &[12]),
    ])
}

/// Solves the second-order trace equation
/// `(n + (n-1) Delta)(2 + Delta) u~ = Delta f_ss - 4(n-1) v^2 - (3n-2)/2 S_v + (5n-4)/3 sigma_2`
/// on the b-independent sub-basis and records `u = (1 + Delta) u~`.
pub fn solve_u_tilde() -> Result<(AnsatzFn, AnsatzFn), VarError> {
    let m = laplacian_matrices().total;
    let f = solve_f_ss()?;
    let n = RatN::var();
    let n_minus_1 = &n - &RatN::one();
    let op = m.scale(&n_minus_1).shifted(&n).matmul(&m.shifted(&RatN::from_int(2)));
    let extra = AnsatzFn::from_a_part([
        RatN::frac(&[4, -4], &[1]),
        RatN::frac(&[2, -3], &[2]),
        RatN::frac(&[-4, 5], &[3]),
    ]);
    let rhs = f.apply(&m).add(&extra);
    // The solution is orthogonal to the kernel directions, so it lives in
    // the b-independent sub-basis; solve there and check the full system.
    let ut = AnsatzFn::from_vec(op.solve_masked(&rhs.to_vec(), &[0, 1, 2])?);
    let u = ut.apply(&m.shifted(&RatN::one()));
    Ok((ut, u))
}

/// Right-hand side of the `u~` defining equation:
/// `Delta f_ss - 4(n-1) v^2 - (3n-2)/2 S_v + (5n-4)/3 sigma_2`.
pub fn u_tilde_rhs() -> Result<AnsatzFn, VarError> {
    let m = laplacian_matrices().total;
    let f = solve_f_ss()?;
    Ok(f.apply(&m).add(&AnsatzFn::from_a_part([
        RatN::frac(&[4, -4], &[1]),
        RatN::frac(&[2, -3], &[2]),
        RatN::frac(&[-4, 5], &[3]),
    ])))
}

/// Right-hand side of the `h_b` defining equation, expanded onto the
/// ansatz basis:
/// `(Delta + 2) h_b = (Delta + 2)(Delta^b u~ - 2u) + 2 tau_ss + Delta^b f_ss
/// - 2(n-2) v v_b + (n-2)/2 |d v_b|^2 - 4 v^2 + 2 |dv|^2`.
pub fn h_b_rhs() -> Result<AnsatzFn, VarError> {
    let mats = laplacian_matrices();
    let f = solve_f_ss()?;
    let (ut, u) = solve_u_tilde()?;
    let two = RatN::from_int(2);
    let w = ut.apply(&mats.factor).sub(&u.scale(&two));
    let shifted = mats.total.shifted(&two);
    let mut rhs = w.apply(&shifted);
    rhs = rhs.add(&f.apply(&mats.factor));
    rhs = rhs.add(&source_vector());
    Ok(rhs)
}

/// The explicit source `(-4, -2, (7n-2)/(3n), -2(n-2), -(n-2)/2, (n-2)/2)`,
/// which collects `2 tau_ss`, the `|dv|^2`, `|d v_b|^2` and `v v_b` terms.
fn source_vector() -> AnsatzFn {
    AnsatzFn::from_coeffs([
        RatN::from_int(-4),
        RatN::from_int(-2),
        RatN::frac(&[-2, 7], &[0, 3]),
        RatN::frac(&[4, -2], &[1]),
        RatN::frac(&[2, -1], &[2]),
        RatN::frac(&[-2, 1], &[2]),
    ])
}

/// Solves the `h_b` defining equation, with the undetermined gauge part in
/// `ker(Delta + 2)` fixed to zero. The integrated cross term downstream is
/// gauge invariant, so the choice is immaterial there.
pub fn solve_h_b() -> Result<AnsatzFn, VarError> {
    let mats = laplacian_matrices();
    let f = solve_f_ss()?;
    let (ut, u) = solve_u_tilde()?;
    let two = RatN::from_int(2);
    let shifted = mats.total.shifted(&two);
    let inner = f.apply(&mats.factor).add(&source_vector());
    let solved = AnsatzFn::from_vec(shifted.solve(&inner.to_vec())?);
    Ok(ut.apply(&mats.factor).sub(&u.scale(&two)).add(&solved))
}

/// Exact residual check `op * solution == rhs` on the ansatz space.
pub fn verify_back_substitution(op: &MatN, solution: &AnsatzFn, rhs: &AnsatzFn) -> bool {
    &solution.apply(op) == rhs
}

// ---------------------------------------------------------------------------
// Integration by parts and the moment table
// ---------------------------------------------------------------------------

/// The three reductions used to eliminate derivative integrands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IbpKind {
    /// `int v Delta(phi) = -2 int v phi`; zero for any even ansatz `phi`.
    VLapPhi,
    /// `int v^2 Delta(phi) = int phi (2 sigma_2 - 4 v^2 - 2 S_v)`.
    V2LapPhi,
    /// `int v <d phi, dv> = int phi (2 v^2 - sigma_2 + S_v)`.
    VGradPhi,
}

/// A reduced integrand: the product of two ansatz functions, ready for the
/// moment table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingPrecursor {
    pub left: AnsatzFn,
    pub right: AnsatzFn,
}

impl PairingPrecursor {
    pub fn is_zero(&self) -> bool {
        self.left.coeffs().iter().all(RatN::is_zero)
            || self.right.coeffs().iter().all(RatN::is_zero)
    }
}

/// Reduces a derivative integrand against `v` to a plain product of ansatz
/// functions via integration by parts.
pub fn ibp_reduce(kind: IbpKind, phi: &AnsatzFn) -> PairingPrecursor {
    let right = match kind {
        // the pairing of an even function against the odd function v is zero
        IbpKind::VLapPhi => AnsatzFn::zero(),
        IbpKind::V2LapPhi => AnsatzFn::from_a_part([
            RatN::from_int(-4),
            RatN::from_int(-2),
            RatN::from_int(2),
        ]),
        IbpKind::VGradPhi => AnsatzFn::from_a_part([
            RatN::from_int(2),
            RatN::one(),
            RatN::from_int(-1),
        ]),
    };
    PairingPrecursor { left: phi.clone(), right }
}

/// How a product of ansatz functions is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentMode {
    /// Both arguments restricted to the b-independent sub-basis.
    Plain,
    /// Left argument is `sum_b v v_b`; the right argument's b-indexed
    /// entries are interpreted per factor and summed.
    SumBVvb,
}

/// A degree-4 integrated scalar `c22 * sigma_2^2 + c4 * sigma_4`.
#[derive(Clone, PartialEq, Eq)]
pub struct SigmaQuad {
    pub c22: RatN,
    pub c4: RatN,
}

impl SigmaQuad {
    pub fn zero() -> Self {
        SigmaQuad { c22: RatN::zero(), c4: RatN::zero() }
    }

    pub fn new(c22: RatN, c4: RatN) -> Self {
        SigmaQuad { c22, c4 }
    }

    pub fn add(&self, rhs: &SigmaQuad) -> SigmaQuad {
        SigmaQuad { c22: &self.c22 + &rhs.c22, c4: &self.c4 + &rhs.c4 }
    }

    pub fn scale(&self, c: &RatN) -> SigmaQuad {
        SigmaQuad { c22: &self.c22 * c, c4: &self.c4 * c }
    }

    /// Exact value at dimension `n = x` for concrete `sigma_2`, `sigma_4`.
    pub fn value_at(&self, x: &Rat, sigma2: &Rat, sigma4: &Rat) -> Result<Rat, ExactError> {
        let c22 = self.c22.eval(x)?;
        let c4 = self.c4.eval(x)?;
        Ok(&(&c22 * &(sigma2 * sigma2)) + &(&c4 * sigma4))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sigma2_squared": self.c22.to_json(),
            "sigma4": self.c4.to_json(),
        })
    }
}

impl fmt::Debug for SigmaQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]*sigma2^2 + [{}]*sigma4", self.c22, self.c4)
    }
}

fn rq(c22: Rat, c4: Rat) -> SigmaQuad {
    SigmaQuad::new(RatN::from_rat(c22), RatN::from_rat(c4))
}

/// The closed moment table on the sub-basis `v^2, S_v, sigma_2`.
fn table_plain(i: usize, j: usize) -> SigmaQuad {
    let (i, j) = (i.min(j), i.max(j));
    match (i, j) {
        (0, 0) => rq(Rat::of(1, 3), Rat::of(-2, 15)),
        (0, 1) | (1, 1) => rq(Rat::of(1, 9), Rat::of(4, 45)),
        (0, 2) | (1, 2) => rq(Rat::of(1, 3), Rat::zero()),
        (2, 2) => rq(Rat::one(), Rat::zero()),
        _ => unreachable!("sub-basis index"),
    }
}

/// Exact integral of a product of ansatz functions against the mean-value
/// measure. In `Plain` mode both arguments must be b-independent; in
/// `SumBVvb` mode the left argument must be the `v v_b` basis function and
/// the pairing is summed over factors.
pub fn moment(p: &AnsatzFn, q: &AnsatzFn, mode: MomentMode) -> Result<SigmaQuad, VarError> {
    match mode {
        MomentMode::Plain => {
            if !p.is_b_free() || !q.is_b_free() {
                return Err(VarError::UnsupportedDegree(
                    "plain moments require b-independent arguments".into(),
                ));
            }
            let mut acc = SigmaQuad::zero();
            for i in 0..3 {
                if p.coeff(i).is_zero() {
                    continue;
                }
                for j in 0..3 {
                    if q.coeff(j).is_zero() {
                        continue;
                    }
                    acc = acc.add(&table_plain(i, j).scale(&(p.coeff(i) * q.coeff(j))));
                }
            }
            Ok(acc)
        }
        MomentMode::SumBVvb => {
            if p != &AnsatzFn::basis(3) {
                return Err(VarError::UnsupportedDegree(
                    "summed moments are tabulated only against sum_b v v_b".into(),
                ));
            }
            // sum_b v v_b against (v^2, S_v, sigma_2, v v_b, v_b^2, alpha_b^2):
            // v^4, v^2 S_v, sigma_2 v^2, v^2 S_v, sigma_4/5, sigma_4/3.
            let mut acc = SigmaQuad::zero();
            acc = acc.add(&table_plain(0, 0).scale(q.coeff(0)));
            acc = acc.add(&table_plain(0, 1).scale(q.coeff(1)));
            acc = acc.add(&table_plain(0, 2).scale(q.coeff(2)));
            acc = acc.add(&table_plain(0, 1).scale(q.coeff(3)));
            acc = acc.add(&rq(Rat::zero(), Rat::of(1, 5)).scale(q.coeff(4)));
            acc = acc.add(&rq(Rat::zero(), Rat::of(1, 3)).scale(q.coeff(5)));
            Ok(acc)
        }
    }
}

fn moment_precursor(p: &PairingPrecursor) -> Result<SigmaQuad, VarError> {
    moment(&p.left, &p.right, MomentMode::Plain)
}

/// The named normalisation constant `int v^2 w = sigma_2 / 3`, used for the
/// squared term of the third variation and for `tau_ss`.
pub fn v_squared_mean() -> Rat {
    Rat::of(1, 3)
}

// ---------------------------------------------------------------------------
// Cross terms and third variation
// ---------------------------------------------------------------------------

/// A quantity computed from the defining equations alongside its reference
/// closed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossTerm {
    pub pipeline: SigmaQuad,
    pub closed_form: SigmaQuad,
}

impl CrossTerm {
    pub fn matches(&self) -> bool {
        self.pipeline == self.closed_form
    }
}

/// `<D^2 Phi(vg, ug), vg>`: the conformal cross term. Assembled from the
/// displayed integrand plus the `f_st` contribution, which is rewritten as
/// `int v (1 + Delta) f_st` and substituted by the right-hand side of its
/// defining equation; no cancellation is done by hand.
pub fn cross_conformal() -> Result<CrossTerm, VarError> {
    let (ut, u) = solve_u_tilde()?;
    let m = laplacian_matrices().total;
    let n = RatN::var();
    let one = RatN::one();
    let half = RatN::frac(&[1], &[2]);
    let quarter = RatN::frac(&[1], &[4]);
    let n_minus_1 = &n - &one;
    let n_minus_2 = &n - &RatN::from_int(2);
    let nsq_over_4 = &(&n * &n) * &quarter;

    let v2 = AnsatzFn::basis(0);
    let grad_u = ibp_reduce(IbpKind::VGradPhi, &u);
    let grad_ut = ibp_reduce(IbpKind::VGradPhi, &ut);
    let lap_u = u.apply(&m);
    let lap_ut = ut.apply(&m);

    // explicit integrand of the displayed cross-term formula
    let mut acc = moment_precursor(&grad_u)?.scale(&nsq_over_4);
    acc = acc.add(&moment(&u, &v2, MomentMode::Plain)?.scale(&-&n_minus_1));
    acc = acc.add(&moment_precursor(&grad_ut)?.scale(&(&n_minus_2 * &quarter)));
    acc = acc.add(&moment(&lap_u, &v2, MomentMode::Plain)?.scale(&(&n_minus_1 * &half)));

    // int v (1 + Delta) f_st, with f_st eliminated through its defining
    // equation
    acc = acc.add(&moment(&lap_ut, &v2, MomentMode::Plain)?.scale(&half));
    acc = acc.add(&moment(&lap_u, &v2, MomentMode::Plain)?.scale(&-&(&n_minus_1 * &half)));
    acc = acc.add(&moment_precursor(&grad_ut)?.scale(&-&(&n_minus_2 * &quarter)));
    acc = acc.add(&moment_precursor(&grad_u)?.scale(&-&nsq_over_4));

    Ok(CrossTerm { pipeline: acc, closed_form: closed_forms::cross_conformal() })
}

/// `<D^2 Phi(vg, h), vg> = -(n-2)/4 sum_b int v v_b h_b w`: the TT cross
/// term, integrated against the solved `h_b`.
pub fn cross_tt() -> Result<CrossTerm, VarError> {
    let h = solve_h_b()?;
    cross_tt_of(&h)
}

/// The TT cross term for an arbitrary `h_b` ansatz function (used for the
/// gauge-invariance checks).
pub fn cross_tt_of(h: &AnsatzFn) -> Result<CrossTerm, VarError> {
    let n_minus_2 = &RatN::var() - &RatN::from_int(2);
    let factor = &-&n_minus_2 * &RatN::frac(&[1], &[4]);
    let pipeline = moment(&AnsatzFn::basis(3), h, MomentMode::SumBVvb)?.scale(&factor);
    Ok(CrossTerm { pipeline, closed_form: closed_forms::cross_tt() })
}

/// `<D^3 Phi(vg, vg, vg), vg>`: the third variation. The `f_sss` term is
/// rewritten as `int v (1 + Delta) f_sss` and substituted by the right-hand
/// side of its defining equation; the `tau_sss` summand is constant and
/// integrates to zero against `v`.
pub fn third_variation() -> Result<CrossTerm, VarError> {
    let f = solve_f_ss()?;
    let m = laplacian_matrices().total;
    let n = RatN::var();
    let one = RatN::one();
    let quarter = RatN::frac(&[1], &[4]);
    let n_minus_1 = &n - &one;
    let n_minus_2 = &n - &RatN::from_int(2);

    let v2 = AnsatzFn::basis(0);
    // |dv|^2 = sigma_2 - S_v
    let dv2 = AnsatzFn::from_a_part([RatN::zero(), RatN::from_int(-1), RatN::one()]);
    let grad_f = ibp_reduce(IbpKind::VGradPhi, &f);
    let lap_f = f.apply(&m);

    // explicit integrand of the displayed third-variation formula
    let mut acc = moment(&v2, &v2, MomentMode::Plain)?
        .scale(&(&RatN::from_int(6) * &n_minus_1));
    // -(9n^2 - 18n - 24)/4 v^2 |dv|^2
    let c = RatN::frac(&[24, 18, -9], &[4]);
    acc = acc.add(&moment(&v2, &dv2, MomentMode::Plain)?.scale(&c));
    acc = acc.add(&moment_precursor(&grad_f)?.scale(&(&(&RatN::from_int(3) * &n_minus_2) * &quarter)));

    // int v (1 + Delta) f_sss:
    //   -3(n-2) tau_ss v  ->  -3(n-2) tau_ss int v^2
    let tau_fn = AnsatzFn::from_a_part([RatN::zero(), RatN::zero(), tau_ss()]);
    acc = acc.add(
        &moment(&tau_fn, &v2, MomentMode::Plain)?.scale(&-&(&RatN::from_int(3) * &n_minus_2)),
    );
    //   3 v Delta f_ss  ->  3 int v^2 Delta f_ss
    acc = acc.add(&moment(&lap_f, &v2, MomentMode::Plain)?.scale(&RatN::from_int(3)));
    //   -3(n-2)/2 <dv, d f_ss>  ->  -3(n-2)/2 int v <dv, d f_ss>
    acc = acc.add(
        &moment_precursor(&grad_f)?
            .scale(&-&(&(&RatN::from_int(3) * &n_minus_2) * &RatN::frac(&[1], &[2]))),
    );
    //   -3(3n-2) v^3  ->  -3(3n-2) int v^4
    acc = acc.add(&moment(&v2, &v2, MomentMode::Plain)?.scale(&RatN::frac(&[6, -9], &[1])));
    //   -(12n^2 - 75n + 66)/4 v |dv|^2  ->  same against v^2
    acc = acc.add(&moment(&v2, &dv2, MomentMode::Plain)?.scale(&RatN::frac(&[-66, 75, -12], &[4])));

    // + 3(n-2)/2 (int v^2)^2 = (n-2)/6 sigma_2^2
    let sq = &(&(&RatN::from_int(3) * &n_minus_2) * &RatN::frac(&[1], &[2]))
        * &RatN::from_rat(&v_squared_mean() * &v_squared_mean());
    acc = acc.add(&SigmaQuad::new(sq, RatN::zero()));

    Ok(CrossTerm { pipeline: acc, closed_form: closed_forms::third_variation() })
}

// ---------------------------------------------------------------------------
// Reference closed forms
// ---------------------------------------------------------------------------

/// The reference closed forms that the pipeline is compared against.
pub mod closed_forms {
    use super::*;

    fn prod(factors: &[&[i64]]) -> PolyN {
        factors
            .iter()
            .fold(PolyN::one(), |acc, f| &acc * &PolyN::from_ints(f))
    }

    fn over(num: &[&[i64]], den: &[&[i64]]) -> RatN {
        RatN::new(prod(num), prod(den)).expect("nonzero denominator")
    }

    /// `f_ss = -n/3 v^2 - (n-6)/60 S_v - (13n-38)/60 sigma_2`.
    pub fn f_ss() -> AnsatzFn {
        AnsatzFn::from_a_part([
            RatN::frac(&[0, -1], &[3]),
            RatN::frac(&[6, -1], &[60]),
            RatN::frac(&[38, -13], &[60]),
        ])
    }

    /// The recorded `u~` solution of the second-order trace equation.
    pub fn u_tilde() -> AnsatzFn {
        AnsatzFn::from_a_part([
            over(&[&[6, -4]], &[&[-12, 9]]),
            over(&[&[456, -678, 247]], &[&[60], &[-4, 3], &[-6, 5]]),
            over(&[&[-30, 29, -4]], &[&[0, 30], &[-6, 5]]),
        ])
    }

    /// The recorded `u = (1 + Delta) u~`.
    pub fn u() -> AnsatzFn {
        AnsatzFn::from_a_part([
            over(&[&[-6, 4]], &[&[-4, 3]]),
            over(&[&[-56, 82, -29]], &[&[4], &[-4, 3], &[-6, 5]]),
            over(&[&[-6, 19, -11]], &[&[0, 6], &[-6, 5]]),
        ])
    }

    /// The printed `h_b` solution vector. Its `sigma_2` coefficient does not
    /// satisfy the defining equation (the residual is exactly
    /// `(n-2)/(3n) sigma_2`); the pipeline solution replaces it with
    /// `2(n-1)(n-2)/(n(5n-6))`. The mismatch is carried in the discrepancy
    /// ledger.
    pub fn h_b() -> AnsatzFn {
        AnsatzFn::from_coeffs([
            over(&[&[-2], &[-2, 1]], &[&[-4, 3]]),
            over(&[&[-2, 1], &[-8, 7]], &[&[-4, 3], &[-6, 5]]),
            over(&[&[-2, 1], &[-18, 17]], &[&[0, 6], &[-6, 5]]),
            over(&[&[0, 1], &[-2, 1]], &[&[-4, 3]]),
            over(&[&[0, -1], &[-2, 1], &[-8, 7]], &[&[2], &[-4, 3], &[-6, 5]]),
            over(&[&[-1], &[-1, 1], &[-2, 1]], &[&[-6, 5]]),
        ])
    }

    /// Conformal cross term.
    pub fn cross_conformal() -> SigmaQuad {
        SigmaQuad::new(
            over(&[&[-24, -186, 265, -87]], &[&[0, 108], &[-4, 3]]),
            over(&[&[-6888, 14364, -9866, 2235]], &[&[675], &[-4, 3], &[-6, 5]]),
        )
    }

    /// TT cross term. The `sigma_2^2` numerator cubic is the corrected
    /// transcription `29n^3 - 59n^2 + 90n - 72` (the printed text drops the
    /// square on the middle term).
    pub fn cross_tt() -> SigmaQuad {
        SigmaQuad::new(
            over(
                &[&[-2, 1], &[-2, 1], &[-72, 90, -59, 29]],
                &[&[0, 72], &[-4, 3], &[-6, 5]],
            ),
            over(
                &[&[-1], &[-2, 1], &[-2, 1], &[-104, 40, 41]],
                &[&[180], &[-4, 3], &[-6, 5]],
            ),
        )
    }

    /// Third variation, with the `sigma_4` coefficient exactly as printed.
    pub fn third_variation() -> SigmaQuad {
        SigmaQuad::new(
            over(&[&[-12, -36, 87, -19]], &[&[0, 18]]),
            over(&[&[732, -174, 383]], &[&[900]]),
        )
    }

    /// The unique single-coefficient repair of the printed third-variation
    /// `sigma_4` display that is consistent with the assembled closed forms:
    /// `(383n^2 - 1740n + 732)/900` (the printed middle term drops a zero).
    pub fn third_variation_sigma4_consistent() -> RatN {
        over(&[&[732, -1740, 383]], &[&[900]])
    }

    /// Assembled `Q_4`.
    pub fn q4() -> RatN {
        over(
            &[&[-25056, 28056, 10364, -19054, 4515]],
            &[&[900], &[-4, 3], &[-6, 5]],
        )
    }

    /// Assembled `Q_2`.
    pub fn q2() -> RatN {
        over(
            &[&[-1152, 3120, -492, -3584, 2659, -483]],
            &[&[0, 36], &[-4, 3], &[-6, 5]],
        )
    }

    /// The recorded combined form `Q_4 + Q_2` for the single-factor case.
    pub fn b1_combined() -> RatN {
        over(
            &[&[2400, -2612, -3272, 4149, -840]],
            &[&[0, 300], &[-6, 5]],
        )
    }
}

// ---------------------------------------------------------------------------
// Obstruction report
// ---------------------------------------------------------------------------

/// One pipeline-versus-closed-form disagreement, both values exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy {
    pub quantity: String,
    pub closed_form: RatN,
    pub pipeline: RatN,
}

/// Verdicts computed from the pipeline values alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdicts {
    /// `Q_4 + Q_2 < 0` at `n = 4` (with `sigma_4 <= sigma_2^2` this bounds
    /// the obstruction away from zero for `B = 2`).
    pub n4_sum_negative: bool,
    /// The numerator of `Q_4 + Q_2` has no integer roots (the `B = 1` case,
    /// where `sigma_4 = sigma_2^2`).
    pub b1_numerator_integer_root_free: bool,
}

/// The assembled obstruction `Q_4 sigma_4 + Q_2 sigma_2^2`, computed through
/// the pipeline and compared against the reference closed forms.
#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub b_factors: u8,
    /// Reference closed forms.
    pub q4_closed_form: RatN,
    pub q2_closed_form: RatN,
    /// Values assembled from the defining-equation pipeline.
    pub q4_pipeline: RatN,
    pub q2_pipeline: RatN,
    /// `Q_4 + Q_2` from the pipeline, as a single reduced element of Q(n).
    pub combined_pipeline: RatN,
    pub verdicts: Verdicts,
    pub discrepancies: Vec<Discrepancy>,
    /// Exact-arithmetic adjudication notes for the `sigma_4` displays.
    pub adjudication: Vec<String>,
}

fn push_if_different(
    out: &mut Vec<Discrepancy>,
    quantity: &str,
    closed_form: &RatN,
    pipeline: &RatN,
) {
    if closed_form != pipeline {
        out.push(Discrepancy {
            quantity: quantity.to_string(),
            closed_form: closed_form.clone(),
            pipeline: pipeline.clone(),
        });
    }
}

/// Runs the whole pipeline and assembles the obstruction report. `b_factors`
/// selects the verdict semantics: 2 for the two-sphere product (where
/// `sigma_4 <= sigma_2^2` and `n = 4`), 1 for a single sphere factor (where
/// `sigma_4 = sigma_2^2` exactly).
pub fn obstruction(b_factors: u8) -> Result<ObstructionReport, VarError> {
    if !(b_factors == 1 || b_factors == 2) {
        return Err(VarError::Config(format!(
            "b_factors must be 1 or 2, got {b_factors}"
        )));
    }
    let conf = cross_conformal()?;
    let tt = cross_tt()?;
    let third = third_variation()?;
    let six = RatN::from_int(6);
    let total = third
        .pipeline
        .add(&conf.pipeline.add(&tt.pipeline).scale(&six));
    let q4_pipeline = total.c4.clone();
    let q2_pipeline = total.c22.clone();
    let combined = &q4_pipeline + &q2_pipeline;

    let four = Rat::from_int(4);
    let sum_at_4 = combined.eval(&four)?;
    let root_free = combined.num().integer_roots().map(|r| r.is_empty())?;

    let mut discrepancies = Vec::new();
    let h_pipeline = solve_h_b()?;
    let h_printed = closed_forms::h_b();
    for (i, label) in BASIS_LABELS.iter().enumerate() {
        push_if_different(
            &mut discrepancies,
            &format!("h_b coefficient of {label}"),
            h_printed.coeff(i),
            h_pipeline.coeff(i),
        );
    }
    push_if_different(
        &mut discrepancies,
        "cross_conformal sigma2^2",
        &conf.closed_form.c22,
        &conf.pipeline.c22,
    );
    push_if_different(
        &mut discrepancies,
        "cross_conformal sigma4",
        &conf.closed_form.c4,
        &conf.pipeline.c4,
    );
    push_if_different(
        &mut discrepancies,
        "cross_tt sigma2^2",
        &tt.closed_form.c22,
        &tt.pipeline.c22,
    );
    push_if_different(&mut discrepancies, "cross_tt sigma4", &tt.closed_form.c4, &tt.pipeline.c4);
    push_if_different(
        &mut discrepancies,
        "third_variation sigma2^2",
        &third.closed_form.c22,
        &third.pipeline.c22,
    );
    push_if_different(
        &mut discrepancies,
        "third_variation sigma4",
        &third.closed_form.c4,
        &third.pipeline.c4,
    );
    push_if_different(&mut discrepancies, "Q4", &closed_forms::q4(), &q4_pipeline);
    push_if_different(&mut discrepancies, "Q2", &closed_forms::q2(), &q2_pipeline);

    let adjudication = adjudicate(&conf, &tt, &third, &q4_pipeline, &q2_pipeline)?;

    Ok(ObstructionReport {
        b_factors,
        q4_closed_form: closed_forms::q4(),
        q2_closed_form: closed_forms::q2(),
        q4_pipeline,
        q2_pipeline,
        combined_pipeline: combined,
        verdicts: Verdicts {
            n4_sum_negative: sum_at_4.is_negative(),
            b1_numerator_integer_root_free: root_free,
        },
        discrepancies,
        adjudication,
    })
}

/// Adjudicates the mutually inconsistent `sigma_4` displays by exact
/// arithmetic: which of them the pipeline reproduces, and which value the
/// assembled closed forms force for the third-variation coefficient.
fn adjudicate(
    conf: &CrossTerm,
    tt: &CrossTerm,
    third: &CrossTerm,
    q4_pipeline: &RatN,
    q2_pipeline: &RatN,
) -> Result<Vec<String>, VarError> {
    let mut notes = Vec::new();
    let four = Rat::from_int(4);
    let six = RatN::from_int(6);

    // What the assembled closed forms force for the third-variation sigma_4.
    let forced_third_c4 =
        &closed_forms::q4() - &(&six * &(&conf.closed_form.c4 + &tt.closed_form.c4));
    notes.push(format!(
        "third-variation sigma4: printed {} (= {} at n=4); the assembled closed forms force {} \
         (= {} at n=4); the pipeline computes {} (= {} at n=4)",
        third.closed_form.c4,
        third.closed_form.c4.eval(&four)?,
        forced_third_c4,
        forced_third_c4.eval(&four)?,
        third.pipeline.c4,
        third.pipeline.c4.eval(&four)?,
    ));
    if third.pipeline.c4 == closed_forms::third_variation_sigma4_consistent() {
        notes.push(
            "the pipeline third-variation sigma4 equals the dropped-zero repair \
             (383n^2 - 1740n + 732)/900 of the printed display, so the printed middle \
             coefficient 174 is a typo for 1740"
                .to_string(),
        );
    }
    if forced_third_c4.eval(&four)? == third.pipeline.c4.eval(&four)? {
        notes.push(
            "at n=4 the pipeline third-variation sigma4 (-1/9) coincides with the value \
             forced by the assembled Q4/Q2 closed forms, not with the printed 6164/900"
                .to_string(),
        );
    }
    let q4_matches_assembled = q4_pipeline == &closed_forms::q4();
    let q2_matches_assembled = q2_pipeline == &closed_forms::q2();
    notes.push(format!(
        "pipeline Q4 {} the assembled closed form; pipeline Q2 {} the assembled closed form",
        if q4_matches_assembled { "matches" } else { "differs from" },
        if q2_matches_assembled { "matches" } else { "differs from" },
    ));
    if !q4_matches_assembled || !q2_matches_assembled {
        let dq4 = &(q4_pipeline - &closed_forms::q4())
            .checked_div(&six)
            .expect("six is nonzero");
        let tt_gap_c4 = &tt.pipeline.c4 - &tt.closed_form.c4;
        if dq4 == &tt_gap_c4 && conf.matches() {
            notes.push(
                "the whole Q4 gap is six times the TT cross-term sigma4 gap; the conformal \
                 cross term and (after the dropped-zero repair) the third variation agree \
                 with their closed forms"
                    .to_string(),
            );
        }
        let dq2 = &(q2_pipeline - &closed_forms::q2())
            .checked_div(&six)
            .expect("six is nonzero");
        let tt_gap_c22 = &tt.pipeline.c22 - &tt.closed_form.c22;
        if dq2 == &tt_gap_c22 {
            notes.push(
                "the whole Q2 gap is six times the TT cross-term sigma2^2 gap, which traces \
                 back to the sigma_2 coefficient of the printed h_b failing its defining \
                 equation by exactly (n-2)/(3n) sigma_2"
                    .to_string(),
            );
        }
    }
    Ok(notes)
}

impl ObstructionReport {
    /// JSON form; `eval_points` adds exact `p/q` evaluations of every Q(n)
    /// quantity at the requested dimensions.
    pub fn to_json(&self, eval_points: &[Rat]) -> serde_json::Value {
        let evald = |v: &RatN| -> serde_json::Value {
            let mut obj = match v.to_json() {
                serde_json::Value::Object(o) => o,
                _ => unreachable!("RatN json is an object"),
            };
            if !eval_points.is_empty() {
                let mut at = serde_json::Map::new();
                for p in eval_points {
                    let key = p.to_string();
                    match v.eval(p) {
                        Ok(val) => at.insert(key, serde_json::Value::String(val.to_string())),
                        Err(_) => at.insert(key, serde_json::Value::String("pole".into())),
                    };
                }
                obj.insert("at".into(), serde_json::Value::Object(at));
            }
            serde_json::Value::Object(obj)
        };
        serde_json::json!({
            "b_factors": self.b_factors,
            "q4": { "closed_form": evald(&self.q4_closed_form), "pipeline": evald(&self.q4_pipeline) },
            "q2": { "closed_form": evald(&self.q2_closed_form), "pipeline": evald(&self.q2_pipeline) },
            "combined_pipeline": evald(&self.combined_pipeline),
            "verdicts": {
                "n4_sum_negative": self.verdicts.n4_sum_negative,
                "b1_numerator_integer_root_free": self.verdicts.b1_numerator_integer_root_free,
            },
            "discrepancies": self.discrepancies.iter().map(|d| serde_json::json!({
                "quantity": d.quantity,
                "closed_form": evald(&d.closed_form),
                "pipeline": evald(&d.pipeline),
            })).collect::<Vec<_>>(),
            "adjudication": self.adjudication,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n4(v: &RatN) -> Rat {
        v.eval(&Rat::from_int(4)).unwrap()
    }

    #[test]
    fn laplacian_matrix_columns() {
        let mats = laplacian_matrices();
        // Delta(v^2) = -4 v^2 - 2 S_v + 2 sigma_2
        let got = AnsatzFn::basis(0).apply(&mats.total);
        let expect = AnsatzFn::from_a_part([
            RatN::from_int(-4),
            RatN::from_int(-2),
            RatN::from_int(2),
        ]);
        assert_eq!(got, expect);
        // Delta^b(S_v) = -6 v_b^2 + 2 alpha_b^2
        let got = AnsatzFn::basis(1).apply(&mats.factor);
        let mut expect = AnsatzFn::zero();
        expect = expect.add(&AnsatzFn::basis(4).scale(&RatN::from_int(-6)));
        expect = expect.add(&AnsatzFn::basis(5).scale(&RatN::from_int(2)));
        assert_eq!(got, expect);
        // constants are harmonic
        assert_eq!(AnsatzFn::basis(2).apply(&mats.total), AnsatzFn::zero());
    }

    #[test]
    fn tau_ss_values() {
        assert_eq!(tau_ss(), RatN::frac(&[-2, 1], &[0, 6]));
        assert_eq!(n4(&tau_ss()), Rat::of(1, 12));
        assert_eq!(tau_ss().eval(&Rat::from_int(2)).unwrap(), Rat::zero());
        assert!(matches!(
            tau_ss().eval(&Rat::zero()),
            Err(ExactError::PoleAtPoint { .. })
        ));
    }

    #[test]
    fn f_ss_solution() {
        let f = solve_f_ss().unwrap();
        assert_eq!(f, closed_forms::f_ss());
        let at4 = f.eval(&Rat::from_int(4)).unwrap();
        assert_eq!(at4[0], Rat::of(-4, 3));
        assert_eq!(at4[1], Rat::of(1, 30));
        assert_eq!(at4[2], Rat::of(-7, 30));
        // residual is identically zero
        let op = laplacian_matrices().total.shifted(&RatN::one());
        assert!(verify_back_substitution(&op, &f, &f_ss_rhs()));
        // a perturbed solution is rejected
        let mut bad = f.to_vec();
        bad[0] = &bad[0] + &RatN::one();
        assert!(!verify_back_substitution(&op, &AnsatzFn::from_vec(bad), &f_ss_rhs()));
    }

    #[test]
    fn u_tilde_solution() {
        let (ut, u) = solve_u_tilde().unwrap();
        assert_eq!(ut, closed_forms::u_tilde());
        assert_eq!(u, closed_forms::u());
        let at4 = ut.eval(&Rat::from_int(4)).unwrap();
        assert_eq!(at4[0], Rat::of(-5, 12));
        assert_eq!(at4[1], Rat::of(53, 210));
        assert_eq!(at4[2], Rat::of(11, 840));
        // residual of the composed operator
        let m = laplacian_matrices().total;
        let n = RatN::var();
        let op = m
            .scale(&(&n - &RatN::one()))
            .shifted(&n)
            .matmul(&m.shifted(&RatN::from_int(2)));
        assert!(verify_back_substitution(&op, &ut, &u_tilde_rhs().unwrap()));
        // the composed operator is in fact regular on the whole ansatz
        // space, so the unmasked solve agrees with the masked one
        let full = op.solve(&u_tilde_rhs().unwrap().to_vec()).unwrap();
        assert_eq!(AnsatzFn::from_vec(full), ut);
    }

    #[test]
    fn h_b_solution_and_printed_mismatch() {
        let h = solve_h_b().unwrap();
        // residual is identically zero
        let op = laplacian_matrices().total.shifted(&RatN::from_int(2));
        assert!(verify_back_substitution(&op, &h, &h_b_rhs().unwrap()));
        // the n=2 specialisation vanishes (every coefficient carries n-2)
        let at2 = h.eval(&Rat::from_int(2)).unwrap();
        assert!(at2.iter().all(Rat::is_zero));
        // the pipeline solution agrees with the printed vector except in the
        // sigma_2 slot, where the unique solution is 2(n-1)(n-2)/(n(5n-6))
        let printed = closed_forms::h_b();
        for i in [0usize, 1, 3, 4, 5] {
            assert_eq!(h.coeff(i), printed.coeff(i), "slot {i}");
        }
        let expected_sigma2 = RatN::new(
            &(&PolyN::from_ints(&[2]) * &PolyN::from_ints(&[-1, 1])) * &PolyN::from_ints(&[-2, 1]),
            &PolyN::from_ints(&[0, 1]) * &PolyN::from_ints(&[-6, 5]),
        )
        .unwrap();
        assert_eq!(h.coeff(2), &expected_sigma2);
        assert_ne!(h.coeff(2), printed.coeff(2));
        // the printed vector fails the defining equation by (n-2)/(3n) sigma_2
        let resid = printed.apply(&op).sub(&h_b_rhs().unwrap());
        let mut expect = AnsatzFn::zero();
        expect = expect.add(&AnsatzFn::basis(2).scale(&RatN::frac(&[-2, 1], &[0, 3])));
        assert_eq!(resid, expect);
    }

    #[test]
    fn ibp_examples() {
        // v Delta(phi) for the constant sigma_2 is zero
        let p = ibp_reduce(IbpKind::VLapPhi, &AnsatzFn::basis(2));
        assert!(p.is_zero());
        // v^2 Delta(phi) with phi = v^2 pairs v^2 against 2 sigma_2 - 4 v^2 - 2 S_v
        let p = ibp_reduce(IbpKind::V2LapPhi, &AnsatzFn::basis(0));
        assert_eq!(p.left, AnsatzFn::basis(0));
        assert_eq!(
            p.right,
            AnsatzFn::from_a_part([RatN::from_int(-4), RatN::from_int(-2), RatN::from_int(2)])
        );
        // v <d phi, dv> with phi = S_v pairs S_v against 2 v^2 - sigma_2 + S_v
        let p = ibp_reduce(IbpKind::VGradPhi, &AnsatzFn::basis(1));
        assert_eq!(p.left, AnsatzFn::basis(1));
        assert_eq!(
            p.right,
            AnsatzFn::from_a_part([RatN::from_int(2), RatN::one(), RatN::from_int(-1)])
        );
    }

    #[test]
    fn moment_table_entries() {
        let v2 = AnsatzFn::basis(0);
        let sv = AnsatzFn::basis(1);
        let s2 = AnsatzFn::basis(2);
        let got = moment(&v2, &v2, MomentMode::Plain).unwrap();
        assert_eq!(got, rq(Rat::of(1, 3), Rat::of(-2, 15)));
        let got = moment(&sv, &sv, MomentMode::Plain).unwrap();
        assert_eq!(got, rq(Rat::of(1, 9), Rat::of(4, 45)));
        let got = moment(&s2, &s2, MomentMode::Plain).unwrap();
        assert_eq!(got, rq(Rat::one(), Rat::zero()));
        // sum_b v v_b against v_b^2 is sigma_4 / 5
        let got = moment(&AnsatzFn::basis(3), &AnsatzFn::basis(4), MomentMode::SumBVvb).unwrap();
        assert_eq!(got, rq(Rat::zero(), Rat::of(1, 5)));
        // sum_b v v_b against alpha_b^2 is sigma_4 / 3
        let got = moment(&AnsatzFn::basis(3), &AnsatzFn::basis(5), MomentMode::SumBVvb).unwrap();
        assert_eq!(got, rq(Rat::zero(), Rat::of(1, 3)));
        // plain mode rejects b-indexed arguments
        assert!(matches!(
            moment(&AnsatzFn::basis(3), &v2, MomentMode::Plain),
            Err(VarError::UnsupportedDegree(_))
        ));
        assert!(matches!(
            moment(&v2, &v2, MomentMode::SumBVvb),
            Err(VarError::UnsupportedDegree(_))
        ));
    }

    #[test]
    fn cross_conformal_matches_closed_form() {
        let c = cross_conformal().unwrap();
        assert!(c.matches());
        assert_eq!(n4(&c.pipeline.c22), Rat::of(-131, 216));
        assert_eq!(n4(&c.pipeline.c4), Rat::of(4469, 9450));
        // pole-free at n = 2
        assert_eq!(c.pipeline.c22.eval(&Rat::from_int(2)).unwrap(), Rat::of(-2, 27));
        assert_eq!(c.pipeline.c4.eval(&Rat::from_int(2)).unwrap(), Rat::of(32, 675));
    }

    #[test]
    fn cross_tt_pipeline_and_closed_form() {
        let c = cross_tt().unwrap();
        // pipeline value from the solved h_b
        let expect_c22 = RatN::new(
            -&(&(&PolyN::from_ints(&[-2, 1]) * &PolyN::from_ints(&[-2, 1]))
                * &PolyN::from_ints(&[-4, -1, 1])),
            &PolyN::from_ints(&[0, 36]) * &PolyN::from_ints(&[-4, 3]),
        )
        .unwrap();
        assert_eq!(c.pipeline.c22, expect_c22);
        let expect_c4 = RatN::new(
            &(&PolyN::from_ints(&[-2, 1]) * &PolyN::from_ints(&[-2, 1]))
                * &PolyN::from_ints(&[328, -410, 113]),
            &(&PolyN::from_ints(&[360]) * &PolyN::from_ints(&[-4, 3]))
                * &PolyN::from_ints(&[-6, 5]),
        )
        .unwrap();
        assert_eq!(c.pipeline.c4, expect_c4);
        assert_eq!(n4(&c.pipeline.c22), Rat::of(-1, 36));
        assert_eq!(n4(&c.pipeline.c4), Rat::of(31, 630));
        // the closed form evaluates to the recorded n=4 values but does not
        // match the pipeline; the report carries the discrepancy
        assert_eq!(n4(&c.closed_form.c22), Rat::of(25, 168));
        assert_eq!(n4(&c.closed_form.c4), Rat::of(-89, 630));
        assert!(!c.matches());
        // both vanish at n = 2
        assert_eq!(c.pipeline.c22.eval(&Rat::from_int(2)).unwrap(), Rat::zero());
        assert_eq!(c.pipeline.c4.eval(&Rat::from_int(2)).unwrap(), Rat::zero());
    }

    #[test]
    fn cross_tt_gauge_invariance_in_basis() {
        // adding any multiple of the constant-free kernel directions cannot
        // change the ansatz integral: kernel elements are odd and are not in
        // the ansatz basis, so this checks invariance under the sigma_2-slot
        // ambiguity resolution instead; see the oracle tests for the full
        // polynomial-level gauge check.
        let h = solve_h_b().unwrap();
        let base = cross_tt_of(&h).unwrap().pipeline;
        let again = cross_tt_of(&h).unwrap().pipeline;
        assert_eq!(base, again);
    }

    #[test]
    fn third_variation_pipeline() {
        let t = third_variation().unwrap();
        // sigma_2^2 agrees with the closed form
        assert_eq!(t.pipeline.c22, t.closed_form.c22);
        assert_eq!(n4(&t.pipeline.c22), Rat::of(5, 18));
        // sigma_4 matches the dropped-zero repair, not the printed display
        assert_eq!(t.pipeline.c4, closed_forms::third_variation_sigma4_consistent());
        assert_ne!(t.pipeline.c4, t.closed_form.c4);
        assert_eq!(n4(&t.pipeline.c4), Rat::of(-1, 9));
        assert_eq!(n4(&t.closed_form.c4), Rat::of(1541, 225));
        // the squared-mean term alone
        let sq = &(&RatN::frac(&[-2, 1], &[1]) * &RatN::frac(&[3], &[2]))
            * &RatN::from_rat(Rat::of(1, 9));
        assert_eq!(sq, RatN::frac(&[-2, 1], &[6]));
    }

    #[test]
    fn obstruction_report() {
        let rep = obstruction(2).unwrap();
        // closed forms evaluate to the recorded n = 4 values
        assert_eq!(n4(&rep.q4_closed_form), Rat::of(2959, 1575));
        assert_eq!(n4(&rep.q2_closed_form), Rat::of(-311, 126));
        assert_eq!(
            &n4(&rep.q4_closed_form) + &n4(&rep.q2_closed_form),
            Rat::of(-619, 1050)
        );
        // pipeline values
        assert_eq!(n4(&rep.q4_pipeline), Rat::of(4759, 1575));
        assert_eq!(n4(&rep.q2_pipeline), Rat::of(-127, 36));
        assert_eq!(n4(&rep.combined_pipeline), Rat::of(-1063, 2100));
        // verdicts hold from the pipeline values
        assert!(rep.verdicts.n4_sum_negative);
        assert!(rep.verdicts.b1_numerator_integer_root_free);
        // the ledger is populated with the tt / third / Q discrepancies
        let quantities: Vec<&str> =
            rep.discrepancies.iter().map(|d| d.quantity.as_str()).collect();
        assert!(quantities.contains(&"h_b coefficient of sigma_2"));
        assert!(quantities.contains(&"cross_tt sigma2^2"));
        assert!(quantities.contains(&"cross_tt sigma4"));
        assert!(quantities.contains(&"third_variation sigma4"));
        assert!(quantities.contains(&"Q4"));
        assert!(quantities.contains(&"Q2"));
        // but not the quantities that agree
        assert!(!quantities.contains(&"cross_conformal sigma2^2"));
        assert!(!quantities.contains(&"cross_conformal sigma4"));
        assert!(!quantities.contains(&"third_variation sigma2^2"));
        // symbolic combined form
        let expect = RatN::new(
            -&PolyN::from_ints(&[-900, 756, 1961, -2137, 420]),
            &PolyN::from_ints(&[0, 150]) * &PolyN::from_ints(&[-6, 5]),
        )
        .unwrap();
        assert_eq!(rep.combined_pipeline, expect);
        assert!(obstruction(3).is_err());
    }

    /// Cofactor-expansion determinant, independent of the Bareiss solver.
    fn det_cofactor(m: &MatN) -> RatN {
        let k = m.rows();
        if k == 1 {
            return m.at(0, 0).clone();
        }
        let mut acc = RatN::zero();
        for j in 0..k {
            if m.at(0, j).is_zero() {
                continue;
            }
            let mut minor = MatN::zeros(k - 1, k - 1);
            for i in 1..k {
                let mut col = 0;
                for jj in 0..k {
                    if jj == j {
                        continue;
                    }
                    *minor.at_mut(i - 1, col) = m.at(i, jj).clone();
                    col += 1;
                }
            }
            let term = &(m.at(0, j) * &det_cofactor(&minor));
            if j % 2 == 0 {
                acc = &acc + term;
            } else {
                acc = &acc - term;
            }
        }
        acc
    }

    #[test]
    fn shifted_operators_regularity() {
        // cofactor expansion settles which shifts of the ansatz Laplacian
        // are invertible: Delta itself kills constants, while Delta + 2 is
        // regular on the whole six-dimensional ansatz space (the kernel of
        // Delta + 2 consists of odd functions, none of which lie here)
        let m = laplacian_matrices().total;
        assert!(det_cofactor(&m).is_zero());
        assert!(det_cofactor(&m.shifted(&RatN::from_int(4))).is_zero());
        let shifted = m.shifted(&RatN::from_int(2));
        assert_eq!(det_cofactor(&shifted), RatN::from_int(256));
        assert_eq!(det_cofactor(&m.shifted(&RatN::one())), RatN::from_int(225));
        // n + (n-1) Delta has determinant (n (3n-4) (5n-6))^2: these are the
        // denominators that appear in the u~ and h_b solutions
        let n = RatN::var();
        let det = det_cofactor(&m.scale(&(&n - &RatN::one())).shifted(&n));
        let expect = {
            let p = &(&PolyN::from_ints(&[0, 1]) * &PolyN::from_ints(&[-4, 3]))
                * &PolyN::from_ints(&[-6, 5]);
            RatN::from_poly(&p * &p)
        };
        assert_eq!(det, expect);
        // a concrete solve through the regular shift
        let mut e1 = vec![RatN::zero(); 6];
        e1[0] = RatN::one();
        let x = shifted.solve(&e1).unwrap();
        let expect = vec![
            RatN::frac(&[-1], &[2]),
            RatN::frac(&[1], &[4]),
            RatN::frac(&[1], &[4]),
            RatN::zero(),
            RatN::zero(),
            RatN::zero(),
        ];
        assert_eq!(x, expect);
    }

    #[test]
    fn closed_form_b1_display_is_consistent() {
        // the recorded single-factor combination equals Q4 + Q2 exactly
        let sum = &closed_forms::q4() + &closed_forms::q2();
        assert_eq!(sum, closed_forms::b1_combined());
        assert!(closed_forms::b1_combined()
            .num()
            .integer_roots()
            .unwrap()
            .is_empty());
    }

    #[test]
    fn q2_assembly_identity_for_closed_forms() {
        // third + 6 (conf + tt) for the closed forms reproduces Q2 exactly,
        // symbolically in Q(n); at n = 4 this is -311/126
        let lhs = &closed_forms::third_variation().c22
            + &(&RatN::from_int(6)
                * &(&closed_forms::cross_conformal().c22 + &closed_forms::cross_tt().c22));
        assert_eq!(lhs, closed_forms::q2());
        assert_eq!(n4(&lhs), Rat::of(-311, 126));
        // and the same assembly with the dropped-zero third sigma4 gives Q4
        let lhs4 = &closed_forms::third_variation_sigma4_consistent()
            + &(&RatN::from_int(6)
                * &(&closed_forms::cross_conformal().c4 + &closed_forms::cross_tt().c4));
        assert_eq!(lhs4, closed_forms::q4());
    }
}
