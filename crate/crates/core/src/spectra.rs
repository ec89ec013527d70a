//! Eigenvalue bookkeeping for round spheres and their products: the three
//! eigenvalue families on `S^n`, product-spectrum assembly for the function,
//! one-form and Einstein operators, and the kernel dimension reports that
//! feed the deformation analysis.
//!
//! Sign convention: `u` is an eigenfunction of eigenvalue `lambda` when
//! `Delta u = -lambda u`, so all eigenvalues listed here are nonnegative for
//! the function Laplacian. The sphere `S^n` carries the 1-Einstein round
//! metric (radius `sqrt(n-1)`; the unit sphere for `n = 2`).

use crate::exactnum::Rat;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectraError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("kernel report for S^2 x N requires the spectral assumption to be asserted")]
    AssumptionNotAsserted,
}

/// The three eigenvalue families on `S^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenFamily {
    /// Functions: `k(k+n-1)/(n-1)`, `k >= 0`.
    Lambda0,
    /// Divergence-free one-forms: `(k(k+n-1)+n-2)/(n-1)`, `k >= 1`.
    Lambda1,
    /// TT tensors: `(k(k+n-1)+2(n-1))/(n-1)`, `k >= 2`.
    Lambda2,
}

impl EigenFamily {
    fn k_floor(self) -> u64 {
        match self {
            EigenFamily::Lambda0 => 0,
            EigenFamily::Lambda1 => 1,
            EigenFamily::Lambda2 => 2,
        }
    }
}

/// Exact sphere eigenvalue for the requested family.
pub fn sphere_eigenvalue(family: EigenFamily, k: u64, dim: u64) -> Result<Rat, SpectraError> {
    if dim < 2 {
        return Err(SpectraError::DomainError(format!(
            "sphere dimension must be at least 2, got {dim}"
        )));
    }
    if k < family.k_floor() {
        return Err(SpectraError::DomainError(format!(
            "k = {k} below the floor {} for this family",
            family.k_floor()
        )));
    }
    let k = k as i64;
    let n = dim as i64;
    let base = k * (k + n - 1);
    let num = match family {
        EigenFamily::Lambda0 => base,
        EigenFamily::Lambda1 => base + n - 2,
        EigenFamily::Lambda2 => base + 2 * (n - 1),
    };
    Ok(Rat::of(num, n - 1))
}

/// Dimension of the space of degree-`k` spherical harmonics on `S^n`
/// (harmonic homogeneous polynomials in `n+1` ambient variables).
pub fn function_multiplicity(k: u64, dim: u64) -> u128 {
    binomial(dim + k, k) - if k >= 2 { binomial(dim + k - 2, k - 2) } else { 0 }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Which operator a spectrum entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    /// Laplacian on functions.
    Functions,
    /// Rough Laplacian on one-forms.
    OneForms,
    /// Einstein operator on symmetric 2-tensors.
    Einstein,
}

impl OperatorKind {
    pub fn label(self) -> &'static str {
        match self {
            OperatorKind::Functions => "functions",
            OperatorKind::OneForms => "one-forms",
            OperatorKind::Einstein => "einstein",
        }
    }
}

/// One eigenvalue of an assembled product spectrum, with the combination
/// rules that produced it. Multiplicities are tracked for function spectra
/// only; the kernel arguments need only presence for the other bundles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumEntry {
    pub value: Rat,
    pub operator: OperatorKind,
    pub origins: Vec<String>,
    pub multiplicity: Option<u128>,
}

/// Eigenvalues of one factor, tagged with origin text and multiplicity.
fn factor_spectrum(op: OperatorKind, dim: u64, cutoff: &Rat) -> Vec<(Rat, String, Option<u128>)> {
    let mut out = Vec::new();
    let mut push_family = |family: EigenFamily, k_start: u64, shift: i64, name: &str, with_mult: bool| {
        let mut k = k_start;
        loop {
            let v = &sphere_eigenvalue(family, k, dim).expect("valid family floor")
                + &Rat::from_int(shift);
            if &v > cutoff {
                break;
            }
            let mult = with_mult.then(|| function_multiplicity(k, dim));
            out.push((v, format!("{name}(k={k},S^{dim})"), mult));
            k += 1;
        }
    };
    match op {
        OperatorKind::Functions => {
            push_family(EigenFamily::Lambda0, 0, 0, "lambda0", true);
        }
        OperatorKind::OneForms => {
            push_family(EigenFamily::Lambda0, 1, -1, "lambda0-1", false);
            push_family(EigenFamily::Lambda1, 1, -1, "lambda1-1", false);
        }
        OperatorKind::Einstein => {
            push_family(EigenFamily::Lambda0, 0, -2, "lambda0-2", false);
            push_family(EigenFamily::Lambda1, 2, -2, "lambda1-2", false);
            push_family(EigenFamily::Lambda2, 2, -2, "lambda2-2", false);
        }
    }
    out
}

/// Assembles the spectrum of the product operator on `S^left x S^right`
/// up to `cutoff`, using additive separation of variables for functions and
/// the Einstein-operator combination rules for tensors. Duplicate values are
/// merged with their origins concatenated.
pub fn product_spectrum(
    left_dim: u64,
    right_dim: u64,
    op: OperatorKind,
    cutoff: &Rat,
) -> Result<Vec<SpectrumEntry>, SpectraError> {
    if left_dim < 2 || right_dim < 2 {
        return Err(SpectraError::DomainError(
            "product factors must be spheres of dimension at least 2".into(),
        ));
    }
    let mut combos: Vec<(Rat, String, Option<u128>)> = Vec::new();
    let mut combine = |a: &[(Rat, String, Option<u128>)], b: &[(Rat, String, Option<u128>)]| {
        for (va, oa, ma) in a {
            for (vb, ob, mb) in b {
                let v = va + vb;
                if &v > cutoff {
                    continue;
                }
                let mult = match (ma, mb) {
                    (Some(x), Some(y)) => Some(x * y),
                    _ => None,
                };
                combos.push((v, format!("{oa} (+) {ob}"), mult));
            }
        }
    };
    match op {
        OperatorKind::Functions => {
            let fl = factor_spectrum(OperatorKind::Functions, left_dim, cutoff);
            let fr = factor_spectrum(OperatorKind::Functions, right_dim, cutoff);
            combine(&fl, &fr);
        }
        OperatorKind::OneForms => {
            // spec(D1^M) + spec(D1^N): strictly positive entries on spheres
            let slack = Rat::from_int(2);
            let fl = factor_spectrum(OperatorKind::OneForms, left_dim, &(cutoff + &slack));
            let fr = factor_spectrum(OperatorKind::OneForms, right_dim, &(cutoff + &slack));
            combine(&fl, &fr);
        }
        OperatorKind::Einstein => {
            // Einstein eigenvalues reach down to -2, so widen the per-factor
            // enumeration window accordingly.
            let slack = Rat::from_int(2);
            let el = factor_spectrum(OperatorKind::Einstein, left_dim, &(cutoff + &slack));
            let er = factor_spectrum(OperatorKind::Einstein, right_dim, &(cutoff + &slack));
            let fl = factor_spectrum(OperatorKind::Functions, left_dim, &(cutoff + &slack));
            let fr = factor_spectrum(OperatorKind::Functions, right_dim, &(cutoff + &slack));
            let ol = factor_spectrum(OperatorKind::OneForms, left_dim, &(cutoff + &slack));
            let orr = factor_spectrum(OperatorKind::OneForms, right_dim, &(cutoff + &slack));
            combine(&el, &fr);
            combine(&fl, &er);
            combine(&ol, &orr);
        }
    }

    let mut entries: Vec<SpectrumEntry> = Vec::new();
    combos.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    for (value, origin, mult) in combos {
        match entries.last_mut() {
            Some(e) if e.value == value => {
                e.origins.push(origin);
                e.multiplicity = match (e.multiplicity, mult) {
                    (Some(x), Some(y)) => Some(x + y),
                    _ => None,
                };
            }
            _ => entries.push(SpectrumEntry {
                value,
                operator: op,
                origins: vec![origin],
                multiplicity: mult,
            }),
        }
    }
    Ok(entries)
}

/// The three manifold classes whose Jacobi kernels are tabulated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ManifoldDescriptor {
    /// `S^2 x S^2`, both unit round.
    S2xS2,
    /// `S^m x S^n` with `m, n >= 3`.
    SmxSn { m: u64, n: u64 },
    /// `S^2 x N` for a closed 1-Einstein `N`; the caller must assert the
    /// spectral assumption (first nonzero eigenvalue above 2 and trivial TT
    /// kernel) — it is never computed here.
    S2xN { dagger_asserted: bool, lambda1_bound: Rat },
}

/// Kernel dimensions for the linearised soliton operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelReport {
    /// `dim ker(Delta + 2)` on functions.
    pub dim_conformal_kernel: u64,
    /// `dim ker_TT(Delta_L + 2)`.
    pub dim_tt_kernel: u64,
    /// Dimension of the conformal Jacobi family `{v g}`; equals the
    /// conformal kernel dimension.
    pub dim_k1: u64,
}

/// Exact kernel dimensions per manifold class. On `S^2 x S^2` the conformal
/// kernel is spanned by the three coordinate functions of each factor.
pub fn kernel_dims(m: &ManifoldDescriptor) -> Result<KernelReport, SpectraError> {
    let (conf, tt) = match m {
        ManifoldDescriptor::S2xS2 => (6, 0),
        ManifoldDescriptor::SmxSn { m, n } => {
            if *m < 3 || *n < 3 {
                return Err(SpectraError::DomainError(
                    "the S^m x S^n kernel table requires m, n >= 3".into(),
                ));
            }
            (0, 0)
        }
        ManifoldDescriptor::S2xN { dagger_asserted, lambda1_bound } => {
            if !dagger_asserted {
                return Err(SpectraError::AssumptionNotAsserted);
            }
            if lambda1_bound <= &Rat::from_int(2) {
                return Err(SpectraError::DomainError(
                    "asserted first-eigenvalue bound must exceed 2".into(),
                ));
            }
            (3, 0)
        }
    };
    Ok(KernelReport { dim_conformal_kernel: conf, dim_tt_kernel: tt, dim_k1: conf })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_eigenvalue_tables_dim2() {
        let l0: Vec<Rat> = (0..4)
            .map(|k| sphere_eigenvalue(EigenFamily::Lambda0, k, 2).unwrap())
            .collect();
        assert_eq!(l0, vec![Rat::from_int(0), Rat::from_int(2), Rat::from_int(6), Rat::from_int(12)]);
        let l1: Vec<Rat> = (1..3)
            .map(|k| sphere_eigenvalue(EigenFamily::Lambda1, k, 2).unwrap())
            .collect();
        assert_eq!(l1, vec![Rat::from_int(2), Rat::from_int(6)]);
        let l2 = sphere_eigenvalue(EigenFamily::Lambda2, 2, 2).unwrap();
        assert_eq!(l2, Rat::from_int(8));
    }

    #[test]
    fn lambda2_first_entry_is_4n_over_n_minus_1() {
        for n in 2..20 {
            let got = sphere_eigenvalue(EigenFamily::Lambda2, 2, n).unwrap();
            assert_eq!(got, Rat::of(4 * n as i64, n as i64 - 1));
            assert!(got > Rat::from_int(2));
        }
    }

    #[test]
    fn eigenvalue_domain_errors() {
        assert!(sphere_eigenvalue(EigenFamily::Lambda1, 0, 2).is_err());
        assert!(sphere_eigenvalue(EigenFamily::Lambda2, 1, 3).is_err());
        assert!(sphere_eigenvalue(EigenFamily::Lambda0, 0, 1).is_err());
        assert_eq!(
            sphere_eigenvalue(EigenFamily::Lambda0, 0, 5).unwrap(),
            Rat::zero()
        );
    }

    #[test]
    fn multiplicities() {
        assert_eq!(function_multiplicity(0, 2), 1);
        assert_eq!(function_multiplicity(1, 2), 3);
        assert_eq!(function_multiplicity(2, 2), 5);
        assert_eq!(function_multiplicity(1, 5), 6);
    }

    #[test]
    fn product_function_spectrum_cutoff4() {
        let entries =
            product_spectrum(2, 2, OperatorKind::Functions, &Rat::from_int(4)).unwrap();
        let values: Vec<(Rat, usize, Option<u128>)> = entries
            .iter()
            .map(|e| (e.value.clone(), e.origins.len(), e.multiplicity))
            .collect();
        assert_eq!(
            values,
            vec![
                (Rat::from_int(0), 1, Some(1)),
                (Rat::from_int(2), 2, Some(6)),
                (Rat::from_int(4), 1, Some(9)),
            ]
        );
    }

    #[test]
    fn product_einstein_minimum_is_minus_two() {
        let entries =
            product_spectrum(2, 2, OperatorKind::Einstein, &Rat::from_int(1)).unwrap();
        assert_eq!(entries.first().map(|e| e.value.clone()), Some(Rat::from_int(-2)));
    }

    #[test]
    fn product_one_forms_strictly_positive() {
        let entries =
            product_spectrum(2, 2, OperatorKind::OneForms, &Rat::from_int(10)).unwrap();
        assert!(entries.iter().all(|e| e.value > Rat::zero()));
        assert_eq!(entries.first().map(|e| e.value.clone()), Some(Rat::from_int(2)));
    }

    #[test]
    fn kernel_reports() {
        let r = kernel_dims(&ManifoldDescriptor::S2xS2).unwrap();
        assert_eq!((r.dim_conformal_kernel, r.dim_tt_kernel, r.dim_k1), (6, 0, 6));

        let r = kernel_dims(&ManifoldDescriptor::SmxSn { m: 3, n: 3 }).unwrap();
        assert_eq!((r.dim_conformal_kernel, r.dim_tt_kernel, r.dim_k1), (0, 0, 0));

        let r = kernel_dims(&ManifoldDescriptor::S2xN {
            dagger_asserted: true,
            lambda1_bound: Rat::of(5, 2),
        })
        .unwrap();
        assert_eq!((r.dim_conformal_kernel, r.dim_tt_kernel, r.dim_k1), (3, 0, 3));

        assert_eq!(
            kernel_dims(&ManifoldDescriptor::S2xN {
                dagger_asserted: false,
                lambda1_bound: Rat::from_int(3),
            }),
            Err(SpectraError::AssumptionNotAsserted)
        );
        assert!(kernel_dims(&ManifoldDescriptor::SmxSn { m: 2, n: 3 }).is_err());
    }
}
