//! Exact arithmetic tower: rationals, univariate polynomials over Q, the
//! rational function field Q(n), and dense linear algebra over Q(n).
//!
//! Canonical forms are maintained everywhere so that equality is structural:
//! rationals are gcd-reduced with positive denominator, polynomials carry no
//! trailing zero coefficients, and elements of Q(n) are stored as a coprime
//! pair of integer-coefficient primitive polynomials whose denominator has a
//! positive leading coefficient.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("division by the zero element")]
    DivisionByZero,
    #[error("denominator vanishes at the evaluation point {point}")]
    PoleAtPoint { point: String },
    #[error("matrix is singular over Q(n)")]
    SingularMatrix,
    #[error("integer root search on the zero polynomial")]
    ZeroPolynomial,
    #[error("masked solve is inconsistent outside the selected subspace")]
    InconsistentSubspace,
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
}

// ---------------------------------------------------------------------------
// Rat
// ---------------------------------------------------------------------------

/// Arbitrary-precision rational in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }

    /// `num/den` in lowest terms. Fails on a zero denominator.
    pub fn new(num: BigInt, den: BigInt) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Rat(BigRational::new(num, den)))
    }

    /// Convenience constructor for literals; panics on a zero denominator.
    pub fn of(num: i64, den: i64) -> Self {
        assert!(den != 0, "Rat::of with zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn pow(&self, exp: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn checked_div(&self, rhs: &Rat) -> Result<Rat, ExactError> {
        if rhs.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Rat(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rat, ExactError> {
        Rat::one().checked_div(self)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rat {
    type Err = ExactError;

    /// Parses `"p"` or `"p/q"` with optional leading sign.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse_int = |t: &str| {
            BigInt::from_str(t.trim()).map_err(|_| ExactError::ShapeMismatch(format!("bad rational literal: {s:?}")))
        };
        match s.split_once('/') {
            None => Ok(Rat(BigRational::from_integer(parse_int(s)?))),
            Some((p, q)) => Rat::new(parse_int(p)?, parse_int(q)?),
        }
    }
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(&self.0 $op &rhs.0)
            }
        }
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
    };
}

rat_binop!(Add, add, +);
rat_binop!(Sub, sub, -);
rat_binop!(Mul, mul, *);

impl Div for &Rat {
    type Output = Rat;
    /// Panics on a zero divisor; use [`Rat::checked_div`] on untrusted input.
    fn div(self, rhs: &Rat) -> Rat {
        self.checked_div(rhs).expect("Rat division by zero")
    }
}

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        &self / &rhs
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

// ---------------------------------------------------------------------------
// PolyN
// ---------------------------------------------------------------------------

/// Univariate polynomial over Q in the dimension symbol `n`, stored dense,
/// low degree first, with a nonzero leading coefficient unless zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyN {
    coeffs: Vec<Rat>,
}

impl PolyN {
    pub fn zero() -> Self {
        PolyN { coeffs: vec![] }
    }

    pub fn one() -> Self {
        PolyN::constant(Rat::one())
    }

    /// The indeterminate `n`.
    pub fn var() -> Self {
        PolyN::from_coeffs(vec![Rat::zero(), Rat::one()])
    }

    pub fn constant(c: Rat) -> Self {
        PolyN::from_coeffs(vec![c])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Rat::is_zero) {
            coeffs.pop();
        }
        PolyN { coeffs }
    }

    /// Integer coefficients, low degree first: `from_ints(&[-4, 3])` is `3n - 4`.
    pub fn from_ints(cs: &[i64]) -> Self {
        PolyN::from_coeffs(cs.iter().map(|&c| Rat::from_int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, deg: usize) -> Rat {
        self.coeffs.get(deg).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn scale(&self, c: &Rat) -> PolyN {
        if c.is_zero() {
            return PolyN::zero();
        }
        PolyN::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Division with remainder over Q; `rhs` must be nonzero.
    pub fn divrem(&self, rhs: &PolyN) -> Result<(PolyN, PolyN), ExactError> {
        if rhs.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let mut rem = self.coeffs.clone();
        let dr = rhs.coeffs.len() - 1;
        let lead = rhs.leading();
        if rem.len() < rhs.coeffs.len() {
            return Ok((PolyN::zero(), self.clone()));
        }
        let mut quo = vec![Rat::zero(); rem.len() - dr];
        while rem.len() >= rhs.coeffs.len() {
            let d = rem.len() - 1;
            let q = rem.last().expect("nonempty") / &lead;
            if !q.is_zero() {
                for (k, c) in rhs.coeffs.iter().enumerate() {
                    let idx = d - dr + k;
                    rem[idx] = &rem[idx] - &(&q * c);
                }
                quo[d - dr] = q;
            }
            rem.pop();
            while rem.last().is_some_and(Rat::is_zero) {
                rem.pop();
            }
            if rem.len() < rhs.coeffs.len() {
                break;
            }
        }
        Ok((PolyN::from_coeffs(quo), PolyN::from_coeffs(rem)))
    }

    /// Exact division; the remainder must vanish.
    pub fn divexact(&self, rhs: &PolyN) -> Result<PolyN, ExactError> {
        let (q, r) = self.divrem(rhs)?;
        if !r.is_zero() {
            return Err(ExactError::ShapeMismatch("inexact polynomial division".into()));
        }
        Ok(q)
    }

    /// Monic gcd rescaled to a primitive integer polynomial with positive
    /// leading coefficient; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &PolyN) -> PolyN {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        a.integer_primitive().0
    }

    /// Writes `self = sign * content * primitive` and returns the primitive
    /// integer polynomial (positive leading coefficient) plus the rational
    /// scalar it was multiplied by.
    pub fn integer_primitive(&self) -> (PolyN, Rat) {
        if self.is_zero() {
            return (PolyN::zero(), Rat::one());
        }
        let mut den_lcm = BigInt::one();
        for c in &self.coeffs {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den_lcm / c.denom()))
            .collect();
        let mut content = BigInt::zero();
        for v in &ints {
            content = content.gcd(v);
        }
        let negate = ints.last().expect("nonzero").is_negative();
        if negate {
            content = -content;
        }
        let prim = PolyN::from_coeffs(
            ints.iter().map(|v| Rat::from_bigint(v / &content)).collect(),
        );
        // self = (content/den_lcm) * prim
        let scalar = Rat::new(content, den_lcm).expect("nonzero lcm");
        (prim, scalar)
    }

    /// Exact integer roots, found by the rational-root theorem over divisors
    /// of the trailing coefficient and verified by exact evaluation.
    pub fn integer_roots(&self) -> Result<BTreeSet<BigInt>, ExactError> {
        if self.is_zero() {
            return Err(ExactError::ZeroPolynomial);
        }
        let (prim, _) = self.integer_primitive();
        let mut roots = BTreeSet::new();
        // strip n^k
        let mut coeffs = prim.coeffs.clone();
        let mut stripped = 0usize;
        while coeffs.first().is_some_and(Rat::is_zero) {
            coeffs.remove(0);
            stripped += 1;
        }
        if stripped > 0 {
            roots.insert(BigInt::zero());
        }
        let poly = PolyN::from_coeffs(coeffs);
        if poly.degree().unwrap_or(0) == 0 {
            return Ok(roots);
        }
        let trailing = poly.coeff(0).numer().abs();
        for d in divisors(&trailing) {
            for cand in [d.clone(), -&d] {
                let val = poly.eval(&Rat::from_bigint(cand.clone()));
                if val.is_zero() {
                    roots.insert(cand);
                }
            }
        }
        Ok(roots)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs
                .iter()
                .map(|c| serde_json::Value::String(c.to_string()))
                .collect(),
        )
    }
}

fn divisors(v: &BigInt) -> Vec<BigInt> {
    // v > 0; trailing coefficients in this engine stay small.
    let mut out = Vec::new();
    let mut i = BigInt::one();
    while &i * &i <= *v {
        if (v % &i).is_zero() {
            out.push(i.clone());
            let j = v / &i;
            if j != i {
                out.push(j);
            }
        }
        i += 1u32;
    }
    out
}

impl fmt::Display for PolyN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (deg, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match deg {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != Rat::one() {
                        write!(f, "{mag}")?;
                    }
                    write!(f, "n")?;
                    if deg > 1 {
                        write!(f, "^{deg}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PolyN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for &PolyN {
    type Output = PolyN;
    fn add(self, rhs: &PolyN) -> PolyN {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            out.push(&self.coeff(i) + &rhs.coeff(i));
        }
        PolyN::from_coeffs(out)
    }
}

impl Sub for &PolyN {
    type Output = PolyN;
    fn sub(self, rhs: &PolyN) -> PolyN {
        self + &(-rhs)
    }
}

impl Mul for &PolyN {
    type Output = PolyN;
    fn mul(self, rhs: &PolyN) -> PolyN {
        if self.is_zero() || rhs.is_zero() {
            return PolyN::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        PolyN::from_coeffs(out)
    }
}

impl Neg for &PolyN {
    type Output = PolyN;
    fn neg(self) -> PolyN {
        PolyN::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

// ---------------------------------------------------------------------------
// RatN
// ---------------------------------------------------------------------------

/// Element of the field Q(n): a reduced ratio of coprime primitive integer
/// polynomials, denominator with positive leading coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatN {
    num: PolyN,
    den: PolyN,
}

impl RatN {
    pub fn zero() -> Self {
        RatN { num: PolyN::zero(), den: PolyN::one() }
    }

    pub fn one() -> Self {
        RatN::from_int(1)
    }

    /// The indeterminate `n`.
    pub fn var() -> Self {
        RatN::from_poly(PolyN::var())
    }

    pub fn from_int(v: i64) -> Self {
        RatN::from_poly(PolyN::from_ints(&[v]))
    }

    pub fn from_rat(r: Rat) -> Self {
        RatN::from_poly(PolyN::constant(r))
    }

    pub fn from_poly(p: PolyN) -> Self {
        RatN::new(p, PolyN::one()).expect("unit denominator")
    }

    pub fn new(num: PolyN, den: PolyN) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatN::zero());
        }
        let g = num.gcd(&den);
        let num = num.divexact(&g).expect("gcd divides");
        let den = den.divexact(&g).expect("gcd divides");
        let (nump, nums) = num.integer_primitive();
        let (denp, dens) = den.integer_primitive();
        // num/den = (nums/dens) * nump/denp, with nums/dens a reduced rational
        let s = &nums / &dens;
        let num = nump.scale(&Rat::from_bigint(s.numer().clone()));
        let den = denp.scale(&Rat::from_bigint(s.denom().clone()));
        Ok(RatN { num, den })
    }

    /// Convenience constructor from integer coefficient slices, low degree
    /// first; panics on a zero denominator.
    pub fn frac(num: &[i64], den: &[i64]) -> Self {
        RatN::new(PolyN::from_ints(num), PolyN::from_ints(den)).expect("nonzero denominator")
    }

    pub fn num(&self) -> &PolyN {
        &self.num
    }

    pub fn den(&self) -> &PolyN {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact evaluation at `n = x`; a vanishing denominator is a pole.
    pub fn eval(&self, x: &Rat) -> Result<Rat, ExactError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(ExactError::PoleAtPoint { point: x.to_string() });
        }
        Ok(&self.num.eval(x) / &d)
    }

    pub fn checked_div(&self, rhs: &RatN) -> Result<RatN, ExactError> {
        if rhs.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        RatN::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn recip(&self) -> Result<RatN, ExactError> {
        RatN::one().checked_div(self)
    }

    pub fn scale_rat(&self, c: &Rat) -> RatN {
        RatN::new(self.num.scale(c), self.den.clone()).expect("nonzero denominator")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "num": self.num.to_json(),
            "den": self.den.to_json(),
            "display": self.to_string(),
        })
    }
}

/// The four field operations, dispatched by name. Division by the zero
/// element is an error; everything else is total.
pub fn ratn_arith(a: &RatN, b: &RatN, op: ArithOp) -> Result<RatN, ExactError> {
    match op {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => Ok(a - b),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.checked_div(b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl fmt::Display for RatN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == PolyN::one() {
            if self.num.degree().unwrap_or(0) == 0 || self.num.is_zero() {
                write!(f, "{}", self.num)
            } else {
                write!(f, "({})", self.num)
            }
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for &RatN {
    type Output = RatN;
    fn add(self, rhs: &RatN) -> RatN {
        RatN::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .expect("nonzero denominator")
    }
}

impl Sub for &RatN {
    type Output = RatN;
    fn sub(self, rhs: &RatN) -> RatN {
        self + &(-rhs)
    }
}

impl Mul for &RatN {
    type Output = RatN;
    fn mul(self, rhs: &RatN) -> RatN {
        RatN::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominator")
    }
}

impl Div for &RatN {
    type Output = RatN;
    /// Panics on a zero divisor; use [`RatN::checked_div`] on untrusted input.
    fn div(self, rhs: &RatN) -> RatN {
        self.checked_div(rhs).expect("RatN division by zero")
    }
}

impl Neg for &RatN {
    type Output = RatN;
    fn neg(self) -> RatN {
        RatN { num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! ratn_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for RatN {
            type Output = RatN;
            fn $method(self, rhs: RatN) -> RatN {
                (&self).$method(&rhs)
            }
        }
    };
}
ratn_owned!(Add, add);
ratn_owned!(Sub, sub);
ratn_owned!(Mul, mul);
ratn_owned!(Div, div);

impl Neg for RatN {
    type Output = RatN;
    fn neg(self) -> RatN {
        -&self
    }
}

// ---------------------------------------------------------------------------
// MatN
// ---------------------------------------------------------------------------

/// Dense matrix over Q(n), row major.
#[derive(Clone, PartialEq, Eq)]
pub struct MatN {
    rows: usize,
    cols: usize,
    entries: Vec<RatN>,
}

impl MatN {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatN { rows, cols, entries: vec![RatN::zero(); rows * cols] }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = MatN::zeros(k, k);
        for i in 0..k {
            *m.at_mut(i, i) = RatN::one();
        }
        m
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&v| RatN::from_int(v)));
        }
        MatN { rows: r, cols: c, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &RatN {
        &self.entries[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut RatN {
        &mut self.entries[i * self.cols + j]
    }

    pub fn scale(&self, c: &RatN) -> MatN {
        MatN {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    pub fn add(&self, rhs: &MatN) -> MatN {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        MatN {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// `shift + self` with `shift` times the identity.
    pub fn shifted(&self, shift: &RatN) -> MatN {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            *out.at_mut(i, i) = out.at(i, i) + shift;
        }
        out
    }

    pub fn matmul(&self, rhs: &MatN) -> MatN {
        assert_eq!(self.cols, rhs.rows);
        let mut out = MatN::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    *out.at_mut(i, j) = out.at(i, j) + &(a * rhs.at(k, j));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[RatN]) -> Vec<RatN> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = RatN::zero();
                for (j, vj) in v.iter().enumerate() {
                    let a = self.at(i, j);
                    if !a.is_zero() && !vj.is_zero() {
                        acc = &acc + &(a * vj);
                    }
                }
                acc
            })
            .collect()
    }

    /// Solves `self * x = rhs` exactly by fraction-free (Bareiss) elimination
    /// over Q[n], dividing back into Q(n) only at the end. The solution is
    /// verified by back-substitution before it is returned.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, rhs: &[RatN]) -> Result<Vec<RatN>, ExactError> {
        if self.rows != self.cols {
            return Err(ExactError::ShapeMismatch(format!(
                "solve needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if rhs.len() != self.rows {
            return Err(ExactError::ShapeMismatch(format!(
                "rhs length {} vs {} rows",
                rhs.len(),
                self.rows
            )));
        }
        let k = self.rows;
        if k == 0 {
            return Ok(vec![]);
        }

        // Clear denominators row by row: augmented integer-polynomial matrix.
        let mut a: Vec<Vec<PolyN>> = Vec::with_capacity(k);
        for i in 0..k {
            let mut lcm = PolyN::one();
            let mut row_dens: Vec<&PolyN> = (0..k).map(|j| self.at(i, j).den()).collect();
            row_dens.push(rhs[i].den());
            for d in row_dens {
                let g = lcm.gcd(d);
                lcm = (&lcm * d).divexact(&g).expect("gcd divides");
            }
            let mut row: Vec<PolyN> = Vec::with_capacity(k + 1);
            for j in 0..k {
                let e = self.at(i, j);
                row.push((e.num() * &lcm).divexact(e.den()).expect("lcm clears"));
            }
            row.push(
                (rhs[i].num() * &lcm)
                    .divexact(rhs[i].den())
                    .expect("lcm clears"),
            );
            a.push(row);
        }

        // Bareiss forward elimination.
        let mut prev = PolyN::one();
        for col in 0..k {
            let pivot_row = (col..k).find(|&r| !a[r][col].is_zero());
            let Some(p) = pivot_row else {
                return Err(ExactError::SingularMatrix);
            };
            a.swap(col, p);
            for r in col + 1..k {
                for c in col + 1..=k {
                    let t = &(&a[col][col] * &a[r][c]) - &(&a[r][col] * &a[col][c]);
                    a[r][c] = t.divexact(&prev).expect("Bareiss division is exact");
                }
                a[r][col] = PolyN::zero();
            }
            prev = a[col][col].clone();
        }

        // Back substitution over Q(n).
        let mut x = vec![RatN::zero(); k];
        for i in (0..k).rev() {
            let mut acc = RatN::from_poly(a[i][k].clone());
            for j in i + 1..k {
                acc = &acc - &(&RatN::from_poly(a[i][j].clone()) * &x[j]);
            }
            let piv = RatN::from_poly(a[i][i].clone());
            x[i] = acc.checked_div(&piv).map_err(|_| ExactError::SingularMatrix)?;
        }

        let check = self.mul_vec(&x);
        assert!(
            check.iter().zip(rhs).all(|(a, b)| a == b),
            "exact solve failed back-substitution"
        );
        Ok(x)
    }

    /// Solves on the subspace spanned by the masked basis indices: the
    /// principal submatrix system is solved, off-mask coordinates are zero,
    /// and the full equation is then required to hold.
    pub fn solve_masked(&self, rhs: &[RatN], mask: &[usize]) -> Result<Vec<RatN>, ExactError> {
        let mut sub = MatN::zeros(mask.len(), mask.len());
        for (si, &i) in mask.iter().enumerate() {
            for (sj, &j) in mask.iter().enumerate() {
                *sub.at_mut(si, sj) = self.at(i, j).clone();
            }
        }
        let sub_rhs: Vec<RatN> = mask.iter().map(|&i| rhs[i].clone()).collect();
        let sub_x = sub.solve(&sub_rhs)?;
        let mut x = vec![RatN::zero(); self.cols];
        for (si, &i) in mask.iter().enumerate() {
            x[i] = sub_x[si].clone();
        }
        let full = self.mul_vec(&x);
        if full.iter().zip(rhs).any(|(a, b)| a != b) {
            return Err(ExactError::InconsistentSubspace);
        }
        Ok(x)
    }
}

impl fmt::Debug for MatN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
