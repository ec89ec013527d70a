//! Brute-force oracle: exact polynomial function calculus on `(S^2)^B`.
//!
//! A function is stored as a polynomial in the `3B` ambient coordinates
//! `x_b, y_b, z_b`, reduced to the canonical form in which every `z_b`
//! exponent is 0 or 1 (the relation `z_b^2 = 1 - x_b^2 - y_b^2` is applied
//! until exhausted). Two raw polynomials represent the same function on
//! `(S^2)^B` exactly when their canonical forms coincide.
//!
//! All sphere factors are unit round spheres. Integration is the mean value
//! (the measure is normalised so the constant 1 integrates to 1), which is
//! the weighted integral used throughout the variational pipeline.

use crate::exactnum::Rat;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Ambient coordinate axis within one sphere factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Exact rational-coefficient polynomial function on `(S^2)^B`, canonical.
#[derive(Clone, PartialEq, Eq)]
pub struct SpherePoly {
    factors: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl SpherePoly {
    pub fn zero(factors: usize) -> Self {
        SpherePoly { factors, terms: BTreeMap::new() }
    }

    pub fn constant(factors: usize, c: Rat) -> Self {
        let mut p = SpherePoly::zero(factors);
        if !c.is_zero() {
            p.terms.insert(vec![0; 3 * factors], c);
        }
        p
    }

    pub fn one(factors: usize) -> Self {
        SpherePoly::constant(factors, Rat::one())
    }

    /// The coordinate function on the given factor along the given axis.
    pub fn coordinate(factors: usize, factor: usize, axis: Axis) -> Self {
        assert!(factor < factors, "factor index out of range");
        let mut exps = vec![0u32; 3 * factors];
        exps[3 * factor + axis.index()] = 1;
        let mut p = SpherePoly::zero(factors);
        p.terms.insert(exps, Rat::one());
        p
    }

    /// Builds the canonical form of an arbitrary raw term map.
    pub fn from_terms<I>(factors: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rat)>,
    {
        let mut p = SpherePoly::zero(factors);
        for (exps, coeff) in terms {
            assert_eq!(exps.len(), 3 * factors, "exponent vector length");
            p.add_canonicalized(&exps, &coeff);
        }
        p
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    /// Total degree in the variables of one factor, for a single term.
    fn factor_degree(exps: &[u32], b: usize) -> u32 {
        exps[3 * b] + exps[3 * b + 1] + exps[3 * b + 2]
    }

    /// Adds `coeff * monomial(exps)` after reducing every `z_b^2` away.
    fn add_canonicalized(&mut self, exps: &[u32], coeff: &Rat) {
        if coeff.is_zero() {
            return;
        }
        // find a factor whose z exponent is >= 2
        for b in 0..self.factors {
            let ez = exps[3 * b + 2];
            if ez >= 2 {
                // z^2 = 1 - x^2 - y^2
                let mut base = exps.to_vec();
                base[3 * b + 2] = ez - 2;
                self.add_canonicalized(&base, coeff);
                let mut wx = base.clone();
                wx[3 * b] += 2;
                self.add_canonicalized(&wx, &-coeff);
                let mut wy = base.clone();
                wy[3 * b + 1] += 2;
                self.add_canonicalized(&wy, &-coeff);
                return;
            }
        }
        let entry = self.terms.entry(exps.to_vec()).or_insert_with(Rat::zero);
        *entry = &*entry + coeff;
        if entry.is_zero() {
            self.terms.remove(exps);
        }
    }

    pub fn scale(&self, c: &Rat) -> SpherePoly {
        if c.is_zero() {
            return SpherePoly::zero(self.factors);
        }
        SpherePoly {
            factors: self.factors,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Partial derivative in one ambient variable. No canonicalization is
    /// needed (differentiation cannot raise a z exponent) and distinct
    /// canonical monomials have distinct derivatives in a fixed variable.
    fn derivative(&self, var: usize) -> SpherePoly {
        let mut out = SpherePoly::zero(self.factors);
        for (exps, coeff) in &self.terms {
            let e = exps[var];
            if e == 0 {
                continue;
            }
            let mut d = exps.clone();
            d[var] = e - 1;
            out.terms.insert(d, coeff * &Rat::from_int(e as i64));
        }
        out
    }

    /// Euler operator in factor `b`: each monomial is scaled by its degree
    /// in that factor's variables. On the sphere this is the radial part
    /// `x_b . grad_b`.
    fn euler(&self, b: usize) -> SpherePoly {
        let mut out = SpherePoly::zero(self.factors);
        for (exps, coeff) in &self.terms {
            let d = Self::factor_degree(exps, b);
            if d == 0 {
                continue;
            }
            out.terms
                .insert(exps.clone(), coeff * &Rat::from_int(d as i64));
        }
        out
    }

    /// Spherical Laplacian in the `b`-th factor. Each stored monomial is
    /// homogeneous of its own degree `d` in that factor, and on the sphere
    /// the Laplacian of its restriction is the restriction of the ambient
    /// Laplacian minus `d(d+1)` times the monomial.
    pub fn laplacian_factor(&self, b: usize) -> SpherePoly {
        assert!(b < self.factors, "factor index out of range");
        let mut out = SpherePoly::zero(self.factors);
        for (exps, coeff) in &self.terms {
            let d = Self::factor_degree(exps, b) as i64;
            for off in 0..3 {
                let var = 3 * b + off;
                let e = exps[var] as i64;
                if e >= 2 {
                    let mut low = exps.clone();
                    low[var] -= 2;
                    out.add_canonicalized(&low, &(coeff * &Rat::from_int(e * (e - 1))));
                }
            }
            out.add_canonicalized(exps, &(coeff * &Rat::from_int(-d * (d + 1))));
        }
        out
    }

    /// Total spherical Laplacian (sum over the factors).
    pub fn laplacian(&self) -> SpherePoly {
        let mut out = SpherePoly::zero(self.factors);
        for b in 0..self.factors {
            out = &out + &self.laplacian_factor(b);
        }
        out
    }

    /// Tangential gradient pairing `<dp, dq>` on `(S^2)^B`.
    pub fn grad_inner(&self, other: &SpherePoly) -> SpherePoly {
        assert_eq!(self.factors, other.factors);
        let mut out = SpherePoly::zero(self.factors);
        for b in 0..self.factors {
            for off in 0..3 {
                let var = 3 * b + off;
                out = &out + &(&self.derivative(var) * &other.derivative(var));
            }
            out = &out - &(&self.euler(b) * &other.euler(b));
        }
        out
    }

    /// Exact mean value over `(S^2)^B` (the mean of 1 is 1).
    pub fn mean_integral(&self) -> Rat {
        let mut total = Rat::zero();
        for (exps, coeff) in &self.terms {
            let mut m = coeff.clone();
            for b in 0..self.factors {
                let f = monomial_moment(exps[3 * b], exps[3 * b + 1], exps[3 * b + 2]);
                if f.is_zero() {
                    m = Rat::zero();
                    break;
                }
                m = &m * &f;
            }
            total = &total + &m;
        }
        total
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(exps, coeff)| {
                    serde_json::json!({
                        "exponents": exps,
                        "coeff": coeff.to_string(),
                    })
                })
                .collect(),
        )
    }
}

/// Mean of `x^a y^b z^c` over the unit `S^2`: zero when any exponent is odd,
/// otherwise `(a-1)!!(b-1)!!(c-1)!!/(a+b+c+1)!!`.
fn monomial_moment(a: u32, b: u32, c: u32) -> Rat {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return Rat::zero();
    }
    let num = double_factorial(a as i64 - 1) * double_factorial(b as i64 - 1)
        * double_factorial(c as i64 - 1);
    let den = double_factorial((a + b + c + 1) as i64);
    Rat::new(num.into(), den.into()).expect("positive double factorial")
}

fn double_factorial(k: i64) -> i128 {
    let mut acc: i128 = 1;
    let mut v = k;
    while v > 1 {
        acc *= v as i128;
        v -= 2;
    }
    acc
}

impl fmt::Debug for SpherePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = ["x", "y", "z"];
        let mut first = true;
        for (exps, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({coeff})")?;
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    write!(f, "*{}{}", names[i % 3], i / 3 + 1)?;
                    if e > 1 {
                        write!(f, "^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Add for &SpherePoly {
    type Output = SpherePoly;
    fn add(self, rhs: &SpherePoly) -> SpherePoly {
        assert_eq!(self.factors, rhs.factors);
        let mut out = self.clone();
        for (exps, coeff) in &rhs.terms {
            let entry = out.terms.entry(exps.clone()).or_insert_with(Rat::zero);
            *entry = &*entry + coeff;
            if entry.is_zero() {
                out.terms.remove(exps);
            }
        }
        out
    }
}

impl Sub for &SpherePoly {
    type Output = SpherePoly;
    fn sub(self, rhs: &SpherePoly) -> SpherePoly {
        self + &(-rhs)
    }
}

impl Neg for &SpherePoly {
    type Output = SpherePoly;
    fn neg(self) -> SpherePoly {
        self.scale(&Rat::from_int(-1))
    }
}

impl Mul for &SpherePoly {
    type Output = SpherePoly;
    fn mul(self, rhs: &SpherePoly) -> SpherePoly {
        assert_eq!(self.factors, rhs.factors);
        let mut out = SpherePoly::zero(self.factors);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_canonicalized(&exps, &(ca * cb));
            }
        }
        out
    }
}

/// A conformal-kernel direction: one amplitude per sphere factor, with the
/// distinguished coordinate axis fixed to `x` by convention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelVector {
    alphas: Vec<Rat>,
}

impl KernelVector {
    pub fn new(alphas: Vec<Rat>) -> Self {
        KernelVector { alphas }
    }

    pub fn from_ints(alphas: &[i64]) -> Self {
        KernelVector::new(alphas.iter().map(|&a| Rat::from_int(a)).collect())
    }

    pub fn factors(&self) -> usize {
        self.alphas.len()
    }

    pub fn alpha(&self, b: usize) -> &Rat {
        &self.alphas[b]
    }

    pub fn is_trivial(&self) -> bool {
        self.alphas.iter().all(Rat::is_zero)
    }

    /// `v = sum_b alpha_b x_b`.
    pub fn instantiate(&self) -> SpherePoly {
        let b_total = self.alphas.len();
        let mut v = SpherePoly::zero(b_total);
        for (b, a) in self.alphas.iter().enumerate() {
            v = &v + &SpherePoly::coordinate(b_total, b, Axis::X).scale(a);
        }
        v
    }

    /// The single-factor component `v_b = alpha_b x_b`.
    pub fn component(&self, b: usize) -> SpherePoly {
        SpherePoly::coordinate(self.alphas.len(), b, Axis::X).scale(&self.alphas[b])
    }

    /// `sigma_k = sum_b alpha_b^k`.
    pub fn sigma(&self, k: u32) -> Rat {
        let mut s = Rat::zero();
        for a in &self.alphas {
            s = &s + &a.pow(k);
        }
        s
    }
}
