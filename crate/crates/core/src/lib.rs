//! Exact-arithmetic engine for the third-order obstruction computation on
//! shrinking Ricci solitons over products of round 2-spheres.
//!
//! Everything here is exact: arbitrary-precision rationals, the rational
//! function field Q(n) in the dimension symbol `n`, and polynomial functions
//! on products of unit 2-spheres. No floating point appears anywhere.
//!
//! The crate is organised as four layers:
//!
//! * [`exactnum`] — rationals, univariate polynomials over Q, the field Q(n)
//!   and dense linear algebra over it (fraction-free elimination).
//! * [`spherepoly`] — a brute-force oracle: exact polynomial calculus on
//!   `(S^2)^B` (canonical forms, spherical Laplacians, tangential gradient
//!   pairings, mean-value integration via monomial moments).
//! * [`spectra`] — sphere spectra, product-spectrum assembly and the kernel
//!   dimension reports for the three manifold classes.
//! * [`varengine`] — the variational pipeline over Q(n): ansatz Laplacian
//!   matrices, the tau/f/u/h solvers, moment tables, integration by parts,
//!   cross terms, the third variation and the final obstruction report.
//!
//! Every quantity with a published closed form is computed twice: once from
//! its defining equation and once from the reference closed form. The two
//! are compared exactly and any disagreement is carried in a discrepancy
//! ledger rather than silently resolved.

pub mod exactnum;
pub mod oracle;
pub mod spectra;
pub mod spherepoly;
pub mod varengine;

pub use exactnum::{ExactError, MatN, PolyN, Rat, RatN};
