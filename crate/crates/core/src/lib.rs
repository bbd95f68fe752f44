//! Exact arithmetic for the sequences `gamma^n - 1` and `Phi_n(gamma)` over
//! quadratic (or rational) fields.
//!
//! The crate factors these values into prime ideals, classifies primitive
//! divisors, computes absolute logarithmic heights by independent routes,
//! and assembles per-`(gamma, n)` ledgers of certified inequality checks.

pub mod arith;
pub mod cyclotomic;
pub mod field;
pub mod height;
pub mod ideals;
pub mod ledger;
pub mod real;
pub mod verifier;

pub use arith::{Factorization, Factorizer};
pub use field::{FieldElement, QuadraticField};
pub use real::RealApprox;
