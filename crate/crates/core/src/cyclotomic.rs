//! Integer cyclotomic polynomials and their values at field elements.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{divisors, omega_u64, phi_u64};
use crate::field::FieldElement;
use crate::height::mahler_height;
use crate::ledger::{Relation, Row};
use crate::real::{log_star, RealApprox};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycError {
    #[error("Phi_{n}({gamma}) = 0")]
    RootOfUnityAtN { gamma: String, n: u64 },
    #[error("{0} is zero or a root of unity")]
    Torsion(String),
}

/// `Phi_n` with ascending integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycPoly {
    pub n: u64,
    pub coefficients: Vec<BigInt>,
}

impl CycPoly {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.coefficients
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, a| acc * x + a)
    }
}

pub const DEFAULT_MEMO_CAP: u64 = 100_000;

static MEMO_CAP: AtomicU64 = AtomicU64::new(DEFAULT_MEMO_CAP);
static MEMO: LazyLock<RwLock<HashMap<u64, Arc<CycPoly>>>> = LazyLock::new(Default::default);

/// Largest `n` whose `Phi_n` is kept in the memo table.
pub fn set_memo_cap(cap: u64) {
    MEMO_CAP.store(cap, Ordering::Relaxed);
}

/// Exact quotient of `num` by the monic `den` (both ascending).
fn div_exact_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dn;
    let mut q = vec![BigInt::zero(); qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dn].clone();
        if !c.is_zero() {
            for (j, d) in den.iter().enumerate() {
                rem[i + j] -= &c * d;
            }
        }
        q[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact division");
    q
}

/// `Phi_n`, by dividing `x^n - 1` by `Phi_d` for every proper divisor `d`.
pub fn cyclotomic(n: u64) -> Arc<CycPoly> {
    assert!(n >= 1, "Phi_0 is undefined");
    if let Some(p) = MEMO.read().expect("memo lock").get(&n) {
        return p.clone();
    }
    let mut poly = vec![BigInt::zero(); n as usize + 1];
    poly[0] = -BigInt::one();
    poly[n as usize] = BigInt::one();
    for d in divisors(n) {
        if d < n {
            poly = div_exact_monic(&poly, &cyclotomic(d).coefficients);
        }
    }
    let p = Arc::new(CycPoly { n, coefficients: poly });
    if n <= MEMO_CAP.load(Ordering::Relaxed) {
        MEMO.write().expect("memo lock").insert(n, p.clone());
    }
    p
}

/// `Phi_n(x)` exactly.
///
/// Writes `x = (X + Y sqrt m)/D` and runs Horner on integer pairs,
/// dividing by `D^phi(n)` once at the end.
pub fn eval_cyclotomic(n: u64, x: &FieldElement) -> FieldElement {
    let poly = cyclotomic(n);
    let field = x.field();
    let d = x.x().denom().lcm(x.y().denom());
    let xx = x.x().numer() * (&d / x.x().denom());
    let yy = x.y().numer() * (&d / x.y().denom());
    let m = field.m();
    let mut a = BigInt::one();
    let mut b = BigInt::zero();
    let mut dpow = BigInt::one();
    for c in poly.coefficients.iter().rev().skip(1) {
        dpow *= &d;
        let na = &a * &xx + m * &b * &yy + c * &dpow;
        let nb = &a * &yy + &b * &xx;
        a = na;
        b = nb;
    }
    let den = dpow;
    let y = if field.is_rational() {
        BigRational::zero()
    } else {
        BigRational::new(b, den.clone())
    };
    FieldElement::new(field, BigRational::new(a, den), y)
}

fn log_pi_n(n: u64, prec: u32) -> Option<RealApprox> {
    (RealApprox::pi(prec) * RealApprox::from_i64(n as i64, prec)).ln()
}

/// `|h(Phi_n(gamma)) - phi(n) h(gamma)| <= 2^omega(n) log(pi n)`.
pub fn check_prop21_item1(gamma: &FieldElement, n: u64) -> Result<Row, CycError> {
    let value = eval_cyclotomic(n, gamma);
    if value.is_zero() {
        return Err(CycError::RootOfUnityAtN {
            gamma: gamma.to_string(),
            n,
        });
    }
    let phi = BigInt::from(phi_u64(n));
    let w = omega_u64(n) as i64;
    let row = Row::certified("prop21.1", Relation::Le, true, |p| {
        let hv = mahler_height(&value, p).ok()?;
        let hg = mahler_height(gamma, p).ok()?;
        let lhs = (hv - hg.mul_int(&phi)).abs();
        let rhs = log_pi_n(n, p)?.mul_pow2(w);
        Some((lhs, rhs))
    });
    Ok(row.with_note(format!("gamma={gamma} n={n}")))
}

/// `min_sigma log|Phi_n(gamma^sigma)| >= -10^14 d^5 h(gamma) 2^omega(n) log* n`.
pub fn check_prop21_item2(gamma: &FieldElement, n: u64) -> Result<Row, CycError> {
    if gamma.is_zero() || gamma.is_root_of_unity() {
        return Err(CycError::Torsion(gamma.to_string()));
    }
    let value = eval_cyclotomic(n, gamma);
    if value.is_zero() {
        return Err(CycError::RootOfUnityAtN {
            gamma: gamma.to_string(),
            n,
        });
    }
    let d = gamma.field().degree();
    let c = BigInt::from(10).pow(14) * BigInt::from(d).pow(5);
    let w = omega_u64(n) as i64;
    let row = Row::certified("prop21.2", Relation::Ge, true, |p| {
        let logs = value.log_abs_embeddings(p)?;
        let lhs = logs.iter().skip(1).fold(logs[0].clone(), |a, l| a.min(l));
        let h = mahler_height(gamma, p).ok()?;
        let ls = log_star(&RealApprox::from_i64(n as i64, p)).ok()?;
        let rhs = -(h * ls).mul_int(&c).mul_pow2(w);
        Some((lhs, rhs))
    });
    Ok(row.with_note(format!("gamma={gamma} n={n}")))
}
