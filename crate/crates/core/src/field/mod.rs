//! The field `K = Q(sqrt m)` (or `Q` itself) and exact elements of it.

mod element;
mod embed;
mod parse;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::factor;

pub use element::{FieldElement, IntegralForm};
pub use embed::EmbeddingValue;
pub use parse::parse_element;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("cannot parse element literal {0:?}: {1}")]
    Parse(String, String),
    #[error("{0} is not a valid field parameter (need a squarefree integer other than 0 and 1)")]
    InvalidField(BigInt),
    #[error("polynomial {0} has rational roots")]
    ReducibleInput(String),
    #[error("zero element")]
    ZeroElement,
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements of different fields: {0} and {1}")]
    FieldMismatch(String, String),
}

/// `Q(sqrt m)` for squarefree `m != 0, 1`; `m = 1` encodes `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticField {
    m: BigInt,
    disc: BigInt,
}

impl QuadraticField {
    pub fn rationals() -> Self {
        QuadraticField {
            m: BigInt::one(),
            disc: BigInt::one(),
        }
    }

    pub fn new(m: impl Into<BigInt>) -> Result<Self, FieldError> {
        let m = m.into();
        if m.is_zero() || m.is_one() || !is_squarefree(&m) {
            return Err(FieldError::InvalidField(m));
        }
        let disc = if m.mod_floor(&BigInt::from(4)) == BigInt::one() {
            m.clone()
        } else {
            &m * 4
        };
        Ok(QuadraticField { m, disc })
    }

    /// The squarefree `m`; 1 for `Q`.
    pub fn m(&self) -> &BigInt {
        &self.m
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    pub fn degree(&self) -> u32 {
        if self.m.is_one() {
            1
        } else {
            2
        }
    }

    pub fn is_rational(&self) -> bool {
        self.degree() == 1
    }

    pub fn is_imaginary(&self) -> bool {
        self.m.is_negative()
    }

    /// True when the integral basis is `{1, (1 + sqrt m)/2}`.
    pub fn omega_is_half(&self) -> bool {
        self.degree() == 2 && self.m.mod_floor(&BigInt::from(4)).is_one()
    }

    /// `(b, c)` with `omega^2 + b omega + c = 0`.
    pub fn omega_minpoly(&self) -> (BigInt, BigInt) {
        if self.omega_is_half() {
            (-BigInt::one(), (BigInt::one() - &self.m) / 4)
        } else {
            (BigInt::zero(), -self.m.clone())
        }
    }
}

impl fmt::Display for QuadraticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "Q")
        } else {
            write!(f, "Q(sqrt({}))", self.m)
        }
    }
}

pub fn is_squarefree(n: &BigInt) -> bool {
    let f = factor(n).expect("nonzero");
    f.factors().iter().all(|(_, e)| *e == 1)
}

/// `n = s^2 * m` with `m` squarefree (sign carried by `m`), `s > 0`.
pub fn squarefree_decompose(n: &BigInt) -> (BigInt, BigInt) {
    assert!(!n.is_zero());
    let f = factor(n).expect("nonzero");
    let mut s = BigInt::one();
    let mut m = BigInt::from(f.unit());
    for (p, e) in f.factors() {
        let p = BigInt::from(p.clone());
        s *= num_traits::pow(p.clone(), (*e / 2) as usize);
        if e % 2 == 1 {
            m *= p;
        }
    }
    (s, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminants() {
        assert_eq!(QuadraticField::new(2).unwrap().discriminant(), &BigInt::from(8));
        assert_eq!(QuadraticField::new(5).unwrap().discriminant(), &BigInt::from(5));
        assert_eq!(QuadraticField::new(-1).unwrap().discriminant(), &BigInt::from(-4));
        assert_eq!(QuadraticField::new(-7).unwrap().discriminant(), &BigInt::from(-7));
        assert_eq!(QuadraticField::rationals().discriminant(), &BigInt::one());
        assert!(QuadraticField::new(8).is_err());
        assert!(QuadraticField::new(1).is_err());
        assert!(QuadraticField::new(0).is_err());
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_decompose(&BigInt::from(-28)), (BigInt::from(2), BigInt::from(-7)));
        assert_eq!(squarefree_decompose(&BigInt::from(72)), (BigInt::from(6), BigInt::from(2)));
        assert_eq!(squarefree_decompose(&BigInt::from(9)), (BigInt::from(3), BigInt::from(1)));
    }
}
