use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{squarefree_decompose, FieldError, QuadraticField};

/// `x + y sqrt(m)` with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: QuadraticField,
    x: BigRational,
    y: BigRational,
}

/// `(u + v omega) / c` with `u, v` integers and `c > 0` the least such denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralForm {
    pub u: BigInt,
    pub v: BigInt,
    pub c: BigInt,
}

fn lcm_den(a: &BigRational, b: &BigRational) -> BigInt {
    a.denom().lcm(b.denom())
}

impl FieldElement {
    pub fn new(field: &QuadraticField, x: BigRational, y: BigRational) -> Self {
        assert!(
            y.is_zero() || !field.is_rational(),
            "irrational part in the rational field"
        );
        FieldElement {
            field: field.clone(),
            x,
            y,
        }
    }

    pub fn from_rational(field: &QuadraticField, q: BigRational) -> Self {
        Self::new(field, q, BigRational::zero())
    }

    pub fn from_int(field: &QuadraticField, n: impl Into<BigInt>) -> Self {
        Self::from_rational(field, BigRational::from_integer(n.into()))
    }

    pub fn zero(field: &QuadraticField) -> Self {
        Self::from_int(field, 0)
    }

    pub fn one(field: &QuadraticField) -> Self {
        Self::from_int(field, 1)
    }

    /// `sqrt m` itself.
    pub fn sqrt_m(field: &QuadraticField) -> Self {
        Self::new(field, BigRational::zero(), BigRational::one())
    }

    /// The root `(-b +- sqrt(b^2 - 4ac)) / 2a` of an irreducible quadratic.
    pub fn from_minpoly(a: &BigInt, b: &BigInt, c: &BigInt, plus: bool) -> Result<Self, FieldError> {
        let shown = format!("({a},{b},{c})");
        if a.is_zero() {
            return Err(FieldError::Parse(shown, "leading coefficient is zero".into()));
        }
        if c.is_zero() {
            return Err(FieldError::ReducibleInput(shown));
        }
        let delta = b * b - BigInt::from(4) * a * c;
        if delta.is_zero() {
            return Err(FieldError::ReducibleInput(shown));
        }
        let (s, m) = squarefree_decompose(&delta);
        if m.is_one() {
            return Err(FieldError::ReducibleInput(shown));
        }
        let field = QuadraticField::new(m).expect("squarefree part");
        let two_a = BigInt::from(2) * a;
        let x = BigRational::new(-b.clone(), two_a.clone());
        let y = BigRational::new(if plus { s } else { -s }, two_a);
        Ok(FieldElement::new(&field, x, y))
    }

    pub fn field(&self) -> &QuadraticField {
        &self.field
    }

    pub fn x(&self) -> &BigRational {
        &self.x
    }

    pub fn y(&self) -> &BigRational {
        &self.y
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.x.is_one() && self.y.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    pub fn degree(&self) -> u32 {
        self.field.degree()
    }

    pub fn conjugate(&self) -> Self {
        FieldElement {
            field: self.field.clone(),
            x: self.x.clone(),
            y: -&self.y,
        }
    }

    /// Norm from the ambient field, so a rational `q` in a quadratic field has norm `q^2`.
    pub fn norm(&self) -> BigRational {
        if self.field.is_rational() {
            self.x.clone()
        } else {
            &self.x * &self.x - BigRational::from_integer(self.field.m().clone()) * &self.y * &self.y
        }
    }

    pub fn trace(&self) -> BigRational {
        if self.field.is_rational() {
            self.x.clone()
        } else {
            &self.x + &self.x
        }
    }

    pub fn checked_inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let n = self.norm();
        if self.field.is_rational() {
            return Ok(Self::from_rational(&self.field, n.recip()));
        }
        let c = self.conjugate();
        Ok(FieldElement {
            field: self.field.clone(),
            x: &c.x / &n,
            y: &c.y / &n,
        })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self * &other.checked_inv()?)
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `x^n - 1`.
    pub fn pow_minus_one(&self, n: u64) -> Self {
        &self.pow(n) - &Self::one(&self.field)
    }

    /// Primitive integer minimal polynomial, highest degree first, leading coefficient positive.
    pub fn minimal_polynomial(&self) -> Vec<BigInt> {
        if self.is_rational() {
            return vec![self.x.denom().clone(), -self.x.numer().clone()];
        }
        let (t, n) = (self.trace(), self.norm());
        let den = t.denom().lcm(n.denom());
        let a = den.clone();
        let b = -(t * BigRational::from_integer(den.clone())).to_integer();
        let c = (n * BigRational::from_integer(den)).to_integer();
        let g = a.gcd(&b).gcd(&c);
        vec![a / &g, b / &g, c / &g]
    }

    pub fn leading_coefficient(&self) -> BigInt {
        self.minimal_polynomial()[0].clone()
    }

    /// True iff some power of `x` is 1; quadratic roots of unity have order 1, 2, 3, 4 or 6.
    pub fn is_root_of_unity(&self) -> bool {
        self.root_of_unity_order().is_some()
    }

    pub fn root_of_unity_order(&self) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        if !n.abs().is_one() {
            return None;
        }
        [1u32, 2, 3, 4, 6]
            .into_iter()
            .find(|&k| self.pow(k as u64).is_one())
    }

    pub fn is_integral(&self) -> bool {
        self.integral_form().c.is_one()
    }

    /// Coordinates in the integral basis `{1, omega}` over the least common denominator.
    pub fn integral_form(&self) -> IntegralForm {
        if self.field.omega_is_half() {
            // x + y sqrt m = (x - y) + 2y omega
            let u = &self.x - &self.y;
            let v = &self.y + &self.y;
            let c = lcm_den(&u, &v);
            let cq = BigRational::from_integer(c.clone());
            IntegralForm {
                u: (u * &cq).to_integer(),
                v: (v * &cq).to_integer(),
                c,
            }
        } else {
            let c = lcm_den(&self.x, &self.y);
            let cq = BigRational::from_integer(c.clone());
            IntegralForm {
                u: (&self.x * &cq).to_integer(),
                v: (&self.y * &cq).to_integer(),
                c,
            }
        }
    }

    pub fn from_integral_form(field: &QuadraticField, f: &IntegralForm) -> Self {
        let c = BigRational::from_integer(f.c.clone());
        let u = BigRational::from_integer(f.u.clone()) / &c;
        let v = BigRational::from_integer(f.v.clone()) / &c;
        if field.omega_is_half() {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            let vh = v * half;
            FieldElement::new(field, u + &vh, vh)
        } else {
            FieldElement::new(field, u, v)
        }
    }

    /// Literal in the `x+y*sqrt(m)` syntax accepted by the parser.
    pub fn to_literal(&self) -> String {
        self.to_string()
    }
}

fn fmt_rat(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            return write!(f, "{}", fmt_rat(&self.x));
        }
        let surd = format!("{}*sqrt({})", fmt_rat(&self.y.abs()), self.field.m());
        if self.x.is_zero() {
            let sign = if self.y.is_negative() { "-" } else { "" };
            write!(f, "{sign}{surd}")
        } else {
            let sign = if self.y.is_negative() { '-' } else { '+' };
            write!(f, "{}{sign}{surd}", fmt_rat(&self.x))
        }
    }
}

fn same_field(a: &FieldElement, b: &FieldElement) {
    assert!(
        a.field == b.field,
        "field mismatch: {} vs {}",
        a.field,
        b.field
    );
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        same_field(self, o);
        FieldElement {
            field: self.field.clone(),
            x: &self.x + &o.x,
            y: &self.y + &o.y,
        }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        same_field(self, o);
        FieldElement {
            field: self.field.clone(),
            x: &self.x - &o.x,
            y: &self.y - &o.y,
        }
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        same_field(self, o);
        let m = BigRational::from_integer(self.field.m().clone());
        if self.y.is_zero() {
            return FieldElement {
                field: self.field.clone(),
                x: &self.x * &o.x,
                y: &self.x * &o.y,
            };
        }
        FieldElement {
            field: self.field.clone(),
            x: &self.x * &o.x + m * &self.y * &o.y,
            y: &self.x * &o.y + &self.y * &o.x,
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            x: -&self.x,
            y: -&self.y,
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement {
                (&self).$m(&o)
            }
        }
        impl $tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: &FieldElement) -> FieldElement {
                (&self).$m(o)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn elt(m: i64, x: BigRational, y: BigRational) -> FieldElement {
        FieldElement::new(&QuadraticField::new(m).unwrap(), x, y)
    }

    #[test]
    fn from_minpoly_examples() {
        let g = FieldElement::from_minpoly(&1.into(), &(-2).into(), &(-1).into(), true).unwrap();
        assert_eq!(g, elt(2, q(1, 1), q(1, 1)));
        let phi = FieldElement::from_minpoly(&1.into(), &(-1).into(), &(-1).into(), true).unwrap();
        assert_eq!(phi, elt(5, q(1, 2), q(1, 2)));
        let i = FieldElement::from_minpoly(&1.into(), &0.into(), &1.into(), true).unwrap();
        assert_eq!(i, elt(-1, q(0, 1), q(1, 1)));
        assert!(i.is_root_of_unity());
        assert!(matches!(
            FieldElement::from_minpoly(&1.into(), &(-3).into(), &2.into(), true),
            Err(FieldError::ReducibleInput(_))
        ));
    }

    #[test]
    fn norm_and_trace() {
        let g = elt(2, q(1, 1), q(1, 1));
        assert_eq!(g.norm(), q(-1, 1));
        assert_eq!(g.trace(), q(2, 1));
        let phi = elt(5, q(1, 2), q(1, 2));
        assert_eq!(phi.norm(), q(-1, 1));
        let r = FieldElement::from_rational(g.field(), q(3, 2));
        assert_eq!(r.norm(), q(9, 4));
        let rq = FieldElement::from_rational(&QuadraticField::rationals(), q(3, 2));
        assert_eq!(rq.norm(), q(3, 2));
    }

    #[test]
    fn powers() {
        let g = elt(2, q(1, 1), q(1, 1));
        let u3 = g.pow_minus_one(3);
        assert_eq!(u3, elt(2, q(6, 1), q(5, 1)));
        assert_eq!(u3.norm(), q(-14, 1));
        assert!(g.pow_minus_one(0).is_zero());
        let phi = elt(5, q(1, 2), q(1, 2));
        assert_eq!(phi.pow_minus_one(6).norm(), q(-16, 1));
    }

    #[test]
    fn roots_of_unity() {
        let f = QuadraticField::new(-3).unwrap();
        let zeta6 = FieldElement::new(&f, q(1, 2), q(1, 2));
        assert_eq!(zeta6.root_of_unity_order(), Some(6));
        assert!(FieldElement::from_int(&f, -1).is_root_of_unity());
        assert!(!elt(2, q(1, 1), q(1, 1)).is_root_of_unity());
        // |gamma| = 1 but not torsion
        let g = elt(-7, q(3, 4), q(1, 4));
        assert_eq!(g.norm(), q(1, 1));
        assert!(!g.is_root_of_unity());
    }

    #[test]
    fn minimal_polynomials() {
        let g = elt(-7, q(3, 4), q(1, 4));
        let mp: Vec<i64> = g.minimal_polynomial().iter().map(|c| c.try_into().unwrap()).collect();
        assert_eq!(mp, vec![2, -3, 2]);
        let r = FieldElement::from_rational(&QuadraticField::rationals(), q(-3, 2));
        let mp: Vec<i64> = r.minimal_polynomial().iter().map(|c| c.try_into().unwrap()).collect();
        assert_eq!(mp, vec![2, 3]);
    }

    #[test]
    fn integral_forms_round_trip() {
        for (m, x, y) in [(5, q(1, 2), q(1, 2)), (-7, q(3, 4), q(1, 4)), (2, q(1, 3), q(-2, 5)), (5, q(1, 1), q(0, 1))] {
            let e = elt(m, x, y);
            let f = e.integral_form();
            assert_eq!(FieldElement::from_integral_form(e.field(), &f), e);
        }
        assert!(elt(5, q(1, 2), q(1, 2)).is_integral());
        assert!(!elt(-7, q(3, 4), q(1, 4)).is_integral());
        assert_eq!(elt(-7, q(3, 4), q(1, 4)).integral_form().c, BigInt::from(2));
    }

    #[test]
    fn display() {
        assert_eq!(elt(2, q(1, 1), q(1, 1)).to_string(), "1+1*sqrt(2)");
        assert_eq!(elt(5, q(1, 2), q(-1, 2)).to_string(), "1/2-1/2*sqrt(5)");
        assert_eq!(elt(-1, q(0, 1), q(-1, 1)).to_string(), "-1*sqrt(-1)");
    }
}
