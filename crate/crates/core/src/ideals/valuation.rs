//! `p`-adic valuations of field elements, computed per splitting type.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::prime::{split_prime, PrimeIdeal, Splitting};
use super::IdealError;
use crate::arith::{valuation_int, Factorizer};
use crate::field::{FieldElement, IntegralForm};
use crate::real::RealApprox;

/// An element with its integral form and `N(u + v omega)` cached, for
/// repeated valuation queries.
#[derive(Clone, Debug)]
pub struct PreparedElement {
    elt: FieldElement,
    form: IntegralForm,
    /// Norm of the integral numerator `beta = c x` (for `Q`, `beta` itself).
    norm_beta: BigInt,
}

impl PreparedElement {
    pub fn new(x: &FieldElement) -> Self {
        let form = x.integral_form();
        let norm_beta = if x.field().is_rational() {
            form.u.clone()
        } else {
            let (b, c) = x.field().omega_minpoly();
            &form.u * &form.u - &b * &form.u * &form.v + &c * &form.v * &form.v
        };
        PreparedElement {
            elt: x.clone(),
            form,
            norm_beta,
        }
    }

    pub fn element(&self) -> &FieldElement {
        &self.elt
    }

    pub fn form(&self) -> &IntegralForm {
        &self.form
    }

    /// `N(c x)` as an integer.
    pub fn norm_numerator(&self) -> &BigInt {
        &self.norm_beta
    }

    pub fn is_zero(&self) -> bool {
        self.norm_beta.is_zero()
    }

    /// `nu_p(x)`.
    pub fn valuation(&self, ideal: &PrimeIdeal) -> Result<i64, IdealError> {
        if self.is_zero() {
            return Err(IdealError::ZeroElement);
        }
        let p = ideal.p();
        let vc = if self.form.c.is_one() {
            0
        } else {
            valuation_int(&self.form.c, p) as i64
        };
        let e = ideal.ramification() as i64;
        let beta = match ideal.splitting() {
            Splitting::Rational => valuation_int(&self.form.u, p) as i64,
            Splitting::Inert => valuation_int(&self.norm_beta, p) as i64 / 2,
            Splitting::Ramified => valuation_int(&self.norm_beta, p) as i64,
            Splitting::Split => self.split_numerator_valuation(ideal),
        };
        Ok(beta - e * vc)
    }

    /// `nu_p(beta)` for a split ideal, via the Hensel root at precision `nu_p(N beta) + 1`.
    fn split_numerator_valuation(&self, ideal: &PrimeIdeal) -> i64 {
        let p = ideal.p();
        let k = valuation_int(&self.norm_beta, p);
        if k == 0 {
            return 0;
        }
        let r = ideal.hensel_root(k + 1);
        let pk = num_traits::pow(p.clone(), (k + 1) as usize);
        let img = (&self.form.u + &self.form.v * r).mod_floor(&pk);
        assert!(!img.is_zero(), "valuation exceeds norm valuation");
        valuation_int(&img, p) as i64
    }

    /// Rational primes that can carry a nonzero valuation: those dividing
    /// `N(c x)` or `c`, plus any composite cofactor left unsplit.
    pub fn support_primes(&self, fz: &Factorizer) -> (Vec<BigInt>, Vec<BigUint>) {
        let mut primes = BTreeSet::new();
        let mut unfactored = Vec::new();
        for n in [&self.norm_beta, &self.form.c] {
            if n.abs().is_one() {
                continue;
            }
            match fz.factor_partial(n) {
                Ok(f) => {
                    primes.extend(f.primes().cloned());
                    unfactored.extend(f.unfactored().iter().cloned());
                }
                Err(e) => unreachable!("nonzero input: {e}"),
            }
        }
        (primes.into_iter().map(BigInt::from).collect(), unfactored)
    }
}

/// `nu_p(x)` for `x != 0`.
pub fn valuation(x: &FieldElement, ideal: &PrimeIdeal) -> Result<i64, IdealError> {
    PreparedElement::new(x).valuation(ideal)
}

/// The nonzero valuations of an element.
#[derive(Clone, Debug)]
pub struct ValuationRecord {
    pub entries: Vec<(PrimeIdeal, i64)>,
    /// False when a cofactor of the norm could not be split within budget.
    pub complete: bool,
    pub unfactored: Vec<BigUint>,
}

impl ValuationRecord {
    /// `prod Np^max(0, nu)` exactly.
    pub fn positive_norm(&self) -> BigInt {
        self.entries
            .iter()
            .filter(|(_, v)| *v > 0)
            .fold(BigInt::one(), |acc, (i, v)| acc * num_traits::pow(i.norm(), *v as usize))
    }

    /// `prod Np^max(0, -nu)` exactly.
    pub fn negative_norm(&self) -> BigInt {
        self.entries
            .iter()
            .filter(|(_, v)| *v < 0)
            .fold(BigInt::one(), |acc, (i, v)| acc * num_traits::pow(i.norm(), (-v) as usize))
    }

    /// `sum max(0, nu) log Np`.
    pub fn numerator_log(&self, prec: u32) -> RealApprox {
        RealApprox::ln_int(&self.positive_norm(), prec).expect("positive")
    }

    /// `sum max(0, -nu) log Np`.
    pub fn denominator_log(&self, prec: u32) -> RealApprox {
        RealApprox::ln_int(&self.negative_norm(), prec).expect("positive")
    }

    pub fn get(&self, ideal: &PrimeIdeal) -> i64 {
        self.entries
            .iter()
            .find(|(i, _)| i == ideal)
            .map_or(0, |(_, v)| *v)
    }
}

/// Every prime ideal with `nu_p(x) != 0`.
pub fn finite_places(x: &FieldElement) -> Result<ValuationRecord, IdealError> {
    finite_places_with(&PreparedElement::new(x), &Factorizer::default())
}

pub fn finite_places_with(x: &PreparedElement, fz: &Factorizer) -> Result<ValuationRecord, IdealError> {
    if x.is_zero() {
        return Err(IdealError::ZeroElement);
    }
    let (primes, unfactored) = x.support_primes(fz);
    let mut entries = Vec::new();
    for p in primes {
        for ideal in split_prime(x.element().field(), &p) {
            let v = x.valuation(&ideal)?;
            if v != 0 {
                entries.push((ideal, v));
            }
        }
    }
    Ok(ValuationRecord {
        complete: unfactored.is_empty(),
        entries,
        unfactored,
    })
}

/// `(sum over p | p of f nu_p(x), nu_p(N x))`; equal for every prime `p`.
pub fn norm_balance(x: &PreparedElement, p: &BigInt) -> Result<(i64, i64), IdealError> {
    let mut lhs = 0;
    for ideal in split_prime(x.element().field(), p) {
        lhs += ideal.residue_degree() as i64 * x.valuation(&ideal)?;
    }
    let n = x.element().norm();
    let rhs = valuation_int(n.numer(), p) as i64 - valuation_int(n.denom(), p) as i64;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::eval_cyclotomic;
    use crate::field::parse_element;

    fn ideal(m: i64, p: i64, name: &str) -> PrimeIdeal {
        let k = crate::field::QuadraticField::new(m).unwrap();
        split_prime(&k, &BigInt::from(p))
            .into_iter()
            .find(|i| i.name() == name)
            .unwrap()
    }

    #[test]
    fn spec_examples() {
        let g = parse_element("1+1*sqrt(2)").unwrap();
        let phi4 = eval_cyclotomic(4, &g);
        assert_eq!(phi4, parse_element("4+2*sqrt(2)").unwrap());
        assert_eq!(valuation(&phi4, &ideal(2, 2, "2")).unwrap(), 3);
        let phi3 = eval_cyclotomic(3, &g);
        assert_eq!(valuation(&phi3, &ideal(2, 7, "7:3")).unwrap(), 1);
        assert_eq!(valuation(&phi3, &ideal(2, 7, "7:4")).unwrap(), 0);
        let one = FieldElement::one(g.field());
        assert_eq!(valuation(&one, &ideal(2, 7, "7:3")).unwrap(), 0);
        assert_eq!(valuation(&one, &ideal(2, 5, "5")).unwrap(), 0);
    }

    #[test]
    fn denominators_give_negative_valuations() {
        // (3 + sqrt(-7))/4 has norm 1 but is not integral at one prime above 2
        let g = parse_element("3/4+1/4*sqrt(-7)").unwrap();
        let v: Vec<i64> = ["2:0", "2:1"].iter().map(|n| valuation(&g, &ideal(-7, 2, n)).unwrap()).collect();
        assert_eq!(v.iter().sum::<i64>(), 0);
        assert!(v.contains(&1) && v.contains(&-1));
        let r = parse_element("3/2").unwrap();
        let k = r.field().clone();
        let two = split_prime(&k, &BigInt::from(2)).remove(0);
        assert_eq!(valuation(&r, &two).unwrap(), -1);
    }

    #[test]
    fn records_reconstruct_norm() {
        for lit in ["1+1*sqrt(2)", "6+5*sqrt(2)", "3/4+1/4*sqrt(-7)", "12/35-9/5*sqrt(3)", "-45/14"] {
            let x = parse_element(lit).unwrap();
            let rec = finite_places(&x).unwrap();
            assert!(rec.complete);
            let n = x.norm();
            assert_eq!(rec.positive_norm() * n.denom(), n.numer().abs() * rec.negative_norm(), "{lit}");
        }
    }
}
