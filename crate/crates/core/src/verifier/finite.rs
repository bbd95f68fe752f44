//! Prime ideals dividing `Phi_n(gamma)`, split into primitive and
//! non-primitive, and the largest rational prime below one of them.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{require_nontorsion, Verifier, VerifyError};
use crate::arith::{factor_u64, ArithError, Factorization, Factorizer};
use crate::cyclotomic::{eval_cyclotomic, CycError};
use crate::field::FieldElement;
use crate::ideals::{split_prime, PreparedElement, PrimeIdeal, Splitting};
use crate::real::RealApprox;

/// Primes up to this are classified by residue order even when the
/// divisibility argument already settles them.
const ORDER_CHECK_LIMIT: u64 = 1_000_000_000_000;

/// One prime ideal with `nu_p(Phi_n(gamma)) > 0`.
#[derive(Clone, Debug)]
pub struct PlaceEntry {
    pub ideal: PrimeIdeal,
    pub valuation: i64,
    pub primitive: bool,
    /// Multiplicative order of `gamma` mod `p`, when computed.
    pub order: Option<BigUint>,
}

/// `P`: the largest rational prime below some `p` with `nu_p(Phi_n(gamma)) >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LargestPrimeBelow {
    /// `1` when no such prime exists.
    pub value: BigInt,
    /// False when `value` is only a lower bound.
    pub exact: bool,
    /// Name of an ideal attaining `value`, when known.
    pub witness: Option<String>,
}

/// Exact finite-place data of `Phi_n(gamma)`.
///
/// Each sum of `max(0, nu) log Np` is stored as the integer it is the log of.
#[derive(Clone, Debug)]
pub struct FiniteAnalysis {
    pub n: u64,
    pub value: FieldElement,
    /// `prod Np^max(0, nu)` over all `p`.
    pub positive_norm: BigInt,
    /// `prod Np^max(0, -nu)`.
    pub negative_norm: BigInt,
    /// Non-primitive part.
    pub np_norm: BigInt,
    /// Primitive part.
    pub p_norm: BigInt,
    /// Primitive part with residue degree 2; `None` if it could not be isolated.
    pub p2_norm: Option<BigInt>,
    /// Every ideal found with positive valuation.
    pub entries: Vec<PlaceEntry>,
    /// True when `entries` is all of them.
    pub complete: bool,
    pub unfactored: Vec<BigUint>,
    pub largest: LargestPrimeBelow,
}

fn log_of(n: &BigInt, prec: u32) -> RealApprox {
    RealApprox::ln_int(n, prec).expect("positive")
}

impl FiniteAnalysis {
    pub fn p1_norm(&self) -> Option<BigInt> {
        self.p2_norm.as_ref().map(|q| &self.p_norm / q)
    }

    /// `Sigma_p + Sigma_np`.
    pub fn total(&self, prec: u32) -> RealApprox {
        log_of(&self.positive_norm, prec)
    }

    pub fn sigma_p(&self, prec: u32) -> RealApprox {
        log_of(&self.p_norm, prec)
    }

    pub fn sigma_np(&self, prec: u32) -> RealApprox {
        log_of(&self.np_norm, prec)
    }

    pub fn sigma_p1(&self, prec: u32) -> Option<RealApprox> {
        self.p1_norm().map(|q| log_of(&q, prec))
    }

    pub fn sigma_p2(&self, prec: u32) -> Option<RealApprox> {
        self.p2_norm.as_ref().map(|q| log_of(q, prec))
    }

    /// Primitive ideals with residue degree 1 and 2 among `entries`.
    pub fn primitive_counts(&self) -> (usize, usize) {
        let prim = self.entries.iter().filter(|e| e.primitive);
        let f1 = prim.clone().filter(|e| e.ideal.residue_degree() == 1).count();
        (f1, prim.count() - f1)
    }

    /// When the entries are complete: the primitive and non-primitive
    /// products recomputed ideal by ideal.
    pub fn recomputed_split(&self) -> Option<(BigInt, BigInt)> {
        if !self.complete {
            return None;
        }
        let mut p = BigInt::one();
        let mut np = BigInt::one();
        for e in &self.entries {
            let f = num_traits::pow(e.ideal.norm(), e.valuation as usize);
            if e.primitive {
                p *= f;
            } else {
                np *= f;
            }
        }
        Some((p, np))
    }
}

fn factor_complete(fz: &Factorizer, n: &BigInt) -> Result<Factorization, VerifyError> {
    match fz.factor(n) {
        Ok(f) => Ok(f),
        Err(ArithError::BudgetExceeded(_)) => Err(VerifyError::Budget(n.to_string())),
        Err(ArithError::ZeroInput) => Err(VerifyError::Invariant("factoring zero".into())),
    }
}

fn primes_of(f: &Factorization) -> impl Iterator<Item = BigInt> + '_ {
    f.primes().map(|p| BigInt::from(p.clone()))
}

/// Classify a `p` with `nu_p(Phi_n(gamma)) > 0`: primitive iff the order of
/// `gamma` mod `p` is `n`. For `p` not above a prime of `n` this is forced,
/// and the order is only computed for small `p` as a check.
fn classify(
    gamma: &PreparedElement,
    n: u64,
    ideal: &PrimeIdeal,
    p_divides_n: bool,
) -> Result<(bool, Option<BigUint>), VerifyError> {
    if gamma.valuation(ideal)? != 0 {
        return Err(VerifyError::Invariant(format!(
            "{} divides Phi_{n}(gamma) but gamma is not a unit there",
            ideal.name()
        )));
    }
    let small = ideal.p().to_u64().is_some_and(|p| p <= ORDER_CHECK_LIMIT);
    if !p_divides_n && !small {
        return Ok((true, None));
    }
    let order = gamma.residue_order(ideal)?;
    let primitive = order == BigUint::from(n);
    if !p_divides_n && !primitive {
        return Err(VerifyError::Invariant(format!(
            "{} divides Phi_{n}(gamma) with order {order} though it does not lie above a prime of n",
            ideal.name()
        )));
    }
    Ok((primitive, Some(order)))
}

impl Verifier {
    /// Finite-place analysis of `Phi_n(gamma)`.
    pub fn finite_analysis(&self, gamma: &FieldElement, n: u64) -> Result<FiniteAnalysis, VerifyError> {
        require_nontorsion(gamma)?;
        if n == 0 {
            return Err(VerifyError::Domain("n must be positive".into()));
        }
        let value = eval_cyclotomic(n, gamma);
        if value.is_zero() {
            return Err(CycError::RootOfUnityAtN {
                gamma: gamma.to_string(),
                n,
            }
            .into());
        }
        let g = PreparedElement::new(gamma);
        let phi = PreparedElement::new(&value);
        let field = gamma.field();
        let fz = &self.factorizer;

        let mut negative_norm = BigInt::one();
        let c = &phi.form().c;
        if !c.is_one() {
            for q in primes_of(&factor_complete(fz, c)?) {
                for ideal in split_prime(field, &q) {
                    let v = phi.valuation(&ideal)?;
                    if v < 0 {
                        negative_norm *= num_traits::pow(ideal.norm(), (-v) as usize);
                    }
                }
            }
        }
        let pos = value.norm().abs() * BigRational::from_integer(negative_norm.clone());
        if !pos.is_integer() {
            return Err(VerifyError::Invariant(format!("N(Phi_{n}) * denominators = {pos}")));
        }
        let positive_norm = pos.to_integer();

        let mut entries = Vec::new();
        let mut np_norm = BigInt::one();
        let n_primes: Vec<BigInt> = factor_u64(n).into_iter().map(|(q, _)| BigInt::from(q)).collect();
        for q in &n_primes {
            for ideal in split_prime(field, q) {
                let v = phi.valuation(&ideal)?;
                if v > 0 {
                    let (primitive, order) = classify(&g, n, &ideal, true)?;
                    if !primitive {
                        np_norm *= num_traits::pow(ideal.norm(), v as usize);
                    }
                    entries.push(PlaceEntry {
                        ideal,
                        valuation: v,
                        primitive,
                        order,
                    });
                }
            }
        }
        let (p_norm, rem) = positive_norm.div_rem(&np_norm);
        if !rem.is_zero() {
            return Err(VerifyError::Invariant("non-primitive part does not divide the norm".into()));
        }

        // inert primes divide both integral coordinates
        let p2_norm = if field.is_rational() {
            Some(BigInt::one())
        } else {
            let gcd = phi.form().u.gcd(&phi.form().v);
            let gf = fz.factor_partial(&gcd).map_err(|e| VerifyError::Invariant(e.to_string()))?;
            let mut acc = BigInt::one();
            for q in primes_of(&gf) {
                if n_primes.contains(&q) {
                    continue;
                }
                for ideal in split_prime(field, &q) {
                    if ideal.splitting() == Splitting::Inert {
                        let v = phi.valuation(&ideal)?;
                        if v > 0 {
                            acc *= num_traits::pow(ideal.norm(), v as usize);
                        }
                    }
                }
            }
            gf.is_complete().then_some(acc)
        };

        let rf = fz.factor_partial(&p_norm).map_err(|e| VerifyError::Invariant(e.to_string()))?;
        for q in primes_of(&rf) {
            if n_primes.contains(&q) {
                continue;
            }
            for ideal in split_prime(field, &q) {
                let v = phi.valuation(&ideal)?;
                if v > 0 {
                    let (primitive, order) = classify(&g, n, &ideal, false)?;
                    entries.push(PlaceEntry {
                        ideal,
                        valuation: v,
                        primitive,
                        order,
                    });
                }
            }
        }
        entries.sort_by(|a, b| a.ideal.cmp(&b.ideal));

        let known = entries.iter().max_by(|a, b| a.ideal.p().cmp(b.ideal.p()));
        let bound = BigInt::from(rf.largest_prime_lower_bound());
        let largest = match known {
            Some(e) if e.ideal.p() >= &bound => LargestPrimeBelow {
                value: e.ideal.p().clone(),
                exact: rf.is_complete(),
                witness: Some(e.ideal.name()),
            },
            _ if rf.is_complete() && p_norm.is_one() => LargestPrimeBelow {
                value: BigInt::one(),
                exact: true,
                witness: None,
            },
            _ => LargestPrimeBelow {
                value: bound,
                exact: false,
                witness: None,
            },
        };
        Ok(FiniteAnalysis {
            n,
            value,
            positive_norm,
            negative_norm,
            np_norm,
            p_norm,
            p2_norm,
            entries,
            complete: rf.is_complete(),
            unfactored: rf.unfactored().to_vec(),
            largest,
        })
    }

    /// `P` for `Phi_n(gamma)`; memoized per verifier.
    pub fn compute_p(&self, gamma: &FieldElement, n: u64) -> Result<LargestPrimeBelow, VerifyError> {
        let key = (gamma.clone(), n);
        if let Some(hit) = self.largest.lock().expect("memo lock").get(&key) {
            return Ok(hit.clone());
        }
        let p = self.finite_analysis(gamma, n)?.largest;
        self.largest.lock().expect("memo lock").insert(key, p.clone());
        Ok(p)
    }

    /// The largest prime below a divisor of `gamma^n - 1`: the maximum of
    /// `P(Phi_d(gamma))` over `d | n`.
    pub fn compute_p_of_u(&self, gamma: &FieldElement, n: u64) -> Result<LargestPrimeBelow, VerifyError> {
        let mut best: Option<LargestPrimeBelow> = None;
        let mut exact = true;
        for d in crate::arith::divisors(n) {
            let p = self.compute_p(gamma, d)?;
            exact &= p.exact;
            if best.as_ref().is_none_or(|b| p.value > b.value) {
                best = Some(p);
            }
        }
        let mut best = best.expect("n has a divisor");
        best.exact = exact;
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_element;

    fn analysis(lit: &str, n: u64) -> FiniteAnalysis {
        Verifier::default().finite_analysis(&parse_element(lit).unwrap(), n).unwrap()
    }

    #[test]
    fn largest_prime_examples() {
        assert_eq!(analysis("1+1*sqrt(2)", 5).largest.value, BigInt::from(41));
        assert_eq!(analysis("1+1*sqrt(2)", 3).largest.value, BigInt::from(7));
        let gold = analysis("(1,-1,-1)+", 1);
        assert_eq!(gold.largest.value, BigInt::one());
        assert!(gold.entries.is_empty());
        assert_eq!(analysis("2", 11).largest.value, BigInt::from(89));
    }

    #[test]
    fn split_matches_ideal_by_ideal_classification() {
        for lit in ["1+1*sqrt(2)", "(1,-1,-1)+", "3/4+1/4*sqrt(-7)", "2", "3/2", "1+1*sqrt(-2)"] {
            for n in 1..=40 {
                let a = analysis(lit, n);
                let (p, np) = a.recomputed_split().unwrap();
                assert_eq!(p, a.p_norm, "{lit} {n}");
                assert_eq!(np, a.np_norm, "{lit} {n}");
                let p2: BigInt = a
                    .entries
                    .iter()
                    .filter(|e| e.primitive && e.ideal.residue_degree() == 2)
                    .map(|e| num_traits::pow(e.ideal.norm(), e.valuation as usize))
                    .product();
                assert_eq!(Some(p2), a.p2_norm, "{lit} {n}");
            }
        }
    }

    #[test]
    fn u_n_maximum_dominates() {
        let v = Verifier::default();
        let g = parse_element("1+1*sqrt(2)").unwrap();
        for n in 1..=30 {
            assert!(v.compute_p_of_u(&g, n).unwrap().value >= v.compute_p(&g, n).unwrap().value);
        }
    }
}
