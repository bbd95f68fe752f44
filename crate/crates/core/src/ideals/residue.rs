//! Residue-field images, multiplicative orders and the primitive-divisor classifier.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::prime::{PrimeIdeal, Splitting};
use super::valuation::PreparedElement;
use super::IdealError;
use crate::arith::{inverse_mod, valuation_int};
use crate::field::FieldElement;
use crate::ledger::{Relation, Row};
use crate::real::RealApprox;

/// An element of `O_K / p`: `F_p`, or `F_p[omega]` for inert `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResidueElement {
    Fp(BigInt),
    Fp2(BigInt, BigInt),
}

struct ResidueRing<'a> {
    p: &'a BigInt,
    b: &'a BigInt,
    c: &'a BigInt,
}

impl ResidueRing<'_> {
    fn mul(&self, x: &ResidueElement, y: &ResidueElement) -> ResidueElement {
        let p = self.p;
        match (x, y) {
            (ResidueElement::Fp(a), ResidueElement::Fp(b)) => ResidueElement::Fp((a * b).mod_floor(p)),
            (ResidueElement::Fp2(s1, t1), ResidueElement::Fp2(s2, t2)) => {
                // omega^2 = -b omega - c
                let tt = t1 * t2;
                let s = (s1 * s2 - self.c * &tt).mod_floor(p);
                let t = (s1 * t2 + s2 * t1 - self.b * &tt).mod_floor(p);
                ResidueElement::Fp2(s, t)
            }
            _ => unreachable!("mixed residue fields"),
        }
    }

    fn pow(&self, x: &ResidueElement, e: &BigUint) -> ResidueElement {
        if let ResidueElement::Fp(a) = x {
            return ResidueElement::Fp(a.modpow(&BigInt::from(e.clone()), self.p));
        }
        let mut acc = ResidueElement::Fp2(BigInt::one(), BigInt::zero());
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, x);
            }
        }
        acc
    }

    fn is_one(x: &ResidueElement) -> bool {
        match x {
            ResidueElement::Fp(a) => a.is_one(),
            ResidueElement::Fp2(s, t) => s.is_one() && t.is_zero(),
        }
    }
}

impl PreparedElement {
    /// The image of a `p`-unit in `O_K / p`.
    pub fn residue(&self, ideal: &PrimeIdeal) -> Result<ResidueElement, IdealError> {
        if self.valuation(ideal)? != 0 {
            return Err(IdealError::NotAUnit(ideal.name()));
        }
        let p = ideal.p();
        let f = self.form();
        match ideal.splitting() {
            Splitting::Rational => {
                let cinv = inverse_mod(&f.c, p).expect("unit");
                Ok(ResidueElement::Fp((&f.u * cinv).mod_floor(p)))
            }
            Splitting::Ramified => {
                let r = ideal.root().expect("ramified root");
                let cinv = inverse_mod(&f.c, p).expect("unit");
                Ok(ResidueElement::Fp(((&f.u + &f.v * r) * cinv).mod_floor(p)))
            }
            Splitting::Inert => {
                let cinv = inverse_mod(&f.c, p).expect("unit");
                Ok(ResidueElement::Fp2(
                    (&f.u * &cinv).mod_floor(p),
                    (&f.v * &cinv).mod_floor(p),
                ))
            }
            Splitting::Split => {
                // the numerator and denominator may share a power of p
                let t = valuation_int(&f.c, p);
                let k = valuation_int(self.norm_numerator(), p).max(t) + 1;
                let pk = num_traits::pow(p.clone(), k as usize);
                let a = (&f.u + &f.v * ideal.hensel_root(k)).mod_floor(&pk);
                let s = valuation_int(&a, p);
                debug_assert_eq!(s, t);
                let ps = num_traits::pow(p.clone(), s as usize);
                let a0 = (a / &ps).mod_floor(p);
                let c0 = (&f.c / &ps).mod_floor(p);
                let cinv = inverse_mod(&c0, p).expect("unit");
                Ok(ResidueElement::Fp((a0 * cinv).mod_floor(p)))
            }
        }
    }

    /// Multiplicative order of the image in the residue field.
    pub fn residue_order(&self, ideal: &PrimeIdeal) -> Result<BigUint, IdealError> {
        let x = self.residue(ideal)?;
        let (b, c) = ideal.omega_poly();
        let ring = ResidueRing { p: ideal.p(), b, c };
        let group = ideal.unit_group_order();
        let mut ord = group.value().magnitude().clone();
        for (q, e) in group.factors() {
            for _ in 0..*e {
                let cand = &ord / q;
                if ResidueRing::is_one(&ring.pow(&x, &cand)) {
                    ord = cand;
                } else {
                    break;
                }
            }
        }
        debug_assert!(ResidueRing::is_one(&ring.pow(&x, &ord)));
        Ok(ord)
    }
}

/// Multiplicative order of `x mod p`; `x` must be a `p`-unit.
pub fn residue_order(x: &FieldElement, ideal: &PrimeIdeal) -> Result<BigUint, IdealError> {
    PreparedElement::new(x).residue_order(ideal)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Primitivity {
    /// `p | u_n` and `p` divides no earlier `u_k`.
    Primitive,
    /// `p | u_n` but already divides some `u_k`, `k < n`.
    NonPrimitive,
    NotADivisor,
}

impl fmt::Display for Primitivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Primitivity::Primitive => "primitive",
            Primitivity::NonPrimitive => "non-primitive",
            Primitivity::NotADivisor => "not-a-divisor",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitivityVerdict {
    pub ideal: String,
    pub n: u64,
    pub kind: Primitivity,
    pub order: BigUint,
}

/// Classification from a known residue order.
pub fn primitivity_from_order(order: &BigUint, n: u64) -> Primitivity {
    let n = BigUint::from(n);
    if order == &n {
        Primitivity::Primitive
    } else if (&n % order).is_zero() {
        Primitivity::NonPrimitive
    } else {
        Primitivity::NotADivisor
    }
}

/// Is `p` a primitive divisor of `gamma^n - 1`? Decided by the residue order.
pub fn classify_primitivity(gamma: &PreparedElement, n: u64, ideal: &PrimeIdeal) -> Result<PrimitivityVerdict, IdealError> {
    let order = gamma.residue_order(ideal)?;
    Ok(PrimitivityVerdict {
        ideal: ideal.name(),
        n,
        kind: primitivity_from_order(&order, n),
        order,
    })
}

/// The definition read literally: valuations of `u_1, ..., u_N` at each prime.
pub struct DefinitionalScan {
    gamma: PreparedElement,
    u: Vec<PreparedElement>,
}

impl DefinitionalScan {
    /// Precompute `u_k = gamma^k - 1` for `k <= max_n`.
    pub fn new(gamma: &FieldElement, max_n: u64) -> Self {
        let one = FieldElement::one(gamma.field());
        let mut pow = one.clone();
        let mut u = Vec::with_capacity(max_n as usize);
        for _ in 0..max_n {
            pow = &pow * gamma;
            u.push(PreparedElement::new(&(&pow - &one)));
        }
        DefinitionalScan {
            gamma: PreparedElement::new(gamma),
            u,
        }
    }

    pub fn max_n(&self) -> u64 {
        self.u.len() as u64
    }

    /// Smallest `k <= max_n` with `nu_p(u_k) >= 1`.
    pub fn first_index(&self, ideal: &PrimeIdeal) -> Result<Option<u64>, IdealError> {
        if self.gamma.valuation(ideal)? != 0 {
            return Err(IdealError::NotAUnit(ideal.name()));
        }
        for (k, uk) in self.u.iter().enumerate() {
            if uk.is_zero() {
                return Err(IdealError::ZeroElement);
            }
            if uk.valuation(ideal)? >= 1 {
                return Ok(Some(k as u64 + 1));
            }
        }
        Ok(None)
    }

    /// `nu_p(u_n) >= 1` and `nu_p(u_k) = 0` for all `k < n`.
    pub fn classify(&self, n: u64, ideal: &PrimeIdeal) -> Result<Primitivity, IdealError> {
        assert!(n >= 1 && n <= self.max_n());
        let divides_n = self.u[n as usize - 1].valuation(ideal)? >= 1;
        if !divides_n {
            return Ok(Primitivity::NotADivisor);
        }
        for k in 1..n {
            if self.u[k as usize - 1].valuation(ideal)? >= 1 {
                return Ok(Primitivity::NonPrimitive);
            }
        }
        Ok(Primitivity::Primitive)
    }
}

/// The two items of the primitive-divisor proposition at one `(gamma, n, p)`.
///
/// `phi_n` must be `Phi_n(gamma)`. Item 1 rows are emitted for primitive
/// `p`; the item 2 row for non-primitive `p` only once `n >= 2^(d+1)`.
pub fn check_prop22(
    gamma: &PreparedElement,
    n: u64,
    ideal: &PrimeIdeal,
    phi_n: &PreparedElement,
) -> Result<Vec<Row>, IdealError> {
    let verdict = classify_primitivity(gamma, n, ideal)?;
    let v = phi_n.valuation(ideal)?;
    let int = |x: i64| RealApprox::from_i64(x, 64);
    let name = ideal.name();
    let d = gamma.element().degree();
    Ok(match verdict.kind {
        Primitivity::Primitive => {
            let np = ideal.norm();
            let residue = np.mod_floor(&BigInt::from(n));
            let congruent = residue.is_one() || n == 1;
            vec![
                Row::exact("prop22.1", Relation::Ge, true, int(v), int(1), v >= 1).with_note(name.clone()),
                Row::exact(
                    "prop22.1.norm",
                    Relation::Eq,
                    true,
                    RealApprox::from_int(&residue, 64),
                    int(if n == 1 { 0 } else { 1 }),
                    congruent,
                )
                .with_note(format!("{name}: N = {np} mod {n}")),
            ]
        }
        Primitivity::NonPrimitive => {
            let bound = ideal.ramification() as i64 * valuation_int(&BigInt::from(n), ideal.p()) as i64;
            if n >= 1u64 << (d + 1) {
                vec![Row::exact("prop22.2", Relation::Le, true, int(v), int(bound), v <= bound).with_note(name)]
            } else {
                vec![Row::skipped("prop22.2", Relation::Le, int(v), int(bound), format!("{name}: n < 2^(d+1)"))]
            }
        }
        Primitivity::NotADivisor => {
            vec![Row::vacuous("prop22", Relation::Le, format!("{name}: order {} does not divide {n}", verdict.order))]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_element, QuadraticField};
    use crate::ideals::prime::split_prime;

    fn ideals(m: i64, p: i64) -> Vec<PrimeIdeal> {
        split_prime(&QuadraticField::new(m).unwrap(), &BigInt::from(p))
    }

    fn prep(lit: &str) -> PreparedElement {
        PreparedElement::new(&parse_element(lit).unwrap())
    }

    #[test]
    fn orders() {
        let g = prep("1+1*sqrt(2)");
        let seven3 = ideals(2, 7).into_iter().find(|i| i.name() == "7:3").unwrap();
        assert_eq!(g.residue(&seven3).unwrap(), ResidueElement::Fp(BigInt::from(4)));
        assert_eq!(g.residue_order(&seven3).unwrap(), BigUint::from(3u32));
        let five = ideals(2, 5).remove(0);
        assert_eq!(g.residue_order(&five).unwrap(), BigUint::from(12u32));
        let minus_one = prep("-1");
        let k = minus_one.element().field().clone();
        for p in [3, 5, 7, 101] {
            let i = split_prime(&k, &BigInt::from(p)).remove(0);
            assert_eq!(minus_one.residue_order(&i).unwrap(), BigUint::from(2u32));
        }
    }

    #[test]
    fn classification_examples() {
        let g = prep("1+1*sqrt(2)");
        let seven3 = ideals(2, 7).into_iter().find(|i| i.name() == "7:3").unwrap();
        let kind = |n| classify_primitivity(&g, n, &seven3).unwrap().kind;
        assert_eq!(kind(3), Primitivity::Primitive);
        assert_eq!(kind(6), Primitivity::NonPrimitive);
        assert_eq!(kind(4), Primitivity::NotADivisor);
        let scan = DefinitionalScan::new(g.element(), 12);
        assert_eq!(scan.classify(3, &seven3).unwrap(), Primitivity::Primitive);
        assert_eq!(scan.classify(6, &seven3).unwrap(), Primitivity::NonPrimitive);
        assert_eq!(scan.classify(4, &seven3).unwrap(), Primitivity::NotADivisor);
        assert_eq!(scan.first_index(&seven3).unwrap(), Some(3));
    }

    #[test]
    fn support_primes_are_not_units() {
        let g = prep("3/4+1/4*sqrt(-7)");
        for i in ideals(-7, 2) {
            assert!(matches!(g.residue_order(&i), Err(IdealError::NotAUnit(_))));
        }
    }

    fn residue_element(field: &QuadraticField, r: &ResidueElement) -> FieldElement {
        let (s, t) = match r {
            ResidueElement::Fp(a) => (a.clone(), BigInt::zero()),
            ResidueElement::Fp2(s, t) => (s.clone(), t.clone()),
        };
        let form = crate::field::IntegralForm { u: s, v: t, c: BigInt::one() };
        FieldElement::from_integral_form(field, &form)
    }

    #[test]
    fn residues_are_congruent() {
        // x - residue(x) must lie in p; includes a split prime dividing the denominator
        for lit in ["3/7+1/7*sqrt(2)", "1+1*sqrt(2)", "(1,-1,-1)+", "(2,-3,2)+", "5/3-2*sqrt(-1)", "7/9"] {
            let x = parse_element(lit).unwrap();
            let px = PreparedElement::new(&x);
            for p in [2, 3, 5, 7, 11, 13, 29, 31] {
                for ideal in split_prime(x.field(), &BigInt::from(p)) {
                    match px.residue(&ideal) {
                        Ok(r) => {
                            let diff = &x - &residue_element(x.field(), &r);
                            assert!(diff.is_zero() || crate::ideals::valuation(&diff, &ideal).unwrap() >= 1, "{lit} at {ideal}");
                        }
                        Err(IdealError::NotAUnit(_)) => assert_ne!(px.valuation(&ideal).unwrap(), 0),
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn prop22_examples() {
        let g = prep("1+1*sqrt(2)");
        let gamma = g.element().clone();
        let phi5 = PreparedElement::new(&crate::cyclotomic::eval_cyclotomic(5, &gamma));
        let p41 = ideals(2, 41);
        let rows: Vec<Row> = p41
            .iter()
            .flat_map(|i| check_prop22(&g, 5, i, &phi5).unwrap())
            .collect();
        assert!(rows.iter().any(|r| r.id == "prop22.1" && r.holds()));
        let phi12 = PreparedElement::new(&crate::cyclotomic::eval_cyclotomic(12, &gamma));
        let two = ideals(2, 2).remove(0);
        assert!(matches!(g.residue_order(&two), Ok(_)));
        let rows = check_prop22(&g, 12, &two, &phi12).unwrap();
        assert_eq!(rows[0].id, "prop22.2");
        assert!(rows[0].holds() && rows[0].asserted);
        assert_eq!(rows[0].rhs.mid(), 4.0);
        let phi = prep("(1,-1,-1)+");
        let phi5 = PreparedElement::new(&crate::cyclotomic::eval_cyclotomic(5, phi.element()));
        for i in ideals(5, 11) {
            let rows = check_prop22(&phi, 5, &i, &phi5).unwrap();
            if rows[0].id == "prop22.1" {
                assert!(rows.iter().all(|r| r.holds()));
            }
        }
    }
}
