//! Prime ideals of `O_K` above a rational prime.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{inverse_mod, Factorization, Factorizer};
use crate::field::QuadraticField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
    /// The prime `p` of `Q` itself (degree-one field).
    Rational,
}

/// Kronecker symbol `(D | p)` for a prime `p`.
pub fn kronecker(d: &BigInt, p: &BigInt) -> i8 {
    if p == &BigInt::from(2) {
        if d.is_even() {
            return 0;
        }
        let r = d.mod_floor(&BigInt::from(8)).to_u8().unwrap();
        return if r == 1 || r == 7 { 1 } else { -1 };
    }
    let a = d.mod_floor(p);
    if a.is_zero() {
        return 0;
    }
    let e = (p - 1u32) >> 1u32;
    if a.modpow(&e, p).is_one() {
        1
    } else {
        -1
    }
}

/// A square root of `a` modulo an odd prime `p` (Tonelli-Shanks), if one exists.
pub fn sqrt_mod_prime(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Some(BigInt::zero());
    }
    if p == &BigInt::from(2) {
        return Some(a);
    }
    let one = BigInt::one();
    let pm1 = p - 1u32;
    if !a.modpow(&(&pm1 >> 1u32), p).is_one() {
        return None;
    }
    let s = pm1.trailing_zeros().unwrap();
    let q = &pm1 >> s;
    let mut z = BigInt::from(2);
    while z.modpow(&(&pm1 >> 1u32), p) != pm1 {
        z += 1;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + 1u32) >> 1u32), p);
    while !t.is_one() {
        let mut i = 0;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2).mod_floor(p);
            i += 1;
        }
        let b = c.modpow(&(&one << (m - i - 1)), p);
        m = i;
        c = (&b * &b).mod_floor(p);
        t = (t * &c).mod_floor(p);
        r = (r * b).mod_floor(p);
    }
    Some(r)
}

struct Inner {
    field: QuadraticField,
    p: BigInt,
    splitting: Splitting,
    /// Root of omega's minimal polynomial mod p picked out by this ideal
    /// (split: distinguishes the two ideals; ramified: the double root).
    root: Option<BigInt>,
    omega_b: BigInt,
    omega_c: BigInt,
    /// Highest Hensel lift computed so far: (k, root mod p^k).
    lift: Mutex<(u32, BigInt)>,
    group_order: OnceLock<Factorization>,
}

/// A prime ideal `p` of `O_K`; cheap to clone.
#[derive(Clone)]
pub struct PrimeIdeal(Arc<Inner>);

impl PrimeIdeal {
    fn build(field: &QuadraticField, p: &BigInt, splitting: Splitting, root: Option<BigInt>) -> Self {
        let (omega_b, omega_c) = field.omega_minpoly();
        let lift = Mutex::new((1, root.clone().unwrap_or_default()));
        PrimeIdeal(Arc::new(Inner {
            field: field.clone(),
            p: p.clone(),
            splitting,
            root,
            omega_b,
            omega_c,
            lift,
            group_order: OnceLock::new(),
        }))
    }

    pub fn field(&self) -> &QuadraticField {
        &self.0.field
    }

    pub fn p(&self) -> &BigInt {
        &self.0.p
    }

    pub fn splitting(&self) -> Splitting {
        self.0.splitting
    }

    pub fn residue_degree(&self) -> u32 {
        if self.0.splitting == Splitting::Inert {
            2
        } else {
            1
        }
    }

    pub fn ramification(&self) -> u32 {
        if self.0.splitting == Splitting::Ramified {
            2
        } else {
            1
        }
    }

    /// `N p = p^f`.
    pub fn norm(&self) -> BigInt {
        num_traits::pow(self.0.p.clone(), self.residue_degree() as usize)
    }

    /// Root of omega's minimal polynomial mod `p` lying in this ideal (split or ramified).
    pub fn root(&self) -> Option<&BigInt> {
        self.0.root.as_ref()
    }

    /// `p` for inert, ramified and rational primes; `p:r` for split ones.
    pub fn name(&self) -> String {
        match (&self.0.splitting, &self.0.root) {
            (Splitting::Split, Some(r)) => format!("{}:{}", self.0.p, r),
            _ => self.0.p.to_string(),
        }
    }

    pub(crate) fn omega_poly(&self) -> (&BigInt, &BigInt) {
        (&self.0.omega_b, &self.0.omega_c)
    }

    /// The root of omega's minimal polynomial modulo `p^k` lifting [`Self::root`].
    /// Only meaningful for split ideals.
    pub fn hensel_root(&self, k: u32) -> BigInt {
        assert_eq!(self.0.splitting, Splitting::Split, "Hensel lift needs a split prime");
        assert!(k >= 1);
        let p = &self.0.p;
        let mut guard = self.0.lift.lock().unwrap();
        let (b, c) = (&self.0.omega_b, &self.0.omega_c);
        while guard.0 < k {
            let k2 = guard.0 * 2;
            let pk = num_traits::pow(p.clone(), k2 as usize);
            let r = &guard.1;
            let f = r * r + b * r + c;
            let df = BigInt::from(2) * r + b;
            let inv = inverse_mod(&df, &pk).expect("simple root");
            let next = (r - f * inv).mod_floor(&pk);
            *guard = (k2, next);
        }
        let pk = num_traits::pow(p.clone(), k as usize);
        guard.1.mod_floor(&pk)
    }

    /// Factorization of `N p - 1`, the order of the residue field's unit group.
    pub fn unit_group_order(&self) -> &Factorization {
        self.0.group_order.get_or_init(|| {
            let fz = Factorizer::default();
            let p = &self.0.p;
            if self.residue_degree() == 2 {
                // p^2 - 1 = (p - 1)(p + 1)
                let a = fz.factor(&(p - 1u32)).expect("p - 1 factors");
                let b = fz.factor(&(p + 1u32)).expect("p + 1 factors");
                let mut parts: Vec<(BigUint, u32)> = a.factors().to_vec();
                parts.extend(b.factors().iter().cloned());
                Factorization::from_parts(p * p - 1u32, parts, Vec::new())
            } else {
                fz.factor(&(p - 1u32)).expect("p - 1 factors")
            }
        })
    }
}

impl fmt::Debug for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeIdeal({} in {}, {:?})", self.name(), self.0.field, self.0.splitting)
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl PartialEq for PrimeIdeal {
    fn eq(&self, o: &Self) -> bool {
        self.0.field == o.0.field && self.0.p == o.0.p && self.0.root == o.0.root
    }
}

impl Eq for PrimeIdeal {}

impl Hash for PrimeIdeal {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.0.p.hash(h);
        self.0.root.hash(h);
    }
}

impl PartialOrd for PrimeIdeal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for PrimeIdeal {
    fn cmp(&self, o: &Self) -> Ordering {
        (&self.0.p, &self.0.root).cmp(&(&o.0.p, &o.0.root))
    }
}

/// The prime ideals above the rational prime `p`, ordered by root.
pub fn split_prime(field: &QuadraticField, p: &BigInt) -> Vec<PrimeIdeal> {
    if field.is_rational() {
        return vec![PrimeIdeal::build(field, p, Splitting::Rational, None)];
    }
    let (b, c) = field.omega_minpoly();
    let f = |r: &BigInt| (r * r + &b * r + &c).mod_floor(p);
    match kronecker(field.discriminant(), p) {
        0 => {
            let r = if p == &BigInt::from(2) {
                (0..2).map(BigInt::from).find(|r| f(r).is_zero()).expect("double root")
            } else {
                // double root -b/2
                (-&b * inverse_mod(&BigInt::from(2), p).unwrap()).mod_floor(p)
            };
            vec![PrimeIdeal::build(field, p, Splitting::Ramified, Some(r))]
        }
        -1 => vec![PrimeIdeal::build(field, p, Splitting::Inert, None)],
        _ => {
            let mut roots: Vec<BigInt> = if p == &BigInt::from(2) {
                (0..2).map(BigInt::from).filter(|r| f(r).is_zero()).collect()
            } else {
                let s = sqrt_mod_prime(field.discriminant(), p).expect("split prime");
                let half = inverse_mod(&BigInt::from(2), p).unwrap();
                vec![
                    ((-&b + &s) * &half).mod_floor(p),
                    ((-&b - &s) * &half).mod_floor(p),
                ]
            };
            roots.sort();
            debug_assert!(roots.len() == 2 && roots[0] != roots[1]);
            roots
                .into_iter()
                .map(|r| PrimeIdeal::build(field, p, Splitting::Split, Some(r)))
                .collect()
        }
    }
}

/// Look up the ideal named `p` or `p:r` above `p`.
pub fn ideal_by_name(field: &QuadraticField, name: &str) -> Option<PrimeIdeal> {
    let p: BigInt = name.split(':').next()?.parse().ok()?;
    if !p.is_positive() || !crate::arith::is_prime(p.magnitude()) {
        return None;
    }
    split_prime(field, &p).into_iter().find(|i| i.name() == name)
}
