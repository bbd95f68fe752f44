//! Integer factorization: trial division, then Pollard-Brent rho.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cache::FactorCache;
use super::primes::{is_prime, prime_table, SIEVE_LIMIT};
use super::rho::{find_factor, RhoBudget};
use super::ArithError;

/// A factorization `value = unit * prod(p^e) * prod(unfactored)`.
///
/// `unfactored` holds composite cofactors that could not be split within the
/// budget; when it is non-empty every derived maximum is only a lower bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    value: BigInt,
    unit: i8,
    factors: Vec<(BigUint, u32)>,
    unfactored: Vec<BigUint>,
    /// Every prime dividing an unfactored part exceeds this.
    cofactor_floor: BigUint,
}

impl Factorization {
    /// Assemble from parts; merges and sorts prime powers.
    pub fn from_parts(value: BigInt, mut primes: Vec<(BigUint, u32)>, unfactored: Vec<BigUint>) -> Self {
        primes.sort();
        let mut factors: Vec<(BigUint, u32)> = Vec::with_capacity(primes.len());
        for (p, e) in primes {
            match factors.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => factors.push((p, e)),
            }
        }
        let unit = if value.is_negative() { -1 } else { 1 };
        Factorization {
            value,
            unit,
            factors,
            unfactored,
            cofactor_floor: BigUint::one(),
        }
    }

    /// Record that trial division removed every prime up to `floor`.
    pub fn with_cofactor_floor(mut self, floor: BigUint) -> Self {
        self.cofactor_floor = floor;
        self
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn unit(&self) -> i8 {
        self.unit
    }

    pub fn factors(&self) -> &[(BigUint, u32)] {
        &self.factors
    }

    pub fn unfactored(&self) -> &[BigUint] {
        &self.unfactored
    }

    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn exponent_of(&self, p: &BigUint) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map_or(0, |(_, e)| *e)
    }

    pub fn largest_prime(&self) -> Option<&BigUint> {
        self.factors.last().map(|(p, _)| p)
    }

    /// Certified lower bound on the largest prime factor; exact when complete.
    ///
    /// An unsplit composite `c` whose primes all exceed `B` has at most
    /// `k = floor(log c / log B)` prime factors, so one of them is at least `c^(1/k)`.
    pub fn largest_prime_lower_bound(&self) -> BigUint {
        let known = self.largest_prime().cloned().unwrap_or_else(BigUint::one);
        let floor = (&self.cofactor_floor + 1u32).max(BigUint::from(2u32));
        self.unfactored
            .iter()
            .map(|c| {
                let mut k = 0u32;
                let mut acc = BigUint::one();
                while &acc * &floor <= *c {
                    acc *= &floor;
                    k += 1;
                }
                c.nth_root(k.max(2)).max(floor.clone())
            })
            .fold(known, |a, b| a.max(b))
    }

    /// Product of all recorded parts, with sign.
    pub fn reconstruct(&self) -> BigInt {
        let mut acc = BigUint::one();
        for (p, e) in &self.factors {
            acc *= num_traits::pow(p.clone(), *e as usize);
        }
        for c in &self.unfactored {
            acc *= c;
        }
        let sign = if self.unit < 0 { Sign::Minus } else { Sign::Plus };
        BigInt::from_biguint(sign, acc)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.unit < 0 {
            parts.push("-1".into());
        }
        for (p, e) in &self.factors {
            if *e == 1 {
                parts.push(p.to_string());
            } else {
                parts.push(format!("{p}^{e}"));
            }
        }
        for c in &self.unfactored {
            parts.push(format!("[{c}]"));
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(f, "{}", parts.join(" * "))
    }
}

/// Limits on the work spent factoring one number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorBudget {
    /// Primes below this are removed by trial division (capped at the sieve limit).
    pub trial_bound: u32,
    /// Total rho iterations per factorization call.
    pub rho_iterations: u64,
    /// Wall-clock allowance per factorization call.
    pub time: Option<Duration>,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: SIEVE_LIMIT,
            rho_iterations: 1 << 36,
            time: Some(Duration::from_secs(120)),
        }
    }
}

impl FactorBudget {
    /// Small budget for sweeping large grids.
    pub fn quick() -> Self {
        FactorBudget {
            trial_bound: 10_000,
            rho_iterations: 1 << 18,
            time: None,
        }
    }

    pub fn with_time(mut self, time: Option<Duration>) -> Self {
        self.time = time;
        self
    }
}

/// Factorization engine with an optional shared persistent cache.
#[derive(Clone, Debug, Default)]
pub struct Factorizer {
    budget: FactorBudget,
    cache: Option<Arc<FactorCache>>,
}

/// Values below this are never written to the cache.
const CACHE_MIN_BITS: u64 = 40;

impl Factorizer {
    pub fn new(budget: FactorBudget) -> Self {
        Factorizer {
            budget,
            cache: None,
        }
    }

    pub fn with_cache(mut self, cache: Arc<FactorCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn budget(&self) -> &FactorBudget {
        &self.budget
    }

    pub fn cache(&self) -> Option<&Arc<FactorCache>> {
        self.cache.as_ref()
    }

    /// Complete factorization, or `BudgetExceeded` carrying the partial result.
    pub fn factor(&self, n: &BigInt) -> Result<Factorization, ArithError> {
        let f = self.factor_partial(n)?;
        if f.is_complete() {
            Ok(f)
        } else {
            Err(ArithError::BudgetExceeded(Box::new(f)))
        }
    }

    /// Factor as far as the budget allows.
    pub fn factor_partial(&self, n: &BigInt) -> Result<Factorization, ArithError> {
        if n.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        let m = n.magnitude().clone();
        if let Some(hit) = self.cache_lookup(&m) {
            return Ok(Factorization::from_parts(n.clone(), hit, Vec::new()));
        }
        let (mut primes, rest) = trial_divide(m.clone(), self.budget.trial_bound);
        let mut unfactored = Vec::new();
        if !rest.is_one() {
            if let Some(hit) = self.cache_lookup(&rest) {
                primes.extend(hit);
            } else {
                let mut rho = RhoBudget {
                    remaining: self.budget.rho_iterations,
                    deadline: self.budget.time.map(|t| Instant::now() + t),
                };
                let mut stack = vec![rest];
                while let Some(c) = stack.pop() {
                    if is_prime(&c) {
                        primes.push((c, 1));
                        continue;
                    }
                    if let Some((root, k)) = perfect_power(&c) {
                        stack.extend(std::iter::repeat_n(root, k as usize));
                        continue;
                    }
                    match find_factor(&c, &mut rho) {
                        Some(d) => {
                            let e = &c / &d;
                            stack.push(d);
                            stack.push(e);
                        }
                        None => unfactored.push(c),
                    }
                }
            }
        }
        unfactored.sort();
        let floor = BigUint::from(self.budget.trial_bound.min(SIEVE_LIMIT));
        let f = Factorization::from_parts(n.clone(), primes, unfactored).with_cofactor_floor(floor);
        if f.is_complete() && m.bits() >= CACHE_MIN_BITS {
            if let Some(cache) = &self.cache {
                cache.insert(&m, f.factors());
            }
        }
        Ok(f)
    }

    fn cache_lookup(&self, m: &BigUint) -> Option<Vec<(BigUint, u32)>> {
        if m.bits() < CACHE_MIN_BITS {
            return None;
        }
        self.cache.as_ref().and_then(|c| c.get(m))
    }
}

/// Strip primes below `bound`; returns the prime powers found and the cofactor.
pub fn trial_divide(mut m: BigUint, bound: u32) -> (Vec<(BigUint, u32)>, BigUint) {
    let bound = bound.min(SIEVE_LIMIT);
    let mut found = Vec::new();
    for &p in prime_table() {
        if p > bound {
            break;
        }
        if let Some(small) = m.to_u64() {
            let (f, rest) = trial_divide_u64(small, p, bound);
            found.extend(f.into_iter().map(|(q, e)| (BigUint::from(q), e)));
            return (found, BigUint::from(rest));
        }
        let pb = BigUint::from(p);
        if (&m % p).is_zero() {
            let mut e = 0;
            while (&m % p).is_zero() {
                m /= &pb;
                e += 1;
            }
            found.push((pb, e));
        }
    }
    (found, m)
}

fn trial_divide_u64(mut m: u64, start: u32, bound: u32) -> (Vec<(u64, u32)>, u64) {
    let mut found = Vec::new();
    for &p in prime_table().iter().skip_while(|&&q| q < start) {
        if p > bound {
            break;
        }
        let p = p as u64;
        if p * p > m {
            if m > 1 && m <= bound as u64 {
                found.push((m, 1));
                m = 1;
            }
            break;
        }
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            found.push((p, e));
        }
    }
    (found, m)
}

/// `Some((r, k))` with `r^k = n`, `k >= 2` maximal-ish (smallest prime k found first).
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    for k in [2u32, 3, 5, 7, 11, 13] {
        if k > bits {
            break;
        }
        let r = n.nth_root(k);
        if num_traits::pow(r.clone(), k as usize) == *n {
            return Some((r, k));
        }
    }
    None
}

/// Convenience: factor with the default budget.
pub fn factor(n: &BigInt) -> Result<Factorization, ArithError> {
    Factorizer::default().factor(n)
}

/// Result of `P(n)` when factoring may be incomplete.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LargestPrime {
    pub value: BigUint,
    /// False when `value` is only a certified lower bound.
    pub exact: bool,
}

/// `P(n)`, the largest prime factor, with `P(0) = P(+-1) = 1`.
pub fn largest_prime_factor(n: &BigInt, factorizer: &Factorizer) -> LargestPrime {
    if n.is_zero() || n.magnitude().is_one() {
        return LargestPrime {
            value: BigUint::one(),
            exact: true,
        };
    }
    let f = factorizer.factor_partial(n).expect("nonzero");
    LargestPrime {
        value: f.largest_prime_lower_bound(),
        exact: f.is_complete(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(s: &str) -> BigInt {
        s.parse().unwrap()
    }

    fn trial_oracle(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= n {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            if e > 0 {
                out.push((d, e));
            }
            d += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn signed_and_trivial_inputs() {
        let f = factor(&BigInt::from(-320)).unwrap();
        assert_eq!(f.unit(), -1);
        assert_eq!(
            f.factors(),
            &[(BigUint::from(2u32), 6), (BigUint::from(5u32), 1)]
        );
        let one = factor(&BigInt::one()).unwrap();
        assert_eq!(one.unit(), 1);
        assert!(one.factors().is_empty());
        assert_eq!(factor(&BigInt::from(41)).unwrap().factors(), &[(BigUint::from(41u32), 1)]);
        assert!(matches!(factor(&BigInt::zero()), Err(ArithError::ZeroInput)));
    }

    #[test]
    fn largest_prime_conventions() {
        let fz = Factorizer::default();
        for v in [0i64, 1, -1] {
            assert_eq!(largest_prime_factor(&BigInt::from(v), &fz).value, BigUint::one());
        }
        assert_eq!(largest_prime_factor(&BigInt::from(-14), &fz).value, BigUint::from(7u32));
        assert_eq!(largest_prime_factor(&BigInt::from(2047), &fz).value, BigUint::from(89u32));
    }

    #[test]
    fn agrees_with_trial_oracle() {
        let fz = Factorizer::default();
        let mut x: u64 = 0x1234_5678;
        for _ in 0..2000 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let n = 2 + (x >> 33) % 999_999;
            let f = fz.factor(&BigInt::from(n)).unwrap();
            let got: Vec<(u64, u32)> = f
                .factors()
                .iter()
                .map(|(p, e)| (p.to_u64().unwrap(), *e))
                .collect();
            assert_eq!(got, trial_oracle(n), "{n}");
        }
    }

    #[test]
    fn splits_numbers_beyond_trial_bound() {
        // (2^61 - 1)(2^31 - 1) * 3^4
        let n = big("4951760154835678088235319297") * 81;
        let f = factor(&n).unwrap();
        assert_eq!(f.reconstruct(), n);
        assert_eq!(f.factors().len(), 3);
        let sq = big("1000000000000000003") * big("1000000000000000003");
        let f = factor(&sq).unwrap();
        assert_eq!(f.factors(), &[(BigUint::from(1_000_000_000_000_000_003u64), 2)]);
    }

    #[test]
    fn cofactor_bound_is_sound_for_three_primes() {
        // isqrt(c) would exceed every prime factor here
        let ps = [1_000_003u64, 1_000_033, 1_000_037];
        let c: BigUint = ps.iter().map(|&p| BigUint::from(p)).product();
        let f = Factorization::from_parts(BigInt::from(c.clone()), Vec::new(), vec![c.clone()])
            .with_cofactor_floor(BigUint::from(1_000_000u32));
        let lb = f.largest_prime_lower_bound();
        assert!(c.sqrt() > BigUint::from(1_000_037u64));
        assert!(lb <= BigUint::from(1_000_037u64));
        assert!(lb >= BigUint::from(1_000_000u64));
    }

    #[test]
    fn budget_overrun_keeps_cofactor() {
        let n = big("1000000000000000003") * big("1000000000000000009");
        let fz = Factorizer::new(FactorBudget {
            trial_bound: 100,
            rho_iterations: 500,
            time: None,
        });
        let err = fz.factor(&n).unwrap_err();
        let ArithError::BudgetExceeded(partial) = err else {
            panic!("expected budget overrun")
        };
        assert_eq!(partial.unfactored().len(), 1);
        assert_eq!(partial.reconstruct(), n);
        let lp = largest_prime_factor(&n, &fz);
        assert!(!lp.exact);
        assert!(lp.value <= BigUint::from(1_000_000_000_000_000_009u64));
        assert!(lp.value > BigUint::from(100u32));
    }
}
