//! Euler's phi, omega, tau, and the explicit bounds used for them:
//!
//! * `phi(n) >= 0.5 n / log log n` for `n >= 10^20`
//! * `omega(n) <= 1.4 log n / log log n` for `n >= 3`
//! * `tau(n) <= exp(1.1 log n / log log n)` for `n >= 3`

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::factor::{Factorization, Factorizer};
use super::primes::spf_table;
use crate::real::{decide, Decision, RealApprox, DEFAULT_PRECISION};

pub fn euler_phi(f: &Factorization) -> BigUint {
    f.factors().iter().fold(BigUint::one(), |acc, (p, e)| {
        acc * num_traits::pow(p.clone(), (*e - 1) as usize) * (p - 1u32)
    })
}

pub fn omega(f: &Factorization) -> usize {
    f.factors().len()
}

pub fn tau(f: &Factorization) -> BigUint {
    f.factors()
        .iter()
        .fold(BigUint::one(), |acc, (_, e)| acc * (e + 1))
}

/// phi, omega and tau of a machine integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArithFunctions {
    pub phi: u64,
    pub omega: u32,
    pub tau: u64,
}

pub fn arith_functions(n: u64) -> ArithFunctions {
    assert!(n >= 1, "arithmetic functions need n >= 1");
    let f = Factorizer::default()
        .factor(&BigInt::from(n))
        .expect("u64 inputs always factor");
    ArithFunctions {
        phi: euler_phi(&f).to_u64().unwrap(),
        omega: omega(&f) as u32,
        tau: tau(&f).to_u64().unwrap(),
    }
}

/// Prime factorization of a machine integer as `(p, e)` pairs.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Sorted divisors of `n >= 1`.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factor_u64(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn mobius(n: u64) -> i8 {
    let f = factor_u64(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn phi_u64(n: u64) -> u64 {
    factor_u64(n)
        .iter()
        .fold(1, |acc, &(p, e)| acc * p.pow(e - 1) * (p - 1))
}

pub fn omega_u64(n: u64) -> u32 {
    factor_u64(n).len() as u32
}

pub fn tau_u64(n: u64) -> u64 {
    factor_u64(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// One evaluated inequality `lhs <= rhs` (or `>=`), with `margin` = slack.
#[derive(Clone, Debug)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: RealApprox,
    pub rhs: RealApprox,
    pub margin: RealApprox,
    pub verdict: Decision,
}

#[derive(Clone, Debug)]
pub struct AfReport {
    pub n: BigUint,
    pub phi: Option<BoundCheck>,
    pub omega: Option<BoundCheck>,
    pub tau: Option<BoundCheck>,
}

fn ln_ln(n: &BigInt, prec: u32) -> Option<(RealApprox, RealApprox)> {
    let l = RealApprox::ln_int(n, prec)?;
    let ll = l.ln()?;
    Some((l, ll))
}

/// `1.4 log n / log log n`.
pub fn omega_bound(n: &BigInt, prec: u32) -> Option<RealApprox> {
    let (l, ll) = ln_ln(n, prec)?;
    (RealApprox::frac(14, 10, prec) * l).checked_div(&ll)
}

/// `1.1 log n / log log n`, the exponent in the tau bound.
pub fn tau_bound_exponent(n: &BigInt, prec: u32) -> Option<RealApprox> {
    let (l, ll) = ln_ln(n, prec)?;
    (RealApprox::frac(11, 10, prec) * l).checked_div(&ll)
}

/// `0.5 n / log log n`.
pub fn phi_bound(n: &BigInt, prec: u32) -> Option<RealApprox> {
    let (_, ll) = ln_ln(n, prec)?;
    (RealApprox::frac(1, 2, prec) * RealApprox::from_int(n, prec)).checked_div(&ll)
}

pub const PHI_BOUND_THRESHOLD_EXP10: u32 = 20;

/// Evaluate the three bounds at `n` from its factorization.
///
/// The phi bound is only evaluated for `n >= 10^20`, the other two for `n >= 3`.
pub fn check_af_bounds(f: &Factorization) -> AfReport {
    let n = f.value().clone();
    let n_u = n.magnitude().clone();
    let prec = DEFAULT_PRECISION;
    let mut report = AfReport {
        n: n_u.clone(),
        phi: None,
        omega: None,
        tau: None,
    };
    if n_u < BigUint::from(3u32) {
        return report;
    }
    let om = BigInt::from(omega(f));
    let verdict = decide(|p| Some(omega_bound(&n, p)? - RealApprox::from_int(&om, p)));
    let rhs = omega_bound(&n, prec).expect("n >= 3");
    let lhs = RealApprox::from_int(&om, prec);
    report.omega = Some(BoundCheck {
        name: "omega",
        margin: &rhs - &lhs,
        lhs,
        rhs,
        verdict,
    });

    let t = BigInt::from(tau(f));
    let verdict = decide(|p| Some(tau_bound_exponent(&n, p)? - RealApprox::ln_int(&t, p)?));
    let rhs = tau_bound_exponent(&n, prec).expect("n >= 3").exp();
    let lhs = RealApprox::from_int(&t, prec);
    report.tau = Some(BoundCheck {
        name: "tau",
        margin: &rhs - &lhs,
        lhs,
        rhs,
        verdict,
    });

    if n_u >= num_traits::pow(BigUint::from(10u32), PHI_BOUND_THRESHOLD_EXP10 as usize) {
        let ph = BigInt::from(euler_phi(f));
        let verdict = decide(|p| Some(RealApprox::from_int(&ph, p) - phi_bound(&n, p)?));
        let rhs = phi_bound(&n, prec).expect("n >= 3");
        let lhs = RealApprox::from_int(&ph, prec);
        report.phi = Some(BoundCheck {
            name: "phi",
            margin: &lhs - &rhs,
            lhs,
            rhs,
            verdict,
        });
    }
    report
}

/// Fixed sample of `n >= 10^20` with closed-form factorizations, weighted
/// toward primorials (where `phi(n)/n` is smallest).
pub fn phi_sample_set() -> Vec<Factorization> {
    let primes: Vec<u32> = super::primes::primes_up_to(200);
    let build = |parts: Vec<(u32, u32)>| {
        let factors: Vec<(BigUint, u32)> = parts
            .into_iter()
            .map(|(p, e)| (BigUint::from(p), e))
            .collect();
        let value = factors.iter().fold(BigUint::one(), |acc, (p, e)| {
            acc * num_traits::pow(p.clone(), *e as usize)
        });
        Factorization::from_parts(BigInt::from(value), factors, Vec::new())
    };
    let primorial = |last: u32, bump: &[(u32, u32)]| {
        let mut v: Vec<(u32, u32)> = primes
            .iter()
            .take_while(|&&p| p <= last)
            .map(|&p| (p, 1))
            .collect();
        for &(p, e) in bump {
            if let Some(slot) = v.iter_mut().find(|(q, _)| *q == p) {
                slot.1 += e;
            }
        }
        build(v)
    };
    let mut out = vec![
        build(vec![(2, 20), (5, 20)]),
        build(vec![(2, 67)]),
        build(vec![(3, 42)]),
        build(vec![(2, 30), (5, 30)]),
        build(vec![(2, 30), (3, 30)]),
        build(vec![(2, 12), (3, 12), (5, 12), (7, 12)]),
        build(vec![(2, 200)]),
        build(vec![(1_000_003, 4)]),
        build(vec![(999_983, 2), (1_000_003, 2)]),
    ];
    for last in [59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 199] {
        out.push(primorial(last, &[]));
    }
    out.push(primorial(59, &[(2, 3), (3, 1)]));
    out.push(primorial(53, &[(2, 1)]));
    out.retain(|f| f.value() >= &BigInt::from(10u128.pow(20)));
    out
}

/// Outcome of the exhaustive omega/tau sweep.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub limit: u64,
    pub checked: u64,
    pub omega_failures: Vec<u64>,
    pub tau_failures: Vec<u64>,
    pub undecided: Vec<u64>,
    /// Cases too close for the double-precision screen, certified with intervals.
    pub interval_fallbacks: u64,
    pub min_omega_margin: f64,
    pub min_tau_margin: f64,
}

/// Screening margin for the f64 pass. libm's log is accurate to about one
/// ulp, so any f64 margin above this is far outside rounding noise.
const SCREEN_MARGIN: f64 = 1e-6;

/// Check the omega and tau bounds for every `3 <= n <= limit`.
pub fn sweep_af_bounds(limit: u64) -> SweepSummary {
    let spf = spf_table(limit as usize);
    let mut s = SweepSummary {
        limit,
        min_omega_margin: f64::INFINITY,
        min_tau_margin: f64::INFINITY,
        ..Default::default()
    };
    for n in 3..=limit {
        let (mut m, mut om, mut t) = (n as usize, 0u32, 1u64);
        while m > 1 {
            let p = spf[m];
            let mut e = 0;
            while m % p as usize == 0 {
                m /= p as usize;
                e += 1;
            }
            om += 1;
            t *= e + 1;
        }
        s.checked += 1;
        let lnn = (n as f64).ln();
        let llnn = lnn.ln();
        let om_margin = 1.4 * lnn / llnn - om as f64;
        let tau_margin = 1.1 * lnn / llnn - (t as f64).ln();
        s.min_omega_margin = s.min_omega_margin.min(om_margin);
        s.min_tau_margin = s.min_tau_margin.min(tau_margin);
        let nb = BigInt::from(n);
        if om_margin <= SCREEN_MARGIN {
            s.interval_fallbacks += 1;
            let ob = BigInt::from(om);
            match decide(|p| Some(omega_bound(&nb, p)? - RealApprox::from_int(&ob, p))) {
                Decision::True => {}
                Decision::False => s.omega_failures.push(n),
                Decision::Undecided => s.undecided.push(n),
            }
        }
        if tau_margin <= SCREEN_MARGIN {
            s.interval_fallbacks += 1;
            let tb = BigInt::from(t);
            match decide(|p| Some(tau_bound_exponent(&nb, p)? - RealApprox::ln_int(&tb, p)?)) {
                Decision::True => {}
                Decision::False => s.tau_failures.push(n),
                Decision::Undecided => s.undecided.push(n),
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor::factor;

    fn brute(n: u64) -> (u64, u32, u64) {
        let phi = (1..=n).filter(|k| num_integer::gcd(*k, n) == 1).count() as u64;
        let tau = (1..=n).filter(|d| n % d == 0).count() as u64;
        let omega = (2..=n)
            .filter(|p| n % p == 0 && (2..*p).all(|q| p % q != 0))
            .count() as u32;
        (phi, omega, tau)
    }

    #[test]
    fn spot_values() {
        assert_eq!(arith_functions(1), ArithFunctions { phi: 1, omega: 0, tau: 1 });
        assert_eq!(arith_functions(12), ArithFunctions { phi: 4, omega: 2, tau: 6 });
        assert_eq!(arith_functions(5), ArithFunctions { phi: 4, omega: 1, tau: 2 });
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
    }

    #[test]
    fn agree_with_enumeration() {
        for n in 1..=2000u64 {
            let (phi, om, t) = brute(n);
            assert_eq!((phi_u64(n), omega_u64(n), tau_u64(n)), (phi, om, t), "{n}");
            let f = arith_functions(n);
            assert_eq!((f.phi, f.omega, f.tau), (phi, om, t), "{n}");
        }
    }

    #[test]
    fn bound_examples() {
        let r = check_af_bounds(&factor(&BigInt::from(1_000_003)).unwrap());
        let om = r.omega.unwrap();
        assert!(om.verdict.is_true());
        assert!((om.rhs.mid() - 7.4).abs() < 0.05);
        let r = check_af_bounds(&factor(&BigInt::from(1u64 << 20)).unwrap());
        let t = r.tau.unwrap();
        assert_eq!(t.lhs.mid(), 21.0);
        assert!(t.verdict.is_true());
        assert!((t.rhs.ln().unwrap().mid() - 5.8).abs() < 0.05);
        let samples = phi_sample_set();
        let tenp20 = &samples[0];
        let r = check_af_bounds(tenp20);
        let ph = r.phi.unwrap();
        assert_eq!(ph.lhs.mid(), 4e19);
        assert!((ph.rhs.mid() / 1.3e19 - 1.0).abs() < 0.02);
        assert!(ph.verdict.is_true());
    }

    #[test]
    fn phi_bound_skipped_below_threshold() {
        let r = check_af_bounds(&factor(&BigInt::from(10u64.pow(19))).unwrap());
        assert!(r.phi.is_none());
        assert!(r.omega.is_some());
        let r = check_af_bounds(&factor(&BigInt::from(2)).unwrap());
        assert!(r.omega.is_none() && r.tau.is_none());
    }

    #[test]
    fn small_sweep_is_clean() {
        let s = sweep_af_bounds(20_000);
        assert!(s.omega_failures.is_empty() && s.tau_failures.is_empty() && s.undecided.is_empty());
        assert_eq!(s.checked, 19_998);
    }
}
