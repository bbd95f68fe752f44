//! Pollard rho with Brent's cycle detection, in three widths.
//!
//! Below 2^64 the map runs on `u64` with `u128` products; below 2^127 on
//! Montgomery-form `u128`; above that on `BigUint`.

use std::time::Instant;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::primes::mul_mod_u64;

/// Iterations between gcd evaluations.
const BATCH: u64 = 128;

/// Shared iteration/time allowance for one cofactor.
#[derive(Debug)]
pub(crate) struct RhoBudget {
    pub remaining: u64,
    pub deadline: Option<Instant>,
}

impl RhoBudget {
    fn spend(&mut self, n: u64) -> bool {
        if self.remaining < n {
            self.remaining = 0;
            return false;
        }
        self.remaining -= n;
        !self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

fn rho_u64(n: u64, c: u64, budget: &mut RhoBudget) -> Option<u64> {
    let f = |x: u64| ((x as u128 * x as u128 + c as u128) % n as u128) as u64;
    let mut y = 2u64 % n;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x;
    let mut ys = y;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let m = BATCH.min(r - k);
            if !budget.spend(m) {
                return None;
            }
            for _ in 0..m {
                y = f(y);
                q = mul_mod_u64(q, x.abs_diff(y), n);
            }
            g = gcd_u64(q, n);
            k += m;
        }
        r *= 2;
        if g != 1 {
            break;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = gcd_u64(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a1, a0) = (a >> 64, a & u64::MAX as u128);
    let (b1, b0) = (b >> 64, b & u64::MAX as u128);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & u64::MAX as u128) + (p10 & u64::MAX as u128);
    let lo = (p00 & u64::MAX as u128) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// Montgomery arithmetic modulo an odd `n < 2^127`, with `R = 2^128`.
struct Mont {
    n: u128,
    neg_inv: u128,
}

impl Mont {
    fn new(n: u128) -> Mont {
        debug_assert!(n % 2 == 1 && n < (1u128 << 127));
        let mut inv: u128 = n;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(n.wrapping_mul(inv)));
        }
        Mont {
            n,
            neg_inv: inv.wrapping_neg(),
        }
    }

    #[inline]
    fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        let m = lo.wrapping_mul(self.neg_inv);
        let (mh, ml) = mul_wide(m, self.n);
        let (_, carry) = lo.overflowing_add(ml);
        let t = hi + mh + carry as u128;
        if t >= self.n {
            t - self.n
        } else {
            t
        }
    }
}

fn rho_u128(n: u128, c: u128, budget: &mut RhoBudget) -> Option<u128> {
    let mont = Mont::new(n);
    let f = |x: u128| {
        let s = mont.mul(x, x) + c;
        if s >= n {
            s - n
        } else {
            s
        }
    };
    let mut y = 2u128;
    let mut r = 1u64;
    let mut q = 1u128;
    let mut g = 1u128;
    let mut x;
    let mut ys = y;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let m = BATCH.min(r - k);
            if !budget.spend(m) {
                return None;
            }
            for _ in 0..m {
                y = f(y);
                let d = x.abs_diff(y);
                if d != 0 {
                    q = mont.mul(q, d);
                }
            }
            g = q.gcd(&n);
            if x == y {
                g = n;
            }
            k += m;
        }
        r *= 2;
        if g != 1 {
            break;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn rho_big(n: &BigUint, c: u64, budget: &mut RhoBudget) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut x;
    let mut ys = y.clone();
    let absdiff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    loop {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let m = BATCH.min(r - k);
            if !budget.spend(m) {
                return None;
            }
            for _ in 0..m {
                y = f(&y);
                q = (&q * absdiff(&x, &y)) % n;
            }
            g = q.gcd(n);
            if q.is_zero() {
                g = n.clone();
            }
            k += m;
        }
        r *= 2;
        if !g.is_one() {
            break;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = absdiff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

/// Find a non-trivial factor of an odd composite `n`, or give up when the
/// budget runs out.
pub(crate) fn find_factor(n: &BigUint, budget: &mut RhoBudget) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    for c in 1u64.. {
        if budget.remaining == 0 {
            return None;
        }
        let found = if let Some(v) = n.to_u64() {
            rho_u64(v, c, budget).map(BigUint::from)
        } else if let Some(v) = n.to_u128().filter(|v| *v < (1u128 << 127)) {
            rho_u128(v, c as u128, budget).map(BigUint::from)
        } else {
            rho_big(n, c, budget)
        };
        match found {
            Some(f) => return Some(f),
            None if budget.remaining == 0 => return None,
            None if budget.deadline.is_some_and(|d| Instant::now() >= d) => return None,
            None => continue,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> RhoBudget {
        RhoBudget {
            remaining: u64::MAX,
            deadline: None,
        }
    }

    #[test]
    fn montgomery_mul_matches_bigint() {
        let n: u128 = (1u128 << 126) + 12345;
        let n = n | 1;
        let m = Mont::new(n);
        let r = (BigUint::one() << 128u32) % BigUint::from(n);
        let rinv = {
            let e = num_bigint::BigInt::from(r.clone()).extended_gcd(&num_bigint::BigInt::from(n));
            e.x.mod_floor(&num_bigint::BigInt::from(n)).to_biguint().unwrap()
        };
        for &(a, b) in &[(3u128, 5u128), (n - 1, n - 2), (1 << 100, (1 << 90) + 7)] {
            let got = BigUint::from(m.mul(a, b));
            let want = (BigUint::from(a) * BigUint::from(b) * &rinv) % BigUint::from(n);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn splits_semiprimes_of_each_width() {
        let cases: [(u64, u64); 2] = [(1_000_003, 999_983), (4_294_967_291, 4_294_967_279)];
        for (p, q) in cases {
            let n = BigUint::from(p) * BigUint::from(q);
            let f = find_factor(&n, &mut budget()).unwrap();
            assert!(f == BigUint::from(p) || f == BigUint::from(q));
        }
        // ~100-bit semiprime on the Montgomery path
        let p = BigUint::from(1_125_899_906_842_597u64);
        let q = BigUint::from(1_000_000_007u64);
        let n = &p * &q;
        let f = find_factor(&n, &mut budget()).unwrap();
        assert!(f == p || f == q);
        // >127-bit on the BigUint path
        let big = &n * BigUint::from(4_294_967_291u64) * BigUint::from(4_294_967_279u64);
        let f = find_factor(&big, &mut budget()).unwrap();
        assert!((&big % &f).is_zero() && f > BigUint::one() && f < big);
    }

    #[test]
    fn respects_iteration_budget() {
        let p = BigUint::from(1_000_000_000_000_037u64);
        let q = BigUint::from(1_000_000_000_000_091u64);
        let mut b = RhoBudget {
            remaining: 1000,
            deadline: None,
        };
        assert!(find_factor(&(&p * &q), &mut b).is_none());
    }
}
