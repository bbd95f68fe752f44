//! Prime sieving and Miller-Rabin primality.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bound of the shared prime table used by trial division.
pub const SIEVE_LIMIT: u32 = 1_000_000;

/// Miller-Rabin with the first 13 prime bases is deterministic below this.
pub const DETERMINISTIC_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;

const DETERMINISTIC_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
const RANDOM_WITNESSES: usize = 64;

/// Primes up to `limit` (inclusive), Eratosthenes.
pub fn primes_up_to(limit: u32) -> Vec<u32> {
    let n = limit as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// The shared table of primes below [`SIEVE_LIMIT`].
pub fn prime_table() -> &'static [u32] {
    static TABLE: OnceLock<Vec<u32>> = OnceLock::new();
    TABLE.get_or_init(|| primes_up_to(SIEVE_LIMIT))
}

/// Smallest-prime-factor table for `0..=limit`.
pub fn spf_table(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    r
}

fn strong_probable_prime_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    let mut x = pow_mod_u64(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod_u64(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &DETERMINISTIC_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    DETERMINISTIC_BASES
        .iter()
        .all(|&a| strong_probable_prime_u64(n, a))
}

fn strong_probable_prime(n: &BigUint, a: &BigUint) -> bool {
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut x = a.modpow(&d, n);
    if x.is_one() || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return true;
        }
    }
    false
}

/// Primality test.
///
/// Deterministic below 3.3e24 (13 fixed bases); above that, the fixed bases
/// plus 64 pseudo-random witnesses seeded from `n`, for an error bound below
/// 2^-128. The seed makes repeated runs reproducible.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in prime_table().iter().take(200) {
        if (n % p).is_zero() {
            return false;
        }
    }
    if !DETERMINISTIC_BASES
        .iter()
        .all(|&a| strong_probable_prime(n, &BigUint::from(a)))
    {
        return false;
    }
    if n.to_u128().is_some_and(|v| v < DETERMINISTIC_LIMIT) {
        return true;
    }
    let seed = n.iter_u64_digits().fold(0x9e37_79b9_7f4a_7c15u64, |h, d| {
        (h ^ d).wrapping_mul(0x0100_0000_01b3)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = BigUint::from(2u32);
    let hi = n - 1u32;
    (0..RANDOM_WITNESSES).all(|_| {
        let a = rng.gen_biguint_range(&lo, &hi);
        strong_probable_prime(n, &a)
    })
}

/// Modular inverse for coprime `a`, `m`.
pub fn inverse_mod(a: &num_bigint::BigInt, m: &num_bigint::BigInt) -> Option<num_bigint::BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}
