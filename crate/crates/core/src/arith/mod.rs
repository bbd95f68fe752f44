//! Exact integer arithmetic: primality, factorization, and the elementary
//! arithmetic functions.

mod cache;
mod factor;
mod functions;
mod primes;
mod rho;

use thiserror::Error;

pub use cache::{format_entry, parse_entry, CacheStats, FactorCache};
pub use factor::{factor, largest_prime_factor, trial_divide, FactorBudget, Factorization, Factorizer, LargestPrime};
pub use functions::{
    arith_functions, check_af_bounds, divisors, euler_phi, factor_u64, mobius, omega, omega_bound, omega_u64,
    phi_bound, phi_sample_set, phi_u64, sweep_af_bounds, tau, tau_bound_exponent, tau_u64, AfReport,
    ArithFunctions, BoundCheck, SweepSummary,
};
pub use primes::{inverse_mod, is_prime, is_prime_u64, prime_table, primes_up_to, spf_table, SIEVE_LIMIT};

#[derive(Debug, Error)]
pub enum ArithError {
    #[error("cannot factor zero")]
    ZeroInput,
    #[error("factorization budget exhausted; partial result: {0}")]
    BudgetExceeded(Box<Factorization>),
}

/// `nu_p(n)` for `n != 0`.
pub fn valuation_int(n: &num_bigint::BigInt, p: &num_bigint::BigInt) -> u32 {
    use num_integer::Integer;
    use num_traits::Zero;
    assert!(!n.is_zero(), "valuation of zero");
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}
