//! Per-`(gamma, n)` ledgers: the finite-place sums of `Phi_n(gamma)`, the
//! largest prime below a divisor, the cyclotomic and primitive-divisor
//! estimates, and the companion sequence `beta^n - 1` for quadratic `gamma`.

mod beta;
mod finite;
mod ledger;
mod record;
mod scan;
mod theorems;

use std::collections::HashMap;
use std::sync::Mutex;

use thiserror::Error;

use crate::arith::Factorizer;
use crate::cyclotomic::CycError;
use crate::field::FieldElement;
use crate::ideals::IdealError;

pub use beta::{beta_chain, check_eq18, check_eq19, small_divisor_count, BetaReport, DpEntry, DpTable};
pub use finite::{FiniteAnalysis, LargestPrimeBelow, PlaceEntry};
pub use ledger::{CaseTag, ProofLedger};
pub use record::{render_number, round15, LedgerRecord, Num, QuantityRecord, RowRecord};
pub use scan::{main_bound, ScanRow};
pub use theorems::{check_valuation_theorems, theorem_rhs, Thresholds, TheoremVariant};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{0} is zero or a root of unity")]
    Torsion(String),
    #[error(transparent)]
    Cyclotomic(#[from] CycError),
    #[error("needs a quadratic gamma, got degree {0}")]
    DegreeMismatch(u32),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error("factorization budget exhausted for {0}")]
    Budget(String),
    #[error("internal invariant breached: {0}")]
    Invariant(String),
}

/// Shared configuration for building ledgers.
#[derive(Debug, Default)]
pub struct Verifier {
    factorizer: Factorizer,
    oracle: bool,
    always_beta: bool,
    largest: Mutex<HashMap<(FieldElement, u64), LargestPrimeBelow>>,
}

impl Verifier {
    pub fn new(factorizer: Factorizer) -> Self {
        Verifier {
            factorizer,
            oracle: false,
            always_beta: false,
            largest: Mutex::default(),
        }
    }

    /// Also cross-check every primitivity verdict against the definition.
    pub fn with_oracle(mut self, oracle: bool) -> Self {
        self.oracle = oracle;
        self
    }

    /// Run the inert-prime chain for every quadratic ledger, not only in
    /// the residue-degree-2 case.
    pub fn with_beta(mut self, always: bool) -> Self {
        self.always_beta = always;
        self
    }

    pub fn factorizer(&self) -> &Factorizer {
        &self.factorizer
    }

    pub fn oracle(&self) -> bool {
        self.oracle
    }
}

pub(crate) fn require_nontorsion(gamma: &FieldElement) -> Result<(), VerifyError> {
    if gamma.is_zero() || gamma.is_root_of_unity() {
        Err(VerifyError::Torsion(gamma.to_string()))
    } else {
        Ok(())
    }
}

/// `P` for `Phi_n(gamma)` with the default budget.
pub fn compute_p(gamma: &FieldElement, n: u64) -> Result<LargestPrimeBelow, VerifyError> {
    Verifier::default().compute_p(gamma, n)
}

/// The full ledger with the default budget.
pub fn build_ledger(gamma: &FieldElement, n: u64) -> Result<ProofLedger, VerifyError> {
    Verifier::default().build_ledger(gamma, n)
}

/// Stream one summary row per `n` in `range`, in order.
pub fn scan<F>(gamma: &FieldElement, range: std::ops::RangeInclusive<u64>, emit: F) -> Result<(), VerifyError>
where
    F: FnMut(ScanRow),
{
    Verifier::default().scan(gamma, range, emit)
}
