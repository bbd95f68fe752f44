//! Prime ideals of quadratic fields, valuations, and residue-field orders.

mod prime;
mod residue;
mod valuation;

use thiserror::Error;

pub use prime::{ideal_by_name, kronecker, split_prime, sqrt_mod_prime, PrimeIdeal, Splitting};
pub use residue::{
    check_prop22, classify_primitivity, primitivity_from_order, residue_order, DefinitionalScan, Primitivity,
    PrimitivityVerdict, ResidueElement,
};
pub use valuation::{finite_places, finite_places_with, norm_balance, valuation, PreparedElement, ValuationRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdealError {
    #[error("valuation of zero")]
    ZeroElement,
    #[error("element is not a unit at {0}")]
    NotAUnit(String),
}
