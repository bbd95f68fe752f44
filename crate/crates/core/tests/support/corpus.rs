// Shared test corpus: 13 elements over 8 fields, including imaginary,
// non-integral and rational ones.

#![allow(dead_code)]

use quadlucas::field::parse_element;
use quadlucas::FieldElement;

pub const CORPUS: [&str; 13] = [
    "1+1*sqrt(2)",
    "1+2*sqrt(2)",
    "(1,-1,-1)+",
    "1/2+1*sqrt(5)",
    "2+1*sqrt(3)",
    "3/4+1/4*sqrt(-7)",
    "1+1*sqrt(-2)",
    "2+1*sqrt(-1)",
    "1+1*sqrt(-3)",
    "2",
    "3/2",
    "5",
    "-3",
];

/// Quadratic members whose `Phi_n` values factor quickly for `n <= 120`.
pub const FAST: [&str; 6] = [
    "1+1*sqrt(2)",
    "(1,-1,-1)+",
    "2+1*sqrt(3)",
    "3/4+1/4*sqrt(-7)",
    "1+1*sqrt(-2)",
    "1/2+1*sqrt(5)",
];

pub fn corpus() -> Vec<FieldElement> {
    CORPUS.iter().map(|s| parse_element(s).unwrap()).collect()
}

pub fn quadratic() -> Vec<FieldElement> {
    corpus().into_iter().filter(|g| g.degree() == 2).collect()
}
