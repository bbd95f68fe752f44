//! One summary row per `n`, built in parallel and emitted in order.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use rayon::prelude::*;

use super::theorems::{theorem_rhs, TheoremVariant};
use super::{Verifier, VerifyError};
use crate::field::FieldElement;
use crate::real::DEFAULT_PRECISION;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub n: u64,
    pub p: BigInt,
    /// False when `p` is only a lower bound.
    pub p_exact: bool,
    /// `n exp(0.0001 log n / log log n)`; `None` for `n < 3`.
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    /// Primitive prime ideals of residue degree 1 and 2.
    pub f1: usize,
    pub f2: usize,
    pub asserted: usize,
    pub failures: usize,
    /// Every row of the ledger was settled without budget overruns.
    pub complete: bool,
}

/// The main lower bound for `P` at `n >= 3`.
pub fn main_bound(n: u64) -> Option<f64> {
    theorem_rhs(n, &TheoremVariant::Main, DEFAULT_PRECISION).ok().map(|v| v.mid())
}

const CHUNK: usize = 16;

impl Verifier {
    pub fn scan_row(&self, gamma: &FieldElement, n: u64) -> Result<ScanRow, VerifyError> {
        let l = self.build_ledger(gamma, n)?;
        let (f1, f2) = l.finite.primitive_counts();
        let bound = main_bound(n);
        let ratio = bound.map(|b| {
            let p: f64 = l.p.value.to_string().parse().unwrap_or(f64::INFINITY);
            p / b
        });
        Ok(ScanRow {
            n,
            p: l.p.value.clone(),
            p_exact: l.p.exact,
            bound,
            ratio,
            f1,
            f2,
            asserted: l.asserted_count(),
            failures: l.failures().count(),
            complete: l.finite.complete && l.p_u.exact,
        })
    }

    /// Build rows for `range` in parallel chunks; `emit` sees them in `n` order.
    /// Stops at the first error, after emitting every earlier row.
    pub fn scan<F>(&self, gamma: &FieldElement, range: RangeInclusive<u64>, mut emit: F) -> Result<(), VerifyError>
    where
        F: FnMut(ScanRow),
    {
        let ns: Vec<u64> = range.collect();
        for chunk in ns.chunks(CHUNK) {
            let rows: Vec<Result<ScanRow, VerifyError>> = chunk.par_iter().map(|&n| self.scan_row(gamma, n)).collect();
            for r in rows {
                emit(r?);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_element;

    #[test]
    fn silver_ratio_rows() {
        let g = parse_element("1+1*sqrt(2)").unwrap();
        let mut rows = Vec::new();
        Verifier::default().scan(&g, 3..=20, |r| rows.push(r)).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), (3..=20).collect::<Vec<_>>());
        let five = &rows[2];
        assert_eq!(five.p, BigInt::from(41));
        assert!((five.bound.unwrap() - 5.0017).abs() < 1e-3);
        assert!((five.ratio.unwrap() - 8.197).abs() < 1e-2);
        assert!(rows[0].ratio.unwrap() > 2.0);
        assert!(rows.iter().all(|r| r.failures == 0 && r.complete));
    }

    #[test]
    fn empty_range() {
        let g = parse_element("2").unwrap();
        let mut count = 0;
        #[allow(clippy::reversed_empty_ranges)]
        Verifier::default().scan(&g, 5..=4, |_| count += 1).unwrap();
        assert_eq!(count, 0);
    }

    #[test]
    fn mersenne_column() {
        let g = parse_element("2").unwrap();
        let mut rows = Vec::new();
        Verifier::default().scan(&g, 3..=40, |r| rows.push(r)).unwrap();
        let p = |n: u64| rows[(n - 3) as usize].p.clone();
        assert_eq!(p(11), BigInt::from(89));
        assert_eq!(p(12), BigInt::from(13));
        assert_eq!(p(29), BigInt::from(2089));
        assert_eq!(p(37), BigInt::from(616318177));
    }
}
