//! Absolute logarithmic height by three routes: the Mahler measure of the
//! minimal polynomial, and the two place-sum formulas (with `log+` at the
//! archimedean places and denominators at the finite ones, or with `-log-`
//! and numerators).

use num_bigint::BigInt;
use num_traits::Signed;
use thiserror::Error;

use crate::field::FieldElement;
use crate::ideals::{finite_places, ValuationRecord};
use crate::real::RealApprox;

#[derive(Debug, Error)]
pub enum HeightError {
    #[error("height of zero is undefined")]
    ZeroElement,
    #[error("height routes disagree for {element}: mahler {mahler}, log+ form {plus}, log- form {minus}")]
    HeightMismatch {
        element: String,
        mahler: String,
        plus: String,
        minus: String,
    },
    #[error("finite part incomplete: {0}")]
    Incomplete(String),
}

/// `(1/deg x)(log a + sum over roots of log+|root|)`.
pub fn mahler_height(x: &FieldElement, prec: u32) -> Result<RealApprox, HeightError> {
    if x.is_zero() {
        return Err(HeightError::ZeroElement);
    }
    let mp = x.minimal_polynomial();
    let deg = (mp.len() - 1) as i64;
    let a = mp[0].clone();
    let logs = x.log_abs_embeddings(prec).expect("nonzero");
    let roots = if deg == 1 { &logs[..1] } else { &logs[..] };
    let arch = roots
        .iter()
        .fold(RealApprox::zero_with(prec), |acc, l| acc + l.pos_part());
    let total = RealApprox::ln_int(&a, prec).expect("a > 0") + arch;
    Ok(if deg == 1 {
        total
    } else {
        total.mul_pow2(-1)
    })
}

/// Absolute height; the Mahler route.
pub fn height(x: &FieldElement, prec: u32) -> Result<RealApprox, HeightError> {
    mahler_height(x, prec)
}

/// Archimedean contributions `sum_sigma log+|x^sigma|` and `-sum_sigma log-|x^sigma|`
/// over the embeddings of the ambient field.
pub fn archimedean_parts(x: &FieldElement, prec: u32) -> Option<(RealApprox, RealApprox)> {
    let logs = x.log_abs_embeddings(prec)?;
    let zero = RealApprox::zero_with(prec);
    let plus = logs.iter().fold(zero.clone(), |a, l| a + l.pos_part());
    let minus = logs.iter().fold(zero, |a, l| a - l.neg_part());
    Some((plus, minus))
}

/// All three height routes, checked for overlap.
#[derive(Clone, Debug)]
pub struct HeightReport {
    pub mahler: RealApprox,
    /// `(1/d)(sum log+|x^sigma| + sum max(0, -nu) log Np)`.
    pub log_plus_form: RealApprox,
    /// `(1/d)(-sum log-|x^sigma| + sum max(0, nu) log Np)`.
    pub log_minus_form: RealApprox,
    pub finite: ValuationRecord,
}

impl HeightReport {
    pub fn consistent(&self) -> bool {
        self.mahler.overlaps(&self.log_plus_form)
            && self.mahler.overlaps(&self.log_minus_form)
            && self.log_plus_form.overlaps(&self.log_minus_form)
    }

    pub fn max_width(&self) -> f64 {
        [&self.mahler, &self.log_plus_form, &self.log_minus_form]
            .iter()
            .map(|r| r.width().to_f64())
            .fold(0.0, f64::max)
    }
}

/// Compute the height three ways; fails with `HeightMismatch` if the
/// certified intervals do not all overlap.
pub fn height_report(x: &FieldElement, prec: u32) -> Result<HeightReport, HeightError> {
    if x.is_zero() {
        return Err(HeightError::ZeroElement);
    }
    let finite = finite_places(x).map_err(|e| HeightError::Incomplete(e.to_string()))?;
    let d = x.degree();
    let (plus, minus) = archimedean_parts(x, prec).expect("nonzero");
    let scale = |v: RealApprox| if d == 2 { v.mul_pow2(-1) } else { v };
    let log_plus_form = scale(plus + finite.denominator_log(prec));
    let log_minus_form = scale(minus + finite.numerator_log(prec));
    let mahler = mahler_height(x, prec)?;
    let report = HeightReport {
        mahler,
        log_plus_form,
        log_minus_form,
        finite,
    };
    if !report.consistent() {
        return Err(HeightError::HeightMismatch {
            element: x.to_string(),
            mahler: report.mahler.to_string(),
            plus: report.log_plus_form.to_string(),
            minus: report.log_minus_form.to_string(),
        });
    }
    Ok(report)
}

/// `log|N(x)|` as an interval, for nonzero `x`.
pub fn log_abs_norm(x: &FieldElement, prec: u32) -> Option<RealApprox> {
    let n = x.norm();
    if n.numer().sign() == num_bigint::Sign::NoSign {
        return None;
    }
    let num = RealApprox::ln_int(&n.numer().abs(), prec)?;
    let den = RealApprox::ln_int(&BigInt::from(n.denom().clone()), prec)?;
    Some(num - den)
}
