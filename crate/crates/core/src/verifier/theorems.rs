//! Right-hand sides of the valuation theorems and the main lower bound for
//! `P`, with their effectivity thresholds kept in logarithmic form.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::{require_nontorsion, VerifyError};
use crate::field::FieldElement;
use crate::height::mahler_height;
use crate::ideals::{PreparedElement, PrimeIdeal};
use crate::ledger::{Relation, Row};
use crate::real::{decide, log_star, Decision, RealApprox};

#[derive(Clone, Debug)]
pub enum TheoremVariant {
    /// `n exp(0.0001 log n / log log n)`.
    Main,
    /// `Np exp(-0.002 d^-1 log Np / log log Np) h log* n`.
    Thm21 { norm: BigInt, d: u32, height: RealApprox },
    /// `p exp(-0.001 log p / log log p) h log* n`.
    Thm22 { p: BigInt, height: RealApprox },
}

/// `log x / log log x` for an integer `x >= 3`.
fn log_over_loglog(x: &BigInt, prec: u32) -> Option<RealApprox> {
    let l = RealApprox::ln_int(x, prec)?;
    let ll = l.ln()?;
    l.checked_div(&ll)
}

fn exp_scaled(num: i64, den: i64, ratio: RealApprox, prec: u32) -> RealApprox {
    (RealApprox::frac(num, den, prec) * ratio).exp()
}

/// Certified value of the selected right-hand side at precision `prec`.
pub fn theorem_rhs(n: u64, variant: &TheoremVariant, prec: u32) -> Result<RealApprox, VerifyError> {
    if n < 3 {
        return Err(VerifyError::Domain(format!("n = {n} < 3")));
    }
    let undef = || VerifyError::Domain("log log undefined at working precision".into());
    let nn = BigInt::from(n);
    match variant {
        TheoremVariant::Main => {
            let r = log_over_loglog(&nn, prec).ok_or_else(undef)?;
            Ok(RealApprox::from_int(&nn, prec) * exp_scaled(1, 10_000, r, prec))
        }
        TheoremVariant::Thm21 { norm, d, height } => {
            if norm < &BigInt::from(3) {
                return Err(VerifyError::Domain(format!("norm {norm} < 3")));
            }
            let r = log_over_loglog(norm, prec).ok_or_else(undef)?;
            let ls = log_star(&RealApprox::from_int(&nn, prec)).map_err(|_| undef())?;
            let e = exp_scaled(-2, 1000 * *d as i64, r, prec);
            Ok(RealApprox::from_int(norm, prec) * e * height.clone() * ls)
        }
        TheoremVariant::Thm22 { p, height } => {
            if p < &BigInt::from(3) {
                return Err(VerifyError::Domain(format!("p = {p} < 3")));
            }
            let r = log_over_loglog(p, prec).ok_or_else(undef)?;
            let ls = log_star(&RealApprox::from_int(&nn, prec)).map_err(|_| undef())?;
            Ok(RealApprox::from_int(p, prec) * exp_scaled(-1, 1000, r, prec) * height.clone() * ls)
        }
    }
}

/// Effectivity thresholds, never materialized as integers.
#[derive(Clone, Debug)]
pub struct Thresholds {
    /// `log p0 = 80000 d (log* d)^2` for the degree-`d` valuation bound.
    pub log_p0_general: RealApprox,
    /// `log log p0 = max(10^8, 2|D_K|)` for the norm-one quadratic bound.
    pub loglog_p0_quadratic: BigInt,
    /// `log log n0 = max(10^10, 3|D_K|)` for the main theorem.
    pub loglog_n0: BigInt,
}

impl Thresholds {
    pub fn new(d: u32, disc: &BigInt, prec: u32) -> Self {
        let ls = log_star(&RealApprox::from_i64(d as i64, prec)).expect("d >= 1");
        Thresholds {
            log_p0_general: (&ls * &ls).mul_int(&BigInt::from(80_000 * d as i64)),
            loglog_p0_quadratic: BigInt::from(100_000_000).max(disc.abs() * 2),
            loglog_n0: BigInt::from(10_000_000_000u64).max(disc.abs() * 3),
        }
    }
}

/// Is `log log x >= t` for an integer `x`? Settled without big exponentials:
/// `log x < bits(x)`, so the answer is no whenever `log(bits) < t`.
fn loglog_at_least(x: &BigInt, t: &BigInt) -> bool {
    let bits = x.bits() as f64;
    let t = t.to_f64().unwrap_or(f64::INFINITY);
    if bits.ln() < t {
        return false;
    }
    (bits * std::f64::consts::LN_2).ln() >= t
}

pub(crate) fn valuation_theorem_rows(
    gamma: &FieldElement,
    n: u64,
    ideal: &PrimeIdeal,
    u_n: &PreparedElement,
    height: &RealApprox,
) -> Result<Vec<Row>, VerifyError> {
    let nu = u_n.valuation(ideal)?;
    let name = ideal.name();
    if nu <= 0 {
        return Ok(vec![Row::vacuous("thm2.1", Relation::Le, format!("{name}: nu(u_n) = {nu}"))]);
    }
    let field = gamma.field();
    let d = field.degree();
    let prec = height.precision();
    let lhs = RealApprox::from_i64(nu, prec);
    let th = Thresholds::new(d, field.discriminant(), prec);
    let mut rows = Vec::new();

    let norm = ideal.norm();
    let variant = TheoremVariant::Thm21 {
        norm: norm.clone(),
        d,
        height: height.clone(),
    };
    match theorem_rhs(n, &variant, prec) {
        Ok(rhs) => {
            let met = decide(|p| Some(RealApprox::ln_int(&norm, p)? - th.log_p0_general.clone())) == Decision::True;
            rows.push(if met {
                Row::certified("thm2.1", Relation::Le, true, |p| {
                    Some((RealApprox::from_i64(nu, p), theorem_rhs(n, &variant, p).ok()?))
                })
            } else {
                Row::skipped("thm2.1", Relation::Le, lhs.clone(), rhs, format!("{name}: Np below p0"))
            });
        }
        Err(e) => rows.push(Row::vacuous("thm2.1", Relation::Le, format!("{name}: {e}"))),
    }

    if d == 2 && gamma.norm().abs() == num_rational::BigRational::from_integer(1.into()) {
        let p = ideal.p().clone();
        let variant = TheoremVariant::Thm22 {
            p: p.clone(),
            height: height.clone(),
        };
        match theorem_rhs(n, &variant, prec) {
            Ok(rhs) => {
                rows.push(if loglog_at_least(&p, &th.loglog_p0_quadratic) {
                    Row::certified("thm2.2", Relation::Le, true, |q| {
                        Some((RealApprox::from_i64(nu, q), theorem_rhs(n, &variant, q).ok()?))
                    })
                } else {
                    Row::skipped("thm2.2", Relation::Le, lhs, rhs, format!("{name}: p below p0"))
                });
            }
            Err(e) => rows.push(Row::vacuous("thm2.2", Relation::Le, format!("{name}: {e}"))),
        }
    }
    Ok(rows)
}

/// `nu_p(gamma^n - 1)` against both valuation theorems; rows are asserted
/// only when the size hypothesis on `p` holds.
pub fn check_valuation_theorems(gamma: &FieldElement, n: u64, ideal: &PrimeIdeal) -> Result<Vec<Row>, VerifyError> {
    require_nontorsion(gamma)?;
    let u_n = PreparedElement::new(&gamma.pow_minus_one(n));
    let h = mahler_height(gamma, 256).map_err(|e| VerifyError::Invariant(e.to_string()))?;
    valuation_theorem_rows(gamma, n, ideal, &u_n, &h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse_element, QuadraticField};
    use crate::ideals::split_prime;
    use crate::ledger::Verdict;

    #[test]
    fn thresholds() {
        let t = Thresholds::new(1, &BigInt::from(1), 128);
        assert_eq!(t.log_p0_general.mid(), 80_000.0);
        let t = Thresholds::new(2, &BigInt::from(8), 128);
        assert_eq!(t.log_p0_general.mid(), 160_000.0);
        assert_eq!(t.loglog_n0, BigInt::from(10_000_000_000u64));
        let t = Thresholds::new(2, &BigInt::from(-4_000_000_001i64), 128);
        assert_eq!(t.loglog_n0, BigInt::from(12_000_000_003u64));
    }

    #[test]
    fn main_bound_value() {
        let v = theorem_rhs(1_000_000, &TheoremVariant::Main, 128).unwrap();
        let l = 1e6f64.ln();
        let want = 1e6 * (1e-4 * l / l.ln()).exp();
        assert!((v.mid() - want).abs() < 1e-6);
        assert!(((v.mid() / 1e6).ln() - 0.000527).abs() < 1e-6);
        assert!(matches!(theorem_rhs(2, &TheoremVariant::Main, 128), Err(VerifyError::Domain(_))));
    }

    #[test]
    fn quadratic_variant_value() {
        let h = RealApprox::from_ratio(&"44069/100000".parse().unwrap(), 128);
        let p = BigInt::from(1_000_000_000);
        let v = theorem_rhs(100, &TheoremVariant::Thm22 { p, height: h }, 128).unwrap();
        let l = 1e9f64.ln();
        let want = 1e9 * (-1e-3 * l / l.ln()).exp() * 0.44069 * 100f64.ln();
        assert!((v.mid() / want - 1.0).abs() < 1e-12);
        assert!(v.width().to_f64() < 1e-6);
    }

    #[test]
    fn desk_scale_rows_are_skipped() {
        let g = parse_element("1+1*sqrt(2)").unwrap();
        let k = QuadraticField::new(2).unwrap();
        for ideal in split_prime(&k, &BigInt::from(7)) {
            let rows = check_valuation_theorems(&g, 3, &ideal).unwrap();
            if ideal.name() == "7:3" {
                assert_eq!(rows[0].verdict, Verdict::SkippedHypothesis);
                assert_eq!(rows[0].lhs.mid(), 1.0);
                assert!(rows.iter().all(|r| !r.asserted));
                assert_eq!(rows.len(), 2);
            } else {
                assert_eq!(rows[0].verdict, Verdict::Vacuous);
            }
        }
        let two = parse_element("2").unwrap();
        let q = split_prime(two.field(), &BigInt::from(23)).remove(0);
        let rows = check_valuation_theorems(&two, 11, &q).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].verdict, Verdict::SkippedHypothesis);
        assert!(rows[0].rhs.mid() > 0.0);
    }
}
