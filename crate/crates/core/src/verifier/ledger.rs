//! The full ledger for one `(gamma, n)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::beta::beta_chain_with;
use super::finite::{FiniteAnalysis, LargestPrimeBelow};
use super::theorems::{theorem_rhs, valuation_theorem_rows, TheoremVariant, Thresholds};
use super::{require_nontorsion, BetaReport, Verifier, VerifyError};
use crate::arith::{check_af_bounds, factor, is_prime_u64, omega_u64, phi_u64, tau_u64, BoundCheck};
use crate::cyclotomic::{check_prop21_item1, check_prop21_item2};
use crate::field::FieldElement;
use crate::height::mahler_height;
use crate::ideals::{check_prop22, DefinitionalScan, PreparedElement, Primitivity};
use crate::ledger::{Relation, Row, Verdict};
use crate::real::{log_star, Decision, RealApprox, DEFAULT_PRECISION};

/// Which of the two residue-degree cases carries the primitive sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    /// `Sigma_p1 >= 0.4 phi(n) h(gamma)` only.
    Eq13,
    /// `Sigma_p2 >= 0.4 phi(n) h(gamma)` only.
    Eq14,
    Both,
    Neither,
    /// `Sigma_p2` could not be isolated.
    Unknown,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::Eq13 => "13",
            CaseTag::Eq14 => "14",
            CaseTag::Both => "13+14",
            CaseTag::Neither => "none",
            CaseTag::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ProofLedger {
    pub gamma: FieldElement,
    pub n: u64,
    pub degree: u32,
    pub phi: u64,
    pub omega: u32,
    pub tau: u64,
    pub h_gamma: RealApprox,
    pub h_phi: RealApprox,
    /// `-log^-|Phi_n(gamma^sigma)|` per embedding.
    pub arch: Vec<RealApprox>,
    pub finite: FiniteAnalysis,
    pub sigma_p: RealApprox,
    pub sigma_np: RealApprox,
    pub sigma_p1: Option<RealApprox>,
    pub sigma_p2: Option<RealApprox>,
    pub p: LargestPrimeBelow,
    /// The same maximum over the divisors of `gamma^n - 1`.
    pub p_u: LargestPrimeBelow,
    pub case: CaseTag,
    pub beta: Option<BetaReport>,
    pub thresholds: Thresholds,
    pub rows: Vec<Row>,
}

impl ProofLedger {
    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.is_failure())
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn asserted_count(&self) -> usize {
        self.rows.iter().filter(|r| r.asserted).count()
    }

    pub fn row(&self, id: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.id == id)
    }
}

fn ln(n: &BigInt, p: u32) -> Option<RealApprox> {
    RealApprox::ln_int(n, p)
}

fn int(n: &BigInt) -> RealApprox {
    RealApprox::from_int(n, DEFAULT_PRECISION)
}

fn h(gamma: &FieldElement, p: u32) -> Option<RealApprox> {
    mahler_height(gamma, p).ok()
}

fn af_row(id: &str, b: &BoundCheck) -> Row {
    let holds = b.verdict == Decision::True;
    let mut row = Row::exact(id, Relation::Le, true, b.lhs.clone(), b.rhs.clone(), holds);
    if b.verdict == Decision::Undecided {
        row.verdict = Verdict::Undecidable;
    }
    row
}

/// `pi(x; n, 1)` by testing every `kn + 1 <= x`; `None` past the enumeration limit.
fn pi_progression(x: &BigInt, n: u64) -> Option<u64> {
    const LIMIT: u64 = 200_000;
    let x = x.to_u64()?;
    if x < 2 {
        return Some(0);
    }
    let kmax = (x - 1) / n;
    if kmax > LIMIT {
        return None;
    }
    Some((1..=kmax).filter(|&k| is_prime_u64(k * n + 1)).count() as u64)
}

fn exp_ratio(num: i64, den: i64, n: u64, p: u32) -> Option<RealApprox> {
    let l = RealApprox::from_i64(n as i64, p).ln()?;
    let ll = l.ln()?;
    Some((RealApprox::frac(num, den, p) * l.checked_div(&ll)?).exp())
}

impl Verifier {
    /// Every row of the ledger for `(gamma, n)`.
    pub fn build_ledger(&self, gamma: &FieldElement, n: u64) -> Result<ProofLedger, VerifyError> {
        require_nontorsion(gamma)?;
        let finite = self.finite_analysis(gamma, n)?;
        let p_u = self.compute_p_of_u(gamma, n)?;
        let field = gamma.field();
        let d = field.degree();
        let dd = BigInt::from(d);
        let prec = DEFAULT_PRECISION;
        let phi = phi_u64(n);
        let omega = omega_u64(n);
        let tau = tau_u64(n);
        let phi_b = BigInt::from(phi);
        let nn = BigInt::from(n);
        let value = finite.value.clone();
        let h_gamma = h(gamma, prec).expect("nonzero");
        let h_phi = h(&value, prec).expect("nonzero");
        let arch: Vec<RealApprox> = value
            .log_abs_embeddings(prec)
            .expect("nonzero")
            .iter()
            .map(|l| -l.neg_part())
            .collect();
        let arch_at = |p: u32| -> Option<RealApprox> {
            let logs = value.log_abs_embeddings(p)?;
            Some(logs.iter().fold(RealApprox::zero_with(p), |a, l| a - l.neg_part()))
        };
        let phi_h = |p: u32| Some(h(gamma, p)?.mul_int(&phi_b));
        let log_pi_n = |p: u32| (RealApprox::pi(p) * RealApprox::from_i64(n as i64, p)).ln();
        let two_w = |x: RealApprox| x.mul_pow2(omega as i64);
        let mut rows = Vec::new();

        // eq6: the height of Phi_n(gamma) through its places
        let pos = finite.positive_norm.clone();
        let tol = BigRational::new(BigInt::one(), BigInt::from(10).pow(9));
        rows.push(Row::balance("eq6", &tol, true, |p| {
            Some((h(&value, p)?.mul_int(&dd), arch_at(p)? + ln(&pos, p)?))
        }));
        rows.push(match finite.recomputed_split() {
            Some((sp, snp)) => Row::exact(
                "eq6.split",
                Relation::Eq,
                true,
                int(&(&sp * &snp)),
                int(&finite.positive_norm),
                sp == finite.p_norm && snp == finite.np_norm && &sp * &snp == finite.positive_norm,
            ),
            None => Row::vacuous("eq6.split", Relation::Eq, "factorization incomplete"),
        });

        // eq7: archimedean part
        let c7 = &dd * BigInt::from(10).pow(14) * dd.pow(5);
        rows.push(Row::certified("eq7", Relation::Le, true, |p| {
            let ls = log_star(&RealApprox::from_i64(n as i64, p)).ok()?;
            Some((arch_at(p)?, two_w((h(gamma, p)? * ls).mul_int(&c7))))
        }));

        // eq8: non-primitive part, exactly
        let hyp8 = n >= 1u64 << (d + 1);
        let nd = nn.pow(d);
        let n2 = nn.pow(2);
        let np_row = |id: &str, bound: &BigInt| {
            let lhs = finite.sigma_np(prec);
            let rhs = RealApprox::ln_int(bound, prec).expect("n >= 1");
            if hyp8 {
                Row::exact(id, Relation::Le, true, lhs, rhs, &finite.np_norm <= bound)
            } else {
                Row::skipped(id, Relation::Le, lhs, rhs, "n < 2^(d+1)")
            }
        };
        rows.push(np_row("eq8.np", &nd));
        rows.push(np_row("eq8", &n2));

        // eq9 and eq11 combine eq6, eq7, eq8 and eq10
        let c9 = BigInt::from(10).pow(16);
        let p_norm = finite.p_norm.clone();
        let hyp9 = hyp8 && n >= 3;
        let eq9 = |p: u32| -> Option<(RealApprox, RealApprox)> {
            let l = RealApprox::ln_int(&nn, p)?;
            let rhs = two_w((h(gamma, p)? * &l).mul_int(&c9)) + ln(&p_norm, p)?.checked_div(&RealApprox::from_int(&dd, p))? + l;
            Some((h(&value, p)?, rhs))
        };
        let row = Row::certified("eq9", Relation::Le, true, eq9);
        rows.push(if hyp9 { row } else { row.reported().with_note("needs n >= 3 and n >= 2^(d+1)") });

        rows.push(Row::certified("eq10", Relation::Ge, true, |p| {
            Some((h(&value, p)?, phi_h(p)? - two_w(log_pi_n(p)?)))
        }));

        let row = Row::certified("eq11", Relation::Ge, true, |p| {
            let l = RealApprox::ln_int(&nn, p)?;
            let rhs = phi_h(p)? - two_w(log_pi_n(p)?) - two_w((h(gamma, p)? * &l).mul_int(&c9)) - l;
            Some((ln(&p_norm, p)?.checked_div(&RealApprox::from_int(&dd, p))?, rhs))
        });
        rows.push(if hyp9 { row } else { row.reported().with_note("needs n >= 3 and n >= 2^(d+1)") });

        // eq12 to eq14: asymptotic, reported
        let frac_phi_h = |num: i64, den: i64, p: u32| Some(phi_h(p)? * RealApprox::frac(num, den, p));
        let eq12 = Row::certified("eq12", Relation::Ge, false, |p| {
            Some((ln(&p_norm, p)?, frac_phi_h(4 * d as i64, 10, p)?))
        });
        let p1 = finite.p1_norm();
        let p2 = finite.p2_norm.clone();
        let case_row = |id: &str, part: &Option<BigInt>| match part {
            Some(x) => Row::certified(id, Relation::Ge, false, |p| Some((ln(x, p)?, frac_phi_h(4, 10, p)?))),
            None => Row::vacuous(id, Relation::Ge, "degree-2 part not isolated"),
        };
        let eq13 = case_row("eq13", &p1);
        let eq14 = case_row("eq14", &p2);
        let case = match (p2.is_some(), eq13.holds(), eq14.holds()) {
            (false, _, _) => CaseTag::Unknown,
            (true, true, true) => CaseTag::Both,
            (true, true, false) => CaseTag::Eq13,
            (true, false, true) => CaseTag::Eq14,
            (true, false, false) => CaseTag::Neither,
        };
        let either = eq13.holds() || eq14.holds();
        let disj_lhs = eq13.lhs.max(&eq14.lhs);
        let disj_rhs = eq13.rhs.clone();
        let disj = if p2.is_none() {
            Row::vacuous("eq13|14", Relation::Ge, "degree-2 part not isolated")
        } else if eq12.holds() {
            Row::exact("eq13|14", Relation::Ge, true, disj_lhs, disj_rhs, either).with_note(format!("case {case}"))
        } else {
            Row::skipped("eq13|14", Relation::Ge, disj_lhs, disj_rhs, "eq12 does not hold at this n")
        };
        let eq14_holds = eq14.holds();
        rows.extend([eq12, eq13, eq14, disj]);

        rows.push(match (finite.sigma_p1(prec), finite.sigma_p2(prec)) {
            (Some(_), Some(_)) => {
                let (a, b) = (p1.clone().unwrap(), p2.clone().unwrap());
                Row::exact(
                    "sigma.p",
                    Relation::Eq,
                    true,
                    finite.sigma_p(prec),
                    finite.sigma_p1(prec).unwrap() + finite.sigma_p2(prec).unwrap(),
                    &a * &b == finite.p_norm,
                )
            }
            _ => Row::vacuous("sigma.p", Relation::Eq, "degree-2 part not isolated"),
        });

        // P and the residue-degree-1 case
        let big_p = finite.largest.value.clone();
        rows.push(Row::exact(
            "p.order",
            Relation::Ge,
            true,
            int(&p_u.value),
            int(&big_p),
            p_u.value >= big_p || !p_u.exact,
        ));
        let prim: Vec<_> = finite.entries.iter().filter(|e| e.primitive).collect();
        if let Some(m) = prim.iter().filter(|e| e.ideal.residue_degree() == 1).map(|e| e.ideal.p().clone()).min() {
            rows.push(Row::exact("p.f1", Relation::Ge, true, int(&m), int(&(&nn + 1)), m > nn));
        }
        let f2: Vec<BigInt> = prim.iter().filter(|e| e.ideal.residue_degree() == 2).map(|e| e.ideal.p().clone()).collect();
        if let Some(m) = f2.iter().min() {
            let ok = f2.iter().all(|q| ((q * q - 1u32) % &nn).is_zero());
            rows.push(Row::exact("p.f2", Relation::Ge, true, int(&(m * m)), int(&(&nn + 1)), ok));
        }

        let pi = pi_progression(&big_p, n);
        rows.push(match pi {
            Some(c) => {
                let lhs = BigInt::from(c) * &nn;
                Row::exact("pi.trivial", Relation::Le, true, int(&lhs), int(&big_p), lhs <= big_p)
            }
            None => Row::vacuous("pi.trivial", Relation::Le, "P beyond the enumeration limit"),
        });
        let sigma_p1 = finite.sigma_p1(prec);
        if n >= 3 && big_p > BigInt::one() {
            let ls1 = sigma_p1.clone().unwrap_or_else(|| RealApprox::zero_with(prec));
            let pf = RealApprox::from_int(&big_p, prec);
            let l = RealApprox::ln_int(&nn, prec).unwrap();
            let lp = RealApprox::ln_int(&big_p, prec).unwrap();
            let e = exp_ratio(-1, 1000, n, prec).unwrap();
            let core = &(&pf * &e) * &(&h_gamma * &l);
            match pi {
                Some(c) => {
                    let rhs = (&core * &lp).mul_int(&BigInt::from(c));
                    rows.push(Row::skipped("eq15", Relation::Le, ls1.clone(), rhs, "needs p >= p0"));
                }
                None => rows.push(Row::vacuous("eq15", Relation::Le, "pi(P; n, 1) not enumerated")),
            }
            let rhs16 = (&(&core * &pf) * &l).mul_int(&BigInt::from(2)).checked_div(&RealApprox::from_int(&nn, prec)).unwrap();
            rows.push(Row::skipped("eq16", Relation::Le, ls1, rhs16, "needs p >= p0"));
        } else {
            rows.push(Row::vacuous("eq15", Relation::Le, "n < 3 or P = 1"));
            rows.push(Row::vacuous("eq16", Relation::Le, "n < 3 or P = 1"));
        }
        rows.push(if n >= 3 {
            let row = Row::certified("mainr", Relation::Ge, false, |p| {
                Some((RealApprox::from_int(&big_p, p), theorem_rhs(n, &TheoremVariant::Main, p).ok()?))
            });
            if finite.largest.exact {
                row
            } else {
                row.with_note("P is a lower bound")
            }
        } else {
            Row::vacuous("mainr", Relation::Ge, "n < 3")
        });

        // cyclotomic and primitive-divisor propositions
        rows.push(check_prop21_item1(gamma, n)?);
        rows.push(check_prop21_item2(gamma, n)?);
        let g = PreparedElement::new(gamma);
        let phi_prep = PreparedElement::new(&value);
        let u_n = PreparedElement::new(&gamma.pow_minus_one(n));
        for e in &finite.entries {
            if e.order.is_some() {
                rows.extend(check_prop22(&g, n, &e.ideal, &phi_prep)?);
            }
            rows.extend(valuation_theorem_rows(gamma, n, &e.ideal, &u_n, &h_gamma)?);
        }
        if self.oracle() && !finite.entries.is_empty() {
            let scan = DefinitionalScan::new(gamma, n);
            for e in &finite.entries {
                let def = scan.classify(n, &e.ideal)? == Primitivity::Primitive;
                let show = |b: bool| RealApprox::from_i64(b as i64, 64);
                rows.push(
                    Row::exact("oracle.primitivity", Relation::Eq, true, show(e.primitive), show(def), def == e.primitive)
                        .with_note(e.ideal.name()),
                );
            }
        }
        if n >= 3 {
            let f = factor(&nn).expect("small n");
            let af = check_af_bounds(&f);
            if let Some(b) = &af.omega {
                rows.push(af_row("af.omega", b));
            }
            if let Some(b) = &af.tau {
                rows.push(af_row("af.tau", b));
            }
        }

        // the inert case
        let beta = if d == 2 && !gamma.is_rational() && (self.always_beta || matches!(case, CaseTag::Eq14 | CaseTag::Both)) {
            match beta_chain_with(gamma, n, self.factorizer()) {
                Ok(b) => Some(b),
                Err(VerifyError::Budget(s)) => {
                    rows.push(Row::vacuous("beta", Relation::Le, format!("factorization budget exhausted at {s}")));
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        if let Some(b) = &beta {
            rows.extend(b.rows.iter().cloned());
            self.inert_case_rows(gamma, n, b, &big_p, &p2, eq14_holds, &mut rows);
        }

        Ok(ProofLedger {
            gamma: gamma.clone(),
            n,
            degree: d,
            phi,
            omega,
            tau,
            h_gamma,
            h_phi,
            arch,
            sigma_p: finite.sigma_p(prec),
            sigma_np: finite.sigma_np(prec),
            sigma_p1,
            sigma_p2: finite.sigma_p2(prec),
            p: finite.largest.clone(),
            p_u,
            case,
            beta,
            thresholds: Thresholds::new(d, field.discriminant(), prec),
            finite,
            rows,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn inert_case_rows(
        &self,
        gamma: &FieldElement,
        n: u64,
        b: &BetaReport,
        big_p: &BigInt,
        p2: &Option<BigInt>,
        eq14_holds: bool,
        rows: &mut Vec<Row>,
    ) {
        let prec = DEFAULT_PRECISION;
        let phi_b = BigInt::from(phi_u64(n));
        let nn = BigInt::from(n);
        if b.torsion {
            rows.push(Row::vacuous("norm1lowb", Relation::Ge, "beta is a root of unity"));
            return;
        }
        let v_n: BigInt = b.dp.entries.iter().map(|e| num_traits::pow(e.p.clone(), e.nu_v_n as usize)).product();
        let row = Row::certified("norm1lowb", Relation::Ge, true, |p| {
            Some((ln(&v_n, p)?, (h(gamma, p)? * RealApprox::frac(2, 10, p)).mul_int(&phi_b)))
        });
        rows.push(if eq14_holds && p2.is_some() {
            row
        } else {
            row.reported().with_note("eq14 does not hold")
        });

        let small: Vec<_> = b.dp.entries.iter().filter(|e| b.small_dp.contains(&e.p)).collect();
        let small_sum: BigInt = small.iter().map(|e| num_traits::pow(e.p.clone(), e.nu_primitive as usize)).product();
        rows.push(Row::certified("smalldlow", Relation::Ge, false, |p| {
            Some((ln(&small_sum, p)?, (h(gamma, p)? * RealApprox::frac(1, 10, p)).mul_int(&phi_b)))
        }));
        let count = BigInt::from(small.len());
        rows.push(if n >= 16 {
            Row::certified("carppp", Relation::Le, false, |p| {
                let l = RealApprox::ln_int(&nn, p)?;
                let ll = l.ln()?;
                let lll = ll.ln()?;
                let e = (l * lll).mul_int(&BigInt::from(80)).checked_div(&(&ll * &ll))?.exp();
                let lead = RealApprox::from_int(big_p, p).checked_div(&RealApprox::from_int(&nn, p))? + RealApprox::one_with(p);
                Some((RealApprox::from_int(&count, p), lead * e))
            })
        } else {
            Row::vacuous("carppp", Relation::Le, "log log log n <= 0")
        });
        if n >= 3 && !small.is_empty() {
            let e = exp_ratio(-5, 10_000, n, prec).expect("n >= 3");
            let l = RealApprox::ln_int(&nn, prec).unwrap();
            let lead = (&(&RealApprox::from_int(big_p, prec) * &e) * &(&self_h(gamma) * &l)).mul_int(&BigInt::from(2));
            let nu_max = small.iter().map(|e| e.nu_v_n).max().unwrap_or(0);
            rows.push(Row::skipped("padicofb", Relation::Le, RealApprox::from_i64(nu_max, prec), lead.clone(), "needs p >= p0"));
            let lp = RealApprox::ln_int(big_p, prec).unwrap_or_else(|| RealApprox::zero_with(prec));
            let rhs = (&lead * &lp).mul_int(&count);
            rows.push(Row::skipped("smalldup", Relation::Le, RealApprox::ln_int(&small_sum, prec).unwrap(), rhs, "needs p >= p0"));
        } else {
            rows.push(Row::vacuous("padicofb", Relation::Le, "no inert p with small d_p"));
            rows.push(Row::vacuous("smalldup", Relation::Le, "no inert p with small d_p"));
        }
    }
}

fn self_h(gamma: &FieldElement) -> RealApprox {
    h(gamma, DEFAULT_PRECISION).expect("nonzero")
}
