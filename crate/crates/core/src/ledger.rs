//! Inequality rows shared by every checker.

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::real::{decide, decide_within, Decision, RealApprox, DEFAULT_PRECISION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    Vacuous,
    SkippedHypothesis,
    Undecidable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Vacuous => "vacuous",
            Verdict::SkippedHypothesis => "skipped-hypothesis",
            Verdict::Undecidable => "undecidable",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// One checked display: `lhs relation rhs`.
///
/// `margin` is the slack (`rhs - lhs` for `<=`, `lhs - rhs` for `>=`,
/// `lhs - rhs` for `=`). Only `asserted` rows count toward pass/fail.
#[derive(Clone, Debug)]
pub struct Row {
    pub id: String,
    pub relation: Relation,
    pub lhs: RealApprox,
    pub rhs: RealApprox,
    pub margin: RealApprox,
    pub verdict: Verdict,
    pub asserted: bool,
    pub note: Option<String>,
}

fn slack(relation: Relation, lhs: &RealApprox, rhs: &RealApprox) -> RealApprox {
    match relation {
        Relation::Le => rhs - lhs,
        Relation::Ge | Relation::Eq => lhs - rhs,
    }
}

fn verdict_of(d: Decision) -> Verdict {
    match d {
        Decision::True => Verdict::Holds,
        Decision::False => Verdict::Fails,
        Decision::Undecided => Verdict::Undecidable,
    }
}

impl Row {
    /// Certify an inequality between two interval-valued expressions,
    /// refining precision until the verdict is settled.
    pub fn certified<F>(id: impl Into<String>, relation: Relation, asserted: bool, eval: F) -> Row
    where
        F: Fn(u32) -> Option<(RealApprox, RealApprox)>,
    {
        assert!(relation != Relation::Eq, "use Row::balance for identities");
        let verdict = verdict_of(decide(|p| eval(p).map(|(l, r)| slack(relation, &l, &r))));
        Self::finish(id.into(), relation, asserted, verdict, &eval)
    }

    /// Certify `|lhs - rhs| <= tol`.
    pub fn balance<F>(id: impl Into<String>, tol: &BigRational, asserted: bool, eval: F) -> Row
    where
        F: Fn(u32) -> Option<(RealApprox, RealApprox)>,
    {
        let verdict = verdict_of(decide_within(tol, |p| eval(p).map(|(l, r)| l - r)));
        Self::finish(id.into(), Relation::Eq, asserted, verdict, &eval)
    }

    fn finish<F>(id: String, relation: Relation, asserted: bool, verdict: Verdict, eval: &F) -> Row
    where
        F: Fn(u32) -> Option<(RealApprox, RealApprox)>,
    {
        let (lhs, rhs) = eval(DEFAULT_PRECISION)
            .or_else(|| eval(4 * DEFAULT_PRECISION))
            .unwrap_or_else(|| (RealApprox::zero_with(DEFAULT_PRECISION), RealApprox::zero_with(DEFAULT_PRECISION)));
        let margin = slack(relation, &lhs, &rhs);
        Row {
            id,
            relation,
            lhs,
            rhs,
            margin,
            verdict,
            asserted,
            note: None,
        }
    }

    /// A comparison decided exactly (integer or rational arithmetic);
    /// `lhs`/`rhs` are the displayed values.
    pub fn exact(id: impl Into<String>, relation: Relation, asserted: bool, lhs: RealApprox, rhs: RealApprox, holds: bool) -> Row {
        let margin = slack(relation, &lhs, &rhs);
        Row {
            id: id.into(),
            relation,
            lhs,
            rhs,
            margin,
            verdict: if holds { Verdict::Holds } else { Verdict::Fails },
            asserted,
            note: None,
        }
    }

    /// Both sides recorded, hypothesis not met: never asserted.
    pub fn skipped(id: impl Into<String>, relation: Relation, lhs: RealApprox, rhs: RealApprox, note: impl Into<String>) -> Row {
        let margin = slack(relation, &lhs, &rhs);
        Row {
            id: id.into(),
            relation,
            lhs,
            rhs,
            margin,
            verdict: Verdict::SkippedHypothesis,
            asserted: false,
            note: Some(note.into()),
        }
    }

    pub fn vacuous(id: impl Into<String>, relation: Relation, note: impl Into<String>) -> Row {
        let z = RealApprox::zero_with(DEFAULT_PRECISION);
        Row {
            id: id.into(),
            relation,
            lhs: z.clone(),
            rhs: z.clone(),
            margin: z,
            verdict: Verdict::Vacuous,
            asserted: false,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Row {
        self.note = Some(note.into());
        self
    }

    /// Report-only copy of this row.
    pub fn reported(mut self) -> Row {
        self.asserted = false;
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// An asserted row that did not hold.
    pub fn is_failure(&self) -> bool {
        self.asserted && matches!(self.verdict, Verdict::Fails | Verdict::Undecidable)
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<18} {:>22.15e} {} {:<22.15e} {}{}",
            self.id,
            self.lhs.mid(),
            self.relation,
            self.rhs.mid(),
            self.verdict,
            if self.asserted { "" } else { " (reported)" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn certified_rows() {
        let r = Row::certified("ln3<=ln2+ln2", Relation::Le, true, |p| {
            Some((RealApprox::ln_int(&BigInt::from(3), p)?, RealApprox::ln2(p).mul_pow2(1)))
        });
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.margin.is_positive());
        let r = Row::certified("ln3>=ln4", Relation::Ge, true, |p| {
            Some((RealApprox::ln_int(&BigInt::from(3), p)?, RealApprox::ln_int(&BigInt::from(4), p)?))
        });
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.is_failure());
        assert!(!r.clone().reported().is_failure());
    }

    #[test]
    fn balance_rows() {
        let tol = BigRational::new(BigInt::from(1), BigInt::from(10).pow(9));
        let r = Row::balance("ln6", &tol, true, |p| {
            Some((
                RealApprox::ln_int(&BigInt::from(6), p)?,
                RealApprox::ln2(p) + RealApprox::ln_int(&BigInt::from(3), p)?,
            ))
        });
        assert_eq!(r.verdict, Verdict::Holds);
    }
}
