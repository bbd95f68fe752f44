//! Serializable ledger records.
//!
//! Numbers are interval midpoints rounded to 15 significant digits, so a
//! record written and read back serializes to the same bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CaseTag, ProofLedger};
use crate::ledger::{Relation, Row, Verdict};
use crate::real::RealApprox;

/// `x` rounded to 15 significant digits; non-finite values clamp to `±1e308` or 0.
pub fn round15(x: f64) -> f64 {
    let x = if x.is_nan() { 0.0 } else { x.clamp(-1e308, 1e308) };
    format!("{x:.14e}").parse().expect("formatted float")
}

/// The text used for a number in every output format.
pub fn render_number(x: f64) -> String {
    serde_json::to_string(&round15(x)).expect("finite float")
}

/// Interval midpoint and radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Num {
    pub value: f64,
    pub err: f64,
}

impl Num {
    pub fn of(x: &RealApprox) -> Self {
        Num {
            value: round15(x.mid()),
            err: round15(x.rad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuantityRecord {
    Number(Num),
    Flag(bool),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowRecord {
    pub id: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub err: f64,
    pub verdict: Verdict,
    pub asserted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RowRecord {
    pub fn of(row: &Row) -> Self {
        RowRecord {
            id: row.id.clone(),
            relation: row.relation,
            lhs: round15(row.lhs.mid()),
            rhs: round15(row.rhs.mid()),
            margin: round15(row.margin.mid()),
            err: round15(row.margin.rad()),
            verdict: row.verdict,
            asserted: row.asserted,
            note: row.note.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub gamma: String,
    pub n: u64,
    pub quantities: BTreeMap<String, QuantityRecord>,
    pub rows: Vec<RowRecord>,
}

const REQUIRED: [&str; 8] = ["h_gamma", "h_phi", "sigma_p", "sigma_np", "P", "P_exact", "case", "degree"];

impl LedgerRecord {
    pub fn of(l: &ProofLedger) -> Self {
        use QuantityRecord::*;
        let mut q = BTreeMap::new();
        let mut put = |k: &str, v: QuantityRecord| {
            q.insert(k.to_string(), v);
        };
        put("degree", Text(l.degree.to_string()));
        put("phi", Text(l.phi.to_string()));
        put("omega", Text(l.omega.to_string()));
        put("tau", Text(l.tau.to_string()));
        put("h_gamma", Number(Num::of(&l.h_gamma)));
        put("h_phi", Number(Num::of(&l.h_phi)));
        for (i, a) in l.arch.iter().enumerate() {
            put(&format!("arch_{i}"), Number(Num::of(a)));
        }
        put("sigma_p", Number(Num::of(&l.sigma_p)));
        put("sigma_np", Number(Num::of(&l.sigma_np)));
        if let Some(x) = &l.sigma_p1 {
            put("sigma_p1", Number(Num::of(x)));
        }
        if let Some(x) = &l.sigma_p2 {
            put("sigma_p2", Number(Num::of(x)));
        }
        put("primitive_norm", Text(l.finite.p_norm.to_string()));
        put("nonprimitive_norm", Text(l.finite.np_norm.to_string()));
        put("P", Text(l.p.value.to_string()));
        put("P_exact", Flag(l.p.exact));
        if let Some(w) = &l.p.witness {
            put("P_witness", Text(w.clone()));
        }
        put("P_u", Text(l.p_u.value.to_string()));
        put("case", Text(l.case.to_string()));
        put("log_p0", Number(Num::of(&l.thresholds.log_p0_general)));
        put("loglog_n0", Text(l.thresholds.loglog_n0.to_string()));
        if let Some(b) = &l.beta {
            put("beta", Text(b.beta.to_string()));
            put("inert_set", Text(join(&b.inert_set)));
            let dp: Vec<String> = b.dp.entries.iter().map(|e| format!("{}:{}", e.p, e.d_p)).collect();
            put("d_p", Text(dp.join(" ")));
            put("small_divisors", Text(b.small_divisors.to_string()));
            put("small_dp", Text(join(&b.small_dp)));
        }
        LedgerRecord {
            gamma: l.gamma.to_literal(),
            n: l.n,
            quantities: q,
            rows: l.rows.iter().map(RowRecord::of).collect(),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Structural checks on a parsed record.
    pub fn validate(&self) -> Result<(), String> {
        if self.gamma.is_empty() || self.n == 0 {
            return Err("missing gamma or n".into());
        }
        for k in REQUIRED {
            if !self.quantities.contains_key(k) {
                return Err(format!("missing quantity {k}"));
            }
        }
        if let Some(QuantityRecord::Text(c)) = self.quantities.get("case") {
            if !["13", "14", "13+14", "none", "unknown"].contains(&c.as_str()) {
                return Err(format!("bad case tag {c}"));
            }
        }
        for r in &self.rows {
            if r.id.is_empty() {
                return Err("row without id".into());
            }
            if ![r.lhs, r.rhs, r.margin, r.err].iter().all(|x| x.is_finite()) || r.err < 0.0 {
                return Err(format!("row {}: bad numbers", r.id));
            }
            if r.asserted && matches!(r.verdict, Verdict::SkippedHypothesis | Verdict::Vacuous) {
                return Err(format!("row {}: asserted but {}", r.id, r.verdict));
            }
        }
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| !r.asserted || r.verdict == Verdict::Holds)
    }
}

fn join(v: &[num_bigint::BigInt]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl From<CaseTag> for QuantityRecord {
    fn from(c: CaseTag) -> Self {
        QuantityRecord::Text(c.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round15(0.1 + 0.2), 0.3);
        assert_eq!(render_number(1.0 / 3.0), "0.333333333333333");
        assert_eq!(render_number(f64::INFINITY), "1e+308");
        for x in [1e-300, 123456789.123456789, -2.5e17, 0.0] {
            assert_eq!(round15(round15(x)), round15(x));
        }
    }

    #[test]
    fn quantities_round_trip() {
        let v = vec![
            QuantityRecord::Number(Num { value: 1.5, err: 0.0 }),
            QuantityRecord::Flag(true),
            QuantityRecord::Text("41".into()),
        ];
        let s = serde_json::to_string(&v).unwrap();
        let back: Vec<QuantityRecord> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
