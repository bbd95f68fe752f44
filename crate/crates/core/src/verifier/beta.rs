//! The companion sequence `v_n = beta^n - 1`, `beta = gamma^sigma / gamma`,
//! at inert primes dividing `gamma^n - 1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{require_nontorsion, Verifier, VerifyError};
use crate::arith::{divisors, tau_u64, ArithError, Factorizer};
use crate::cyclotomic::eval_cyclotomic;
use crate::field::FieldElement;
use crate::height::mahler_height;
use crate::ideals::{split_prime, DefinitionalScan, PreparedElement, PrimeIdeal, Primitivity, Splitting};
use crate::ledger::{Relation, Row};
use crate::real::{decide, decide_strict, Decision, RealApprox, DEFAULT_PRECISION};

/// `d_p` for one inert `p`: the divisor of `n` with `p` primitive for `v_{n/d_p}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpEntry {
    pub p: BigInt,
    pub d_p: u64,
    /// `nu_p(v_{n/d_p})`.
    pub nu_primitive: i64,
    /// `nu_p(v_n)`.
    pub nu_v_n: i64,
    /// How many divisors `d` of `n` make `p` primitive for `v_{n/d}`.
    pub candidates: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DpTable {
    pub entries: Vec<DpEntry>,
}

impl DpTable {
    pub fn unique(&self) -> bool {
        self.entries.iter().all(|e| e.candidates == 1)
    }
}

#[derive(Clone, Debug)]
pub struct BetaReport {
    pub beta: FieldElement,
    /// `beta` is a root of unity; the chain degenerates.
    pub torsion: bool,
    /// Inert `p` with `nu_p(gamma^n - 1) > 0`.
    pub inert_set: Vec<BigInt>,
    /// Inert `p` at which `gamma` is not integral.
    pub excluded: Vec<BigInt>,
    pub dp: DpTable,
    /// `#{d | n : d < tau(n) log n}`.
    pub small_divisors: usize,
    /// Members of the inert set with `d_p < tau(n) log n`.
    pub small_dp: Vec<BigInt>,
    /// Unfactored part of the coordinate gcd of `gamma^n - 1`; `1` when
    /// the inert set is complete.
    pub unfactored: BigInt,
    pub rows: Vec<Row>,
}

impl BetaReport {
    pub fn complete(&self) -> bool {
        self.unfactored.is_one()
    }
}

fn inert_ideal(field: &crate::field::QuadraticField, p: &BigInt) -> Option<PrimeIdeal> {
    let mut ideals = split_prime(field, p);
    (ideals.len() == 1 && ideals[0].splitting() == Splitting::Inert).then(|| ideals.remove(0))
}

/// `gcd` of the integral coordinates of `x`.
fn coord_gcd(x: &PreparedElement) -> BigInt {
    x.form().u.gcd(&x.form().v)
}

/// Primes of `coord_gcd(x)` and the product of the parts left unfactored.
///
/// An inert `p` at which `x` is integral has `p^nu_p(x) | coord_gcd(x)`.
fn gcd_primes(x: &PreparedElement, fz: &Factorizer) -> Result<(Vec<BigInt>, BigInt), VerifyError> {
    let g = coord_gcd(x);
    match fz.factor_partial(&g) {
        Ok(f) => {
            let rest = f.unfactored().iter().map(|c| BigInt::from(c.clone())).product();
            Ok((f.primes().map(|p| BigInt::from(p.clone())).collect(), rest))
        }
        Err(ArithError::BudgetExceeded(f)) => Err(VerifyError::Budget(f.value().to_string())),
        Err(ArithError::ZeroInput) => Err(VerifyError::Invariant("zero element".into())),
    }
}

/// The largest divisor of `x` built from primes of `r`.
fn smooth_part(x: &BigInt, r: &BigInt) -> BigInt {
    let mut x = x.abs();
    let mut out = BigInt::one();
    if x.is_zero() {
        return out;
    }
    loop {
        let g = x.gcd(r);
        if g.is_one() {
            return out;
        }
        x /= &g;
        out *= g;
    }
}

/// `nu_p(x)`, `None` for `x = 0`.
fn val(x: &FieldElement, ideal: &PrimeIdeal) -> Result<Option<i64>, VerifyError> {
    if x.is_zero() {
        return Ok(None);
    }
    Ok(Some(PreparedElement::new(x).valuation(ideal)?))
}

/// `a >= b` with `None` read as infinity.
fn ge(a: Option<i64>, b: Option<i64>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(x), Some(y)) => x >= y,
    }
}

fn int(x: i64) -> RealApprox {
    RealApprox::from_i64(x, DEFAULT_PRECISION)
}

fn ln(n: &BigInt) -> RealApprox {
    RealApprox::ln_int(n, DEFAULT_PRECISION).expect("positive")
}

fn chain_row(id: &str, a: Option<i64>, b: Option<i64>, name: &str) -> Row {
    let show = |x: Option<i64>, other: Option<i64>| int(x.or(other).unwrap_or(0));
    let row = Row::exact(id, Relation::Ge, true, show(a, b), show(b, a), ge(a, b));
    match (a, b) {
        (None, _) | (_, None) => row.with_note(format!("{name}: infinite valuation (zero element)")),
        _ => row.with_note(name.to_string()),
    }
}

/// `prod_{m | n} m <= n^tau(n)`, exactly; returns both sides.
pub fn check_eq18(n: u64) -> (BigInt, BigInt, bool) {
    let lhs: BigInt = divisors(n).into_iter().map(BigInt::from).product();
    let rhs = num_traits::pow(BigInt::from(n), tau_u64(n) as usize);
    let holds = lhs <= rhs;
    (lhs, rhs, holds)
}

/// `#{d | n : d < tau(n) log n}`, each comparison certified.
pub fn small_divisor_count(n: u64) -> usize {
    let t = tau_u64(n) as i64;
    divisors(n)
        .into_iter()
        .filter(|&d| {
            decide_strict(|p| {
                Some(RealApprox::ln_int(&BigInt::from(n), p)?.mul_int(&BigInt::from(t)) - RealApprox::from_i64(d as i64, p))
            }) == Decision::True
        })
        .count()
}

/// `sum_p nu_p(v_m) log p <= log 2 + 2 m h(gamma)` over inert `p` at which
/// `gamma` is a unit.
pub fn check_eq19(gamma: &FieldElement, m: u64) -> Result<Row, VerifyError> {
    eq19_row(gamma, m, &Factorizer::default())
}

fn eq19_row(gamma: &FieldElement, m: u64, fz: &Factorizer) -> Result<Row, VerifyError> {
    require_quadratic(gamma)?;
    let beta = gamma.conjugate().checked_div(gamma).expect("nonzero");
    let v = beta.pow_minus_one(m);
    let g = PreparedElement::new(gamma);
    if v.is_zero() {
        return Ok(Row::vacuous("eq19", Relation::Le, format!("m={m}: v_m = 0")));
    }
    let pv = PreparedElement::new(&v);
    let (primes, rest) = gcd_primes(&pv, fz)?;
    let mut lhs = BigInt::one();
    for q in primes {
        if let Some(ideal) = inert_ideal(gamma.field(), &q) {
            let e = pv.valuation(&ideal)?;
            if e > 0 && g.valuation(&ideal)? == 0 {
                lhs *= num_traits::pow(q, e as usize);
            }
        }
    }
    // unfactored parts count in full, so the row stays an upper bound
    let bound = &lhs * &rest;
    let mm = BigInt::from(2 * m);
    let row = Row::certified("eq19", Relation::Le, true, |p| {
        let h = mahler_height(gamma, p).ok()?;
        Some((RealApprox::ln_int(&bound, p)?, RealApprox::ln2(p) + h.mul_int(&mm)))
    });
    Ok(row.with_note(if rest.is_one() {
        format!("m={m}")
    } else {
        format!("m={m}: includes unfactored {rest}")
    }))
}

fn require_quadratic(gamma: &FieldElement) -> Result<(), VerifyError> {
    if gamma.field().degree() != 2 || gamma.is_rational() {
        return Err(VerifyError::DegreeMismatch(gamma.degree()));
    }
    require_nontorsion(gamma)
}

/// The valuation chain, the `d_p` table and the bounds built on them.
pub fn beta_chain(gamma: &FieldElement, n: u64) -> Result<BetaReport, VerifyError> {
    beta_chain_with(gamma, n, &Factorizer::default())
}

impl Verifier {
    pub fn beta_chain(&self, gamma: &FieldElement, n: u64) -> Result<BetaReport, VerifyError> {
        beta_chain_with(gamma, n, self.factorizer())
    }

    pub fn check_eq19(&self, gamma: &FieldElement, m: u64) -> Result<Row, VerifyError> {
        eq19_row(gamma, m, self.factorizer())
    }
}

pub(crate) fn beta_chain_with(gamma: &FieldElement, n: u64, fz: &Factorizer) -> Result<BetaReport, VerifyError> {
    require_quadratic(gamma)?;
    if n == 0 {
        return Err(VerifyError::Domain("n must be positive".into()));
    }
    let field = gamma.field();
    let conj = gamma.conjugate();
    let beta = conj.checked_div(gamma).expect("nonzero");
    let torsion = beta.is_root_of_unity();
    let g = PreparedElement::new(gamma);
    let u_n = gamma.pow_minus_one(n);
    let pu = PreparedElement::new(&u_n);
    let phi = PreparedElement::new(&eval_cyclotomic(n, gamma));
    let mut rows = Vec::new();

    let mut inert_set = Vec::new();
    let (primes, unfactored) = gcd_primes(&pu, fz)?;
    for q in primes {
        if let Some(ideal) = inert_ideal(field, &q) {
            if pu.valuation(&ideal)? > 0 {
                inert_set.push(q);
            }
        }
    }
    let mut excluded = Vec::new();
    if !g.form().c.is_one() {
        for q in fz.factor(&g.form().c).map_err(|e| VerifyError::Budget(e.to_string()))?.primes() {
            let q = BigInt::from(q.clone());
            if inert_ideal(field, &q).is_some() {
                excluded.push(q);
            }
        }
    }

    let beta_n = beta.pow_minus_one(n);
    let diff = &conj.pow(n) - &gamma.pow(n);
    let conj_u = conj.pow_minus_one(n);
    let mut a_vals = Vec::new();
    for q in &inert_set {
        let ideal = inert_ideal(field, q).expect("inert");
        let name = ideal.name();
        let a = val(&beta_n, &ideal)?;
        let b = val(&diff, &ideal)?;
        let c = Some(pu.valuation(&ideal)?);
        let c2 = val(&conj_u, &ideal)?;
        let e = Some(phi.valuation(&ideal)?);
        rows.push(
            Row::exact("beta.chain.0", Relation::Eq, true, int(c.unwrap()), int(c2.unwrap_or(0)), c == c2)
                .with_note(name.clone()),
        );
        rows.push(chain_row("beta.chain.1", a, b, &name));
        rows.push(chain_row("beta.chain.2", b, c, &name));
        rows.push(chain_row("beta.chain.3", c, e, &name));
        a_vals.push((q.clone(), ideal, a));
    }

    let small_divisors = small_divisor_count(n);
    let tau = tau_u64(n);
    let mut report = BetaReport {
        beta: beta.clone(),
        torsion,
        inert_set,
        excluded,
        dp: DpTable::default(),
        small_divisors,
        small_dp: Vec::new(),
        unfactored,
        rows,
    };
    let (l18, r18, ok18) = check_eq18(n);
    report.rows.push(Row::exact("eq18", Relation::Le, true, ln(&l18), ln(&r18), ok18));
    if torsion {
        for id in ["eq17", "eq20", "dp.big"] {
            report
                .rows
                .push(Row::vacuous(id, Relation::Le, format!("beta = {beta} is a root of unity")));
        }
        return Ok(report);
    }

    let div = divisors(n);
    let scan = (!a_vals.is_empty()).then(|| DefinitionalScan::new(&beta, n));
    let pb = PreparedElement::new(&beta);
    for (q, ideal, a) in &a_vals {
        let scan = scan.as_ref().expect("non-empty set");
        let first = scan.first_index(ideal)?;
        let order = pb.residue_order(ideal)?;
        if first.map(num_bigint::BigUint::from) != Some(order.clone()) {
            return Err(VerifyError::Invariant(format!("order of beta mod {q}: scan {first:?}, residue {order}")));
        }
        let mut candidates = 0;
        let mut d_p = 0;
        for &d in &div {
            if scan.classify(n / d, ideal)? == Primitivity::Primitive {
                candidates += 1;
                d_p = d;
            }
        }
        let nu_primitive = if d_p > 0 {
            PreparedElement::new(&beta.pow_minus_one(n / d_p)).valuation(ideal)?
        } else {
            0
        };
        report.rows.push(
            Row::exact("dp.unique", Relation::Eq, true, int(candidates as i64), int(1), candidates == 1)
                .with_note(format!("{q}: d_p = {d_p}")),
        );
        report.dp.entries.push(DpEntry {
            p: q.clone(),
            d_p,
            nu_primitive,
            nu_v_n: a.expect("beta not torsion"),
            candidates,
        });
    }

    // eq17 in summed form, as integers
    let phis: Vec<PreparedElement> = (1..=7).map(|m| PreparedElement::new(&eval_cyclotomic(m, &beta))).collect();
    let mut lhs17 = BigInt::one();
    let mut prim17 = BigInt::one();
    let mut low17 = BigInt::one();
    let mut lhs20 = BigInt::one();
    for (e, (q, ideal, _)) in report.dp.entries.iter().zip(&a_vals) {
        lhs17 *= num_traits::pow(q.clone(), e.nu_v_n as usize);
        prim17 *= num_traits::pow(q.clone(), e.nu_primitive as usize);
        for ph in &phis {
            let v = ph.valuation(ideal)?;
            low17 *= num_traits::pow(q.clone(), v as usize);
        }
    }
    lhs20 *= &low17;
    let rest = report.unfactored.clone();
    if !rest.is_one() {
        for ph in &phis {
            lhs20 *= smooth_part(&coord_gcd(ph), &rest);
        }
    }
    let rhs17 = &prim17 * &l18 * &low17;
    report.rows.push(Row::exact("eq17", Relation::Le, true, ln(&lhs17), ln(&rhs17), lhs17 <= rhs17));

    let lhs20c = lhs20.clone();
    report.rows.push(Row::certified("eq20", Relation::Le, true, |p| {
        let h = mahler_height(gamma, p).ok()?;
        Some((
            RealApprox::ln_int(&lhs20c, p)?,
            RealApprox::ln2(p).mul_int(&BigInt::from(7)) + h.mul_int(&BigInt::from(56)),
        ))
    }));
    for m in 1..=7 {
        report.rows.push(eq19_row(gamma, m, fz)?);
    }

    if n >= 2 {
        let big = |d: u64| {
            decide(|p| {
                Some(RealApprox::from_i64(d as i64, p) - RealApprox::ln_int(&BigInt::from(n), p)?.mul_int(&BigInt::from(tau)))
            }) == Decision::True
        };
        let mut lhs = BigInt::one();
        for e in &report.dp.entries {
            if big(e.d_p) {
                lhs *= num_traits::pow(e.p.clone(), e.nu_primitive as usize);
            } else {
                report.small_dp.push(e.p.clone());
            }
        }
        if !rest.is_one() {
            lhs *= smooth_part(&coord_gcd(&PreparedElement::new(&beta_n)), &rest);
        }
        let big_divs: Vec<u64> = div.iter().copied().filter(|&d| big(d)).collect();
        let nn = BigInt::from(n);
        let t = BigInt::from(tau);
        let lhs_c = lhs.clone();
        report.rows.push(Row::certified("dp.big.sum", Relation::Le, true, |p| {
            let h = mahler_height(gamma, p).ok()?;
            let inv = big_divs
                .iter()
                .fold(RealApprox::zero_with(p), |acc, &d| acc + RealApprox::frac(1, d as i64, p));
            Some((
                RealApprox::ln_int(&lhs_c, p)?,
                (h * inv).mul_int(&(&nn * 2)) + RealApprox::ln2(p).mul_int(&t),
            ))
        }));
        report.rows.push(Row::certified("dp.big", Relation::Le, true, |p| {
            let h = mahler_height(gamma, p).ok()?;
            let l = RealApprox::ln_int(&nn, p)?;
            Some((
                RealApprox::ln_int(&lhs, p)?,
                h.mul_int(&(&nn * 2)).checked_div(&l)? + RealApprox::ln2(p).mul_int(&t),
            ))
        }));
    } else {
        report.rows.push(Row::vacuous("dp.big", Relation::Le, "n = 1: log n = 0"));
    }

    let count = small_divisors as i64;
    let smalldupb = if n >= 16 {
        Row::certified("smalldupb", Relation::Le, false, |p| {
            let l = RealApprox::ln_int(&BigInt::from(n), p)?;
            let ll = l.ln()?;
            let lll = ll.ln()?;
            let e = (l * lll).mul_int(&BigInt::from(70)).checked_div(&(&ll * &ll))?;
            Some((RealApprox::from_i64(count, p), e.exp()))
        })
    } else {
        Row::vacuous("smalldupb", Relation::Le, "log log log n <= 0")
    };
    report.rows.push(smalldupb);
    Ok(report)
}
