//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p quadlucas-cli --test acceptance -- --nocapture`
//! (the harness is plain `main`, so output always shows).

#[path = "../../core/tests/support/corpus.rs"]
mod corpus;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use quadlucas::arith::{
    check_af_bounds, divisors, factor, phi_sample_set, primes_up_to, sweep_af_bounds, valuation_int, FactorBudget,
    Factorizer,
};
use quadlucas::cyclotomic::{check_prop21_item1, check_prop21_item2, cyclotomic, eval_cyclotomic};
use quadlucas::field::parse_element;
use quadlucas::height::{height, height_report};
use quadlucas::ideals::{classify_primitivity, norm_balance, primitivity_from_order, split_prime, PreparedElement, Primitivity};
use quadlucas::ledger::{Row, Verdict};
use quadlucas::real::Decision;
use quadlucas::verifier::{check_eq18, check_eq19, Verifier};
use quadlucas::FieldElement;
use rayon::prelude::*;

type Outcome = Result<String, String>;

const PREC: u32 = 160;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn c1_cyclotomic_identity() -> Outcome {
    let start = Instant::now();
    for n in 1..=500u64 {
        let mut prod = vec![BigInt::one()];
        for d in divisors(n) {
            prod = poly_mul(&prod, &cyclotomic(d).coefficients);
        }
        let mut want = vec![BigInt::zero(); n as usize + 1];
        want[0] = -BigInt::one();
        want[n as usize] = BigInt::one();
        ensure(prod == want, || format!("identity fails at n = {n}"))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("n <= 500 in {:.2}s", t.as_secs_f64()))
}

fn c2_heights() -> Outcome {
    let corpus = corpus::corpus();
    let fields: BTreeSet<String> = corpus.iter().map(|g| g.field().m().to_string()).collect();
    ensure(corpus.len() >= 12 && fields.len() >= 4, || "corpus too small".into())?;
    ensure(corpus.iter().any(|g| g.field().is_imaginary()), || "no imaginary member".into())?;
    ensure(corpus.iter().any(|g| !g.is_integral()), || "no non-integral member".into())?;
    ensure(corpus.iter().any(|g| g.degree() == 1), || "no rational member".into())?;
    let mut worst = 0f64;
    for g in &corpus {
        let r = height_report(g, PREC).map_err(|e| format!("{g}: {e}"))?;
        ensure(r.consistent(), || format!("{g}: routes disagree"))?;
        worst = worst.max(r.max_width());
        let h = height(g, PREC).map_err(|e| e.to_string())?;
        for n in 1..=20u64 {
            let hn = height(&g.pow(n), PREC).map_err(|e| e.to_string())?;
            ensure(hn.overlaps(&h.mul_int(&BigInt::from(n))), || format!("h({g}^{n}) != {n} h({g})"))?;
        }
    }
    ensure(worst < 1e-9, || format!("width {worst:e}"))?;
    Ok(format!("{} elements, {} fields, max width {worst:.1e}", corpus.len(), fields.len()))
}

fn c3_norm_balance() -> Outcome {
    let primes = primes_up_to(10_000);
    let mut checks = 0usize;
    for g in corpus::corpus() {
        let pg = PreparedElement::new(&g);
        for &p in &primes {
            let (lhs, rhs) = norm_balance(&pg, &BigInt::from(p)).map_err(|e| e.to_string())?;
            ensure(lhs == rhs, || format!("{g} at {p}: {lhs} != {rhs}"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} (gamma, p) pairs exact"))
}

/// Per `(gamma, ideal)`: the order-based verdicts and the literal scan over `n <= 200`.
struct GridStats {
    pairs: usize,
    disagreements: Vec<String>,
    prop22_1: usize,
    prop22_2: usize,
    prop22_failures: Vec<String>,
}

fn grid() -> GridStats {
    const N: u64 = 200;
    let primes = primes_up_to(10_000);
    let mut stats = GridStats {
        pairs: 0,
        disagreements: Vec::new(),
        prop22_1: 0,
        prop22_2: 0,
        prop22_failures: Vec::new(),
    };
    for g in corpus::corpus() {
        let pg = PreparedElement::new(&g);
        let one = FieldElement::one(g.field());
        let mut pow = one.clone();
        let mut u = Vec::new();
        for _ in 0..N {
            pow = &pow * &g;
            u.push(PreparedElement::new(&(&pow - &one)));
        }
        let phi: Vec<PreparedElement> = (1..=N).map(|n| PreparedElement::new(&eval_cyclotomic(n, &g))).collect();
        let ideals: Vec<_> = primes.iter().flat_map(|&p| split_prime(g.field(), &BigInt::from(p))).collect();
        let results: Vec<(usize, Vec<String>, usize, usize, Vec<String>)> = ideals
            .par_iter()
            .filter(|i| pg.valuation(i).map(|v| v == 0).unwrap_or(false))
            .map(|ideal| {
                let order = classify_primitivity(&pg, 1, ideal).expect("unit at ideal").order;
                let divides: Vec<bool> = u.iter().map(|x| x.valuation(ideal).unwrap() >= 1).collect();
                let (mut dis, mut fails) = (Vec::new(), Vec::new());
                let (mut c1, mut c2) = (0, 0);
                for n in 1..=N {
                    let k = n as usize - 1;
                    let literal = if !divides[k] {
                        Primitivity::NotADivisor
                    } else if divides[..k].iter().any(|&b| b) {
                        Primitivity::NonPrimitive
                    } else {
                        Primitivity::Primitive
                    };
                    let by_order = primitivity_from_order(&order, n);
                    if literal != by_order {
                        dis.push(format!("{g} {} n={n}: {literal} vs {by_order}", ideal.name()));
                    }
                    match literal {
                        Primitivity::Primitive => {
                            c1 += 1;
                            let v = phi[k].valuation(ideal).unwrap();
                            let congruent = ideal.norm().mod_floor(&BigInt::from(n)) == BigInt::from(n > 1);
                            if v < 1 || !congruent {
                                fails.push(format!("item 1: {g} {} n={n} v={v}", ideal.name()));
                            }
                        }
                        Primitivity::NonPrimitive if n >= 8 => {
                            c2 += 1;
                            let v = phi[k].valuation(ideal).unwrap();
                            let bound = ideal.ramification() as i64 * valuation_int(&BigInt::from(n), ideal.p()) as i64;
                            if v > bound {
                                fails.push(format!("item 2: {g} {} n={n} v={v} > {bound}", ideal.name()));
                            }
                        }
                        _ => {}
                    }
                }
                (1, dis, c1, c2, fails)
            })
            .collect();
        for (pairs, dis, c1, c2, fails) in results {
            stats.pairs += pairs;
            stats.disagreements.extend(dis);
            stats.prop22_1 += c1;
            stats.prop22_2 += c2;
            stats.prop22_failures.extend(fails);
        }
    }
    stats
}

fn c4_primitivity(g: &GridStats) -> Outcome {
    ensure(g.disagreements.is_empty(), || format!("{} disagreements, first: {}", g.disagreements.len(), g.disagreements[0]))?;
    Ok(format!("{} (gamma, ideal) pairs x n <= 200, zero disagreements", g.pairs))
}

fn c5_prop22(g: &GridStats) -> Outcome {
    ensure(g.prop22_failures.is_empty(), || format!("{} failures, first: {}", g.prop22_failures.len(), g.prop22_failures[0]))?;
    Ok(format!("item 1 on {} primitive cases, item 2 on {} non-primitive cases", g.prop22_1, g.prop22_2))
}

fn c6_prop21() -> Outcome {
    let corpus = corpus::corpus();
    let rows: Vec<Result<(Row, Row), String>> = corpus
        .par_iter()
        .flat_map(|g| (1..=300u64).into_par_iter().map(move |n| (g, n)))
        .map(|(g, n)| {
            let a = check_prop21_item1(g, n).map_err(|e| e.to_string())?;
            let b = check_prop21_item2(g, n).map_err(|e| e.to_string())?;
            Ok((a, b))
        })
        .collect();
    let mut count = 0;
    for r in rows {
        let (a, b) = r?;
        ensure(a.holds(), || format!("item 1: {a}"))?;
        ensure(b.holds(), || format!("item 2: {b}"))?;
        count += 1;
    }
    Ok(format!("{count} (gamma, n) pairs, both items"))
}

fn is(row: &Row, ids: &[&str]) -> bool {
    ids.iter().any(|id| row.id == *id || row.id.starts_with(&format!("{id}.")))
}

fn c7_ledger() -> Outcome {
    let budget = FactorBudget::default().with_time(Some(Duration::from_millis(300)));
    let v = Verifier::new(Factorizer::new(budget)).with_beta(true);
    let corpus = corpus::corpus();
    let tol = 1e-9;
    let mut counts = [0usize; 5];
    let mut incomplete = 0;
    let ledgers: Vec<_> = corpus
        .par_iter()
        .flat_map(|g| (1..=120u64).into_par_iter().map(move |n| (g, n)))
        .map(|(g, n)| (g, n, v.build_ledger(g, n)))
        .collect();
    for (g, n, l) in ledgers {
        let l = l.map_err(|e| format!("{g} n={n}: {e}"))?;
        if !l.finite.complete {
            incomplete += 1;
        }
        if let Some(r) = l.failures().next() {
            return Err(format!("{g} n={n}: {r}"));
        }
        for r in &l.rows {
            let holds = r.verdict == Verdict::Holds;
            if r.id == "eq6" {
                ensure(holds && r.margin.width().to_f64() < tol, || format!("{g} n={n}: {r}"))?;
                counts[0] += 1;
            } else if r.id == "eq8" && n >= 8 {
                ensure(holds && r.asserted, || format!("{g} n={n}: {r}"))?;
                counts[1] += 1;
            } else if is(r, &["beta.chain"]) {
                ensure(holds, || format!("{g} n={n}: {r}"))?;
                counts[2] += 1;
            } else if r.id == "dp.unique" {
                ensure(holds, || format!("{g} n={n}: {r}"))?;
                counts[3] += 1;
            } else if ["eq18", "eq19", "eq20"].contains(&r.id.as_str()) {
                ensure(holds || r.verdict == Verdict::Vacuous, || format!("{g} n={n}: {r}"))?;
                counts[4] += 1;
            }
        }
    }
    for n in 1..=10_000u64 {
        let (l, r, ok) = check_eq18(n);
        ensure(ok && l <= r, || format!("eq18 at n={n}"))?;
    }
    for g in corpus::quadratic() {
        for m in 1..=50u64 {
            let r = check_eq19(&g, m).map_err(|e| e.to_string())?;
            ensure(r.holds() || r.verdict == Verdict::Vacuous, || format!("{g}: {r}"))?;
        }
    }
    ensure(counts.iter().all(|&c| c > 0), || format!("empty row class {counts:?}"))?;
    Ok(format!(
        "eq6 {} / eq8 {} / chain {} / dp.unique {} / eq18-20 {} rows; eq18 n <= 10^4; eq19 m <= 50; {incomplete} partial factorizations",
        counts[0], counts[1], counts[2], counts[3], counts[4]
    ))
}

fn c8_arith_bounds() -> Outcome {
    let start = Instant::now();
    let s = sweep_af_bounds(1_000_000);
    let t = start.elapsed();
    ensure(s.omega_failures.is_empty() && s.tau_failures.is_empty() && s.undecided.is_empty(), || {
        format!("omega {:?} tau {:?} undecided {:?}", s.omega_failures, s.tau_failures, s.undecided)
    })?;
    ensure(s.checked == 1_000_000 - 2, || format!("checked {}", s.checked))?;
    ensure(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    let sample = phi_sample_set();
    for f in &sample {
        let r = check_af_bounds(f);
        let phi = r.phi.ok_or_else(|| format!("{} below threshold", f.value()))?;
        ensure(phi.verdict == Decision::True, || format!("phi bound at {}", f.value()))?;
    }
    Ok(format!("3 <= n <= 10^6 in {:.1}s; phi on {} samples >= 10^20", t.as_secs_f64(), sample.len()))
}

fn lucas(n: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::from(2), BigInt::one());
    for _ in 0..n {
        let c = &a + &b;
        a = b;
        b = c;
    }
    a
}

fn c9_spot_values() -> Outcome {
    let v = Verifier::default();
    let silver = parse_element("1+1*sqrt(2)").unwrap();
    for (n, want) in [(3u64, 7u32), (5, 41)] {
        let p = v.compute_p(&silver, n).map_err(|e| e.to_string())?;
        ensure(p.exact && p.value == BigInt::from(want), || format!("P(1+sqrt2, {n}) = {}", p.value))?;
    }
    let golden = parse_element("(1,-1,-1)+").unwrap();
    for n in 1..=30usize {
        let norm = golden.pow_minus_one(n as u64).norm();
        let sign = if n % 2 == 0 { 1 } else { -1 };
        let want = BigInt::from(sign) - lucas(n) + 1;
        ensure(norm.is_integer() && norm.to_integer() == want, || format!("N(phi^{n} - 1) = {norm}, want {want}"))?;
    }
    let f = factor(&BigInt::from(2047)).map_err(|e| e.to_string())?;
    ensure(f.largest_prime().map(|p| p.to_string()) == Some("89".into()), || format!("2047 = {f}"))?;
    let p = v.compute_p(&parse_element("2").unwrap(), 11).map_err(|e| e.to_string())?;
    ensure(p.value == BigInt::from(89), || format!("P(Phi_11(2)) = {}", p.value))?;
    Ok("P(1+sqrt2,3)=7, P(1+sqrt2,5)=41, golden norms n <= 30, P(2047)=89".into())
}

fn c10_end_to_end() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_quadlucas");
    let start = Instant::now();
    let out = Command::new(bin)
        .args(["verify", "--gamma", "1+1*sqrt(2)", "--n", "3..100"])
        .output()
        .map_err(|e| e.to_string())?;
    let t = start.elapsed();
    ensure(out.status.code() == Some(0), || format!("verify exited {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr)))?;
    ensure(t < Duration::from_secs(300), || format!("verify took {t:?}"))?;
    let out = Command::new(bin)
        .args(["bound-table", "--gamma", "1+1*sqrt(2)", "--n", "3..100"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || format!("bound-table exited {:?}", out.status))?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let exact = header.iter().position(|h| *h == "exact").ok_or("no exact column")?;
    let rows: Vec<&str> = lines.collect();
    ensure(rows.len() == 98, || format!("{} rows", rows.len()))?;
    ensure(rows.iter().all(|r| r.split(',').nth(exact) == Some("true")), || "budget-flagged row".into())?;
    Ok(format!("verify exit 0 in {:.1}s; bound-table 98 unflagged rows", t.as_secs_f64()))
}

fn run(id: u32, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let r = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    match &r {
        Ok(d) => println!("criterion {id:>2} {name}: PASS ({d}; {secs:.1}s)"),
        Err(e) => println!("criterion {id:>2} {name}: FAIL ({e}; {secs:.1}s)"),
    }
    r.is_ok()
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut ok = true;
    ok &= run(1, "cyclotomic identity", c1_cyclotomic_identity);
    ok &= run(2, "height consistency", c2_heights);
    ok &= run(3, "norm-valuation balance", c3_norm_balance);
    let start = Instant::now();
    let grid = panic::catch_unwind(grid);
    println!("primitivity grid built in {:.1}s", start.elapsed().as_secs_f64());
    match &grid {
        Ok(g) => {
            ok &= run(4, "primitivity oracle", || c4_primitivity(g));
            ok &= run(5, "primitive divisor valuations", || c5_prop22(g));
        }
        Err(_) => {
            ok &= run(4, "primitivity oracle", || Err("grid panicked".into()));
            ok &= run(5, "primitive divisor valuations", || Err("grid panicked".into()));
        }
    }
    ok &= run(6, "cyclotomic height bounds", c6_prop21);
    ok &= run(7, "ledger", c7_ledger);
    ok &= run(8, "arithmetic-function bounds", c8_arith_bounds);
    ok &= run(9, "spot values", c9_spot_values);
    ok &= run(10, "end to end", c10_end_to_end);
    if !ok {
        std::process::exit(1);
    }
}
