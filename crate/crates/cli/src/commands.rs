use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use quadlucas::arith::{ArithError, FactorCache, Factorizer};
use quadlucas::field::{parse_element, FieldElement};
use quadlucas::ideals::{classify_primitivity, finite_places_with, DefinitionalScan, PreparedElement, Primitivity};
use quadlucas::ledger::{Row, Verdict};
use quadlucas::verifier::{LedgerRecord, ProofLedger, Verifier, VerifyError};
use rayon::prelude::*;
use thiserror::Error;

use crate::args::{CacheAction, Cli, Command, Format, NRange, PrimitiveArgs, SeqArgs, VerifyArgs};
use crate::emit::{Cell, TableWriter};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0} is zero or a root of unity")]
    Torsion(String),
    #[error("factorization budget exhausted: {0}")]
    Budget(String),
    #[error("internal invariant breached: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Torsion(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Torsion(s) => CliError::Torsion(s),
            VerifyError::Cyclotomic(c) => CliError::Torsion(c.to_string()),
            VerifyError::DegreeMismatch(_) | VerifyError::Domain(_) => CliError::Usage(e.to_string()),
            VerifyError::Budget(s) => CliError::Budget(s),
            VerifyError::Ideal(_) | VerifyError::Invariant(_) => CliError::Invariant(e.to_string()),
        }
    }
}

/// How a completed run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Output written, but some factorizations were partial.
    Incomplete,
    /// An asserted row did not hold.
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Incomplete => 3,
            Outcome::Failed => 4,
        }
    }

    fn worst(self, other: Outcome) -> Outcome {
        use Outcome::*;
        match (self, other) {
            (Failed, _) | (_, Failed) => Failed,
            (Incomplete, _) | (_, Incomplete) => Incomplete,
            _ => Ok,
        }
    }
}

/// Everything a command needs, resolved from flags and environment.
pub struct RunConfig {
    pub format: Format,
    pub factorizer: Factorizer,
    pub cache_path: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub jobs: usize,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let mut factorizer = Factorizer::new(cli.budget());
        if let Some(path) = &cli.cache {
            let cache = FactorCache::open(path).map_err(|e| CliError::Usage(format!("cache {}: {e}", path.display())))?;
            factorizer = factorizer.with_cache(Arc::new(cache));
        }
        Ok(RunConfig {
            format: cli.format,
            factorizer,
            cache_path: cli.cache.clone(),
            output: cli.output.clone(),
            jobs: cli.jobs.map_or_else(rayon::current_num_threads, |j| j as usize),
        })
    }

    fn sink(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.output {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn verifier(&self) -> Verifier {
        Verifier::new(self.factorizer.clone())
    }
}

fn gamma_of(args: &SeqArgs) -> Result<FieldElement, CliError> {
    let g = parse_element(&args.gamma).map_err(|e| CliError::Usage(format!("--gamma {:?}: {e}", args.gamma)))?;
    if g.is_zero() || g.is_root_of_unity() {
        return Err(CliError::Torsion(g.to_string()));
    }
    Ok(g)
}

/// `f` over `range` in parallel; `sink` sees results in order, one chunk at a time.
fn ordered<T, F, S>(range: NRange, jobs: usize, f: F, mut sink: S) -> Result<(), CliError>
where
    T: Send,
    F: Fn(u64) -> Result<T, CliError> + Sync,
    S: FnMut(T) -> Result<(), CliError>,
{
    if range.is_empty() {
        return Ok(());
    }
    let ns: Vec<u64> = range.iter().collect();
    for chunk in ns.chunks(2 * jobs.max(1)) {
        let out: Vec<Result<T, CliError>> = chunk.par_iter().map(|&n| f(n)).collect();
        for r in out {
            sink(r?)?;
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    match &cli.command {
        Command::FactorSeq(a) => factor_seq(&cfg, a),
        Command::Verify(a) => verify(&cfg, a),
        Command::BoundTable(a) => bound_table(&cfg, a),
        Command::PrimitiveDivisors(a) => primitive_divisors(&cfg, a),
        Command::Cache { action: CacheAction::Stats } => cache_stats(&cfg),
    }
}

fn factor_text(n: &BigInt, fz: &Factorizer) -> Result<(String, bool), CliError> {
    match fz.factor_partial(n) {
        Ok(f) => Ok((f.to_string(), f.is_complete())),
        Err(ArithError::BudgetExceeded(f)) => Ok((f.to_string(), false)),
        Err(ArithError::ZeroInput) => Err(CliError::Invariant("factoring zero".into())),
    }
}

pub fn factor_seq(cfg: &RunConfig, a: &SeqArgs) -> Result<Outcome, CliError> {
    let g = gamma_of(a)?;
    let gp = PreparedElement::new(&g);
    let fz = &cfg.factorizer;
    let header = vec!["n", "norm", "factorization", "valuations", "primitive", "complete"];
    let mut t = TableWriter::new(cfg.format, header, cfg.sink()?)?;
    let mut outcome = Outcome::Ok;
    ordered(
        a.n,
        cfg.jobs,
        |n| {
            let u = PreparedElement::new(&g.pow_minus_one(n));
            let norm = u.element().norm();
            let (mut fact, mut complete) = factor_text(norm.numer(), fz)?;
            if !norm.denom().is_one() {
                let (d, c) = factor_text(norm.denom(), fz)?;
                fact = format!("({fact}) / ({d})");
                complete &= c;
            }
            let places = finite_places_with(&u, fz).map_err(|e| CliError::Invariant(e.to_string()))?;
            complete &= places.complete;
            let mut vals = Vec::new();
            let mut prim = Vec::new();
            for (ideal, v) in &places.entries {
                vals.push(format!("{}^{v}", ideal.name()));
                if *v > 0 {
                    let c = classify_primitivity(&gp, n, ideal).map_err(|e| CliError::Invariant(e.to_string()))?;
                    if c.kind == Primitivity::Primitive {
                        prim.push(ideal.name());
                    }
                }
            }
            Ok(vec![
                Cell::from(n),
                Cell::from(norm.to_string()),
                Cell::from(fact),
                Cell::from(vals.join(" ")),
                Cell::from(prim.join(" ")),
                Cell::from(complete),
            ])
        },
        |cells| {
            if let Cell::Flag(false) = cells[5] {
                outcome = Outcome::Incomplete;
            }
            Ok(t.row(cells)?)
        },
    )?;
    t.finish()?;
    Ok(outcome)
}

fn ledger_complete(l: &ProofLedger) -> bool {
    l.finite.complete && l.p_u.exact && l.beta.as_ref().is_none_or(|b| b.complete())
}

fn inject(l: &mut ProofLedger, id: &str) {
    if let Some(r) = l.rows.iter_mut().find(|r| r.id == id) {
        r.verdict = Verdict::Fails;
        r.asserted = true;
    } else {
        let mut r = Row::vacuous(id, quadlucas::ledger::Relation::Le, "injected failure");
        r.verdict = Verdict::Fails;
        r.asserted = true;
        l.rows.push(r);
    }
}

pub fn verify(cfg: &RunConfig, a: &VerifyArgs) -> Result<Outcome, CliError> {
    let g = gamma_of(&a.seq)?;
    let v = cfg.verifier().with_oracle(a.oracle).with_beta(true);
    let mut out = cfg.sink()?;
    let header = vec!["gamma", "n", "id", "relation", "lhs", "rhs", "margin", "verdict", "asserted", "note"];
    let mut table = match cfg.format {
        Format::Json => None,
        f => Some(TableWriter::new(f, header, &mut out)?),
    };
    let mut records = Vec::new();
    let mut outcome = Outcome::Ok;
    let (mut ledgers, mut asserted, mut failures) = (0usize, 0usize, 0usize);
    let literal = g.to_literal();
    ordered(
        a.seq.n,
        cfg.jobs,
        |n| {
            let mut l = v.build_ledger(&g, n)?;
            if let Some(id) = &a.inject_failure {
                inject(&mut l, id);
            }
            Ok(l)
        },
        |l| {
            ledgers += 1;
            asserted += l.asserted_count();
            let f = l.failures().count();
            failures += f;
            for r in l.failures() {
                log::warn!("n={}: {r}", l.n);
            }
            if f > 0 {
                outcome = outcome.worst(Outcome::Failed);
            }
            if !ledger_complete(&l) {
                outcome = outcome.worst(Outcome::Incomplete);
            }
            match &mut table {
                Some(t) => {
                    for r in &l.rows {
                        t.row(vec![
                            Cell::from(literal.as_str()),
                            Cell::from(l.n),
                            Cell::from(r.id.as_str()),
                            Cell::from(r.relation.to_string()),
                            Cell::Num(r.lhs.mid()),
                            Cell::Num(r.rhs.mid()),
                            Cell::Num(r.margin.mid()),
                            Cell::from(r.verdict.to_string()),
                            Cell::from(r.asserted),
                            Cell::from(r.note.clone().unwrap_or_default()),
                        ])?;
                    }
                }
                None => records.push(LedgerRecord::of(&l)),
            }
            Ok(())
        },
    )?;
    if let Some(t) = table {
        t.finish()?;
    } else {
        let s = serde_json::to_string_pretty(&records).map_err(|e| CliError::Invariant(e.to_string()))?;
        writeln!(out, "{s}")?;
    }
    out.flush()?;
    eprintln!("verify {literal}: {ledgers} ledgers, {asserted} asserted rows, {failures} failures");
    Ok(outcome)
}

pub fn bound_table(cfg: &RunConfig, a: &SeqArgs) -> Result<Outcome, CliError> {
    let g = gamma_of(a)?;
    let v = cfg.verifier();
    let header = vec!["n", "P", "bound", "ratio", "f1", "f2", "exact"];
    let mut t = TableWriter::new(cfg.format, header, cfg.sink()?)?;
    let mut outcome = Outcome::Ok;
    ordered(
        a.n,
        cfg.jobs,
        |n| Ok(v.scan_row(&g, n)?),
        |r| {
            if !r.complete || !r.p_exact {
                outcome = outcome.worst(Outcome::Incomplete);
            }
            if r.failures > 0 {
                outcome = outcome.worst(Outcome::Failed);
            }
            Ok(t.row(vec![
                Cell::from(r.n),
                Cell::from(&r.p),
                Cell::from(r.bound),
                Cell::from(r.ratio),
                Cell::from(r.f1),
                Cell::from(r.f2),
                Cell::from(r.p_exact && r.complete),
            ])?)
        },
    )?;
    t.finish()?;
    Ok(outcome)
}

pub fn primitive_divisors(cfg: &RunConfig, a: &PrimitiveArgs) -> Result<Outcome, CliError> {
    let g = gamma_of(&a.seq)?;
    let v = cfg.verifier();
    let mut header = vec!["n", "ideal", "p", "f", "norm", "valuation", "order"];
    if a.oracle {
        header.push("definitional");
    }
    let mut t = TableWriter::new(cfg.format, header, cfg.sink()?)?;
    let mut outcome = Outcome::Ok;
    ordered(
        a.seq.n,
        cfg.jobs,
        |n| {
            let fa = v.finite_analysis(&g, n)?;
            let gp = PreparedElement::new(&g);
            let scan = a.oracle.then(|| DefinitionalScan::new(&g, n));
            let mut rows = Vec::new();
            for e in fa.entries.iter().filter(|e| e.primitive) {
                let order = match &e.order {
                    Some(o) => o.clone(),
                    None => gp.residue_order(&e.ideal).map_err(|x| CliError::Invariant(x.to_string()))?,
                };
                let mut cells = vec![
                    Cell::from(n),
                    Cell::from(e.ideal.name()),
                    Cell::from(e.ideal.p()),
                    Cell::from(e.ideal.residue_degree() as u64),
                    Cell::from(&e.ideal.norm()),
                    Cell::from(e.valuation.unsigned_abs()),
                    Cell::from(&BigInt::from(order)),
                ];
                if let Some(s) = &scan {
                    let kind = s.classify(n, &e.ideal).map_err(|x| CliError::Invariant(x.to_string()))?;
                    if kind != Primitivity::Primitive {
                        return Err(CliError::Invariant(format!("{} at n={n}: definitional scan says {kind}", e.ideal.name())));
                    }
                    cells.push(Cell::from(kind == Primitivity::Primitive));
                }
                rows.push(cells);
            }
            Ok((rows, fa.complete))
        },
        |(rows, complete)| {
            if !complete {
                outcome = outcome.worst(Outcome::Incomplete);
            }
            for r in rows {
                t.row(r)?;
            }
            Ok(())
        },
    )?;
    t.finish()?;
    Ok(outcome)
}

pub fn cache_stats(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Some(cache) = cfg.factorizer.cache() else {
        return Err(CliError::Usage("no cache configured (use --cache or QUADLUCAS_CACHE)".into()));
    };
    let s = cache.stats();
    let mut t = TableWriter::new(cfg.format, vec!["path", "entries", "rejected_lines", "largest_digits"], cfg.sink()?)?;
    t.row(vec![
        Cell::from(cfg.cache_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
        Cell::from(s.entries),
        Cell::from(s.rejected_lines),
        Cell::from(s.largest_digits),
    ])?;
    t.finish()?;
    Ok(Outcome::Ok)
}
