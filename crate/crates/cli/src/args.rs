use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadlucas::arith::FactorBudget;

#[derive(Parser, Debug)]
#[command(name = "quadlucas", version, about = "Primitive divisors of gamma^n - 1 over quadratic fields")]
pub struct Cli {
    /// Factorization cache file (also read from QUADLUCAS_CACHE).
    #[arg(long, global = true, env = "QUADLUCAS_CACHE")]
    pub cache: Option<PathBuf>,

    /// Wall-clock budget per factorization, in milliseconds.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget_ms: Option<u64>,

    /// Pollard rho iterations per factorization.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub rho_iterations: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads (default: one per core).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Md,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Norms, factorizations and prime-ideal valuations of gamma^n - 1.
    FactorSeq(SeqArgs),
    /// Build and check the full ledger for each n.
    Verify(VerifyArgs),
    /// P(n) against n exp(0.0001 log n / log log n).
    BoundTable(SeqArgs),
    /// Primitive prime ideals of Phi_n(gamma) with their residue orders.
    PrimitiveDivisors(PrimitiveArgs),
    /// Inspect the factorization cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum CacheAction {
    Stats,
}

#[derive(Args, Debug)]
pub struct SeqArgs {
    /// `x+y*sqrt(m)` or `(a,b,c)+` / `(a,b,c)-`.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: String,
    /// Inclusive range `A..B`, or a single `n`.
    #[arg(long, value_parser = parse_range)]
    pub n: NRange,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub seq: SeqArgs,
    /// Cross-check primitivity against the definition.
    #[arg(long)]
    pub oracle: bool,
    /// Force the named row to fail (for exercising exit codes).
    #[arg(long, hide = true)]
    pub inject_failure: Option<String>,
}

#[derive(Args, Debug)]
pub struct PrimitiveArgs {
    #[command(flatten)]
    pub seq: SeqArgs,
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NRange {
    pub start: u64,
    pub end: u64,
}

impl NRange {
    pub fn iter(&self) -> std::ops::RangeInclusive<u64> {
        self.start..=self.end
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

pub fn parse_range(s: &str) -> Result<NRange, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad bound {t:?}: {e}"));
    let (start, end) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let n = num(s)?;
            (n, n)
        }
    };
    if start == 0 {
        return Err("n starts at 1".into());
    }
    Ok(NRange { start, end })
}

impl Cli {
    pub fn budget(&self) -> FactorBudget {
        let mut b = FactorBudget::default();
        if let Some(ms) = self.budget_ms {
            b = b.with_time(Some(Duration::from_millis(ms)));
        }
        if let Some(r) = self.rho_iterations {
            b.rho_iterations = r;
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..100"), Ok(NRange { start: 3, end: 100 }));
        assert_eq!(parse_range("3..=7"), Ok(NRange { start: 3, end: 7 }));
        assert_eq!(parse_range("11"), Ok(NRange { start: 11, end: 11 }));
        assert!(parse_range("5..4").unwrap().is_empty());
        assert!(parse_range("0..4").is_err());
        assert!(parse_range("a..4").is_err());
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["quadlucas", "verify", "--gamma", "(1,-1,-1)+", "--n", "1..5", "--oracle", "--format", "json"]).unwrap();
        assert_eq!(cli.format, Format::Json);
        match cli.command {
            Command::Verify(v) => {
                assert!(v.oracle);
                assert_eq!(v.seq.gamma, "(1,-1,-1)+");
            }
            _ => panic!(),
        }
        assert!(Cli::try_parse_from(["quadlucas", "verify", "--gamma", "2", "--n", "1", "--budget-ms", "0"]).is_err());
    }
}
