//! `symsing`: command-line driver for the singularity experiments.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use output::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Exact p(n) and p'(n) by enumeration (n ≤ 7).
    ExactP,
    /// Monte-Carlo estimate of p'(n) and the nullity distribution.
    McP,
    /// Expected kernel size E[K], exact or Monte-Carlo.
    Ek,
    /// Choose q from (n, C), estimate E[K] and compare p'(n) with E[K]/q.
    Markov,
    /// Compare enumeration, Fourier inversion and the error term on random (a, v).
    VerifyLemma,
    /// Randomized campaign over the pair-count propositions.
    VerifyProps,
    /// Log-space table of the analytic error bound over a grid of n.
    ErrorBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
pub enum LogBaseArg {
    #[value(name = "e")]
    #[serde(rename = "e")]
    Natural,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

#[derive(Debug, Parser)]
#[command(
    name = "symsing",
    version,
    about = "Singularity experiments for random symmetric ±1 matrices"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    /// Dimension; a comma-separated grid for error-bound.
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<u64>,

    /// Prime modulus; overrides the one derived from (n, C).
    #[arg(long)]
    pub q: Option<u64>,

    /// Exponent C in q ≈ √n / logᶜ n.
    #[arg(long = "c", default_value_t = 2.0)]
    pub c: f64,

    /// Level-set threshold τ; defaults to n / log² n.
    #[arg(long)]
    pub tau: Option<f64>,

    /// Logarithm used in thresholds and modulus selection.
    #[arg(long, value_enum, default_value = "e")]
    pub log_base: LogBaseArg,

    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,

    #[arg(long, default_value_t = 1_000)]
    pub trials: u64,

    /// Decimal or 0x-prefixed hex.
    #[arg(long, env = "SYMSING_SEED", default_value = "0xFE12", value_parser = parse_seed)]
    pub seed: u64,

    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,

    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,

    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// ek: exact enumeration or Monte-Carlo.
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,

    /// verify-lemma: sweep every (a, v) with a outside the structured family.
    #[arg(long)]
    pub exhaustive: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("symsing: cannot size thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("symsing: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            report.write(cli.format, &mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            report.write(cli.format, &mut lock)
        }
    };
    if let Err(e) = written {
        eprintln!("symsing: cannot write output: {e}");
        return ExitCode::from(2);
    }
    if let Some(summary) = &report.summary {
        eprintln!("{summary}");
    }
    if report.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("symsing: {} violation(s) found", report.violations.len());
        ExitCode::from(1)
    }
}
