use serde_json::json;

use symsing::error::{Error, Result};
use symsing::experiments::{
    run_error_bound_table, run_exact_p, run_expected_kernel_exact, run_expected_kernel_mc, run_markov_report, run_mc_p,
    run_verify_lemma, run_verify_lemma_exhaustive, run_verify_props,
};
use symsing::modulus::{next_valid_modulus_with, LogBase, Modulus};
use symsing::structure::default_tau;

use crate::output::Report;
use crate::{Cli, Command, LogBaseArg, Mode};

const DEFAULT_GRID: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];

impl Cli {
    fn base(&self) -> LogBase {
        match self.log_base {
            LogBaseArg::Natural => LogBase::Natural,
            LogBaseArg::Two => LogBase::Two,
        }
    }

    fn single_n(&self) -> Result<usize> {
        match self.n.as_slice() {
            [n] => usize::try_from(*n).map_err(|_| Error::InvalidParameter(format!("n = {n} is too large"))),
            [] => Err(Error::InvalidParameter("--n is required".into())),
            _ => Err(Error::InvalidParameter(
                "--n takes a single value for this subcommand".into(),
            )),
        }
    }

    fn modulus(&self, n: usize) -> Result<Modulus> {
        match self.q {
            Some(q) => Modulus::new(q),
            None => Ok(next_valid_modulus_with(n as u64, self.c, self.base())),
        }
    }

    fn tau(&self, n: usize) -> Result<f64> {
        let tau = self.tau.unwrap_or_else(|| default_tau(n, self.base()));
        if tau > 0.0 {
            Ok(tau)
        } else {
            Err(Error::InvalidParameter(format!("--tau must be positive, got {tau}")))
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "--c must be a finite nonnegative real, got {}",
                self.c
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("--samples must be at least 1".into()));
        }
        Ok(())
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::ExactP => "exact-p",
        Command::McP => "mc-p",
        Command::Ek => "ek",
        Command::Markov => "markov",
        Command::VerifyLemma => "verify-lemma",
        Command::VerifyProps => "verify-props",
        Command::ErrorBound => "error-bound",
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    cli.check()?;
    // the echo omits --threads and --out so the output never depends on them
    let mut config = json!({
        "subcommand": command_name(cli.command),
        "c": cli.c,
        "log_base": cli.log_base,
        "seed": cli.seed,
        "format": cli.format,
    });
    let mut report = Report::default();
    let cfg = config.as_object_mut().expect("object");

    match cli.command {
        Command::ExactP => {
            let n = cli.single_n()?;
            let q = cli.modulus(n)?;
            cfg.insert("n".into(), json!(n));
            cfg.insert("q".into(), json!(q));
            let r = run_exact_p(n, q)?;
            if r.p_rational.numerator > r.p_mod_q.numerator {
                report.push_violation(&json!({"kind": "rational-exceeds-modular", "n": n, "q": q}));
            }
            report.push_result(&r);
        }
        Command::McP => {
            let n = cli.single_n()?;
            let q = cli.modulus(n)?;
            cfg.insert("n".into(), json!(n));
            cfg.insert("q".into(), json!(q));
            cfg.insert("samples".into(), json!(cli.samples));
            let stats = run_mc_p(n, q, cli.samples, cli.seed)?;
            if !stats.markov_consistent {
                report.push_violation(&json!({"kind": "markov-inconsistent", "n": n, "q": q}));
            }
            report.push_result(&stats);
        }
        Command::Ek => {
            let n = cli.single_n()?;
            let q = cli.modulus(n)?;
            cfg.insert("n".into(), json!(n));
            cfg.insert("q".into(), json!(q));
            cfg.insert("mode".into(), json!(cli.mode));
            let r = match cli.mode {
                Mode::Exact => run_expected_kernel_exact(n, q)?,
                Mode::Mc => {
                    cfg.insert("samples".into(), json!(cli.samples));
                    run_expected_kernel_mc(n, q, cli.samples, cli.seed)?
                }
            };
            if r.double_count_agrees == Some(false) {
                report.push_violation(&json!({
                    "kind": "double-count-mismatch",
                    "matrixwise": r.stats.e_k_exact,
                    "vectorwise": r.vectorwise,
                }));
            }
            report.push_result(&r);
        }
        Command::Markov => {
            let n = cli.single_n()?;
            let q = cli.q.map(Modulus::new).transpose()?;
            cfg.insert("n".into(), json!(n));
            cfg.insert("samples".into(), json!(cli.samples));
            let r = run_markov_report(n, cli.c, q, cli.base(), cli.samples, cli.seed)?;
            cfg.insert("q".into(), json!(r.q));
            if !r.stats.markov_consistent {
                report.push_violation(&json!({"kind": "markov-inconsistent", "n": n, "q": r.q}));
            }
            report.push_result(&r);
        }
        Command::VerifyLemma => {
            let n = cli.single_n()?;
            let q = cli.modulus(n)?;
            let tau = cli.tau(n)?;
            cfg.insert("n".into(), json!(n));
            cfg.insert("q".into(), json!(q));
            cfg.insert("tau".into(), json!(tau));
            cfg.insert("exhaustive".into(), json!(cli.exhaustive));
            let r = if cli.exhaustive {
                run_verify_lemma_exhaustive(n, q, tau)?
            } else {
                cfg.insert("trials".into(), json!(cli.trials));
                run_verify_lemma(n, q, cli.trials, tau, cli.seed)?
            };
            for t in &r.trials {
                report.push_result(t);
                if !t.fourier_agrees || !t.deviation_bounded {
                    report.push_violation(t);
                }
            }
            report.summary = Some(json!({
                "trials": r.trials.len(),
                "max_relative_deviation": r.max_relative_deviation,
                "violations": r.violations,
            }));
        }
        Command::VerifyProps => {
            let n = cli.single_n()?;
            let q = cli.modulus(n)?;
            let tau = cli.tau(n)?;
            cfg.insert("n".into(), json!(n));
            cfg.insert("q".into(), json!(q));
            cfg.insert("tau".into(), json!(tau));
            cfg.insert("trials".into(), json!(cli.trials));
            let r = run_verify_props(n, q, cli.trials, tau, cli.seed)?;
            for v in &r.violations {
                report.push_violation(v);
            }
            let mut row = serde_json::to_value(&r).expect("report serializes");
            row.as_object_mut().expect("object").remove("violations");
            report.results.push(row);
        }
        Command::ErrorBound => {
            let grid = if cli.n.is_empty() {
                DEFAULT_GRID.to_vec()
            } else {
                cli.n.clone()
            };
            let q = cli.q.map(Modulus::new).transpose()?;
            cfg.insert("n".into(), json!(grid));
            if let Some(q) = q {
                cfg.insert("q".into(), json!(q));
            }
            if let Some(tau) = cli.tau {
                cfg.insert("tau".into(), json!(tau));
            }
            let table = run_error_bound_table(&grid, cli.c, q, cli.tau, cli.base())?;
            for row in &table.rows {
                report.push_result(row);
            }
            for w in table.rows.windows(2) {
                if w[1].log_total >= w[0].log_total {
                    report.push_violation(&json!({
                        "kind": "not-strictly-decreasing",
                        "n_prev": w[0].n,
                        "log_total_prev": w[0].log_total,
                        "n": w[1].n,
                        "log_total": w[1].log_total,
                    }));
                }
            }
            report.summary = Some(json!({"strictly_decreasing": table.strictly_decreasing}));
        }
    }
    report.config = config;
    Ok(report)
}
