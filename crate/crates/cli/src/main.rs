//! `sephide`: verify, bound, optimize and simulate data-hiding ensembles.
//!
//! Exit status is 0 when every check passes, 1 when a check fails, 2 for
//! usage errors and 3 when a solver stops short of its tolerances.

mod commands;
mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sephide_core::bounds::DEFAULT_M_MAX;
use sephide_core::constructions::Construction;
use sephide_core::discrimination::SolveParams;

use commands::{CliError, CliResult, Source};
use report::{Format, Payload, Report};

#[derive(Parser, Debug)]
#[command(name = "sephide", version, about = "Data hiding with orthogonal separable states")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "table", global = true)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; falls back to $SEED, then 0.
    #[arg(long, env = "SEED", default_value_t = 0, global = true)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a construction: orthogonality, PT invariance, certificate and trace norms.
    Verify {
        #[command(flatten)]
        target: Target,
    },
    /// Concealment bound 1/2 + f^[m](Tr|H|) for L = 3^m copies.
    Bound {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = DEFAULT_M_MAX)]
        m_max: u32,
        #[command(flatten)]
        solver: DualFlags,
    },
    /// Dual and primal PPT optimization with the resulting sandwich.
    Ppt {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        solver: DualFlags,
        /// Outer iteration cap of the primal ascent.
        #[arg(long, default_value_t = SolveParams::primal().max_iters)]
        primal_iters: usize,
        /// Inner projection cap of the primal ascent.
        #[arg(long, default_value_t = SolveParams::primal().inner_iters)]
        inner_iters: usize,
    },
    /// Monte Carlo run of the hiding protocol with L = 3^m copies.
    Simulate {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// LOCC adversary measuring each copy locally.
        #[arg(long, value_enum, default_value = "none")]
        adversary: Adversary,
        #[command(flatten)]
        solver: DualFlags,
    },
    /// Write a construction as an ensemble document.
    Export {
        #[command(flatten)]
        target: Target,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Named {
    Example1,
    Exampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Adversary {
    None,
    /// Product computational-basis measurement with the optimal parity guess.
    Computational,
}

#[derive(Args, Debug)]
struct Target {
    /// A built-in construction.
    #[arg(value_enum, conflicts_with = "ensemble")]
    name: Option<Named>,
    /// Local dimension for `exampled` (odd, at least 3).
    #[arg(long)]
    d: Option<usize>,
    /// Ensemble document to load instead of a construction.
    #[arg(long)]
    ensemble: Option<PathBuf>,
}

impl Target {
    fn construction(&self) -> CliResult<Construction> {
        match (self.name, self.d) {
            (Some(Named::Example1), None) => Ok(Construction::Example1),
            (Some(Named::Example1), Some(_)) => Err(CliError::Usage("--d only applies to exampled".into())),
            (Some(Named::Exampled), Some(d)) => Ok(Construction::ExampleD(d)),
            (Some(Named::Exampled), None) => Err(CliError::Usage("exampled needs --d".into())),
            (None, _) => Err(CliError::Usage("expected example1 or exampled --d D".into())),
        }
    }

    fn source(self) -> CliResult<Source> {
        match self.ensemble {
            Some(path) if self.d.is_none() => Source::read(path),
            Some(_) => Err(CliError::Usage("--d only applies to exampled".into())),
            None => Ok(Source::Built(self.construction()?)),
        }
    }
}

#[derive(Args, Debug)]
struct DualFlags {
    /// Iteration cap of the dual splitting solver.
    #[arg(long, default_value_t = SolveParams::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = SolveParams::default().tol_residual)]
    tol_residual: f64,
    #[arg(long, default_value_t = SolveParams::default().tol_objective)]
    tol_objective: f64,
    /// Splitting step; defaults to 0.5/||Lambda||.
    #[arg(long)]
    step: Option<f64>,
}

impl DualFlags {
    fn params(&self, seed: u64) -> SolveParams {
        SolveParams {
            max_iters: self.max_iters,
            tol_residual: self.tol_residual,
            tol_objective: self.tol_objective,
            step: self.step,
            seed,
            ..SolveParams::default()
        }
    }
}

/// Rendered report and exit status.
type Output = (Vec<u8>, u8);

fn emit<T: Payload>(r: Report<T>, format: Format) -> CliResult<Output> {
    let bytes = r.render(format).map_err(|e| CliError::Usage(e.to_string()))?;
    if format != Format::Table {
        for m in &r.messages {
            log::warn!("{m}");
        }
    }
    Ok((bytes, r.status.exit_code()))
}

fn run(cli: Cli) -> CliResult<Output> {
    let (format, seed) = (cli.format, cli.seed);
    match cli.command {
        Command::Verify { target } => {
            if target.ensemble.is_some() {
                return Err(CliError::Usage("verify takes example1 or exampled --d D".into()));
            }
            emit(commands::verify(target.construction()?, seed)?, format)
        }
        Command::Bound { target, m_max, solver } => {
            emit(commands::bound(target.source()?, m_max, &solver.params(seed), seed)?, format)
        }
        Command::Ppt { target, solver, primal_iters, inner_iters } => {
            let primal = SolveParams {
                max_iters: primal_iters,
                inner_iters,
                seed,
                ..SolveParams::primal()
            };
            emit(commands::ppt(target.source()?, &solver.params(seed), &primal, seed)?, format)
        }
        Command::Simulate { target, m, trials, adversary, solver } => {
            let adv = adversary == Adversary::Computational;
            emit(commands::simulate(target.source()?, m, trials, adv, &solver.params(seed), seed)?, format)
        }
        Command::Export { target } => {
            if target.ensemble.is_some() {
                return Err(CliError::Usage("export takes example1 or exampled --d D".into()));
            }
            Ok((commands::export(target.construction()?)?, 0))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok((bytes, code)) => {
            let written = match &out {
                Some(path) => fs::write(path, &bytes),
                None => std::io::stdout().lock().write_all(&bytes),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
