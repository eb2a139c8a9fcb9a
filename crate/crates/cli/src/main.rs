//! `lbsched`: generate, solve, check and report on vector-scheduling and
//! stochastic load-balancing instances. Every randomized step is driven by
//! streams derived from `--seed`, so reruns produce byte-identical files.

mod commands;
mod format;
mod output;
mod report;
mod solution;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lbsched::gen::{StochFamily, VsFamily};
use lbsched::vecsched::QDenominator;
use lbsched::{OracleBudget, VsParams};

use commands::{Common, OracleArgs, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "lbsched",
    version,
    about = "Vector scheduling and stochastic load balancing"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Grid resolution of the threshold search.
    #[arg(long, global = true, default_value_t = lbsched::minnorm::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Attempts allowed before a scheduling failure is reported.
    #[arg(long, global = true, default_value_t = 10)]
    retries: usize,
    /// Largest number of assignments the exhaustive oracles may enumerate.
    #[arg(long, global = true, default_value_t = 59_049)]
    budget_assignments: u64,
    /// Largest number of joint outcomes the exact oracles may enumerate.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    budget_outcomes: u64,
    #[arg(long, global = true, default_value_t = 100_000)]
    mc_samples: u64,
    /// Random cases per suite for `verify`.
    #[arg(long, global = true, default_value_t = 500)]
    cases: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Denominator {
    Residual,
    Original,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a vector-scheduling instance.
    GenVs {
        #[arg(long, default_value = "uniform")]
        family: VsFamily,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        /// Rescale sizes so the lower bound equals 1.
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a stochastic load-balancing instance.
    GenStoch {
        #[arg(long, default_value = "bernoulli")]
        family: StochFamily,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Schedule a vector instance with the randomized algorithm.
    SolveVs {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Denominator::Residual)]
        q_denominator: Denominator,
        /// Known bound U on every dimension's total load relative to m LB.
        #[arg(long)]
        load_bound: Option<f64>,
    },
    /// Compute a simultaneous assignment with per-l certificates.
    SolveStoch {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact optimum, exact expectations and Monte Carlo estimates.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        /// Any file with an `assignment` array, such as a solution file.
        #[arg(long)]
        assignment: Option<PathBuf>,
        #[arg(long)]
        ell: Option<usize>,
        /// Ordered norm `{"w": [...]}` evaluated on the assignment.
        #[arg(long)]
        norm: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the inequality suite and the solver sweeps.
    Verify {
        /// Instances per solver sweep.
        #[arg(long, default_value_t = 100)]
        sweep_cases: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a solution, oracle or verification file as text.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Stochastic instance; adds exact E[Top-l] and OPT_l columns.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<Outcome> {
    let g = &cli.global;
    let common = Common {
        seed: g.seed,
        epsilon: g.epsilon,
        retries: g.retries,
        budget: OracleBudget {
            max_assignments: g.budget_assignments,
            max_outcomes: g.budget_outcomes,
            mc_samples: g.mc_samples,
        },
        cases: g.cases,
    };
    match cli.command {
        Command::GenVs {
            family,
            n,
            m,
            d,
            normalize,
            out,
        } => commands::gen_vs_cmd(&common, family, n, m, d, normalize, out.as_deref()),
        Command::GenStoch { family, n, m, out } => {
            commands::gen_stoch_cmd(&common, family, n, m, out.as_deref())
        }
        Command::SolveVs {
            input,
            out,
            q_denominator,
            load_bound,
        } => {
            let params = VsParams {
                load_bound,
                q_denominator: match q_denominator {
                    Denominator::Residual => QDenominator::Residual,
                    Denominator::Original => QDenominator::Original,
                },
                ..VsParams::default()
            };
            commands::solve_vs_cmd(&common, &input, &params, out.as_deref())
        }
        Command::SolveStoch { input, out } => {
            commands::solve_stoch_cmd(&common, &input, out.as_deref())
        }
        Command::Oracle {
            input,
            assignment,
            ell,
            norm,
            out,
        } => {
            let args = OracleArgs {
                input,
                assignment,
                ell,
                norm,
            };
            commands::oracle_cmd(&common, &args, out.as_deref())
        }
        Command::Verify { sweep_cases, out } => {
            commands::verify_cmd(&common, sweep_cases, out.as_deref())
        }
        Command::Report {
            input,
            instance,
            out,
        } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let rendered = report::render_file(
                &text,
                &input.display().to_string(),
                instance.as_deref(),
                &common.budget,
            )?;
            output::emit_text(out.as_deref(), &rendered)?;
            Ok(Outcome::Passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
