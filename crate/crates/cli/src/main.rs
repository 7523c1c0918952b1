use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nematic_core::config::RunConfig;
use nematic_core::output::{concentration_csv, concentration_text, execute_run, fmt_real};
use nematic_core::sweep::{analyze_snapshot, execute_compare, execute_sweep, SCALING_HEADER};
use nematic_core::Error;

const EXIT_AUDIT: u8 = 1;
const EXIT_BLOW_UP: u8 = 2;
const EXIT_USAGE: u8 = 3;

/// Ginzburg-Landau nematic flow on the 2-torus.
#[derive(Debug, Parser)]
#[command(name = "glnematic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single simulation: energy.csv, snapshots and report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// One simulation per epsilon, then scaling.csv and the fitted slope.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
    /// Concentration report of a snapshot.
    Analyze {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long = "eps0-sq")]
        eps0_sq: Option<f64>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Distance between the penalized and constrained trajectories.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cmd: Command) -> Result<bool, Error> {
    match cmd {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let r = execute_run(&cfg)?;
            println!(
                "run {}: eps = {}, n = {}, dt = {}, steps = {}, t = {}",
                r.generator, r.epsilon, r.n, r.dt_effective, r.steps, r.t_final
            );
            match &r.energy_audit {
                Some(a) => println!(
                    "energy audit: {} (worst increase {:e}, cumulative ratio {})",
                    if a.passed { "pass" } else { "FAIL" },
                    a.worst_increase,
                    a.final_ratio
                ),
                None => println!("energy audit: skipped (fewer than two samples)"),
            }
            println!(
                "max principle: {} (max|d| = {})",
                if r.max_principle.passed { "pass" } else { "FAIL" },
                r.max_principle.worst_max_d
            );
            Ok(r.passed)
        }
        Command::Sweep { config, eps } => {
            let cfg = RunConfig::load(&config)?;
            let r = execute_sweep(&cfg, &eps)?;
            println!("{SCALING_HEADER},momentum_residual_max");
            for run in &r.runs {
                println!(
                    "{},{},{},{},{}",
                    fmt_real(run.epsilon),
                    fmt_real(run.sup_penalty_l2),
                    fmt_real(run.grad_rho_l2sq),
                    fmt_real(run.wedge_residual_max),
                    fmt_real(run.momentum_residual_max)
                );
            }
            match r.slope {
                Some(s) => println!("slope = {s}"),
                None => println!("slope = n/a (needs three epsilons)"),
            }
            Ok(r.passed)
        }
        Command::Analyze {
            snapshot,
            eps0_sq,
            radius,
        } => {
            let (r, defaulted) = analyze_snapshot(&snapshot, eps0_sq, radius)?;
            print!("{}", concentration_text(&r, defaulted));
            print!("{}", concentration_csv(&r));
            Ok(r.passed)
        }
        Command::Compare { config } => {
            let cfg = RunConfig::load(&config)?;
            let rows = execute_compare(&cfg)?;
            println!("t,d_l2,v_l2,d_max");
            for row in rows {
                println!("{},{},{},{}", fmt_real(row.t), fmt_real(row.d_l2), fmt_real(row.v_l2), fmt_real(row.d_max));
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("glnematic: audit failed");
            ExitCode::from(EXIT_AUDIT)
        }
        Err(e) => {
            eprintln!("glnematic: {e}");
            match e {
                Error::BlowUp { .. } | Error::NormalizationSingularity { .. } => ExitCode::from(EXIT_BLOW_UP),
                _ => ExitCode::from(EXIT_USAGE),
            }
        }
    }
}
