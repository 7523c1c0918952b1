//! ε-sweeps, GL-versus-constrained comparison, and snapshot analysis.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::concentration::{defect_estimate, detect_sigma, ConcentrationReport, DefectEstimate};
use crate::config::RunConfig;
use crate::diagnostics::{
    energy, energy_audit, max_principle_audit, momentum_weak_residual, penalty_scaling_fit, polar_sample, EnergyAudit,
    MaxPrincipleAudit,
};
use crate::dynamics::run;
use crate::error::{Error, Result};
use crate::init::generate_initial;
use crate::limit::{compare_trajectories, wedge_residual, CompareRow};
use crate::output::{csv_row, energy_csv, write_json};
use crate::snapshot::{read_snapshot, write_snapshot};
use crate::spectral::{Field, SpectralGrid};
use crate::state::{default_ball_radius, SimState};

pub const SCALING_HEADER: &str = "epsilon,sup_penalty_l2,grad_rho_l2sq,wedge_residual_max";
pub const COMPARE_HEADER: &str = "t,d_l2,v_l2,d_max";
/// Test wavenumber range of the weak residuals.
pub const RESIDUAL_K_MAX: i64 = 4;
/// Fraction of the elastic energy used as the default concentration threshold.
pub const DEFAULT_EPS0_FRACTION: f64 = 0.05;
pub const THREADS_ENV: &str = "GLNEMATIC_THREADS";

#[derive(Debug, Clone, Serialize)]
pub struct SweepRun {
    pub epsilon: f64,
    pub dt_effective: f64,
    pub steps: u64,
    pub t_final: f64,
    /// `sup_t ‖1 − |d|²‖_{L²}` over the samples.
    pub sup_penalty_l2: f64,
    pub grad_rho_l2sq: f64,
    pub wedge_residual_max: f64,
    pub momentum_residual_max: f64,
    pub energy_audit: EnergyAudit,
    pub max_principle: MaxPrincipleAudit,
    pub concentration: ConcentrationReport,
    pub directory: PathBuf,
    #[serde(skip)]
    pub final_state: SimState,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    /// Runs in decreasing ε.
    pub runs: Vec<SweepRun>,
    /// Log-log slope of `sup_penalty_l2` against ε.
    pub slope: Option<f64>,
    pub defect: Option<DefectEstimate>,
    pub passed: bool,
}

/// Parallelism for `jobs` independent runs, capped by `GLNEMATIC_THREADS`.
pub fn thread_count(jobs: usize) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(usize::MAX);
    jobs.min(available).min(cap).max(1)
}

fn eps_label(eps: f64) -> String {
    format!("eps_{eps}")
}

/// Default threshold: a fixed fraction of the elastic energy of `state`.
pub fn default_eps0_sq(grid: &SpectralGrid, state: &SimState, epsilon: f64) -> Result<f64> {
    let e = energy(grid, state, epsilon, true)?;
    Ok(DEFAULT_EPS0_FRACTION * e.elastic())
}

fn sweep_one(cfg: &RunConfig, epsilon: f64, dir: &Path) -> Result<SweepRun> {
    let mut params = cfg.params.clone();
    params.epsilon = epsilon;
    params.validate()?;
    let grid = SpectralGrid::new(params.n)?;
    let init = generate_initial(&cfg.init.name, &cfg.init.params, &grid, params.seed)?;
    fs::create_dir_all(dir)?;
    let out = run(&grid, &params, &init, cfg.sample_every, |_, _| Ok(()))?;
    let previous = out
        .previous
        .ok_or_else(|| Error::param("sweep runs need a positive horizon"))?;
    fs::write(dir.join("energy.csv"), energy_csv(&out.trajectory))?;
    write_snapshot(&out.state, epsilon, &dir.join("final.elgl"))?;

    let sup_penalty_l2 = out.trajectory.iter().map(|s| s.penalty_l2).fold(0.0, f64::max);
    let polar = polar_sample(&grid, out.state.d.physical())?;
    let wedge = wedge_residual(&grid, &previous, &out.state, RESIDUAL_K_MAX)?;
    let momentum = momentum_weak_residual(&grid, &previous, &out.state, RESIDUAL_K_MAX)?;
    let eps0_sq = match params.eps0_sq {
        Some(e) => e,
        None => default_eps0_sq(&grid, &init, epsilon)?,
    };
    let radius = params.ball_radius.unwrap_or_else(|| default_ball_radius(params.n));
    let concentration = detect_sigma(&grid, &out.state, epsilon, radius, eps0_sq)?;
    Ok(SweepRun {
        epsilon,
        dt_effective: params.dt_effective(),
        steps: out.state.step,
        t_final: out.state.t(),
        sup_penalty_l2,
        grad_rho_l2sq: polar.grad_rho_l2sq,
        wedge_residual_max: wedge.max,
        momentum_residual_max: momentum.max,
        energy_audit: energy_audit(&out.trajectory)?,
        max_principle: max_principle_audit(&out.trajectory),
        concentration,
        directory: dir.to_path_buf(),
        final_state: out.state,
    })
}

pub fn scaling_csv(runs: &[SweepRun]) -> String {
    let mut out = format!("{SCALING_HEADER}\n");
    for r in runs {
        out.push_str(&csv_row(&[r.epsilon, r.sup_penalty_l2, r.grad_rho_l2sq, r.wedge_residual_max]));
    }
    out
}

/// Runs the configuration once per ε (concurrently), then writes
/// `scaling.csv` and `sweep_report.json` into `output_dir`. Each run gets its
/// own subdirectory with `energy.csv` and `final.elgl`.
pub fn execute_sweep(cfg: &RunConfig, epsilons: &[f64]) -> Result<SweepReport> {
    cfg.validate()?;
    if epsilons.is_empty() {
        return Err(Error::param("sweep needs at least one epsilon"));
    }
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(eps.len()))
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    let runs: Vec<SweepRun> = pool.install(|| {
        eps.par_iter()
            .map(|&e| sweep_one(cfg, e, &cfg.output_dir.join(eps_label(e))))
            .collect::<Result<Vec<_>>>()
    })?;

    let slope = if runs.len() >= 3 && runs.iter().all(|r| r.sup_penalty_l2 > 0.0) {
        Some(penalty_scaling_fit(
            &runs.iter().map(|r| (r.epsilon, r.sup_penalty_l2)).collect::<Vec<_>>(),
        )?)
    } else {
        None
    };
    let defect = if runs.len() >= 3 {
        let grid = SpectralGrid::new(cfg.params.n)?;
        let snaps: Vec<(f64, Field)> = runs.iter().map(|r| (r.epsilon, r.final_state.d.clone())).collect();
        Some(defect_estimate(&grid, runs[0].t_final, &snaps, RESIDUAL_K_MAX)?)
    } else {
        None
    };
    let passed = runs
        .iter()
        .all(|r| r.energy_audit.passed && r.max_principle.passed && r.concentration.passed);
    let report = SweepReport {
        runs,
        slope,
        defect,
        passed,
    };
    fs::write(cfg.output_dir.join("scaling.csv"), scaling_csv(&report.runs))?;
    write_json(&cfg.output_dir.join("sweep_report.json"), &report)?;
    Ok(report)
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = format!("{COMPARE_HEADER}\n");
    for r in rows {
        out.push_str(&csv_row(&[r.t, r.d_l2, r.v_l2, r.d_max]));
    }
    out
}

/// Penalized versus constrained trajectories from the configured initial
/// data; writes `compare.csv`.
pub fn execute_compare(cfg: &RunConfig) -> Result<Vec<CompareRow>> {
    cfg.validate()?;
    let grid = SpectralGrid::new(cfg.params.n)?;
    let init = generate_initial(&cfg.init.name, &cfg.init.params, &grid, cfg.params.seed)?;
    let rows = compare_trajectories(&grid, &cfg.params, &init, cfg.sample_every)?;
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("compare.csv"), compare_csv(&rows))?;
    Ok(rows)
}

/// Concentration report of a stored snapshot. Returns the report and whether
/// the default threshold was used.
pub fn analyze_snapshot(path: &Path, eps0_sq: Option<f64>, radius: Option<f64>) -> Result<(ConcentrationReport, bool)> {
    let (state, epsilon) = read_snapshot(path)?;
    let grid = SpectralGrid::new(state.n())?;
    let (eps0, defaulted) = match eps0_sq {
        Some(e) => (e, false),
        None => (default_eps0_sq(&grid, &state, epsilon)?, true),
    };
    let radius = radius.unwrap_or_else(|| default_ball_radius(state.n()));
    // A snapshot with no elastic energy gets a nominal threshold: nothing can
    // exceed it, and the bound is 0 either way.
    let eps0 = if eps0 > 0.0 { eps0 } else { 1.0 };
    Ok((detect_sigma(&grid, &state, epsilon, radius, eps0)?, defaulted))
}
