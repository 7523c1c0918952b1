//! CSV and JSON emission, and the single-run driver behind `glnematic run`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::concentration::ConcentrationReport;
use crate::config::RunConfig;
use crate::diagnostics::{energy, energy_audit, max_principle_audit, EnergyAudit, EnergySample, MaxPrincipleAudit};
use crate::dynamics::run;
use crate::error::{Error, Result};
use crate::init::generate_initial;
use crate::snapshot::write_snapshot;
use crate::spectral::SpectralGrid;
use crate::state::{validate, DirectorMode, Scheme, SimState, ValidationReport};

pub const ENERGY_HEADER: &str = "t,kinetic,dirichlet,penalty,total,diss_v,diss_d,l4_v,max_d,penalty_l2";
pub const FIELDS_HEADER: &str = "x1,x2,v1,v2,d1,d2,d3";
pub const CONCENTRATION_HEADER: &str = "x1,x2,peak_energy,attributed_energy,nodes";

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_row(values: &[f64]) -> String {
    let mut line = values.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

pub fn energy_csv(trajectory: &[EnergySample]) -> String {
    let mut out = format!("{ENERGY_HEADER}\n");
    for s in trajectory {
        out.push_str(&csv_row(&[
            s.t,
            s.kinetic,
            s.dirichlet,
            s.penalty,
            s.total,
            s.diss_v,
            s.diss_d,
            s.l4_v,
            s.max_d,
            s.penalty_l2,
        ]));
    }
    out
}

pub fn fields_csv(grid: &SpectralGrid, state: &SimState) -> String {
    let mut out = format!("{FIELDS_HEADER}\n");
    let (v, d) = (state.v.physical(), state.d.physical());
    for idx in 0..grid.n() * grid.n() {
        let (x1, x2) = grid.node(idx);
        out.push_str(&csv_row(&[
            x1,
            x2,
            v.comp(0)[idx],
            v.comp(1)[idx],
            d.comp(0)[idx],
            d.comp(1)[idx],
            d.comp(2)[idx],
        ]));
    }
    out
}

pub fn concentration_csv(report: &ConcentrationReport) -> String {
    let mut out = format!("{CONCENTRATION_HEADER}\n");
    for p in &report.points {
        out.push_str(&csv_row(&[p.center.0, p.center.1, p.peak_energy, p.attributed_energy, p.nodes as f64]));
    }
    out
}

/// Human-readable concentration report. `eps0_default` flags a threshold
/// that was not supplied explicitly.
pub fn concentration_text(report: &ConcentrationReport, eps0_default: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "concentration analysis at t = {}", report.t);
    let _ = writeln!(s, "  epsilon      {}", report.epsilon);
    let _ = writeln!(
        s,
        "  eps0_sq      {}{}",
        report.eps0_sq,
        if eps0_default { " (default: 5% of the snapshot elastic energy)" } else { "" }
    );
    let _ = writeln!(s, "  radius       {}", report.radius);
    let _ = writeln!(s, "  energy       {}", report.total_energy);
    let _ = writeln!(s, "  bound        {}", report.k_bound);
    let _ = writeln!(s, "{} concentration points", report.count);
    for (i, p) in report.points.iter().enumerate() {
        let _ = writeln!(
            s,
            "  [{i}] x = ({:.6}, {:.6})  peak {:.6e}  attributed {:.6e}  nodes {}",
            p.center.0, p.center.1, p.peak_energy, p.attributed_energy, p.nodes
        );
    }
    let _ = writeln!(s, "{}", if report.passed { "bound respected" } else { "BOUND VIOLATED" });
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub generator: String,
    pub epsilon: f64,
    pub n: usize,
    pub scheme: Scheme,
    pub dt_effective: f64,
    pub steps: u64,
    pub t_final: f64,
    /// `None` when fewer than two samples were taken.
    pub energy_audit: Option<EnergyAudit>,
    pub max_principle: MaxPrincipleAudit,
    pub final_state: ValidationReport,
    pub snapshots: Vec<PathBuf>,
    pub passed: bool,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs one configuration, writing `energy.csv`, the requested snapshots,
/// `report.json` and, optionally, `fields_final.csv` into `output_dir`.
///
/// On blow-up the samples gathered so far are still written to `energy.csv`
/// before the error is returned.
pub fn execute_run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let params = &cfg.params;
    let grid = SpectralGrid::new(params.n)?;
    let init = generate_initial(&cfg.init.name, &cfg.init.params, &grid, params.seed)?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;

    let mut pending: Vec<(usize, f64)> = cfg.snapshot_times.iter().copied().enumerate().collect();
    pending.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut written = Vec::new();
    let mut samples = Vec::new();
    let mut take_snapshots = |state: &SimState, pending: &mut Vec<(usize, f64)>, last: bool| -> Result<()> {
        let slack = 1e-9 * state.dt.max(f64::MIN_POSITIVE);
        while let Some(&(i, ts)) = pending.first() {
            if !(last || state.t() >= ts - slack) {
                break;
            }
            let path = dir.join(format!("snapshot_{i:03}.elgl"));
            write_snapshot(state, params.epsilon, &path)?;
            written.push((i, path));
            pending.remove(0);
        }
        Ok(())
    };

    let outcome = run(&grid, params, &init, cfg.sample_every, |state, sample| {
        if let Some(s) = sample {
            samples.push(*s);
        }
        take_snapshots(state, &mut pending, false)
    });
    let out = match outcome {
        Ok(out) => out,
        Err(e) => {
            fs::write(dir.join("energy.csv"), energy_csv(&samples))?;
            return Err(e);
        }
    };
    let trajectory = if out.trajectory.is_empty() {
        vec![energy(&grid, &out.state, params.epsilon, params.dealias_on)?]
    } else {
        out.trajectory
    };
    take_snapshots(&out.state, &mut pending, true)?;
    fs::write(dir.join("energy.csv"), energy_csv(&trajectory))?;
    if cfg.emit_plots_data {
        fs::write(dir.join("fields_final.csv"), fields_csv(&grid, &out.state))?;
    }

    let audit = match energy_audit(&trajectory) {
        Ok(a) => Some(a),
        Err(Error::InvalidParameter(_)) => None,
        Err(e) => return Err(e),
    };
    let max_principle = max_principle_audit(&trajectory);
    let final_state = validate(&grid, &out.state, DirectorMode::Penalized)?;
    written.sort_by_key(|w| w.0);
    let report = RunReport {
        generator: cfg.init.name.clone(),
        epsilon: params.epsilon,
        n: params.n,
        scheme: params.scheme,
        dt_effective: params.dt_effective(),
        steps: out.state.step,
        t_final: out.state.t(),
        passed: audit.as_ref().map_or(true, |a| a.passed) && max_principle.passed,
        energy_audit: audit,
        max_principle,
        final_state,
        snapshots: written.into_iter().map(|w| w.1).collect(),
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}
