//! Energy bookkeeping, a-priori norm monitors, polar-decomposition scaling,
//! and the weak-form residual of the momentum equation.
//!
//! The energy is `½∫|v|² + ½∫|∇d|² + (1/4ε²)∫(1−|d|²)²`, i.e. half of the
//! quantity on the left of the usual energy law, so along exact solutions
//! `total(t) + ∫₀ᵗ (diss_v + diss_d) = total(0)`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ericksen_stress, tension};
use crate::error::{Error, Result};
use crate::spectral::{Samples, SpectralGrid};
use crate::state::SimState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub kinetic: f64,
    pub dirichlet: f64,
    pub penalty: f64,
    pub total: f64,
    pub diss_v: f64,
    pub diss_d: f64,
    pub l4_v: f64,
    pub max_d: f64,
    pub penalty_l2: f64,
}

impl EnergySample {
    /// Elastic part `dirichlet + penalty`.
    pub fn elastic(&self) -> f64 {
        self.dirichlet + self.penalty
    }

    pub fn dissipation(&self) -> f64 {
        self.diss_v + self.diss_d
    }

    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.kinetic,
            self.dirichlet,
            self.penalty,
            self.total,
            self.diss_v,
            self.diss_d,
            self.l4_v,
            self.max_d,
            self.penalty_l2,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

fn sum_sq(s: &Samples) -> Vec<f64> {
    let nn = s.n() * s.n();
    let mut out = vec![0.0; nn];
    for c in 0..s.comps() {
        for (o, x) in out.iter_mut().zip(s.comp(c)) {
            *o += x * x;
        }
    }
    out
}

/// Energies, dissipation rates and norm monitors of one state.
///
/// The tension uses the same masked penalty force as the time stepper when
/// `dealias` is set, so the dissipation matches what the scheme removes.
pub fn energy(grid: &SpectralGrid, state: &SimState, epsilon: f64, dealias: bool) -> Result<EnergySample> {
    let v = state.v.physical();
    let d = state.d.physical();
    let v_sq = sum_sq(v);
    let kinetic = 0.5 * grid.integrate(&v_sq);
    let l4_v = grid
        .integrate(&v_sq.iter().map(|x| x * x).collect::<Vec<_>>())
        .powf(0.25);

    let grad_d = grid.inverse(&grid.gradient(state.d.spectral()))?;
    let dirichlet = 0.5 * grid.integrate(&sum_sq(&grad_d));

    let defect: Vec<f64> = sum_sq(d).into_iter().map(|r| (1.0 - r).powi(2)).collect();
    let defect_int = grid.integrate(&defect);
    let penalty = defect_int / (4.0 * epsilon * epsilon);
    let penalty_l2 = defect_int.sqrt();
    let max_d = d.norms().into_iter().fold(0.0, f64::max);

    let grad_v = grid.inverse(&grid.gradient(state.v.spectral()))?;
    let diss_v = grid.integrate(&sum_sq(&grad_v));
    let tau = grid.inverse(&tension(grid, &state.d, epsilon, dealias)?)?;
    let diss_d = grid.integrate(&sum_sq(&tau));

    Ok(EnergySample {
        t: state.t(),
        kinetic,
        dirichlet,
        penalty,
        total: kinetic + dirichlet + penalty,
        diss_v,
        diss_d,
        l4_v,
        max_d,
        penalty_l2,
    })
}

/// Relative slack allowed in the cumulative energy inequality.
pub const CUMULATIVE_TOL: f64 = 1e-6;
/// Per-sample increase allowed, relative to the initial energy.
pub const MONOTONE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyAudit {
    pub passed: bool,
    pub monotone_passed: bool,
    pub cumulative_passed: bool,
    /// Largest `total(t_{m+1}) − total(t_m)` seen.
    pub worst_increase: f64,
    pub worst_increase_t: f64,
    /// Largest `total(t_m) + Σ Δt·D − total(0)·(1 + tol)`; non-positive on success.
    pub worst_cumulative_excess: f64,
    pub worst_cumulative_t: f64,
    /// `total(t_end) + Σ Δt·D` divided by `total(0)`.
    pub final_ratio: f64,
}

/// Audits a trajectory against the energy inequality.
///
/// The dissipation integral is accumulated with the right-endpoint rule
/// `Σ (t_m − t_{m−1}) D(t_m)`, the quadrature implied by the implicit treatment
/// of diffusion. Requires at least two samples.
pub fn energy_audit(trajectory: &[EnergySample]) -> Result<EnergyAudit> {
    if trajectory.len() < 2 {
        return Err(Error::param("energy audit needs at least two samples"));
    }
    let e0 = trajectory[0].total;
    let mut worst_increase = f64::NEG_INFINITY;
    let mut worst_increase_t = trajectory[0].t;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_cumulative_t = trajectory[0].t;
    let mut dissipated = 0.0;
    for w in trajectory.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let inc = b.total - a.total;
        if inc > worst_increase {
            worst_increase = inc;
            worst_increase_t = b.t;
        }
        dissipated += (b.t - a.t) * b.dissipation();
        let excess = b.total + dissipated - e0 * (1.0 + CUMULATIVE_TOL);
        if excess > worst_excess {
            worst_excess = excess;
            worst_cumulative_t = b.t;
        }
    }
    let last = trajectory.last().unwrap();
    let monotone_passed = worst_increase <= MONOTONE_TOL * e0;
    let cumulative_passed = worst_excess <= 0.0;
    Ok(EnergyAudit {
        passed: monotone_passed && cumulative_passed,
        monotone_passed,
        cumulative_passed,
        worst_increase,
        worst_increase_t,
        worst_cumulative_excess: worst_excess,
        worst_cumulative_t,
        final_ratio: if e0 > 0.0 { (last.total + dissipated) / e0 } else { 0.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleAudit {
    pub passed: bool,
    pub worst_max_d: f64,
    pub worst_t: f64,
}

pub fn max_principle_audit(trajectory: &[EnergySample]) -> MaxPrincipleAudit {
    let (worst_max_d, worst_t) = trajectory
        .iter()
        .map(|s| (s.max_d, s.t))
        .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    MaxPrincipleAudit {
        passed: worst_max_d <= 1.0 + crate::state::MAX_PRINCIPLE_TOL,
        worst_max_d,
        worst_t,
    }
}

/// Least-squares slope of `log value` against `log ε`.
pub fn penalty_scaling_fit(runs: &[(f64, f64)]) -> Result<f64> {
    if runs.iter().any(|&(e, v)| !(e > 0.0) || !(v > 0.0)) {
        return Err(Error::param("scaling fit needs positive epsilons and values"));
    }
    let mut eps: Vec<f64> = runs.iter().map(|r| r.0).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 3 {
        return Err(Error::param("scaling fit needs at least three distinct epsilons"));
    }
    let pts: Vec<(f64, f64)> = runs.iter().map(|&(e, v)| (e.ln(), v.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarSample {
    pub region_fraction: f64,
    pub grad_rho_l2sq: f64,
    pub grad_psi_l4: f64,
}

/// Polar split `d = ρψ` on the region `|d| ≥ ½`. Integrals over an empty
/// region are zero.
pub fn polar_sample(grid: &SpectralGrid, d: &Samples) -> Result<PolarSample> {
    let n = grid.n();
    let nn = n * n;
    let rho = d.norms();
    let region: Vec<bool> = rho.iter().map(|&r| r >= 0.5).collect();
    let count = region.iter().filter(|&&r| r).count();
    if count == 0 {
        return Ok(PolarSample {
            region_fraction: 0.0,
            grad_rho_l2sq: 0.0,
            grad_psi_l4: 0.0,
        });
    }
    let rho_field = Samples::from_vec(n, 1, rho.clone())?;
    let grad_rho = grid.inverse(&grid.gradient(&grid.forward(&rho_field)?))?;
    let mut psi = Samples::zeros(n, d.comps());
    for c in 0..d.comps() {
        let src = d.comp(c);
        let dst = psi.comp_mut(c);
        for x in 0..nn {
            if region[x] {
                dst[x] = src[x] / rho[x];
            }
        }
    }
    let grad_psi = grid.inverse(&grid.gradient(&grid.forward(&psi)?))?;
    let gr = sum_sq(&grad_rho);
    let gp = sum_sq(&grad_psi);
    let masked = |f: &dyn Fn(usize) -> f64| -> Vec<f64> {
        (0..nn).map(|x| if region[x] { f(x) } else { 0.0 }).collect()
    };
    let grad_rho_l2sq = grid.integrate(&masked(&|x| gr[x]));
    let grad_psi_l4 = grid.integrate(&masked(&|x| gp[x] * gp[x])).powf(0.25);
    Ok(PolarSample {
        region_fraction: count as f64 / nn as f64,
        grad_rho_l2sq,
        grad_psi_l4,
    })
}

/// One entry of a weak-residual table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub k1: i64,
    pub k2: i64,
    /// Component of the vector test function (`None` for solenoidal tests).
    pub component: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualTable {
    pub entries: Vec<ResidualEntry>,
    pub max: f64,
}

impl ResidualTable {
    pub(crate) fn from_entries(entries: Vec<ResidualEntry>) -> Self {
        let max = entries.iter().map(|e| e.value).fold(0.0, f64::max);
        Self { entries, max }
    }
}

pub(crate) fn check_pair(prev: &SimState, curr: &SimState) -> Result<f64> {
    let dt = curr.t() - prev.t();
    if prev.n() != curr.n() {
        return Err(Error::ShapeMismatch("residual pair on different grids".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::param("residual pair must be in increasing time order"));
    }
    Ok(dt)
}

/// Weak residual of the momentum equation against `φ = ∇⊥e^{ik·x}` for
/// `1 ≤ |k|∞ ≤ k_max`, evaluated at `curr` with a backward difference for `∂t v`:
///
/// ```text
/// R(k) = ∫ ∂t v·φ − v⊗v : ∇φ + ∇v : ∇φ − ∇d⊙∇d : ∇φ
/// ```
pub fn momentum_weak_residual(
    grid: &SpectralGrid,
    prev: &SimState,
    curr: &SimState,
    k_max: i64,
) -> Result<ResidualTable> {
    let dt = check_pair(prev, curr)?;
    let n = grid.n();
    let nn = n * n;
    let v = curr.v.physical();
    let mut dv = curr.v.physical().clone();
    for (x, p) in dv.as_mut_slice().iter_mut().zip(prev.v.physical().as_slice()) {
        *x = (*x - p) / dt;
    }
    let grad_v = grid.inverse(&grid.gradient(curr.v.spectral()))?;
    let grad_d = grid.inverse(&grid.gradient(curr.d.spectral()))?;
    let m = ericksen_stress(&grad_d);
    // T_ij = −v_i v_j + ∂_j v_i − M_ij, so that R = ∫ ∂t v·φ + T : ∇φ.
    let mut t = Samples::zeros(n, 4);
    for i in 0..2 {
        for j in 0..2 {
            let slot = match (i, j) {
                (0, 0) => 0,
                (1, 1) => 2,
                _ => 1,
            };
            let dst = t.comp_mut(2 * i + j);
            for x in 0..nn {
                dst[x] = -v.comp(i)[x] * v.comp(j)[x] + grad_v.comp(2 * i + j)[x] - m.comp(slot)[x];
            }
        }
    }
    let dv_hat = grid.forward(&dv)?;
    let t_hat = grid.forward(&t)?;
    let mut entries = Vec::new();
    for k1 in -k_max..=k_max {
        for k2 in -k_max..=k_max {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let i = Complex64::new(0.0, 1.0);
            let c = [-i * k2 as f64, i * k1 as f64];
            let kv = [k1 as f64, k2 as f64];
            let mut r = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                r += c[a] * grid.pair_with_mode(&dv_hat, a, k1, k2);
                for b in 0..2 {
                    r += c[a] * i * kv[b] * grid.pair_with_mode(&t_hat, 2 * a + b, k1, k2);
                }
            }
            entries.push(ResidualEntry {
                k1,
                k2,
                component: None,
                value: r.norm(),
            });
        }
    }
    Ok(ResidualTable::from_entries(entries))
}

/// `∫ (∇d ⊙ ∇d) : ∇φ` for `φ = ∇⊥e^{ik·x}`, evaluated from the stress
/// spectrum `(M11, M12, M22)`.
pub(crate) fn stress_pairing_from(grid: &SpectralGrid, m_hat: &crate::spectral::Spectrum, k1: i64, k2: i64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let c = [-i * k2 as f64, i * k1 as f64];
    let kv = [k1 as f64, k2 as f64];
    let slot = |a: usize, b: usize| match (a, b) {
        (0, 0) => 0,
        (1, 1) => 2,
        _ => 1,
    };
    let mut r = Complex64::new(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            r += c[a] * i * kv[b] * grid.pair_with_mode(m_hat, slot(a, b), k1, k2);
        }
    }
    r
}

/// Torus area.
pub const AREA: f64 = 4.0 * PI * PI;
