//! Time integration of the penalized (Ginzburg–Landau) nematic flow
//!
//! ```text
//! ∂t v + (v·∇)v + ∇p − Δv = −div(∇d ⊙ ∇d),   div v = 0
//! ∂t d + (v·∇)d = Δd + ε⁻²(1 − |d|²) d
//! ```
//!
//! Products are formed at the nodes and masked in Fourier space. The elastic
//! force is evaluated in the form `P[−(∇d)ᵀ τ]` with `τ = Δd + ε⁻²(1−|d|²)d`;
//! the gradient parts of `div(∇d⊙∇d)` and of the penalty drop out under the
//! Leray projection `P`.

use rustfft::num_complex::Complex64;

use crate::diagnostics::{energy, EnergySample};
use crate::error::{Error, Result};
use crate::spectral::{Field, Samples, SpectralGrid, Spectrum};
use crate::state::{Scheme, SimParams, SimState};

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Pointwise `ε⁻²(1 − |d|²) d` at the nodes, unmasked.
pub fn gl_samples(d: &Samples, epsilon: f64) -> Result<Samples> {
    check_epsilon(epsilon)?;
    let n = d.n();
    let nn = n * n;
    let inv = 1.0 / (epsilon * epsilon);
    let mut out = Samples::zeros(n, d.comps());
    let src = d.as_slice();
    let dst = out.as_mut_slice();
    for i in 0..nn {
        let sq: f64 = (0..d.comps()).map(|c| src[c * nn + i].powi(2)).sum();
        let w = inv * (1.0 - sq);
        for c in 0..d.comps() {
            dst[c * nn + i] = w * src[c * nn + i];
        }
    }
    Ok(out)
}

/// The penalty force `ε⁻²(1 − |d|²) d` in Fourier space.
pub fn gl_term(grid: &SpectralGrid, d: &Samples, epsilon: f64, dealias: bool) -> Result<Spectrum> {
    grid.forward_dealiased(&gl_samples(d, epsilon)?, dealias)
}

/// Tension field `τ = Δd + ε⁻²(1 − |d|²) d` in Fourier space.
pub fn tension(grid: &SpectralGrid, d: &Field, epsilon: f64, dealias: bool) -> Result<Spectrum> {
    let mut tau = grid.laplacian(d.spectral());
    let gl = gl_term(grid, d.physical(), epsilon, dealias)?;
    tau.axpy(1.0, &gl);
    Ok(tau)
}

/// `−(∇d)ᵀ τ`, i.e. component `j` is `−Σ_c ∂_j d_c τ_c`.
fn contract_gradient(grad_d: &Samples, tau: &Samples) -> Samples {
    let n = tau.n();
    let nn = n * n;
    let mut out = Samples::zeros(n, 2);
    for j in 0..2 {
        let dst = out.comp_mut(j);
        for c in 0..tau.comps() {
            let g = grad_d.comp(2 * c + j);
            let t = tau.comp(c);
            for i in 0..nn {
                dst[i] -= g[i] * t[i];
            }
        }
    }
    out
}

fn project_mean_free(grid: &SpectralGrid, mut s: Spectrum) -> Result<Spectrum> {
    grid.leray_project_in_place(&mut s)?;
    for c in 0..2 {
        s.set_coeff(c, 0, 0, Complex64::new(0.0, 0.0));
    }
    Ok(s)
}

/// Leray-projected elastic force `P[−(∇d)ᵀ τ]`, zero mean.
pub fn stress_force(grid: &SpectralGrid, d: &Field, epsilon: f64, dealias: bool) -> Result<Spectrum> {
    let tau = grid.inverse(&tension(grid, d, epsilon, dealias)?)?;
    let grad = grid.inverse(&grid.gradient(d.spectral()))?;
    stress_from_parts(grid, &grad, &tau, dealias)
}

pub(crate) fn stress_from_parts(grid: &SpectralGrid, grad_d: &Samples, tau: &Samples, dealias: bool) -> Result<Spectrum> {
    let raw = grid.forward_dealiased(&contract_gradient(grad_d, tau), dealias)?;
    project_mean_free(grid, raw)
}

/// Entries `∂_i d · ∂_j d` of the Ericksen stress, ordered `(11, 12, 22)`.
pub fn ericksen_stress(grad_d: &Samples) -> Samples {
    let n = grad_d.n();
    let nn = n * n;
    let comps = grad_d.comps() / 2;
    let mut out = Samples::zeros(n, 3);
    for (slot, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
        let dst = out.comp_mut(slot);
        for c in 0..comps {
            let a = grad_d.comp(2 * c + i);
            let b = grad_d.comp(2 * c + j);
            for x in 0..nn {
                dst[x] += a[x] * b[x];
            }
        }
    }
    out
}

/// `P[−div(∇d ⊙ ∇d)]` evaluated straight from the stress tensor.
pub fn stress_force_divergence_form(grid: &SpectralGrid, d: &Field, dealias: bool) -> Result<Spectrum> {
    let grad = grid.inverse(&grid.gradient(d.spectral()))?;
    let m = grid.forward_dealiased(&ericksen_stress(&grad), dealias)?;
    // ∂-components: index 2s + j is ∂_{j+1} M_s.
    let dm = grid.gradient(&m);
    let nn = grid.n() * grid.n();
    let mut out = Spectrum::zeros(grid.n(), 2);
    for x in 0..nn {
        // (div M)_1 = ∂1 M11 + ∂2 M12, (div M)_2 = ∂1 M12 + ∂2 M22
        let div1 = dm.comp(0)[x] + dm.comp(3)[x];
        let div2 = dm.comp(2)[x] + dm.comp(5)[x];
        out.comp_mut(0)[x] = -div1;
        out.comp_mut(1)[x] = -div2;
    }
    project_mean_free(grid, out)
}

/// Convective derivative `(v·∇) f`, componentwise.
pub fn advect(grid: &SpectralGrid, v: &Samples, f: &Field, dealias: bool) -> Result<Spectrum> {
    let grad = grid.inverse(&grid.gradient(f.spectral()))?;
    grid.forward_dealiased(&advect_samples(v, &grad), dealias)
}

pub(crate) fn advect_samples(v: &Samples, grad_f: &Samples) -> Samples {
    let n = v.n();
    let nn = n * n;
    let comps = grad_f.comps() / 2;
    let mut out = Samples::zeros(n, comps);
    let (v1, v2) = (v.comp(0), v.comp(1));
    for c in 0..comps {
        let g1 = grad_f.comp(2 * c);
        let g2 = grad_f.comp(2 * c + 1);
        let dst = out.comp_mut(c);
        for x in 0..nn {
            dst[x] = v1[x] * g1[x] + v2[x] * g2[x];
        }
    }
    out
}

/// The explicit right-hand-side pieces of one state.
#[derive(Debug, Clone)]
pub struct ForceDecomposition {
    pub tension: Spectrum,
    pub stress_force: Spectrum,
    pub advection_v: Spectrum,
    pub advection_d: Spectrum,
    /// Masked penalty force, the non-Laplacian part of `tension`.
    pub gl: Spectrum,
}

impl ForceDecomposition {
    pub fn compute(grid: &SpectralGrid, v: &Field, d: &Field, epsilon: f64, dealias: bool) -> Result<Self> {
        let gl = gl_term(grid, d.physical(), epsilon, dealias)?;
        let mut tension = grid.laplacian(d.spectral());
        tension.axpy(1.0, &gl);
        let tau = grid.inverse(&tension)?;
        let grad_d = grid.inverse(&grid.gradient(d.spectral()))?;
        let grad_v = grid.inverse(&grid.gradient(v.spectral()))?;
        let stress_force = stress_from_parts(grid, &grad_d, &tau, dealias)?;
        let advection_v = grid.forward_dealiased(&advect_samples(v.physical(), &grad_v), dealias)?;
        let advection_d = grid.forward_dealiased(&advect_samples(v.physical(), &grad_d), dealias)?;
        Ok(Self {
            tension,
            stress_force,
            advection_v,
            advection_d,
            gl,
        })
    }

    /// `P[−(v·∇)v + F]` with the zero mode removed.
    pub fn momentum_forcing(&self, grid: &SpectralGrid) -> Result<Spectrum> {
        let mut f = self.stress_force.clone();
        f.axpy(-1.0, &self.advection_v);
        project_mean_free(grid, f)
    }

    /// `ε⁻²(1−|d|²)d − (v·∇)d`.
    pub fn director_forcing(&self) -> Spectrum {
        let mut f = self.gl.clone();
        f.axpy(-1.0, &self.advection_d);
        f
    }
}

fn finish(grid: &SpectralGrid, prev: &SimState, v_hat: Spectrum, d_hat: Spectrum) -> Result<SimState> {
    let v = Field::from_spectral(grid, v_hat)?;
    let d = Field::from_spectral(grid, d_hat)?;
    let step = prev.step + 1;
    let t = prev.t_start + step as f64 * prev.dt;
    if !v.physical().is_finite() || !d.physical().is_finite() {
        return Err(Error::BlowUp {
            t,
            step,
            max_v: v.physical().max_abs(),
            max_d: d.physical().norms().into_iter().fold(0.0, f64::max),
        });
    }
    Ok(SimState {
        t_start: prev.t_start,
        step,
        dt: prev.dt,
        v,
        d,
    })
}

/// One first-order IMEX step: diffusion implicit, everything else explicit.
/// With `S > 0` the penalty carries the extra implicit term `−ε⁻² S (dⁿ⁺¹ − dⁿ)`.
pub fn step_imex(grid: &SpectralGrid, state: &SimState, params: &SimParams) -> Result<SimState> {
    check_epsilon(params.epsilon)?;
    let mut prev = state.clone();
    prev.rebase(params.dt_effective());
    let dt = prev.dt;
    let forces = ForceDecomposition::compute(grid, &prev.v, &prev.d, params.epsilon, params.dealias_on)?;

    let mut v_hat = prev.v.spectral().clone();
    v_hat.axpy(dt, &forces.momentum_forcing(grid)?);
    let nn = grid.n() * grid.n();
    for c in 0..2 {
        for (idx, z) in v_hat.comp_mut(c).iter_mut().enumerate() {
            *z /= 1.0 + dt * grid.k_sq(idx);
        }
    }
    grid.leray_project_in_place(&mut v_hat)?;

    let stab = dt * params.stabilization / (params.epsilon * params.epsilon);
    let mut d_hat = prev.d.spectral().clone();
    d_hat.scale(1.0 + stab);
    d_hat.axpy(dt, &forces.director_forcing());
    for c in 0..3 {
        let comp = d_hat.comp_mut(c);
        for idx in 0..nn {
            comp[idx] /= 1.0 + dt * grid.k_sq(idx) + stab;
        }
    }
    finish(grid, &prev, v_hat, d_hat)
}

/// Semi-discrete right-hand side `(∂t v̂, ∂t d̂)` of the penalized system.
pub fn rhs(grid: &SpectralGrid, v: &Field, d: &Field, epsilon: f64, dealias: bool) -> Result<(Spectrum, Spectrum)> {
    let forces = ForceDecomposition::compute(grid, v, d, epsilon, dealias)?;
    let mut dv = forces.momentum_forcing(grid)?;
    dv.axpy(1.0, &grid.laplacian(v.spectral()));
    let mut dd = forces.director_forcing();
    dd.axpy(1.0, &grid.laplacian(d.spectral()));
    Ok((dv, dd))
}

/// One classical explicit RK4 step of the same semi-discrete system.
pub fn step_rk4(grid: &SpectralGrid, state: &SimState, params: &SimParams) -> Result<SimState> {
    check_epsilon(params.epsilon)?;
    let mut prev = state.clone();
    prev.rebase(params.dt_effective());
    let dt = prev.dt;
    let (eps, dealias) = (params.epsilon, params.dealias_on);

    let stage = |base_v: &Spectrum, base_d: &Spectrum, kv: &Spectrum, kd: &Spectrum, h: f64| -> Result<(Field, Field)> {
        let mut v = base_v.clone();
        v.axpy(h, kv);
        let mut d = base_d.clone();
        d.axpy(h, kd);
        Ok((Field::from_spectral(grid, v)?, Field::from_spectral(grid, d)?))
    };

    let (v0, d0) = (prev.v.spectral(), prev.d.spectral());
    let (k1v, k1d) = rhs(grid, &prev.v, &prev.d, eps, dealias)?;
    let (v1, d1) = stage(v0, d0, &k1v, &k1d, 0.5 * dt)?;
    let (k2v, k2d) = rhs(grid, &v1, &d1, eps, dealias)?;
    let (v2, d2) = stage(v0, d0, &k2v, &k2d, 0.5 * dt)?;
    let (k3v, k3d) = rhs(grid, &v2, &d2, eps, dealias)?;
    let (v3, d3) = stage(v0, d0, &k3v, &k3d, dt)?;
    let (k4v, k4d) = rhs(grid, &v3, &d3, eps, dealias)?;

    let mut v_hat = v0.clone();
    let mut d_hat = d0.clone();
    for (w, kv, kd) in [(1.0, &k1v, &k1d), (2.0, &k2v, &k2d), (2.0, &k3v, &k3d), (1.0, &k4v, &k4d)] {
        v_hat.axpy(dt * w / 6.0, kv);
        d_hat.axpy(dt * w / 6.0, kd);
    }
    grid.leray_project_in_place(&mut v_hat)?;
    finish(grid, &prev, v_hat, d_hat)
}

/// Dispatches on `params.scheme`.
pub fn step(grid: &SpectralGrid, state: &SimState, params: &SimParams) -> Result<SimState> {
    match params.scheme {
        Scheme::Imex1 => step_imex(grid, state, params),
        Scheme::Rk4Reference => step_rk4(grid, state, params),
    }
}

/// Number of steps of size `dt` needed to reach `t_end` from zero.
pub fn steps_to_reach(t_end: f64, dt: f64) -> u64 {
    if t_end <= 0.0 {
        return 0;
    }
    let raw = t_end / dt;
    let rounded = raw.round();
    if (raw - rounded).abs() <= 1e-9 * raw.max(1.0) {
        rounded as u64
    } else {
        raw.ceil() as u64
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SimState,
    /// State one step before `state`, when at least one step was taken.
    pub previous: Option<SimState>,
    pub trajectory: Vec<EnergySample>,
}

/// Steps from `init` until `t ≥ t_end`. The sink sees the initial state and
/// every subsequent one; it receives an energy sample at step 0, every
/// `sample_every` steps, and at the final step.
pub fn run<F>(
    grid: &SpectralGrid,
    params: &SimParams,
    init: &SimState,
    sample_every: u64,
    mut sink: F,
) -> Result<RunOutput>
where
    F: FnMut(&SimState, Option<&EnergySample>) -> Result<()>,
{
    params.validate()?;
    let dt = params.dt_effective();
    let total = steps_to_reach(params.t_end - init.t(), dt);
    if total == 0 {
        return Ok(RunOutput {
            state: init.clone(),
            previous: None,
            trajectory: Vec::new(),
        });
    }
    let every = sample_every.max(1);
    let mut state = init.clone();
    state.rebase(dt);
    let mut trajectory = Vec::new();
    let first = energy(grid, &state, params.epsilon, params.dealias_on)?;
    sink(&state, Some(&first))?;
    trajectory.push(first);
    let mut previous = None;
    for i in 1..=total {
        let next = step(grid, &state, params)?;
        previous = Some(std::mem::replace(&mut state, next));
        if i % every == 0 || i == total {
            let sample = energy(grid, &state, params.epsilon, params.dealias_on)?;
            sink(&state, Some(&sample))?;
            trajectory.push(sample);
        } else {
            sink(&state, None)?;
        }
    }
    Ok(RunOutput {
        state,
        previous,
        trajectory,
    })
}

/// Pressure with zero mean, from `−Δp = div[(v·∇)v + div(∇d ⊙ ∇d)]`.
pub fn recover_pressure(grid: &SpectralGrid, state: &SimState, dealias: bool) -> Result<Samples> {
    let p_hat = pressure_spectrum(grid, state, dealias)?;
    grid.inverse(&p_hat)
}

/// Nonlinearity `(v·∇)v + div(∇d ⊙ ∇d)` in Fourier space, the latter via
/// `∇(|∇d|²/2) + (∇d)ᵀ Δd`.
pub fn momentum_nonlinearity(grid: &SpectralGrid, state: &SimState, dealias: bool) -> Result<Spectrum> {
    let grad_v = grid.inverse(&grid.gradient(state.v.spectral()))?;
    let grad_d = grid.inverse(&grid.gradient(state.d.spectral()))?;
    let lap_d = grid.inverse(&grid.laplacian(state.d.spectral()))?;
    let mut nl = grid.forward_dealiased(&advect_samples(state.v.physical(), &grad_v), dealias)?;
    let minus_tail = grid.forward_dealiased(&contract_gradient(&grad_d, &lap_d), dealias)?;
    nl.axpy(-1.0, &minus_tail);
    let n = grid.n();
    let nn = n * n;
    let mut half_sq = Samples::zeros(n, 1);
    {
        let dst = half_sq.comp_mut(0);
        for c in 0..grad_d.comps() {
            for (x, g) in dst.iter_mut().zip(grad_d.comp(c)) {
                *x += 0.5 * g * g;
            }
        }
    }
    let grad_half = grid.gradient(&grid.forward_dealiased(&half_sq, dealias)?);
    for c in 0..2 {
        for x in 0..nn {
            nl.comp_mut(c)[x] += grad_half.comp(c)[x];
        }
    }
    Ok(nl)
}

pub fn pressure_spectrum(grid: &SpectralGrid, state: &SimState, dealias: bool) -> Result<Spectrum> {
    let nl = momentum_nonlinearity(grid, state, dealias)?;
    let div = grid.divergence(&nl)?;
    let mut p = Spectrum::zeros(grid.n(), 1);
    for (idx, z) in p.comp_mut(0).iter_mut().enumerate() {
        let (k1, k2) = grid.deriv_wavenumber(idx);
        let ksq = k1 * k1 + k2 * k2;
        if ksq > 0.0 {
            *z = div.comp(0)[idx] / ksq;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn taylor_green(n: usize) -> Samples {
        Samples::from_fn(n, 2, |x, y| vec![x.sin() * y.cos(), -x.cos() * y.sin()])
    }

    fn const_director(n: usize) -> Samples {
        let s = 1.0 / 3f64.sqrt();
        Samples::from_fn(n, 3, |_, _| vec![s, s, s])
    }

    /// Band-limited director with modes |k|∞ ≤ 2, not unit length.
    fn smooth_director(n: usize) -> Samples {
        Samples::from_fn(n, 3, |x, y| {
            vec![
                0.3 * x.sin() + 0.2 * (x + 2.0 * y).cos(),
                0.4 * y.cos() - 0.1 * (2.0 * x).sin(),
                0.5 + 0.2 * (x - y).sin(),
            ]
        })
    }

    #[test]
    fn gl_term_examples() {
        let g = SpectralGrid::new(16).unwrap();
        let unit = Samples::from_fn(16, 3, |x, _| vec![x.cos(), x.sin(), 0.0]);
        assert!(gl_samples(&unit, 0.3).unwrap().max_abs() < 1e-13);
        assert_eq!(gl_samples(&Samples::zeros(16, 3), 0.3).unwrap().max_abs(), 0.0);
        let half = Samples::from_fn(16, 3, |_, _| vec![0.5, 0.0, 0.0]);
        let out = g.inverse(&gl_term(&g, &half, 0.5, true).unwrap()).unwrap();
        assert!(out.comp(0).iter().all(|x| (x - 1.5).abs() < 1e-13));
        assert!(out.comp(1).iter().chain(out.comp(2)).all(|x| x.abs() < 1e-14));
        assert!(gl_term(&g, &half, 0.0, true).is_err());
    }

    #[test]
    fn stress_force_vanishes_for_constant_and_equator() {
        let g = SpectralGrid::new(32).unwrap();
        let c = Field::from_physical(&g, const_director(32)).unwrap();
        assert!(stress_force(&g, &c, 0.1, true).unwrap().max_abs() < 1e-14);
        let eq = Field::from_physical(&g, Samples::from_fn(32, 3, |x, _| vec![x.cos(), x.sin(), 0.0])).unwrap();
        let f = g.inverse(&stress_force(&g, &eq, 0.1, true).unwrap()).unwrap();
        assert!(f.max_abs() < 1e-12);
    }

    #[test]
    fn identity_and_divergence_forms_agree() {
        let n = 32;
        let g = SpectralGrid::new(n).unwrap();
        let d = Field::from_physical(&g, smooth_director(n)).unwrap();
        let a = g.inverse(&stress_force(&g, &d, 0.7, true).unwrap()).unwrap();
        let b = g.inverse(&stress_force_divergence_form(&g, &d, true).unwrap()).unwrap();
        let err = max_diff(a.as_slice(), b.as_slice());
        assert!(err <= 1e-10, "identity vs divergence form: {err}");
        assert!(g.max_divergence(&stress_force(&g, &d, 0.7, true).unwrap()).unwrap() <= 1e-12);
    }

    #[test]
    fn advect_examples() {
        let n = 16;
        let g = SpectralGrid::new(n).unwrap();
        let f = Field::from_physical(&g, Samples::from_fn(n, 1, |x, _| vec![x.sin()])).unwrap();
        assert_eq!(g.inverse(&advect(&g, &Samples::zeros(n, 2), &f, true).unwrap()).unwrap().max_abs(), 0.0);
        let one = Field::from_physical(&g, Samples::from_fn(n, 1, |_, _| vec![2.0])).unwrap();
        let v = taylor_green(n);
        assert!(advect(&g, &v, &one, true).unwrap().max_abs() < 1e-15);
        let unit_x = Samples::from_fn(n, 2, |_, _| vec![1.0, 0.0]);
        let out = g.inverse(&advect(&g, &unit_x, &f, true).unwrap()).unwrap();
        let expect = Samples::from_fn(n, 1, |x, _| vec![x.cos()]);
        assert!(max_diff(out.as_slice(), expect.as_slice()) < 1e-13);
    }

    #[test]
    fn constant_state_is_a_fixed_point() {
        let n = 16;
        let g = SpectralGrid::new(n).unwrap();
        let s = SimState::new(&g, Samples::zeros(n, 2), const_director(n)).unwrap();
        let p = SimParams::new(0.2, n, 1e-3, 1.0);
        let next = step_imex(&g, &s, &p).unwrap();
        assert!(max_diff(next.d.physical().as_slice(), s.d.physical().as_slice()) <= 1e-14);
        assert!(next.v.physical().max_abs() <= 1e-14);
        assert_eq!(next.step, 1);
    }

    #[test]
    fn taylor_green_decays_exactly() {
        let n = 32;
        let g = SpectralGrid::new(n).unwrap();
        let v0 = taylor_green(n);
        let mut s = SimState::new(&g, v0.clone(), const_director(n)).unwrap();
        let p = SimParams::new(0.5, n, 1e-4, 0.1);
        for _ in 0..1000 {
            s = step_imex(&g, &s, &p).unwrap();
        }
        assert!((s.t() - 0.1).abs() < 1e-12);
        let decay = (-2.0 * s.t()).exp();
        let err = s
            .v
            .physical()
            .as_slice()
            .iter()
            .zip(v0.as_slice())
            .map(|(a, b)| (a - decay * b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 2e-5, "Taylor-Green error {err}");
    }

    #[test]
    fn stabilized_step_is_fixed_on_constant_data() {
        let n = 8;
        let g = SpectralGrid::new(n).unwrap();
        let s = SimState::new(&g, Samples::zeros(n, 2), const_director(n)).unwrap();
        let mut p = SimParams::new(0.01, n, 1e-2, 1.0);
        p.stabilization = 2.0;
        let next = step_imex(&g, &s, &p).unwrap();
        assert_eq!(next.dt, 1e-2);
        assert!(max_diff(next.d.physical().as_slice(), s.d.physical().as_slice()) <= 1e-14);
    }

    #[test]
    fn step_commutes_with_target_rotation() {
        let n = 16;
        let g = SpectralGrid::new(n).unwrap();
        let d = smooth_director(n);
        let (c, s) = (0.6_f64, 0.8_f64);
        // rotation about the axis (0, 0, 1) followed by a swap of axes 2 and 3 (still orthogonal)
        let rot = [[c, -s, 0.0], [0.0, 0.0, 1.0], [s, c, 0.0]];
        let rotate = |f: &Samples| {
            let mut out = Samples::zeros(n, 3);
            for i in 0..3 {
                for j in 0..3 {
                    for x in 0..n * n {
                        out.comp_mut(i)[x] += rot[i][j] * f.comp(j)[x];
                    }
                }
            }
            out
        };
        let v = taylor_green(n);
        let p = SimParams::new(0.5, n, 1e-3, 1.0);
        let a = step_imex(&g, &SimState::new(&g, v.clone(), d.clone()).unwrap(), &p).unwrap();
        let b = step_imex(&g, &SimState::new(&g, v, rotate(&d)).unwrap(), &p).unwrap();
        let ra = rotate(a.d.physical());
        assert!(max_diff(ra.as_slice(), b.d.physical().as_slice()) <= 1e-12);
        assert!(max_diff(a.v.physical().as_slice(), b.v.physical().as_slice()) <= 1e-12);
    }

    #[test]
    fn forced_large_step_blows_up() {
        let n = 16;
        let g = SpectralGrid::new(n).unwrap();
        let d = Samples::from_fn(n, 3, |x, y| {
            let b = 1.0 + 0.5 * x.sin() * y.sin();
            vec![b.sin(), 0.0, b.cos()]
        });
        let init = SimState::new(&g, Samples::zeros(n, 2), d).unwrap();
        let mut p = SimParams::new(1e-6, n, 1e-2, 1.0);
        p.enforce_dt_guard = false;
        let err = run(&g, &p, &init, 1, |_, _| Ok(())).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }), "{err:?}");
    }

    #[test]
    fn run_with_zero_horizon_returns_init() {
        let n = 8;
        let g = SpectralGrid::new(n).unwrap();
        let s = SimState::new(&g, Samples::zeros(n, 2), const_director(n)).unwrap();
        let p = SimParams::new(0.5, n, 1e-3, 0.0);
        let out = run(&g, &p, &s, 1, |_, _| Ok(())).unwrap();
        assert!(out.trajectory.is_empty());
        assert_eq!(out.state, s);
    }

    #[test]
    fn pressure_of_rest_and_taylor_green() {
        let n = 32;
        let g = SpectralGrid::new(n).unwrap();
        let rest = SimState::new(&g, Samples::zeros(n, 2), const_director(n)).unwrap();
        assert!(recover_pressure(&g, &rest, true).unwrap().max_abs() < 1e-15);

        let tg = SimState::new(&g, taylor_green(n), const_director(n)).unwrap();
        let p = recover_pressure(&g, &tg, true).unwrap();
        // (v·∇)v = (sin 2x₁, sin 2x₂)/2, whose divergence cos 2x₁ + cos 2x₂ equals −Δ of:
        let expect = Samples::from_fn(n, 1, |x, y| vec![((2.0 * x).cos() + (2.0 * y).cos()) / 4.0]);
        assert!(max_diff(p.as_slice(), expect.as_slice()) < 1e-13);
    }

    #[test]
    fn pressure_gradient_balances_gradient_part_of_nonlinearity() {
        let n = 32;
        let g = SpectralGrid::new(n).unwrap();
        let v = Samples::from_fn(n, 2, |x, y| vec![0.3 * (x + y).sin(), -0.3 * (x + y).sin() + 0.2 * x.cos()]);
        let s = SimState::new(&g, v, smooth_director(n)).unwrap();
        let nl = momentum_nonlinearity(&g, &s, true).unwrap();
        let projected = g.leray_project(&nl).unwrap();
        let grad_p = g.gradient(&pressure_spectrum(&g, &s, true).unwrap());
        let mut residual = grad_p.clone();
        residual.axpy(1.0, &nl);
        residual.axpy(-1.0, &projected);
        // zero mode of the nonlinearity is not a gradient
        for c in 0..2 {
            residual.set_coeff(c, 0, 0, Complex64::new(0.0, 0.0));
        }
        let r = g.inverse(&residual).unwrap();
        assert!(r.max_abs() <= 1e-10, "{}", r.max_abs());
    }
}
