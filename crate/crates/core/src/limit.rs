//! Comparison solver for the sharp-constraint system
//!
//! ```text
//! ∂t d + (v·∇)d = Δd + |∇d|² d,   |d| ≡ 1
//! ```
//!
//! coupled to the same momentum equation. The `|∇d|²d` term is never evaluated
//! in the director update: an implicit-diffusion / explicit-advection predictor
//! is followed by pointwise renormalization onto the sphere.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{check_pair, ResidualEntry, ResidualTable};
use crate::dynamics::{advect_samples, step, steps_to_reach, stress_from_parts};
use crate::error::{Error, Result};
use crate::spectral::{Field, Samples, SpectralGrid, Spectrum};
use crate::state::{SimParams, SimState};

/// Predictors shorter than this cannot be renormalized.
pub const MIN_PREDICTOR_NORM: f64 = 1e-8;

/// Tension of the constrained problem, `Δd + |∇d|² d`, in Fourier space.
pub fn harmonic_tension(grid: &SpectralGrid, d: &Field, grad_d: &Samples, dealias: bool) -> Result<Spectrum> {
    let n = grid.n();
    let nn = n * n;
    let mut g2 = vec![0.0; nn];
    for c in 0..grad_d.comps() {
        for (o, x) in g2.iter_mut().zip(grad_d.comp(c)) {
            *o += x * x;
        }
    }
    let mut prod = d.physical().clone();
    for c in 0..3 {
        for (x, w) in prod.comp_mut(c).iter_mut().zip(&g2) {
            *x *= w;
        }
    }
    let mut tau = grid.laplacian(d.spectral());
    tau.axpy(1.0, &grid.forward_dealiased(&prod, dealias)?);
    Ok(tau)
}

/// Projects every node of `d` onto the unit sphere.
pub fn renormalize(d: &mut Samples) -> std::result::Result<(), f64> {
    let norms = d.norms();
    let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min >= MIN_PREDICTOR_NORM) {
        return Err(min);
    }
    for c in 0..d.comps() {
        for (x, r) in d.comp_mut(c).iter_mut().zip(&norms) {
            *x /= r;
        }
    }
    Ok(())
}

/// One projection step of the constrained system.
pub fn step_limit(grid: &SpectralGrid, state: &SimState, params: &SimParams) -> Result<SimState> {
    let mut prev = state.clone();
    prev.rebase(params.dt_effective());
    let dt = prev.dt;
    let dealias = params.dealias_on;
    let nn = grid.n() * grid.n();

    let grad_d = grid.inverse(&grid.gradient(prev.d.spectral()))?;
    let grad_v = grid.inverse(&grid.gradient(prev.v.spectral()))?;
    let tau = grid.inverse(&harmonic_tension(grid, &prev.d, &grad_d, dealias)?)?;
    let mut forcing = stress_from_parts(grid, &grad_d, &tau, dealias)?;
    let adv_v = grid.forward_dealiased(&advect_samples(prev.v.physical(), &grad_v), dealias)?;
    forcing.axpy(-1.0, &adv_v);
    grid.leray_project_in_place(&mut forcing)?;
    for c in 0..2 {
        forcing.set_coeff(c, 0, 0, Complex64::new(0.0, 0.0));
    }
    let mut v_hat = prev.v.spectral().clone();
    v_hat.axpy(dt, &forcing);
    for c in 0..2 {
        for (idx, z) in v_hat.comp_mut(c).iter_mut().enumerate() {
            *z /= 1.0 + dt * grid.k_sq(idx);
        }
    }
    grid.leray_project_in_place(&mut v_hat)?;

    let adv_d = grid.forward_dealiased(&advect_samples(prev.v.physical(), &grad_d), dealias)?;
    let mut d_hat = prev.d.spectral().clone();
    d_hat.axpy(-dt, &adv_d);
    for c in 0..3 {
        let comp = d_hat.comp_mut(c);
        for idx in 0..nn {
            comp[idx] /= 1.0 + dt * grid.k_sq(idx);
        }
    }
    let mut d_star = grid.inverse(&d_hat)?;
    let v = Field::from_spectral(grid, v_hat)?;
    let step = prev.step + 1;
    let t = prev.t_start + step as f64 * dt;
    if !v.physical().is_finite() || !d_star.is_finite() {
        return Err(Error::BlowUp {
            t,
            step,
            max_v: v.physical().max_abs(),
            max_d: d_star.norms().into_iter().fold(0.0, f64::max),
        });
    }
    renormalize(&mut d_star).map_err(|min_norm| Error::NormalizationSingularity { t, step, min_norm })?;
    Ok(SimState {
        t_start: prev.t_start,
        step,
        dt,
        v,
        d: Field::from_physical(grid, d_star)?,
    })
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Weak residual of the wedge form of the director equation,
///
/// ```text
/// R(ξ) = ∫ (d ∧ (∂t d + (v·∇)d))·ξ + Σ_j (d ∧ ∂_j d)·∂_j ξ
/// ```
///
/// for `ξ = e_α e^{ik·x}`, `|k|∞ ≤ k_max`, evaluated at `curr` with the
/// backward difference `(d(curr) − d(prev)) / Δt` for `∂t d`.
pub fn wedge_residual(grid: &SpectralGrid, prev: &SimState, curr: &SimState, k_max: i64) -> Result<ResidualTable> {
    let dt = check_pair(prev, curr)?;
    let n = grid.n();
    let nn = n * n;
    let d = curr.d.physical();
    let dp = prev.d.physical();
    let v = curr.v.physical();
    let grad_d = grid.inverse(&grid.gradient(curr.d.spectral()))?;

    // A = d ∧ (∂t d + (v·∇)d), B_j = d ∧ ∂_j d
    let mut a_field = Samples::zeros(n, 3);
    let mut b_field = Samples::zeros(n, 6);
    for x in 0..nn {
        let dx = [d.comp(0)[x], d.comp(1)[x], d.comp(2)[x]];
        let g1 = [grad_d.comp(0)[x], grad_d.comp(2)[x], grad_d.comp(4)[x]];
        let g2 = [grad_d.comp(1)[x], grad_d.comp(3)[x], grad_d.comp(5)[x]];
        let (v1, v2) = (v.comp(0)[x], v.comp(1)[x]);
        let mut w = [0.0; 3];
        for c in 0..3 {
            w[c] = (dx[c] - dp.comp(c)[x]) / dt + v1 * g1[c] + v2 * g2[c];
        }
        let a = cross(dx, w);
        let b1 = cross(dx, g1);
        let b2 = cross(dx, g2);
        for c in 0..3 {
            a_field.comp_mut(c)[x] = a[c];
            b_field.comp_mut(2 * c)[x] = b1[c];
            b_field.comp_mut(2 * c + 1)[x] = b2[c];
        }
    }
    let a_hat = grid.forward(&a_field)?;
    let b_hat = grid.forward(&b_field)?;
    let i = Complex64::new(0.0, 1.0);
    let mut entries = Vec::with_capacity(3 * ((2 * k_max + 1) * (2 * k_max + 1)) as usize);
    for k1 in -k_max..=k_max {
        for k2 in -k_max..=k_max {
            for alpha in 0..3 {
                let r = grid.pair_with_mode(&a_hat, alpha, k1, k2)
                    + i * k1 as f64 * grid.pair_with_mode(&b_hat, 2 * alpha, k1, k2)
                    + i * k2 as f64 * grid.pair_with_mode(&b_hat, 2 * alpha + 1, k1, k2);
                entries.push(ResidualEntry {
                    k1,
                    k2,
                    component: Some(alpha),
                    value: r.norm(),
                });
            }
        }
    }
    Ok(ResidualTable::from_entries(entries))
}

/// Distance between a penalized and a constrained trajectory at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub t: f64,
    pub d_l2: f64,
    pub v_l2: f64,
    pub d_max: f64,
}

fn l2_distance(grid: &SpectralGrid, a: &Samples, b: &Samples) -> f64 {
    let diff: Vec<f64> = (0..grid.n() * grid.n())
        .map(|x| (0..a.comps()).map(|c| (a.comp(c)[x] - b.comp(c)[x]).powi(2)).sum())
        .collect();
    grid.integrate(&diff).sqrt()
}

pub fn compare_states(grid: &SpectralGrid, a: &SimState, b: &SimState) -> CompareRow {
    let d_max = a
        .d
        .physical()
        .as_slice()
        .iter()
        .zip(b.d.physical().as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    CompareRow {
        t: b.t(),
        d_l2: l2_distance(grid, a.d.physical(), b.d.physical()),
        v_l2: l2_distance(grid, a.v.physical(), b.v.physical()),
        d_max,
    }
}

/// Runs the penalized scheme selected by `params` and the projection scheme
/// side by side from `init` with the same step, recording their distance
/// every `sample_every` steps and at the end.
pub fn compare_trajectories(
    grid: &SpectralGrid,
    params: &SimParams,
    init: &SimState,
    sample_every: u64,
) -> Result<Vec<CompareRow>> {
    params.validate()?;
    let dt = params.dt_effective();
    let mut limit_params = params.clone();
    limit_params.enforce_dt_guard = false;
    limit_params.dt_requested = dt;
    let total = steps_to_reach(params.t_end - init.t(), dt);
    let every = sample_every.max(1);
    let mut penalized = init.clone();
    penalized.rebase(dt);
    let mut constrained = penalized.clone();
    let mut rows = vec![compare_states(grid, &penalized, &constrained)];
    for i in 1..=total {
        penalized = step(grid, &penalized, params)?;
        constrained = step_limit(grid, &constrained, &limit_params)?;
        if i % every == 0 || i == total {
            rows.push(compare_states(grid, &penalized, &constrained));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{DirectorMode, Scheme};

    fn equator(n: usize) -> Samples {
        Samples::from_fn(n, 3, |x, _| vec![x.cos(), x.sin(), 0.0])
    }

    fn max_diff(a: &Samples, b: &Samples) -> f64 {
        a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_and_equator_are_fixed_points() {
        let n = 32;
        let g = SpectralGrid::new(n).unwrap();
        let p = SimParams::new(0.1, n, 1e-2, 1.0);
        let c = SimState::new(&g, Samples::zeros(n, 2), Samples::from_fn(n, 3, |_, _| vec![0.0, 0.6, 0.8])).unwrap();
        let next = step_limit(&g, &c, &p).unwrap();
        assert!(max_diff(next.d.physical(), c.d.physical()) < 1e-15);

        let mut s = SimState::new(&g, Samples::zeros(n, 2), equator(n)).unwrap();
        let mut lp = p.clone();
        lp.enforce_dt_guard = false;
        for _ in 0..100 {
            s = step_limit(&g, &s, &lp).unwrap();
            assert!(crate::state::validate(&g, &s, DirectorMode::Constrained).unwrap().passed());
        }
        assert!((s.t() - 1.0).abs() < 1e-12);
        assert!(max_diff(s.d.physical(), &equator(n)) <= 1e-10);
        assert!(s.v.physical().max_abs() <= 1e-10);
    }

    #[test]
    fn renormalization_is_identity_on_unit_fields() {
        let n = 16;
        let mut d = Samples::from_fn(n, 3, |x, y| {
            let b = 0.3 + x.sin() * y.cos();
            vec![b.sin() * x.cos(), b.sin() * x.sin(), b.cos()]
        });
        let orig = d.clone();
        renormalize(&mut d).unwrap();
        assert!(max_diff(&d, &orig) <= 2e-16);
        let mut zero = Samples::zeros(n, 3);
        assert!(renormalize(&mut zero).is_err());
    }

    #[test]
    fn degenerate_predictor_aborts() {
        let n = 8;
        let g = SpectralGrid::new(n).unwrap();
        let s = SimState::new(&g, Samples::zeros(n, 2), Samples::zeros(n, 3)).unwrap();
        let p = SimParams::new(0.1, n, 1e-3, 1.0);
        assert!(matches!(step_limit(&g, &s, &p), Err(Error::NormalizationSingularity { .. })));
    }

    #[test]
    fn step_limit_commutes_with_rotation() {
        let n = 16;
        let g = SpectralGrid::new(n).unwrap();
        let d = Samples::from_fn(n, 3, |x, y| {
            let b = 0.8 + 0.4 * x.sin() * y.sin();
            let c = 0.5 * (x.sin() + y.cos());
            vec![b.sin() * c.cos(), b.sin() * c.sin(), b.cos()]
        });
        let rot = [[0.0, 0.6, 0.8], [1.0, 0.0, 0.0], [0.0, 0.8, -0.6]];
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
        let v = Samples::from_fn(n, 2, |x, y| vec![0.3 * x.sin() * y.cos(), -0.3 * x.cos() * y.sin()]);
        let p = SimParams::new(0.5, n, 1e-3, 1.0);
        let a = step_limit(&g, &SimState::new(&g, v.clone(), d.clone()).unwrap(), &p).unwrap();
        let b = step_limit(&g, &SimState::new(&g, v, rotate(&d)).unwrap(), &p).unwrap();
        assert!(max_diff(&rotate(a.d.physical()), b.d.physical()) <= 1e-12);
        assert!(max_diff(a.v.physical(), b.v.physical()) <= 1e-12);
    }

    #[test]
    fn wedge_residual_of_stationary_maps() {
        let n = 32;
        let g = SpectralGrid::new(n).unwrap();
        for d in [Samples::from_fn(n, 3, |_, _| vec![0.0, 0.0, 1.0]), equator(n)] {
            let mut prev = SimState::new(&g, Samples::zeros(n, 2), d).unwrap();
            prev.dt = 1e-3;
            let mut curr = prev.clone();
            curr.step = 1;
            let r = wedge_residual(&g, &prev, &curr, 4).unwrap();
            assert_eq!(r.entries.len(), 3 * 81);
            assert!(r.max <= 1e-8, "{}", r.max);
        }
    }

    #[test]
    fn tracks_stiff_penalized_reference() {
        let n = 8;
        let g = SpectralGrid::new(n).unwrap();
        let d = Samples::from_fn(n, 3, |x, y| {
            let b = 1.0 + 0.3 * x.sin() * y.sin();
            let c = 0.3 * (x.sin() + y.cos());
            vec![b.sin() * c.cos(), b.sin() * c.sin(), b.cos()]
        });
        let v = Samples::from_fn(n, 2, |x, y| vec![0.2 * x.sin() * y.cos(), -0.2 * x.cos() * y.sin()]);
        let init = SimState::new(&g, v, d).unwrap();
        let t_end = 0.1;

        let mut reference = SimParams::new(1e-3, n, 1e-6, t_end);
        reference.scheme = Scheme::Rk4Reference;
        let penalized = crate::dynamics::run(&g, &reference, &init, u64::MAX, |_, _| Ok(())).unwrap().state;

        let mut lp = SimParams::new(1e-3, n, 1e-4, t_end);
        lp.enforce_dt_guard = false;
        let mut s = init.clone();
        for _ in 0..1000 {
            s = step_limit(&g, &s, &lp).unwrap();
        }
        let row = compare_states(&g, &penalized, &s);
        assert!(row.d_max <= 1e-2, "{row:?}");
        assert!(row.v_l2 <= 1e-2, "{row:?}");
    }
}
