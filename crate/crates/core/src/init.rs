//! Registered initial-data generators. Every generator returns a
//! divergence-free velocity and a unit director.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::concentration::periodic_distance;
use crate::error::{Error, Result};
use crate::spectral::{Field, Samples, SpectralGrid, Spectrum};
use crate::state::SimState;

pub const GENERATORS: [&str; 4] = ["constant", "smooth-wave", "defect-pair", "random-smooth"];

fn parse<T: DeserializeOwned + Default>(name: &str, params: &serde_json::Value) -> Result<T> {
    if params.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(params.clone()).map_err(|e| Error::param(format!("{name}: {e}")))
}

fn unit(v: [f64; 3]) -> Result<[f64; 3]> {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::param("direction must be a non-zero vector"));
    }
    Ok([v[0] / r, v[1] / r, v[2] / r])
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantParams {
    pub direction: [f64; 3],
}

impl Default for ConstantParams {
    fn default() -> Self {
        Self { direction: [0.0, 0.0, 1.0] }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothWaveParams {
    pub beta0: f64,
    pub a: f64,
    pub b: f64,
    /// Taylor–Green velocity amplitude.
    pub amplitude: f64,
}

impl Default for SmoothWaveParams {
    fn default() -> Self {
        Self {
            beta0: PI / 3.0,
            a: 0.6,
            b: 0.8,
            amplitude: 0.5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefectPairParams {
    pub sigma: f64,
    pub centers: [[f64; 2]; 2],
    pub windings: [i32; 2],
}

impl Default for DefectPairParams {
    fn default() -> Self {
        Self {
            sigma: 0.5,
            centers: [[PI / 2.0, PI], [1.5 * PI, PI]],
            windings: [1, -1],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomSmoothParams {
    pub amplitude_v: f64,
    pub amplitude_d: f64,
    pub k_max: i64,
    pub direction: [f64; 3],
}

impl Default for RandomSmoothParams {
    fn default() -> Self {
        Self {
            amplitude_v: 0.5,
            amplitude_d: 0.3,
            k_max: 4,
            direction: [0.0, 0.0, 1.0],
        }
    }
}

/// Builds the initial state of generator `name`.
pub fn generate_initial(name: &str, params: &serde_json::Value, grid: &SpectralGrid, seed: u64) -> Result<SimState> {
    match name {
        "constant" => constant(grid, &parse(name, params)?),
        "smooth-wave" => smooth_wave(grid, &parse(name, params)?),
        "defect-pair" => defect_pair(grid, &parse(name, params)?),
        "random-smooth" => random_smooth(grid, &parse(name, params)?, seed),
        other => Err(Error::UnknownGenerator(other.to_string())),
    }
}

pub fn constant(grid: &SpectralGrid, p: &ConstantParams) -> Result<SimState> {
    let u = unit(p.direction)?;
    SimState::new(grid, Samples::zeros(grid.n(), 2), Samples::from_fn(grid.n(), 3, |_, _| u.to_vec()))
}

fn solenoidal(grid: &SpectralGrid, v: Samples) -> Result<Field> {
    let mut s = grid.forward(&v)?;
    grid.leray_project_in_place(&mut s)?;
    for c in 0..2 {
        s.set_coeff(c, 0, 0, Complex64::new(0.0, 0.0));
    }
    Field::from_spectral(grid, s)
}

pub fn smooth_wave(grid: &SpectralGrid, p: &SmoothWaveParams) -> Result<SimState> {
    let n = grid.n();
    let d = Samples::from_fn(n, 3, |x, y| {
        let beta = p.beta0 + p.a * x.sin() * y.sin();
        let gamma = p.b * (x.sin() + y.cos());
        vec![beta.sin() * gamma.cos(), beta.sin() * gamma.sin(), beta.cos()]
    });
    let v = Samples::from_fn(n, 2, |x, y| {
        vec![p.amplitude * x.sin() * y.cos(), -p.amplitude * x.cos() * y.sin()]
    });
    Ok(SimState {
        v: solenoidal(grid, v)?,
        ..SimState::new(grid, Samples::zeros(n, 2), d)?
    })
}

/// `C∞` step from 0 on `s ≤ 0` to 1 on `s ≥ 1`.
pub fn smooth_step(s: f64) -> f64 {
    let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (g(s), g(1.0 - s));
    a / (a + b)
}

/// Two disks of radius `σ` in which `d` wraps the sphere once with the given
/// windings; the polar angle runs from `π` at each center to `0` on the
/// circle, and `d` is the north pole elsewhere.
pub fn defect_pair(grid: &SpectralGrid, p: &DefectPairParams) -> Result<SimState> {
    if !(p.sigma > 0.0 && p.sigma < PI / 2.0) {
        return Err(Error::param(format!("defect-pair sigma must lie in (0, pi/2), got {}", p.sigma)));
    }
    let c = [(p.centers[0][0], p.centers[0][1]), (p.centers[1][0], p.centers[1][1])];
    if periodic_distance(c[0], c[1]) < 2.0 * p.sigma {
        return Err(Error::param("defect-pair disks overlap"));
    }
    let wrap = |t: f64| {
        let w = t.rem_euclid(2.0 * PI);
        if w > PI {
            w - 2.0 * PI
        } else {
            w
        }
    };
    let d = Samples::from_fn(grid.n(), 3, |x, y| {
        for (center, &m) in c.iter().zip(&p.windings) {
            let (dx, dy) = (wrap(x - center.0), wrap(y - center.1));
            let rho = dx.hypot(dy);
            if rho < p.sigma {
                let polar = PI * (1.0 - smooth_step(rho / p.sigma));
                let theta = m as f64 * dy.atan2(dx);
                return vec![polar.sin() * theta.cos(), polar.sin() * theta.sin(), polar.cos()];
            }
        }
        vec![0.0, 0.0, 1.0]
    });
    SimState::new(grid, Samples::zeros(grid.n(), 2), d)
}

fn random_band(grid: &SpectralGrid, rng: &mut ChaCha8Rng, k_max: i64) -> Result<Spectrum> {
    let mut s = Spectrum::zeros(grid.n(), 1);
    for k1 in -k_max..=k_max {
        for k2 in -k_max..=k_max {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let decay = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
            s.set_coeff(0, k1, k2, z);
        }
    }
    // Symmetrize so the field is real.
    let real = grid.inverse(&s)?;
    grid.forward(&real)
}

fn scale_to(f: &mut Samples, amplitude: f64) {
    let m = f.max_abs();
    if m > 0.0 {
        for x in f.as_mut_slice() {
            *x *= amplitude / m;
        }
    }
}

pub fn random_smooth(grid: &SpectralGrid, p: &RandomSmoothParams, seed: u64) -> Result<SimState> {
    if !(p.amplitude_d >= 0.0 && p.amplitude_d <= 0.5) {
        return Err(Error::param("random-smooth amplitude_d must lie in [0, 0.5]"));
    }
    if !(p.amplitude_v >= 0.0) {
        return Err(Error::param("random-smooth amplitude_v must be non-negative"));
    }
    if p.k_max < 1 || 3 * p.k_max > grid.n() as i64 {
        return Err(Error::param("random-smooth k_max must lie in [1, n/3]"));
    }
    let base = unit(p.direction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();

    let psi = random_band(grid, &mut rng, p.k_max)?;
    let mut v = grid.inverse(&grid.perp_gradient(&psi)?)?;
    scale_to(&mut v, p.amplitude_v);

    let parts = (0..3)
        .map(|_| random_band(grid, &mut rng, p.k_max).and_then(|s| grid.inverse(&s)))
        .collect::<Result<Vec<_>>>()?;
    let mut pert = Samples::stack(&parts.iter().collect::<Vec<_>>())?;
    scale_to(&mut pert, p.amplitude_d);
    let mut d = Samples::zeros(n, 3);
    for c in 0..3 {
        for (o, q) in d.comp_mut(c).iter_mut().zip(pert.comp(c)) {
            *o = base[c] + q;
        }
    }
    let norms = d.norms();
    for c in 0..3 {
        for (o, r) in d.comp_mut(c).iter_mut().zip(&norms) {
            *o /= r;
        }
    }
    Ok(SimState {
        v: solenoidal(grid, v)?,
        ..SimState::new(grid, Samples::zeros(n, 2), d)?
    })
}
