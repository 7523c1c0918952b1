//! Problem parameters and the evolving `(v, d)` state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, Samples, SpectralGrid};

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// First-order IMEX Euler, implicit diffusion.
    Imex1,
    /// Fully explicit classical RK4; small-grid reference only.
    Rk4Reference,
}

fn default_true() -> bool {
    true
}

fn default_scheme() -> Scheme {
    Scheme::Imex1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub epsilon: f64,
    pub n: usize,
    pub dt_requested: f64,
    pub t_end: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Linear stabilization constant `S` for the penalty term.
    #[serde(default)]
    pub stabilization: f64,
    /// Concentration threshold; `None` means 5% of the initial elastic energy.
    #[serde(default)]
    pub eps0_sq: Option<f64>,
    /// Ball radius for concentration analysis; `None` means `16h`, capped below `π`.
    #[serde(default)]
    pub ball_radius: Option<f64>,
    #[serde(default = "default_true")]
    pub dealias_on: bool,
    #[serde(default)]
    pub seed: u64,
    /// Clamp `dt` to `ε²/4` for the unstabilized IMEX scheme.
    #[serde(default = "default_true")]
    pub enforce_dt_guard: bool,
}

impl SimParams {
    /// Parameters with the documented defaults.
    pub fn new(epsilon: f64, n: usize, dt_requested: f64, t_end: f64) -> Self {
        Self {
            epsilon,
            n,
            dt_requested,
            t_end,
            scheme: Scheme::Imex1,
            stabilization: 0.0,
            eps0_sq: None,
            ball_radius: None,
            dealias_on: true,
            seed: 0,
            enforce_dt_guard: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::param(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        if !(self.dt_requested > 0.0) {
            return Err(Error::param("dt_requested must be positive"));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::param("t_end must be non-negative"));
        }
        if !(self.stabilization >= 0.0) {
            return Err(Error::param("stabilization must be non-negative"));
        }
        if let Some(e) = self.eps0_sq {
            if !(e > 0.0) {
                return Err(Error::param("eps0_sq must be positive"));
            }
        }
        if let Some(r) = self.ball_radius {
            if !(r > 0.0 && r < std::f64::consts::PI) {
                return Err(Error::param("ball_radius must lie in (0, pi)"));
            }
        }
        if self.n < 8 || self.n % 2 != 0 {
            return Err(Error::InvalidGrid(self.n));
        }
        Ok(())
    }

    /// Time step actually taken.
    pub fn dt_effective(&self) -> f64 {
        if self.scheme == Scheme::Imex1 && self.stabilization == 0.0 && self.enforce_dt_guard {
            self.dt_requested.min(0.25 * self.epsilon * self.epsilon)
        } else {
            self.dt_requested
        }
    }

    pub fn ball_radius_or_default(&self) -> f64 {
        self.ball_radius
            .unwrap_or_else(|| default_ball_radius(self.n))
    }
}

/// `16h`, capped at `π/2` so coarse grids still get an admissible ball.
pub fn default_ball_radius(n: usize) -> f64 {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    (16.0 * h).min(std::f64::consts::FRAC_PI_2)
}

/// Snapshot of the flow at one time level. The pressure is not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Time at which `step` was zero.
    pub t_start: f64,
    pub step: u64,
    pub dt: f64,
    /// Velocity, two components.
    pub v: Field,
    /// Director, three components.
    pub d: Field,
}

impl SimState {
    pub fn new(grid: &SpectralGrid, v: Samples, d: Samples) -> Result<Self> {
        if v.comps() != 2 || d.comps() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "state needs 2 velocity and 3 director components, got {} and {}",
                v.comps(),
                d.comps()
            )));
        }
        Ok(Self {
            t_start: 0.0,
            step: 0,
            dt: 0.0,
            v: Field::from_physical(grid, v)?,
            d: Field::from_physical(grid, d)?,
        })
    }

    pub fn t(&self) -> f64 {
        self.t_start + self.step as f64 * self.dt
    }

    pub fn n(&self) -> usize {
        self.v.n()
    }

    /// Restarts the step counter at the current time with a new step size.
    pub fn rebase(&mut self, dt: f64) {
        if self.dt != dt {
            self.t_start = self.t();
            self.step = 0;
            self.dt = dt;
        }
    }
}

/// Which constraint the director is expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectorMode {
    /// `|d| ≤ 1` (maximum principle).
    Penalized,
    /// `|d| ≡ 1`.
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const DIVERGENCE_TOL: f64 = 1e-12;
pub const MEAN_VELOCITY_TOL: f64 = 1e-13;
pub const MAX_PRINCIPLE_TOL: f64 = 1e-8;
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Checks the standing invariants of a state without modifying it.
pub fn validate(grid: &SpectralGrid, state: &SimState, mode: DirectorMode) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let finite = state.v.physical().is_finite() && state.d.physical().is_finite();
    checks.push(Check {
        name: "finite",
        passed: finite,
        value: if finite { 0.0 } else { f64::NAN },
        limit: 0.0,
    });

    let div = grid.max_divergence(state.v.spectral())?;
    checks.push(Check {
        name: "divergence",
        passed: div <= DIVERGENCE_TOL,
        value: div,
        limit: DIVERGENCE_TOL,
    });

    let vs = state.v.spectral();
    let mean = vs.coeff(0, 0, 0).norm().hypot(vs.coeff(1, 0, 0).norm());
    checks.push(Check {
        name: "mean_velocity",
        passed: mean <= MEAN_VELOCITY_TOL,
        value: mean,
        limit: MEAN_VELOCITY_TOL,
    });

    let norms = state.d.physical().norms();
    match mode {
        DirectorMode::Penalized => {
            let max = norms.iter().cloned().fold(0.0, f64::max);
            checks.push(Check {
                name: "max_principle",
                passed: max <= 1.0 + MAX_PRINCIPLE_TOL,
                value: max,
                limit: 1.0 + MAX_PRINCIPLE_TOL,
            });
        }
        DirectorMode::Constrained => {
            let dev = norms.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
            checks.push(Check {
                name: "unit_norm",
                passed: dev <= UNIT_NORM_TOL,
                value: dev,
                limit: UNIT_NORM_TOL,
            });
        }
    }

    let t = state.t();
    let expected = state.t_start + state.step as f64 * state.dt;
    let rel = (t - expected).abs() / expected.abs().max(1.0);
    checks.push(Check {
        name: "time",
        passed: t >= 0.0 && rel <= 1e-12,
        value: t,
        limit: 1e-12,
    });
    Ok(ValidationReport { checks })
}
