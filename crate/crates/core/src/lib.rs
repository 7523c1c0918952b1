//! Pseudo-spectral solver for the Ginzburg–Landau relaxation of the simplified
//! Ericksen–Leslie nematic liquid-crystal flow on the 2-torus, together with a
//! sharp-constraint comparison solver and the diagnostics used to study the
//! `ε → 0` limit: energy audits, the maximum principle, penalty and polar
//! scaling, concentration-point detection, and weak-form residuals.

pub mod concentration;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod init;
pub mod limit;
pub mod output;
pub mod snapshot;
pub mod spectral;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use spectral::{Field, Samples, SpectralGrid, Spectrum};
pub use state::{Scheme, SimParams, SimState};
