//! Fourier-side primitives on the periodic square `[0, 2π)²`.
//!
//! Samples live at the nodes `x_ab = (a·h, b·h)`, `h = 2π/n`, stored row-major
//! with the `x₁` index outermost. Coefficients use the "mean" normalization
//!
//! ```text
//! f̂_k = (1/n²) Σ_ab f(x_ab) e^{-i k·x_ab},      f(x) = Σ_k f̂_k e^{i k·x}
//! ```
//!
//! so `f̂₀` is the mean of `f` and `(2π)² Σ|f̂_k|² = ∫|f|²` holds exactly for the
//! rectangle rule. Spectral index `(p, q)` carries the wavenumber
//! `(k(p), k(q))` with `k(p) = p` for `p ≤ n/2` and `p − n` otherwise, so the
//! mode set is `{−n/2+1, …, n/2}²` with the Nyquist mode on the positive side.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Real samples of an `m`-component periodic field, component-major.
#[derive(Clone, PartialEq)]
pub struct Samples {
    n: usize,
    comps: usize,
    data: Vec<f64>,
}

/// Fourier coefficients of an `m`-component periodic field, component-major.
#[derive(Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    comps: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for Samples {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Samples {{ n: {}, comps: {} }}", self.n, self.comps)
    }
}

impl fmt::Debug for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Spectrum {{ n: {}, comps: {} }}", self.n, self.comps)
    }
}

impl Samples {
    pub fn zeros(n: usize, comps: usize) -> Self {
        Self {
            n,
            comps,
            data: vec![0.0; comps * n * n],
        }
    }

    pub fn from_vec(n: usize, comps: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != comps * n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples for {comps} components on {n}x{n}, got {}",
                comps * n * n,
                data.len()
            )));
        }
        Ok(Self { n, comps, data })
    }

    /// Evaluates `f(x₁, x₂)` at every node for each component.
    pub fn from_fn(n: usize, comps: usize, mut f: impl FnMut(f64, f64) -> Vec<f64>) -> Self {
        let h = 2.0 * PI / n as f64;
        let mut out = Self::zeros(n, comps);
        for a in 0..n {
            for b in 0..n {
                let vals = f(a as f64 * h, b as f64 * h);
                debug_assert_eq!(vals.len(), comps);
                for (c, v) in vals.into_iter().enumerate() {
                    out.data[c * n * n + a * n + b] = v;
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn comps(&self) -> usize {
        self.comps
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.data[c * nn..(c + 1) * nn]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let nn = self.n * self.n;
        &mut self.data[c * nn..(c + 1) * nn]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Value of component `c` at node `(a, b)`.
    pub fn at(&self, c: usize, a: usize, b: usize) -> f64 {
        self.data[c * self.n * self.n + a * self.n + b]
    }

    /// Pointwise Euclidean norm over components.
    pub fn norms(&self) -> Vec<f64> {
        let nn = self.n * self.n;
        (0..nn)
            .map(|i| {
                (0..self.comps)
                    .map(|c| self.data[c * nn + i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Stacks single-component samples into one field.
    pub fn stack(parts: &[&Samples]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::ShapeMismatch("cannot stack zero fields".into()))?;
        let n = first.n;
        let mut data = Vec::new();
        let mut comps = 0;
        for p in parts {
            if p.n != n {
                return Err(Error::ShapeMismatch("grid sizes differ".into()));
            }
            comps += p.comps;
            data.extend_from_slice(&p.data);
        }
        Ok(Self { n, comps, data })
    }

    /// Circular shift by `(da, db)` nodes: `out(a, b) = self(a − da, b − db)`.
    pub fn shifted(&self, da: usize, db: usize) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n, self.comps);
        for c in 0..self.comps {
            let src = self.comp(c);
            let dst = out.comp_mut(c);
            for a in 0..n {
                for b in 0..n {
                    dst[((a + da) % n) * n + (b + db) % n] = src[a * n + b];
                }
            }
        }
        out
    }
}

impl Spectrum {
    pub fn zeros(n: usize, comps: usize) -> Self {
        Self {
            n,
            comps,
            data: vec![Complex64::new(0.0, 0.0); comps * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn comps(&self) -> usize {
        self.comps
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        let nn = self.n * self.n;
        &self.data[c * nn..(c + 1) * nn]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        let nn = self.n * self.n;
        &mut self.data[c * nn..(c + 1) * nn]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Coefficient of component `c` at integer wavenumber `(k1, k2)`.
    pub fn coeff(&self, c: usize, k1: i64, k2: i64) -> Complex64 {
        let n = self.n as i64;
        let p = k1.rem_euclid(n) as usize;
        let q = k2.rem_euclid(n) as usize;
        self.data[c * self.n * self.n + p * self.n + q]
    }

    pub fn set_coeff(&mut self, c: usize, k1: i64, k2: i64, value: Complex64) {
        let n = self.n as i64;
        let p = k1.rem_euclid(n) as usize;
        let q = k2.rem_euclid(n) as usize;
        let nn = self.n * self.n;
        self.data[c * nn + p * self.n + q] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// `self + alpha · other`, componentwise.
    pub fn axpy(&mut self, alpha: f64, other: &Spectrum) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * alpha;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for x in &mut self.data {
            *x *= alpha;
        }
    }

    pub fn stack(parts: &[&Spectrum]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::ShapeMismatch("cannot stack zero spectra".into()))?;
        let n = first.n;
        let mut data = Vec::new();
        let mut comps = 0;
        for p in parts {
            if p.n != n {
                return Err(Error::ShapeMismatch("grid sizes differ".into()));
            }
            comps += p.comps;
            data.extend_from_slice(&p.data);
        }
        Ok(Self { n, comps, data })
    }

    /// Splits off component `c` as its own single-component spectrum.
    pub fn component(&self, c: usize) -> Spectrum {
        Spectrum {
            n: self.n,
            comps: 1,
            data: self.comp(c).to_vec(),
        }
    }
}

/// Discretization of the torus: node spacing, wavenumber tables, dealias mask
/// and the FFT plans for one axis.
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    h: f64,
    /// Integer wavenumber per axis index.
    k: Vec<i64>,
    /// Wavenumber used by first derivatives (Nyquist entry zeroed).
    k_deriv: Vec<f64>,
    mask: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpectralGrid {{ n: {} }}", self.n)
    }
}

impl SpectralGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        let half = (n / 2) as i64;
        let k: Vec<i64> = (0..n as i64)
            .map(|p| if p <= half { p } else { p - n as i64 })
            .collect();
        let k_deriv = k
            .iter()
            .map(|&kp| if kp == half { 0.0 } else { kp as f64 })
            .collect();
        let mut mask = vec![false; n * n];
        for p in 0..n {
            for q in 0..n {
                mask[p * n + q] = 3 * k[p].abs().max(k[q].abs()) <= n as i64;
            }
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            h: 2.0 * PI / n as f64,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            k,
            k_deriv,
            mask,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Integer wavenumber `(k₁, k₂)` of spectral index `idx = p·n + q`.
    pub fn wavenumber(&self, idx: usize) -> (i64, i64) {
        (self.k[idx / self.n], self.k[idx % self.n])
    }

    /// All modes, in storage order.
    pub fn wavenumbers(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.n * self.n).map(move |i| self.wavenumber(i))
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.mask
    }

    /// Squared modulus `|k|²` of spectral index `idx`.
    pub fn k_sq(&self, idx: usize) -> f64 {
        let (k1, k2) = self.wavenumber(idx);
        (k1 * k1 + k2 * k2) as f64
    }

    /// Wavenumber seen by first derivatives: the Nyquist entry of each axis is zero.
    pub fn deriv_wavenumber(&self, idx: usize) -> (f64, f64) {
        self.kd(idx)
    }

    fn kd(&self, idx: usize) -> (f64, f64) {
        (self.k_deriv[idx / self.n], self.k_deriv[idx % self.n])
    }

    /// Node coordinates `(a·h, b·h)` of sample index `idx = a·n + b`.
    pub fn node(&self, idx: usize) -> (f64, f64) {
        ((idx / self.n) as f64 * self.h, (idx % self.n) as f64 * self.h)
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::ShapeMismatch(format!(
                "field on {n}x{n} used with grid {}x{}",
                self.n, self.n
            )));
        }
        Ok(())
    }

    fn fft2(&self, buf: &mut [Complex64], forward: bool) {
        let n = self.n;
        let plan = if forward { &self.fwd } else { &self.inv };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
        transpose(buf, n);
        plan.process_with_scratch(buf, &mut scratch);
        transpose(buf, n);
    }

    pub fn forward(&self, f: &Samples) -> Result<Spectrum> {
        self.check(f.n)?;
        let nn = self.n * self.n;
        let scale = 1.0 / nn as f64;
        let mut out = Spectrum::zeros(self.n, f.comps);
        for c in 0..f.comps {
            let buf = out.comp_mut(c);
            for (z, &x) in buf.iter_mut().zip(f.comp(c)) {
                *z = Complex64::new(x, 0.0);
            }
            self.fft2(buf, true);
            for z in buf.iter_mut() {
                *z *= scale;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, s: &Spectrum) -> Result<Samples> {
        self.check(s.n)?;
        let mut out = Samples::zeros(self.n, s.comps);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n * self.n];
        for c in 0..s.comps {
            buf.copy_from_slice(s.comp(c));
            self.fft2(&mut buf, false);
            for (x, z) in out.comp_mut(c).iter_mut().zip(&buf) {
                *x = z.re;
            }
        }
        Ok(out)
    }

    /// `∂₁f, ∂₂f` of every component: output component `2c + j` is `∂_{j+1} f_c`.
    pub fn gradient(&self, f: &Spectrum) -> Spectrum {
        let mut out = Spectrum::zeros(self.n, 2 * f.comps);
        for c in 0..f.comps {
            let src = f.comp(c).to_vec();
            for j in 0..2 {
                let dst = out.comp_mut(2 * c + j);
                for (idx, (d, s)) in dst.iter_mut().zip(&src).enumerate() {
                    let (k1, k2) = self.kd(idx);
                    let kj = if j == 0 { k1 } else { k2 };
                    *d = s * Complex64::new(0.0, kj);
                }
            }
        }
        out
    }

    /// Perpendicular gradient `(−∂₂g, ∂₁g)` of a scalar.
    pub fn perp_gradient(&self, g: &Spectrum) -> Result<Spectrum> {
        if g.comps != 1 {
            return Err(Error::ShapeMismatch("perp_gradient expects a scalar".into()));
        }
        let mut out = Spectrum::zeros(self.n, 2);
        for idx in 0..self.n * self.n {
            let (k1, k2) = self.kd(idx);
            let z = g.data[idx];
            out.data[idx] = -z * Complex64::new(0.0, k2);
            out.data[self.n * self.n + idx] = z * Complex64::new(0.0, k1);
        }
        Ok(out)
    }

    pub fn laplacian(&self, f: &Spectrum) -> Spectrum {
        let mut out = f.clone();
        let nn = self.n * self.n;
        for c in 0..f.comps {
            for (idx, z) in out.data[c * nn..(c + 1) * nn].iter_mut().enumerate() {
                *z *= -self.k_sq(idx);
            }
        }
        out
    }

    /// Spectral divergence `i k·û` of a two-component field.
    pub fn divergence(&self, u: &Spectrum) -> Result<Spectrum> {
        if u.comps != 2 {
            return Err(Error::ShapeMismatch("divergence expects 2 components".into()));
        }
        let nn = self.n * self.n;
        let mut out = Spectrum::zeros(self.n, 1);
        for idx in 0..nn {
            let (k1, k2) = self.kd(idx);
            out.data[idx] = Complex64::new(0.0, 1.0) * (u.data[idx] * k1 + u.data[nn + idx] * k2);
        }
        Ok(out)
    }

    /// Largest modulus of the spectral divergence.
    pub fn max_divergence(&self, u: &Spectrum) -> Result<f64> {
        Ok(self.divergence(u)?.max_abs())
    }

    /// Orthogonal projection onto divergence-free fields, mode by mode. The
    /// zero mode, and modes whose derivative wavenumber vanishes, pass through.
    pub fn leray_project(&self, u: &Spectrum) -> Result<Spectrum> {
        let mut out = u.clone();
        self.leray_project_in_place(&mut out)?;
        Ok(out)
    }

    pub fn leray_project_in_place(&self, u: &mut Spectrum) -> Result<()> {
        if u.comps != 2 {
            return Err(Error::ShapeMismatch("leray_project expects 2 components".into()));
        }
        let nn = self.n * self.n;
        let (first, second) = u.data.split_at_mut(nn);
        for idx in 0..nn {
            let (k1, k2) = self.kd(idx);
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                continue;
            }
            let dot = (first[idx] * k1 + second[idx] * k2) / ksq;
            first[idx] -= dot * k1;
            second[idx] -= dot * k2;
        }
        Ok(())
    }

    /// Zeroes every mode outside the two-thirds mask.
    pub fn dealias(&self, f: &Spectrum) -> Spectrum {
        let mut out = f.clone();
        self.dealias_in_place(&mut out);
        out
    }

    pub fn dealias_in_place(&self, f: &mut Spectrum) {
        let nn = self.n * self.n;
        for c in 0..f.comps {
            for (z, &keep) in f.data[c * nn..(c + 1) * nn].iter_mut().zip(&self.mask) {
                if !keep {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Rectangle-rule integral of a scalar over the torus.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n * self.n);
        self.h * self.h * f.iter().sum::<f64>()
    }

    /// `∫ f e^{i k·x} dx` for a single-component spectrum, i.e. `(2π)² f̂_{−k}`.
    pub fn pair_with_mode(&self, f: &Spectrum, c: usize, k1: i64, k2: i64) -> Complex64 {
        f.coeff(c, -k1, -k2) * (4.0 * PI * PI)
    }

    /// Applies the forward transform and masks when requested.
    pub fn forward_dealiased(&self, f: &Samples, dealias: bool) -> Result<Spectrum> {
        let mut s = self.forward(f)?;
        if dealias {
            self.dealias_in_place(&mut s);
        }
        Ok(s)
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// A field held in both representations, kept consistent.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    physical: Samples,
    spectral: Spectrum,
}

impl Field {
    pub fn from_physical(grid: &SpectralGrid, physical: Samples) -> Result<Self> {
        let spectral = grid.forward(&physical)?;
        Ok(Self { physical, spectral })
    }

    pub fn from_spectral(grid: &SpectralGrid, spectral: Spectrum) -> Result<Self> {
        let physical = grid.inverse(&spectral)?;
        Ok(Self { physical, spectral })
    }

    pub fn physical(&self) -> &Samples {
        &self.physical
    }

    pub fn spectral(&self) -> &Spectrum {
        &self.spectral
    }

    pub fn comps(&self) -> usize {
        self.physical.comps
    }

    pub fn n(&self) -> usize {
        self.physical.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_samples(n: usize, comps: usize, seed: u64) -> Samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..comps * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Samples::from_vec(n, comps, data).unwrap()
    }

    #[test]
    fn grid_mode_set_and_mask() {
        let g = SpectralGrid::new(8).unwrap();
        let mut ks: Vec<_> = g.wavenumbers().collect();
        ks.sort();
        let mut expected = Vec::new();
        for k1 in -3..=4 {
            for k2 in -3..=4 {
                expected.push((k1, k2));
            }
        }
        assert_eq!(ks, expected);
        for (idx, (k1, k2)) in g.wavenumbers().enumerate() {
            assert_eq!(g.dealias_mask()[idx], k1.abs().max(k2.abs()) <= 2);
        }
        assert!(matches!(SpectralGrid::new(7), Err(Error::InvalidGrid(7))));
        assert!(SpectralGrid::new(6).is_err());
    }

    #[test]
    fn transform_of_simple_fields() {
        let g = SpectralGrid::new(16).unwrap();
        let one = Samples::from_fn(16, 1, |_, _| vec![1.0]);
        let s = g.forward(&one).unwrap();
        assert!((s.coeff(0, 0, 0).re - 1.0).abs() < 1e-15);
        let others: f64 = s.as_slice()[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(others < 1e-15);

        let cos = Samples::from_fn(16, 1, |x, _| vec![x.cos()]);
        let s = g.forward(&cos).unwrap();
        assert!((s.coeff(0, 1, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((s.coeff(0, -1, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn roundtrip_and_parseval() {
        for n in [8, 16, 32, 64] {
            let g = SpectralGrid::new(n).unwrap();
            let f = random_samples(n, 2, n as u64);
            let s = g.forward(&f).unwrap();
            let back = g.inverse(&s).unwrap();
            let err = f
                .as_slice()
                .iter()
                .zip(back.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-12, "n={n} roundtrip {err}");
            let lhs: f64 = s.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() * 4.0 * PI * PI;
            let rhs: f64 = (0..2).map(|c| g.integrate(&f.comp(c).iter().map(|x| x * x).collect::<Vec<_>>())).sum();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn conjugate_symmetry_of_real_fields() {
        let g = SpectralGrid::new(16).unwrap();
        let s = g.forward(&random_samples(16, 1, 3)).unwrap();
        for (k1, k2) in g.wavenumbers() {
            let a = s.coeff(0, k1, k2);
            let b = s.coeff(0, -k1, -k2).conj();
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn derivatives_of_trig_functions() {
        let n = 16;
        let g = SpectralGrid::new(n).unwrap();
        let sin = Field::from_physical(&g, Samples::from_fn(n, 1, |x, _| vec![x.sin()])).unwrap();
        let grad = g.inverse(&g.gradient(sin.spectral())).unwrap();
        let expected = Samples::from_fn(n, 2, |x, _| vec![x.cos(), 0.0]);
        let err = grad.as_slice().iter().zip(expected.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13);

        let cos2 = Field::from_physical(&g, Samples::from_fn(n, 1, |_, y| vec![y.cos()])).unwrap();
        let lap = g.inverse(&g.laplacian(cos2.spectral())).unwrap();
        for (a, b) in lap.as_slice().iter().zip(cos2.physical().as_slice()) {
            assert!((a + b).abs() < 1e-13);
        }
    }

    #[test]
    fn perp_gradient_is_solenoidal_and_leray_fixed() {
        let g = SpectralGrid::new(32).unwrap();
        let s = g.forward(&random_samples(32, 1, 9)).unwrap();
        let u = g.perp_gradient(&s).unwrap();
        assert!(g.max_divergence(&u).unwrap() <= 1e-12);
        let p = g.leray_project(&u).unwrap();
        let diff = p.as_slice().iter().zip(u.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-13);
    }

    #[test]
    fn leray_kills_gradients() {
        let g = SpectralGrid::new(32).unwrap();
        let mut s = g.forward(&random_samples(32, 1, 10)).unwrap();
        s.set_coeff(0, 0, 0, Complex64::new(0.0, 0.0));
        let grad = g.gradient(&s);
        let p = g.leray_project(&grad).unwrap();
        assert!(p.max_abs() <= 1e-13);
    }

    #[test]
    fn dealias_examples() {
        let g = SpectralGrid::new(16).unwrap();
        let mut s = Spectrum::zeros(16, 1);
        s.set_coeff(0, 1, 0, Complex64::new(1.0, 0.0));
        assert_eq!(g.dealias(&s), s);
        let mut nyq = Spectrum::zeros(16, 1);
        nyq.set_coeff(0, 8, 3, Complex64::new(1.0, 0.0));
        assert_eq!(g.dealias(&nyq).max_abs(), 0.0);
        let r = g.forward(&random_samples(16, 3, 4)).unwrap();
        let once = g.dealias(&r);
        assert_eq!(g.dealias(&once), once);
    }

    #[test]
    fn quadrature_examples() {
        let n = 32;
        let g = SpectralGrid::new(n).unwrap();
        let one = vec![1.0; n * n];
        assert!((g.integrate(&one) - 4.0 * PI * PI).abs() < 1e-12);
        let cos = Samples::from_fn(n, 1, |x, _| vec![x.cos()]);
        assert!(g.integrate(cos.comp(0)).abs() < 1e-13);
        let sin2 = Samples::from_fn(n, 1, |x, _| vec![x.sin().powi(2)]);
        assert!((g.integrate(sin2.comp(0)) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = SpectralGrid::new(8).unwrap();
        let f = Samples::zeros(16, 1);
        assert!(matches!(g.forward(&f), Err(Error::ShapeMismatch(_))));
    }
}
