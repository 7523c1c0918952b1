//! Local-energy ball analysis: concentration points of a snapshot, the
//! cardinality bound, and the defect-measure estimate along an ε-family.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::stress_pairing_from;
use crate::dynamics::ericksen_stress;
use crate::error::{Error, Result};
use crate::spectral::{Field, Samples, SpectralGrid};
use crate::state::SimState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: (f64, f64),
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: (f64, f64), radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            center: (center.0.rem_euclid(2.0 * PI), center.1.rem_euclid(2.0 * PI)),
            radius,
        })
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius < PI {
        Ok(())
    } else {
        Err(Error::param(format!("ball radius must lie in (0, pi), got {radius}")))
    }
}

fn wrap(d: f64) -> f64 {
    let w = d.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Periodic distance between two points of the torus.
pub fn periodic_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    wrap(a.0 - b.0).hypot(wrap(a.1 - b.1))
}

/// Squared lattice distance between nodes `i` and `j`, in units of `h²`.
fn lattice_dist_sq(n: usize, i: usize, j: usize) -> usize {
    let axis = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(n - d)
    };
    let da = axis(i / n, j / n);
    let db = axis(i % n, j % n);
    da * da + db * db
}

/// `ρ²` measured in lattice units, so that node `j` lies in the ball of
/// radius `r` about node `i` iff `lattice_dist_sq(i, j) ≤ ρ²`.
fn lattice_radius_sq(grid: &SpectralGrid, radius: f64) -> f64 {
    let r = radius / grid.spacing();
    r * r
}

/// Nodal values of `½|∇d|² + (1−|d|²)²/(4ε²)`.
pub fn energy_density(grid: &SpectralGrid, d: &Field, epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    let grad = grid.inverse(&grid.gradient(d.spectral()))?;
    let nn = grid.n() * grid.n();
    let mut out = vec![0.0; nn];
    for c in 0..grad.comps() {
        for (o, g) in out.iter_mut().zip(grad.comp(c)) {
            *o += 0.5 * g * g;
        }
    }
    let scale = 1.0 / (4.0 * epsilon * epsilon);
    for (o, r) in out.iter_mut().zip(d.physical().norms()) {
        let w = 1.0 - r * r;
        *o += scale * w * w;
    }
    Ok(out)
}

/// Rectangle-rule energy over the nodes within periodic distance `radius` of
/// the ball center.
pub fn local_energy(grid: &SpectralGrid, d: &Field, epsilon: f64, ball: &BallSpec) -> Result<f64> {
    check_radius(ball.radius)?;
    let density = energy_density(grid, d, epsilon)?;
    let h = grid.spacing();
    let sum: f64 = density
        .iter()
        .enumerate()
        .filter(|&(idx, _)| periodic_distance(grid.node(idx), ball.center) <= ball.radius)
        .map(|(_, e)| e)
        .sum();
    Ok(h * h * sum)
}

/// Local energy of the ball of radius `radius` about every node, by circular
/// convolution of `density` with the ball indicator.
pub fn local_energy_map(grid: &SpectralGrid, density: &[f64], radius: f64) -> Result<Vec<f64>> {
    check_radius(radius)?;
    let n = grid.n();
    let nn = n * n;
    if density.len() != nn {
        return Err(Error::ShapeMismatch(format!("density has {} entries, grid {}", density.len(), nn)));
    }
    let r2 = lattice_radius_sq(grid, radius);
    let indicator: Vec<f64> = (0..nn)
        .map(|idx| if lattice_dist_sq(n, 0, idx) as f64 <= r2 { 1.0 } else { 0.0 })
        .collect();
    let e_hat = grid.forward(&Samples::from_vec(n, 1, density.to_vec())?)?;
    let mut prod = grid.forward(&Samples::from_vec(n, 1, indicator)?)?;
    let h = grid.spacing();
    let w = (nn as f64) * h * h;
    for (p, e) in prod.as_mut_slice().iter_mut().zip(e_hat.as_slice()) {
        *p *= e * w;
    }
    Ok(grid.inverse(&prod)?.comp(0).to_vec())
}

/// `⌈E₀/ε₀²⌉`.
pub fn count_bound(total_energy: f64, eps0_sq: f64) -> Result<u64> {
    if !(eps0_sq > 0.0) {
        return Err(Error::param("eps0_sq must be positive"));
    }
    if !(total_energy >= 0.0) {
        return Err(Error::param("total energy must be non-negative"));
    }
    Ok((total_energy / eps0_sq).ceil() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    /// Energy-weighted centroid of the cluster.
    pub center: (f64, f64),
    /// Largest ball energy over the cluster.
    pub peak_energy: f64,
    /// Energy of the nodes attributed to this cluster alone.
    pub attributed_energy: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub t: f64,
    pub epsilon: f64,
    pub eps0_sq: f64,
    pub radius: f64,
    pub total_energy: f64,
    pub points: Vec<ConcentrationPoint>,
    pub count: usize,
    pub k_bound: u64,
    pub passed: bool,
}

/// Components of `marked` under the link `distance ≤ radius`, discovered in
/// node order.
fn link_components(n: usize, marked: &[usize], r2: f64) -> Vec<Vec<usize>> {
    let mut seen = vec![false; marked.len()];
    let mut out = Vec::new();
    for start in 0..marked.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            comp.push(marked[i]);
            for j in 0..marked.len() {
                if !seen[j] && lattice_dist_sq(n, marked[i], marked[j]) as f64 <= r2 {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Assigns every node within the ball of some peak to its nearest peak
/// (ties to the earlier peak) and sums the density per peak.
fn attribute(n: usize, density: &[f64], peaks: &[usize], r2: f64, cell: f64) -> Vec<f64> {
    let mut energy = vec![0.0; peaks.len()];
    for (idx, e) in density.iter().enumerate() {
        let mut best: Option<(usize, usize)> = None;
        for (p, &node) in peaks.iter().enumerate() {
            let d2 = lattice_dist_sq(n, idx, node);
            if d2 as f64 <= r2 && best.map_or(true, |(_, b)| d2 < b) {
                best = Some((p, d2));
            }
        }
        if let Some((p, _)) = best {
            energy[p] += e * cell;
        }
    }
    energy
}

fn centroid(grid: &SpectralGrid, nodes: &[usize], weights: &[f64], anchor: usize) -> (f64, f64) {
    let n = grid.n() as i64;
    let h = grid.spacing();
    let (a0, b0) = ((anchor as i64) / n, (anchor as i64) % n);
    let unwrap = |d: i64| {
        let d = d.rem_euclid(n);
        if d > n / 2 {
            d - n
        } else {
            d
        }
    };
    let (mut sa, mut sb, mut sw) = (0.0, 0.0, 0.0);
    for &idx in nodes {
        let w = weights[idx];
        sa += w * unwrap(idx as i64 / n - a0) as f64;
        sb += w * unwrap(idx as i64 % n - b0) as f64;
        sw += w;
    }
    (
        ((a0 as f64 + sa / sw) * h).rem_euclid(2.0 * PI),
        ((b0 as f64 + sb / sw) * h).rem_euclid(2.0 * PI),
    )
}

/// Discrete concentration set of the director of `state`.
///
/// Nodes whose ball energy exceeds `eps0_sq` are clustered by single linkage
/// at distance `radius`. The energy of every node within `radius` of a
/// cluster peak is attributed to the nearest peak only; clusters whose
/// attributed energy does not exceed `eps0_sq` are dissolved until none
/// remain, so the reported count never exceeds `⌈E/ε₀²⌉`.
pub fn detect_sigma(
    grid: &SpectralGrid,
    state: &SimState,
    epsilon: f64,
    radius: f64,
    eps0_sq: f64,
) -> Result<ConcentrationReport> {
    let n = grid.n();
    let h = grid.spacing();
    let cell = h * h;
    let density = energy_density(grid, &state.d, epsilon)?;
    let total_energy = cell * density.iter().sum::<f64>();
    let k_bound = count_bound(total_energy, eps0_sq)?;
    let map = local_energy_map(grid, &density, radius)?;
    let r2 = lattice_radius_sq(grid, radius);

    let marked: Vec<usize> = (0..n * n).filter(|&i| map[i] > eps0_sq).collect();
    let mut clusters: Vec<(usize, Vec<usize>)> = link_components(n, &marked, r2)
        .into_iter()
        .map(|comp| {
            let peak = comp
                .iter()
                .copied()
                .fold(comp[0], |best, i| if map[i] > map[best] { i } else { best });
            (peak, comp)
        })
        .collect();

    let mut energies;
    loop {
        let peaks: Vec<usize> = clusters.iter().map(|c| c.0).collect();
        energies = attribute(n, &density, &peaks, r2, cell);
        let weakest = energies
            .iter()
            .enumerate()
            .filter(|&(_, &e)| e <= eps0_sq)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i);
        match weakest {
            Some(i) => {
                clusters.remove(i);
            }
            None => break,
        }
    }

    let points: Vec<ConcentrationPoint> = clusters
        .iter()
        .zip(&energies)
        .map(|((peak, nodes), &attributed)| ConcentrationPoint {
            center: centroid(grid, nodes, &map, *peak),
            peak_energy: map[*peak],
            attributed_energy: attributed,
            nodes: nodes.len(),
        })
        .collect();
    let count = points.len();
    Ok(ConcentrationReport {
        t: state.t(),
        epsilon,
        eps0_sq,
        radius,
        total_energy,
        points,
        count,
        k_bound,
        passed: count as u64 <= k_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectEstimate {
    pub t: f64,
    pub test_k_max: i64,
    /// Epsilons in decreasing order.
    pub epsilons: Vec<f64>,
    /// Test wavenumbers `1 ≤ |k|∞ ≤ k_max`.
    pub modes: Vec<(i64, i64)>,
    /// `pairings[e][m]` as `[re, im]`.
    pub pairings: Vec<Vec<[f64; 2]>>,
    /// Line through the two coarsest pairings, evaluated at `ε = 0`.
    pub extrapolated: Vec<[f64; 2]>,
    /// Finest pairing minus the same line evaluated at the finest `ε`.
    pub eta_estimate: Vec<[f64; 2]>,
    pub eta_max: f64,
}

/// Pairings `∫ ∇d_ε ⊙ ∇d_ε : ∇φ_k` with `φ_k = ∇⊥e^{ik·x}` across an
/// ε-family of directors at a common time.
pub fn defect_estimate(grid: &SpectralGrid, t: f64, snapshots: &[(f64, Field)], k_max: i64) -> Result<DefectEstimate> {
    let mut sorted: Vec<&(f64, Field)> = snapshots.iter().collect();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    sorted.dedup_by(|a, b| a.0 == b.0);
    if sorted.len() < 3 {
        return Err(Error::param("defect estimate needs at least three distinct epsilons"));
    }
    if sorted.iter().any(|(_, d)| d.n() != grid.n() || d.comps() != 3) {
        return Err(Error::ShapeMismatch("defect estimate snapshots must share the grid".into()));
    }
    let modes: Vec<(i64, i64)> = (-k_max..=k_max)
        .flat_map(|k1| (-k_max..=k_max).map(move |k2| (k1, k2)))
        .filter(|&(k1, k2)| k1.abs().max(k2.abs()) >= 1)
        .collect();
    let mut pairings = Vec::with_capacity(sorted.len());
    for (_, d) in &sorted {
        let grad = grid.inverse(&grid.gradient(d.spectral()))?;
        let m = grid.forward(&ericksen_stress(&grad))?;
        pairings.push(
            modes
                .iter()
                .map(|&(k1, k2)| stress_pairing_from(grid, &m, k1, k2))
                .collect::<Vec<Complex64>>(),
        );
    }
    let (e0, e1) = (sorted[0].0, sorted[1].0);
    let ef = sorted[sorted.len() - 1].0;
    let finest = &pairings[pairings.len() - 1];
    let mut extrapolated = Vec::with_capacity(modes.len());
    let mut eta = Vec::with_capacity(modes.len());
    for m in 0..modes.len() {
        let slope = (pairings[0][m] - pairings[1][m]) / (e0 - e1);
        let at = |e: f64| pairings[1][m] + slope * (e - e1);
        extrapolated.push(at(0.0));
        eta.push(finest[m] - at(ef));
    }
    let pack = |z: &Complex64| [z.re, z.im];
    Ok(DefectEstimate {
        t,
        test_k_max: k_max,
        epsilons: sorted.iter().map(|s| s.0).collect(),
        modes,
        pairings: pairings.iter().map(|row| row.iter().map(pack).collect()).collect(),
        extrapolated: extrapolated.iter().map(pack).collect(),
        eta_max: eta.iter().map(|z| z.norm()).fold(0.0, f64::max),
        eta_estimate: eta.iter().map(pack).collect(),
    })
}
