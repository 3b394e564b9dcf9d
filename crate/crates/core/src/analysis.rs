//! Diagnostics: von Neumann footprints, empirical stability scans, error
//! norms, conservation integrals and analytical reference solutions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Stencil, Topology};
use crate::harvest::assemble_global;
use crate::localop::LinearOperatorSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFootprint {
    /// Wavenumbers `k`, uniform on `[0, pi/h]`.
    pub wavenumbers: Vec<f64>,
    pub h: f64,
    pub amplification: Vec<Complex64>,
    /// `|G(k)|`.
    pub dissipation: Vec<f64>,
    /// `arg G(k)`.
    pub dispersion: Vec<f64>,
}

impl SpectralFootprint {
    /// `arg G(k) + k * shift`, wrapped to `(-pi, pi]`: the phase error
    /// against exact transport by `shift` (`a dt` for advection).
    pub fn phase_error(&self, shift: f64) -> Vec<f64> {
        self.wavenumbers
            .iter()
            .zip(&self.dispersion)
            .map(|(k, phase)| wrap_phase(phase + k * shift))
            .collect()
    }

    /// `arg G(k)` minus the exact phase `dt * Im sum_j c_j (i k)^j` of the
    /// continuous operator, wrapped to `(-pi, pi]`.
    pub fn phase_error_against(&self, spec: &LinearOperatorSpec, delta_t: f64) -> Vec<f64> {
        self.wavenumbers
            .iter()
            .zip(&self.dispersion)
            .map(|(&k, phase)| {
                let symbol: Complex64 = spec
                    .terms()
                    .iter()
                    .map(|&(order, c)| c * Complex64::new(0.0, k).powu(order as u32))
                    .sum();
                wrap_phase(phase - delta_t * symbol.im)
            })
            .collect()
    }

    pub fn max_amplification(&self) -> f64 {
        self.dissipation.iter().copied().fold(0.0, f64::max)
    }
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// `G(k) = sum_j w_j exp(i k offset_j h)` on `num_k` wavenumbers.
pub fn spectral_footprint(weights: &[f64], offsets: &[i64], h: f64, num_k: usize) -> Result<SpectralFootprint> {
    if weights.len() != offsets.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            found: offsets.len(),
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("h = {h}")));
    }
    let k_max = PI / h;
    let wavenumbers: Vec<f64> = match num_k {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..num_k).map(|i| k_max * i as f64 / (num_k - 1) as f64).collect(),
    };
    let amplification: Vec<Complex64> = wavenumbers
        .iter()
        .map(|&k| {
            weights
                .iter()
                .zip(offsets)
                .map(|(&w, &o)| w * Complex64::from_polar(1.0, k * o as f64 * h))
                .sum()
        })
        .collect();
    Ok(SpectralFootprint {
        dissipation: amplification.iter().map(|g| g.norm()).collect(),
        dispersion: amplification.iter().map(|g| g.arg()).collect(),
        wavenumbers,
        h,
        amplification,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTrial {
    pub delta_t: f64,
    pub final_linf: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityBoundary {
    pub stencil_len: usize,
    pub trials: Vec<StabilityTrial>,
    /// Largest scanned step below the first unstable one; `None` if the
    /// smallest step already fails.
    pub delta_t_star: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub steps: usize,
    pub growth_tol: f64,
    pub seed: u64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            steps: 500,
            growth_tol: 10.0,
            seed: 0,
        }
    }
}

/// Seeded uniform field on `[-1, 1]` scaled to unit max norm.
pub fn random_unit_field(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let m = linf(&u);
    if m > 0.0 {
        u.iter_mut().for_each(|v| *v /= m);
    }
    u
}

/// Run `settings.steps` linear steps for each candidate step size and
/// classify by final max-norm growth.
pub fn scan_stability(
    grid: &Grid,
    stencils: &[Stencil],
    spec: &LinearOperatorSpec,
    dt_grid: &[f64],
    settings: ScanSettings,
) -> Result<StabilityBoundary> {
    if dt_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("step grid must be strictly ascending".into()));
    }
    let u0 = random_unit_field(grid.len(), settings.seed);
    let trials = dt_grid
        .par_iter()
        .map(|&dt| {
            let prop = assemble_global(grid, stencils, spec, dt)?;
            let mut u = u0.clone();
            let mut next = vec![0.0; u.len()];
            for _ in 0..settings.steps {
                prop.apply_into(&u, &mut next)?;
                std::mem::swap(&mut u, &mut next);
                if u.iter().any(|v| !v.is_finite()) {
                    break;
                }
            }
            let final_linf = if u.iter().all(|v| v.is_finite()) {
                linf(&u)
            } else {
                f64::INFINITY
            };
            Ok(StabilityTrial {
                delta_t: dt,
                final_linf,
                stable: final_linf <= settings.growth_tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let delta_t_star = trials.iter().take_while(|t| t.stable).last().map(|t| t.delta_t);
    Ok(StabilityBoundary {
        stencil_len: stencils.first().map_or(0, Stencil::len),
        trials,
        delta_t_star,
    })
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrappedGaussian {
    pub a: f64,
    pub nu: f64,
    pub beta: f64,
    pub x0: f64,
    pub period: f64,
    pub shifts: usize,
}

impl Default for WrappedGaussian {
    fn default() -> Self {
        WrappedGaussian {
            a: 1.0,
            nu: 0.1,
            beta: 10.0,
            x0: PI,
            period: 2.0 * PI,
            shifts: 2,
        }
    }
}

impl WrappedGaussian {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        wrapped_advdiff_solution(x, t, self.a, self.nu, self.beta, self.x0, self.period, self.shifts)
    }
}

/// Free-space Gaussian solution of `u_t + a u_x = nu u_xx` summed over
/// `2K + 1` periodic images.
#[allow(clippy::too_many_arguments)]
pub fn wrapped_advdiff_solution(x: f64, t: f64, a: f64, nu: f64, beta: f64, x0: f64, period: f64, k: usize) -> f64 {
    let spread = 1.0 + 4.0 * beta * nu * t;
    let amp = spread.sqrt().recip();
    let k = k as i64;
    (-k..=k)
        .map(|m| {
            let d = x - x0 - a * t + m as f64 * period;
            amp * (-beta * d * d / spread).exp()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l_inf: f64,
    pub l_2: f64,
    pub rel_l_inf: f64,
    pub rel_l_2: f64,
}

pub fn linf(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn l2(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norms(u: &[f64], reference: &[f64]) -> Result<Norms> {
    if u.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            found: u.len(),
        });
    }
    let diff: Vec<f64> = u.iter().zip(reference).map(|(a, b)| a - b).collect();
    let (l_inf, l_2) = (linf(&diff), l2(&diff));
    Ok(Norms {
        l_inf,
        l_2,
        rel_l_inf: l_inf / linf(reference),
        rel_l_2: l_2 / l2(reference),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub mass_l1: f64,
    pub energy_l2: f64,
}

/// Clenshaw–Curtis weights on `len` Chebyshev–Gauss–Lobatto points of
/// `[x_min, x_max]` (symmetric, so node ordering does not matter).
pub fn clenshaw_curtis_weights(len: usize, x_min: f64, x_max: f64) -> Vec<f64> {
    assert!(len >= 2);
    let n = len - 1;
    let nf = n as f64;
    let mut w = vec![0.0; len];
    let mut v = vec![1.0; n.saturating_sub(1)];
    let theta = |j: usize| j as f64 * PI / nf;
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        for k in 1..n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta(i + 1)).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta(i + 1)).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta(i + 1)).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    w[n] = w[0];
    for (i, vi) in v.iter().enumerate() {
        w[i + 1] = 2.0 * vi / nf;
    }
    let scale = 0.5 * (x_max - x_min);
    w.iter_mut().for_each(|x| *x *= scale);
    w
}

fn is_chebyshev(grid: &Grid) -> bool {
    let (a, b) = grid.domain();
    Grid::chebyshev(grid.len(), a, b)
        .map(|c| {
            c.nodes()
                .iter()
                .zip(grid.nodes())
                .all(|(p, q)| (p - q).abs() <= 1e-13 * (b - a))
        })
        .unwrap_or(false)
}

/// Quadrature weights for the grid: rectangle rule when periodic,
/// Clenshaw–Curtis on Chebyshev points, trapezoid otherwise.
pub fn quadrature_weights(grid: &Grid) -> Vec<f64> {
    let x = grid.nodes();
    match grid.topology() {
        Topology::PeriodicUniform => vec![grid.period() / grid.len() as f64; grid.len()],
        Topology::NonPeriodic if is_chebyshev(grid) => {
            let (a, b) = grid.domain();
            clenshaw_curtis_weights(grid.len(), a, b)
        }
        Topology::NonPeriodic => {
            let mut w = vec![0.0; x.len()];
            for i in 0..x.len().saturating_sub(1) {
                let half = 0.5 * (x[i + 1] - x[i]);
                w[i] += half;
                w[i + 1] += half;
            }
            w
        }
    }
}

pub fn conserved_quantities(u: &[f64], grid: &Grid) -> Result<Conserved> {
    if u.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: u.len(),
        });
    }
    let w = quadrature_weights(grid);
    Ok(Conserved {
        mass_l1: w.iter().zip(u).map(|(w, v)| w * v.abs()).sum(),
        energy_l2: w.iter().zip(u).map(|(w, v)| w * v * v).sum(),
    })
}

/// Barycentric interpolation of values on a Chebyshev–Gauss–Lobatto grid.
pub fn chebyshev_interpolate(grid: &Grid, values: &[f64], x: f64) -> Result<f64> {
    let nodes = grid.nodes();
    if values.len() != nodes.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            found: values.len(),
        });
    }
    let last = nodes.len() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, (&xj, &fj)) in nodes.iter().zip(values).enumerate() {
        let d = x - xj;
        if d == 0.0 {
            return Ok(fj);
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == last {
            w *= 0.5;
        }
        num += w / d * fj;
        den += w / d;
    }
    Ok(num / den)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
