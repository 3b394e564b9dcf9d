//! Benchmark problem definitions: advection, advection-diffusion, viscous
//! Burgers, KdV and Allen–Cahn, each with initial data, parameters and a
//! reference-solution hook.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{chebyshev_interpolate, WrappedGaussian};
use crate::error::{Error, Result};
use crate::grid::{select_stencils, Grid, Stencil, StencilPolicy};
use crate::harvest::{assemble_derivative, assemble_global, BandedPropagator};
use crate::localop::LinearOperatorSpec;
use crate::timestep::{
    run_with_observer, Boundary, Convective, CubicReaction, NoNonlinearity, Nonlinearity, Scheme,
    SemiLinearProblem, SimulationResult, Stepper, StepperState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkKind {
    Advection,
    Advdiff,
    Burgers,
    Kdv,
    AllenCahn,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 5] = [
        BenchmarkKind::Advection,
        BenchmarkKind::Advdiff,
        BenchmarkKind::Burgers,
        BenchmarkKind::Kdv,
        BenchmarkKind::AllenCahn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkKind::Advection => "advection",
            BenchmarkKind::Advdiff => "advdiff",
            BenchmarkKind::Burgers => "burgers",
            BenchmarkKind::Kdv => "kdv",
            BenchmarkKind::AllenCahn => "allen-cahn",
        }
    }
}

impl std::str::FromStr for BenchmarkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchmarkKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown benchmark '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Periodic,
    Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GridSpec {
    pub kind: GridKind,
    pub len: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        match self.kind {
            GridKind::Periodic => Grid::periodic(self.len, self.x_min, self.x_max),
            GridKind::Chebyshev => Grid::chebyshev(self.len, self.x_min, self.x_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum NonlinearityKind {
    None,
    /// `-c u u_x`.
    Convective { coefficient: f64 },
    /// `-u^3`.
    CubicReaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// `exp(-beta (x - center)^2)`.
    Gaussian { center: f64, beta: f64 },
    /// `exp(-beta sin^2(x / 2))`.
    SinePulse { beta: f64 },
    /// `3a^2 sech^2(a (x - xa) / 2) + 3b^2 sech^2(b (x - xb) / 2)`.
    TwoSoliton { a: f64, b: f64, xa: f64, xb: f64 },
    /// `slope x + amplitude sin(frequency x)`.
    SlopeSine { slope: f64, amplitude: f64, frequency: f64 },
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::Gaussian { center, beta } => (-beta * (x - center).powi(2)).exp(),
            InitialCondition::SinePulse { beta } => (-beta * (0.5 * x).sin().powi(2)).exp(),
            InitialCondition::TwoSoliton { a, b, xa, xb } => {
                let sech2 = |z: f64| 1.0 / z.cosh().powi(2);
                3.0 * a * a * sech2(0.5 * a * (x - xa)) + 3.0 * b * b * sech2(0.5 * b * (x - xb))
            }
            InitialCondition::SlopeSine {
                slope,
                amplitude,
                frequency,
            } => slope * x + amplitude * (frequency * x).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", rename_all_fields = "kebab-case")]
pub enum Reference {
    None,
    /// Initial data translated by `speed t` on the periodic domain.
    ExactTransport { speed: f64 },
    WrappedGaussian(WrappedGaussian),
    /// The same benchmark rerun with `len` nodes and step `delta_t`.
    SelfRefined { len: usize, delta_t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BenchmarkSpec {
    pub kind: BenchmarkKind,
    pub grid: GridSpec,
    pub stencil_len: usize,
    pub policy: StencilPolicy,
    pub linear: LinearOperatorSpec,
    pub nonlinearity: NonlinearityKind,
    pub initial: InitialCondition,
    pub boundary: Boundary,
    pub scheme: Scheme,
    pub delta_t: f64,
    pub t_final: f64,
    pub reference: Reference,
}

/// Periodic transport of a sharp Gaussian on `[-1, 1]` with unit speed for
/// 100 periods. The step is `nu h` with `nu = 1 - sigma` for centered and
/// `(n + 1) / 2 - sigma` for one-sided stencils.
pub fn advection_benchmark(len: usize, n: usize, policy: StencilPolicy, sigma: f64) -> Result<BenchmarkSpec> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} not in [0, 1)")));
    }
    let nu = courant_number(n, policy, sigma);
    let h = 2.0 / len as f64;
    Ok(BenchmarkSpec {
        kind: BenchmarkKind::Advection,
        grid: GridSpec {
            kind: GridKind::Periodic,
            len,
            x_min: -1.0,
            x_max: 1.0,
        },
        stencil_len: n,
        policy,
        linear: LinearOperatorSpec::advection(1.0),
        nonlinearity: NonlinearityKind::None,
        initial: InitialCondition::Gaussian {
            center: 0.0,
            beta: 40.0,
        },
        boundary: Boundary::Free,
        scheme: Scheme::Linear,
        delta_t: nu * h,
        t_final: 200.0,
        reference: Reference::ExactTransport { speed: 1.0 },
    })
}

/// Courant number used by the advection benchmark.
pub fn courant_number(n: usize, policy: StencilPolicy, sigma: f64) -> f64 {
    match policy {
        StencilPolicy::Centered => 1.0 - sigma,
        StencilPolicy::OneSidedUpwind | StencilPolicy::OneSidedUpwindNegative => (n as f64 + 1.0) / 2.0 - sigma,
    }
}

/// `u_t + u_x = 0.1 u_xx` on `[0, 2 pi)` from `exp(-10 (x - pi)^2)` to `t = 1`.
pub fn advdiff_benchmark(len: usize, n: usize) -> BenchmarkSpec {
    let exact = WrappedGaussian::default();
    BenchmarkSpec {
        kind: BenchmarkKind::Advdiff,
        grid: GridSpec {
            kind: GridKind::Periodic,
            len,
            x_min: 0.0,
            x_max: 2.0 * PI,
        },
        stencil_len: n,
        policy: StencilPolicy::Centered,
        linear: LinearOperatorSpec::advection_diffusion(exact.a, exact.nu),
        nonlinearity: NonlinearityKind::None,
        initial: InitialCondition::Gaussian {
            center: exact.x0,
            beta: exact.beta,
        },
        boundary: Boundary::Free,
        scheme: Scheme::Linear,
        delta_t: 0.01,
        t_final: 1.0,
        reference: Reference::WrappedGaussian(exact),
    }
}

/// Viscous Burgers `u_t + u u_x = 0.03 u_xx` on `[-pi, pi)` to `t = 1`
/// with ETDRK4; the reference is the same run at `dt / 64`.
pub fn burgers_benchmark(len: usize, n: usize, delta_t: f64) -> BenchmarkSpec {
    BenchmarkSpec {
        kind: BenchmarkKind::Burgers,
        grid: GridSpec {
            kind: GridKind::Periodic,
            len,
            x_min: -PI,
            x_max: PI,
        },
        stencil_len: n,
        policy: StencilPolicy::Centered,
        linear: LinearOperatorSpec::diffusion(0.03),
        nonlinearity: NonlinearityKind::Convective { coefficient: 1.0 },
        initial: InitialCondition::SinePulse { beta: 10.0 },
        boundary: Boundary::Free,
        scheme: Scheme::EtdRk4,
        delta_t,
        t_final: 1.0,
        reference: Reference::SelfRefined {
            len,
            delta_t: delta_t / 64.0,
        },
    }
}

/// KdV `u_t + u u_x + u_xxx = 0` on `[-pi, pi)` with a two-soliton start
/// (`A = 25`, `B = 16`) to `t = 0.006`; `dt = 0.04 / N^2`. Larger steps make
/// the harvested dispersive row amplify grid-scale modes.
pub fn kdv_benchmark(len: usize, n: usize) -> BenchmarkSpec {
    BenchmarkSpec {
        kind: BenchmarkKind::Kdv,
        grid: GridSpec {
            kind: GridKind::Periodic,
            len,
            x_min: -PI,
            x_max: PI,
        },
        stencil_len: n,
        policy: StencilPolicy::Centered,
        linear: LinearOperatorSpec::new(vec![(3, -1.0)]).expect("valid KdV operator"),
        nonlinearity: NonlinearityKind::Convective { coefficient: 1.0 },
        initial: InitialCondition::TwoSoliton {
            a: 25.0,
            b: 16.0,
            xa: -2.0,
            xb: -1.0,
        },
        boundary: Boundary::Free,
        scheme: Scheme::EtdRk4,
        delta_t: 0.04 / (len * len) as f64,
        t_final: 0.006,
        reference: Reference::None,
    }
}

/// Allen–Cahn `u_t = 0.01 u_xx + u - u^3` on a Chebyshev grid of `[-1, 1]`
/// with `u(-1) = -1`, `u(1) = 1`, to `t = 70`. The boundary nodes are held
/// fixed inside the local exponentials: with free boundary rows the
/// clustered Chebyshev stencils give exploding weights at any usable step.
/// The 256-node reference needs `dt <= 3e-4` for the same reason.
pub fn allen_cahn_benchmark(len: usize, n: usize) -> BenchmarkSpec {
    BenchmarkSpec {
        kind: BenchmarkKind::AllenCahn,
        grid: GridSpec {
            kind: GridKind::Chebyshev,
            len,
            x_min: -1.0,
            x_max: 1.0,
        },
        stencil_len: n,
        policy: StencilPolicy::Centered,
        linear: LinearOperatorSpec::new(vec![(0, 1.0), (2, 0.01)]).expect("valid Allen-Cahn operator"),
        nonlinearity: NonlinearityKind::CubicReaction,
        initial: InitialCondition::SlopeSine {
            slope: 0.53,
            amplitude: 0.47,
            frequency: -1.5 * PI,
        },
        boundary: Boundary::DirichletFixed { left: -1.0, right: 1.0 },
        scheme: Scheme::EtdRk4,
        delta_t: 0.01,
        t_final: 70.0,
        reference: Reference::SelfRefined {
            len: 256,
            delta_t: 2.5e-4,
        },
    }
}

impl BenchmarkSpec {
    /// Default configuration of a benchmark at its reference sizes.
    pub fn preset(kind: BenchmarkKind) -> Self {
        match kind {
            BenchmarkKind::Advection => {
                advection_benchmark(128, 5, StencilPolicy::Centered, 0.0).expect("valid preset")
            }
            BenchmarkKind::Advdiff => advdiff_benchmark(128, 9),
            BenchmarkKind::Burgers => burgers_benchmark(256, 19, 0.01),
            BenchmarkKind::Kdv => kdv_benchmark(512, 23),
            BenchmarkKind::AllenCahn => allen_cahn_benchmark(64, 21),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {}", self.delta_t)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_final = {}", self.t_final)));
        }
        if self.stencil_len == 0 || self.stencil_len > self.grid.len {
            return Err(Error::StencilTooLarge {
                n: self.stencil_len,
                grid_len: self.grid.len,
            });
        }
        if let Scheme::EtdMultistep(0) = self.scheme {
            return Err(Error::InvalidParameter("multistep order must be positive".into()));
        }
        // Deserialized operators bypass the constructor checks.
        LinearOperatorSpec::new(self.linear.terms().to_vec())?;
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        self.grid.build()
    }

    pub fn stencils(&self, grid: &Grid) -> Result<Vec<Stencil>> {
        select_stencils(grid, self.stencil_len, self.policy)
    }

    pub fn initial_values(&self, grid: &Grid) -> Vec<f64> {
        let mut u: Vec<f64> = grid.nodes().iter().map(|&x| self.initial.eval(x)).collect();
        if let Some((left, right)) = self.boundary.values() {
            // Roundoff in the analytic profile must not trip the pinning check.
            if let (Some(&a), Some(&b)) = (u.first(), u.last()) {
                if (a - left).abs() <= 1e-12 && (b - right).abs() <= 1e-12 {
                    u[0] = left;
                    let last = u.len() - 1;
                    u[last] = right;
                }
            }
        }
        u
    }

    pub fn nonlinearity(&self, grid: &Grid, stencils: &[Stencil]) -> Result<Box<dyn Nonlinearity>> {
        Ok(match self.nonlinearity {
            NonlinearityKind::None => Box::new(NoNonlinearity),
            NonlinearityKind::Convective { coefficient } => {
                Box::new(Convective::new(assemble_derivative(grid, stencils, 1)?, coefficient))
            }
            NonlinearityKind::CubicReaction => Box::new(CubicReaction),
        })
    }

    pub fn problem(&self, grid: &Grid, stencils: &[Stencil]) -> Result<SemiLinearProblem> {
        SemiLinearProblem::new(
            self.linear.clone(),
            self.nonlinearity(grid, stencils)?,
            self.initial_values(grid),
            self.boundary,
        )
    }

    pub fn solve(&self, snapshot_stride: usize) -> Result<Solution> {
        self.solve_with_observer(snapshot_stride, |_, _, _| {})
    }

    /// Solve, calling `observe(step, state, grid)` after every step.
    pub fn solve_with_observer<F>(&self, snapshot_stride: usize, mut observe: F) -> Result<Solution>
    where
        F: FnMut(usize, &StepperState, &Grid),
    {
        self.validate()?;
        let grid = self.build_grid()?;
        let stencils = self.stencils(&grid)?;
        let problem = self.problem(&grid, &stencils)?;
        let result = run_with_observer(
            &problem,
            &grid,
            &stencils,
            self.scheme,
            self.delta_t,
            self.t_final,
            snapshot_stride,
            |k, s| observe(k, s, &grid),
        )?;
        Ok(Solution { grid, result })
    }

    /// Analytic reference on `grid` at time `t`, if the benchmark has one.
    pub fn analytic_reference(&self, grid: &Grid, t: f64) -> Option<Vec<f64>> {
        match self.reference {
            Reference::ExactTransport { speed } => {
                let (lo, _) = grid.domain();
                let period = grid.period();
                Some(
                    grid.nodes()
                        .iter()
                        .map(|&x| {
                            let back = lo + (x - speed * t - lo).rem_euclid(period);
                            self.initial.eval(back)
                        })
                        .collect(),
                )
            }
            Reference::WrappedGaussian(w) => Some(grid.nodes().iter().map(|&x| w.eval(x, t)).collect()),
            Reference::None | Reference::SelfRefined { .. } => None,
        }
    }

    /// Reference solution at `t_final` sampled on this benchmark's grid:
    /// analytic when available, otherwise a refined rerun (interpolated
    /// from a finer Chebyshev grid, or subsampled from a finer periodic one).
    pub fn reference_solution(&self) -> Result<Option<Vec<f64>>> {
        let grid = self.build_grid()?;
        match self.reference {
            Reference::None => Ok(None),
            Reference::ExactTransport { .. } | Reference::WrappedGaussian(_) => {
                Ok(self.analytic_reference(&grid, self.t_final))
            }
            Reference::SelfRefined { len, delta_t } => {
                let mut fine = self.clone();
                fine.grid.len = len;
                fine.delta_t = delta_t;
                fine.reference = Reference::None;
                let sol = fine.solve(0)?;
                let u = &sol.result.state.u;
                let values = match self.grid.kind {
                    GridKind::Chebyshev => grid
                        .nodes()
                        .iter()
                        .map(|&x| chebyshev_interpolate(&sol.grid, u, x))
                        .collect::<Result<Vec<_>>>()?,
                    GridKind::Periodic => {
                        if len % self.grid.len != 0 {
                            return Err(Error::InvalidParameter(format!(
                                "reference grid {len} is not a multiple of {}",
                                self.grid.len
                            )));
                        }
                        u.iter().step_by(len / self.grid.len).copied().collect()
                    }
                };
                Ok(Some(values))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingSample {
    pub len: usize,
    pub stencil_len: usize,
    pub harvest_ns: u128,
    pub step_ns_total: u128,
    pub steps: usize,
}

impl BenchmarkSpec {
    /// Time the harvest and the stepping loop separately. With `warmup`,
    /// one untimed pass runs first. Values are not checked for finiteness,
    /// so unstable configurations can still be timed.
    pub fn time_stepping(&self, warmup: bool) -> Result<TimingSample> {
        self.validate()?;
        let grid = self.build_grid()?;
        let stencils = self.stencils(&grid)?;
        let problem = self.problem(&grid, &stencils)?;
        let steps = (self.t_final / self.delta_t - 1e-9).ceil().max(1.0) as usize;
        let dt = self.t_final / steps as f64;
        let fixed = self.boundary.fixed_nodes(grid.len());

        let clock = Instant::now();
        let stepper = Stepper::harvest(self.scheme, &grid, &stencils, &self.linear, dt, &fixed)?;
        let harvest_ns = clock.elapsed().as_nanos();

        let pass = || -> Result<u128> {
            let mut state = StepperState::new(problem.initial.clone(), 0.0);
            let clock = Instant::now();
            for _ in 0..steps {
                stepper.step(&problem, &mut state)?;
            }
            let ns = clock.elapsed().as_nanos();
            std::hint::black_box(&state.u);
            Ok(ns)
        };
        if warmup {
            pass()?;
        }
        Ok(TimingSample {
            len: grid.len(),
            stencil_len: self.stencil_len,
            harvest_ns,
            step_ns_total: pass()?,
            steps,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: Grid,
    pub result: SimulationResult,
}

/// Lie splitting baseline: each term of the operator gets its own harvested
/// propagator and the propagators are applied one after another. Only used
/// to compare against the coupled exponential.
#[derive(Debug, Clone)]
pub struct LieSplit {
    pub parts: Vec<BandedPropagator>,
}

impl LieSplit {
    pub fn harvest(grid: &Grid, stencils: &[Stencil], spec: &LinearOperatorSpec, delta_t: f64) -> Result<Self> {
        let parts = spec
            .terms()
            .iter()
            .map(|&term| {
                let single = LinearOperatorSpec::new(vec![term])?;
                assemble_global(grid, stencils, &single, delta_t)
            })
            .collect::<Result<_>>()?;
        Ok(LieSplit { parts })
    }

    pub fn step(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut v = u.to_vec();
        for p in &self.parts {
            v = p.apply(&v)?;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{conserved_quantities, linf};

    #[test]
    fn advection_courant_numbers() {
        let lag = advection_benchmark(128, 5, StencilPolicy::Centered, 0.0).unwrap();
        assert!((lag.delta_t - 2.0 / 128.0).abs() < 1e-16);
        let half = advection_benchmark(128, 5, StencilPolicy::Centered, 0.5).unwrap();
        assert!((half.delta_t / (2.0 / 128.0) - 0.5).abs() < 1e-15);
        assert_eq!(courant_number(25, StencilPolicy::OneSidedUpwind, 0.5), 12.5);
        assert!(advection_benchmark(128, 5, StencilPolicy::Centered, 1.0).is_err());
    }

    #[test]
    fn advdiff_reference_starts_at_initial_data() {
        for len in [64, 128, 512] {
            let b = advdiff_benchmark(len, 9);
            let g = b.build_grid().unwrap();
            let r = b.analytic_reference(&g, 0.0).unwrap();
            let u0 = b.initial_values(&g);
            for (a, c) in r.iter().zip(&u0) {
                assert!((a - c).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn allen_cahn_initial_data_hits_boundary_values() {
        let b = allen_cahn_benchmark(64, 21);
        let g = b.build_grid().unwrap();
        let u = b.initial_values(&g);
        assert_eq!(u[0], -1.0);
        assert_eq!(u[63], 1.0);
        assert!((b.initial.eval(1.0) - 1.0).abs() < 1e-15);
        assert!(b.problem(&g, &b.stencils(&g).unwrap()).is_ok());
    }

    #[test]
    fn kdv_initial_invariants() {
        let b = kdv_benchmark(512, 23);
        let g = b.build_grid().unwrap();
        let u = b.initial_values(&g);
        let c = conserved_quantities(&u, &g).unwrap();
        let direct: f64 = u.iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / 512.0;
        assert!((c.energy_l2 - direct).abs() <= 1e-12 * direct);
        assert!((linf(&u) - 3.0 * 625.0).abs() < 5.0);
    }

    #[test]
    fn kdv_linear_part_conserves_energy() {
        let mut b = kdv_benchmark(512, 23);
        b.nonlinearity = NonlinearityKind::None;
        b.scheme = Scheme::Linear;
        b.t_final = 100.0 * b.delta_t;
        let g = b.build_grid().unwrap();
        let e0 = conserved_quantities(&b.initial_values(&g), &g).unwrap().energy_l2;
        let sol = b.solve(0).unwrap();
        let e1 = conserved_quantities(&sol.result.state.u, &g).unwrap().energy_l2;
        assert!(((e1 - e0) / e0).abs() < 1e-8, "{}", (e1 - e0) / e0);
    }

    #[test]
    fn burgers_reference_descriptor() {
        let b = burgers_benchmark(256, 19, 0.02);
        assert_eq!(
            b.reference,
            Reference::SelfRefined {
                len: 256,
                delta_t: 0.02 / 64.0
            }
        );
    }

    #[test]
    fn benchmark_names_round_trip() {
        for k in BenchmarkKind::ALL {
            assert_eq!(k.as_str().parse::<BenchmarkKind>().unwrap(), k);
            let spec = BenchmarkSpec::preset(k);
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<BenchmarkSpec>(&json).unwrap(), spec);
        }
        assert!("heat".parse::<BenchmarkKind>().is_err());
    }

    #[test]
    fn exact_transport_reference_wraps() {
        let b = advection_benchmark(64, 5, StencilPolicy::Centered, 0.0).unwrap();
        let g = b.build_grid().unwrap();
        let r = b.analytic_reference(&g, 2.0).unwrap();
        let u0 = b.initial_values(&g);
        for (a, c) in r.iter().zip(&u0) {
            assert!((a - c).abs() < 1e-14);
        }
    }

    #[test]
    fn lie_split_of_single_term_is_coupled() {
        let g = Grid::periodic(32, 0.0, 1.0).unwrap();
        let st = select_stencils(&g, 5, StencilPolicy::Centered).unwrap();
        let spec = LinearOperatorSpec::advection(1.0);
        let split = LieSplit::harvest(&g, &st, &spec, 0.01).unwrap();
        let coupled = assemble_global(&g, &st, &spec, 0.01).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| (6.0 * x).sin()).collect();
        assert_eq!(split.step(&u).unwrap(), coupled.apply(&u).unwrap());
    }
}
