//! Time integrators built from harvested banded operators: pure linear
//! stepping, exponential Runge–Kutta (ETDRK4) and exponential multistep
//! (ETD-s) schemes for `u_t = L u + N(u, t)`.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Stencil};
use crate::harvest::{
    assemble_global_fixed, assemble_global_phi, assemble_global_phi_fixed, BandedPropagator, PhiPropagators,
};
use crate::localop::LinearOperatorSpec;

/// Nonlinear forcing `N(u, t)` written into `out`.
pub trait Nonlinearity: Send + Sync {
    fn eval(&self, u: &[f64], t: f64, out: &mut [f64]);

    /// `true` when `N` vanishes identically.
    fn is_zero(&self) -> bool {
        false
    }
}

impl<F> Nonlinearity for F
where
    F: Fn(&[f64], f64, &mut [f64]) + Send + Sync,
{
    fn eval(&self, u: &[f64], t: f64, out: &mut [f64]) {
        self(u, t, out)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoNonlinearity;

impl Nonlinearity for NoNonlinearity {
    fn eval(&self, _u: &[f64], _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// `N(u) = -c u u_x` with `u_x` from a banded first-derivative operator.
#[derive(Debug, Clone)]
pub struct Convective {
    derivative: BandedPropagator,
    coefficient: f64,
}

impl Convective {
    pub fn new(derivative: BandedPropagator, coefficient: f64) -> Self {
        Convective {
            derivative,
            coefficient,
        }
    }
}

impl Nonlinearity for Convective {
    fn eval(&self, u: &[f64], _t: f64, out: &mut [f64]) {
        // Lengths are fixed when the problem is built.
        self.derivative
            .apply_into(u, out)
            .expect("derivative operator matches the grid");
        for (o, &v) in out.iter_mut().zip(u) {
            *o *= -self.coefficient * v;
        }
    }
}

/// `N(u) = -u^3`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CubicReaction;

impl Nonlinearity for CubicReaction {
    fn eval(&self, u: &[f64], _t: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(u) {
            *o = -v * v * v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Periodic grids, or non-periodic ones left free.
    Free,
    /// First and last node are overwritten with fixed values after every
    /// stage and step.
    DirichletPinned { left: f64, right: f64 },
    /// Pinned as above, and additionally the boundary nodes are held fixed
    /// inside every local exponential (their operator rows are zeroed) with
    /// the nonlinear forcing masked there.
    DirichletFixed { left: f64, right: f64 },
}

impl Boundary {
    pub fn values(&self) -> Option<(f64, f64)> {
        match *self {
            Boundary::Free => None,
            Boundary::DirichletPinned { left, right } | Boundary::DirichletFixed { left, right } => Some((left, right)),
        }
    }

    /// Nodes held fixed during harvesting.
    pub fn fixed_nodes(&self, len: usize) -> Vec<usize> {
        match self {
            Boundary::DirichletFixed { .. } if len > 0 => vec![0, len - 1],
            _ => Vec::new(),
        }
    }

    fn mask_forcing(&self, n: &mut [f64]) {
        if let Boundary::DirichletFixed { .. } = self {
            if let Some(first) = n.first_mut() {
                *first = 0.0;
            }
            if let Some(last) = n.last_mut() {
                *last = 0.0;
            }
        }
    }

    fn pin(&self, u: &mut [f64]) {
        if let Some((left, right)) = self.values() {
            if let Some(first) = u.first_mut() {
                *first = left;
            }
            if let Some(last) = u.last_mut() {
                *last = right;
            }
        }
    }
}

pub struct SemiLinearProblem {
    pub linear: LinearOperatorSpec,
    pub nonlinear: Box<dyn Nonlinearity>,
    pub initial: Vec<f64>,
    pub boundary: Boundary,
}

impl SemiLinearProblem {
    pub fn new(
        linear: LinearOperatorSpec,
        nonlinear: Box<dyn Nonlinearity>,
        initial: Vec<f64>,
        boundary: Boundary,
    ) -> Result<Self> {
        if initial.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial data".into()));
        }
        if let Some((left, right)) = boundary.values() {
            let (Some(&a), Some(&b)) = (initial.first(), initial.last()) else {
                return Err(Error::InvalidParameter("empty initial data".into()));
            };
            if (a - left).abs() > 1e-12 || (b - right).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "initial data ({a}, {b}) violates Dirichlet values ({left}, {right})"
                )));
            }
        }
        Ok(SemiLinearProblem {
            linear,
            nonlinear,
            initial,
            boundary,
        })
    }

    pub fn linear_only(linear: LinearOperatorSpec, initial: Vec<f64>) -> Result<Self> {
        Self::new(linear, Box::new(NoNonlinearity), initial, Boundary::Free)
    }

    pub fn len(&self) -> usize {
        self.initial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperState {
    pub u: Vec<f64>,
    pub t: f64,
    /// Previous nonlinear evaluations, most recent first (multistep only).
    pub history: VecDeque<Vec<f64>>,
}

impl StepperState {
    pub fn new(u: Vec<f64>, t: f64) -> Self {
        StepperState {
            u,
            t,
            history: VecDeque::new(),
        }
    }
}

/// `u <- P u`, `t <- t + dt`.
pub fn step_linear(prop: &BandedPropagator, delta_t: f64, state: &mut StepperState) -> Result<()> {
    let next = prop.apply(&state.u)?;
    state.u = next;
    state.t += delta_t;
    Ok(())
}

/// Banded operators for one ETDRK4 step size.
#[derive(Debug, Clone)]
pub struct EtdRk4Operators {
    pub delta_t: f64,
    /// `exp(dt L)`.
    full: BandedPropagator,
    /// `exp(dt L / 2)`.
    half: BandedPropagator,
    /// `(dt/2) phi_1(dt L / 2)`.
    half_phi1: BandedPropagator,
    /// `dt (phi_1 - 3 phi_2 + 4 phi_3)`.
    alpha: BandedPropagator,
    /// `dt (2 phi_2 - 4 phi_3)`.
    beta: BandedPropagator,
    /// `dt (4 phi_3 - phi_2)`.
    gamma: BandedPropagator,
}

impl EtdRk4Operators {
    /// Combine operators harvested with depth >= 4 at `dt` and depth >= 2 at
    /// `dt / 2`.
    pub fn from_harvest(full: &PhiPropagators, half: &PhiPropagators) -> Result<Self> {
        let dt = full.delta_t;
        if full.phi.len() < 3 || half.phi.is_empty() {
            return Err(Error::InvalidParameter(
                "ETDRK4 needs phi_1..phi_3 at dt and phi_1 at dt/2".into(),
            ));
        }
        if half.delta_t.to_bits() != (0.5 * dt).to_bits() {
            return Err(Error::InvalidParameter(format!(
                "half-step operators harvested at {} instead of {}",
                half.delta_t,
                0.5 * dt
            )));
        }
        // Harvested phi rows carry dt^j: phi[j] ~ dt^(j+1) phi_{j+1}.
        let (w1, w2, w3) = (&full.phi[0], &full.phi[1], &full.phi[2]);
        let (c2, c3) = (1.0 / dt, 1.0 / (dt * dt));
        Ok(EtdRk4Operators {
            delta_t: dt,
            full: full.lin.clone(),
            half: half.lin.clone(),
            half_phi1: half.phi[0].clone(),
            alpha: BandedPropagator::linear_combination(&[(1.0, w1), (-3.0 * c2, w2), (4.0 * c3, w3)])?,
            beta: BandedPropagator::linear_combination(&[(2.0 * c2, w2), (-4.0 * c3, w3)])?,
            gamma: BandedPropagator::linear_combination(&[(4.0 * c3, w3), (-c2, w2)])?,
        })
    }

    pub fn harvest(grid: &Grid, stencils: &[Stencil], spec: &LinearOperatorSpec, delta_t: f64) -> Result<Self> {
        let full = assemble_global_phi(grid, stencils, spec, delta_t, 4)?;
        let half = assemble_global_phi(grid, stencils, spec, 0.5 * delta_t, 2)?;
        Self::from_harvest(&full, &half)
    }

    pub fn len(&self) -> usize {
        self.full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.full.is_empty()
    }
}

/// One ETDRK4 step; returns `N(u_k, t_k)` so multistep warm-up can record it.
pub fn etdrk4_step(
    ops: &EtdRk4Operators,
    problem: &SemiLinearProblem,
    state: &mut StepperState,
) -> Result<Vec<f64>> {
    let len = ops.len();
    if state.u.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            found: state.u.len(),
        });
    }
    let dt = ops.delta_t;
    let t = state.t;
    let bc = &problem.boundary;
    let nl = |u: &[f64], t: f64, out: &mut [f64]| {
        problem.nonlinear.eval(u, t, out);
        bc.mask_forcing(out);
    };

    let mut n_u = vec![0.0; len];
    nl(&state.u, t, &mut n_u);

    let mut eu = vec![0.0; len];
    ops.half.apply_into(&state.u, &mut eu)?;

    let mut a = eu.clone();
    ops.half_phi1.apply_add(1.0, &n_u, &mut a)?;
    bc.pin(&mut a);
    let mut n_a = vec![0.0; len];
    nl(&a, t + 0.5 * dt, &mut n_a);

    let mut b = eu;
    ops.half_phi1.apply_add(1.0, &n_a, &mut b)?;
    bc.pin(&mut b);
    let mut n_b = vec![0.0; len];
    nl(&b, t + 0.5 * dt, &mut n_b);

    let mut c = vec![0.0; len];
    ops.half.apply_into(&a, &mut c)?;
    let forcing: Vec<f64> = n_b.iter().zip(&n_u).map(|(nb, nu)| 2.0 * nb - nu).collect();
    ops.half_phi1.apply_add(1.0, &forcing, &mut c)?;
    bc.pin(&mut c);
    let mut n_c = vec![0.0; len];
    nl(&c, t + dt, &mut n_c);

    let mut next = vec![0.0; len];
    ops.full.apply_into(&state.u, &mut next)?;
    ops.alpha.apply_add(1.0, &n_u, &mut next)?;
    let n_ab: Vec<f64> = n_a.iter().zip(&n_b).map(|(x, y)| x + y).collect();
    ops.beta.apply_add(1.0, &n_ab, &mut next)?;
    ops.gamma.apply_add(1.0, &n_c, &mut next)?;
    bc.pin(&mut next);

    state.u = next;
    state.t = t + dt;
    Ok(n_u)
}

/// Operators for the exponential multistep update
/// `u_{k+1} = e^{dt L} u_k + dt sum_{j<s} phi_{j+1}(dt L) grad^j N_k`,
/// regrouped by history slot: `history_ops[i]` multiplies `N_{k-i}`.
#[derive(Debug, Clone)]
pub struct EtdMultistepOperators {
    pub delta_t: f64,
    pub order: usize,
    lin: BandedPropagator,
    history_ops: Vec<BandedPropagator>,
}

impl EtdMultistepOperators {
    pub fn from_harvest(ops: &PhiPropagators, order: usize) -> Result<Self> {
        if order == 0 || ops.phi.len() < order {
            return Err(Error::InvalidParameter(format!(
                "order-{order} multistep needs phi_1..phi_{order}, harvested {}",
                ops.phi.len()
            )));
        }
        let dt = ops.delta_t;
        // dt phi_{j+1} = phi[j] / dt^j; grad^j N_k = sum_i (-1)^i C(j,i) N_{k-i}.
        let history_ops = (0..order)
            .map(|i| {
                let terms: Vec<(f64, &BandedPropagator)> = (i..order)
                    .map(|j| {
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        (sign * binomial(j, i) / dt.powi(j as i32), &ops.phi[j])
                    })
                    .collect();
                BandedPropagator::linear_combination(&terms)
            })
            .collect::<Result<_>>()?;
        Ok(EtdMultistepOperators {
            delta_t: dt,
            order,
            lin: ops.lin.clone(),
            history_ops,
        })
    }

    pub fn harvest(
        grid: &Grid,
        stencils: &[Stencil],
        spec: &LinearOperatorSpec,
        delta_t: f64,
        order: usize,
    ) -> Result<Self> {
        let ops = assemble_global_phi(grid, stencils, spec, delta_t, order + 1)?;
        Self::from_harvest(&ops, order)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// One ETD-s step. `state.history` must hold the `s - 1` previous nonlinear
/// evaluations; it is rotated on success.
pub fn etd_multistep_step(
    ops: &EtdMultistepOperators,
    problem: &SemiLinearProblem,
    state: &mut StepperState,
) -> Result<()> {
    let need = ops.order - 1;
    if state.history.len() < need {
        return Err(Error::NotWarmedUp {
            have: state.history.len(),
            need,
        });
    }
    let len = state.u.len();
    let mut n_k = vec![0.0; len];
    problem.nonlinear.eval(&state.u, state.t, &mut n_k);
    problem.boundary.mask_forcing(&mut n_k);

    let mut next = vec![0.0; len];
    ops.lin.apply_into(&state.u, &mut next)?;
    ops.history_ops[0].apply_add(1.0, &n_k, &mut next)?;
    for (op, past) in ops.history_ops[1..].iter().zip(&state.history) {
        op.apply_add(1.0, past, &mut next)?;
    }
    problem.boundary.pin(&mut next);

    state.u = next;
    state.t += ops.delta_t;
    state.history.push_front(n_k);
    state.history.truncate(need);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Linear propagator only; any nonlinearity is ignored.
    Linear,
    EtdRk4,
    /// Exponential multistep of the given order, warmed up with ETDRK4.
    EtdMultistep(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub state: StepperState,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    /// Step actually used: `t_final / steps`.
    pub delta_t: f64,
    pub harvest_time: Duration,
    pub step_time: Duration,
}

/// Harvested operators for one scheme at one step size.
#[derive(Debug, Clone)]
pub enum Stepper {
    Linear { prop: BandedPropagator, delta_t: f64 },
    EtdRk4(EtdRk4Operators),
    EtdMultistep {
        warmup: EtdRk4Operators,
        ops: EtdMultistepOperators,
    },
}

impl Stepper {
    pub fn harvest(
        scheme: Scheme,
        grid: &Grid,
        stencils: &[Stencil],
        spec: &LinearOperatorSpec,
        delta_t: f64,
        fixed: &[usize],
    ) -> Result<Self> {
        Ok(match scheme {
            Scheme::Linear => Stepper::Linear {
                prop: assemble_global_fixed(grid, stencils, spec, delta_t, fixed)?,
                delta_t,
            },
            Scheme::EtdRk4 => {
                let full = assemble_global_phi_fixed(grid, stencils, spec, delta_t, 4, fixed)?;
                let half = assemble_global_phi_fixed(grid, stencils, spec, 0.5 * delta_t, 2, fixed)?;
                Stepper::EtdRk4(EtdRk4Operators::from_harvest(&full, &half)?)
            }
            Scheme::EtdMultistep(order) => {
                let full = assemble_global_phi_fixed(grid, stencils, spec, delta_t, (order + 1).max(4), fixed)?;
                let half = assemble_global_phi_fixed(grid, stencils, spec, 0.5 * delta_t, 2, fixed)?;
                Stepper::EtdMultistep {
                    warmup: EtdRk4Operators::from_harvest(&full, &half)?,
                    ops: EtdMultistepOperators::from_harvest(&full, order)?,
                }
            }
        })
    }

    pub fn step(&self, problem: &SemiLinearProblem, state: &mut StepperState) -> Result<()> {
        match self {
            Stepper::Linear { prop, delta_t } => {
                step_linear(prop, *delta_t, state)?;
                problem.boundary.pin(&mut state.u);
                Ok(())
            }
            Stepper::EtdRk4(ops) => etdrk4_step(ops, problem, state).map(|_| ()),
            Stepper::EtdMultistep { warmup, ops } => {
                if state.history.len() < ops.order - 1 {
                    let n_u = etdrk4_step(warmup, problem, state)?;
                    state.history.push_front(n_u);
                    Ok(())
                } else {
                    etd_multistep_step(ops, problem, state)
                }
            }
        }
    }
}

/// Integrate `problem` to `t_final`. The step is shrunk, if needed, so a
/// whole number of steps lands on `t_final`; snapshots are taken every
/// `snapshot_stride` steps (plus the initial and final states).
pub fn run(
    problem: &SemiLinearProblem,
    grid: &Grid,
    stencils: &[Stencil],
    scheme: Scheme,
    delta_t: f64,
    t_final: f64,
    snapshot_stride: usize,
) -> Result<SimulationResult> {
    run_with_observer(problem, grid, stencils, scheme, delta_t, t_final, snapshot_stride, |_, _| {})
}

#[allow(clippy::too_many_arguments)]
pub fn run_with_observer<F>(
    problem: &SemiLinearProblem,
    grid: &Grid,
    stencils: &[Stencil],
    scheme: Scheme,
    delta_t: f64,
    t_final: f64,
    snapshot_stride: usize,
    mut observe: F,
) -> Result<SimulationResult>
where
    F: FnMut(usize, &StepperState),
{
    if problem.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: problem.len(),
        });
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_final = {t_final}")));
    }
    if !(delta_t > 0.0 && delta_t.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt = {delta_t}")));
    }
    let steps = (t_final / delta_t - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { delta_t } else { t_final / steps as f64 };

    let mut state = StepperState::new(problem.initial.clone(), 0.0);
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: 0.0,
        u: state.u.clone(),
    }];
    observe(0, &state);
    if steps == 0 {
        return Ok(SimulationResult {
            state,
            snapshots,
            steps,
            delta_t: dt,
            harvest_time: Duration::ZERO,
            step_time: Duration::ZERO,
        });
    }

    let clock = Instant::now();
    let fixed = problem.boundary.fixed_nodes(grid.len());
    let stepper = Stepper::harvest(scheme, grid, stencils, &problem.linear, dt, &fixed)?;
    let harvest_time = clock.elapsed();

    let clock = Instant::now();
    let mut last_finite = state.u.clone();
    for k in 1..=steps {
        stepper.step(problem, &mut state)?;
        if state.u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                step: k,
                t: state.t,
                last_finite,
            });
        }
        if k == steps {
            state.t = t_final;
        }
        if (snapshot_stride > 0 && k % snapshot_stride == 0) || k == steps {
            snapshots.push(Snapshot {
                step: k,
                t: state.t,
                u: state.u.clone(),
            });
        }
        observe(k, &state);
        last_finite.clone_from(&state.u);
    }
    let step_time = clock.elapsed();

    Ok(SimulationResult {
        state,
        snapshots,
        steps,
        delta_t: dt,
        harvest_time,
        step_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expm::phi_scalar;
    use crate::grid::{select_stencils, StencilPolicy};
    use crate::harvest::assemble_global;

    fn scalar_grid() -> (Grid, Vec<Stencil>) {
        // Three decoupled copies of a scalar ODE: one-node stencils.
        let g = Grid::periodic(3, 0.0, 1.0).unwrap();
        let st = select_stencils(&g, 1, StencilPolicy::OneSidedUpwind).unwrap();
        (g, st)
    }

    /// Classical ETDRK4 for `u' = lambda u + f(u, t)` written from the
    /// scalar phi functions.
    fn scalar_etdrk4(lambda: f64, f: impl Fn(f64, f64) -> f64, u0: f64, dt: f64, steps: usize) -> f64 {
        let z = lambda * dt;
        let (e, e2) = (z.exp(), (z / 2.0).exp());
        let p1h = phi_scalar(1, z / 2.0);
        let (p1, p2, p3) = (phi_scalar(1, z), phi_scalar(2, z), phi_scalar(3, z));
        let mut u = u0;
        let mut t = 0.0;
        for _ in 0..steps {
            let nu = f(u, t);
            let a = e2 * u + dt / 2.0 * p1h * nu;
            let na = f(a, t + dt / 2.0);
            let b = e2 * u + dt / 2.0 * p1h * na;
            let nb = f(b, t + dt / 2.0);
            let c = e2 * a + dt / 2.0 * p1h * (2.0 * nb - nu);
            let nc = f(c, t + dt);
            u = e * u
                + dt * ((p1 - 3.0 * p2 + 4.0 * p3) * nu
                    + (2.0 * p2 - 4.0 * p3) * (na + nb)
                    + (4.0 * p3 - p2) * nc);
            t += dt;
        }
        u
    }

    #[test]
    fn linear_step_identity() {
        let p = BandedPropagator::identity(4);
        let mut s = StepperState::new(vec![1.0, 2.0, 3.0, 4.0], 0.5);
        step_linear(&p, 0.25, &mut s).unwrap();
        assert_eq!(s.u, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.t, 0.75);
    }

    #[test]
    fn etdrk4_matches_scalar_oracle() {
        let (g, st) = scalar_grid();
        let lambda = -2.5;
        let dt = 0.1;
        let spec = LinearOperatorSpec::new(vec![(0, lambda)]).unwrap();
        let forcing = |_: &[f64], t: f64, out: &mut [f64]| out.fill(t.cos());
        let problem = SemiLinearProblem::new(spec.clone(), Box::new(forcing), vec![1.0; 3], Boundary::Free).unwrap();
        let ops = EtdRk4Operators::harvest(&g, &st, &spec, dt).unwrap();
        let mut s = StepperState::new(problem.initial.clone(), 0.0);
        for _ in 0..30 {
            etdrk4_step(&ops, &problem, &mut s).unwrap();
        }
        let expect = scalar_etdrk4(lambda, |_, t| t.cos(), 1.0, dt, 30);
        for v in &s.u {
            assert!((v - expect).abs() < 1e-13, "{v} vs {expect}");
        }
    }

    #[test]
    fn etdrk4_degenerates_to_rk4() {
        let (g, st) = scalar_grid();
        let spec = LinearOperatorSpec::new(vec![(0, 0.0)]).unwrap();
        let f = |u: f64, t: f64| -u * u + t.sin();
        let nl = move |u: &[f64], t: f64, out: &mut [f64]| {
            for (o, &v) in out.iter_mut().zip(u) {
                *o = f(v, t);
            }
        };
        let problem = SemiLinearProblem::new(spec.clone(), Box::new(nl), vec![0.8; 3], Boundary::Free).unwrap();
        let dt = 0.05;
        let ops = EtdRk4Operators::harvest(&g, &st, &spec, dt).unwrap();
        let mut s = StepperState::new(problem.initial.clone(), 0.0);
        let (mut u, mut t) = (0.8, 0.0);
        for _ in 0..20 {
            etdrk4_step(&ops, &problem, &mut s).unwrap();
            let k1 = f(u, t);
            let k2 = f(u + dt / 2.0 * k1, t + dt / 2.0);
            let k3 = f(u + dt / 2.0 * k2, t + dt / 2.0);
            let k4 = f(u + dt * k3, t + dt);
            u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
        assert!((s.u[0] - u).abs() < 1e-12, "{} vs {u}", s.u[0]);
    }

    #[test]
    fn schemes_agree_without_nonlinearity() {
        let g = Grid::periodic(32, 0.0, std::f64::consts::TAU).unwrap();
        let st = select_stencils(&g, 7, StencilPolicy::Centered).unwrap();
        let spec = LinearOperatorSpec::advection_diffusion(1.0, 0.05);
        let u0: Vec<f64> = g.nodes().iter().map(|x| (x.sin()).exp()).collect();
        let problem = SemiLinearProblem::linear_only(spec, u0).unwrap();
        let runs: Vec<Vec<f64>> = [Scheme::Linear, Scheme::EtdRk4, Scheme::EtdMultistep(1), Scheme::EtdMultistep(3)]
            .into_iter()
            .map(|sc| run(&problem, &g, &st, sc, 0.02, 0.4, 0).unwrap().state.u)
            .collect();
        for r in &runs[1..] {
            for (a, b) in r.iter().zip(&runs[0]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exponential_euler_one_step() {
        let (g, st) = scalar_grid();
        let lambda = -2.0;
        let dt = 0.3;
        let spec = LinearOperatorSpec::new(vec![(0, lambda)]).unwrap();
        let one = |_: &[f64], _: f64, out: &mut [f64]| out.fill(1.0);
        let problem = SemiLinearProblem::new(spec.clone(), Box::new(one), vec![0.2; 3], Boundary::Free).unwrap();
        let ops = EtdMultistepOperators::harvest(&g, &st, &spec, dt, 1).unwrap();
        let mut s = StepperState::new(problem.initial.clone(), 0.0);
        etd_multistep_step(&ops, &problem, &mut s).unwrap();
        let expect = (lambda * dt).exp() * 0.2 + dt * phi_scalar(1, lambda * dt);
        assert!((s.u[0] - expect).abs() < 1e-15);
        for _ in 0..200 {
            etd_multistep_step(&ops, &problem, &mut s).unwrap();
        }
        assert!((s.u[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn multistep_requires_history() {
        let (g, st) = scalar_grid();
        let spec = LinearOperatorSpec::new(vec![(0, -1.0)]).unwrap();
        let problem = SemiLinearProblem::linear_only(spec.clone(), vec![1.0; 3]).unwrap();
        let ops = EtdMultistepOperators::harvest(&g, &st, &spec, 0.1, 3).unwrap();
        let mut s = StepperState::new(vec![1.0; 3], 0.0);
        assert!(matches!(
            etd_multistep_step(&ops, &problem, &mut s),
            Err(Error::NotWarmedUp { have: 0, need: 2 })
        ));
    }

    #[test]
    fn run_zero_steps_and_pinning() {
        let g = Grid::chebyshev(16, -1.0, 1.0).unwrap();
        let st = select_stencils(&g, 5, StencilPolicy::Centered).unwrap();
        let spec = LinearOperatorSpec::new(vec![(0, 1.0), (2, 0.01)]).unwrap();
        let u0: Vec<f64> = g.nodes().to_vec();
        let problem = SemiLinearProblem::new(
            spec,
            Box::new(CubicReaction),
            u0.clone(),
            Boundary::DirichletPinned { left: -1.0, right: 1.0 },
        )
        .unwrap();
        let r = run(&problem, &g, &st, Scheme::EtdRk4, 0.01, 0.0, 1).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(r.state.u, u0);
        let r = run(&problem, &g, &st, Scheme::EtdRk4, 0.01, 0.5, 10).unwrap();
        assert_eq!(r.steps, 50);
        assert_eq!(r.snapshots.len(), 6);
        assert_eq!(r.state.u[0], -1.0);
        assert_eq!(r.state.u[15], 1.0);
        assert!(SemiLinearProblem::new(
            LinearOperatorSpec::diffusion(1.0),
            Box::new(NoNonlinearity),
            vec![0.0; 16],
            Boundary::DirichletPinned { left: -1.0, right: 1.0 },
        )
        .is_err());
    }

    #[test]
    fn divergence_reports_last_finite_state() {
        let g = Grid::periodic(8, 0.0, 1.0).unwrap();
        let st = select_stencils(&g, 1, StencilPolicy::Centered).unwrap();
        let spec = LinearOperatorSpec::new(vec![(0, 0.0)]).unwrap();
        let blowup = |u: &[f64], _: f64, out: &mut [f64]| {
            for (o, v) in out.iter_mut().zip(u) {
                *o = v * v * 1e3;
            }
        };
        let problem = SemiLinearProblem::new(spec, Box::new(blowup), vec![1.0; 8], Boundary::Free).unwrap();
        match run(&problem, &g, &st, Scheme::EtdRk4, 0.1, 10.0, 0) {
            Err(Error::Diverged { last_finite, step, .. }) => {
                assert!(step > 0);
                assert!(last_finite.iter().all(|v| v.is_finite()));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn convective_nonlinearity() {
        let g = Grid::periodic(64, 0.0, std::f64::consts::TAU).unwrap();
        let st = select_stencils(&g, 11, StencilPolicy::Centered).unwrap();
        let d1 = crate::harvest::assemble_derivative(&g, &st, 1).unwrap();
        let nl = Convective::new(d1, 1.0);
        let u: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
        let mut out = vec![0.0; 64];
        nl.eval(&u, 0.0, &mut out);
        for (x, v) in g.nodes().iter().zip(out) {
            assert!((v + x.sin() * x.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn lagrangian_period_returns_home() {
        let g = Grid::periodic(40, -1.0, 1.0).unwrap();
        let st = select_stencils(&g, 5, StencilPolicy::Centered).unwrap();
        let p = assemble_global(&g, &st, &LinearOperatorSpec::advection(1.0), g.h_min()).unwrap();
        let u0: Vec<f64> = g.nodes().iter().map(|x| (-40.0 * x * x).exp()).collect();
        let mut s = StepperState::new(u0.clone(), 0.0);
        for _ in 0..40 {
            step_linear(&p, g.h_min(), &mut s).unwrap();
        }
        let err = s.u.iter().zip(&u0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "{err}");
    }
}
