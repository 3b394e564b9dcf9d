//! Shared fixtures for the benchmarks.

use lmep::problems::burgers_benchmark;
use lmep::{local_operator, select_stencils, Grid, LinearOperatorSpec, SemiLinearProblem, Stencil, StencilPolicy};

pub struct Fixture {
    pub grid: Grid,
    pub stencils: Vec<Stencil>,
    pub spec: LinearOperatorSpec,
}

/// Periodic grid on `[0, 2 pi)` with centred stencils and an
/// advection-diffusion operator.
pub fn periodic(len: usize, n: usize) -> Fixture {
    let grid = Grid::periodic(len, 0.0, 2.0 * std::f64::consts::PI).expect("grid");
    let stencils = select_stencils(&grid, n, StencilPolicy::Centered).expect("stencils");
    Fixture {
        grid,
        stencils,
        spec: LinearOperatorSpec::advection_diffusion(1.0, 0.1),
    }
}

/// Chebyshev grid, so every row needs its own exponential.
pub fn chebyshev(len: usize, n: usize) -> Fixture {
    let grid = Grid::chebyshev(len, -1.0, 1.0).expect("grid");
    let stencils = select_stencils(&grid, n, StencilPolicy::Centered).expect("stencils");
    Fixture {
        grid,
        stencils,
        spec: LinearOperatorSpec::diffusion(0.01),
    }
}

/// Local operator on `n` equispaced nodes with spacing `h`.
pub fn local(n: usize, h: f64) -> lmep::DenseMatrix {
    let c = (n - 1) as f64 / 2.0;
    let x: Vec<f64> = (0..n).map(|j| (j as f64 - c) * h).collect();
    local_operator(&x, &LinearOperatorSpec::advection_diffusion(1.0, 0.1)).expect("operator")
}

/// Burgers problem and its grid/stencils at the benchmark settings.
pub fn burgers(len: usize, n: usize) -> (Grid, Vec<Stencil>, SemiLinearProblem, LinearOperatorSpec) {
    let b = burgers_benchmark(len, n, 0.01);
    let grid = b.build_grid().expect("grid");
    let stencils = b.stencils(&grid).expect("stencils");
    let problem = b.problem(&grid, &stencils).expect("problem");
    (grid, stencils, problem, b.linear)
}
