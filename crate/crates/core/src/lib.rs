//! Local matrix exponential propagators.
//!
//! Exponentiating a small finite-difference operator on an `n`-node stencil
//! and keeping one row of the result gives an `n`-point time-stepping rule
//! that is exact for the local polynomial interpolant. Assembling those rows
//! for every node gives a banded global propagator; the same construction on
//! a block-augmented operator yields phi-function weights for exponential
//! integrators of semi-linear problems.

pub mod analysis;
pub mod error;
pub mod expm;
pub mod grid;
pub mod harvest;
pub mod localop;
pub mod problems;
pub mod timestep;

pub use analysis::{Conserved, Norms, ScanSettings, SpectralFootprint, StabilityBoundary, WrappedGaussian};
pub use error::{Error, Result};
pub use expm::{expm, phi_scalar, DenseMatrix};
pub use grid::{select_stencils, Grid, Stencil, StencilPolicy, Topology};
pub use harvest::{BandedPropagator, PhiPropagators, PhiWeightSet, WeightTable};
pub use localop::{fornberg_weights, local_operator, LinearOperatorSpec};
pub use problems::{BenchmarkKind, BenchmarkSpec, Reference, TimingSample};
pub use timestep::{Boundary, Scheme, SemiLinearProblem, SimulationResult, StepperState};
