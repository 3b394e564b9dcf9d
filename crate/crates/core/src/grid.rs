//! One-dimensional grids and per-node stencil selection.
//!
//! Stencils are contiguous windows in grid order. On periodic grids the
//! window wraps around; on non-periodic grids it slides until it fits inside
//! the node range, which moves the target away from the window centre near
//! the boundaries.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    PeriodicUniform,
    NonPeriodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StencilPolicy {
    /// Window centred on the target (clamped near non-periodic boundaries).
    Centered,
    /// Window ending at the target: the target is the downwind-most member
    /// for a positive wave speed.
    OneSidedUpwind,
    /// Mirror image of [`StencilPolicy::OneSidedUpwind`] for negative wave
    /// speeds: the window starts at the target.
    OneSidedUpwindNegative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    domain: (f64, f64),
    topology: Topology,
    h_min: f64,
}

impl Grid {
    /// Uniform periodic grid on `[x_min, x_max)`; the right endpoint is the
    /// periodic image of the left one and is not stored.
    pub fn periodic(len: usize, x_min: f64, x_max: f64) -> Result<Self> {
        check_interval(len, x_min, x_max)?;
        let h = (x_max - x_min) / len as f64;
        let nodes = (0..len).map(|j| x_min + j as f64 * h).collect();
        Ok(Grid {
            nodes,
            domain: (x_min, x_max),
            topology: Topology::PeriodicUniform,
            h_min: h,
        })
    }

    /// Chebyshev–Gauss–Lobatto grid mapped onto `[x_min, x_max]`, ascending.
    pub fn chebyshev(len: usize, x_min: f64, x_max: f64) -> Result<Self> {
        check_interval(len, x_min, x_max)?;
        let mid = 0.5 * (x_min + x_max);
        let half = 0.5 * (x_max - x_min);
        let m = (len - 1) as f64;
        let mut nodes: Vec<f64> = (0..len)
            .map(|i| {
                // Ascending order: x_i = -cos(i pi / (N-1)). The sine form
                // keeps the mirror symmetry exact in floating point.
                let s = (PI * (2.0 * i as f64 - m) / (2.0 * m)).sin();
                mid + half * s
            })
            .collect();
        nodes[0] = x_min;
        nodes[len - 1] = x_max;
        let h_min = nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        Ok(Grid {
            nodes,
            domain: (x_min, x_max),
            topology: Topology::NonPeriodic,
            h_min,
        })
    }

    /// Non-periodic grid from arbitrary strictly increasing coordinates.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite coordinate".into()));
        }
        let mut h_min = f64::INFINITY;
        for w in nodes.windows(2) {
            let gap = w[1] - w[0];
            if gap <= 0.0 {
                return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
            }
            h_min = h_min.min(gap);
        }
        let domain = (nodes[0], nodes[nodes.len() - 1]);
        Ok(Grid {
            nodes,
            domain,
            topology: Topology::NonPeriodic,
            h_min,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_periodic(&self) -> bool {
        self.topology == Topology::PeriodicUniform
    }

    /// Smallest gap between neighbouring nodes.
    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn period(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    /// Coordinates of the stencil members relative to the target node.
    ///
    /// Periodic wraparound is unfolded so the returned offsets are strictly
    /// increasing, and the target sits exactly at zero.
    pub fn local_coordinates(&self, stencil: &Stencil) -> Vec<f64> {
        let x0 = self.nodes[stencil.target];
        match self.topology {
            Topology::NonPeriodic => stencil.members.iter().map(|&j| self.nodes[j] - x0).collect(),
            Topology::PeriodicUniform => {
                let h = self.h_min;
                stencil
                    .signed_offsets(self.len())
                    .into_iter()
                    .map(|k| k as f64 * h)
                    .collect()
            }
        }
    }
}

fn check_interval(len: usize, x_min: f64, x_max: f64) -> Result<()> {
    if len < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {len}")));
    }
    if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
        return Err(Error::InvalidGrid(format!(
            "degenerate interval [{x_min}, {x_max}]"
        )));
    }
    Ok(())
}

/// Window of `n` grid nodes feeding the update of one target node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stencil {
    pub target: usize,
    pub members: Vec<usize>,
    pub target_row: usize,
}

impl Stencil {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Integer offset of each member relative to the target, unfolding any
    /// periodic wraparound on a grid of `grid_len` nodes.
    pub fn signed_offsets(&self, grid_len: usize) -> Vec<i64> {
        let r = self.target_row as i64;
        let base = self.target as i64 - r;
        self.members
            .iter()
            .enumerate()
            .map(|(pos, &m)| {
                // Member at window position `pos` is node (base + pos) mod N.
                debug_assert_eq!(
                    (base + pos as i64).rem_euclid(grid_len as i64) as usize,
                    m
                );
                pos as i64 - r
            })
            .collect()
    }
}

/// Assign one stencil of `n` nodes to every grid node.
pub fn select_stencils(grid: &Grid, n: usize, policy: StencilPolicy) -> Result<Vec<Stencil>> {
    let len = grid.len();
    if n == 0 {
        return Err(Error::InvalidStencil("stencil size must be positive".into()));
    }
    if n > len {
        return Err(Error::StencilTooLarge { n, grid_len: len });
    }
    if policy == StencilPolicy::Centered && n % 2 == 0 {
        return Err(Error::InvalidStencil(format!(
            "centred stencils need an odd size, got {n}"
        )));
    }
    let lead = match policy {
        StencilPolicy::Centered => (n - 1) / 2,
        StencilPolicy::OneSidedUpwind => n - 1,
        StencilPolicy::OneSidedUpwindNegative => 0,
    };
    let stencils = (0..len)
        .map(|target| match grid.topology() {
            Topology::PeriodicUniform => {
                let start = target as i64 - lead as i64;
                let members = (0..n)
                    .map(|p| (start + p as i64).rem_euclid(len as i64) as usize)
                    .collect();
                Stencil {
                    target,
                    members,
                    target_row: lead,
                }
            }
            Topology::NonPeriodic => {
                let start = (target as i64 - lead as i64).clamp(0, (len - n) as i64) as usize;
                Stencil {
                    target,
                    members: (start..start + n).collect(),
                    target_row: target - start,
                }
            }
        })
        .collect();
    Ok(stencils)
}
