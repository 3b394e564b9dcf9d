//! Weight harvesting and banded global propagators.
//!
//! For every node the local operator `L_n` is built on the node's stencil (in
//! coordinates relative to the target), exponentiated, and the target row is
//! kept. Stencils whose local coordinates coincide exactly share one harvest,
//! so a periodic uniform grid costs a single small exponential.

use std::collections::HashMap;
use std::fmt::Write as _;

use ndarray::{s, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::grid::{Grid, Stencil, Topology};
use crate::localop::{fornberg_weights, local_operator, LinearOperatorSpec};

/// Deepest augmentation supported (phi_0 .. phi_5).
pub const MAX_AUGMENTATION: usize = 6;

/// Row `target_row` of `exp(delta_t * L)`.
pub fn harvest_propagator(l: &Array2<f64>, delta_t: f64, target_row: usize) -> Result<Vec<f64>> {
    check_row(l, target_row)?;
    let w = expm(&(l * delta_t))?;
    Ok(w.row(target_row).to_vec())
}

fn check_row(l: &Array2<f64>, target_row: usize) -> Result<()> {
    if l.nrows() != l.ncols() {
        return Err(Error::DimensionMismatch {
            expected: l.nrows(),
            found: l.ncols(),
        });
    }
    if target_row >= l.nrows() {
        return Err(Error::InvalidStencil(format!(
            "target row {target_row} outside a {}-node stencil",
            l.nrows()
        )));
    }
    Ok(())
}

/// Block companion matrix with `L` in the top-left block and identities on
/// the block superdiagonal, of size `s n x s n`.
pub fn build_augmented(l: &Array2<f64>, depth: usize) -> Result<Array2<f64>> {
    if depth == 0 || depth > MAX_AUGMENTATION {
        return Err(Error::InvalidParameter(format!(
            "augmentation depth must be in 1..={MAX_AUGMENTATION}, got {depth}"
        )));
    }
    let n = l.nrows();
    let mut a = Array2::zeros((depth * n, depth * n));
    a.slice_mut(s![0..n, 0..n]).assign(l);
    for b in 0..depth - 1 {
        for i in 0..n {
            a[[b * n + i, (b + 1) * n + i]] = 1.0;
        }
    }
    Ok(a)
}

/// Weight rows harvested from one augmented exponential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiWeightSet {
    pub delta_t: f64,
    /// Target row of `exp(dt L)`.
    pub w_lin: Vec<f64>,
    /// `w_phi[j]` is the target row of `dt^(j+1) phi_{j+1}(dt L)`.
    pub w_phi: Vec<Vec<f64>>,
}

/// Harvest the linear propagator and `depth - 1` scaled phi-function rows
/// from `exp(dt * A)` with `A` the augmented matrix of `L`.
pub fn harvest_phi_weights(
    l: &Array2<f64>,
    delta_t: f64,
    depth: usize,
    target_row: usize,
) -> Result<PhiWeightSet> {
    check_row(l, target_row)?;
    let n = l.nrows();
    let aug = build_augmented(l, depth)?;
    let w = expm(&(aug * delta_t))?;
    let row = w.row(target_row);
    Ok(PhiWeightSet {
        delta_t,
        w_lin: row.slice(s![0..n]).to_vec(),
        w_phi: (1..depth)
            .map(|j| row.slice(s![j * n..(j + 1) * n]).to_vec())
            .collect(),
    })
}

/// Global `N x N` operator stored as one `n`-wide weight row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedPropagator {
    len: usize,
    width: usize,
    periodic: bool,
    members: Vec<usize>,
    weights: Vec<f64>,
}

impl BandedPropagator {
    /// Assemble from per-node stencils and matching weight rows.
    pub fn from_rows(
        len: usize,
        periodic: bool,
        stencils: &[Stencil],
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if stencils.len() != len || rows.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: stencils.len().min(rows.len()),
            });
        }
        let width = stencils.first().map_or(0, Stencil::len);
        let mut members = Vec::with_capacity(len * width);
        let mut weights = Vec::with_capacity(len * width);
        for (i, (st, w)) in stencils.iter().zip(rows).enumerate() {
            if st.target != i {
                return Err(Error::InvalidStencil(format!(
                    "stencil {i} targets node {}",
                    st.target
                )));
            }
            if st.len() != width || w.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: w.len().min(st.len()),
                });
            }
            if st.members.iter().any(|&m| m >= len) {
                return Err(Error::InvalidStencil(format!("stencil {i} leaves the grid")));
            }
            members.extend_from_slice(&st.members);
            weights.extend(w);
        }
        Ok(BandedPropagator {
            len,
            width,
            periodic,
            members,
            weights,
        })
    }

    pub fn identity(len: usize) -> Self {
        BandedPropagator {
            len,
            width: 1,
            periodic: false,
            members: (0..len).collect(),
            weights: vec![1.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of weights per row.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = i * self.width..(i + 1) * self.width;
        (&self.members[r.clone()], &self.weights[r])
    }

    /// `out = P u`.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(u.len())?;
        self.check(out.len())?;
        let w = self.width;
        for ((o, m), wt) in out
            .iter_mut()
            .zip(self.members.chunks_exact(w))
            .zip(self.weights.chunks_exact(w))
        {
            *o = dot(m, wt, u);
        }
        Ok(())
    }

    /// `out += scale * P u`.
    pub fn apply_add(&self, scale: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(u.len())?;
        self.check(out.len())?;
        let w = self.width;
        for ((o, m), wt) in out
            .iter_mut()
            .zip(self.members.chunks_exact(w))
            .zip(self.weights.chunks_exact(w))
        {
            *o += scale * dot(m, wt, u);
        }
        Ok(())
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len];
        self.apply_into(u, &mut out)?;
        Ok(out)
    }

    /// Row-parallel [`BandedPropagator::apply`]; bit-identical to the serial
    /// version since each row is still summed in stencil order.
    pub fn apply_par(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u.len())?;
        let w = self.width;
        let out = self
            .members
            .par_chunks_exact(w)
            .zip(self.weights.par_chunks_exact(w))
            .map(|(m, wt)| dot(m, wt, u))
            .collect();
        Ok(out)
    }

    fn check(&self, found: usize) -> Result<()> {
        if found != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                found,
            });
        }
        Ok(())
    }

    /// Weighted sum `sum_k c_k P_k` of propagators sharing one sparsity
    /// pattern.
    pub fn linear_combination(terms: &[(f64, &BandedPropagator)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty combination".into()))?;
        let mut out = BandedPropagator {
            weights: vec![0.0; first.weights.len()],
            ..(*first).clone()
        };
        for (c, p) in terms {
            if p.members != out.members {
                return Err(Error::InvalidStencil("sparsity patterns differ".into()));
            }
            for (o, w) in out.weights.iter_mut().zip(&p.weights) {
                *o += c * w;
            }
        }
        Ok(out)
    }

    /// Dense copy, for small-size checks.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.len, self.len));
        for i in 0..self.len {
            let (m, w) = self.row(i);
            for (&j, &v) in m.iter().zip(w) {
                d[[i, j]] += v;
            }
        }
        d
    }
}

#[inline]
fn dot(members: &[usize], weights: &[f64], u: &[f64]) -> f64 {
    members
        .iter()
        .zip(weights)
        .fold(0.0, |acc, (&j, &w)| acc + w * u[j])
}

/// Exact-match key for reusing a harvest: local stencil coordinates, operator,
/// step, augmentation depth and target row, all compared bitwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct HarvestKey {
    coords: Vec<u64>,
    terms: Vec<(usize, u64)>,
    delta_t: u64,
    depth: usize,
    target_row: usize,
    fixed_rows: Vec<usize>,
}

impl HarvestKey {
    fn new(coords: &[f64], spec: &LinearOperatorSpec, delta_t: f64, depth: usize, row: usize, fixed_rows: Vec<usize>) -> Self {
        HarvestKey {
            coords: coords.iter().map(|x| x.to_bits()).collect(),
            terms: spec.terms().iter().map(|&(k, c)| (k, c.to_bits())).collect(),
            delta_t: delta_t.to_bits(),
            depth,
            target_row: row,
            fixed_rows,
        }
    }
}

/// Harvest input for one distinct stencil.
struct LocalStencil {
    coords: Vec<f64>,
    target_row: usize,
    /// Local rows whose node is held fixed.
    fixed_rows: Vec<usize>,
}

impl LocalStencil {
    /// Local operator with the rows of fixed nodes zeroed, so those nodes
    /// keep their value during the local evolution.
    fn operator(&self, spec: &LinearOperatorSpec) -> Result<Array2<f64>> {
        let mut l = local_operator(&self.coords, spec)?;
        for &r in &self.fixed_rows {
            l.row_mut(r).fill(0.0);
        }
        Ok(l)
    }
}

/// Run `harvest` once per distinct local stencil and fan the result out to
/// every node sharing it.
#[allow(clippy::too_many_arguments)]
fn harvest_unique<T, F>(
    grid: &Grid,
    stencils: &[Stencil],
    spec: &LinearOperatorSpec,
    delta_t: f64,
    depth: usize,
    fixed: &[usize],
    harvest: F,
) -> Result<Vec<T>>
where
    T: Clone + Send,
    F: Fn(&LocalStencil) -> Result<T> + Sync,
{
    if stencils.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: stencils.len(),
        });
    }
    let mut index: HashMap<HarvestKey, usize> = HashMap::new();
    if let Some(&bad) = fixed.iter().find(|&&i| i >= grid.len()) {
        return Err(Error::InvalidParameter(format!("fixed node {bad} outside the grid")));
    }
    let mut unique: Vec<LocalStencil> = Vec::new();
    let mut slot = Vec::with_capacity(stencils.len());
    for st in stencils {
        let coords = grid.local_coordinates(st);
        let fixed_rows: Vec<usize> = st
            .members
            .iter()
            .enumerate()
            .filter(|(_, m)| fixed.contains(m))
            .map(|(r, _)| r)
            .collect();
        let key = HarvestKey::new(&coords, spec, delta_t, depth, st.target_row, fixed_rows.clone());
        let next = unique.len();
        let id = *index.entry(key).or_insert(next);
        if id == next {
            unique.push(LocalStencil {
                coords,
                target_row: st.target_row,
                fixed_rows,
            });
        }
        slot.push(id);
    }
    let harvested: Vec<T> = unique.par_iter().map(&harvest).collect::<Result<_>>()?;
    Ok(slot.into_iter().map(|id| harvested[id].clone()).collect())
}

fn topology_periodic(grid: &Grid) -> bool {
    grid.topology() == Topology::PeriodicUniform
}

/// Banded propagator approximating `exp(dt L)` on the whole grid.
pub fn assemble_global(
    grid: &Grid,
    stencils: &[Stencil],
    spec: &LinearOperatorSpec,
    delta_t: f64,
) -> Result<BandedPropagator> {
    assemble_global_fixed(grid, stencils, spec, delta_t, &[])
}

/// As [`assemble_global`], with the nodes in `fixed` held constant inside
/// every local evolution (their local operator rows are zeroed).
pub fn assemble_global_fixed(
    grid: &Grid,
    stencils: &[Stencil],
    spec: &LinearOperatorSpec,
    delta_t: f64,
    fixed: &[usize],
) -> Result<BandedPropagator> {
    let rows = harvest_unique(grid, stencils, spec, delta_t, 1, fixed, |local| {
        harvest_propagator(&local.operator(spec)?, delta_t, local.target_row)
    })?;
    BandedPropagator::from_rows(grid.len(), topology_periodic(grid), stencils, rows)
}

/// Banded operators harvested from the augmented exponential at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiPropagators {
    pub delta_t: f64,
    /// `exp(dt L)`.
    pub lin: BandedPropagator,
    /// `phi[j]` approximates `dt^(j+1) phi_{j+1}(dt L)`.
    pub phi: Vec<BandedPropagator>,
}

impl PhiPropagators {
    /// All operators in harvest order: linear propagator, then phi_1, phi_2, ...
    pub fn all(&self) -> impl Iterator<Item = &BandedPropagator> {
        std::iter::once(&self.lin).chain(self.phi.iter())
    }
}

pub fn assemble_global_phi(
    grid: &Grid,
    stencils: &[Stencil],
    spec: &LinearOperatorSpec,
    delta_t: f64,
    depth: usize,
) -> Result<PhiPropagators> {
    assemble_global_phi_fixed(grid, stencils, spec, delta_t, depth, &[])
}

/// As [`assemble_global_phi`] with fixed nodes (see [`assemble_global_fixed`]).
pub fn assemble_global_phi_fixed(
    grid: &Grid,
    stencils: &[Stencil],
    spec: &LinearOperatorSpec,
    delta_t: f64,
    depth: usize,
    fixed: &[usize],
) -> Result<PhiPropagators> {
    let sets = harvest_unique(grid, stencils, spec, delta_t, depth, fixed, |local| {
        harvest_phi_weights(&local.operator(spec)?, delta_t, depth, local.target_row)
    })?;
    let periodic = topology_periodic(grid);
    let lin_rows = sets.iter().map(|s| s.w_lin.clone()).collect();
    let lin = BandedPropagator::from_rows(grid.len(), periodic, stencils, lin_rows)?;
    let phi = (0..depth - 1)
        .map(|j| {
            let rows = sets.iter().map(|s| s.w_phi[j].clone()).collect();
            BandedPropagator::from_rows(grid.len(), periodic, stencils, rows)
        })
        .collect::<Result<_>>()?;
    Ok(PhiPropagators { delta_t, lin, phi })
}

/// Banded `order`-th derivative: each row holds the Fornberg weights at the
/// target node over its stencil.
pub fn assemble_derivative(grid: &Grid, stencils: &[Stencil], order: usize) -> Result<BandedPropagator> {
    let spec = LinearOperatorSpec::new(vec![(order, 1.0)])?;
    let rows = harvest_unique(grid, stencils, &spec, 0.0, 0, &[], |local| {
        let (coords, row) = (&local.coords, local.target_row);
        let w = fornberg_weights(coords[row], coords, order)?;
        Ok(w.row(order).to_vec())
    })?;
    BandedPropagator::from_rows(grid.len(), topology_periodic(grid), stencils, rows)
}

/// Serializable dump of harvested weights: one record per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub delta_t: f64,
    pub grid_len: usize,
    pub stencil_len: usize,
    pub topology: Topology,
    pub operator: LinearOperatorSpec,
    pub rows: Vec<WeightRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub node: usize,
    pub x: f64,
    pub members: Vec<usize>,
    pub target_row: usize,
    pub w_lin: Vec<f64>,
    pub w_phi: Vec<Vec<f64>>,
}

impl WeightTable {
    pub fn from_phi(
        grid: &Grid,
        stencils: &[Stencil],
        spec: &LinearOperatorSpec,
        ops: &PhiPropagators,
    ) -> Self {
        let rows = stencils
            .iter()
            .map(|st| WeightRecord {
                node: st.target,
                x: grid.nodes()[st.target],
                members: st.members.clone(),
                target_row: st.target_row,
                w_lin: ops.lin.row(st.target).1.to_vec(),
                w_phi: ops.phi.iter().map(|p| p.row(st.target).1.to_vec()).collect(),
            })
            .collect();
        WeightTable {
            delta_t: ops.delta_t,
            grid_len: grid.len(),
            stencil_len: ops.lin.width(),
            topology: grid.topology(),
            operator: spec.clone(),
            rows,
        }
    }

    /// JSON text with every float written to 17 significant digits.
    pub fn to_json(&self) -> Result<String> {
        let mut out = String::new();
        let topo = match self.topology {
            Topology::PeriodicUniform => "periodic-uniform",
            Topology::NonPeriodic => "non-periodic",
        };
        let terms: Vec<String> = self
            .operator
            .terms()
            .iter()
            .map(|&(k, c)| Ok(format!("[{k},{}]", json_float(c)?)))
            .collect::<Result<_>>()?;
        let _ = write!(
            out,
            "{{\"delta_t\":{},\"grid_len\":{},\"stencil_len\":{},\"topology\":\"{topo}\",\"operator\":{{\"terms\":[{}]}},\"rows\":[",
            json_float(self.delta_t)?,
            self.grid_len,
            self.stencil_len,
            terms.join(",")
        );
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let members: Vec<String> = r.members.iter().map(usize::to_string).collect();
            let phis: Vec<String> = r
                .w_phi
                .iter()
                .map(|w| json_array(w))
                .collect::<Result<_>>()?;
            let _ = write!(
                out,
                "\n{{\"node\":{},\"x\":{},\"members\":[{}],\"target_row\":{},\"w_lin\":{},\"w_phi\":[{}]}}",
                r.node,
                json_float(r.x)?,
                members.join(","),
                r.target_row,
                json_array(&r.w_lin)?,
                phis.join(",")
            );
        }
        out.push_str("\n]}\n");
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("weight table: {e}")))
    }
}

fn json_float(v: f64) -> Result<String> {
    if v.is_finite() {
        Ok(format!("{v:.16e}"))
    } else {
        Err(Error::NonFinite("weight table entry".into()))
    }
}

fn json_array(w: &[f64]) -> Result<String> {
    let items: Vec<String> = w.iter().map(|&v| json_float(v)).collect::<Result<_>>()?;
    Ok(format!("[{}]", items.join(",")))
}
