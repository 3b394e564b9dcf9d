//! Finite-difference differentiation matrices on arbitrary node sets and the
//! local linear operators built from them.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fornberg's recursive finite-difference weights.
///
/// Row `k` of the returned `(max_order + 1) x n` table holds the weights `w`
/// with `sum_j w[j] f(nodes[j]) ~ f^(k)(z)`, exact for polynomials of degree
/// at most `n - 1`.
pub fn fornberg_weights(z: f64, nodes: &[f64], max_order: usize) -> Result<Array2<f64>> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::InvalidStencil("empty node set".into()));
    }
    if max_order >= n {
        return Err(Error::OrderTooHigh { order: max_order, n });
    }
    check_distinct(nodes)?;

    let mut c = Array2::<f64>::zeros((max_order + 1, n));
    c[[0, 0]] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[[k, i]] = c1 * (k as f64 * c[[k - 1, i - 1]] - c5 * c[[k, i - 1]]) / c2;
                }
                c[[0, i]] = -c1 * c5 * c[[0, i - 1]] / c2;
            }
            for k in (1..=mn).rev() {
                c[[k, j]] = (c4 * c[[k, j]] - k as f64 * c[[k - 1, j]]) / c3;
            }
            c[[0, j]] = c4 * c[[0, j]] / c3;
        }
        c1 = c2;
    }
    Ok(c)
}

fn check_distinct(nodes: &[f64]) -> Result<()> {
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("stencil node".into()));
    }
    let lo = nodes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-14 * (hi - lo).max(f64::MIN_POSITIVE);
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if (nodes[i] - nodes[j]).abs() <= tol {
                return Err(Error::DuplicateNodes(i, j));
            }
        }
    }
    Ok(())
}

/// Differentiation matrix of one order on a fixed node set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    pub order: usize,
    pub nodes: Vec<f64>,
    /// Row `i` approximates the derivative at `nodes[i]`.
    pub entries: Array2<f64>,
}

/// `order`-th derivative matrix on `nodes`: row `i` is the Fornberg weight row
/// evaluated at `nodes[i]`.
pub fn diff_matrix(nodes: &[f64], order: usize) -> Result<DiffMatrix> {
    if order == 0 {
        return Err(Error::InvalidParameter("derivative order must be at least 1".into()));
    }
    let n = nodes.len();
    let mut entries = Array2::zeros((n, n));
    for (i, &z) in nodes.iter().enumerate() {
        let w = fornberg_weights(z, nodes, order)?;
        entries.row_mut(i).assign(&w.row(order));
    }
    Ok(DiffMatrix {
        order,
        nodes: nodes.to_vec(),
        entries,
    })
}

/// Constant-coefficient linear operator `sum_k c_k d^k/dx^k`; the order-0 term
/// is a scalar reaction coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearOperatorSpec {
    terms: Vec<(usize, f64)>,
}

impl LinearOperatorSpec {
    pub fn new(terms: Vec<(usize, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("operator needs at least one term".into()));
        }
        for (i, (k, c)) in terms.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite(format!("coefficient of order {k}")));
            }
            if terms[..i].iter().any(|(k2, _)| k2 == k) {
                return Err(Error::InvalidParameter(format!("order {k} listed twice")));
            }
        }
        Ok(LinearOperatorSpec { terms })
    }

    /// `u_t = -a u_x`.
    pub fn advection(speed: f64) -> Self {
        LinearOperatorSpec {
            terms: vec![(1, -speed)],
        }
    }

    /// `u_t = nu u_xx`.
    pub fn diffusion(nu: f64) -> Self {
        LinearOperatorSpec {
            terms: vec![(2, nu)],
        }
    }

    /// `u_t = -a u_x + nu u_xx`.
    pub fn advection_diffusion(speed: f64, nu: f64) -> Self {
        LinearOperatorSpec {
            terms: vec![(1, -speed), (2, nu)],
        }
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|&(k, _)| k).max().unwrap_or(0)
    }

    pub fn coefficient(&self, order: usize) -> f64 {
        self.terms
            .iter()
            .find(|&&(k, _)| k == order)
            .map_or(0.0, |&(_, c)| c)
    }

    /// Same operator with the reaction term dropped.
    pub fn differential_part(&self) -> Self {
        let terms: Vec<_> = self.terms.iter().copied().filter(|&(k, _)| k > 0).collect();
        LinearOperatorSpec {
            terms: if terms.is_empty() { vec![(0, 0.0)] } else { terms },
        }
    }
}

/// Local operator `L_n = c_0 I + sum_k c_k D_n^(k)` on the given nodes.
pub fn local_operator(nodes: &[f64], spec: &LinearOperatorSpec) -> Result<Array2<f64>> {
    let n = nodes.len();
    let max_order = spec.max_order();
    if max_order >= n {
        return Err(Error::OrderTooHigh { order: max_order, n });
    }
    let mut l = Array2::zeros((n, n));
    for (i, &z) in nodes.iter().enumerate() {
        let w = fornberg_weights(z, nodes, max_order)?;
        for &(k, c) in spec.terms() {
            if k == 0 {
                l[[i, i]] += c;
            } else {
                l.row_mut(i).scaled_add(c, &w.row(k));
            }
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn centred_first_derivative() {
        let h = 0.3;
        let w = fornberg_weights(0.0, &[-h, 0.0, h], 1).unwrap();
        assert!(close(w[[1, 0]], -0.5 / h, 1e-14));
        assert!(close(w[[1, 1]], 0.0, 1e-14));
        assert!(close(w[[1, 2]], 0.5 / h, 1e-14));
        assert_eq!(w.row(0).to_vec(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn five_point_second_derivative() {
        let h = 0.5;
        let nodes: Vec<f64> = (-2..=2).map(|j| j as f64 * h).collect();
        let w = fornberg_weights(0.0, &nodes, 2).unwrap();
        let expect = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.row(2).iter().zip(expect) {
            assert!(close(*a, b / (h * h), 1e-12), "{a} vs {}", b / (h * h));
        }
    }

    #[test]
    fn three_node_matrices() {
        let h = 0.25;
        let d1 = diff_matrix(&[-h, 0.0, h], 1).unwrap();
        let expect = [[-1.5, 2.0, -0.5], [-0.5, 0.0, 0.5], [0.5, -2.0, 1.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(d1.entries[[i, j]], expect[i][j] / h, 1e-13));
            }
        }
        let d2 = diff_matrix(&[-h, 0.0, h], 2).unwrap();
        for i in 0..3 {
            for (j, e) in [1.0, -2.0, 1.0].iter().enumerate() {
                assert!(close(d2.entries[[i, j]], e / (h * h), 1e-12));
            }
        }
    }

    #[test]
    fn third_derivative_on_four_nodes() {
        let d3 = diff_matrix(&[0.0, 1.0, 2.0, 3.0], 3).unwrap();
        for i in 0..4 {
            for (j, e) in [-1.0, 3.0, -3.0, 1.0].iter().enumerate() {
                assert!(close(d3.entries[[i, j]], *e, 1e-12));
            }
        }
    }

    #[test]
    fn duplicate_and_order_errors() {
        assert!(matches!(
            fornberg_weights(0.0, &[0.0, 1.0, 1.0], 1),
            Err(Error::DuplicateNodes(1, 2))
        ));
        assert!(matches!(
            fornberg_weights(0.0, &[0.0, 1.0], 2),
            Err(Error::OrderTooHigh { .. })
        ));
        let spec = LinearOperatorSpec::new(vec![(3, 1.0)]).unwrap();
        assert!(matches!(
            local_operator(&[0.0, 1.0, 2.0], &spec),
            Err(Error::OrderTooHigh { order: 3, n: 3 })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(LinearOperatorSpec::new(vec![]).is_err());
        assert!(LinearOperatorSpec::new(vec![(1, 1.0), (1, 2.0)]).is_err());
        let s = LinearOperatorSpec::new(vec![(0, 1.0), (2, 0.01)]).unwrap();
        assert_eq!(s.max_order(), 2);
        assert_eq!(s.coefficient(0), 1.0);
        assert_eq!(s.coefficient(1), 0.0);
        assert_eq!(s.differential_part().terms(), &[(2, 0.01)]);
    }

    #[test]
    fn local_operator_terms() {
        let h = 0.1;
        let nodes = [-h, 0.0, h];
        let id = local_operator(&nodes, &LinearOperatorSpec::new(vec![(0, 1.0)]).unwrap()).unwrap();
        assert_eq!(id, Array2::<f64>::eye(3));

        let l = local_operator(&nodes, &LinearOperatorSpec::advection(2.0)).unwrap();
        let d1 = diff_matrix(&nodes, 1).unwrap().entries;
        assert!((&l + &(d1.clone() * 2.0)).iter().all(|v| v.abs() < 1e-12));

        let l = local_operator(&nodes, &LinearOperatorSpec::advection_diffusion(1.0, 0.1)).unwrap();
        let d2 = diff_matrix(&nodes, 2).unwrap().entries;
        let expect = -&d1 + &(d2 * 0.1);
        assert!((&l - &expect).iter().all(|v| v.abs() < 1e-12));
    }
}
