//! Reference implementations used only by the integration tests. None of
//! them share code with the library paths they check.
#![allow(dead_code)]

/// Barycentric Lagrange basis values `l_j(x)` on `nodes`, first form
/// (the second form is unstable when extrapolating).
pub fn lagrange_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        return e;
    }
    let ell: f64 = nodes.iter().map(|&xk| x - xk).product();
    (0..n)
        .map(|j| {
            let bary = 1.0
                / (0..n)
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product::<f64>();
            ell * bary / (x - nodes[j])
        })
        .collect()
}

/// Dense Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Finite-difference weights for the `order`-th derivative at `z` from the
/// transposed Vandermonde system `sum_j w_j (x_j - z)^p = p! [p == order]`.
pub fn vandermonde_weights(nodes: &[f64], z: f64, order: usize) -> Vec<f64> {
    let n = nodes.len();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|p| nodes.iter().map(|&x| (x - z).powi(p as i32)).collect())
        .collect();
    let mut rhs = vec![0.0; n];
    rhs[order] = (1..=order).map(|v| v as f64).product();
    solve(a, rhs)
}

/// Polynomial in monomial form, `c[k]` multiplying `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }

    pub fn nth_derivative(&self, order: usize) -> Poly {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&0.0) + other.0.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

/// `exp(dt L) p` for `L = c0 + sum_k c_k d^k/dx^k` acting on a polynomial.
/// The derivative part lowers the degree, so the series ends after
/// `deg + 1` terms.
pub fn evolve_polynomial(p: &Poly, terms: &[(usize, f64)], dt: f64) -> Poly {
    let c0: f64 = terms.iter().filter(|t| t.0 == 0).map(|t| t.1).sum();
    let apply_m = |q: &Poly| {
        terms
            .iter()
            .filter(|t| t.0 > 0)
            .fold(Poly(vec![0.0]), |acc, &(k, c)| acc.add(&q.nth_derivative(k).scale(c)))
    };
    let mut total = p.clone();
    let mut term = p.clone();
    for k in 1..=p.0.len() {
        term = apply_m(&term).scale(dt / k as f64);
        if term.is_zero() {
            break;
        }
        total = total.add(&term);
    }
    total.scale((c0 * dt).exp())
}

/// Taylor series for `phi_j(z)`, `sum_k z^k / (k + j)!`, for moderate `|z|`.
pub fn phi_taylor(j: usize, z: f64) -> f64 {
    let mut term: f64 = 1.0 / (1..=j).map(|v| v as f64).product::<f64>();
    let mut sum = term;
    for k in 1..400 {
        term *= z / (k + j) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `phi_j` by the defining recursion from `exp`, for `|z|` away from zero.
pub fn phi_recursive(j: usize, z: f64) -> f64 {
    let mut phi = z.exp();
    let mut fact = 1.0;
    for k in 0..j {
        if k > 0 {
            fact *= k as f64;
        }
        phi = (phi - 1.0 / fact) / z;
    }
    phi
}

pub fn phi_oracle(j: usize, z: f64) -> f64 {
    if z.abs() < 1.0 {
        phi_taylor(j, z)
    } else {
        phi_recursive(j, z)
    }
}

/// Classical scalar ETDRK4 for `u' = lambda u + f(u, t)` built directly
/// from the phi functions.
pub fn scalar_etdrk4(lambda: f64, f: impl Fn(f64, f64) -> f64, u0: f64, dt: f64, steps: usize) -> f64 {
    let z = lambda * dt;
    let (e, e2) = (z.exp(), (z / 2.0).exp());
    let p1h = phi_oracle(1, z / 2.0);
    let (p1, p2, p3) = (phi_oracle(1, z), phi_oracle(2, z), phi_oracle(3, z));
    let (mut u, mut t) = (u0, 0.0);
    for _ in 0..steps {
        let nu = f(u, t);
        let a = e2 * u + dt / 2.0 * p1h * nu;
        let na = f(a, t + dt / 2.0);
        let b = e2 * u + dt / 2.0 * p1h * na;
        let nb = f(b, t + dt / 2.0);
        let c = e2 * a + dt / 2.0 * p1h * (2.0 * nb - nu);
        let nc = f(c, t + dt);
        u = e * u
            + dt * ((p1 - 3.0 * p2 + 4.0 * p3) * nu + (2.0 * p2 - 4.0 * p3) * (na + nb) + (4.0 * p3 - p2) * nc);
        t += dt;
    }
    u
}

/// Dense matrix exponential by plain Taylor summation with scaling and
/// squaring; slow but independent of the Pade path.
pub fn expm_taylor(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let norm = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let b: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mul = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum()).collect())
            .collect()
    };
    let mut result: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut term = result.clone();
    for k in 1..60 {
        term = mul(&term, &b).into_iter().map(|r| r.into_iter().map(|v| v / k as f64).collect()).collect();
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = mul(&result, &result);
    }
    result
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
