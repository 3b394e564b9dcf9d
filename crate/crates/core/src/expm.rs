//! Dense matrix exponential and scalar phi-functions.
//!
//! `expm` is scaling-and-squaring with diagonal Padé approximants of degree
//! 3, 5, 7, 9 or 13. The degree and the scaling exponent are picked from
//! `||A^k||^(1/k)` rather than `||A||`, which avoids the overscaling that
//! plain norm-based selection suffers on highly non-normal inputs such as
//! one-sided differentiation matrices. The matrices exponentiated here are
//! small (a stencil, or a few stencils stacked for phi-functions) so the
//! powers are formed exactly instead of estimated.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type DenseMatrix = Array2<f64>;

const THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
    (13, 5.371_920_351_148_152e0),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn norm1(a: &Array2<f64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `|c_{2m+1}|`, the leading coefficient of the Padé backward-error series.
fn pade_error_coefficient(m: usize) -> f64 {
    let mut c = 1.0;
    // (m!)^2 / ((2m)! (2m+1)!)
    for i in 1..=m {
        c *= i as f64 / (m + i) as f64;
    }
    for i in 1..=2 * m + 1 {
        c /= i as f64;
    }
    c
}

/// Extra squarings needed so the Padé-`m` backward error stays at unit
/// roundoff, from `||abs(A)^(2m+1)||_1`.
fn ell(a: &Array2<f64>, m: usize) -> u32 {
    let norm = norm1(a);
    if norm == 0.0 {
        return 0;
    }
    let abs_a = a.mapv(f64::abs);
    // Row vector 1^T |A|^(2m+1); its max entry is the 1-norm.
    let mut v = Array1::<f64>::ones(a.nrows());
    for _ in 0..2 * m + 1 {
        v = v.dot(&abs_a);
    }
    let power_norm = v.iter().copied().fold(0.0, f64::max);
    let alpha = pade_error_coefficient(m) * power_norm / norm;
    let u = f64::EPSILON / 2.0;
    let e = ((alpha / u).log2() / (2 * m) as f64).ceil();
    if e.is_finite() && e > 0.0 {
        e as u32
    } else {
        0
    }
}

/// Matrix exponential by scaling and squaring.
pub fn expm(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("expm input".into()));
    }
    if n == 1 {
        let e = a[[0, 0]].exp();
        return finite(Array2::from_elem((1, 1), e));
    }

    let eye = Array2::<f64>::eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let d4 = norm1(&a4).powf(0.25);
    let d6 = norm1(&a6).powf(1.0 / 6.0);
    let eta1 = d4.max(d6);

    if eta1 <= THETA[0].1 && ell(a, 3) == 0 {
        return finite(pade_odd(a, &eye, &[&a2], &B3)?);
    }
    if eta1 <= THETA[1].1 && ell(a, 5) == 0 {
        return finite(pade_odd(a, &eye, &[&a2, &a4], &B5)?);
    }
    let a8 = a4.dot(&a4);
    let d8 = norm1(&a8).powf(0.125);
    let eta3 = d6.max(d8);
    if eta3 <= THETA[2].1 && ell(a, 7) == 0 {
        return finite(pade_odd(a, &eye, &[&a2, &a4, &a6], &B7)?);
    }
    if eta3 <= THETA[3].1 && ell(a, 9) == 0 {
        return finite(pade_odd(a, &eye, &[&a2, &a4, &a6, &a8], &B9)?);
    }
    let a10 = a4.dot(&a6);
    let d10 = norm1(&a10).powf(0.1);
    let eta5 = eta3.min(d8.max(d10));
    let mut s = if eta5 > THETA[4].1 {
        (eta5 / THETA[4].1).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scale = |p: u32| 0.5f64.powi(p as i32);
    s += ell(&(a * scale(s)), 13);

    let f1 = scale(s);
    let (a1, a2, a4, a6) = (
        a * f1,
        &a2 * f1.powi(2),
        &a4 * f1.powi(4),
        &a6 * f1.powi(6),
    );
    let b = &B13;
    let u_inner = a6.dot(&(&a6 * b[13] + &a4 * b[11] + &a2 * b[9]))
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &eye * b[1];
    let u = a1.dot(&u_inner);
    let v = a6.dot(&(&a6 * b[12] + &a4 * b[10] + &a2 * b[8]))
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &eye * b[0];
    let mut r = solve(&v - &u, &v + &u)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    finite(r)
}

/// Padé approximant of odd-index degree from precomputed even powers.
fn pade_odd(
    a: &Array2<f64>,
    eye: &Array2<f64>,
    even_powers: &[&Array2<f64>],
    b: &[f64],
) -> Result<Array2<f64>> {
    let mut u_inner = eye * b[1];
    let mut v = eye * b[0];
    for (k, p) in even_powers.iter().enumerate() {
        u_inner.scaled_add(b[2 * k + 3], p);
        v.scaled_add(b[2 * k + 2], p);
    }
    let u = a.dot(&u_inner);
    solve(&v - &u, &v + &u)
}

fn finite(m: Array2<f64>) -> Result<Array2<f64>> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(m)
    } else {
        Err(Error::NonFinite("expm overflow".into()))
    }
}

/// Solve `lhs * X = rhs` by Gaussian elimination with partial pivoting.
fn solve(mut lhs: Array2<f64>, mut rhs: Array2<f64>) -> Result<Array2<f64>> {
    let n = lhs.nrows();
    let m = rhs.ncols();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lhs[[i, col]].abs().total_cmp(&lhs[[j, col]].abs()))
            .unwrap();
        let p = lhs[[pivot, col]];
        if p == 0.0 || !p.is_finite() {
            return Err(Error::NonFinite("singular Padé denominator".into()));
        }
        if pivot != col {
            for j in 0..n {
                lhs.swap([pivot, j], [col, j]);
            }
            for j in 0..m {
                rhs.swap([pivot, j], [col, j]);
            }
        }
        for i in col + 1..n {
            let f = lhs[[i, col]] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                lhs[[i, j]] -= f * lhs[[col, j]];
            }
            for j in 0..m {
                rhs[[i, j]] -= f * rhs[[col, j]];
            }
        }
    }
    for col in (0..n).rev() {
        let p = lhs[[col, col]];
        for j in 0..m {
            let mut acc = rhs[[col, j]];
            for k in col + 1..n {
                acc -= lhs[[col, k]] * rhs[[k, j]];
            }
            rhs[[col, j]] = acc / p;
        }
    }
    Ok(rhs)
}

/// Plain Taylor series for `exp(A)`, summed until the newest term drops below
/// `tol` times the running sum. Only meant as an independent check on
/// [`expm`] for matrices of modest norm.
pub fn expm_taylor_oracle(a: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    const MAX_TERMS: usize = 200;
    let n = a.nrows();
    let mut sum = Array2::<f64>::eye(n);
    let mut term = Array2::<f64>::eye(n);
    for k in 1..=MAX_TERMS {
        term = term.dot(a) / k as f64;
        sum += &term;
        let t = norm1(&term);
        if t == 0.0 || t <= tol * norm1(&sum) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(MAX_TERMS))
}

const PHI_SERIES_RADIUS: f64 = 0.5;

/// `phi_j(z)` for complex `z`: recursion away from the origin, Taylor series
/// `sum_m z^m / (m + j)!` inside `|z| < 0.5` where the recursion cancels.
pub fn phi_complex(j: usize, z: Complex64) -> Complex64 {
    if z.norm() < PHI_SERIES_RADIUS {
        phi_series(j, z)
    } else {
        phi_recursion(j, z)
    }
}

pub(crate) fn phi_series(j: usize, z: Complex64) -> Complex64 {
    let mut inv_fact = 1.0;
    for i in 1..=j {
        inv_fact /= i as f64;
    }
    // term_m = z^m / (m+j)!
    let mut term = Complex64::new(inv_fact, 0.0);
    let mut sum = term;
    for m in 1..200 {
        term = term * z / (m + j) as f64;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

pub(crate) fn phi_recursion(j: usize, z: Complex64) -> Complex64 {
    let mut phi = z.exp();
    let mut inv_fact = 1.0;
    for k in 0..j {
        if k > 0 {
            inv_fact /= k as f64;
        }
        phi = (phi - inv_fact) / z;
    }
    phi
}

/// Real-argument `phi_j`.
pub fn phi_scalar(j: usize, z: f64) -> f64 {
    phi_complex(j, Complex64::new(z, 0.0)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localop::diff_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn random(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0) * scale)
    }

    #[test]
    fn zero_and_diagonal() {
        for n in [1, 2, 5] {
            let e = expm(&Array2::zeros((n, n))).unwrap();
            assert_eq!(e, Array2::<f64>::eye(n));
        }
        let d = Array2::from_diag(&ndarray::arr1(&[0.7, -3.2]));
        let e = expm(&d).unwrap();
        assert!((e[[0, 0]] - 0.7f64.exp()).abs() < 1e-15);
        assert!((e[[1, 1]] - (-3.2f64).exp()).abs() < 1e-15);
        assert_eq!(e[[0, 1]], 0.0);
    }

    #[test]
    fn lax_wendroff_center_row() {
        let h = 0.2;
        let d1 = diff_matrix(&[-h, 0.0, h], 1).unwrap().entries;
        for nu in [0.3, 0.5, 1.7] {
            let e = expm(&(&d1 * (nu * h))).unwrap();
            let expect = [nu * (nu - 1.0) / 2.0, 1.0 - nu * nu, nu * (nu + 1.0) / 2.0];
            for j in 0..3 {
                assert!((e[[1, j]] - expect[j]).abs() < 1e-13, "nu {nu}: {}", e[[1, j]]);
            }
        }
    }

    #[test]
    fn taylor_oracle_basics() {
        let z = expm_taylor_oracle(&Array2::zeros((3, 3)), 1e-16).unwrap();
        assert_eq!(z, Array2::<f64>::eye(3));
        let mut nil = Array2::<f64>::zeros((3, 3));
        nil[[0, 1]] = 1.0;
        nil[[1, 2]] = 1.0;
        let e = expm_taylor_oracle(&nil, 1e-16).unwrap();
        let expect = &Array2::<f64>::eye(3) + &nil + &(nil.dot(&nil) * 0.5);
        assert_eq!(e, expect);
        let big = Array2::from_elem((2, 2), 400.0);
        assert!(matches!(
            expm_taylor_oracle(&big, 1e-16),
            Err(Error::NoConvergence(200))
        ));
    }

    #[test]
    fn matches_taylor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random(4, 1.0, &mut rng);
            let e = expm(&a).unwrap();
            let t = expm_taylor_oracle(&a, 1e-17).unwrap();
            assert!(max_abs_diff(&e, &t) < 1e-11);
        }
    }

    #[test]
    fn group_and_semigroup() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut a = random(6, 1.0, &mut rng);
            let norm = norm1(&a);
            a *= rng.gen_range(0.1..5.0) / norm;
            let e = expm(&a).unwrap();
            let einv = expm(&(-&a)).unwrap();
            assert!(max_abs_diff(&e.dot(&einv), &Array2::<f64>::eye(6)) < 1e-10);
            let e2 = expm(&(&a * 2.0)).unwrap();
            assert!(max_abs_diff(&e2, &e.dot(&e)) < 1e-10 * norm1(&e2).max(1.0));
        }
    }

    #[test]
    fn scalar_multiple_of_identity() {
        for z in [-20.0, -1.0, 0.3, 4.0] {
            let e = expm(&(Array2::<f64>::eye(4) * z)).unwrap();
            let expect = z.exp();
            assert!(max_abs_diff(&e, &(Array2::<f64>::eye(4) * expect)) <= 1e-13 * expect.max(1.0));
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Array2::<f64>::zeros((2, 2));
        a[[0, 1]] = f64::NAN;
        assert!(matches!(expm(&a), Err(Error::NonFinite(_))));
        let big = Array2::<f64>::eye(2) * 1000.0;
        assert!(matches!(expm(&big), Err(Error::NonFinite(_))));
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi_scalar(0, 0.0), 1.0);
        assert_eq!(phi_scalar(1, 0.0), 1.0);
        assert_eq!(phi_scalar(2, 0.0), 0.5);
        assert!((phi_scalar(3, 0.0) - 1.0 / 6.0).abs() < 1e-17);
        assert!((phi_scalar(1, 2.0) - (E * E - 1.0) / 2.0).abs() < 1e-14);
        assert!((phi_scalar(2, 1.0) - (E - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn phi_branch_continuity() {
        for j in 0..=4 {
            for base in [
                Complex64::new(0.5, 0.0),
                Complex64::new(-0.5, 0.0),
                Complex64::new(0.0, 0.5),
            ] {
                for eps in [-1e-9, 0.0, 1e-9] {
                    let z = base * (1.0 + eps);
                    let d = (phi_series(j, z) - phi_recursion(j, z)).norm();
                    assert!(d <= 1e-12, "j={j} z={z}: {d:e}");
                }
            }
        }
    }
}
