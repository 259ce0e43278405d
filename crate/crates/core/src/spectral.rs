//! Perron root of `diag(x) A` for nonnegative `A` and `x`.

use crate::error::{Error, Result};

pub const MAX_POWER_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMethod {
    PowerIteration,
    /// Largest real root of the characteristic polynomial (n <= 3 only).
    CharacteristicPolynomial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronRoot {
    pub lambda_max: f64,
    /// Nonnegative, unit-sum leading eigenvector.
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
    pub method: SpectralMethod,
}

/// Row-major square matrix product `diag(x) A`.
fn scaled_rows(x: &[f64], a: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = a.to_vec();
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] *= x[i];
        }
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for i in 0..n {
        out[i] = (0..n).map(|j| m[i * n + j] * v[j]).sum();
    }
}

fn residual(m: &[f64], v: &[f64], lambda: f64) -> f64 {
    let mut w = vec![0.0; v.len()];
    mat_vec(m, v, &mut w);
    w.iter().zip(v).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max)
}

/// Dominant eigenvalue of `diag(x) A` (`a` is row-major `n x n`).
///
/// Power iteration on unit-sum iterates; the estimate is the 1-norm growth
/// ratio. Converged once successive estimates differ by less than `1e-12`
/// (relative) and the eigen-residual is below `1e-12 lambda`. When the
/// iteration stalls (tied moduli in reducible cases) matrices up to 3x3 fall
/// back to the characteristic polynomial.
pub fn spectral_radius(x: &[f64], a: &[f64]) -> Result<PerronRoot> {
    let n = x.len();
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let m = scaled_rows(x, a);
    match power_iteration(&m, n, MAX_POWER_ITERATIONS) {
        Some(root) => Ok(root),
        None if n <= 3 => Ok(characteristic_root(&m, n)),
        None => Err(Error::SpectralFailure(MAX_POWER_ITERATIONS)),
    }
}

pub(crate) fn power_iteration(m: &[f64], n: usize, max_iter: usize) -> Option<PerronRoot> {
    let mut v = vec![1.0 / n as f64; n];
    let mut w = vec![0.0; n];
    let mut lambda = f64::NAN;
    for it in 1..=max_iter {
        mat_vec(m, &v, &mut w);
        let norm: f64 = w.iter().sum();
        if norm == 0.0 {
            // Nilpotent (here: zero) iteration, spectral radius 0.
            return Some(PerronRoot {
                lambda_max: 0.0,
                eigenvector: v,
                iterations: it,
                method: SpectralMethod::PowerIteration,
            });
        }
        let next = norm; // v has unit sum
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        let settled = (next - lambda).abs() <= 1e-12 * next.max(f64::MIN_POSITIVE);
        lambda = next;
        if settled && residual(m, &v, lambda) <= 1e-12 * lambda {
            return Some(PerronRoot {
                lambda_max: lambda,
                eigenvector: v,
                iterations: it,
                method: SpectralMethod::PowerIteration,
            });
        }
    }
    None
}

fn characteristic_root(m: &[f64], n: usize) -> PerronRoot {
    let lambda = match n {
        1 => m[0],
        2 => {
            let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
            let tr = a + d;
            let disc = ((a - d) * (a - d) + 4.0 * b * c).max(0.0);
            0.5 * (tr + disc.sqrt())
        }
        3 => cubic_perron_root(m),
        _ => unreachable!("fallback limited to n <= 3"),
    };
    PerronRoot {
        lambda_max: lambda,
        eigenvector: null_vector(m, n, lambda),
        iterations: 0,
        method: SpectralMethod::CharacteristicPolynomial,
    }
}

/// Largest real root of `det(t I - M)` for a nonnegative 3x3 `M`, by Newton
/// iteration from the max row sum (an upper bound on the Perron root). The
/// polynomial is convex above `tr/3`, which the Perron root exceeds.
fn cubic_perron_root(m: &[f64]) -> f64 {
    let tr = m[0] + m[4] + m[8];
    let minors = m[0] * m[4] - m[1] * m[3] + m[0] * m[8] - m[2] * m[6] + m[4] * m[8] - m[5] * m[7];
    let det =
        m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6]);
    let p = |t: f64| ((t - tr) * t + minors) * t - det;
    let dp = |t: f64| (3.0 * t - 2.0 * tr) * t + minors;
    let mut t = (0..3)
        .map(|i| m[3 * i] + m[3 * i + 1] + m[3 * i + 2])
        .fold(0.0, f64::max);
    for _ in 0..200 {
        let slope = dp(t);
        if slope <= 0.0 {
            break;
        }
        let next = t - p(t) / slope;
        if !(next < t) {
            break;
        }
        t = next;
    }
    t.max(0.0)
}

/// Unit-sum nonnegative vector spanning the null space of `M - lambda I`,
/// taken from the largest column of the adjugate (n = 2) or the largest cross
/// product of two rows (n = 3).
fn null_vector(m: &[f64], n: usize, lambda: f64) -> Vec<f64> {
    let normalize = |v: Vec<f64>| {
        let v: Vec<f64> = v.into_iter().map(f64::abs).collect();
        let s: f64 = v.iter().sum();
        if s > 0.0 {
            v.into_iter().map(|e| e / s).collect()
        } else {
            vec![1.0 / n as f64; n]
        }
    };
    let norm2 = |v: &[f64]| v.iter().map(|e| e * e).sum::<f64>();
    match n {
        1 => vec![1.0],
        2 => {
            let (a, b, c, d) = (m[0] - lambda, m[1], m[2], m[3] - lambda);
            let c1 = vec![d, -c];
            let c2 = vec![-b, a];
            normalize(if norm2(&c1) >= norm2(&c2) { c1 } else { c2 })
        }
        _ => {
            let row = |i: usize| {
                [
                    m[3 * i] - if i == 0 { lambda } else { 0.0 },
                    m[3 * i + 1] - if i == 1 { lambda } else { 0.0 },
                    m[3 * i + 2] - if i == 2 { lambda } else { 0.0 },
                ]
            };
            let cross = |u: [f64; 3], w: [f64; 3]| {
                vec![
                    u[1] * w[2] - u[2] * w[1],
                    u[2] * w[0] - u[0] * w[2],
                    u[0] * w[1] - u[1] * w[0],
                ]
            };
            let candidates = [cross(row(0), row(1)), cross(row(0), row(2)), cross(row(1), row(2))];
            let best = candidates
                .into_iter()
                .max_by(|p, q| norm2(p).total_cmp(&norm2(q)))
                .expect("three candidates");
            normalize(best)
        }
    }
}

/// Closed-form dominant eigenvalue of a 2x2 nonnegative matrix (row-major).
pub fn closed_form_2x2(m: [f64; 4]) -> f64 {
    characteristic_root(&m, 2).lambda_max
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn all_ones_unit_x() {
        let r = spectral_radius(&[1.0, 1.0], &[1.0; 4]).unwrap();
        assert_abs_diff_eq!(r.lambda_max, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.eigenvector[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.eigenvector[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn all_ones_scaled() {
        let r = spectral_radius(&[0.5, 1.0], &[1.0; 4]).unwrap();
        assert_abs_diff_eq!(r.lambda_max, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_susceptibles() {
        let r = spectral_radius(&[0.0, 0.0], &[1.0, 0.3, 0.2, 2.0]).unwrap();
        assert_eq!(r.lambda_max, 0.0);
    }

    #[test]
    fn reducible_diagonal_ties_fall_back_or_converge() {
        // diag(1, 1) with no coupling: every vector is an eigenvector.
        let r = spectral_radius(&[1.0, 1.0], &[2.0, 0.0, 0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(r.lambda_max, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn three_by_three_fallback_matches_power() {
        let m = [2.0, 1.0, 0.5, 0.3, 1.0, 0.2, 0.1, 0.4, 3.0];
        let root = characteristic_root(&m, 3);
        let power = power_iteration(&m, 3, MAX_POWER_ITERATIONS).unwrap();
        assert_abs_diff_eq!(root.lambda_max, power.lambda_max, epsilon = 1e-10);
        for (a, b) in root.eigenvector.iter().zip(&power.eigenvector) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        assert_abs_diff_eq!(closed_form_2x2([0.5, 0.5, 1.0, 1.0]), 1.5, epsilon = 1e-15);
    }
}
