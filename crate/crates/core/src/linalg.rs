//! Cyclic Jacobi eigen-decomposition for small dense symmetric matrices.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_RTOL: f64 = 1e-14;

/// Eigenpairs sorted by ascending eigenvalue. `vectors` is row-major `n × n`
/// with eigenvector `j` stored in column `j`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Decompose the symmetric row-major matrix `a` (`n × n`).
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below `1e-14·‖A‖_F`.
pub fn jacobi_eigen(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    if a.len() != n * n {
        return Err(Error::LengthMismatch(format!("expected {} entries, got {}", n * n, a.len())));
    }
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a[i * n + j], a[j * n + i]);
            if (x - y).abs() > 1e-12 * (x.abs() + y.abs()).max(1.0) {
                return Err(Error::InvalidParameter("matrix is not symmetric".into()));
            }
        }
    }
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = OFF_RTOL * scale;

    let mut sweeps = 0;
    let mut converged = off_norm(&m, n) <= target;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_norm(&m, n) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    Ok(SymmetricEigen { n, values, vectors, sweeps, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(e: &SymmetricEigen) -> Vec<f64> {
        let n = e.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n)
                    .map(|k| e.vectors[i * n + k] * e.values[k] * e.vectors[j * n + k])
                    .sum();
            }
        }
        out
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = [2.0, 1.0, 1.0, 2.0];
        let e = jacobi_eigen(&a, 2).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let v = e.vector(0);
        assert!((v[0] + v[1]).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_and_orthonormal() {
        let n = 6;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (1.0 + i as f64 + j as f64) + if i == j { 0.3 } else { 0.0 };
            }
        }
        let e = jacobi_eigen(&a, n).unwrap();
        assert!(e.converged);
        for (x, y) in reconstruct(&e).iter().zip(&a) {
            assert!((x - y).abs() < 1e-13);
        }
        for i in 0..n {
            for j in 0..n {
                let d: f64 = (0..n).map(|k| e.vectors[k * n + i] * e.vectors[k * n + j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-13);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn diagonal_input_is_immediate() {
        let e = jacobi_eigen(&[3.0, 0.0, 0.0, -1.0], 2).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values, vec![-1.0, 3.0]);
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(jacobi_eigen(&[1.0, 2.0, 0.0, 1.0], 2).is_err());
        assert!(jacobi_eigen(&[1.0, 2.0, 0.0], 2).is_err());
    }
}
