//! Singular values: Householder bidiagonalization, then the eigenvalues of the
//! symmetric Golub–Kahan tridiagonal matrix `[[0, B], [Bᵀ, 0]]`, which are `±σ_i`.
//!
//! Small singular values come out with absolute accuracy `O(ε·σ_max)`, which is
//! what the rank counts below the `1e-10` threshold rely on.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::config::Config;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SingularResult {
    /// Non-increasing, non-negative.
    pub values: Vec<f64>,
}

impl SingularResult {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub fn svd_values(a: &ComplexMatrix) -> Result<SingularResult> {
    svd_values_with(a, &Config::DEFAULT)
}

pub fn svd_values_with(a: &ComplexMatrix, cfg: &Config) -> Result<SingularResult> {
    let order = a.rows().max(a.cols());
    if order > cfg.eig_max_order {
        return Err(Error::ResourceLimit {
            order,
            max: cfg.eig_max_order,
        });
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    // work with a tall matrix
    let mut m = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let (diag, sup) = bidiagonalize(&mut m);
    let n = diag.len();

    // Golub–Kahan tridiagonal: zero diagonal, off-diagonal d1, e1, d2, e2, …, dn
    let mut off = Vec::with_capacity(2 * n);
    for i in 0..n {
        off.push(diag[i]);
        if i + 1 < n {
            off.push(sup[i]);
        }
    }
    let mut eig = vec![0.0; 2 * n];
    off.push(0.0);
    tridiagonal_eigenvalues(&mut eig, &mut off, cfg.eig_max_sweeps.max(30))?;
    eig.sort_by(|a, b| b.total_cmp(a));
    let values = eig.into_iter().take(n).map(|x| x.max(0.0)).collect();
    Ok(SingularResult { values })
}

/// Reduces a tall `m` to upper bidiagonal form; returns moduli of the
/// diagonal and super-diagonal (phases can be scaled away by diagonal unitaries).
fn bidiagonalize(m: &mut ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut diag = vec![0.0; cols];
    let mut sup = vec![0.0; cols.saturating_sub(1)];
    let mut v = vec![ZERO; rows.max(cols)];
    for k in 0..cols {
        // left reflector on column k, rows k..
        let norm = (k..rows).map(|i| m[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        diag[k] = norm;
        if norm > 0.0 {
            let x0 = m[(k, k)];
            let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
            for i in k..rows {
                v[i] = m[(i, k)];
            }
            v[k] += phase * norm;
            let vn2: f64 = (k..rows).map(|i| v[i].norm_sqr()).sum();
            let beta = 2.0 / vn2;
            for j in k + 1..cols {
                let mut s = ZERO;
                for i in k..rows {
                    s += v[i].conj() * m[(i, j)];
                }
                s *= beta;
                for i in k..rows {
                    m[(i, j)] -= v[i] * s;
                }
            }
        }
        if k + 1 >= cols {
            continue;
        }
        // right reflector on row k, columns k+1..
        let norm = (k + 1..cols).map(|j| m[(k, j)].norm_sqr()).sum::<f64>().sqrt();
        sup[k] = norm;
        if norm > 0.0 {
            let x0 = m[(k, k + 1)];
            let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
            // reflect conj(row) so the operation is a right multiplication
            for j in k + 1..cols {
                v[j] = m[(k, j)].conj();
            }
            v[k + 1] += phase.conj() * norm;
            let vn2: f64 = (k + 1..cols).map(|j| v[j].norm_sqr()).sum();
            let beta = 2.0 / vn2;
            for i in k + 1..rows {
                let row = m.row_mut(i);
                let mut s = ZERO;
                for j in k + 1..cols {
                    s += row[j] * v[j];
                }
                s *= beta;
                for j in k + 1..cols {
                    row[j] -= s * v[j].conj();
                }
            }
        }
    }
    (diag, sup)
}

/// Implicit QL on a symmetric tridiagonal matrix (diagonal `d`, off-diagonal
/// `e[i]` coupling `i` and `i+1`); eigenvalues overwrite `d`.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64], max_sweeps: usize) -> Result<()> {
    let n = d.len();
    let floor = f64::EPSILON * e.iter().chain(d.iter()).fold(0.0f64, |a, x| a.max(x.abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                // the absolute floor keeps zero-diagonal Golub–Kahan blocks converging
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > max_sweeps {
                return Err(Error::NoConvergence {
                    order: n,
                    converged: l,
                    partial: d[..l].iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eig::eig_dense;
    use crate::numerics::testing::{random_matrix, random_unitary, random_vector};

    #[test]
    fn diagonal_moduli_sorted() {
        let a = ComplexMatrix::from_diag(&[Complex64::new(3.0, 0.0), Complex64::new(0.0, -4.0)]);
        let s = svd_values(&a).unwrap();
        assert!((s.values[0] - 4.0).abs() < 1e-14);
        assert!((s.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn unitary_has_unit_singular_values() {
        let s = svd_values(&random_unitary(4, 9)).unwrap();
        assert!(s.values.iter().all(|x| (x - 1.0).abs() < 1e-13));
    }

    #[test]
    fn rank_one_outer_product() {
        let mut u = random_vector(5, 1);
        let mut v = random_vector(5, 2);
        let nu = crate::numerics::matrix::vec_norm(&u);
        let nv = crate::numerics::matrix::vec_norm(&v);
        u.iter_mut().for_each(|z| *z *= 2.0 / nu);
        v.iter_mut().for_each(|z| *z *= 3.0 / nv);
        let a = ComplexMatrix::from_fn(5, 5, |i, j| u[i] * v[j].conj());
        let s = svd_values(&a).unwrap();
        assert!((s.values[0] - 6.0).abs() < 1e-13);
        assert!(s.values[1..].iter().all(|&x| x < 1e-14));
    }

    #[test]
    fn cross_check_against_gram_eigenvalues() {
        let a = random_matrix(8, 8, 42);
        let s = svd_values(&a).unwrap();
        let gram = a.adjoint().matmul(&a).unwrap();
        let mut ev: Vec<f64> = eig_dense(&gram, false)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|z| z.re.max(0.0).sqrt())
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in s.values.iter().zip(&ev) {
            assert!((x - y).abs() <= 1e-10 * y, "{x} vs {y}");
        }
    }

    #[test]
    fn adjoint_has_same_values_and_rectangular_ok() {
        let a = random_matrix(7, 4, 5);
        let s1 = svd_values(&a).unwrap();
        let s2 = svd_values(&a.adjoint()).unwrap();
        assert_eq!(s1.values.len(), 4);
        for (x, y) in s1.values.iter().zip(&s2.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
