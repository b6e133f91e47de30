//! Dense complex eigensolver: Householder reduction to upper Hessenberg form
//! followed by implicitly shifted single-shift QR with deflation.

use num_complex::Complex64;

use super::matrix::{vec_norm, ComplexMatrix, ONE, ZERO};
use crate::config::Config;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<Complex64>,
    /// Unit right eigenvectors, column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: Option<ComplexMatrix>,
    /// `‖Av − λv‖` per eigenpair when vectors were requested.
    pub residuals: Option<Vec<f64>>,
}

pub fn eig_dense(a: &ComplexMatrix, want_vectors: bool) -> Result<EigenResult> {
    eig_dense_with(a, want_vectors, &Config::DEFAULT)
}

pub fn eig_dense_with(a: &ComplexMatrix, want_vectors: bool, cfg: &Config) -> Result<EigenResult> {
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n > cfg.eig_max_order {
        return Err(Error::ResourceLimit {
            order: n,
            max: cfg.eig_max_order,
        });
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    if n == 1 {
        return Ok(EigenResult {
            eigenvalues: vec![a[(0, 0)]],
            eigenvectors: want_vectors.then(|| ComplexMatrix::identity(1)),
            residuals: want_vectors.then(|| vec![0.0]),
        });
    }

    let mut h = a.clone();
    let mut z = want_vectors.then(|| ComplexMatrix::identity(n));
    hessenberg(&mut h, z.as_mut());
    let eigenvalues = hessenberg_qr(&mut h, z.as_mut(), cfg)?;

    let (eigenvectors, residuals) = match z {
        Some(z) => {
            let vecs = schur_vectors_to_eigenvectors(&h, &z);
            let res = (0..n)
                .map(|j| {
                    let v: Vec<_> = (0..n).map(|i| vecs[(i, j)]).collect();
                    let av = a.mul_vec(&v).expect("square");
                    let diff: Vec<_> = av.iter().zip(&v).map(|(x, y)| x - eigenvalues[j] * y).collect();
                    vec_norm(&diff)
                })
                .collect();
            (Some(vecs), Some(res))
        }
        None => (None, None),
    };
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
        residuals,
    })
}

/// In-place Householder reduction; accumulates the transformation into `z`.
fn hessenberg(h: &mut ComplexMatrix, mut z: Option<&mut ComplexMatrix>) {
    let n = h.rows();
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let alpha_norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        // v = x + phase·‖x‖·e1, H = I − 2vv*/(v*v)
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] += phase * alpha_norm;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        let vs = &v[k + 1..n];

        // left: rows k+1..n, columns k..n
        for j in k..n {
            let mut s = ZERO;
            for (off, vi) in vs.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + off, j)];
            }
            s *= beta;
            for (off, vi) in vs.iter().enumerate() {
                h[(k + 1 + off, j)] -= vi * s;
            }
        }
        // right: all rows, columns k+1..n
        for i in 0..n {
            let row = h.row_mut(i);
            let mut s = ZERO;
            for (off, vi) in vs.iter().enumerate() {
                s += row[k + 1 + off] * vi;
            }
            s *= beta;
            for (off, vi) in vs.iter().enumerate() {
                row[k + 1 + off] -= s * vi.conj();
            }
        }
        if let Some(z) = z.as_deref_mut() {
            for i in 0..n {
                let row = z.row_mut(i);
                let mut s = ZERO;
                for (off, vi) in vs.iter().enumerate() {
                    s += row[k + 1 + off] * vi;
                }
                s *= beta;
                for (off, vi) in vs.iter().enumerate() {
                    row[k + 1 + off] -= s * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G·[x; y] = [r; 0]`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, ONE);
    }
    let rho = ax.hypot(ay);
    (ax / rho, (x / ax) * y.conj() / rho)
}

#[inline]
fn rotate_rows(h: &mut ComplexMatrix, i: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    let n = h.cols();
    let data = h.as_mut_slice();
    let (top, bottom) = data.split_at_mut((i + 1) * n);
    let ri = &mut top[i * n..];
    let rj = &mut bottom[..n];
    for col in cols {
        let a = ri[col];
        let b = rj[col];
        ri[col] = c * a + s * b;
        rj[col] = -s.conj() * a + c * b;
    }
}

#[inline]
fn rotate_cols(h: &mut ComplexMatrix, i: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    let sc = s.conj();
    for r in rows {
        let row = h.row_mut(r);
        let a = row[i];
        let b = row[i + 1];
        row[i] = c * a + sc * b;
        row[i + 1] = -s * a + c * b;
    }
}

/// Eigenvalue of the trailing 2x2 block closest to its (2,2) entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Reduces `h` (upper Hessenberg) to upper triangular Schur form when `z` is
/// given, otherwise only iterates on the active window.
fn hessenberg_qr(h: &mut ComplexMatrix, mut z: Option<&mut ComplexMatrix>, cfg: &Config) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let full = z.is_some();
    // absolute deflation floor: perturbations of this size are below roundoff in A
    let tiny = 1e-2 * f64::EPSILON * h.frobenius_norm();
    let mut eig = vec![ZERO; n];
    let mut found = vec![false; n];

    let mut hi = n as isize - 1;
    let mut its = 0usize;
    while hi >= 0 {
        let h_idx = hi as usize;
        // locate the start of the unreduced block ending at `hi`
        let mut lo = h_idx;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * scale || sub <= tiny {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == h_idx {
            eig[h_idx] = h[(h_idx, h_idx)];
            found[h_idx] = true;
            hi -= 1;
            its = 0;
            continue;
        }
        if its >= cfg.eig_max_sweeps {
            let partial: Vec<_> = (0..n).filter(|&i| found[i]).map(|i| eig[i]).collect();
            return Err(Error::NoConvergence {
                order: n,
                converged: partial.len(),
                partial,
            });
        }
        its += 1;

        let shift = if its.is_multiple_of(10) {
            // exceptional shift breaks rare cycles
            h[(h_idx, h_idx)] + Complex64::new(0.75 * h[(h_idx, h_idx - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(h_idx - 1, h_idx - 1)],
                h[(h_idx - 1, h_idx)],
                h[(h_idx, h_idx - 1)],
                h[(h_idx, h_idx)],
            )
        };

        let (col_end, row_start) = if full { (n, 0) } else { (h_idx + 1, lo) };
        for k in lo..h_idx {
            let (c, s) = if k == lo {
                givens(h[(lo, lo)] - shift, h[(lo + 1, lo)])
            } else {
                givens(h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let first_col = if k == lo { lo } else { k - 1 };
            rotate_rows(h, k, c, s, first_col..col_end);
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            rotate_cols(h, k, c, s, row_start..(k + 3).min(h_idx + 1));
            if let Some(z) = z.as_deref_mut() {
                rotate_cols(z, k, c, s, 0..n);
            }
        }
    }
    Ok(eig)
}

/// Back-substitution on the triangular Schur factor, mapped back through `z`.
fn schur_vectors_to_eigenvectors(t: &ComplexMatrix, z: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let tiny = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for m in j + 1..=k {
                s += t[(j, m)] * y[(m, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < tiny {
                denom = Complex64::new(tiny, 0.0);
            }
            y[(j, k)] = -s / denom;
        }
    }
    let mut x = z.matmul(&y).expect("square");
    for k in 0..n {
        let norm: f64 = (0..n).map(|i| x[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                x[(i, k)] /= norm;
            }
        }
    }
    x
}

/// Sorts by real part, then imaginary part; handy for comparing spectra.
pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}
