//! Small Hermitian eigenproblems (block size `s ≤ 8`) via cyclic Jacobi,
//! plus a closed form for the 2x2 case that dominates the symbol scans.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};

/// Eigenvalues (ascending) and unit eigenvectors (columns) of a Hermitian matrix.
///
/// Only the upper triangle and the real part of the diagonal are read.
pub fn eigh(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.rows();
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(a[(i, i)].re, 0.0)
        } else if i < j {
            a[(i, j)]
        } else {
            a[(j, i)].conj()
        }
    });
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let abs = apq.norm();
                if abs == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // rotate the real symmetric problem obtained after removing the phase of a_pq
                let phase = apq / abs;
                let theta = 0.5 * (2.0 * abs).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // J acts on columns p,q: [c, s·phase; -s·conj(phase), c]^T layout below
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * s * phase.conj();
                    m[(k, q)] = mkp * s * phase + mkq * c;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * s * phase;
                    m[(q, k)] = mpk * s * phase.conj() + mqk * c;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s * phase.conj();
                    v[(k, q)] = vkp * s * phase + vkq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part `(M + M*)/2` of `e^{-iθ}·M`, with
/// `rot = e^{-iθ}`. Closed forms for orders 1 and 2.
pub fn min_eig_rotated_hermitian_part(m: &ComplexMatrix, rot: Complex64) -> f64 {
    match m.rows() {
        1 => (rot * m[(0, 0)]).re,
        2 => {
            let a = (rot * m[(0, 0)]).re;
            let d = (rot * m[(1, 1)]).re;
            let b = 0.5 * (rot * m[(0, 1)] + (rot * m[(1, 0)]).conj());
            let mid = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            mid - half.hypot(b.norm())
        }
        _ => eigh(&rotated_hermitian_part(m, rot)).0[0],
    }
}

pub fn rotated_hermitian_part(m: &ComplexMatrix, rot: Complex64) -> ComplexMatrix {
    let n = m.rows();
    ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (rot * m[(i, j)] + (rot * m[(j, i)]).conj()))
}

/// Unit eigenvector for the smallest eigenvalue of the rotated Hermitian part.
pub fn min_eigvec_rotated_hermitian_part(m: &ComplexMatrix, rot: Complex64) -> Vec<Complex64> {
    let h = rotated_hermitian_part(m, rot);
    if h.rows() == 1 {
        return vec![ONE];
    }
    let (_, vecs) = eigh(&h);
    (0..h.rows()).map(|i| vecs[(i, 0)]).collect()
}
