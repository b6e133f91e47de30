//! LU factorizations with partial pivoting: dense, and banded (LAPACK `gbtrf`
//! layout, where pivoting widens the upper bandwidth to `lower + upper`).

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::config::Config;
use crate::error::{Error, Result};

/// Factorization handle shared by the dense and banded paths.
#[derive(Debug, Clone)]
pub enum LuFactor {
    Dense(DenseLu),
    Banded(BandedLu),
}

impl LuFactor {
    pub fn order(&self) -> usize {
        match self {
            LuFactor::Dense(f) => f.lu.rows(),
            LuFactor::Banded(f) => f.n,
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) -> Result<()> {
        if b.len() != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                actual: b.len(),
            });
        }
        match self {
            LuFactor::Dense(f) => f.solve_in_place(b),
            LuFactor::Banded(f) => f.solve_in_place(b),
        }
        Ok(())
    }

    pub fn is_banded(&self) -> bool {
        matches!(self, LuFactor::Banded(_))
    }
}

#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: ComplexMatrix,
    pivots: Vec<usize>,
}

pub fn lu_factor(a: &ComplexMatrix) -> Result<LuFactor> {
    if !a.is_square() {
        return Err(Error::invalid(format!("LU needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    let threshold = Config::DEFAULT.lu_pivot_tol * a.max_abs();
    let mut lu = a.clone();
    let mut pivots = vec![0; n];
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= threshold || pmax == 0.0 {
            return Err(Error::SingularMatrix { pivot: k });
        }
        pivots[k] = p;
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
        }
        let inv = 1.0 / lu[(k, k)];
        let pivot_row: Vec<_> = lu.row(k)[k + 1..].to_vec();
        for i in k + 1..n {
            let l = lu[(i, k)] * inv;
            lu[(i, k)] = l;
            if l == ZERO {
                continue;
            }
            let row = &mut lu.row_mut(i)[k + 1..];
            for (x, &u) in row.iter_mut().zip(&pivot_row) {
                *x -= l * u;
            }
        }
    }
    Ok(LuFactor::Dense(DenseLu { lu, pivots }))
}

impl DenseLu {
    fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.lu.rows();
        for k in 0..n {
            b.swap(k, self.pivots[k]);
        }
        for i in 0..n {
            let row = self.lu.row(i);
            let s: Complex64 = row[..i].iter().zip(&b[..i]).map(|(l, x)| l * x).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: Complex64 = row[i + 1..].iter().zip(&b[i + 1..]).map(|(u, x)| u * x).sum();
            b[i] = (b[i] - s) / row[i];
        }
    }
}

/// Banded storage: row `i` keeps columns `i - lower ..= i + lower + upper`.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    lower: usize,
    /// Upper bandwidth after fill-in (`lower + upper`).
    upper_fill: usize,
    band: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn width(&self) -> usize {
        self.lower + self.upper_fill + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.band[i * self.width() + (j + self.lower - i)]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        let w = self.width();
        &mut self.band[i * w + (j + self.lower - i)]
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper_fill - self.lower)
    }

    fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            let end = (k + self.lower + 1).min(n);
            for (i, bi) in b.iter_mut().enumerate().take(end).skip(k + 1) {
                *bi -= self.at(i, k) * bk;
            }
        }
        for i in (0..n).rev() {
            let end = (i + self.upper_fill + 1).min(n);
            let s: Complex64 = (i + 1..end).map(|j| self.at(i, j) * b[j]).sum();
            b[i] = (b[i] - s) / self.at(i, i);
        }
    }
}

/// Banded LU from a dense matrix whose nonzeros must lie inside the declared band.
pub fn banded_lu_factor(a: &ComplexMatrix, lower: usize, upper: usize) -> Result<LuFactor> {
    if !a.is_square() {
        return Err(Error::invalid("banded LU needs a square matrix"));
    }
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            let outside = (i > j && i - j > lower) || (j > i && j - i > upper);
            if outside && a[(i, j)] != ZERO {
                return Err(Error::invalid(format!(
                    "entry ({i},{j}) lies outside the declared band ({lower},{upper})"
                )));
            }
        }
    }
    banded_lu_from_fn(n, lower, upper, |i, j| a[(i, j)])
}

/// Banded LU where `entry(i, j)` is only queried inside the band.
pub fn banded_lu_from_fn(
    n: usize,
    lower: usize,
    upper: usize,
    entry: impl Fn(usize, usize) -> Complex64,
) -> Result<LuFactor> {
    let upper_fill = lower + upper;
    let width = lower + upper_fill + 1;
    let mut f = BandedLu {
        n,
        lower,
        upper_fill,
        band: vec![ZERO; n * width],
        pivots: vec![0; n],
    };
    let mut max_abs = 0.0f64;
    for i in 0..n {
        for j in i.saturating_sub(lower)..(i + upper + 1).min(n) {
            let v = entry(i, j);
            max_abs = max_abs.max(v.norm());
            *f.at_mut(i, j) = v;
        }
    }
    let threshold = Config::DEFAULT.lu_pivot_tol * max_abs;
    for k in 0..n {
        let last_row = (k + lower).min(n - 1);
        let (p, pmax) = (k..=last_row)
            .map(|i| (i, f.at(i, k).norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= threshold || pmax == 0.0 {
            return Err(Error::SingularMatrix { pivot: k });
        }
        f.pivots[k] = p;
        let last_col = (k + upper_fill).min(n - 1);
        if p != k {
            for j in k..=last_col {
                let a = f.at(k, j);
                let b = f.at(p, j);
                *f.at_mut(k, j) = b;
                *f.at_mut(p, j) = a;
            }
        }
        let inv = 1.0 / f.at(k, k);
        for i in k + 1..=last_row {
            let l = f.at(i, k) * inv;
            *f.at_mut(i, k) = l;
            if l == ZERO {
                continue;
            }
            for j in k + 1..=last_col {
                let u = f.at(k, j);
                *f.at_mut(i, j) -= l * u;
            }
        }
    }
    Ok(LuFactor::Banded(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::{vec_norm, ONE};
    use crate::numerics::testing::{random_matrix, random_vector};

    fn residual(a: &ComplexMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
        let ax = a.mul_vec(x).unwrap();
        let d: Vec<_> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
        vec_norm(&d) / vec_norm(b)
    }

    fn tridiag(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => Complex64::new(2.0, 0.0),
            1 => ONE,
            _ => ZERO,
        })
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = random_vector(6, 3);
        let f = lu_factor(&ComplexMatrix::identity(6)).unwrap();
        assert_eq!(f.solve(&b).unwrap(), b);
    }

    #[test]
    fn tridiagonal_against_explicit_inverse() {
        // inverse of tridiag(1,2,1) of order 4: (-1)^{i+j} min(i,j)(n+1-max(i,j))/(n+1), 1-based
        let n = 4;
        let inv = ComplexMatrix::from_fn(n, n, |i, j| {
            let (i, j) = (i + 1, j + 1);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(sign * (i.min(j) * (n + 1 - i.max(j))) as f64 / (n + 1) as f64, 0.0)
        });
        let a = tridiag(n);
        assert!(a.matmul(&inv).unwrap().max_abs_diff(&ComplexMatrix::identity(n)) < 1e-14);
        let b = random_vector(n, 11);
        let want = inv.mul_vec(&b).unwrap();
        for f in [lu_factor(&a).unwrap(), banded_lu_factor(&a, 1, 1).unwrap()] {
            let x = f.solve(&b).unwrap();
            for (p, q) in x.iter().zip(&want) {
                assert!((p - q).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn random_dense_residual() {
        let a = random_matrix(50, 50, 1);
        let b = random_vector(50, 2);
        let x = lu_factor(&a).unwrap().solve(&b).unwrap();
        assert!(residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn banded_matches_dense_with_pivoting() {
        // random band matrix with small diagonal forces row swaps
        let n = 30;
        let full = random_matrix(n, n, 8);
        let a = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                full[(i, j)] * 1e-3
            } else if (i > j && i - j <= 2) || (j > i && j - i <= 3) {
                full[(i, j)]
            } else {
                ZERO
            }
        });
        let b = random_vector(n, 9);
        let xb = banded_lu_factor(&a, 2, 3).unwrap().solve(&b).unwrap();
        let xd = lu_factor(&a).unwrap().solve(&b).unwrap();
        assert!(residual(&a, &xb, &b) < 1e-10);
        for (p, q) in xb.iter().zip(&xd) {
            assert!((p - q).norm() < 1e-8 * (1.0 + q.norm()));
        }
    }

    #[test]
    fn band_violation_rejected() {
        let a = tridiag(5);
        assert!(matches!(banded_lu_factor(&a, 0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn singular_pivot_reported() {
        let a = ComplexMatrix::from_fn(3, 3, |i, _| Complex64::new(i as f64, 0.0));
        assert!(matches!(lu_factor(&a), Err(Error::SingularMatrix { .. })));
        let z = ComplexMatrix::zeros(3, 3);
        assert!(matches!(banded_lu_factor(&z, 1, 1), Err(Error::SingularMatrix { pivot: 0 })));
    }

    #[test]
    fn lower_bidiagonal_forward_substitution() {
        // T_n(1 - e^{ix}): unit diagonal, -1 on the first subdiagonal
        let n = 40;
        let a = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                ONE
            } else if i == j + 1 {
                -ONE
            } else {
                ZERO
            }
        });
        let b = random_vector(n, 4);
        let x = banded_lu_factor(&a, 1, 0).unwrap().solve(&b).unwrap();
        assert!(residual(&a, &x, &b) <= 1e-10);
    }
}
