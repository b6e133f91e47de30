//! Multilevel block Toeplitz matrices `T_n(f)`.
//!
//! Block `(i, j)` of `T_n(f)` is the Fourier coefficient `f̂_{i−j}`, where
//! `i, j` run over `e..=n` in lexicographic order (last index fastest). The
//! scalar index of component `a` of block `i` is `lin(i)·s + a`.

mod embed;
mod gap;
mod io;
mod precond;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::numerics::matrix::ComplexMatrix;
use crate::symbol::{box_iter, fourier_table, FourierTable, MatrixSymbol, MultiIndex};

pub use crate::symbol::{delinearize, linearize};
pub use embed::Embedding;
pub use gap::{commutator_gap, gap_matrix, CommutatorGap};
pub use io::{read_binary, read_csv, write_binary, write_csv, BinaryHeader, BINARY_MAGIC};
pub use precond::{factor_preconditioner, PrecondFactor};

/// `T_n(f)` with its coefficient table, and optionally the assembled matrix
/// and the FFT embedding used by [`matvec`](Self::matvec).
#[derive(Clone)]
pub struct ToeplitzOperator {
    symbol: MatrixSymbol,
    n: MultiIndex,
    coeffs: FourierTable,
    dense: Option<ComplexMatrix>,
    embedding: Option<Embedding>,
}

impl std::fmt::Debug for ToeplitzOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzOperator")
            .field("symbol", &self.symbol.name())
            .field("n", &self.n)
            .field("order", &self.order())
            .field("assembled", &self.is_assembled())
            .field("embedded", &self.is_embedded())
            .finish()
    }
}

/// Quadrature grid used for the coefficients of a general symbol: at least
/// `4·max(n_i)` points per dimension, and never below the configured default.
pub fn coefficient_grid(k: usize, n: &MultiIndex) -> Vec<usize> {
    let widest = n.as_slice().iter().copied().max().unwrap_or(1).max(1) as usize;
    vec![Config::default_coeff_grid(k).max(4 * widest); k]
}

fn check_size(f: &MatrixSymbol, n: &MultiIndex) -> Result<()> {
    if n.k() != f.k() {
        return Err(Error::DimensionMismatch {
            expected: f.k(),
            actual: n.k(),
        });
    }
    if n.as_slice().iter().any(|&v| v < 1) {
        return Err(Error::invalid(format!("matrix size {n} must be positive in every level")));
    }
    Ok(())
}

fn coefficients(f: &MatrixSymbol, n: &MultiIndex, grid: Option<&[usize]>) -> Result<FourierTable> {
    check_size(f, n)?;
    let radius: Vec<usize> = n.as_slice().iter().map(|&v| v as usize - 1).collect();
    let default_grid;
    let grid = match grid {
        Some(g) => g,
        None => {
            default_grid = coefficient_grid(f.k(), n);
            &default_grid
        }
    };
    fourier_table(f, &radius, grid)
}

/// Assembles `T_n(f)` densely. `coeff_grid` overrides the quadrature grid of
/// general symbols.
pub fn build_dense(f: &MatrixSymbol, n: &MultiIndex, coeff_grid: Option<&[usize]>) -> Result<ToeplitzOperator> {
    check_size(f, n)?;
    let order = f.s() * n.product() as usize;
    let max = Config::max_dense_order();
    if order > max {
        return Err(Error::ResourceLimit { order, max });
    }
    let mut op = ToeplitzOperator {
        symbol: f.clone(),
        n: n.clone(),
        coeffs: coefficients(f, n, coeff_grid)?,
        dense: None,
        embedding: None,
    };
    op.dense = Some(op.assemble());
    Ok(op)
}

/// Matrix-free `T_n(f)` backed by a multilevel circulant embedding.
pub fn build_embedded(f: &MatrixSymbol, n: &MultiIndex, coeff_grid: Option<&[usize]>) -> Result<ToeplitzOperator> {
    let coeffs = coefficients(f, n, coeff_grid)?;
    let embedding = Embedding::new(&coeffs, n)?;
    Ok(ToeplitzOperator {
        symbol: f.clone(),
        n: n.clone(),
        coeffs,
        dense: None,
        embedding: Some(embedding),
    })
}

impl ToeplitzOperator {
    pub fn symbol(&self) -> &MatrixSymbol {
        &self.symbol
    }

    pub fn n(&self) -> &MultiIndex {
        &self.n
    }

    /// `n̂ = Π n_i`.
    pub fn n_hat(&self) -> usize {
        self.n.product() as usize
    }

    pub fn block_size(&self) -> usize {
        self.symbol.s()
    }

    /// `d_n = s·n̂`.
    pub fn order(&self) -> usize {
        self.block_size() * self.n_hat()
    }

    pub fn is_assembled(&self) -> bool {
        self.dense.is_some()
    }

    pub fn is_embedded(&self) -> bool {
        self.embedding.is_some()
    }

    pub fn coefficients(&self) -> &FourierTable {
        &self.coeffs
    }

    pub fn dense(&self) -> Option<&ComplexMatrix> {
        self.dense.as_ref()
    }

    /// Dense matrix, assembling a copy if the operator is matrix-free.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        if let Some(d) = &self.dense {
            return Ok(d.clone());
        }
        let max = Config::max_dense_order();
        if self.order() > max {
            return Err(Error::ResourceLimit {
                order: self.order(),
                max,
            });
        }
        Ok(self.assemble())
    }

    pub fn into_dense(self) -> Result<ComplexMatrix> {
        match self.dense {
            Some(d) => Ok(d),
            None => self.to_dense(),
        }
    }

    /// Adds the FFT embedding to an assembled operator.
    pub fn with_embedding(mut self) -> Result<Self> {
        if self.embedding.is_none() {
            self.embedding = Some(Embedding::new(&self.coeffs, &self.n)?);
        }
        Ok(self)
    }

    fn assemble(&self) -> ComplexMatrix {
        let s = self.block_size();
        let d = self.order();
        let lo: Vec<i64> = vec![1; self.n.k()];
        let blocks: Vec<Vec<i64>> = box_iter(&lo, self.n.as_slice()).collect();
        let mut out = ComplexMatrix::zeros(d, d);
        out.as_mut_slice()
            .par_chunks_mut(s * d)
            .enumerate()
            .for_each(|(bi, rows)| {
                let i = &blocks[bi];
                let mut diff = vec![0i64; i.len()];
                for (bj, j) in blocks.iter().enumerate() {
                    for (t, slot) in diff.iter_mut().enumerate() {
                        *slot = i[t] - j[t];
                    }
                    let Some(c) = self.coeffs.get_ref(&diff) else { continue };
                    for a in 0..s {
                        let dst = &mut rows[a * d + bj * s..a * d + bj * s + s];
                        dst.copy_from_slice(c.row(a));
                    }
                }
            });
        out
    }

    /// `T_n(f)·v`, through the FFT embedding when present.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                actual: v.len(),
            });
        }
        match (&self.embedding, &self.dense) {
            (Some(e), _) => e.apply(v),
            (None, Some(d)) => d.mul_vec(v),
            (None, None) => unreachable!("operator has neither storage"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::{ONE, ZERO};
    use crate::numerics::testing::random_vector;
    use crate::symbol::{catalog, CaseId};
    use std::sync::Arc;

    fn mi(v: &[i64]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_trig(terms: &[(i64, f64)]) -> MatrixSymbol {
        MatrixSymbol::trig(1, 1, terms.iter().map(|&(j, v)| (mi(&[j]), ComplexMatrix::scalar(c(v))))).unwrap()
    }

    #[test]
    fn tridiagonal_from_cosine() {
        let f = scalar_trig(&[(0, 2.0), (1, 1.0), (-1, 1.0)]);
        let t = build_dense(&f, &mi(&[3]), None).unwrap();
        let want = ComplexMatrix::from_rows(&[
            vec![c(2.0), c(1.0), ZERO],
            vec![c(1.0), c(2.0), c(1.0)],
            vec![ZERO, c(1.0), c(2.0)],
        ])
        .unwrap();
        assert!(t.dense().unwrap().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn shift_is_subdiagonal() {
        let f = scalar_trig(&[(1, 1.0)]);
        let t = build_dense(&f, &mi(&[4]), None).unwrap();
        let m = t.dense().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j + 1 { ONE } else { ZERO };
                assert_eq!(m[(i, j)], want);
            }
        }
        let v: Vec<Complex64> = (1..=4).map(|x| c(x as f64)).collect();
        let out = t.with_embedding().unwrap().matvec(&v).unwrap();
        let want = [0.0, 1.0, 2.0, 3.0];
        for (a, b) in out.iter().zip(want) {
            assert!((a - c(b)).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_gives_block_diagonal() {
        let cm = ComplexMatrix::from_fn(2, 2, |i, j| Complex64::new(1.0 + i as f64, j as f64 - 0.5));
        let f = MatrixSymbol::constant(cm.clone(), 2).unwrap();
        let t = build_dense(&f, &mi(&[2, 3]), None).unwrap();
        let want = ComplexMatrix::identity(6).kron(&cm);
        assert!(t.dense().unwrap().max_abs_diff(&want) < 1e-12);
        assert_eq!(t.order(), 12);
    }

    #[test]
    fn two_level_block_positions() {
        // f = e^{i x₂}: block (i, j) is 1 when i − j = (0, 1)
        let f = MatrixSymbol::monomial(mi(&[0, 1]), ComplexMatrix::scalar(ONE)).unwrap();
        let n = mi(&[2, 3]);
        let m = build_dense(&f, &n, None).unwrap().into_dense().unwrap();
        let lo = MultiIndex::ones(2);
        for p in 0..6 {
            for q in 0..6 {
                let i = delinearize(p, &lo, &n).unwrap();
                let j = delinearize(q, &lo, &n).unwrap();
                let want = if i.sub(&j).as_slice() == [0, 1] { ONE } else { ZERO };
                assert_eq!(m[(p, q)], want, "({i}, {j})");
            }
        }
    }

    #[test]
    fn hermitian_symbol_gives_hermitian_matrix() {
        let (_, g) = catalog(CaseId::Six, None).unwrap();
        let h = g.add(&g.adjoint().unwrap()).unwrap();
        let m = build_dense(&h, &mi(&[4, 5]), None).unwrap().into_dense().unwrap();
        assert!(m.is_hermitian(1e-10));
    }

    #[test]
    fn general_symbol_uses_quadrature() {
        let (f1, _) = catalog(CaseId::One, Some(2.0)).unwrap();
        let inner = f1.clone();
        let opaque = MatrixSymbol::general(1, 2, Arc::new(move |x: &[f64]| inner.evaluate(x))).unwrap();
        let n = mi(&[12]);
        let exact = build_dense(&f1, &n, None).unwrap().into_dense().unwrap();
        let quad = build_dense(&opaque, &n, None).unwrap().into_dense().unwrap();
        assert!(exact.max_abs_diff(&quad) < 1e-12);
        assert_eq!(coefficient_grid(1, &mi(&[600])), vec![2400]);
    }

    #[test]
    fn embedded_matches_dense() {
        for (case, n) in [(CaseId::One, mi(&[32])), (CaseId::Three, mi(&[17])), (CaseId::Five, mi(&[5, 7]))] {
            let (f, _) = catalog(case, Some(1.0)).unwrap();
            let t = build_dense(&f, &n, None).unwrap().with_embedding().unwrap();
            let v = random_vector(t.order(), 11);
            let dense = t.dense().unwrap().mul_vec(&v).unwrap();
            let fast = t.matvec(&v).unwrap();
            let diff: f64 = dense.iter().zip(&fast).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let scale: f64 = dense.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!(diff <= 1e-10 * scale, "case {case}: {diff}");
        }
    }

    #[test]
    fn identity_matvec() {
        let t = build_embedded(&MatrixSymbol::identity(2, 2).unwrap(), &mi(&[3, 4]), None).unwrap();
        let v = random_vector(24, 3);
        let out = t.matvec(&v).unwrap();
        assert!(out.iter().zip(&v).all(|(a, b)| (a - b).norm() < 1e-13));
        assert!(matches!(t.matvec(&v[1..]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn oversize_is_refused() {
        let f = MatrixSymbol::identity(1, 2).unwrap();
        let n = mi(&[Config::max_dense_order() as i64]);
        assert!(matches!(build_dense(&f, &n, None), Err(Error::ResourceLimit { .. })));
        assert!(build_embedded(&f, &n, None).is_ok());
    }

    #[test]
    fn size_checks() {
        let f = MatrixSymbol::identity(1, 1).unwrap();
        assert!(matches!(build_dense(&f, &mi(&[2, 2]), None), Err(Error::DimensionMismatch { .. })));
        assert!(build_dense(&f, &mi(&[0]), None).is_err());
    }
}
