//! LU factorizations of `T_n(g)` used as preconditioners.

use num_complex::Complex64;

use super::{build_dense, coefficients};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::numerics::lu::{banded_lu_from_fn, lu_factor, LuFactor};
use crate::numerics::matrix::{ComplexMatrix, ZERO};
use crate::symbol::{strides, MatrixSymbol, MultiIndex};

/// Factorized `T_n(g)`; banded when `g` is a trigonometric polynomial of low degree.
#[derive(Debug, Clone)]
pub struct PrecondFactor {
    lu: LuFactor,
    n: MultiIndex,
    s: usize,
    /// Distance of the essential numerical range of `g` from zero, when known.
    pub d: Option<f64>,
}

impl PrecondFactor {
    pub fn order(&self) -> usize {
        self.lu.order()
    }

    pub fn n(&self) -> &MultiIndex {
        &self.n
    }

    pub fn block_size(&self) -> usize {
        self.s
    }

    pub fn is_banded(&self) -> bool {
        self.lu.is_banded()
    }

    /// Scalar bandwidths `(lower, upper)` before pivoting fill, if banded.
    pub fn bandwidths(&self) -> Option<(usize, usize)> {
        match &self.lu {
            LuFactor::Banded(b) => Some(b.bandwidths()),
            LuFactor::Dense(_) => None,
        }
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = Some(d);
        self
    }

    /// Solves `T_n(g) x = b`.
    pub fn apply(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.lu.solve(b)
    }

    pub fn apply_in_place(&self, b: &mut [Complex64]) -> Result<()> {
        self.lu.solve_in_place(b)
    }

    /// `T_n(g)⁻¹ M`, column by column.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                actual: m.rows(),
            });
        }
        let t = m.transpose();
        let mut out = ComplexMatrix::zeros(m.cols(), m.rows());
        for c in 0..m.cols() {
            let col = out.row_mut(c);
            col.copy_from_slice(t.row(c));
            self.lu.solve_in_place(col)?;
        }
        Ok(out.transpose())
    }
}

/// Banded storage budget, in units of the dense cap squared.
pub const BANDED_STORAGE_FACTOR: usize = 8;

fn singular(e: Error) -> Error {
    match e {
        Error::SingularMatrix { pivot } => Error::Precondition(format!(
            "T_n(g) is numerically singular (zero pivot at {pivot}); g is likely not sectorial"
        )),
        other => other,
    }
}

/// Factors `T_n(g)`. A trigonometric polynomial of degree `r` gives a banded
/// matrix with scalar bandwidth `s(Σ_l r_l·stride_l + 1) − 1`, where
/// `stride_l = Π_{m>l} n_m`; banded LU is used whenever that band is under
/// half the order, dense LU otherwise.
pub fn factor_preconditioner(g: &MatrixSymbol, n: &MultiIndex) -> Result<PrecondFactor> {
    let s = g.s();
    let order = s * n.product() as usize;
    let extents: Vec<usize> = n.as_slice().iter().map(|&v| v.max(1) as usize).collect();
    let stride = strides(&extents);
    let band = g.degree().map(|r| {
        let reach: usize = r.as_slice().iter().zip(&stride).map(|(&r, &st)| r as usize * st).sum();
        s * (reach + 1) - 1
    });
    let lu = match band {
        Some(band) if 2 * band < order && n.k() == g.k() => {
            // band storage of width 3·band + 1 may use up to BANDED_STORAGE_FACTOR
            // times the memory of the largest allowed dense matrix
            let width = 3 * band + 1;
            let budget = BANDED_STORAGE_FACTOR * Config::max_dense_order().pow(2);
            if order.saturating_mul(width) > budget {
                return Err(Error::ResourceLimit {
                    order,
                    max: budget / width,
                });
            }
            let table = coefficients(g, n, None)?;
            let block_index = |mut b: usize| -> Vec<i64> {
                let mut out = vec![0i64; extents.len()];
                for d in (0..extents.len()).rev() {
                    out[d] = (b % extents[d]) as i64;
                    b /= extents[d];
                }
                out
            };
            banded_lu_from_fn(order, band, band, |i, j| {
                let diff: Vec<i64> = block_index(i / s).iter().zip(block_index(j / s)).map(|(a, b)| a - b).collect();
                table.get_ref(&diff).map_or(ZERO, |c| c[(i % s, j % s)])
            })
            .map_err(singular)?
        }
        _ => {
            let t = build_dense(g, n, None)?.into_dense()?;
            lu_factor(&t).map_err(singular)?
        }
    };
    Ok(PrecondFactor {
        lu,
        n: n.clone(),
        s,
        d: None,
    })
}
