//! The product gap `T_n(g)T_n(f) − T_n(gf)` for a trigonometric polynomial `g`.

use serde::Serialize;

use super::{build_dense, coefficient_grid, coefficients, ToeplitzOperator};
use crate::error::{Error, Result};
use crate::numerics::matrix::ComplexMatrix;
use crate::numerics::norms::{numerical_rank, schatten_norm, Schatten, DEFAULT_RANK_THRESHOLD};
use crate::symbol::{box_iter, FourierTable, MatrixSymbol, MultiIndex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorGap {
    pub rank: usize,
    /// Trace (Schatten-1) norm of the gap.
    pub trace_norm: f64,
    /// `s·[n̂ − Π(n_i − 2r_i)]`.
    pub rank_bound: usize,
    pub n_hat: usize,
}

impl CommutatorGap {
    pub fn within_bound(&self) -> bool {
        self.rank <= self.rank_bound
    }

    /// `‖gap‖₁ / n̂`.
    pub fn normalized_trace_norm(&self) -> f64 {
        self.trace_norm / self.n_hat as f64
    }
}

fn check_degree(g: &MatrixSymbol, n: &MultiIndex) -> Result<MultiIndex> {
    let r = g
        .degree()
        .cloned()
        .ok_or_else(|| Error::invalid("the left factor g must be a trigonometric polynomial"))?;
    if n.k() != g.k() {
        return Err(Error::DimensionMismatch {
            expected: g.k(),
            actual: n.k(),
        });
    }
    if n.as_slice().iter().zip(r.as_slice()).any(|(&ni, &ri)| ni < 2 * ri + 1) {
        return Err(Error::invalid(format!("n = {n} must be at least 2r + e with r = {r}")));
    }
    Ok(r)
}

/// Coefficients of `gf` on the box `|j| ≤ n − e`, convolved from the tables
/// of `g` and `f` so that quadrature error in `f̂` cancels in the gap.
fn product_table(g: &MatrixSymbol, f_table: &FourierTable, n: &MultiIndex) -> Result<ToeplitzOperator> {
    let table = g.trig_table().expect("checked trig");
    let s = g.s();
    let k = g.k();
    let lo: Vec<i64> = n.as_slice().iter().map(|&v| 1 - v).collect();
    let hi: Vec<i64> = n.as_slice().iter().map(|&v| v - 1).collect();
    let mut coeffs = Vec::new();
    for j in box_iter(&lo, &hi) {
        let mut acc = ComplexMatrix::zeros(s, s);
        for (l, gl) in table.iter() {
            let jl: Vec<i64> = j.iter().zip(l.as_slice()).map(|(a, b)| a - b).collect();
            if let Some(fc) = f_table.get_ref(&jl) {
                acc = acc.add(&gl.matmul(fc)?)?;
            }
        }
        if acc.max_abs() > 0.0 {
            coeffs.push((MultiIndex::from(j.as_slice()), acc));
        }
    }
    let product = if coeffs.is_empty() {
        MatrixSymbol::constant(ComplexMatrix::zeros(s, s), k)?
    } else {
        MatrixSymbol::trig(k, s, coeffs)?
    };
    build_dense(&product, n, None)
}

/// Dense `T_n(g)T_n(f) − T_n(gf)`.
pub fn gap_matrix(f: &MatrixSymbol, g: &MatrixSymbol, n: &MultiIndex) -> Result<ComplexMatrix> {
    let r = check_degree(g, n)?;
    if f.k() != g.k() || f.s() != g.s() {
        return Err(Error::DimensionMismatch {
            expected: g.s(),
            actual: f.s(),
        });
    }
    // f̂_j is needed for |j| ≤ n − e + r
    let wide = n.add(&r);
    // one grid for both tables so quadrature error cancels
    let grid = coefficient_grid(f.k(), &wide);
    let f_table = coefficients(f, &wide, Some(&grid))?;
    let tf = build_dense(f, n, Some(&grid))?.into_dense()?;
    let tg = build_dense(g, n, None)?.into_dense()?;
    let tgf = product_table(g, &f_table, n)?.into_dense()?;
    tg.matmul(&tf)?.sub(&tgf)
}

/// Rank and trace norm of the product gap, with the rank bound for degree `r`.
pub fn commutator_gap(f: &MatrixSymbol, g: &MatrixSymbol, n: &MultiIndex) -> Result<CommutatorGap> {
    let r = check_degree(g, n)?;
    let gap = gap_matrix(f, g, n)?;
    let n_hat = n.product() as usize;
    let inner: i64 = n.as_slice().iter().zip(r.as_slice()).map(|(&a, &b)| a - 2 * b).product();
    Ok(CommutatorGap {
        rank: numerical_rank(&gap, DEFAULT_RANK_THRESHOLD)?,
        trace_norm: schatten_norm(&gap, Schatten::Trace)?,
        rank_bound: g.s() * (n_hat - inner as usize),
        n_hat,
    })
}
