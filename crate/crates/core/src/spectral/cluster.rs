//! Outlier counts, moment (trace) tests and empirical distribution functionals.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use super::essential_range;
use crate::numerics::eig::eig_dense;
use crate::numerics::matrix::ComplexMatrix;
use crate::symbol::{grid_points, small_inverse, MatrixSymbol, MultiIndex, QUADRATURE_OFFSET};
use crate::toeplitz::{build_dense, build_embedded, factor_preconditioner};

/// Number of `eigs` at distance `> eps` from every point of `cloud`.
pub fn outlier_count(eigs: &[Complex64], cloud: &[Complex64], eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("outlier radius must be positive, got {eps}")));
    }
    let cell = |z: Complex64| ((z.re / eps).floor() as i64, (z.im / eps).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<Complex64>> = HashMap::new();
    for &z in cloud {
        buckets.entry(cell(z)).or_default().push(z);
    }
    let near = |z: Complex64| {
        let (cx, cy) = cell(z);
        (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                buckets
                    .get(&(cx + dx, cy + dy))
                    .is_some_and(|pts| pts.iter().any(|p| (p - z).norm() <= eps))
            })
        })
    };
    Ok(eigs.iter().filter(|&&z| !near(z)).count())
}

/// Largest power accepted by [`moment_test`].
pub const MAX_MOMENT: usize = 8;
/// Largest order for which the trace side uses dense matrix powers.
pub const DENSE_TRACE_ORDER: usize = 1024;

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub power: usize,
    /// `tr(A^N)/d_n` with `A = T_n⁻¹(g)T_n(f)`.
    pub trace_mean: Complex64,
    /// `(2π)^{-k} ∫ tr(h(x)^N)/s dx` with `h = g⁻¹f`.
    pub integral: Complex64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub n: MultiIndex,
    pub n_max: usize,
    pub rows: Vec<MomentRow>,
    /// Quadrature nodes skipped because `g(x)` was singular.
    pub skipped: usize,
}

/// Compares `tr(A^N)/d_n` with the symbol integral for `N = 0..=n_max`.
pub fn moment_test(
    f: &MatrixSymbol,
    g: &MatrixSymbol,
    n: &MultiIndex,
    n_max: usize,
    quad_grid: usize,
) -> Result<MomentReport> {
    if n_max > MAX_MOMENT {
        return Err(Error::invalid(format!("moment order {n_max} exceeds {MAX_MOMENT}")));
    }
    if quad_grid == 0 {
        return Err(Error::invalid("quadrature grid must be positive"));
    }
    let traces = trace_moments(f, g, n, n_max)?;
    let (integrals, skipped) = symbol_moments(f, g, quad_grid, n_max)?;
    let rows = (0..=n_max)
        .map(|p| MomentRow {
            power: p,
            trace_mean: traces[p],
            integral: integrals[p],
            gap: if p == 0 { 0.0 } else { (traces[p] - integrals[p]).norm() },
        })
        .collect();
    Ok(MomentReport {
        n: n.clone(),
        n_max,
        rows,
        skipped,
    })
}

fn trace_moments(f: &MatrixSymbol, g: &MatrixSymbol, n: &MultiIndex, n_max: usize) -> Result<Vec<Complex64>> {
    let pre = factor_preconditioner(g, n)?;
    let d = pre.order();
    let mut out = vec![Complex64::new(1.0, 0.0); n_max + 1];
    if n_max == 0 {
        return Ok(out);
    }
    if d <= DENSE_TRACE_ORDER {
        let tf = build_dense(f, n, None)?.into_dense()?;
        let a = pre.apply_matrix(&tf)?;
        let mut power = a.clone();
        for slot in out.iter_mut().skip(1) {
            *slot = power.trace() / d as f64;
            power = a.matmul(&power)?;
        }
        return Ok(out);
    }
    // column by column: e_iᵀ A^N e_i
    let tf = build_embedded(f, n, None)?;
    let diag: Vec<Vec<Complex64>> = (0..d)
        .into_par_iter()
        .map(|i| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[i] = Complex64::new(1.0, 0.0);
            let mut row = Vec::with_capacity(n_max);
            for _ in 0..n_max {
                v = tf.matvec(&v)?;
                pre.apply_in_place(&mut v)?;
                row.push(v[i]);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    for (p, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = diag.iter().map(|r| r[p - 1]).sum::<Complex64>() / d as f64;
    }
    Ok(out)
}

fn symbol_moments(f: &MatrixSymbol, g: &MatrixSymbol, grid: usize, n_max: usize) -> Result<(Vec<Complex64>, usize)> {
    let s = f.s() as f64;
    let points = grid_points(&vec![grid; f.k()], QUADRATURE_OFFSET)?;
    let per_point: Vec<Option<Vec<Complex64>>> = points
        .par_iter()
        .map(|x| {
            let (Some(fx), Some(gx)) = (f.evaluate_skipping(x)?, g.evaluate_skipping(x)?) else {
                return Ok(None);
            };
            let Some(gi) = small_inverse(&gx) else { return Ok(None) };
            let h = gi.matmul(&fx)?;
            let mut power = ComplexMatrix::identity(h.rows());
            let mut traces = Vec::with_capacity(n_max + 1);
            for _ in 0..=n_max {
                traces.push(power.trace() / s);
                power = power.matmul(&h)?;
            }
            Ok(Some(traces))
        })
        .collect::<Result<_>>()?;
    let valid: Vec<&Vec<Complex64>> = per_point.iter().flatten().collect();
    if valid.is_empty() {
        return Err(Error::invalid("no quadrature node where g is invertible"));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for t in &valid {
        for (o, v) in out.iter_mut().zip(t.iter()) {
            *o += v;
        }
    }
    for o in out.iter_mut() {
        *o /= valid.len() as f64;
    }
    out[0] = Complex64::new(1.0, 0.0);
    Ok((out, per_point.len() - valid.len()))
}

/// Width of the smoothed step test functions.
pub const STEP_WIDTH: f64 = 0.05;

/// Test functions for [`distribution_functional`], parsed from ids:
/// `one`, `pow:N`, `re-step:t`, `im-step:t`, `bump:re,im,radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    One,
    Power(u32),
    /// `½(1 + tanh((Re λ − t)/w))`.
    ReStep(f64),
    ImStep(f64),
    /// `exp(1 − 1/(1 − |λ−c|²/ρ²))` inside the disk, zero outside.
    Bump { center: Complex64, radius: f64 },
}

impl TestFunction {
    pub fn parse(id: &str) -> Result<Self> {
        let (name, arg) = id.split_once(':').unwrap_or((id, ""));
        let nums = || -> Result<Vec<f64>> {
            arg.split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::invalid(format!("bad arguments in test function '{id}'")))
        };
        let f = match name {
            "one" if arg.is_empty() => TestFunction::One,
            "pow" => {
                let p: u32 = arg.parse().map_err(|_| Error::invalid(format!("bad power in '{id}'")))?;
                if p as usize > MAX_MOMENT {
                    return Err(Error::invalid(format!("power {p} exceeds {MAX_MOMENT}")));
                }
                TestFunction::Power(p)
            }
            "re-step" | "im-step" => {
                let v = nums()?;
                if v.len() != 1 {
                    return Err(Error::invalid(format!("'{id}' takes one threshold")));
                }
                if name == "re-step" {
                    TestFunction::ReStep(v[0])
                } else {
                    TestFunction::ImStep(v[0])
                }
            }
            "bump" => {
                let v = nums()?;
                if v.len() != 3 || v[2] <= 0.0 {
                    return Err(Error::invalid(format!("'{id}' needs re,im,radius with radius > 0")));
                }
                TestFunction::Bump {
                    center: Complex64::new(v[0], v[1]),
                    radius: v[2],
                }
            }
            _ => return Err(Error::invalid(format!("unknown test function '{id}'"))),
        };
        Ok(f)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let real = |v: f64| Complex64::new(v, 0.0);
        match *self {
            TestFunction::One => real(1.0),
            TestFunction::Power(p) => z.powu(p),
            TestFunction::ReStep(t) => real(0.5 * (1.0 + ((z.re - t) / STEP_WIDTH).tanh())),
            TestFunction::ImStep(t) => real(0.5 * (1.0 + ((z.im - t) / STEP_WIDTH).tanh())),
            TestFunction::Bump { center, radius } => {
                let q = (z - center).norm_sqr() / (radius * radius);
                real(if q < 1.0 { (1.0 - 1.0 / (1.0 - q)).exp() } else { 0.0 })
            }
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::One => write!(f, "one"),
            TestFunction::Power(p) => write!(f, "pow:{p}"),
            TestFunction::ReStep(t) => write!(f, "re-step:{t}"),
            TestFunction::ImStep(t) => write!(f, "im-step:{t}"),
            TestFunction::Bump { center, radius } => write!(f, "bump:{},{},{radius}", center.re, center.im),
        }
    }
}

/// `(1/d) Σ_j F(λ_j)`.
pub fn distribution_functional(eigs: &[Complex64], f: &TestFunction) -> Result<Complex64> {
    if eigs.is_empty() {
        return Err(Error::invalid("no eigenvalues"));
    }
    Ok(eigs.iter().map(|&z| f.eval(z)).sum::<Complex64>() / eigs.len() as f64)
}

/// Outliers of `T_n(f)` around `ER(f)` and of `T_n⁻¹(g)T_n(f)` around `ER(g⁻¹f)`.
#[derive(Debug, Clone, Serialize)]
pub struct OutlierReport {
    pub n: MultiIndex,
    pub eps: f64,
    pub grid: usize,
    pub unpreconditioned: usize,
    pub preconditioned: usize,
    /// `√n̂`, the scale the counts are compared against.
    pub sqrt_n_hat: f64,
}

impl OutlierReport {
    pub fn ratio(&self, count: usize) -> f64 {
        count as f64 / self.sqrt_n_hat
    }
}

/// Dense eigenvalues of both matrices, counted against range clouds sampled
/// with `grid` points per dimension.
pub fn outlier_pair(f: &MatrixSymbol, g: &MatrixSymbol, n: &MultiIndex, eps: f64, grid: usize) -> Result<OutlierReport> {
    let h = g.inverse()?.mul(f)?;
    let er_f = essential_range(f, grid)?;
    let er_h = essential_range(&h, grid)?;
    let tf = build_dense(f, n, None)?.into_dense()?;
    let pre = factor_preconditioner(g, n)?.apply_matrix(&tf)?;
    let plain = eig_dense(&tf, false)?.eigenvalues;
    let precond = eig_dense(&pre, false)?.eigenvalues;
    Ok(OutlierReport {
        n: n.clone(),
        eps,
        grid,
        unpreconditioned: outlier_count(&plain, &er_f.points, eps)?,
        preconditioned: outlier_count(&precond, &er_h.points, eps)?,
        sqrt_n_hat: (n.product() as f64).sqrt(),
    })
}
