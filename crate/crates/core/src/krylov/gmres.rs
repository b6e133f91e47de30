//! Full (non-restarted) GMRES with left preconditioning.
//!
//! Arnoldi uses modified Gram–Schmidt with one reorthogonalization pass; the
//! Hessenberg least-squares problem is updated with complex Givens rotations,
//! so the residual estimate is available every iteration without forming `x`.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::matrix::{dot, vec_norm, ZERO};
use crate::toeplitz::PrecondFactor;

/// Arnoldi vectors shorter than this, relative to `‖M⁻¹A v_j‖`, count as a breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmresOptions {
    pub tol: f64,
    /// Defaults to the system order.
    pub max_iter: Option<usize>,
    /// Stop on `‖b − Ax‖/‖b‖` instead of the preconditioned residual.
    pub true_residual: bool,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: crate::config::Config::DEFAULT.gmres_tol,
            max_iter: None,
            true_residual: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GmresOutcome {
    pub iterations: usize,
    /// Relative residual after each iteration, in the stopping norm.
    pub history: Vec<f64>,
    pub converged: bool,
    /// Relative residual of the returned solution, recomputed explicitly.
    pub final_residual: f64,
    pub wall_time: f64,
    #[serde(skip)]
    pub solution: Vec<Complex64>,
}

struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    /// Rotation taking `(a, b)` to `(ρ, 0)`.
    fn new(a: Complex64, b: Complex64) -> (Self, Complex64) {
        let (na, nb) = (a.norm(), b.norm());
        if nb == 0.0 {
            return (Givens { c: 1.0, s: ZERO }, a);
        }
        if na == 0.0 {
            return (Givens { c: 0.0, s: b.conj() / nb }, Complex64::new(nb, 0.0));
        }
        let r = na.hypot(nb);
        let phase = a / na;
        (
            Givens {
                c: na / r,
                s: phase * b.conj() / r,
            },
            phase * r,
        )
    }

    fn apply(&self, a: &mut Complex64, b: &mut Complex64) {
        let (x, y) = (*a, *b);
        *a = self.c * x + self.s * y;
        *b = -self.s.conj() * x + self.c * y;
    }
}

/// Solves `A x = b` from `x₀ = 0`. `apply_a` computes `A v`; with `precond`
/// the iteration runs on `M⁻¹A x = M⁻¹b`.
pub fn gmres(
    apply_a: &dyn Fn(&[Complex64]) -> Result<Vec<Complex64>>,
    b: &[Complex64],
    opts: &GmresOptions,
    precond: Option<&PrecondFactor>,
) -> Result<GmresOutcome> {
    let start = Instant::now();
    let d = b.len();
    if let Some(p) = precond {
        if p.order() != d {
            return Err(Error::DimensionMismatch {
                expected: p.order(),
                actual: d,
            });
        }
    }
    let max_iter = opts.max_iter.unwrap_or(d);
    if max_iter == 0 || max_iter > d {
        return Err(Error::invalid(format!("max_iter must be in 1..={d}, got {max_iter}")));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let b_norm = vec_norm(b);
    if b_norm == 0.0 {
        return Err(Error::invalid("right-hand side is zero"));
    }
    let op = |v: &[Complex64]| -> Result<Vec<Complex64>> {
        let mut w = apply_a(v)?;
        if w.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: w.len(),
            });
        }
        if let Some(p) = precond {
            p.apply_in_place(&mut w)?;
        }
        Ok(w)
    };
    let mut r0 = b.to_vec();
    if let Some(p) = precond {
        p.apply_in_place(&mut r0)?;
    }
    let beta = vec_norm(&r0);
    let residual_of = |x: &[Complex64]| -> Result<f64> {
        let ax = apply_a(x)?;
        let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        if opts.true_residual {
            return Ok(vec_norm(&r) / b_norm);
        }
        if let Some(p) = precond {
            p.apply_in_place(&mut r)?;
        }
        Ok(vec_norm(&r) / beta)
    };

    let mut basis: Vec<Vec<Complex64>> = vec![r0.iter().map(|z| z / beta).collect()];
    // column j of the rotated Hessenberg matrix, upper triangle only
    let mut r_cols: Vec<Vec<Complex64>> = Vec::new();
    let mut rotations: Vec<Givens> = Vec::new();
    let mut rhs = vec![Complex64::new(beta, 0.0)];
    let mut history = Vec::new();
    let mut converged = false;

    for j in 0..max_iter {
        let mut w = op(&basis[j])?;
        let w_norm = vec_norm(&w);
        let mut h = vec![ZERO; j + 2];
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i] += c;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= c * vk;
                }
            }
        }
        let h_next = vec_norm(&w);
        h[j + 1] = Complex64::new(h_next, 0.0);
        for (i, g) in rotations.iter().enumerate() {
            let (mut a, mut c) = (h[i], h[i + 1]);
            g.apply(&mut a, &mut c);
            h[i] = a;
            h[i + 1] = c;
        }
        let (g, rho) = Givens::new(h[j], h[j + 1]);
        h[j] = rho;
        h.truncate(j + 1);
        let mut top = rhs[j];
        let mut bottom = ZERO;
        g.apply(&mut top, &mut bottom);
        rhs[j] = top;
        rhs.push(bottom);
        rotations.push(g);
        r_cols.push(h);

        if rho.norm() <= BREAKDOWN_TOL * w_norm.max(beta) {
            // M⁻¹A maps the Krylov space onto a smaller one; the estimate is void
            return Err(Error::Stagnation { iterations: j + 1 });
        }
        let estimate = bottom.norm() / beta;
        let relres = if opts.true_residual {
            residual_of(&assemble(&basis, &r_cols, &rhs[..=j]))?
        } else {
            estimate
        };
        history.push(relres);
        if relres <= opts.tol {
            converged = true;
            break;
        }
        if h_next <= BREAKDOWN_TOL * w_norm {
            // lucky breakdown: the Krylov space is invariant and R is
            // nonsingular, so the iterate is exact up to rounding
            converged = true;
            break;
        }
        basis.push(w.iter().map(|z| z / h_next).collect());
    }

    let k = history.len();
    let solution = assemble(&basis, &r_cols, &rhs[..k]);
    let final_residual = residual_of(&solution)?;
    Ok(GmresOutcome {
        iterations: k,
        history,
        converged,
        final_residual,
        wall_time: start.elapsed().as_secs_f64(),
        solution,
    })
}

/// `x = V y` with `R y = g` solved by back substitution.
fn assemble(basis: &[Vec<Complex64>], r_cols: &[Vec<Complex64>], g: &[Complex64]) -> Vec<Complex64> {
    let k = g.len();
    let mut y = vec![ZERO; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for (j, yj) in y.iter().enumerate().take(k).skip(i + 1) {
            acc -= r_cols[j][i] * yj;
        }
        y[i] = acc / r_cols[i][i];
    }
    let d = basis[0].len();
    let mut x = vec![ZERO; d];
    for (v, &c) in basis.iter().zip(&y) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += c * vi;
        }
    }
    x
}
