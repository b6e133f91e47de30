//! Fourier coefficients `ĉ_j = (2π)^{-k} ∫ f(x) e^{-i⟨j,x⟩} dx`.
//!
//! Trigonometric polynomials read their table. General symbols use the
//! rectangle rule on a uniform grid shifted by half a step
//! (`x_t = -π + 2π(t + ½)/N`), so no node lands on `±π` or on isolated
//! singular points at "round" abscissae.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{box_iter, MatrixSymbol, MultiIndex, SymbolKind};
use crate::error::{Error, Result};
use crate::numerics::fft::{Direction, MultiFft};
use crate::numerics::matrix::ComplexMatrix;

/// Half-step offset of the quadrature grid for general symbols.
pub const QUADRATURE_OFFSET: f64 = 0.5;

/// Coefficients `ĉ_j` for `j` in the box `-J..=J`.
#[derive(Debug, Clone)]
pub struct FourierTable {
    pub k: usize,
    pub s: usize,
    pub radius: Vec<usize>,
    /// Sample counts per dimension (empty when read from an exact table).
    pub grid: Vec<usize>,
    /// Largest coefficient norm in the upper half of the resolved band; zero for exact tables.
    pub aliasing_estimate: f64,
    coeffs: Vec<ComplexMatrix>,
}

impl FourierTable {
    /// Coefficient at `j`; zero outside the box.
    pub fn get(&self, j: &[i64]) -> ComplexMatrix {
        match self.position(j) {
            Some(p) => self.coeffs[p].clone(),
            None => ComplexMatrix::zeros(self.s, self.s),
        }
    }

    pub fn get_ref(&self, j: &[i64]) -> Option<&ComplexMatrix> {
        self.position(j).map(|p| &self.coeffs[p])
    }

    fn position(&self, j: &[i64]) -> Option<usize> {
        if j.len() != self.k {
            return None;
        }
        let mut idx = 0usize;
        for (d, &v) in j.iter().enumerate() {
            let r = self.radius[d] as i64;
            if v.abs() > r {
                return None;
            }
            idx = idx * (2 * r as usize + 1) + (v + r) as usize;
        }
        Some(idx)
    }

    /// Hermitian-symmetry defect `max_j ‖ĉ_{-j} − ĉ_j*‖`.
    pub fn hermitian_defect(&self) -> f64 {
        let lo: Vec<i64> = self.radius.iter().map(|&r| -(r as i64)).collect();
        let hi: Vec<i64> = self.radius.iter().map(|&r| r as i64).collect();
        box_iter(&lo, &hi)
            .map(|j| {
                let neg: Vec<i64> = j.iter().map(|v| -v).collect();
                self.get(&neg).max_abs_diff(&self.get(&j).adjoint())
            })
            .fold(0.0, f64::max)
    }
}

fn check_grid(k: usize, radius: &[usize], grid: &[usize]) -> Result<()> {
    if grid.len() != k || radius.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: grid.len(),
        });
    }
    for (d, (&r, &n)) in radius.iter().zip(grid).enumerate() {
        if n < 2 * r + 2 {
            return Err(Error::invalid(format!(
                "grid size {n} along axis {d} is below the anti-aliasing floor {} for |j| = {r}",
                2 * r + 2
            )));
        }
    }
    Ok(())
}

/// Single coefficient `ĉ_j`.
pub fn fourier_coefficient(sym: &MatrixSymbol, j: &MultiIndex, grid: &[usize]) -> Result<ComplexMatrix> {
    let radius: Vec<usize> = j.as_slice().iter().map(|v| v.unsigned_abs() as usize).collect();
    check_grid(sym.k(), &radius, grid)?;
    match sym.kind() {
        SymbolKind::Trig(t) => Ok(t.get(j).cloned().unwrap_or_else(|| ComplexMatrix::zeros(sym.s(), sym.s()))),
        SymbolKind::General(_) => Ok(fourier_table(sym, &radius, grid)?.get(j.as_slice())),
    }
}

/// All coefficients with `|j_i| ≤ radius_i`.
pub fn fourier_table(sym: &MatrixSymbol, radius: &[usize], grid: &[usize]) -> Result<FourierTable> {
    let (k, s) = (sym.k(), sym.s());
    check_grid(k, radius, grid)?;
    let lo: Vec<i64> = radius.iter().map(|&r| -(r as i64)).collect();
    let hi: Vec<i64> = radius.iter().map(|&r| r as i64).collect();

    if let SymbolKind::Trig(t) = sym.kind() {
        let coeffs = box_iter(&lo, &hi)
            .map(|j| {
                t.get(&MultiIndex::from(j.as_slice()))
                    .cloned()
                    .unwrap_or_else(|| ComplexMatrix::zeros(s, s))
            })
            .collect();
        return Ok(FourierTable {
            k,
            s,
            radius: radius.to_vec(),
            grid: Vec::new(),
            aliasing_estimate: 0.0,
            coeffs,
        });
    }

    let samples = sym.sample_grid(grid, QUADRATURE_OFFSET)?;
    let total = samples.len();
    let plan = MultiFft::new(grid)?;
    // one transform per matrix entry
    let mut spectra: Vec<Vec<Complex64>> = Vec::with_capacity(s * s);
    for e in 0..s * s {
        let mut data: Vec<Complex64> = samples
            .iter()
            .map(|m| m.as_ref().map_or(Complex64::new(0.0, 0.0), |m| m.as_slice()[e]))
            .collect();
        plan.process(&mut data, Direction::Forward)?;
        spectra.push(data);
    }
    let strides = super::strides(grid);
    let bin_of = |j: &[i64]| -> usize {
        j.iter()
            .zip(grid)
            .zip(&strides)
            .map(|((&v, &n), &st)| (v.rem_euclid(n as i64) as usize) * st)
            .sum()
    };
    // x_t = -π + h(t + δ) contributes e^{-i j (-π + hδ)} per axis
    let phase = |j: &[i64]| -> Complex64 {
        let angle: f64 = j
            .iter()
            .zip(grid)
            .map(|(&v, &n)| v as f64 * (PI - 2.0 * PI * QUADRATURE_OFFSET / n as f64))
            .sum();
        Complex64::from_polar(1.0 / total as f64, angle)
    };
    let coefficient_at = |j: &[i64]| -> ComplexMatrix {
        let bin = bin_of(j);
        let ph = phase(j);
        ComplexMatrix::from_fn(s, s, |a, b| spectra[a * s + b][bin] * ph)
    };
    let coeffs = box_iter(&lo, &hi).map(|j| coefficient_at(&j)).collect();

    // tail of the resolved band: frequencies with some |q_d| ≥ N_d/4
    let band_lo: Vec<i64> = grid.iter().map(|&n| -((n as i64 - 1) / 2)).collect();
    let band_hi: Vec<i64> = grid.iter().map(|&n| n as i64 / 2).collect();
    let aliasing_estimate = box_iter(&band_lo, &band_hi)
        .filter(|q| q.iter().zip(grid).any(|(&v, &n)| 4 * v.unsigned_abs() as usize >= n))
        .map(|q| coefficient_at(&q).frobenius_norm())
        .fold(0.0, f64::max);

    Ok(FourierTable {
        k,
        s,
        radius: radius.to_vec(),
        grid: grid.to_vec(),
        aliasing_estimate,
        coeffs,
    })
}
