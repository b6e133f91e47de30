//! Support function `m(θ) = min_x λ_min(H(e^{-iθ} f(x)))` of the convex hull
//! of the essential numerical range, and the sectoriality classification
//! derived from it. `d = max(0, max_θ m(θ))` is the distance of the hull
//! from the origin.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{angle, check_angles, check_grid, rot, sample, Samples};
use crate::config::Config;
use crate::error::Result;
use crate::numerics::hermitian::min_eig_rotated_hermitian_part;
use crate::numerics::matrix::ComplexMatrix;
use crate::symbol::MatrixSymbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorClass {
    Sectorial,
    WeaklySectorial,
    NotWeaklySectorial,
}

impl fmt::Display for SectorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectorClass::Sectorial => "sectorial",
            SectorClass::WeaklySectorial => "weakly-sectorial",
            SectorClass::NotWeaklySectorial => "not-weakly-sectorial",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub classification: SectorClass,
    /// Distance of the hull of the essential numerical range from zero.
    pub d: f64,
    /// `max_θ m(θ)`, possibly negative.
    pub max_support: f64,
    /// Maximizing angle in `(-π, π]`.
    pub theta: f64,
    /// Variance over the grid of the support values at `theta`.
    pub witness_variance: f64,
    /// True when the support values at `theta` are not constant; for a weakly
    /// sectorial symbol this is the nondegeneracy of the separating line.
    pub nondegenerate: bool,
    pub samples: usize,
    pub skipped: usize,
}

impl SectorReport {
    pub fn is_sectorial(&self) -> bool {
        self.classification == SectorClass::Sectorial
    }
}

/// Smallest eigenvalue of `H(rot·M)` for a row-major `s×s` block.
#[inline]
pub(crate) fn min_eig_flat(m: &[Complex64], s: usize, rot: Complex64) -> f64 {
    match s {
        1 => (rot * m[0]).re,
        2 => {
            let a = (rot * m[0]).re;
            let d = (rot * m[3]).re;
            let b = 0.5 * (rot * m[1] + (rot * m[2]).conj());
            0.5 * (a + d) - (0.5 * (a - d)).hypot(b.norm())
        }
        _ => {
            let mat = ComplexMatrix::from_vec(s, s, m.to_vec()).expect("square block");
            min_eig_rotated_hermitian_part(&mat, rot)
        }
    }
}

/// Flattened samples, scanned angle by angle.
pub(crate) struct SupportScan {
    pub s: usize,
    pub blocks: Vec<Complex64>,
}

impl SupportScan {
    pub fn new(samples: &Samples) -> Self {
        SupportScan {
            s: samples.s,
            blocks: samples.values.iter().flat_map(|m| m.as_slice().iter().copied()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len() / (self.s * self.s)
    }

    #[inline]
    pub fn value(&self, x: usize, rot: Complex64) -> f64 {
        let ss = self.s * self.s;
        min_eig_flat(&self.blocks[x * ss..(x + 1) * ss], self.s, rot)
    }

    /// `(m(θ), argmin x)`.
    pub fn support(&self, theta: f64) -> (f64, usize) {
        let r = rot(theta);
        (0..self.len())
            .map(|x| (self.value(x, r), x))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// First sample whose support value is `≤ threshold`, if any.
    pub fn first_below(&self, theta: f64, threshold: f64, start: usize) -> Option<usize> {
        let r = rot(theta);
        let n = self.len();
        (0..n).map(|t| (start + t) % n).find(|&x| self.value(x, r) <= threshold)
    }

    /// Maximizes `m(θ)` over `count` angles, then refines by golden section
    /// between the neighbors of the best angle.
    pub fn maximize(&self, count: usize) -> (f64, f64) {
        let values: Vec<f64> = (0..count).into_par_iter().map(|k| self.support(angle(k, count)).0).collect();
        let best = (0..count).fold(0, |b, k| if values[k] > values[b] { k } else { b });
        let step = 2.0 * PI / count as f64;
        let center = angle(best, count);
        let (mut lo, mut hi) = (center - step, center + step);
        let f = |t: f64| self.support(t).0;
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut fa, mut fb) = (f(a), f(b));
        for _ in 0..60 {
            if hi - lo < 1e-12 {
                break;
            }
            if fa > fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - g * (hi - lo);
                fa = f(a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = f(b);
            }
        }
        let (mut theta, mut m) = if fa > fb { (a, fa) } else { (b, fb) };
        if values[best] >= m {
            theta = center;
            m = values[best];
        }
        (wrap_angle(theta), m)
    }

    /// Discrete-angle version of "max_θ m(θ) > tol", with warm starts: the
    /// angle that certified the previous query is tried first, and the sample
    /// that refuted the previous angle is checked first.
    pub fn exceeds(&self, rots: &[(f64, Complex64)], tol: f64, hint: &mut usize, witness: &mut usize) -> bool {
        let count = rots.len();
        for step in 0..count {
            let offset = step.div_ceil(2);
            let k = if step % 2 == 1 { (*hint + offset) % count } else { (*hint + count - offset) % count };
            let r = rots[k].1;
            if *witness < self.len() && self.value(*witness, r) <= tol {
                continue;
            }
            match self.first_below(rots[k].0, tol, *witness) {
                Some(x) => *witness = x,
                None => {
                    *hint = k;
                    return true;
                }
            }
        }
        false
    }
}

pub(crate) fn wrap_angle(t: f64) -> f64 {
    let mut t = t.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

pub(crate) fn classify(scan: &SupportScan, angle_count: usize, samples: usize, skipped: usize) -> SectorReport {
    let cfg = Config::DEFAULT;
    let (theta, max_support) = scan.maximize(angle_count);
    let r = rot(theta);
    let vals: Vec<f64> = (0..scan.len()).map(|x| scan.value(x, r)).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let witness_variance = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
    let classification = if max_support > cfg.sector_tol {
        SectorClass::Sectorial
    } else if max_support >= -cfg.sector_tol {
        SectorClass::WeaklySectorial
    } else {
        SectorClass::NotWeaklySectorial
    };
    SectorReport {
        classification,
        d: max_support.max(0.0),
        max_support,
        theta,
        witness_variance,
        nondegenerate: witness_variance > cfg.sector_variance_tol,
        samples,
        skipped,
    }
}

/// Classifies `sym` from `grid` points per dimension and `angle_count` angles.
pub fn sectoriality(sym: &MatrixSymbol, grid: usize, angle_count: usize) -> Result<SectorReport> {
    check_grid(grid)?;
    check_angles(angle_count)?;
    let samples = sample(sym, grid)?;
    let scan = SupportScan::new(&samples);
    Ok(classify(&scan, angle_count, samples.values.len(), samples.skipped))
}
