//! Spectral analysis of symbols and Toeplitz matrices: essential (numerical)
//! ranges, sectoriality, localization regions, outliers and moment tests.

mod cluster;
mod range;
mod region;
mod sector;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::matrix::ComplexMatrix;
use crate::symbol::{grid_points, MatrixSymbol};

pub use cluster::{
    distribution_functional, moment_test, outlier_count, outlier_pair, MomentReport, MomentRow, OutlierReport, TestFunction,
};
pub use range::{essential_numerical_range, essential_range, write_cloud_csv, EnrResult, Provenance, RangeCloud, RangeSource};
pub use region::{area_of_compact, localization_region, Rect, RegionMask};
pub use sector::{sectoriality, SectorClass, SectorReport};

/// Smallest grid (points per dimension) accepted for range sampling.
pub const MIN_RANGE_GRID: usize = 64;
/// Smallest number of angles accepted for support-function sampling.
pub const MIN_ANGLES: usize = 90;

/// Symbol values on the uniform grid with offset 0 (so `x = 0` and `x = -π`
/// are nodes); declared singular points and non-finite values are skipped.
#[derive(Debug, Clone)]
pub(crate) struct Samples {
    pub s: usize,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<ComplexMatrix>,
    pub skipped: usize,
}

pub(crate) fn check_grid(grid: usize) -> Result<()> {
    if grid < MIN_RANGE_GRID {
        return Err(Error::invalid(format!("grid {grid} is below the minimum {MIN_RANGE_GRID} points per dimension")));
    }
    Ok(())
}

pub(crate) fn check_angles(angle_count: usize) -> Result<()> {
    if angle_count < MIN_ANGLES {
        return Err(Error::invalid(format!("angle count {angle_count} is below the minimum {MIN_ANGLES}")));
    }
    Ok(())
}

pub(crate) fn sample(sym: &MatrixSymbol, grid: usize) -> Result<Samples> {
    let points = grid_points(&vec![grid; sym.k()], 0.0)?;
    let values: Vec<Option<ComplexMatrix>> = points
        .par_iter()
        .map(|x| match sym.evaluate_skipping(x) {
            Ok(v) => Ok(v),
            Err(Error::SingularSymbol { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut out = Samples {
        s: sym.s(),
        points: Vec::with_capacity(points.len()),
        values: Vec::with_capacity(points.len()),
        skipped: 0,
    };
    for (x, v) in points.into_iter().zip(values) {
        match v {
            Some(m) => {
                out.points.push(x);
                out.values.push(m);
            }
            None => out.skipped += 1,
        }
    }
    if out.values.is_empty() {
        return Err(Error::invalid(format!("symbol '{}' has no finite samples on the grid", sym.name())));
    }
    Ok(out)
}

/// `e^{-iθ}` for `count` equally spaced angles `θ_k = 2πk/count − π`.
pub(crate) fn angle(k: usize, count: usize) -> f64 {
    -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / count as f64
}

pub(crate) fn rot(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, -theta)
}
