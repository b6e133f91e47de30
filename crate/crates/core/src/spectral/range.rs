//! Point clouds sampling the essential range (eigenvalues of `f(x)`) and the
//! boundary of the hull of the essential numerical range.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::sector::{classify, SupportScan};
use super::{angle, check_angles, check_grid, rot, sample, SectorReport};
use crate::error::Result;
use crate::numerics::eig::eig_dense;
use crate::numerics::hermitian::min_eigvec_rotated_hermitian_part;
use crate::numerics::matrix::dot;
use crate::symbol::MatrixSymbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RangeSource {
    #[serde(rename = "ER")]
    Er,
    #[serde(rename = "ENR")]
    Enr,
}

impl RangeSource {
    pub fn label(self) -> &'static str {
        match self {
            RangeSource::Er => "ER",
            RangeSource::Enr => "ENR",
        }
    }
}

/// Where a cloud point came from: the sample `x` and the eigenvalue index
/// (ER) or angle index (ENR).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub x: Vec<f64>,
    pub index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RangeCloud {
    pub source: RangeSource,
    pub grid: usize,
    pub points: Vec<Complex64>,
    pub provenance: Vec<Provenance>,
    /// Samples dropped at singular points or after eigensolver failures.
    pub skipped: usize,
}

impl RangeCloud {
    pub fn from_points(source: RangeSource, points: Vec<Complex64>) -> Self {
        let provenance = (0..points.len()).map(|i| Provenance { x: Vec::new(), index: i }).collect();
        RangeCloud {
            source,
            grid: 0,
            points,
            provenance,
            skipped: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Eigenvalues of `f(x)` over the grid (offset 0, `grid` points per dimension).
pub fn essential_range(sym: &MatrixSymbol, grid: usize) -> Result<RangeCloud> {
    check_grid(grid)?;
    let samples = sample(sym, grid)?;
    let per_sample: Vec<Option<Vec<Complex64>>> = samples
        .values
        .par_iter()
        .map(|m| eig_dense(m, false).ok().map(|e| e.eigenvalues))
        .collect();
    let mut cloud = RangeCloud {
        source: RangeSource::Er,
        grid,
        points: Vec::new(),
        provenance: Vec::new(),
        skipped: samples.skipped,
    };
    for (x, eigs) in samples.points.iter().zip(per_sample) {
        match eigs {
            Some(eigs) => {
                for (i, z) in eigs.into_iter().enumerate() {
                    cloud.points.push(z);
                    cloud.provenance.push(Provenance { x: x.clone(), index: i });
                }
            }
            None => cloud.skipped += 1,
        }
    }
    Ok(cloud)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnrResult {
    pub cloud: RangeCloud,
    /// `(θ, m(θ))` per sampled angle.
    pub support: Vec<(f64, f64)>,
    pub sector: SectorReport,
}

/// Support points `v*f(x)v` of the hull of the essential numerical range,
/// one per angle, where `x` minimizes `λ_min(H(e^{-iθ}f(x)))` and `v` is the
/// corresponding unit eigenvector.
pub fn essential_numerical_range(sym: &MatrixSymbol, grid: usize, angle_count: usize) -> Result<EnrResult> {
    check_grid(grid)?;
    check_angles(angle_count)?;
    let samples = sample(sym, grid)?;
    let scan = SupportScan::new(&samples);
    let per_angle: Vec<(f64, f64, usize, Complex64)> = (0..angle_count)
        .into_par_iter()
        .map(|k| {
            let theta = angle(k, angle_count);
            let (m, x) = scan.support(theta);
            let f = &samples.values[x];
            let v = min_eigvec_rotated_hermitian_part(f, rot(theta));
            let fv = f.mul_vec(&v).expect("square block");
            (theta, m, x, dot(&v, &fv))
        })
        .collect();
    let mut cloud = RangeCloud {
        source: RangeSource::Enr,
        grid,
        points: Vec::with_capacity(angle_count),
        provenance: Vec::with_capacity(angle_count),
        skipped: samples.skipped,
    };
    for (k, &(_, _, x, z)) in per_angle.iter().enumerate() {
        cloud.points.push(z);
        cloud.provenance.push(Provenance {
            x: samples.points[x].clone(),
            index: k,
        });
    }
    let sector = classify(&scan, angle_count, samples.values.len(), samples.skipped);
    Ok(EnrResult {
        cloud,
        support: per_angle.iter().map(|&(t, m, _, _)| (t, m)).collect(),
        sector,
    })
}

/// Writes `re,im,source` lines with a header.
pub fn write_cloud_csv(cloud: &RangeCloud, mut out: impl Write) -> Result<()> {
    writeln!(out, "re,im,source")?;
    for z in &cloud.points {
        writeln!(out, "{:e},{:e},{}", z.re, z.im, cloud.source.label())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::ComplexMatrix;
    use crate::symbol::{catalog, CaseId};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_diagonal() {
        let sym = MatrixSymbol::constant(ComplexMatrix::from_diag(&[c(1.0, 2.0), c(-3.0, 0.0)]), 1).unwrap();
        let cloud = essential_range(&sym, 64).unwrap();
        assert_eq!(cloud.len(), 128);
        assert!(cloud.points.iter().all(|z| (z - c(1.0, 2.0)).norm() < 1e-12 || (z - c(-3.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn case_one_ratio_segment() {
        // h = g⁻¹f has eigenvalues 2 + i + cos x and 1
        let (f, g) = catalog(CaseId::One, Some(2.0)).unwrap();
        let h = g.inverse().unwrap().mul(&f).unwrap();
        let cloud = essential_range(&h, 256).unwrap();
        for z in &cloud.points {
            let on_segment = (z.im - 1.0).abs() < 1e-8 && z.re > 1.0 - 1e-8 && z.re < 3.0 + 1e-8;
            assert!(on_segment || (z - c(1.0, 0.0)).norm() < 1e-8, "{z}");
        }
    }

    #[test]
    fn case_five_two_pieces() {
        let (f, _) = catalog(CaseId::Five, None).unwrap();
        let cloud = essential_range(&f, 64).unwrap();
        for z in &cloud.points {
            let seg = (z.im - 3.0).abs() < 1e-8 && z.re.abs() <= 2.0 + 1e-8;
            let disk = (z - c(10.0, 0.0)).norm() <= 4.0 + 1e-8;
            assert!(seg || disk, "{z}");
        }
    }

    #[test]
    fn scalar_enr_is_er() {
        // s = 1: both clouds lie on the circle 1 + e^{ix}
        let sym = MatrixSymbol::trig(
            1,
            1,
            [
                (crate::symbol::MultiIndex::new(vec![0]).unwrap(), ComplexMatrix::scalar(c(1.0, 0.0))),
                (crate::symbol::MultiIndex::new(vec![1]).unwrap(), ComplexMatrix::scalar(c(1.0, 0.0))),
            ],
        )
        .unwrap();
        let enr = essential_numerical_range(&sym, 512, 360).unwrap();
        assert!(enr.cloud.points.iter().all(|z| ((z - c(1.0, 0.0)).norm() - 1.0).abs() < 1e-10));
    }

    #[test]
    fn hermitian_enr_is_real_interval() {
        let (_, g) = catalog(CaseId::Six, None).unwrap();
        let h = g.add(&g.adjoint().unwrap()).unwrap();
        let enr = essential_numerical_range(&h, 64, 180).unwrap();
        assert!(enr.cloud.points.iter().all(|z| z.im.abs() < 1e-10));
        let er = essential_range(&h, 64).unwrap();
        let lo = er.points.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let hi = er.points.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let elo = enr.cloud.points.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let ehi = enr.cloud.points.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!((lo - elo).abs() < 1e-10 && (hi - ehi).abs() < 1e-10);
    }

    #[test]
    fn case_one_support_matches_disk() {
        // g₁ with r = 1: hull of {1} ∪ circle(5, 1), support at θ = 0 is 1
        let (_, g) = catalog(CaseId::One, Some(1.0)).unwrap();
        let enr = essential_numerical_range(&g, 1024, 720).unwrap();
        let at_zero = enr.support.iter().find(|(t, _)| t.abs() < 1e-12).unwrap().1;
        assert!((at_zero - 1.0).abs() < 1e-10);
        assert!((enr.sector.d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn csv_export() {
        let cloud = RangeCloud::from_points(RangeSource::Enr, vec![c(1.0, -0.5)]);
        let mut buf = Vec::new();
        write_cloud_csv(&cloud, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "re,im,source\n1e0,-5e-1,ENR\n");
    }
}
