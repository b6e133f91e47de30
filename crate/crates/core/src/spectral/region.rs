//! Raster masks in the complex plane: the localization region `R(f, g)` of
//! `λ` for which `f − λg` is sectorial, and `Area(K)` of a compact set `K`
//! (the complement of the unbounded component of `ℂ \ K`).

use std::collections::VecDeque;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::sector::SupportScan;
use super::{angle, check_angles, check_grid, rot, sample, sectoriality, Samples};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::symbol::MatrixSymbol;

/// Axis-aligned rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) || ![re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(format!(
                "degenerate rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Bounding box of `points`, each side widened by `padding` times the
    /// larger extent (at least `1e-3` so single points get a box).
    pub fn around(points: &[Complex64], padding: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("cannot bound an empty point set"));
        }
        let re_min = points.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let re_max = points.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let im_min = points.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        let im_max = points.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        let pad = (padding * (re_max - re_min).max(im_max - im_min)).max(1e-3);
        Rect::new(re_min - pad, re_max + pad, im_min - pad, im_max + pad)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Parses `re_min,re_max,im_min,im_max`.
    pub fn parse(text: &str) -> Result<Self> {
        let v: Vec<f64> = text
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::invalid(format!("bad rectangle '{text}': {e}")))?;
        if v.len() != 4 {
            return Err(Error::invalid(format!("rectangle needs 4 numbers, got '{text}'")));
        }
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

/// Boolean raster; row 0 is the top edge (`im_max`), column 0 the left edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionMask {
    pub rect: Rect,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<bool>,
}

impl RegionMask {
    fn empty(rect: Rect, width: usize, height: usize) -> Self {
        RegionMask {
            rect,
            width,
            height,
            cells: vec![false; width * height],
        }
    }

    pub fn pixel_size(&self) -> (f64, f64) {
        (
            (self.rect.re_max - self.rect.re_min) / self.width as f64,
            (self.rect.im_max - self.rect.im_min) / self.height as f64,
        )
    }

    pub fn center(&self, col: usize, row: usize) -> Complex64 {
        let (dx, dy) = self.pixel_size();
        Complex64::new(
            self.rect.re_min + (col as f64 + 0.5) * dx,
            self.rect.im_max - (row as f64 + 0.5) * dy,
        )
    }

    /// `(col, row)` of the pixel containing `z`, if inside the rectangle.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        if !self.rect.contains(z) {
            return None;
        }
        let (dx, dy) = self.pixel_size();
        let col = (((z.re - self.rect.re_min) / dx) as usize).min(self.width - 1);
        let row = (((self.rect.im_max - z.im) / dy) as usize).min(self.height - 1);
        Some((col, row))
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.cells[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Area covered by true pixels.
    pub fn area(&self) -> f64 {
        let (dx, dy) = self.pixel_size();
        self.count() as f64 * dx * dy
    }

    /// True when `z`'s pixel and all pixels within `slack` of it are true.
    pub fn inside_with_slack(&self, z: Complex64, slack: usize) -> bool {
        let Some((col, row)) = self.pixel_of(z) else { return false };
        let s = slack as isize;
        (-s..=s).all(|dr| {
            (-s..=s).all(|dc| {
                let (c, r) = (col as isize + dc, row as isize + dr);
                c >= 0
                    && r >= 0
                    && (c as usize) < self.width
                    && (r as usize) < self.height
                    && self.get(c as usize, r as usize)
            })
        })
    }

    /// Binary PGM (P5): true pixels white (255), false black (0).
    pub fn write_pgm(&self, mut out: impl Write) -> Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self.cells.iter().map(|&c| if c { 255 } else { 0 }).collect();
        out.write_all(&bytes)?;
        Ok(())
    }
}

/// Marks pixel centers `λ` for which `f − λg` is sectorial (`d > tol`).
///
/// Each pixel runs the discrete-angle test of [`sectoriality`], warm-started
/// from its left neighbour; the golden-section refinement is skipped, so a
/// pixel on the boundary may differ from a full classification.
pub fn localization_region(
    f: &MatrixSymbol,
    g: &MatrixSymbol,
    rect: Rect,
    resolution: usize,
    grid: usize,
    angle_count: usize,
) -> Result<RegionMask> {
    check_grid(grid)?;
    check_angles(angle_count)?;
    if resolution == 0 {
        return Err(Error::invalid("resolution must be positive"));
    }
    if f.k() != g.k() || f.s() != g.s() {
        return Err(Error::DimensionMismatch {
            expected: g.s(),
            actual: f.s(),
        });
    }
    let g_report = sectoriality(g, grid, angle_count)?;
    if !g_report.is_sectorial() {
        return Err(Error::Precondition(format!(
            "g must be sectorial, but it is {} (d = {:e})",
            g_report.classification, g_report.d
        )));
    }
    let (fs, gs) = paired_samples(f, g, grid)?;
    let tol = Config::DEFAULT.sector_tol;
    let rots: Vec<(f64, Complex64)> = (0..angle_count)
        .map(|k| {
            let t = angle(k, angle_count);
            (t, rot(t))
        })
        .collect();
    let mut mask = RegionMask::empty(rect, resolution, resolution);
    let width = mask.width;
    let template = mask.clone();
    mask.cells.par_chunks_mut(width).enumerate().for_each(|(row, cells)| {
        let mut scan = SupportScan {
            s: fs.s,
            blocks: vec![Complex64::new(0.0, 0.0); fs.blocks.len()],
        };
        let (mut hint, mut witness) = (0usize, 0usize);
        for (col, cell) in cells.iter_mut().enumerate() {
            let lambda = template.center(col, row);
            for ((dst, &a), &b) in scan.blocks.iter_mut().zip(&fs.blocks).zip(&gs.blocks) {
                *dst = a - lambda * b;
            }
            *cell = scan.exceeds(&rots, tol, &mut hint, &mut witness);
        }
    });
    Ok(mask)
}

/// Samples of `f` and `g` at the grid points where both are finite.
fn paired_samples(f: &MatrixSymbol, g: &MatrixSymbol, grid: usize) -> Result<(SupportScan, SupportScan)> {
    let sf = sample(f, grid)?;
    let sg = sample(g, grid)?;
    let keep = |a: &Samples, b: &Samples| -> Samples {
        let mut out = Samples {
            s: a.s,
            points: Vec::new(),
            values: Vec::new(),
            skipped: a.skipped,
        };
        for (x, v) in a.points.iter().zip(&a.values) {
            if b.points.binary_search_by(|p| p.partial_cmp(x).expect("finite")).is_ok() {
                out.points.push(x.clone());
                out.values.push(v.clone());
            }
        }
        out
    };
    let (pf, pg) = (keep(&sf, &sg), keep(&sg, &sf));
    Ok((SupportScan::new(&pf), SupportScan::new(&pg)))
}

/// Minimum accepted raster size for [`area_of_compact`].
pub const MIN_AREA_RESOLUTION: usize = 32;

/// Rasterizes the `ε`-dilation of `points` on a square `resolution²` grid,
/// flood-fills the unbounded component from the frame, and returns its
/// complement.
pub fn area_of_compact(points: &[Complex64], resolution: usize, eps: f64) -> Result<RegionMask> {
    if resolution < MIN_AREA_RESOLUTION {
        return Err(Error::invalid(format!(
            "resolution {resolution} is below the minimum {MIN_AREA_RESOLUTION}"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("dilation must be positive, got {eps}")));
    }
    if points.is_empty() {
        return Err(Error::invalid("cannot rasterize an empty cloud"));
    }
    let bbox = Rect::around(points, 0.0)?;
    let cx = 0.5 * (bbox.re_min + bbox.re_max);
    let cy = 0.5 * (bbox.im_min + bbox.im_max);
    // square frame with room for the dilation and a free border
    let half = 0.5 * (bbox.re_max - bbox.re_min).max(bbox.im_max - bbox.im_min) + eps;
    let half = half * (1.0 + 4.0 / resolution as f64) + 1e-12;
    let rect = Rect::new(cx - half, cx + half, cy - half, cy + half)?;
    let mut dilated = RegionMask::empty(rect, resolution, resolution);
    let (dx, dy) = dilated.pixel_size();
    let reach = eps + 0.5 * dx.hypot(dy);
    for &z in points {
        let c0 = ((z.re - reach - rect.re_min) / dx).floor().max(0.0) as usize;
        let c1 = (((z.re + reach - rect.re_min) / dx).ceil() as usize).min(resolution - 1);
        let r0 = ((rect.im_max - z.im - reach) / dy).floor().max(0.0) as usize;
        let r1 = (((rect.im_max - z.im + reach) / dy).ceil() as usize).min(resolution - 1);
        for row in r0..=r1 {
            for col in c0..=c1 {
                if (dilated.center(col, row) - z).norm() <= reach {
                    dilated.cells[row * resolution + col] = true;
                }
            }
        }
    }
    let outside = flood_from_frame(&dilated);
    let mut area = dilated;
    for (cell, out) in area.cells.iter_mut().zip(outside) {
        *cell = !out;
    }
    Ok(area)
}

/// False pixels 4-connected to the frame.
fn flood_from_frame(mask: &RegionMask) -> Vec<bool> {
    let (w, h) = (mask.width, mask.height);
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    let push = |c: usize, r: usize, seen: &mut Vec<bool>, queue: &mut VecDeque<(usize, usize)>| {
        let i = r * w + c;
        if !mask.cells[i] && !seen[i] {
            seen[i] = true;
            queue.push_back((c, r));
        }
    };
    for c in 0..w {
        push(c, 0, &mut seen, &mut queue);
        push(c, h - 1, &mut seen, &mut queue);
    }
    for r in 0..h {
        push(0, r, &mut seen, &mut queue);
        push(w - 1, r, &mut seen, &mut queue);
    }
    while let Some((c, r)) = queue.pop_front() {
        if c > 0 {
            push(c - 1, r, &mut seen, &mut queue);
        }
        if c + 1 < w {
            push(c + 1, r, &mut seen, &mut queue);
        }
        if r > 0 {
            push(c, r - 1, &mut seen, &mut queue);
        }
        if r + 1 < h {
            push(c, r + 1, &mut seen, &mut queue);
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::ComplexMatrix;
    use crate::symbol::MultiIndex;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_points_have_no_interior() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0)];
        let mask = area_of_compact(&pts, 128, 0.05).unwrap();
        let disk = 2.0 * PI * 0.05 * 0.05;
        assert!(mask.area() > 0.5 * disk && mask.area() < 2.5 * disk, "{}", mask.area());
        let (col, row) = mask.pixel_of(c(0.5, 0.0)).unwrap();
        assert!(!mask.get(col, row));
    }

    #[test]
    fn circle_encloses_origin() {
        let pts: Vec<Complex64> = (0..400).map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / 400.0)).collect();
        let mask = area_of_compact(&pts, 128, 0.03).unwrap();
        let (col, row) = mask.pixel_of(c(0.0, 0.0)).unwrap();
        assert!(mask.get(col, row));
        assert!((mask.area() - PI).abs() < 0.5);
        // the frame is outside
        assert!(!mask.get(0, 0));
    }

    #[test]
    fn segment_and_point() {
        let mut pts: Vec<Complex64> = (0..=200).map(|t| c(1.0 + t as f64 / 100.0, 1.0)).collect();
        pts.push(c(1.0, 0.0));
        let mask = area_of_compact(&pts, 256, 0.02).unwrap();
        assert!(mask.area() < 2.0 * 0.05 + 0.02);
        let (col, row) = mask.pixel_of(c(2.0, 0.5)).unwrap();
        assert!(!mask.get(col, row));
    }

    #[test]
    fn resolution_floor() {
        assert!(matches!(area_of_compact(&[c(0.0, 0.0)], 31, 0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn equal_pair_excludes_only_one() {
        let g = MatrixSymbol::constant(ComplexMatrix::from_diag(&[c(2.0, 1.0), c(1.0, 0.0)]), 1).unwrap();
        let rect = Rect::new(0.0, 2.0, -1.0, 1.0).unwrap();
        let mask = localization_region(&g, &g, rect, 41, 64, 180).unwrap();
        let (col, row) = mask.pixel_of(c(1.0, 0.0)).unwrap();
        assert!(!mask.get(col, row));
        assert_eq!(mask.count(), 41 * 41 - 1);
    }

    #[test]
    fn shift_against_identity() {
        // f = e^{ix}, g = 1: f − λ is sectorial off the unit circle
        let f = MatrixSymbol::monomial(MultiIndex::new(vec![1]).unwrap(), ComplexMatrix::scalar(c(1.0, 0.0))).unwrap();
        let g = MatrixSymbol::identity(1, 1).unwrap();
        let rect = Rect::new(-2.0, 2.0, -2.0, 2.0).unwrap();
        let mask = localization_region(&f, &g, rect, 64, 256, 360).unwrap();
        for row in 0..64 {
            for col in 0..64 {
                let z = mask.center(col, row);
                if (z.norm() - 1.0).abs() > 0.1 {
                    // outside the unit disk only
                    assert_eq!(mask.get(col, row), z.norm() > 1.0, "{z}");
                }
            }
        }
    }

    #[test]
    fn nonsectorial_g_rejected() {
        let f = MatrixSymbol::identity(1, 1).unwrap();
        let g = MatrixSymbol::monomial(MultiIndex::new(vec![1]).unwrap(), ComplexMatrix::scalar(c(1.0, 0.0))).unwrap();
        let rect = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(matches!(localization_region(&f, &g, rect, 16, 64, 180), Err(Error::Precondition(_))));
    }

    #[test]
    fn pgm_header() {
        let mask = RegionMask::empty(Rect::new(0.0, 1.0, 0.0, 1.0).unwrap(), 3, 2);
        let mut buf = Vec::new();
        mask.write_pgm(&mut buf).unwrap();
        assert_eq!(&buf[..11], b"P5\n3 2\n255\n");
        assert_eq!(buf.len(), 11 + 6);
    }

    #[test]
    fn rect_parsing() {
        assert_eq!(Rect::parse("-1,2,0,3").unwrap(), Rect::new(-1.0, 2.0, 0.0, 3.0).unwrap());
        assert!(Rect::parse("1,0,0,1").is_err());
        assert!(Rect::parse("1,2,3").is_err());
    }
}
