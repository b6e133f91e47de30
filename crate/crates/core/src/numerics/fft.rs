//! Multidimensional FFT on row-major grids (last axis fastest).
//!
//! Convention: the forward transform is unnormalized,
//! `X[q] = Σ_t x[t] exp(-2πi⟨q, t/N⟩)`, and the inverse carries the full
//! `1/N̂` factor so that `inverse(forward(x)) == x`.
//!
//! One-dimensional passes are delegated to `rustfft`, which handles arbitrary
//! lengths (mixed radix with a Bluestein fallback for large prime factors).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Planned transform for a fixed grid shape; reusable across calls and threads.
#[derive(Clone)]
pub struct MultiFft {
    sizes: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl MultiFft {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::invalid("FFT grid needs at least one dimension"));
        }
        if let Some(pos) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::invalid(format!("FFT size along axis {pos} is zero")));
        }
        let mut planner = FftPlanner::new();
        Ok(MultiFft {
            sizes: sizes.to_vec(),
            forward: sizes.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: sizes.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn process(&self, data: &mut [Complex64], direction: Direction) -> Result<()> {
        let total = self.len();
        if data.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                actual: data.len(),
            });
        }
        let plans = match direction {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let mut line = Vec::new();
        for (axis, plan) in plans.iter().enumerate() {
            let len = self.sizes[axis];
            if len == 1 {
                continue;
            }
            let stride: usize = self.sizes[axis + 1..].iter().product();
            let outer = total / (len * stride);
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            if stride == 1 {
                for chunk in data.chunks_exact_mut(len) {
                    plan.process_with_scratch(chunk, &mut scratch);
                }
                continue;
            }
            line.resize(len, Complex64::new(0.0, 0.0));
            for o in 0..outer {
                let base = o * len * stride;
                for inner in 0..stride {
                    for (t, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + t * stride + inner];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (t, value) in line.iter().enumerate() {
                        data[base + t * stride + inner] = *value;
                    }
                }
            }
        }
        if direction == Direction::Inverse {
            let scale = 1.0 / total as f64;
            data.iter_mut().for_each(|z| *z *= scale);
        }
        Ok(())
    }
}

/// One-shot multidimensional FFT; see the module docs for the scaling convention.
pub fn fft_multi(data: &[Complex64], sizes: &[usize], direction: Direction) -> Result<Vec<Complex64>> {
    let plan = MultiFft::new(sizes)?;
    let mut out = data.to_vec();
    plan.process(&mut out, direction)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn delta_gives_flat_spectrum() {
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[0] = Complex64::new(1.0, 0.0);
        let spec = fft_multi(&v, &[8], Direction::Forward).unwrap();
        for z in spec {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn pure_frequency_has_single_bin() {
        // e^{3ix} on x_t = 2πt/16.
        let v: Vec<_> = (0..16)
            .map(|t| Complex64::from_polar(1.0, 3.0 * 2.0 * PI * t as f64 / 16.0))
            .collect();
        let spec = fft_multi(&v, &[16], Direction::Forward).unwrap();
        for (q, z) in spec.iter().enumerate() {
            let expect = if q == 3 { 16.0 } else { 0.0 };
            assert!((z - Complex64::new(expect, 0.0)).norm() < 1e-12, "bin {q}: {z}");
        }
        let inv = fft_multi(&v, &[16], Direction::Inverse).unwrap();
        // the inverse uses e^{+iqx}: the energy lands at bin 16-3.
        assert!((inv[13] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(
            fft_multi(&[], &[4, 0], Direction::Forward),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn round_trip_size_twelve() {
        let v: Vec<_> = (0..12)
            .map(|t| Complex64::new((t as f64 * 0.7).sin(), (t as f64 * 1.3).cos()))
            .collect();
        let back = fft_multi(&fft_multi(&v, &[12], Direction::Forward).unwrap(), &[12], Direction::Inverse).unwrap();
        assert!(rel_diff(&back, &v) <= 1e-12);
    }

    #[test]
    fn two_dimensional_matches_direct_dft() {
        let sizes = [3usize, 5];
        let v: Vec<_> = (0..15).map(|t| Complex64::new(t as f64, (t * t) as f64 * 0.1)).collect();
        let got = fft_multi(&v, &sizes, Direction::Forward).unwrap();
        for q0 in 0..3 {
            for q1 in 0..5 {
                let mut acc = Complex64::new(0.0, 0.0);
                for t0 in 0..3 {
                    for t1 in 0..5 {
                        let phase = -2.0 * PI * ((q0 * t0) as f64 / 3.0 + (q1 * t1) as f64 / 5.0);
                        acc += v[t0 * 5 + t1] * Complex64::from_polar(1.0, phase);
                    }
                }
                assert!((acc - got[q0 * 5 + q1]).norm() < 1e-11);
            }
        }
    }
}
