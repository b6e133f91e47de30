//! Multilevel circulant embedding of `T_n(f)`: each level of size `n_d` is
//! placed in a circulant of size `2n_d`, so a product costs `s² + 2s` FFTs
//! of length `Π 2n_d`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::numerics::fft::{Direction, MultiFft};
use crate::numerics::matrix::ZERO;
use crate::symbol::{box_iter, FourierTable, MultiIndex};

#[derive(Clone)]
pub struct Embedding {
    s: usize,
    n: Vec<usize>,
    sizes: Vec<usize>,
    plan: MultiFft,
    /// Spectra of the first column, one per block entry `(a, b)`.
    spectra: Vec<Vec<Complex64>>,
}

impl Embedding {
    pub fn new(coeffs: &FourierTable, n: &MultiIndex) -> Result<Self> {
        let s = coeffs.s;
        let n: Vec<usize> = n.as_slice().iter().map(|&v| v as usize).collect();
        let sizes: Vec<usize> = n.iter().map(|&v| 2 * v).collect();
        let plan = MultiFft::new(&sizes)?;
        let total = plan.len();
        let strides = crate::symbol::strides(&sizes);
        let lo: Vec<i64> = n.iter().map(|&v| 1 - v as i64).collect();
        let hi: Vec<i64> = n.iter().map(|&v| v as i64 - 1).collect();
        let mut columns = vec![vec![ZERO; total]; s * s];
        for j in box_iter(&lo, &hi) {
            let Some(c) = coeffs.get_ref(&j) else { continue };
            let pos: usize = j
                .iter()
                .zip(&sizes)
                .zip(&strides)
                .map(|((&v, &m), &st)| v.rem_euclid(m as i64) as usize * st)
                .sum();
            for (e, &value) in c.as_slice().iter().enumerate() {
                columns[e][pos] = value;
            }
        }
        columns
            .par_iter_mut()
            .try_for_each(|col| plan.process(col, Direction::Forward))?;
        Ok(Embedding {
            s,
            n,
            sizes,
            plan,
            spectra: columns,
        })
    }

    /// Scatters the `n̂` entries of one block component onto the padded grid.
    fn padded_positions(&self) -> Vec<usize> {
        let strides = crate::symbol::strides(&self.sizes);
        let lo = vec![0i64; self.n.len()];
        let hi: Vec<i64> = self.n.iter().map(|&v| v as i64 - 1).collect();
        box_iter(&lo, &hi)
            .map(|p| p.iter().zip(&strides).map(|(&v, &st)| v as usize * st).sum())
            .collect()
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let s = self.s;
        let total = self.plan.len();
        let positions = self.padded_positions();
        let inputs: Vec<Vec<Complex64>> = (0..s)
            .into_par_iter()
            .map(|b| {
                let mut buf = vec![ZERO; total];
                for (t, &p) in positions.iter().enumerate() {
                    buf[p] = v[t * s + b];
                }
                self.plan.process(&mut buf, Direction::Forward)?;
                Ok(buf)
            })
            .collect::<Result<_>>()?;
        let outputs: Vec<Vec<Complex64>> = (0..s)
            .into_par_iter()
            .map(|a| {
                let mut acc = vec![ZERO; total];
                for (b, input) in inputs.iter().enumerate() {
                    let spec = &self.spectra[a * s + b];
                    for ((slot, &x), &y) in acc.iter_mut().zip(input).zip(spec) {
                        *slot += x * y;
                    }
                }
                self.plan.process(&mut acc, Direction::Inverse)?;
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let mut out = vec![ZERO; v.len()];
        for (a, column) in outputs.iter().enumerate() {
            for (t, &p) in positions.iter().enumerate() {
                out[t * s + a] = column[p];
            }
        }
        Ok(out)
    }
}
