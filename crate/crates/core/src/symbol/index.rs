use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of levels supported.
pub const MAX_LEVELS: usize = 3;

/// A k-tuple of integers, ordered lexicographically (first component most significant).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(components: Vec<i64>) -> Result<Self> {
        if components.is_empty() || components.len() > MAX_LEVELS {
            return Err(Error::invalid(format!(
                "multi-index needs 1..={MAX_LEVELS} components, got {}",
                components.len()
            )));
        }
        Ok(MultiIndex(components))
    }

    pub fn zeros(k: usize) -> Self {
        MultiIndex(vec![0; k])
    }

    pub fn ones(k: usize) -> Self {
        MultiIndex(vec![1; k])
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    /// Product of the components (n̂ for a size index).
    pub fn product(&self) -> i64 {
        self.0.iter().product()
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.k() == other.k() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|v| -v).collect())
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn abs_max(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a.abs().max(b.abs())).collect())
    }

    /// Parses `"20,20"` style lists.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: std::result::Result<Vec<i64>, _> = text.split(',').map(|p| p.trim().parse::<i64>()).collect();
        match parts {
            Ok(v) => MultiIndex::new(v),
            Err(e) => Err(Error::invalid(format!("bad multi-index '{text}': {e}"))),
        }
    }
}

impl From<&[i64]> for MultiIndex {
    fn from(v: &[i64]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Position of `j` in the lexicographic enumeration of the box `lo..=hi`
/// (last component fastest).
pub fn linearize(j: &MultiIndex, lo: &MultiIndex, hi: &MultiIndex) -> Result<usize> {
    if j.k() != lo.k() || j.k() != hi.k() {
        return Err(Error::DimensionMismatch {
            expected: lo.k(),
            actual: j.k(),
        });
    }
    if !lo.le(j) || !j.le(hi) {
        return Err(Error::invalid(format!("index {j} outside range {lo}..{hi}")));
    }
    let mut idx = 0usize;
    for d in 0..j.k() {
        let extent = (hi.0[d] - lo.0[d] + 1) as usize;
        idx = idx * extent + (j.0[d] - lo.0[d]) as usize;
    }
    Ok(idx)
}

pub fn delinearize(idx: usize, lo: &MultiIndex, hi: &MultiIndex) -> Result<MultiIndex> {
    if lo.k() != hi.k() || !lo.le(hi) {
        return Err(Error::invalid(format!("empty range {lo}..{hi}")));
    }
    let extents: Vec<usize> = (0..lo.k()).map(|d| (hi.0[d] - lo.0[d] + 1) as usize).collect();
    let total: usize = extents.iter().product();
    if idx >= total {
        return Err(Error::invalid(format!("linear index {idx} outside range of size {total}")));
    }
    let mut rest = idx;
    let mut out = vec![0i64; lo.k()];
    for d in (0..lo.k()).rev() {
        out[d] = lo.0[d] + (rest % extents[d]) as i64;
        rest /= extents[d];
    }
    Ok(MultiIndex(out))
}

/// Row-major strides (in elements) of a grid with the given extents.
pub(crate) fn strides(extents: &[usize]) -> Vec<usize> {
    let mut s = vec![1; extents.len()];
    for d in (0..extents.len().saturating_sub(1)).rev() {
        s[d] = s[d + 1] * extents[d + 1];
    }
    s
}

/// Iterates all multi-indices in `lo..=hi` in lexicographic order.
pub(crate) fn box_iter(lo: &[i64], hi: &[i64]) -> impl Iterator<Item = Vec<i64>> {
    let extents: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| (b - a + 1).max(0) as usize).collect();
    let total: usize = if extents.is_empty() { 0 } else { extents.iter().product() };
    let lo = lo.to_vec();
    (0..total).map(move |mut idx| {
        let mut out = vec![0i64; lo.len()];
        for d in (0..lo.len()).rev() {
            out[d] = lo[d] + (idx % extents[d]) as i64;
            idx /= extents[d];
        }
        out
    })
}
