//! Matrix-valued symbols `f: (-π, π)^k → C^{s×s}`.
//!
//! A symbol is either a trigonometric polynomial with an exact coefficient
//! table, or a general pointwise evaluator (possibly with declared singular
//! points where evaluation is refused).

mod catalog;
mod fourier;
mod index;
mod io;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::lu::lu_factor;
use crate::numerics::matrix::{ComplexMatrix, ONE, ZERO};
use crate::numerics::svd::svd_values;

pub use catalog::{catalog, catalog_parts, catalog_parts_with, Branch, CaseId, CaseSymbols, CATALOG_CASES};
pub use fourier::{fourier_coefficient, fourier_table, FourierTable, QUADRATURE_OFFSET};
pub use index::{delinearize, linearize, MultiIndex, MAX_LEVELS};
pub(crate) use index::{box_iter, strides};
pub use io::{SymbolDocument, SymbolKindTag};

/// Largest supported block size.
pub const MAX_BLOCK: usize = 8;

/// Distance (max-norm) under which a point counts as hitting a singular point.
pub const SINGULAR_POINT_TOL: f64 = 1e-12;

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Result<ComplexMatrix> + Send + Sync>;

/// Exact coefficient table `{ĉ_j}` of a trigonometric polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTable {
    coeffs: BTreeMap<MultiIndex, ComplexMatrix>,
    degree: MultiIndex,
}

impl TrigTable {
    pub fn degree(&self) -> &MultiIndex {
        &self.degree
    }

    pub fn get(&self, j: &MultiIndex) -> Option<&ComplexMatrix> {
        self.coeffs.get(j)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &ComplexMatrix)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

#[derive(Clone)]
pub enum SymbolKind {
    Trig(TrigTable),
    General(Evaluator),
}

#[derive(Clone)]
pub struct MatrixSymbol {
    k: usize,
    s: usize,
    kind: SymbolKind,
    name: String,
    singular_points: Vec<Vec<f64>>,
    expression: Option<String>,
    params: BTreeMap<String, f64>,
}

impl fmt::Debug for MatrixSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixSymbol")
            .field("name", &self.name)
            .field("k", &self.k)
            .field("s", &self.s)
            .field("kind", &if self.is_trig() { "trig" } else { "general" })
            .field("degree", &self.degree())
            .field("singular_points", &self.singular_points)
            .finish()
    }
}

fn check_shape(k: usize, s: usize) -> Result<()> {
    if k == 0 || k > MAX_LEVELS {
        return Err(Error::invalid(format!("number of levels must be 1..={MAX_LEVELS}, got {k}")));
    }
    if s == 0 || s > MAX_BLOCK {
        return Err(Error::invalid(format!("block size must be 1..={MAX_BLOCK}, got {s}")));
    }
    Ok(())
}

impl MatrixSymbol {
    /// Trigonometric polynomial from `(j, ĉ_j)` pairs; repeated indices are summed
    /// and negligible coefficients dropped.
    pub fn trig(k: usize, s: usize, coeffs: impl IntoIterator<Item = (MultiIndex, ComplexMatrix)>) -> Result<Self> {
        check_shape(k, s)?;
        let mut map: BTreeMap<MultiIndex, ComplexMatrix> = BTreeMap::new();
        for (j, c) in coeffs {
            if j.k() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    actual: j.k(),
                });
            }
            if c.rows() != s || c.cols() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    actual: c.rows().max(c.cols()),
                });
            }
            if !c.is_finite() {
                return Err(Error::invalid(format!("coefficient {j} is not finite")));
            }
            match map.get_mut(&j) {
                Some(acc) => *acc = acc.add(&c)?,
                None => {
                    map.insert(j, c);
                }
            }
        }
        Ok(MatrixSymbol {
            k,
            s,
            kind: SymbolKind::Trig(prune(map, k)),
            name: String::new(),
            singular_points: Vec::new(),
            expression: None,
            params: BTreeMap::new(),
        })
    }

    pub fn constant(c: ComplexMatrix, k: usize) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::invalid("constant symbol must be square"));
        }
        let s = c.rows();
        MatrixSymbol::trig(k, s, [(MultiIndex::zeros(k), c)])
    }

    pub fn identity(k: usize, s: usize) -> Result<Self> {
        MatrixSymbol::constant(ComplexMatrix::identity(s), k)
    }

    /// Scalar `e^{i⟨j, x⟩}` times `c`.
    pub fn monomial(j: MultiIndex, c: ComplexMatrix) -> Result<Self> {
        let k = j.k();
        let s = c.rows();
        MatrixSymbol::trig(k, s, [(j, c)])
    }

    pub fn general(k: usize, s: usize, evaluator: Evaluator) -> Result<Self> {
        check_shape(k, s)?;
        Ok(MatrixSymbol {
            k,
            s,
            kind: SymbolKind::General(evaluator),
            name: String::new(),
            singular_points: Vec::new(),
            expression: None,
            params: BTreeMap::new(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_singular_points(mut self, points: Vec<Vec<f64>>) -> Self {
        self.singular_points = points;
        self
    }

    pub fn with_expression(mut self, text: impl Into<String>, params: BTreeMap<String, f64>) -> Self {
        self.expression = Some(text.into());
        self.params = params;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn is_trig(&self) -> bool {
        matches!(self.kind, SymbolKind::Trig(_))
    }

    pub fn trig_table(&self) -> Option<&TrigTable> {
        match &self.kind {
            SymbolKind::Trig(t) => Some(t),
            SymbolKind::General(_) => None,
        }
    }

    /// Degree `r` (componentwise max `|j_i|`); `None` for general symbols.
    pub fn degree(&self) -> Option<&MultiIndex> {
        self.trig_table().map(|t| &t.degree)
    }

    pub fn singular_points(&self) -> &[Vec<f64>] {
        &self.singular_points
    }

    pub fn expression(&self) -> Option<&str> {
        self.expression.as_deref()
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite() || v.abs() > PI * (1.0 + 1e-12)) {
            return Err(Error::Domain { x: x.to_vec() });
        }
        Ok(())
    }

    pub fn hits_singular_point(&self, x: &[f64]) -> bool {
        self.singular_points
            .iter()
            .any(|p| p.iter().zip(x).all(|(a, b)| (a - b).abs() <= SINGULAR_POINT_TOL))
    }

    /// Value at `x`; a declared singular point is a domain error.
    pub fn evaluate(&self, x: &[f64]) -> Result<ComplexMatrix> {
        self.check_point(x)?;
        if self.hits_singular_point(x) {
            return Err(Error::Domain { x: x.to_vec() });
        }
        self.eval_raw(x)
    }

    /// Like [`evaluate`](Self::evaluate) but returns `None` at declared singular points.
    pub fn evaluate_skipping(&self, x: &[f64]) -> Result<Option<ComplexMatrix>> {
        self.check_point(x)?;
        if self.hits_singular_point(x) {
            return Ok(None);
        }
        self.eval_raw(x).map(Some)
    }

    fn eval_raw(&self, x: &[f64]) -> Result<ComplexMatrix> {
        let m = match &self.kind {
            SymbolKind::Trig(t) => {
                let mut acc = ComplexMatrix::zeros(self.s, self.s);
                for (j, c) in &t.coeffs {
                    let phase: f64 = j.as_slice().iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
                    let e = Complex64::from_polar(1.0, phase);
                    for (a, &b) in acc.as_mut_slice().iter_mut().zip(c.as_slice()) {
                        *a += e * b;
                    }
                }
                acc
            }
            SymbolKind::General(f) => f(x)?,
        };
        if m.rows() != self.s || m.cols() != self.s {
            return Err(Error::DimensionMismatch {
                expected: self.s,
                actual: m.rows(),
            });
        }
        if !m.is_finite() {
            return Err(Error::SingularSymbol { x: x.to_vec() });
        }
        Ok(m)
    }

    /// Samples on the uniform grid `x_t = -π + 2π(t + offset)/N` in lexicographic
    /// order; declared singular points give `None`.
    pub fn sample_grid(&self, grid: &[usize], offset: f64) -> Result<Vec<Option<ComplexMatrix>>> {
        let points = grid_points(grid, offset)?;
        if points.first().map(|p| p.len()) != Some(self.k) {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: grid.len(),
            });
        }
        points.par_iter().map(|x| self.evaluate_skipping(x)).collect()
    }

    /// Grid estimates of `‖f‖_{L¹} = ∫‖f(x)‖₁ dx` (trace norm) and `‖f‖_{L∞} = sup ‖f(x)‖`.
    pub fn norm_estimates(&self, grid: &[usize]) -> Result<(f64, f64)> {
        let samples = self.sample_grid(grid, 0.0)?;
        let per_point: Vec<(f64, f64)> = samples
            .par_iter()
            .flatten()
            .map(|m| {
                let sv = svd_values(m)?;
                Ok((sv.values.iter().sum::<f64>(), sv.max()))
            })
            .collect::<Result<_>>()?;
        let total: usize = grid.iter().product();
        let l1 = per_point.iter().map(|p| p.0).sum::<f64>() / total as f64 * (2.0 * PI).powi(self.k as i32);
        let linf = per_point.iter().map(|p| p.1).fold(0.0, f64::max);
        Ok((l1, linf))
    }

    fn check_compatible(&self, other: &MatrixSymbol) -> Result<()> {
        if self.k != other.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: other.k,
            });
        }
        if self.s != other.s {
            return Err(Error::DimensionMismatch {
                expected: self.s,
                actual: other.s,
            });
        }
        Ok(())
    }

    /// DSL text reproducing the symbol, when one is known or can be generated.
    pub fn expression_text(&self) -> Option<String> {
        if let Some(e) = &self.expression {
            return Some(e.clone());
        }
        self.trig_table().map(|t| crate::dsl::trig_table_to_text(t, self.s))
    }

    fn combine_metadata(&self, other: Option<&MatrixSymbol>, text: Option<String>, name: String) -> MetaUpdate {
        let mut params = self.params.clone();
        let mut singular = self.singular_points.clone();
        if let Some(o) = other {
            params.extend(o.params.iter().map(|(k, v)| (k.clone(), *v)));
            for p in &o.singular_points {
                if !singular.contains(p) {
                    singular.push(p.clone());
                }
            }
        }
        MetaUpdate {
            name,
            text,
            params,
            singular,
        }
    }

    fn binary(&self, other: &MatrixSymbol, op: BinaryOp) -> Result<MatrixSymbol> {
        let text = match (self.expression_text(), other.expression_text()) {
            (Some(a), Some(b)) => Some(format!("({a}) {} ({b})", op.symbol())),
            _ => None,
        };
        let name = format!("({}) {} ({})", self.name, op.symbol(), other.name);
        let meta = self.combine_metadata(Some(other), text, name);
        let out = match (&self.kind, &other.kind) {
            (SymbolKind::Trig(a), SymbolKind::Trig(b)) => {
                let coeffs: Vec<(MultiIndex, ComplexMatrix)> = match op {
                    BinaryOp::Add => a.coeffs.iter().chain(&b.coeffs).map(|(j, c)| (j.clone(), c.clone())).collect(),
                    BinaryOp::Sub => a
                        .coeffs
                        .iter()
                        .map(|(j, c)| (j.clone(), c.clone()))
                        .chain(b.coeffs.iter().map(|(j, c)| (j.clone(), c.scale(-ONE))))
                        .collect(),
                    BinaryOp::Mul => {
                        let mut out = Vec::with_capacity(a.len() * b.len());
                        for (ja, ca) in &a.coeffs {
                            for (jb, cb) in &b.coeffs {
                                out.push((ja.add(jb), ca.matmul(cb)?));
                            }
                        }
                        out
                    }
                };
                MatrixSymbol::trig(self.k, self.s, coeffs)?
            }
            _ => {
                let (fa, fb) = (self.clone(), other.clone());
                MatrixSymbol::general(
                    self.k,
                    self.s,
                    Arc::new(move |x: &[f64]| {
                        let a = fa.eval_raw(x)?;
                        let b = fb.eval_raw(x)?;
                        match op {
                            BinaryOp::Add => a.add(&b),
                            BinaryOp::Sub => a.sub(&b),
                            BinaryOp::Mul => a.matmul(&b),
                        }
                    }),
                )?
            }
        };
        Ok(meta.apply(out))
    }

    pub fn add(&self, other: &MatrixSymbol) -> Result<MatrixSymbol> {
        self.check_compatible(other)?;
        self.binary(other, BinaryOp::Add)
    }

    pub fn sub(&self, other: &MatrixSymbol) -> Result<MatrixSymbol> {
        self.check_compatible(other)?;
        self.binary(other, BinaryOp::Sub)
    }

    /// Pointwise product `a(x)·b(x)`; trig degrees add componentwise.
    pub fn mul(&self, other: &MatrixSymbol) -> Result<MatrixSymbol> {
        self.check_compatible(other)?;
        self.binary(other, BinaryOp::Mul)
    }

    pub fn scale(&self, alpha: Complex64) -> Result<MatrixSymbol> {
        let text = self
            .expression_text()
            .map(|t| format!("{} * ({t})", crate::dsl::complex_literal(alpha)));
        let meta = self.combine_metadata(None, text, format!("{alpha}*({})", self.name));
        let out = match &self.kind {
            SymbolKind::Trig(t) => {
                MatrixSymbol::trig(self.k, self.s, t.coeffs.iter().map(|(j, c)| (j.clone(), c.scale(alpha))))?
            }
            SymbolKind::General(_) => {
                let f = self.clone();
                MatrixSymbol::general(self.k, self.s, Arc::new(move |x: &[f64]| Ok(f.eval_raw(x)?.scale(alpha))))?
            }
        };
        Ok(meta.apply(out))
    }

    /// Pointwise conjugate transpose `f(x)*`.
    pub fn adjoint(&self) -> Result<MatrixSymbol> {
        let text = self.expression_text().map(|t| format!("conj(transpose({t}))"));
        let meta = self.combine_metadata(None, text, format!("({})*", self.name));
        let out = match &self.kind {
            SymbolKind::Trig(t) => {
                MatrixSymbol::trig(self.k, self.s, t.coeffs.iter().map(|(j, c)| (j.neg(), c.adjoint())))?
            }
            SymbolKind::General(_) => {
                let f = self.clone();
                MatrixSymbol::general(self.k, self.s, Arc::new(move |x: &[f64]| Ok(f.eval_raw(x)?.adjoint())))?
            }
        };
        Ok(meta.apply(out))
    }

    /// Pointwise inverse; evaluation fails with a singular-symbol error where `f(x)` is singular.
    pub fn inverse(&self) -> Result<MatrixSymbol> {
        let f = self.clone();
        let s = self.s;
        let out = MatrixSymbol::general(
            self.k,
            s,
            Arc::new(move |x: &[f64]| small_inverse(&f.eval_raw(x)?).ok_or_else(|| Error::SingularSymbol { x: x.to_vec() })),
        )?;
        let meta = self.combine_metadata(None, None, format!("inv({})", self.name));
        Ok(meta.apply(out))
    }

    /// `Q(x)·A(x)·Q(x)*`; for real `Q` this is `Q A Qᵀ`.
    pub fn similarity(q: &MatrixSymbol, a: &MatrixSymbol) -> Result<MatrixSymbol> {
        q.check_compatible(a)?;
        let qa = q.mul(a)?;
        let out = qa.mul(&q.adjoint()?)?;
        let text = match (q.expression_text(), a.expression_text()) {
            (Some(qt), Some(at)) => Some(format!("({qt}) * ({at}) * conj(transpose({qt}))")),
            _ => None,
        };
        let meta = q.combine_metadata(Some(a), text, format!("{} {} {}*", q.name, a.name, q.name));
        Ok(meta.apply(out))
    }
}

#[derive(Clone, Copy)]
enum BinaryOp {
    Add,
    Sub,
    Mul,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
        }
    }
}

struct MetaUpdate {
    name: String,
    text: Option<String>,
    params: BTreeMap<String, f64>,
    singular: Vec<Vec<f64>>,
}

impl MetaUpdate {
    fn apply(self, mut sym: MatrixSymbol) -> MatrixSymbol {
        sym.name = self.name;
        // trig results regenerate their text from the table, general ones keep the composed text
        sym.expression = if sym.is_trig() { None } else { self.text };
        sym.params = self.params;
        sym.singular_points = self.singular;
        sym
    }
}

fn prune(map: BTreeMap<MultiIndex, ComplexMatrix>, k: usize) -> TrigTable {
    let scale = map.values().map(|c| c.frobenius_norm()).fold(0.0, f64::max);
    let coeffs: BTreeMap<_, _> = map
        .into_iter()
        .filter(|(_, c)| c.frobenius_norm() > 1e-14 * scale && c.frobenius_norm() > 0.0)
        .map(|(j, mut c)| {
            // flush rounding residue of cancelled entries
            for z in c.as_mut_slice() {
                if z.norm() <= 1e-15 * scale {
                    *z = ZERO;
                }
            }
            (j, c)
        })
        .collect();
    let mut degree = vec![0i64; k];
    for j in coeffs.keys() {
        for (d, v) in degree.iter_mut().zip(j.as_slice()) {
            *d = (*d).max(v.abs());
        }
    }
    TrigTable {
        coeffs,
        degree: MultiIndex::from(degree.as_slice()),
    }
}

/// Inverse of a small matrix, `None` if it is numerically singular.
pub(crate) fn small_inverse(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.rows();
    if n == 1 {
        let v = m[(0, 0)];
        return (v.norm() > 0.0).then(|| ComplexMatrix::scalar(ONE / v));
    }
    if n == 2 {
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let det = a * d - b * c;
        let scale = m.max_abs();
        if det.norm() <= 1e-14 * scale * scale {
            return None;
        }
        return ComplexMatrix::from_rows(&[vec![d / det, -b / det], vec![-c / det, a / det]]).ok();
    }
    let f = lu_factor(m).ok()?;
    let mut out = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![ZERO; n];
        e[j] = ONE;
        let col = f.solve(&e).ok()?;
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    Some(out)
}

/// Points of the uniform grid `x_t = -π + 2π(t + offset)/N` in lexicographic order.
pub fn grid_points(grid: &[usize], offset: f64) -> Result<Vec<Vec<f64>>> {
    if grid.is_empty() || grid.len() > MAX_LEVELS || grid.contains(&0) {
        return Err(Error::invalid(format!("bad sample grid {grid:?}")));
    }
    let lo = vec![0i64; grid.len()];
    let hi: Vec<i64> = grid.iter().map(|&n| n as i64 - 1).collect();
    Ok(box_iter(&lo, &hi)
        .map(|t| {
            t.iter()
                .zip(grid)
                .map(|(&ti, &n)| -PI + 2.0 * PI * (ti as f64 + offset) / n as f64)
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eig::eig_dense;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mat(rows: &[&[Complex64]]) -> ComplexMatrix {
        ComplexMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn random_points(k: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| (0..k).map(|_| rng.random_range(-PI..PI)).collect()).collect()
    }

    #[test]
    fn constant_evaluates_to_itself() {
        let m = mat(&[&[c(1.0, 2.0), c(0.0, 0.0)], &[c(3.0, 0.0), c(-1.0, 0.5)]]);
        let sym = MatrixSymbol::constant(m.clone(), 2).unwrap();
        for x in random_points(2, 5, 1) {
            assert!(sym.evaluate(&x).unwrap().max_abs_diff(&m) < 1e-15);
        }
        assert_eq!(sym.degree().unwrap(), &MultiIndex::zeros(2));
    }

    #[test]
    fn trig_evaluation_matches_sum() {
        let j1 = MultiIndex::new(vec![1, -2]).unwrap();
        let j2 = MultiIndex::new(vec![0, 1]).unwrap();
        let c1 = mat(&[&[c(0.5, 0.0)]]);
        let c2 = mat(&[&[c(0.0, -1.5)]]);
        let sym = MatrixSymbol::trig(2, 1, [(j1, c1), (j2, c2)]).unwrap();
        assert_eq!(sym.degree().unwrap().as_slice(), &[1, 2]);
        for x in random_points(2, 10, 2) {
            let want = c(0.5, 0.0) * Complex64::from_polar(1.0, x[0] - 2.0 * x[1])
                + c(0.0, -1.5) * Complex64::from_polar(1.0, x[1]);
            assert!((sym.evaluate(&x).unwrap()[(0, 0)] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_points_need_skip() {
        let sym = MatrixSymbol::general(1, 1, Arc::new(|x: &[f64]| Ok(ComplexMatrix::scalar(c(1.0 / (x[0] * x[0] - 1.0), 0.0)))))
            .unwrap()
            .with_singular_points(vec![vec![-1.0], vec![1.0]]);
        assert!(matches!(sym.evaluate(&[1.0]), Err(Error::Domain { .. })));
        assert!(sym.evaluate_skipping(&[1.0]).unwrap().is_none());
        assert!(sym.evaluate(&[0.5]).is_ok());
    }

    #[test]
    fn out_of_domain_rejected() {
        let sym = MatrixSymbol::identity(1, 2).unwrap();
        assert!(matches!(sym.evaluate(&[4.0]), Err(Error::Domain { .. })));
        assert!(matches!(sym.evaluate(&[0.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn product_degree_adds_on_generic_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut random_trig = |r: [i64; 2]| {
            let coeffs: Vec<_> = box_iter(&[-r[0], -r[1]], &r)
                .map(|j| {
                    let m = ComplexMatrix::from_fn(2, 2, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                    (MultiIndex::from(j.as_slice()), m)
                })
                .collect();
            MatrixSymbol::trig(2, 2, coeffs).unwrap()
        };
        let a = random_trig([1, 2]);
        let b = random_trig([2, 0]);
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.degree().unwrap().as_slice(), &[3, 2]);
        for x in random_points(2, 10, 6) {
            let want = a.evaluate(&x).unwrap().matmul(&b.evaluate(&x).unwrap()).unwrap();
            assert!(ab.evaluate(&x).unwrap().max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn general_algebra_is_pointwise() {
        let f = MatrixSymbol::general(1, 2, Arc::new(|x: &[f64]| {
            Ok(ComplexMatrix::from_fn(2, 2, |i, j| c(x[0] * (i + 1) as f64, (j as f64) - x[0] * x[0])))
        }))
        .unwrap();
        let g = MatrixSymbol::identity(1, 2).unwrap().scale(c(2.0, 1.0)).unwrap();
        let sum = f.add(&g).unwrap();
        let diff = f.sub(&g).unwrap();
        let prod = f.mul(&g).unwrap();
        let adj = f.adjoint().unwrap();
        for x in random_points(1, 10, 7) {
            let (fx, gx) = (f.evaluate(&x).unwrap(), g.evaluate(&x).unwrap());
            assert!(sum.evaluate(&x).unwrap().max_abs_diff(&fx.add(&gx).unwrap()) < 1e-14);
            assert!(diff.evaluate(&x).unwrap().max_abs_diff(&fx.sub(&gx).unwrap()) < 1e-14);
            assert!(prod.evaluate(&x).unwrap().max_abs_diff(&fx.matmul(&gx).unwrap()) < 1e-14);
            assert!(adj.evaluate(&x).unwrap().max_abs_diff(&fx.adjoint()) < 1e-14);
        }
    }

    #[test]
    fn trig_adjoint_matches_pointwise() {
        let (f, _) = catalog(CaseId::One, Some(2.0)).unwrap();
        let adj = f.adjoint().unwrap();
        assert!(adj.is_trig());
        for x in random_points(1, 10, 8) {
            assert!(adj.evaluate(&x).unwrap().max_abs_diff(&f.evaluate(&x).unwrap().adjoint()) < 1e-13);
        }
    }

    #[test]
    fn inverse_reports_singular_point() {
        let (_, g3) = catalog(CaseId::Three, None).unwrap();
        let inv = g3.inverse().unwrap();
        match inv.evaluate(&[0.0]) {
            Err(Error::SingularSymbol { x }) => assert_eq!(x, vec![0.0]),
            other => panic!("expected singular symbol error, got {other:?}"),
        }
        let m = inv.evaluate(&[1.0]).unwrap().matmul(&g3.evaluate(&[1.0]).unwrap()).unwrap();
        assert!(m.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-13);
    }

    #[test]
    fn similarity_preserves_pointwise_eigenvalues() {
        let (_, g5) = catalog(CaseId::Five, None).unwrap();
        let a = MatrixSymbol::trig(
            2,
            2,
            [
                (MultiIndex::zeros(2), mat(&[&[c(1.0, 1.0), c(2.0, 0.0)], &[c(0.0, -1.0), c(3.0, 0.0)]])),
                (MultiIndex::new(vec![1, 0]).unwrap(), mat(&[&[c(0.5, 0.0), c(0.0, 0.0)], &[c(0.3, 0.2), c(0.0, 0.0)]])),
            ],
        )
        .unwrap();
        let q = catalog::rotation(2).unwrap();
        let sim = MatrixSymbol::similarity(&q, &a).unwrap();
        let _ = g5;
        for x in random_points(2, 10, 9) {
            let mut e1 = eig_dense(&a.evaluate(&x).unwrap(), false).unwrap().eigenvalues;
            let mut e2 = eig_dense(&sim.evaluate(&x).unwrap(), false).unwrap().eigenvalues;
            crate::numerics::sort_spectrum(&mut e1);
            crate::numerics::sort_spectrum(&mut e2);
            for (p, q) in e1.iter().zip(&e2) {
                assert!((p - q).norm() < 1e-10);
            }
            let qx = q.evaluate(&x).unwrap();
            let want = qx.matmul(&a.evaluate(&x).unwrap()).unwrap().matmul(&qx.transpose()).unwrap();
            assert!(sim.evaluate(&x).unwrap().max_abs_diff(&want) < 1e-13);
        }
    }

    #[test]
    fn grid_points_layout() {
        let pts = grid_points(&[2, 4], 0.0).unwrap();
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0], vec![-PI, -PI]);
        assert!((pts[1][1] - (-PI / 2.0)).abs() < 1e-15);
        assert!((pts[4][0]).abs() < 1e-15);
        let mid = grid_points(&[4], 0.5).unwrap();
        assert!((mid[0][0] + 0.75 * PI).abs() < 1e-15);
    }

    #[test]
    fn norm_estimates_of_scalar_exponential() {
        // |e^{ix}| = 1 everywhere
        let sym = MatrixSymbol::monomial(MultiIndex::new(vec![1]).unwrap(), ComplexMatrix::identity(1)).unwrap();
        let (l1, linf) = sym.norm_estimates(&[64]).unwrap();
        assert!((l1 - 2.0 * PI).abs() < 1e-12);
        assert!((linf - 1.0).abs() < 1e-12);
    }
}
