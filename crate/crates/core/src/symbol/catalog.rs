//! The six test pairs `f = Q A Qᵀ`, `g = Q B Qᵀ`, with `Q` the plane rotation
//! by `x` (one level) or by `x₁ + x₂` (two levels).
//!
//! Cases 2 to 4 contain factors that are not 2π-periodic (`x`, `x²`). Their
//! value depends on which representative of `x` they see, see [`Branch`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{MatrixSymbol, MultiIndex};
use crate::error::{Error, Result};
use crate::numerics::matrix::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    One,
    Two,
    Three,
    Four,
    Five,
    Six,
}

pub const CATALOG_CASES: [CaseId; 6] = [CaseId::One, CaseId::Two, CaseId::Three, CaseId::Four, CaseId::Five, CaseId::Six];

impl CaseId {
    pub fn from_number(id: u32) -> Result<Self> {
        match id {
            1 => Ok(CaseId::One),
            2 => Ok(CaseId::Two),
            3 => Ok(CaseId::Three),
            4 => Ok(CaseId::Four),
            5 => Ok(CaseId::Five),
            6 => Ok(CaseId::Six),
            _ => Err(Error::invalid(format!("unknown case {id}; expected 1..6"))),
        }
    }

    pub fn number(self) -> u32 {
        self as u32 + 1
    }

    pub fn levels(self) -> usize {
        match self {
            CaseId::Five | CaseId::Six => 2,
            _ => 1,
        }
    }

    pub fn needs_r(self) -> bool {
        matches!(self, CaseId::One | CaseId::Two)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Representative of `x` fed to the non-periodic factors of cases 2 to 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `x ∈ [0, 2π)`; reproduces the reference iteration counts.
    #[default]
    Positive,
    /// `x ∈ [-π, π)`.
    Centered,
}

impl Branch {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Branch::Positive if x < 0.0 => x + 2.0 * PI,
            _ => x,
        }
    }

    /// DSL spelling of the variable.
    fn var(self) -> &'static str {
        match self {
            Branch::Positive => "wrap(x)",
            Branch::Centered => "x",
        }
    }
}

/// All four symbols of a case: `f = Q A Qᵀ`, `g = Q B Qᵀ`.
#[derive(Debug, Clone)]
pub struct CaseSymbols {
    pub f: MatrixSymbol,
    pub g: MatrixSymbol,
    pub a: MatrixSymbol,
    pub b: MatrixSymbol,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m2(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![a, b], vec![cc, d]]).expect("2x2")
}

fn diag(a: f64, b: f64) -> ComplexMatrix {
    m2(c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b, 0.0))
}

fn idx(v: &[i64]) -> MultiIndex {
    MultiIndex::from(v)
}

/// `Q` with angle `x` (k = 1) or `x₁ + x₂` (k = 2).
pub(crate) fn rotation(k: usize) -> Result<MatrixSymbol> {
    // cos u = (e^{iu} + e^{-iu})/2, sin u = (e^{iu} - e^{-iu})/(2i)
    let plus = m2(c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.5, 0.0));
    let minus = m2(c(0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.5, 0.0));
    let one = vec![1i64; k];
    let neg = vec![-1i64; k];
    Ok(MatrixSymbol::trig(k, 2, [(idx(&one), plus), (idx(&neg), minus)])?.with_name("Q"))
}

fn rotation_text(k: usize) -> &'static str {
    if k == 1 {
        "[[cos(x), sin(x)], [-sin(x), cos(x)]]"
    } else {
        "[[cos(x1+x2), sin(x1+x2)], [-sin(x1+x2), cos(x1+x2)]]"
    }
}

fn general_2x2(k: usize, f: impl Fn(f64) -> [Complex64; 4] + Send + Sync + 'static) -> Result<MatrixSymbol> {
    MatrixSymbol::general(
        k,
        2,
        Arc::new(move |x: &[f64]| {
            let [a, b, cc, d] = f(x[0]);
            Ok(m2(a, b, cc, d))
        }),
    )
}

fn params_for(r: Option<f64>) -> BTreeMap<String, f64> {
    r.map(|r| BTreeMap::from([("r".to_string(), r)])).unwrap_or_default()
}

/// `f` and `g` of a catalog case; `r` is required for cases 1 and 2 only.
pub fn catalog(case: CaseId, r: Option<f64>) -> Result<(MatrixSymbol, MatrixSymbol)> {
    let parts = catalog_parts(case, r)?;
    Ok((parts.f, parts.g))
}

pub fn catalog_parts(case: CaseId, r: Option<f64>) -> Result<CaseSymbols> {
    catalog_parts_with(case, r, Branch::default())
}

pub fn catalog_parts_with(case: CaseId, r: Option<f64>, branch: Branch) -> Result<CaseSymbols> {
    let r = match (case.needs_r(), r) {
        (true, None) => return Err(Error::invalid(format!("case {case} needs the parameter r"))),
        (true, Some(v)) if !v.is_finite() => return Err(Error::invalid("r must be finite")),
        (true, Some(v)) => Some(v),
        (false, _) => None,
    };
    let k = case.levels();
    let z = c(0.0, 0.0);
    let (a, a_text, b, b_text) = match case {
        CaseId::One | CaseId::Two => {
            let rv = r.unwrap_or_default();
            let b = MatrixSymbol::trig(1, 2, [(idx(&[0]), diag(1.0, 5.0)), (idx(&[1]), diag(0.0, rv))])?;
            let b_text = "[[1, 0], [0, 5 + r*exp(i*x)]]";
            if case == CaseId::One {
                let a = MatrixSymbol::trig(
                    1,
                    2,
                    [
                        (idx(&[0]), m2(c(2.0, 1.0), z, c(1.0, 0.0), c(5.0, 0.0))),
                        (idx(&[1]), diag(0.5, rv)),
                        (idx(&[-1]), diag(0.5, 0.0)),
                    ],
                )?;
                (a, "[[2 + i + cos(x), 0], [1, 5 + r*exp(i*x)]]".to_string(), b, b_text.to_string())
            } else {
                let a = general_2x2(1, move |x| {
                    let y = branch.apply(x);
                    [
                        c(2.0 + x.cos(), 1.0),
                        z,
                        c(1.0 / (y * y - 1.0), 0.0),
                        c(5.0, 0.0) + rv * Complex64::from_polar(1.0, x),
                    ]
                })?
                .with_singular_points(match branch {
                    Branch::Positive => vec![vec![1.0]],
                    Branch::Centered => vec![vec![-1.0], vec![1.0]],
                });
                let v = branch.var();
                (
                    a,
                    format!("[[2 + i + cos(x), 0], [1/({v}^2 - 1), 5 + r*exp(i*x)]]"),
                    b,
                    b_text.to_string(),
                )
            }
        }
        CaseId::Three => {
            let a = general_2x2(1, move |x| {
                let y = branch.apply(x);
                [
                    (c(1.0, 0.0) - Complex64::from_polar(1.0, x)) * (1.0 + y * y / (PI * PI)),
                    z,
                    z,
                    c(2.0 + x.cos(), 0.0),
                ]
            })?;
            let b = MatrixSymbol::trig(1, 2, [(idx(&[0]), diag(1.0, 1.0)), (idx(&[1]), diag(-1.0, 0.0))])?;
            (
                a,
                format!("[[(1 - exp(i*x))*(1 + {}^2/pi^2), 0], [0, 2 + cos(x)]]", branch.var()),
                b,
                "[[1 - exp(i*x), 0], [0, 1]]".to_string(),
            )
        }
        CaseId::Four => {
            let a = general_2x2(1, move |x| {
                let sx = x.sin();
                [
                    (c(1.0, 0.0) - Complex64::from_polar(1.0, x)) * (sx * sx + 3.0),
                    z,
                    c(branch.apply(x), 0.0),
                    c(1.0 + x.cos(), 0.0),
                ]
            })?;
            let b = MatrixSymbol::trig(
                1,
                2,
                [
                    (idx(&[0]), diag(1.0, 1.0)),
                    (idx(&[1]), diag(-1.0, 0.5)),
                    (idx(&[-1]), diag(0.0, 0.5)),
                ],
            )?;
            (
                a,
                format!("[[(1 - exp(i*x))*(sin(x)^2 + 3), 0], [{}, 1 + cos(x)]]", branch.var()),
                b,
                "[[1 - exp(i*x), 0], [0, 1 + cos(x)]]".to_string(),
            )
        }
        CaseId::Five => {
            let a = MatrixSymbol::trig(
                2,
                2,
                [
                    (idx(&[0, 0]), m2(c(0.0, 3.0), z, z, c(10.0, 0.0))),
                    (idx(&[1, 0]), diag(0.5, 2.0)),
                    (idx(&[-1, 0]), diag(0.5, 0.0)),
                    (idx(&[0, 1]), diag(0.5, 2.0)),
                    (idx(&[0, -1]), diag(0.5, 0.0)),
                ],
            )?;
            let b = MatrixSymbol::trig(
                2,
                2,
                [
                    (idx(&[0, 0]), diag(1.0, 10.0)),
                    (idx(&[1, 0]), diag(0.0, 2.0)),
                    (idx(&[0, 1]), diag(0.0, 2.0)),
                ],
            )?;
            (
                a,
                "[[3i + cos(x1) + cos(x2), 0], [0, 10 + 2*(exp(i*x1) + exp(i*x2))]]".to_string(),
                b,
                "[[1, 0], [0, 10 + 2*(exp(i*x1) + exp(i*x2))]]".to_string(),
            )
        }
        CaseId::Six => {
            let a = MatrixSymbol::trig(
                2,
                2,
                [
                    (idx(&[0, 0]), diag(1.0, 10.0)),
                    (idx(&[1, 0]), diag(-0.5, 0.5)),
                    (idx(&[-1, 0]), diag(0.0, 0.5)),
                    (idx(&[0, 1]), diag(-0.5, 0.5)),
                    (idx(&[0, -1]), diag(0.0, 0.5)),
                ],
            )?;
            let b = MatrixSymbol::trig(
                2,
                2,
                [
                    (idx(&[0, 0]), diag(1.0, 1.0)),
                    (idx(&[1, 0]), diag(-0.5, 0.0)),
                    (idx(&[0, 1]), diag(-0.5, 0.0)),
                ],
            )?;
            (
                a,
                "[[1 - (exp(i*x1) + exp(i*x2))/2, 0], [0, 10 + cos(x1) + cos(x2)]]".to_string(),
                b,
                "[[1 - (exp(i*x1) + exp(i*x2))/2, 0], [0, 1]]".to_string(),
            )
        }
    };
    let params = params_for(r);
    let n = case.number();
    let a = a.with_expression(a_text.clone(), params.clone()).with_name(format!("A{n}"));
    let b = b.with_expression(b_text.clone(), params.clone()).with_name(format!("B{n}"));
    let q = rotation(k)?;
    let qt = rotation_text(k);
    let f = MatrixSymbol::similarity(&q, &a)?
        .with_expression(format!("sandwich({qt}, {a_text})"), params.clone())
        .with_name(format!("f{n}"));
    let g = MatrixSymbol::similarity(&q, &b)?
        .with_expression(format!("sandwich({qt}, {b_text})"), params)
        .with_name(format!("g{n}"));
    Ok(CaseSymbols { f, g, a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eig::eig_dense;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn case_one_at_zero() {
        let (f1, g1) = catalog(CaseId::One, Some(4.8)).unwrap();
        let want = m2(c(3.0, 1.0), c(0.0, 0.0), c(1.0, 0.0), c(9.8, 0.0));
        assert!(close(&f1.evaluate(&[0.0]).unwrap(), &want, 1e-14));
        assert!(close(&g1.evaluate(&[0.0]).unwrap(), &diag(1.0, 9.8), 1e-14));
        assert!(f1.is_trig() && g1.is_trig());
    }

    #[test]
    fn case_five_components() {
        let parts = catalog_parts(CaseId::Five, None).unwrap();
        assert_eq!((parts.f.k(), parts.f.s()), (2, 2));
        let want = m2(c(2.0, 3.0), c(0.0, 0.0), c(0.0, 0.0), c(14.0, 0.0));
        assert!(close(&parts.a.evaluate(&[0.0, 0.0]).unwrap(), &want, 1e-14));
        let ginv = parts.g.inverse().unwrap().evaluate(&[0.0, 0.0]).unwrap();
        let mut ev = eig_dense(&ginv, false).unwrap().eigenvalues;
        crate::numerics::sort_spectrum(&mut ev);
        assert!((ev[0] - c(1.0 / 14.0, 0.0)).norm() < 1e-14);
        assert!((ev[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn case_three_g_is_singular_at_zero_with_degree_three() {
        let (f3, g3) = catalog(CaseId::Three, None).unwrap();
        assert!(!f3.is_trig());
        let g0 = g3.evaluate(&[0.0]).unwrap();
        let det = g0[(0, 0)] * g0[(1, 1)] - g0[(0, 1)] * g0[(1, 0)];
        assert!(det.norm() < 1e-15);
        assert_eq!(g3.degree().unwrap().as_slice(), &[3]);
    }

    #[test]
    fn trig_kind_where_formulas_allow() {
        let expect = [(true, true), (false, true), (false, true), (false, true), (true, true), (true, true)];
        for (case, want) in CATALOG_CASES.iter().zip(expect) {
            let (f, g) = catalog(*case, Some(1.0)).unwrap();
            assert_eq!((f.is_trig(), g.is_trig()), want, "case {case}");
        }
    }

    #[test]
    fn q_is_the_rotation() {
        for k in [1, 2] {
            let q = rotation(k).unwrap();
            let x = vec![0.3; k];
            let u: f64 = x.iter().sum();
            let want = m2(c(u.cos(), 0.0), c(u.sin(), 0.0), c(-u.sin(), 0.0), c(u.cos(), 0.0));
            assert!(close(&q.evaluate(&x).unwrap(), &want, 1e-15));
        }
    }

    #[test]
    fn general_cases_match_direct_formula() {
        // f = Q A Qᵀ computed by hand at a few points
        for case in [CaseId::Two, CaseId::Three, CaseId::Four] {
            let parts = catalog_parts(case, Some(2.0)).unwrap();
            for &x in &[-2.5, -0.3, 0.7, 2.9] {
                let q = rotation(1).unwrap().evaluate(&[x]).unwrap();
                let want = q.matmul(&parts.a.evaluate(&[x]).unwrap()).unwrap().matmul(&q.transpose()).unwrap();
                assert!(close(&parts.f.evaluate(&[x]).unwrap(), &want, 1e-13));
            }
        }
    }

    #[test]
    fn branches_differ_only_for_negative_x() {
        for case in [CaseId::Two, CaseId::Three, CaseId::Four] {
            let pos = catalog_parts_with(case, Some(2.0), Branch::Positive).unwrap().f;
            let cen = catalog_parts_with(case, Some(2.0), Branch::Centered).unwrap().f;
            assert!(close(&pos.evaluate(&[0.7]).unwrap(), &cen.evaluate(&[0.7]).unwrap(), 0.0));
            assert!(pos.evaluate(&[-0.7]).unwrap().max_abs_diff(&cen.evaluate(&[-0.7]).unwrap()) > 0.1);
        }
        // the (2,1) entry of A₄ is x itself
        let a4 = catalog_parts(CaseId::Four, None).unwrap().a;
        assert!((a4.evaluate(&[-1.0]).unwrap()[(1, 0)].re - (2.0 * PI - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn case_two_has_singular_points_and_needs_r() {
        assert!(catalog(CaseId::Two, None).is_err());
        let (f2, _) = catalog(CaseId::Two, Some(1.0)).unwrap();
        assert!(matches!(f2.evaluate(&[1.0]), Err(Error::Domain { .. })));
        assert!(f2.evaluate(&[-1.0]).is_ok());
        let centered = catalog_parts_with(CaseId::Two, Some(1.0), Branch::Centered).unwrap().f;
        assert!(matches!(centered.evaluate(&[-1.0]), Err(Error::Domain { .. })));
        assert!(CaseId::from_number(7).is_err());
    }
}
