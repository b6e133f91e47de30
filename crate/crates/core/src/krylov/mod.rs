//! GMRES solves of `T_n(f) x = b`, optionally preconditioned by `T_n(g)`.

mod gmres;

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::Config;
use crate::error::Result;
use crate::symbol::{catalog_parts_with, Branch, CaseId, MatrixSymbol, MultiIndex};
use crate::toeplitz::{build_dense, build_embedded, factor_preconditioner, ToeplitzOperator};

pub use gmres::{gmres, GmresOptions, GmresOutcome, BREAKDOWN_TOL};

/// Real right-hand side with independent standard normal entries.
pub fn random_rhs(order: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..order)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
        .collect()
}

/// Parameters echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveConfig {
    pub case: Option<u32>,
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    pub n: MultiIndex,
    pub order: usize,
    pub tol: f64,
    pub preconditioned: bool,
    pub true_residual: bool,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub history: Vec<f64>,
    pub converged: bool,
    pub final_residual: f64,
    pub seed: u64,
    /// Not serialized, so reports of repeated runs compare equal.
    #[serde(skip)]
    pub wall_time: f64,
    pub config: SolveConfig,
}

impl SolveReport {
    /// `iter,relres` lines with a header; `iter` counts from 1.
    pub fn write_history_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "iter,relres")?;
        for (i, r) in self.history.iter().enumerate() {
            writeln!(out, "{},{:e}", i + 1, r)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn operator(f: &MatrixSymbol, n: &MultiIndex) -> Result<ToeplitzOperator> {
    let order = f.s() * n.product() as usize;
    if order <= Config::max_dense_order() {
        build_dense(f, n, None)
    } else {
        build_embedded(f, n, None)
    }
}

/// Solves `T_n(f) x = b` for a seeded random `b`, with `T_n(g)` as left
/// preconditioner when `g` is given.
pub fn solve_symbols(
    f: &MatrixSymbol,
    g: Option<&MatrixSymbol>,
    n: &MultiIndex,
    seed: u64,
    opts: &GmresOptions,
) -> Result<(SolveReport, Vec<Complex64>)> {
    let t = operator(f, n)?;
    let pre = g.map(|g| factor_preconditioner(g, n)).transpose()?;
    let b = random_rhs(t.order(), seed);
    let out = gmres(&|v| t.matvec(v), &b, opts, pre.as_ref())?;
    let report = SolveReport {
        iterations: out.iterations,
        history: out.history,
        converged: out.converged,
        final_residual: out.final_residual,
        seed,
        wall_time: out.wall_time,
        config: SolveConfig {
            case: None,
            r: None,
            branch: None,
            n: n.clone(),
            order: t.order(),
            tol: opts.tol,
            preconditioned: g.is_some(),
            true_residual: opts.true_residual,
            max_iter: opts.max_iter,
        },
    };
    Ok((report, out.solution))
}

/// A catalog pair: case number, `r` for cases 1 and 2, and the branch of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSpec {
    pub case: CaseId,
    pub r: Option<f64>,
    pub branch: Branch,
}

impl CaseSpec {
    pub fn new(case: CaseId, r: Option<f64>) -> Self {
        CaseSpec {
            case,
            r,
            branch: Branch::default(),
        }
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    /// Fills the case fields of a report's config echo.
    pub fn annotate(&self, report: &mut SolveReport) {
        report.config.case = Some(self.case.number());
        report.config.r = if self.case.needs_r() { self.r } else { None };
        report.config.branch = Some(self.branch);
    }
}

/// Runs one catalog experiment.
pub fn run_case(
    spec: &CaseSpec,
    n: &MultiIndex,
    preconditioned: bool,
    seed: u64,
    opts: &GmresOptions,
) -> Result<SolveReport> {
    let parts = catalog_parts_with(spec.case, spec.r, spec.branch)?;
    let (mut report, _) = solve_symbols(&parts.f, preconditioned.then_some(&parts.g), n, seed, opts)?;
    spec.annotate(&mut report);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::catalog;

    fn mi(v: &[i64]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rhs_is_seeded_and_real() {
        let a = random_rhs(50, 7);
        assert_eq!(a, random_rhs(50, 7));
        assert_ne!(a, random_rhs(50, 8));
        assert!(a.iter().all(|z| z.im == 0.0));
        let mean = a.iter().map(|z| z.re).sum::<f64>() / 50.0;
        assert!(mean.abs() < 0.5);
    }

    #[test]
    fn equal_pair_converges_immediately() {
        let (_, g) = catalog(CaseId::Four, None).unwrap();
        for n in [20, 80] {
            let (rep, _) = solve_symbols(&g, Some(&g), &mi(&[n]), 1, &GmresOptions::default()).unwrap();
            assert!(rep.iterations <= 2, "n = {n}: {}", rep.iterations);
        }
    }

    #[test]
    fn case_one_preconditioned() {
        let rep = run_case(&CaseSpec::new(CaseId::One, Some(4.8)), &mi(&[50]), true, 42, &GmresOptions::default()).unwrap();
        assert!(rep.converged);
        assert!((11..=17).contains(&rep.iterations), "{}", rep.iterations);
        assert_eq!(rep.config.case, Some(1));
        assert!(rep.final_residual <= 1.1 * rep.history.last().unwrap());
    }

    #[test]
    fn deterministic_history() {
        let opts = GmresOptions::default();
        let a = run_case(&CaseSpec::new(CaseId::Three, None), &mi(&[40]), true, 3, &opts).unwrap();
        let b = run_case(&CaseSpec::new(CaseId::Three, None), &mi(&[40]), true, 3, &opts).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_history_csv(&mut ca).unwrap();
        b.write_history_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        assert!(String::from_utf8(ca).unwrap().starts_with("iter,relres\n1,"));
        assert_eq!(a.config.r, None);
        assert_eq!(a.config.branch, Some(Branch::Positive));
    }

    #[test]
    fn case_three_table() {
        let spec = CaseSpec::new(CaseId::Three, None);
        let opts = GmresOptions::default();
        let prec = run_case(&spec, &mi(&[100]), true, 42, &opts).unwrap();
        assert!((13..=19).contains(&prec.iterations), "{}", prec.iterations);
        let centered = run_case(&spec.with_branch(Branch::Centered), &mi(&[100]), true, 42, &opts).unwrap();
        assert!(centered.iterations < prec.iterations);
    }
}
