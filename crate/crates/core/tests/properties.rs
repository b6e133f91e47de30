use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use toepspec::dsl::{interpret, parse, BinOp, Expr, Func, Value};
use toepspec::krylov::{gmres, random_rhs, run_case, CaseSpec, GmresOptions};
use toepspec::numerics::{fft_multi, lu_factor, svd_values, vec_norm, ComplexMatrix, Direction};
use toepspec::spectral::sectoriality;
use toepspec::symbol::{catalog, CaseId, MatrixSymbol, MultiIndex};
use toepspec::toeplitz::{build_dense, build_embedded};
use toepspec::Config;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mi(v: &[i64]) -> MultiIndex {
    MultiIndex::new(v.to_vec()).unwrap()
}

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    vec_norm(&d) / vec_norm(b).max(1e-300)
}

/// Scalar expressions in `x1` and the parameter `r`.
fn scalar_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..400).prop_map(|v| Expr::Num(v as f64 / 8.0)),
        Just(Expr::ImagUnit),
        Just(Expr::Pi),
        Just(Expr::Var(0)),
        Just(Expr::Param("r".into())),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        let func = prop_oneof![
            Just(Func::Cos),
            Just(Func::Sin),
            Just(Func::Exp),
            Just(Func::Conj),
            Just(Func::Wrap)
        ];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Binary(o, Box::new(a), Box::new(b))),
            (inner.clone(), 0i32..4).prop_map(|(e, n)| Expr::Pow(Box::new(e), n)),
            (func, inner).prop_map(|(f, e)| Expr::Call(f, vec![e])),
        ]
    })
}

/// Trigonometric polynomial with random coefficients on `|j_l| ≤ r_l`.
fn trig_symbol(k: usize, s: usize, r: Vec<i64>, values: Vec<(f64, f64)>) -> MatrixSymbol {
    let extents: Vec<usize> = r.iter().map(|&v| 2 * v as usize + 1).collect();
    let count: usize = extents.iter().product();
    let mut vals = values.into_iter().cycle();
    let coeffs = (0..count).map(|mut lin| {
        let mut j = vec![0i64; k];
        for l in (0..k).rev() {
            j[l] = (lin % extents[l]) as i64 - r[l];
            lin /= extents[l];
        }
        let m = ComplexMatrix::from_fn(s, s, |_, _| {
            let (a, b) = vals.next().unwrap();
            c(a, b)
        });
        (mi(&j), m)
    });
    MatrixSymbol::trig(k, s, coeffs.collect::<Vec<_>>()).unwrap()
}

prop_compose! {
    fn random_trig()(k in 1usize..=2, s in 1usize..=2)
        (r in prop::collection::vec(0i64..=2, k), n in prop::collection::vec(1i64..=7, k),
         values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8..40), k in Just(k), s in Just(s))
        -> (MatrixSymbol, MultiIndex) {
        (trig_symbol(k, s, r, values), mi(&n))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_expressions_parse_back(e in scalar_expr()) {
        let text = e.to_string();
        let back = parse(&text, 1).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        let params = BTreeMap::from([("r".to_string(), 1.5)]);
        for x in [-2.5, 0.3] {
            match (interpret(&e, &[x], &params), interpret(&back, &[x], &params)) {
                (Ok(Value::Scalar(a)), Ok(Value::Scalar(b))) => prop_assert!(a == b || (a.is_nan() && b.is_nan())),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }

    #[test]
    fn fft_round_trip(sizes in prop::collection::vec(1usize..12, 1..=3), seed in 0u64..1000) {
        let total: usize = sizes.iter().product();
        let data = random_rhs(2 * total, seed);
        let data: Vec<Complex64> = data.chunks(2).map(|p| c(p[0].re, p[1].re)).collect();
        let fwd = fft_multi(&data, &sizes, Direction::Forward).unwrap();
        let back = fft_multi(&fwd, &sizes, Direction::Inverse).unwrap();
        prop_assert!(rel_diff(&back, &data) < 1e-13);
        // Parseval
        let e_time: f64 = data.iter().map(|z| z.norm_sqr()).sum();
        let e_freq: f64 = fwd.iter().map(|z| z.norm_sqr()).sum::<f64>() / total as f64;
        prop_assert!((e_time - e_freq).abs() <= 1e-12 * e_time.max(1.0));
    }

    #[test]
    fn embedded_matvec_matches_dense((f, n) in random_trig(), seed in 0u64..100) {
        let t = build_dense(&f, &n, None).unwrap().into_dense().unwrap();
        let v = random_rhs(t.rows(), seed);
        let fast = build_embedded(&f, &n, None).unwrap().matvec(&v).unwrap();
        prop_assert!(rel_diff(&fast, &t.mul_vec(&v).unwrap()) < 1e-10);
    }

    #[test]
    fn toeplitz_map_is_linear((f, n) in random_trig(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let g = f.adjoint().unwrap();
        let (a, b) = (c(a, 0.5), c(-0.25, b));
        let lhs = build_dense(&f.scale(a).unwrap().add(&g.scale(b).unwrap()).unwrap(), &n, None)
            .unwrap()
            .into_dense()
            .unwrap();
        let tf = build_dense(&f, &n, None).unwrap().into_dense().unwrap();
        let tg = build_dense(&g, &n, None).unwrap().into_dense().unwrap();
        let rhs = tf.scale(a).add(&tg.scale(b)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * rhs.max_abs().max(1.0));
        // the adjoint symbol generates the adjoint matrix
        prop_assert!(tg.max_abs_diff(&tf.adjoint()) <= 1e-14);
    }

    #[test]
    fn spectral_norm_below_sup_norm((f, n) in random_trig()) {
        let t = build_dense(&f, &n, None).unwrap().into_dense().unwrap();
        let grid = vec![if f.k() == 1 { 2048 } else { 96 }; f.k()];
        let (_, sup) = f.norm_estimates(&grid).unwrap();
        prop_assert!(svd_values(&t).unwrap().max() <= 1.02 * sup);
    }

    #[test]
    fn symbol_json_round_trip((f, _) in random_trig()) {
        let back = MatrixSymbol::from_json(&f.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.trig_table(), f.trig_table());
    }

    #[test]
    fn inverse_bounded_by_one_over_d(r in 0.5..4.9f64, x in -PI..PI) {
        let (_, g) = catalog(CaseId::One, Some(r)).unwrap();
        let d = sectoriality(&g, Config::DEFAULT.coeff_grid_1d, Config::DEFAULT.angle_count).unwrap().d;
        let inv = svd_values(&g.evaluate(&[x]).unwrap()).unwrap().min().recip();
        prop_assert!(inv <= 1.0 / d + 1e-6, "{} > 1/{}", inv, d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gmres_agrees_with_lu((f, n) in random_trig(), seed in 0u64..100) {
        // shift well away from the spectrum so T_n(f) is comfortably invertible
        let s = f.s();
        let shift = MatrixSymbol::constant(ComplexMatrix::identity(s).scale(c(12.0, 3.0)), f.k()).unwrap();
        let f = f.add(&shift).unwrap();
        let t = build_dense(&f, &n, None).unwrap().into_dense().unwrap();
        let b = random_rhs(t.rows(), seed);
        let opts = GmresOptions { tol: 1e-12, ..Default::default() };
        let out = gmres(&|v| t.mul_vec(v), &b, &opts, None).unwrap();
        let exact = lu_factor(&t).unwrap().solve(&b).unwrap();
        prop_assert!(out.converged);
        prop_assert!(rel_diff(&out.solution, &exact) <= 1e-6);
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let spec = CaseSpec::new(CaseId::Six, None);
    let opts = GmresOptions::default();
    let a = run_case(&spec, &mi(&[8, 8]), true, 11, &opts).unwrap();
    let b = run_case(&spec, &mi(&[8, 8]), true, 11, &opts).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let other = run_case(&spec, &mi(&[8, 8]), true, 12, &opts).unwrap();
    assert_ne!(a.history, other.history);
}

#[test]
fn preconditioning_keeps_case_one_flat() {
    let spec = CaseSpec::new(CaseId::One, Some(4.8));
    let opts = GmresOptions::default();
    let counts: Vec<(usize, usize)> = [40, 80, 160]
        .iter()
        .map(|&n| {
            let p = run_case(&spec, &mi(&[n]), true, 42, &opts).unwrap().iterations;
            let u = run_case(&spec, &mi(&[n]), false, 42, &opts).unwrap().iterations;
            (u, p)
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[1].0 > w[0].0), "{counts:?}");
    let prec: Vec<usize> = counts.iter().map(|c| c.1).collect();
    assert!(prec.iter().max().unwrap() - prec.iter().min().unwrap() <= 2, "{counts:?}");
}
