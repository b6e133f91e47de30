//! Turns an expression into a [`MatrixSymbol`]. Expressions built from
//! constants, `+ - *`, non-negative integer powers, `exp(i⟨m, x⟩)` and
//! `cos`/`sin` of integer combinations of the variables expand exactly into a
//! trigonometric coefficient table; everything else becomes a general symbol
//! evaluated by the interpreter.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::ast::{BinOp, Expr, Func};
use super::interp::{interpret, powi, Value};
use super::{parse, DslError, DslErrorKind, Pos};
use crate::error::{Error, Result};
use crate::numerics::matrix::{ComplexMatrix, ONE, ZERO};
use crate::symbol::{MatrixSymbol, MultiIndex, TrigTable};

/// Scalar symbolic value.
#[derive(Debug, Clone)]
enum Sym {
    /// `c0 + Σ a_d x_d`
    Lin(Complex64, Vec<Complex64>),
    /// `Σ c_m e^{i⟨m,x⟩}`
    Trig(BTreeMap<Vec<i64>, Complex64>),
    Opaque,
}

impl Sym {
    fn constant(c: Complex64, k: usize) -> Sym {
        Sym::Lin(c, vec![ZERO; k])
    }

    fn as_const(&self) -> Option<Complex64> {
        match self {
            Sym::Lin(c, a) if a.iter().all(|z| *z == ZERO) => Some(*c),
            Sym::Trig(t) => {
                if t.keys().all(|m| m.iter().all(|&v| v == 0)) {
                    Some(t.values().copied().sum())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn as_trig(&self, k: usize) -> Option<BTreeMap<Vec<i64>, Complex64>> {
        match self {
            Sym::Trig(t) => Some(t.clone()),
            _ => self.as_const().map(|c| BTreeMap::from([(vec![0; k], c)])),
        }
    }

    /// Integer frequency vector `m` with `a = factor·m`, if there is one.
    fn integer_frequencies(a: &[Complex64], factor: Complex64) -> Option<Vec<i64>> {
        a.iter()
            .map(|z| {
                let q = z / factor;
                let r = q.re.round();
                (q.im.abs() < 1e-12 && (q.re - r).abs() < 1e-12 && r.abs() < 1e6).then_some(r as i64)
            })
            .collect()
    }
}

fn trig_add(mut a: BTreeMap<Vec<i64>, Complex64>, b: BTreeMap<Vec<i64>, Complex64>, sign: f64) -> Sym {
    for (m, c) in b {
        *a.entry(m).or_insert(ZERO) += sign * c;
    }
    Sym::Trig(a)
}

fn sym_add(a: &Sym, b: &Sym, sign: f64, k: usize) -> Sym {
    if let (Sym::Lin(c1, a1), Sym::Lin(c2, a2)) = (a, b) {
        return Sym::Lin(c1 + sign * c2, a1.iter().zip(a2).map(|(p, q)| p + sign * q).collect());
    }
    match (a.as_trig(k), b.as_trig(k)) {
        (Some(p), Some(q)) => trig_add(p, q, sign),
        _ => Sym::Opaque,
    }
}

fn sym_scale(a: &Sym, z: Complex64) -> Sym {
    match a {
        Sym::Lin(c, v) => Sym::Lin(c * z, v.iter().map(|p| p * z).collect()),
        Sym::Trig(t) => Sym::Trig(t.iter().map(|(m, c)| (m.clone(), c * z)).collect()),
        Sym::Opaque => Sym::Opaque,
    }
}

fn sym_mul(a: &Sym, b: &Sym, k: usize) -> Sym {
    if let Some(z) = a.as_const() {
        return sym_scale(b, z);
    }
    if let Some(z) = b.as_const() {
        return sym_scale(a, z);
    }
    match (a.as_trig(k), b.as_trig(k)) {
        (Some(p), Some(q)) => {
            let mut out: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
            for (m1, c1) in &p {
                for (m2, c2) in &q {
                    let m: Vec<i64> = m1.iter().zip(m2).map(|(x, y)| x + y).collect();
                    *out.entry(m).or_insert(ZERO) += c1 * c2;
                }
            }
            Sym::Trig(out)
        }
        _ => Sym::Opaque,
    }
}

fn sym_conj(a: &Sym) -> Sym {
    match a {
        Sym::Lin(c, v) => Sym::Lin(c.conj(), v.iter().map(|z| z.conj()).collect()),
        Sym::Trig(t) => Sym::Trig(t.iter().map(|(m, c)| (m.iter().map(|v| -v).collect(), c.conj())).collect()),
        Sym::Opaque => Sym::Opaque,
    }
}

/// `e^{c0 + Σ a_d x_d}` for purely imaginary integer `a`.
fn sym_exp(a: &Sym, k: usize) -> Sym {
    if let Some(c) = a.as_const() {
        return Sym::constant(c.exp(), k);
    }
    match a {
        Sym::Lin(c0, v) => match Sym::integer_frequencies(v, Complex64::i()) {
            Some(m) => Sym::Trig(BTreeMap::from([(m, c0.exp())])),
            None => Sym::Opaque,
        },
        _ => Sym::Opaque,
    }
}

fn sym_trig_fn(a: &Sym, func: Func, k: usize) -> Sym {
    if let Some(c) = a.as_const() {
        return Sym::constant(if func == Func::Cos { c.cos() } else { c.sin() }, k);
    }
    let Sym::Lin(c0, v) = a else { return Sym::Opaque };
    let Some(m) = Sym::integer_frequencies(v, ONE) else { return Sym::Opaque };
    let neg: Vec<i64> = m.iter().map(|x| -x).collect();
    let plus = (Complex64::i() * c0).exp();
    let minus = (-Complex64::i() * c0).exp();
    let (cp, cm) = if func == Func::Cos {
        (plus * 0.5, minus * 0.5)
    } else {
        (plus / Complex64::new(0.0, 2.0), -minus / Complex64::new(0.0, 2.0))
    };
    let mut t = BTreeMap::new();
    t.insert(m, cp);
    *t.entry(neg).or_insert(ZERO) += cm;
    Sym::Trig(t)
}

#[derive(Debug, Clone)]
enum SymVal {
    Scalar(Sym),
    Matrix(usize, usize, Vec<Sym>),
}

struct Expander<'a> {
    k: usize,
    params: &'a BTreeMap<String, f64>,
}

impl Expander<'_> {
    fn matmul(&self, (r1, c1, a): (usize, usize, &[Sym]), (_, c2, b): (usize, usize, &[Sym])) -> SymVal {
        let mut out = Vec::with_capacity(r1 * c2);
        for i in 0..r1 {
            for j in 0..c2 {
                let mut acc = Sym::constant(ZERO, self.k);
                for l in 0..c1 {
                    acc = sym_add(&acc, &sym_mul(&a[i * c1 + l], &b[l * c2 + j], self.k), 1.0, self.k);
                }
                out.push(acc);
            }
        }
        SymVal::Matrix(r1, c2, out)
    }

    fn transpose(r: usize, c: usize, a: &[Sym]) -> SymVal {
        let mut out = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                out.push(a[i * c + j].clone());
            }
        }
        SymVal::Matrix(c, r, out)
    }

    fn expand(&self, e: &Expr) -> SymVal {
        use SymVal::*;
        let k = self.k;
        match e {
            Expr::Num(v) => Scalar(Sym::constant(Complex64::new(*v, 0.0), k)),
            Expr::ImagUnit => Scalar(Sym::constant(Complex64::i(), k)),
            Expr::Pi => Scalar(Sym::constant(Complex64::new(PI, 0.0), k)),
            Expr::Param(p) => Scalar(self.params.get(p).map_or(Sym::Opaque, |v| Sym::constant(Complex64::new(*v, 0.0), k))),
            Expr::Var(d) => {
                let mut a = vec![ZERO; k];
                a[*d] = ONE;
                Scalar(Sym::Lin(ZERO, a))
            }
            Expr::Neg(inner) => match self.expand(inner) {
                Scalar(s) => Scalar(sym_scale(&s, -ONE)),
                Matrix(r, c, v) => Matrix(r, c, v.iter().map(|s| sym_scale(s, -ONE)).collect()),
            },
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.expand(a), self.expand(b));
                match (op, a, b) {
                    (BinOp::Add | BinOp::Sub, Scalar(p), Scalar(q)) => {
                        Scalar(sym_add(&p, &q, if *op == BinOp::Add { 1.0 } else { -1.0 }, k))
                    }
                    (BinOp::Add | BinOp::Sub, Matrix(r, c, p), Matrix(_, _, q)) => {
                        let sign = if *op == BinOp::Add { 1.0 } else { -1.0 };
                        Matrix(r, c, p.iter().zip(&q).map(|(x, y)| sym_add(x, y, sign, k)).collect())
                    }
                    (BinOp::Mul, Scalar(p), Scalar(q)) => Scalar(sym_mul(&p, &q, k)),
                    (BinOp::Mul, Scalar(z), Matrix(r, c, m)) | (BinOp::Mul, Matrix(r, c, m), Scalar(z)) => {
                        Matrix(r, c, m.iter().map(|x| sym_mul(&z, x, k)).collect())
                    }
                    (BinOp::Mul, Matrix(r1, c1, p), Matrix(r2, c2, q)) => self.matmul((r1, c1, &p), (r2, c2, &q)),
                    (BinOp::Div, num, Scalar(den)) => {
                        let inv = match den.as_const() {
                            Some(c) if c != ZERO => Sym::constant(ONE / c, k),
                            _ => Sym::Opaque,
                        };
                        match num {
                            Scalar(p) => Scalar(sym_mul(&p, &inv, k)),
                            Matrix(r, c, m) => Matrix(r, c, m.iter().map(|x| sym_mul(x, &inv, k)).collect()),
                        }
                    }
                    _ => Scalar(Sym::Opaque),
                }
            }
            Expr::Pow(base, n) => match self.expand(base) {
                Scalar(s) => {
                    if *n < 0 {
                        Scalar(match s.as_const() {
                            Some(c) if c != ZERO => Sym::constant(powi(c, *n), k),
                            _ => Sym::Opaque,
                        })
                    } else {
                        let mut acc = Sym::constant(ONE, k);
                        for _ in 0..*n {
                            acc = sym_mul(&acc, &s, k);
                        }
                        Scalar(acc)
                    }
                }
                Matrix(r, c, m) => {
                    let mut acc: Vec<Sym> = (0..r * c)
                        .map(|idx| Sym::constant(if idx / c == idx % c { ONE } else { ZERO }, k))
                        .collect();
                    for _ in 0..*n {
                        let SymVal::Matrix(_, _, next) = self.matmul((r, c, &acc), (r, c, &m)) else { unreachable!() };
                        acc = next;
                    }
                    Matrix(r, c, acc)
                }
            },
            Expr::Call(func, args) => {
                let vals: Vec<SymVal> = args.iter().map(|a| self.expand(a)).collect();
                match (func, vals.as_slice()) {
                    (Func::Exp, [Scalar(s)]) => Scalar(sym_exp(s, k)),
                    (Func::Cos | Func::Sin, [Scalar(s)]) => Scalar(sym_trig_fn(s, *func, k)),
                    (Func::Conj, [Scalar(s)]) => Scalar(sym_conj(s)),
                    (Func::Conj, [Matrix(r, c, m)]) => Matrix(*r, *c, m.iter().map(sym_conj).collect()),
                    (Func::Transpose, [Scalar(s)]) => Scalar(s.clone()),
                    (Func::Transpose, [Matrix(r, c, m)]) => Self::transpose(*r, *c, m),
                    (Func::Sandwich, [q, a]) => {
                        let as_mat = |v: &SymVal| match v {
                            Scalar(s) => (1, 1, vec![s.clone()]),
                            Matrix(r, c, m) => (*r, *c, m.clone()),
                        };
                        let (qr, qc, qm) = as_mat(q);
                        let (ar, ac, am) = as_mat(a);
                        let SymVal::Matrix(_, _, qa) = self.matmul((qr, qc, &qm), (ar, ac, &am)) else { unreachable!() };
                        let SymVal::Matrix(tr, tc, qt) = Self::transpose(qr, qc, &qm) else { unreachable!() };
                        self.matmul((qr, ac, &qa), (tr, tc, &qt))
                    }
                    _ => Scalar(Sym::Opaque),
                }
            }
            Expr::Matrix(rows) => {
                let (r, c) = (rows.len(), rows[0].len());
                let entries = rows
                    .iter()
                    .flatten()
                    .map(|e| match self.expand(e) {
                        Scalar(s) => s,
                        Matrix(..) => Sym::Opaque,
                    })
                    .collect();
                Matrix(r, c, entries)
            }
        }
    }
}

/// Fixed probe points used to detect identically vanishing denominators.
fn probe_points(k: usize) -> Vec<Vec<f64>> {
    const P: [f64; 7] = [0.0, 0.713, -1.377, 2.291, -2.903, 1.119, -0.421];
    (0..P.len()).map(|t| (0..k).map(|d| P[(t + 3 * d) % P.len()]).collect()).collect()
}

fn denominators(expr: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    expr.walk(&mut |e| match e {
        Expr::Binary(BinOp::Div, _, den) => out.push((**den).clone()),
        Expr::Pow(base, n) if *n < 0 => out.push((**base).clone()),
        _ => {}
    });
    out
}

fn scalar_at(e: &Expr, x: &[f64], params: &BTreeMap<String, f64>) -> Option<Complex64> {
    match interpret(e, x, params).ok()? {
        Value::Scalar(z) => Some(z),
        Value::Matrix(_) => None,
    }
}

/// Zeros of `|den|` on `[-π, π]`: local minima of a fine scan, refined by golden section.
fn scalar_zeros(den: &Expr, params: &BTreeMap<String, f64>) -> Vec<f64> {
    const N: usize = 4096;
    let phi = |x: f64| scalar_at(den, &[x], params).map_or(f64::INFINITY, |z| z.norm());
    let xs: Vec<f64> = (0..=N).map(|t| -PI + 2.0 * PI * t as f64 / N as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
    let scale = vals.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max).max(1.0);
    let mut zeros: Vec<f64> = Vec::new();
    for t in 0..=N {
        let left = if t == 0 { f64::INFINITY } else { vals[t - 1] };
        let right = if t == N { f64::INFINITY } else { vals[t + 1] };
        if !(vals[t] <= left && vals[t] <= right) {
            continue;
        }
        let (mut a, mut b) = (xs[t.saturating_sub(1)], xs[(t + 1).min(N)]);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fd) = (phi(c), phi(d));
        for _ in 0..200 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = phi(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = phi(d);
            }
            if b - a < 1e-15 {
                break;
            }
        }
        let mut x = 0.5 * (a + b);
        // snap to a nearby short decimal if that is at least as good
        let snapped = (x * 1e9).round() / 1e9;
        if phi(snapped) <= phi(x) {
            x = snapped;
        }
        if phi(x) <= 1e-10 * scale && !zeros.iter().any(|z| (z - x).abs() < 1e-8) {
            zeros.push(x);
        }
    }
    zeros
}

/// Compiles a parsed expression into an `s×s` symbol of `k` variables.
pub fn compile(expr: &Expr, k: usize, s: usize, params: &BTreeMap<String, f64>) -> Result<MatrixSymbol> {
    let shape = expr
        .shape()
        .map_err(|(kind, msg)| DslError::new(kind, Pos::default(), expr.to_string(), msg))?;
    if shape.dims() != (s, s) {
        return Err(DslError::new(
            DslErrorKind::DimensionMismatch,
            Pos::default(),
            shape.to_string(),
            format!("expression is a {shape}, expected {s}x{s}"),
        )
        .into());
    }
    let mut max_var = 0;
    expr.walk(&mut |e| {
        if let Expr::Var(d) = e {
            max_var = max_var.max(*d + 1);
        }
    });
    if max_var > k {
        return Err(DslError::new(
            DslErrorKind::Type,
            Pos::default(),
            format!("x{max_var}"),
            format!("variable not declared for k = {k}"),
        )
        .into());
    }
    for p in expr.params() {
        if !params.contains_key(&p) {
            return Err(DslError::new(DslErrorKind::UnknownParameter, Pos::default(), p, "no value supplied").into());
        }
    }
    let dens = denominators(expr);
    for den in &dens {
        let all_zero = probe_points(k)
            .iter()
            .all(|x| scalar_at(den, x, params).is_some_and(|z| z.norm() <= 1e-14));
        if all_zero {
            return Err(DslError::new(
                DslErrorKind::DivisionByZero,
                Pos::default(),
                den.to_string(),
                "denominator vanishes identically",
            )
            .into());
        }
    }

    let expander = Expander { k, params };
    let entries = match expander.expand(expr) {
        SymVal::Scalar(sym) => vec![sym],
        SymVal::Matrix(_, _, v) => v,
    };
    let tables: Option<Vec<BTreeMap<Vec<i64>, Complex64>>> = entries.iter().map(|e| e.as_trig(k)).collect();
    let sym = match tables {
        Some(tables) => {
            let mut by_index: BTreeMap<Vec<i64>, ComplexMatrix> = BTreeMap::new();
            for (pos, t) in tables.iter().enumerate() {
                for (m, c) in t {
                    let entry = by_index.entry(m.clone()).or_insert_with(|| ComplexMatrix::zeros(s, s));
                    entry.as_mut_slice()[pos] += *c;
                }
            }
            let coeffs = by_index
                .into_iter()
                .map(|(m, c)| Ok((MultiIndex::new(m)?, c)))
                .collect::<Result<Vec<_>>>()?;
            MatrixSymbol::trig(k, s, coeffs)?
        }
        None => {
            let tree = Arc::new(expr.clone());
            let values = params.clone();
            let mut singular = Vec::new();
            if k == 1 {
                for den in &dens {
                    for z in scalar_zeros(den, params) {
                        if !singular.iter().any(|p: &Vec<f64>| (p[0] - z).abs() < 1e-8) {
                            singular.push(vec![z]);
                        }
                    }
                }
                singular.sort_by(|a, b| a[0].total_cmp(&b[0]));
            }
            MatrixSymbol::general(
                k,
                s,
                Arc::new(move |x: &[f64]| {
                    let v = interpret(&tree, x, &values).map_err(Error::Dsl)?;
                    let m = v.into_matrix();
                    if m.is_finite() {
                        Ok(m)
                    } else {
                        Err(Error::SingularSymbol { x: x.to_vec() })
                    }
                }),
            )?
            .with_singular_points(singular)
        }
    };
    Ok(sym.with_expression(expr.to_string(), params.clone()))
}

/// Parses and compiles `text`, keeping the original text as the symbol's expression.
pub fn compile_text(text: &str, k: usize, s: usize, params: &BTreeMap<String, f64>) -> Result<MatrixSymbol> {
    let expr = parse(text, k)?;
    let sym = compile(&expr, k, s, params)?;
    Ok(sym.with_expression(text.to_string(), params.clone()))
}

fn real_literal(v: f64) -> String {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        format!("(-{:?})", -v)
    } else {
        format!("{v:?}")
    }
}

/// DSL text for a complex constant.
pub(crate) fn complex_literal(z: Complex64) -> String {
    format!("({} + {}*i)", real_literal(z.re), real_literal(z.im))
}

/// DSL matrix literal reproducing a coefficient table.
pub(crate) fn trig_table_to_text(table: &TrigTable, s: usize) -> String {
    let mut rows = Vec::with_capacity(s);
    for a in 0..s {
        let mut cols = Vec::with_capacity(s);
        for b in 0..s {
            let terms: Vec<String> = table
                .iter()
                .filter(|(_, c)| c[(a, b)] != ZERO)
                .map(|(j, c)| {
                    let lin: Vec<String> = j
                        .as_slice()
                        .iter()
                        .enumerate()
                        .filter(|(_, &v)| v != 0)
                        .map(|(d, &v)| format!("{}*x{}", real_literal(v as f64), d + 1))
                        .collect();
                    if lin.is_empty() {
                        complex_literal(c[(a, b)])
                    } else {
                        format!("{}*exp(i*({}))", complex_literal(c[(a, b)]), lin.join(" + "))
                    }
                })
                .collect();
            cols.push(if terms.is_empty() { "0".to_string() } else { terms.join(" + ") });
        }
        rows.push(format!("[{}]", cols.join(", ")));
    }
    format!("[{}]", rows.join(", "))
}
