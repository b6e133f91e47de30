use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::ast::{BinOp, Expr, Func};
use super::{DslError, DslErrorKind, Pos};
use crate::numerics::matrix::{ComplexMatrix, ONE};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(Complex64),
    Matrix(ComplexMatrix),
}

impl Value {
    pub fn into_matrix(self) -> ComplexMatrix {
        match self {
            Value::Scalar(z) => ComplexMatrix::scalar(z),
            Value::Matrix(m) => m,
        }
    }
}

fn type_error(msg: impl Into<String>) -> DslError {
    DslError::new(DslErrorKind::Type, Pos::default(), "", msg)
}

pub(crate) fn powi(z: Complex64, n: i32) -> Complex64 {
    let mut base = if n < 0 { ONE / z } else { z };
    let mut e = n.unsigned_abs();
    let mut acc = ONE;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

fn matrix_pow(m: &ComplexMatrix, n: i32) -> Result<ComplexMatrix, DslError> {
    let mut acc = ComplexMatrix::identity(m.rows());
    for _ in 0..n {
        acc = acc.matmul(m).map_err(|e| type_error(e.to_string()))?;
    }
    Ok(acc)
}

/// Evaluates `expr` at the point `x`.
pub fn interpret(expr: &Expr, x: &[f64], params: &BTreeMap<String, f64>) -> Result<Value, DslError> {
    use Value::*;
    Ok(match expr {
        Expr::Num(v) => Scalar(Complex64::new(*v, 0.0)),
        Expr::ImagUnit => Scalar(Complex64::i()),
        Expr::Pi => Scalar(Complex64::new(PI, 0.0)),
        Expr::Var(d) => Scalar(Complex64::new(
            *x.get(*d).ok_or_else(|| type_error(format!("variable x{} not supplied", d + 1)))?,
            0.0,
        )),
        Expr::Param(name) => Scalar(Complex64::new(
            *params.get(name).ok_or_else(|| {
                DslError::new(DslErrorKind::UnknownParameter, Pos::default(), name.clone(), "no value supplied")
            })?,
            0.0,
        )),
        Expr::Neg(e) => match interpret(e, x, params)? {
            Scalar(z) => Scalar(-z),
            Matrix(m) => Matrix(m.scale(-ONE)),
        },
        Expr::Binary(op, a, b) => {
            let (a, b) = (interpret(a, x, params)?, interpret(b, x, params)?);
            let wrap = |r: crate::Result<ComplexMatrix>| r.map(Matrix).map_err(|e| type_error(e.to_string()));
            match (op, a, b) {
                (BinOp::Add, Scalar(p), Scalar(q)) => Scalar(p + q),
                (BinOp::Sub, Scalar(p), Scalar(q)) => Scalar(p - q),
                (BinOp::Mul, Scalar(p), Scalar(q)) => Scalar(p * q),
                (BinOp::Div, Scalar(p), Scalar(q)) => Scalar(p / q),
                (BinOp::Add, Matrix(p), Matrix(q)) => wrap(p.add(&q))?,
                (BinOp::Sub, Matrix(p), Matrix(q)) => wrap(p.sub(&q))?,
                (BinOp::Mul, Matrix(p), Matrix(q)) => wrap(p.matmul(&q))?,
                (BinOp::Mul, Scalar(z), Matrix(m)) | (BinOp::Mul, Matrix(m), Scalar(z)) => Matrix(m.scale(z)),
                (BinOp::Div, Matrix(m), Scalar(z)) => Matrix(m.scale(ONE / z)),
                (op, _, _) => return Err(type_error(format!("operator {} not defined for these operands", op.symbol()))),
            }
        }
        Expr::Pow(e, n) => match interpret(e, x, params)? {
            Scalar(z) => Scalar(powi(z, *n)),
            Matrix(m) if m.is_square() && *n >= 0 => Matrix(matrix_pow(&m, *n)?),
            Matrix(_) => return Err(type_error("matrix powers need a square matrix and a non-negative exponent")),
        },
        Expr::Call(func, args) => {
            let vals = args.iter().map(|a| interpret(a, x, params)).collect::<Result<Vec<_>, _>>()?;
            match (func, vals.as_slice()) {
                (Func::Cos, [Scalar(z)]) => Scalar(z.cos()),
                (Func::Sin, [Scalar(z)]) => Scalar(z.sin()),
                (Func::Exp, [Scalar(z)]) => Scalar(z.exp()),
                (Func::Wrap, [Scalar(z)]) => Scalar(Complex64::new(z.re.rem_euclid(std::f64::consts::TAU), z.im)),
                (Func::Conj, [Scalar(z)]) => Scalar(z.conj()),
                (Func::Conj, [Matrix(m)]) => Matrix(m.conj()),
                (Func::Transpose, [Scalar(z)]) => Scalar(*z),
                (Func::Transpose, [Matrix(m)]) => Matrix(m.transpose()),
                (Func::Sandwich, [q, a]) => {
                    let (q, a) = (q.clone().into_matrix(), a.clone().into_matrix());
                    let prod = q
                        .matmul(&a)
                        .and_then(|qa| qa.matmul(&q.transpose()))
                        .map_err(|e| type_error(e.to_string()))?;
                    if prod.rows() == 1 && matches!(vals.as_slice(), [Scalar(_), Scalar(_)]) {
                        Scalar(prod[(0, 0)])
                    } else {
                        Matrix(prod)
                    }
                }
                (f, _) => return Err(type_error(format!("bad arguments to {}", f.name()))),
            }
        }
        Expr::Matrix(rows) => {
            let mut data = Vec::with_capacity(rows.len() * rows[0].len());
            for row in rows {
                for e in row {
                    match interpret(e, x, params)? {
                        Scalar(z) => data.push(z),
                        Matrix(_) => return Err(type_error("matrix entries must be scalars")),
                    }
                }
            }
            Matrix(ComplexMatrix::from_vec(rows.len(), rows[0].len(), data).map_err(|e| type_error(e.to_string()))?)
        }
    })
}
