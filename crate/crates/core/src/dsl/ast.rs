use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Cos,
    Sin,
    Exp,
    Conj,
    Transpose,
    /// Real part reduced to `[0, 2π)`.
    Wrap,
    /// `sandwich(Q, A) = Q·A·Qᵀ`
    Sandwich,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Cos => "cos",
            Func::Sin => "sin",
            Func::Exp => "exp",
            Func::Conj => "conj",
            Func::Transpose => "transpose",
            Func::Wrap => "wrap",
            Func::Sandwich => "sandwich",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "cos" => Func::Cos,
            "sin" => Func::Sin,
            "exp" => Func::Exp,
            "conj" => Func::Conj,
            "transpose" => Func::Transpose,
            "wrap" => Func::Wrap,
            "sandwich" => Func::Sandwich,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        if self == Func::Sandwich {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Non-negative real literal.
    Num(f64),
    ImagUnit,
    Pi,
    /// Zero-based variable index (`x1` is `Var(0)`).
    Var(usize),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Vec<Expr>),
    Matrix(Vec<Vec<Expr>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Matrix(usize, usize),
}

impl Shape {
    pub fn dims(self) -> (usize, usize) {
        match self {
            Shape::Scalar => (1, 1),
            Shape::Matrix(r, c) => (r, c),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Scalar => f.write_str("scalar"),
            Shape::Matrix(r, c) => write!(f, "{r}x{c} matrix"),
        }
    }
}

/// Fully parenthesized text that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::ImagUnit => f.write_str("i"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(d) => write!(f, "x{}", d + 1),
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(e, n) => write!(f, "({e}^{n})"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Matrix(rows) => {
                f.write_str("[")?;
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str("[")?;
                    for (j, e) in row.iter().enumerate() {
                        if j > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{e}")?;
                    }
                    f.write_str("]")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl Expr {
    /// Visits every node, parents before children.
    pub fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        match self {
            Expr::Neg(e) | Expr::Pow(e, _) => e.walk(visit),
            Expr::Binary(_, a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(visit)),
            Expr::Matrix(rows) => rows.iter().flatten().for_each(|a| a.walk(visit)),
            _ => {}
        }
    }

    pub fn params(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    /// Result shape, or a description of the first typing violation.
    pub fn shape(&self) -> Result<Shape, (super::DslErrorKind, String)> {
        use super::DslErrorKind as K;
        match self {
            Expr::Num(_) | Expr::ImagUnit | Expr::Pi | Expr::Var(_) | Expr::Param(_) => Ok(Shape::Scalar),
            Expr::Neg(e) => e.shape(),
            Expr::Binary(op, a, b) => combine_binary(*op, a.shape()?, b.shape()?),
            Expr::Pow(e, n) => combine_pow(e.shape()?, *n),
            Expr::Call(func, args) => {
                let shapes = args.iter().map(|a| a.shape()).collect::<Result<Vec<_>, _>>()?;
                combine_call(*func, &shapes)
            }
            Expr::Matrix(rows) => {
                let cols = rows.first().map_or(0, |r| r.len());
                for row in rows {
                    if row.len() != cols {
                        return Err((K::DimensionMismatch, format!("ragged matrix: rows of length {cols} and {}", row.len())));
                    }
                    for e in row {
                        if e.shape()? != Shape::Scalar {
                            return Err((K::Type, "matrix entries must be scalars".into()));
                        }
                    }
                }
                if rows.is_empty() || cols == 0 {
                    return Err((K::DimensionMismatch, "empty matrix".into()));
                }
                Ok(Shape::Matrix(rows.len(), cols))
            }
        }
    }
}

pub(crate) fn combine_binary(op: BinOp, a: Shape, b: Shape) -> Result<Shape, (super::DslErrorKind, String)> {
    use super::DslErrorKind as K;
    use Shape::*;
    match (op, a, b) {
        (_, Scalar, Scalar) => Ok(Scalar),
        (BinOp::Add | BinOp::Sub, Matrix(r1, c1), Matrix(r2, c2)) => {
            if (r1, c1) == (r2, c2) {
                Ok(a)
            } else {
                Err((K::DimensionMismatch, format!("cannot add {a} and {b}")))
            }
        }
        (BinOp::Add | BinOp::Sub, _, _) => Err((K::Type, format!("cannot add {a} and {b}"))),
        (BinOp::Mul, Scalar, m) | (BinOp::Mul, m, Scalar) => Ok(m),
        (BinOp::Mul, Matrix(r1, c1), Matrix(r2, c2)) => {
            if c1 == r2 {
                Ok(Matrix(r1, c2))
            } else {
                Err((K::DimensionMismatch, format!("cannot multiply {a} by {b}")))
            }
        }
        (BinOp::Div, m, Scalar) => Ok(m),
        (BinOp::Div, _, _) => Err((K::Type, format!("cannot divide {a} by {b}"))),
    }
}

pub(crate) fn combine_pow(base: Shape, n: i32) -> Result<Shape, (super::DslErrorKind, String)> {
    use super::DslErrorKind as K;
    match base {
        Shape::Scalar => Ok(base),
        Shape::Matrix(r, c) if r == c && n >= 0 => Ok(base),
        Shape::Matrix(..) => Err((K::Type, format!("cannot raise {base} to the power {n}"))),
    }
}

pub(crate) fn combine_call(func: Func, args: &[Shape]) -> Result<Shape, (super::DslErrorKind, String)> {
    use super::DslErrorKind as K;
    if args.len() != func.arity() {
        return Err((
            K::Syntax,
            format!("{} takes {} argument(s), got {}", func.name(), func.arity(), args.len()),
        ));
    }
    match func {
        Func::Cos | Func::Sin | Func::Exp | Func::Wrap => {
            if args[0] == Shape::Scalar {
                Ok(Shape::Scalar)
            } else {
                Err((K::Type, format!("{} needs a scalar argument, got {}", func.name(), args[0])))
            }
        }
        Func::Conj => Ok(args[0]),
        Func::Transpose => Ok(match args[0] {
            Shape::Scalar => Shape::Scalar,
            Shape::Matrix(r, c) => Shape::Matrix(c, r),
        }),
        Func::Sandwich => {
            let (qr, qc) = args[0].dims();
            let (ar, ac) = args[1].dims();
            if ar != ac || qc != ar {
                Err((K::DimensionMismatch, format!("sandwich of {} around {}", args[0], args[1])))
            } else if args[0] == Shape::Scalar && args[1] == Shape::Scalar {
                Ok(Shape::Scalar)
            } else {
                Ok(Shape::Matrix(qr, qr))
            }
        }
    }
}
