use super::ast::{combine_binary, combine_call, combine_pow, BinOp, Expr, Func, Shape};
use super::lexer::{tokenize, Tok, Token};
use super::{DslError, DslErrorKind, Pos};

/// Parses `text` for a symbol of `k` variables, checking shapes as it goes.
pub fn parse(text: &str, k: usize) -> Result<Expr, DslError> {
    if text.trim().is_empty() {
        return Err(DslError::new(DslErrorKind::Syntax, Pos { line: 1, column: 1 }, "", "empty expression"));
    }
    if !(1..=3).contains(&k) {
        return Err(DslError::new(
            DslErrorKind::Type,
            Pos::default(),
            k.to_string(),
            "number of variables must be 1..=3",
        ));
    }
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, at: 0, k };
    let (expr, _) = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::Eof {
        return Err(p.error_at(DslErrorKind::Syntax, t.clone(), "unexpected token after expression"));
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    k: usize,
}

type Typed = (Expr, Shape);

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn error_at(&self, kind: DslErrorKind, t: Token, msg: impl Into<String>) -> DslError {
        DslError::new(kind, t.pos, t.text, msg)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, DslError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(self.error_at(DslErrorKind::Syntax, t, format!("expected {what}")))
        }
    }

    fn typed(
        &self,
        at: &Token,
        expr: Expr,
        shape: Result<Shape, (DslErrorKind, String)>,
    ) -> Result<Typed, DslError> {
        match shape {
            Ok(s) => Ok((expr, s)),
            Err((kind, msg)) => Err(self.error_at(kind, at.clone(), msg)),
        }
    }

    fn expr(&mut self) -> Result<Typed, DslError> {
        let (mut lhs, mut shape) = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok((lhs, shape)),
            };
            let at = self.next();
            let (rhs, rs) = self.term()?;
            let combined = combine_binary(op, shape, rs);
            (lhs, shape) = self.typed(&at, Expr::Binary(op, Box::new(lhs), Box::new(rhs)), combined)?;
        }
    }

    fn term(&mut self) -> Result<Typed, DslError> {
        let (mut lhs, mut shape) = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok((lhs, shape)),
            };
            let at = self.next();
            let (rhs, rs) = self.unary()?;
            let combined = combine_binary(op, shape, rs);
            (lhs, shape) = self.typed(&at, Expr::Binary(op, Box::new(lhs), Box::new(rhs)), combined)?;
        }
    }

    fn unary(&mut self) -> Result<Typed, DslError> {
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                let (e, s) = self.unary()?;
                Ok((Expr::Neg(Box::new(e)), s))
            }
            Tok::Plus => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Typed, DslError> {
        let (base, shape) = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok((base, shape));
        }
        let at = self.next();
        let negative = match self.peek().tok {
            Tok::Minus => {
                self.next();
                true
            }
            Tok::Plus => {
                self.next();
                false
            }
            _ => false,
        };
        let t = self.next();
        let n = match t.tok {
            Tok::Number(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
            _ => return Err(self.error_at(DslErrorKind::Syntax, t, "exponent must be an integer literal")),
        };
        let n = if negative { -n } else { n };
        let combined = combine_pow(shape, n);
        self.typed(&at, Expr::Pow(Box::new(base), n), combined)
    }

    fn primary(&mut self) -> Result<Typed, DslError> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Number(v) => Ok((Expr::Num(v), Shape::Scalar)),
            Tok::Imag(v) => Ok((
                Expr::Binary(BinOp::Mul, Box::new(Expr::Num(v)), Box::new(Expr::ImagUnit)),
                Shape::Scalar,
            )),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::LBracket => self.matrix(t),
            Tok::Ident(name) => self.identifier(t, &name),
            _ => Err(self.error_at(DslErrorKind::Syntax, t, "expected a value")),
        }
    }

    fn identifier(&mut self, t: Token, name: &str) -> Result<Typed, DslError> {
        if let Some(func) = Func::from_name(name) {
            self.expect(Tok::LParen, &format!("'(' after {name}"))?;
            let mut args = Vec::new();
            let mut shapes = Vec::new();
            if self.peek().tok != Tok::RParen {
                loop {
                    let (e, s) = self.expr()?;
                    args.push(e);
                    shapes.push(s);
                    if self.peek().tok == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "')'")?;
            let combined = combine_call(func, &shapes);
            return self.typed(&t, Expr::Call(func, args), combined);
        }
        if self.peek().tok == Tok::LParen {
            return Err(self.error_at(DslErrorKind::Syntax, t, format!("unknown function '{name}'")));
        }
        let expr = match name {
            "i" => Expr::ImagUnit,
            "pi" => Expr::Pi,
            "x" if self.k == 1 => Expr::Var(0),
            "x" => {
                return Err(self.error_at(
                    DslErrorKind::Type,
                    t,
                    "'x' is only an alias for x1 when there is one variable",
                ))
            }
            _ => match variable_index(name) {
                Some(d) if d < self.k => Expr::Var(d),
                Some(_) => {
                    return Err(self.error_at(
                        DslErrorKind::Type,
                        t,
                        format!("variable {name} not declared for k = {}", self.k),
                    ))
                }
                None => Expr::Param(name.to_string()),
            },
        };
        Ok((expr, Shape::Scalar))
    }

    fn matrix(&mut self, _open: Token) -> Result<Typed, DslError> {
        let mut rows: Vec<Vec<Expr>> = Vec::new();
        loop {
            let row_open = self.expect(Tok::LBracket, "'[' starting a matrix row")?;
            let mut row = Vec::new();
            loop {
                let at = self.peek().clone();
                let (e, s) = self.expr()?;
                if s != Shape::Scalar {
                    return Err(self.error_at(DslErrorKind::Type, at, "matrix entries must be scalars"));
                }
                row.push(e);
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBracket, "']' closing a matrix row")?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(self.error_at(
                        DslErrorKind::DimensionMismatch,
                        row_open,
                        format!("row has {} entries, expected {}", row.len(), first.len()),
                    ));
                }
            }
            rows.push(row);
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::RBracket, "']' closing the matrix")?;
        let shape = Shape::Matrix(rows.len(), rows[0].len());
        Ok((Expr::Matrix(rows), shape))
    }
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    let d: usize = digits.parse().ok()?;
    (d >= 1 && !digits.starts_with('0')).then(|| d - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_term_sum() {
        let e = parse("2+i+cos(x1)", 1).unwrap();
        let want = Expr::Binary(
            BinOp::Add,
            Box::new(Expr::Binary(BinOp::Add, Box::new(Expr::Num(2.0)), Box::new(Expr::ImagUnit))),
            Box::new(Expr::Call(Func::Cos, vec![Expr::Var(0)])),
        );
        assert_eq!(e, want);
        assert_eq!(e.shape().unwrap(), Shape::Scalar);
    }

    #[test]
    fn matrix_literal() {
        let e = parse("[[1-exp(i*x1),0],[0,1]]", 1).unwrap();
        assert_eq!(e.shape().unwrap(), Shape::Matrix(2, 2));
    }

    #[test]
    fn ragged_matrix_rejected() {
        let err = parse("[[1,2],[3]]", 1).unwrap_err();
        assert_eq!(err.kind, DslErrorKind::DimensionMismatch);
        assert_eq!((err.line, err.column), (1, 8));
    }

    #[test]
    fn precedence() {
        // -x^2 = -(x^2); 2*3^2 = 2*(3^2); a-b-c = (a-b)-c
        assert_eq!(
            parse("-x^2", 1).unwrap(),
            Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::Var(0)), 2)))
        );
        assert_eq!(parse("1-2-3", 1).unwrap().to_string(), "((1.0 - 2.0) - 3.0)");
        assert_eq!(parse("1+2*3/4", 1).unwrap().to_string(), "(1.0 + ((2.0 * 3.0) / 4.0))");
        assert_eq!(parse("x^-2", 1).unwrap(), Expr::Pow(Box::new(Expr::Var(0)), -2));
    }

    #[test]
    fn errors_carry_location_and_token() {
        let e = parse("1 +\n  * 2", 1).unwrap_err();
        assert_eq!((e.kind, e.line, e.column, e.token.as_str()), (DslErrorKind::Syntax, 2, 3, "*"));
        let e = parse("cos(x2)", 1).unwrap_err();
        assert_eq!(e.kind, DslErrorKind::Type);
        let e = parse("foo(x)", 1).unwrap_err();
        assert!(e.message.contains("unknown function"));
        let e = parse("x^1.5", 1).unwrap_err();
        assert_eq!(e.token, "1.5");
        assert!(parse("(1+2", 1).is_err());
        assert!(parse("   ", 1).is_err());
    }

    #[test]
    fn shape_errors() {
        assert_eq!(parse("[[1,2]]*[[1,2]]", 1).unwrap_err().kind, DslErrorKind::DimensionMismatch);
        assert_eq!(parse("1+[[1]]", 1).unwrap_err().kind, DslErrorKind::Type);
        assert_eq!(parse("cos([[1]])", 1).unwrap_err().kind, DslErrorKind::Type);
        assert_eq!(parse("1/[[1]]", 1).unwrap_err().kind, DslErrorKind::Type);
        assert_eq!(parse("[[[[1]]]]", 1).unwrap_err().kind, DslErrorKind::Type);
        assert_eq!(
            parse("sandwich([[1,0],[0,1]], [[1,2],[3,4]])", 1).unwrap().shape().unwrap(),
            Shape::Matrix(2, 2)
        );
        assert_eq!(parse("[[1,2]]*[[1],[2]]", 1).unwrap().shape().unwrap(), Shape::Matrix(1, 1));
    }

    #[test]
    fn variables_and_params() {
        assert_eq!(parse("x", 1).unwrap(), Expr::Var(0));
        assert!(parse("x", 2).is_err());
        assert_eq!(parse("x2", 2).unwrap(), Expr::Var(1));
        assert_eq!(parse("r", 1).unwrap(), Expr::Param("r".into()));
        assert_eq!(parse("x0", 1).unwrap(), Expr::Param("x0".into()));
        assert_eq!(parse("3i", 1).unwrap().to_string(), "(3.0 * i)");
    }
}
