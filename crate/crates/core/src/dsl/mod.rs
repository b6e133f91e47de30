//! A small expression language for matrix symbols, e.g.
//! `sandwich([[cos(x), sin(x)], [-sin(x), cos(x)]], [[2 + i + cos(x), 0], [1, 5 + r*exp(i*x)]])`.
//!
//! Precedence: `^` (integer exponents) binds tighter than unary minus, which
//! binds tighter than `*` `/`, then `+` `-`. Variables are `x1..x3` (`x` means
//! `x1` when k = 1); `i` is the imaginary unit, `pi` is π; any other bare
//! identifier is a parameter supplied at compile time. Functions: `cos`, `sin`,
//! `exp`, `conj`, `transpose`, `sandwich(Q, A)` and `wrap(t)`, which reduces
//! the real part of `t` to `[0, 2π)`.

mod ast;
mod compile;
mod interp;
mod lexer;
mod parser;

use std::fmt;

pub use ast::{BinOp, Expr, Func, Shape};
pub use compile::{compile, compile_text};
pub use interp::{interpret, Value};
pub use parser::parse;

pub(crate) use compile::{complex_literal, trig_table_to_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DslErrorKind {
    Lexical,
    Syntax,
    Type,
    DimensionMismatch,
    UnknownParameter,
    DivisionByZero,
}

impl fmt::Display for DslErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DslErrorKind::Lexical => "lexical error",
            DslErrorKind::Syntax => "syntax error",
            DslErrorKind::Type => "type error",
            DslErrorKind::DimensionMismatch => "dimension mismatch",
            DslErrorKind::UnknownParameter => "unknown parameter",
            DslErrorKind::DivisionByZero => "division by zero",
        };
        f.write_str(s)
    }
}

/// Error with a 1-based source position (0 when the error has no location).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} at {line}:{column} near '{token}': {message}")]
pub struct DslError {
    pub kind: DslErrorKind,
    pub line: usize,
    pub column: usize,
    pub token: String,
    pub message: String,
}

impl DslError {
    pub(crate) fn new(kind: DslErrorKind, pos: Pos, token: impl Into<String>, message: impl Into<String>) -> Self {
        DslError {
            kind,
            line: pos.line,
            column: pos.column,
            token: token.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}
