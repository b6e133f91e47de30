use super::{DslError, DslErrorKind, Pos};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Number(f64),
    /// Literal such as `3i`.
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
    pub text: String,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let ch = chars[i];
        let pos = Pos { line, column: col };
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                pos,
                text: ch.to_string(),
            });
            i += 1;
            col += 1;
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when followed by digits
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| {
                DslError::new(DslErrorKind::Lexical, pos, text.clone(), "malformed number")
            })?;
            let imag = i < chars.len()
                && chars[i] == 'i'
                && !chars.get(i + 1).is_some_and(|c| c.is_alphanumeric() || *c == '_');
            let (tok, text) = if imag {
                i += 1;
                (Tok::Imag(value), format!("{text}i"))
            } else {
                (Tok::Number(value), text)
            };
            col += text.chars().count();
            out.push(Token { tok, pos, text });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(text.clone()),
                pos,
                text,
            });
            continue;
        }
        return Err(DslError::new(
            DslErrorKind::Lexical,
            pos,
            ch.to_string(),
            "unexpected character",
        ));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
        text: "<end of input>".into(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_imaginary_literals() {
        assert_eq!(
            toks("3i+2.5e-1*x1"),
            vec![
                Tok::Imag(3.0),
                Tok::Plus,
                Tok::Number(0.25),
                Tok::Star,
                Tok::Ident("x1".into()),
                Tok::Eof
            ]
        );
        // `2exp` is a number followed by an identifier, not an exponent
        assert_eq!(toks("2exp")[..2], [Tok::Number(2.0), Tok::Ident("exp".into())]);
        assert_eq!(toks("2in")[..2], [Tok::Number(2.0), Tok::Ident("in".into())]);
    }

    #[test]
    fn positions_track_lines() {
        let t = tokenize("1 +\n  x").unwrap();
        assert_eq!(t[2].pos, Pos { line: 2, column: 3 });
    }

    #[test]
    fn bad_character() {
        let e = tokenize("1 + $").unwrap_err();
        assert_eq!((e.kind, e.line, e.column, e.token.as_str()), (DslErrorKind::Lexical, 1, 5, "$"));
    }
}
