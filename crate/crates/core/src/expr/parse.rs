//! Recursive-descent parser for the expression DSL.
//!
//! ```text
//! expr  := term (('+'|'-') term)*
//! term  := unary (('*'|'/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' integer)*          -- right associative
//! atom  := number | ident | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | exp
//! ```
//!
//! Exponents are integer literals, optionally negated. `pi` is reserved and
//! denotes the constant π.

use std::f64::consts::PI;

use super::Expr;
use crate::error::ParseError;

const FUNCTIONS: [&str; 3] = ["sin", "cos", "exp"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { text: String, integral: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num { text, .. } => format!("number `{text}`"),
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let mut integral = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integral = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                if text == "." {
                    return Err(ParseError {
                        position: start,
                        expected: "number".into(),
                        found: "`.`".into(),
                    });
                }
                out.push((start, Tok::Num { text: text.to_string(), integral }));
                continue;
            }
            c if c == b'_' || c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i] == b'_' || bytes[i].is_ascii_alphanumeric()) {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    position: start,
                    expected: "expression".into(),
                    found: format!("character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.offset(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(lhs.into(), self.term()?.into());
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(lhs.into(), self.term()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(lhs.into(), self.unary()?.into());
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(lhs.into(), self.unary()?.into());
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(self.unary()?.into()));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let mut exponents = Vec::new();
        while *self.peek() == Tok::Caret {
            self.bump();
            exponents.push(self.integer_exponent()?);
        }
        // a^b^c = a^(b^c): fold the exponent tower from the right.
        let (_, mut exponent) = exponents.pop().expect("at least one exponent");
        while let Some((pos, lower)) = exponents.pop() {
            exponent = integer_power(lower, exponent).ok_or_else(|| ParseError {
                position: pos,
                expected: "integer exponent".into(),
                found: format!("non-integer exponent tower {lower}^{exponent}"),
            })?;
        }
        Ok(Expr::Pow(base.into(), exponent))
    }

    fn integer_exponent(&mut self) -> Result<(usize, i32), ParseError> {
        let start = self.offset();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num { text, integral: true } => {
                let magnitude: i64 = text.parse().map_err(|_| self.error("integer exponent"))?;
                let value = if negative { -magnitude } else { magnitude };
                let value = i32::try_from(value).map_err(|_| self.error("integer exponent in range"))?;
                self.bump();
                Ok((start, value))
            }
            Tok::Num { .. } => Err(ParseError {
                position: self.offset(),
                expected: "integer exponent".into(),
                found: format!("fractional exponent {}", self.peek().describe()),
            }),
            _ => Err(self.error("integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        match self.bump() {
            Tok::Num { text, .. } => {
                let value: f64 = text.parse().map_err(|_| ParseError {
                    position: start,
                    expected: "number".into(),
                    found: format!("`{text}`"),
                })?;
                Ok(Expr::Const(value))
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    if !FUNCTIONS.contains(&name.as_str()) {
                        return Err(ParseError {
                            position: start,
                            expected: "one of sin, cos, exp".into(),
                            found: format!("unknown function `{name}`"),
                        });
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(match name.as_str() {
                        "sin" => Expr::Sin(arg.into()),
                        "cos" => Expr::Cos(arg.into()),
                        _ => Expr::Exp(arg.into()),
                    })
                } else if FUNCTIONS.contains(&name.as_str()) {
                    Err(self.error("`(` after function name"))
                } else if name == "pi" {
                    Ok(Expr::Const(PI))
                } else {
                    Ok(Expr::coord(&name))
                }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            tok => Err(ParseError {
                position: start,
                expected: "number, identifier, function or `(`".into(),
                found: tok.describe(),
            }),
        }
    }
}

fn integer_power(base: i32, exponent: i32) -> Option<i32> {
    if exponent >= 0 {
        base.checked_pow(exponent as u32)
    } else {
        match base {
            1 => Some(1),
            -1 => Some(if exponent % 2 == 0 { 1 } else { -1 }),
            _ => None,
        }
    }
}

/// Parses a DSL expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser { toks, pos: 0 };
    let e = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error("operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn c(v: f64) -> Arc<Expr> {
        Arc::new(Expr::Const(v))
    }

    fn v(n: &str) -> Arc<Expr> {
        Arc::new(Expr::coord(n))
    }

    #[test]
    fn grammar_forced_trees() {
        assert_eq!(parse("2*y").unwrap(), Expr::Mul(c(2.0), v("y")));
        let expected = Expr::Mul(
            Arc::new(Expr::Mul(v("y"), Arc::new(Expr::Sub(c(1.0), Arc::new(Expr::Pow(v("y"), 2)))))),
            Arc::new(Expr::Exp(v("x"))),
        );
        assert_eq!(parse("y*(1-y^2)*exp(x)").unwrap(), expected);
        assert_eq!(
            parse("exp(p)*cos(phi)").unwrap(),
            Expr::Mul(Arc::new(Expr::Exp(v("p"))), Arc::new(Expr::Cos(v("phi"))))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // unary minus binds looser than ^
        assert_eq!(parse("-x^2").unwrap(), Expr::Neg(Arc::new(Expr::Pow(v("x"), 2))));
        // left associative subtraction
        assert_eq!(parse("a-b-c").unwrap(), Expr::Sub(Arc::new(Expr::Sub(v("a"), v("b"))), v("c")));
        // right associative power tower of integers
        assert_eq!(parse("x^2^3").unwrap(), Expr::Pow(v("x"), 8));
        assert_eq!(parse("x^-1").unwrap(), Expr::Pow(v("x"), -1));
        assert_eq!(parse("pi").unwrap(), Expr::Const(PI));
        assert_eq!(parse("1.5e2").unwrap(), Expr::Const(150.0));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("(x+1").unwrap_err();
        assert_eq!(e.position, 4);
        assert_eq!(e.found, "end of input");

        let e = parse("tan(x)").unwrap_err();
        assert_eq!(e.position, 0);
        assert!(e.found.contains("unknown function"));

        let e = parse("x^0.5").unwrap_err();
        assert_eq!(e.position, 2);
        assert!(e.found.contains("fractional"));

        let e = parse("x^y").unwrap_err();
        assert_eq!(e.position, 2);

        let e = parse("x y").unwrap_err();
        assert_eq!(e.position, 2);

        let e = parse("x $ y").unwrap_err();
        assert_eq!(e.position, 2);

        let e = parse("").unwrap_err();
        assert_eq!(e.position, 0);
    }

    #[test]
    fn error_position_within_input() {
        for src in ["", "(", "x+", "sin x", "2^", "((x)", "x)", "cos()"] {
            let e = parse(src).unwrap_err();
            assert!(e.position <= src.len(), "{src:?}: {e}");
        }
    }
}
