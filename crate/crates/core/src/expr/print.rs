use std::fmt;

use super::Expr;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Const(c) if c.is_sign_negative() => UNARY,
        Expr::Pow(..) => 4,
        _ => ATOM,
    }
}

fn write_at(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "(")?;
        write_expr(e, f)?;
        write!(f, ")")
    } else {
        write_expr(e, f)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(c) if c.is_sign_negative() => write!(f, "-{}", -c),
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Coord(name) => write!(f, "{name}"),
        Expr::Neg(inner) => {
            write!(f, "-")?;
            write_at(inner, UNARY, f)
        }
        Expr::Add(a, b) => {
            write_at(a, SUM, f)?;
            write!(f, " + ")?;
            write_at(b, PRODUCT, f)
        }
        Expr::Sub(a, b) => {
            write_at(a, SUM, f)?;
            write!(f, " - ")?;
            write_at(b, PRODUCT, f)
        }
        Expr::Mul(a, b) => {
            write_at(a, PRODUCT, f)?;
            write!(f, "*")?;
            write_at(b, UNARY, f)
        }
        Expr::Div(a, b) => {
            write_at(a, PRODUCT, f)?;
            write!(f, "/")?;
            write_at(b, UNARY, f)
        }
        Expr::Pow(base, n) => {
            write_at(base, ATOM, f)?;
            write!(f, "^{n}")
        }
        Expr::Sin(a) => write!(f, "sin({a})"),
        Expr::Cos(a) => write!(f, "cos({a})"),
        Expr::Exp(a) => write!(f, "exp({a})"),
    }
}

/// Prints in the DSL syntax; the output parses back to an expression with
/// identical values.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}
