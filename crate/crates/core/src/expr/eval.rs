use std::collections::HashMap;

use super::Expr;
use crate::error::EvalError;

/// A binding of coordinate names to values.
pub trait Env {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl Env for HashMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Env for HashMap<&str, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Env for [(&str, f64)] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> Env for [(&str, f64); N] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.as_slice().lookup(name)
    }
}

fn div(a: f64, b: f64) -> Result<f64, EvalError> {
    if b == 0.0 {
        Err(EvalError::DivisionByZero)
    } else {
        Ok(a / b)
    }
}

fn powi(base: f64, n: i32) -> Result<f64, EvalError> {
    if base == 0.0 && n < 0 {
        Err(EvalError::ZeroToNegativePower(n))
    } else {
        Ok(base.powi(n))
    }
}

impl Expr {
    /// Evaluates with real arithmetic against a name binding.
    pub fn eval<E: Env + ?Sized>(&self, env: &E) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Coord(name) => env.lookup(name).ok_or_else(|| EvalError::Unbound(name.to_string()))?,
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Expr::Div(a, b) => div(a.eval(env)?, b.eval(env)?)?,
            Expr::Pow(e, n) => powi(e.eval(env)?, *n)?,
            Expr::Sin(e) => e.eval(env)?.sin(),
            Expr::Cos(e) => e.eval(env)?.cos(),
            Expr::Exp(e) => e.eval(env)?.exp(),
        })
    }

    /// Compiles against an ordered coordinate list. Fails with the first
    /// name not in `coords`.
    pub fn compile(&self, coords: &[String]) -> Result<Program, String> {
        let mut ops = Vec::new();
        let mut depth = 0;
        let mut max_depth = 0;
        self.emit(coords, &mut ops, &mut depth, &mut max_depth)?;
        Ok(Program { ops, max_depth })
    }

    fn emit(&self, coords: &[String], ops: &mut Vec<Op>, depth: &mut usize, max: &mut usize) -> Result<(), String> {
        match self {
            Expr::Const(c) => {
                ops.push(Op::Const(*c));
                *depth += 1;
            }
            Expr::Coord(name) => {
                let idx = coords
                    .iter()
                    .position(|c| c.as_str() == &**name)
                    .ok_or_else(|| name.to_string())?;
                ops.push(Op::Load(idx));
                *depth += 1;
            }
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Sin(e) | Expr::Cos(e) | Expr::Exp(e) => {
                e.emit(coords, ops, depth, max)?;
                ops.push(match self {
                    Expr::Neg(_) => Op::Neg,
                    Expr::Pow(_, n) => Op::Pow(*n),
                    Expr::Sin(_) => Op::Sin,
                    Expr::Cos(_) => Op::Cos,
                    _ => Op::Exp,
                });
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.emit(coords, ops, depth, max)?;
                b.emit(coords, ops, depth, max)?;
                *depth -= 1;
                ops.push(match self {
                    Expr::Add(..) => Op::Add,
                    Expr::Sub(..) => Op::Sub,
                    Expr::Mul(..) => Op::Mul,
                    _ => Op::Div,
                });
            }
        }
        *max = (*max).max(*depth);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Load(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow(i32),
    Sin,
    Cos,
    Exp,
}

/// An expression compiled to a postfix program over positional coordinates.
///
/// Evaluation performs the same floating-point operations in the same order
/// as [`Expr::eval`], so both agree bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    max_depth: usize,
}

impl Program {
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.max_depth);
        for op in &self.ops {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Load(i) => stack.push(point[i]),
                Op::Neg | Op::Pow(_) | Op::Sin | Op::Cos | Op::Exp => {
                    let top = stack.last_mut().expect("program underflow");
                    *top = match *op {
                        Op::Neg => -*top,
                        Op::Pow(n) => powi(*top, n)?,
                        Op::Sin => top.sin(),
                        Op::Cos => top.cos(),
                        _ => top.exp(),
                    };
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    let b = stack.pop().expect("program underflow");
                    let top = stack.last_mut().expect("program underflow");
                    *top = match *op {
                        Op::Add => *top + b,
                        Op::Sub => *top - b,
                        Op::Mul => *top * b,
                        _ => div(*top, b)?,
                    };
                }
            }
        }
        Ok(stack.pop().expect("empty program"))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn evaluates_examples() {
        let e = parse("(1+y^2)*exp(x)").unwrap();
        assert_eq!(e.eval(&[("x", 0.0), ("y", 0.0)]).unwrap(), 1.0);
        assert_eq!(parse("x").unwrap().eval(&[("x", 3.0)]).unwrap(), 3.0);
    }

    #[test]
    fn reports_errors() {
        assert_eq!(parse("1/x").unwrap().eval(&[("x", 0.0)]), Err(EvalError::DivisionByZero));
        assert_eq!(parse("x^-2").unwrap().eval(&[("x", 0.0)]), Err(EvalError::ZeroToNegativePower(-2)));
        assert_eq!(parse("x+z").unwrap().eval(&[("x", 0.0)]), Err(EvalError::Unbound("z".into())));
        // 0^0 is 1, matching powi
        assert_eq!(parse("x^0").unwrap().eval(&[("x", 0.0)]).unwrap(), 1.0);
    }

    #[test]
    fn compiled_program_matches_tree_walk() {
        let coords = vec!["x".to_string(), "y".to_string()];
        let e = parse("sin(x*y)/(1+x^2) - exp(-y)*cos(x)^3").unwrap();
        let prog = e.compile(&coords).unwrap();
        for &(x, y) in &[(0.3, -1.2), (1.7, 0.0), (-2.0, 2.0)] {
            let a = e.eval(&[("x", x), ("y", y)]).unwrap();
            let b = prog.eval(&[x, y]).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(parse("x*w").unwrap().compile(&coords).unwrap_err(), "w");
        let inv = parse("1/x").unwrap().compile(&coords).unwrap();
        assert_eq!(inv.eval(&[0.0, 1.0]), Err(EvalError::DivisionByZero));
    }
}
