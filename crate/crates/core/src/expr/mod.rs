//! Scalar expressions over named coordinates.
//!
//! [`Expr`] is an immutable tree. Subtrees are reference counted so that
//! differentiation and substitution can share structure freely.

mod diff;
mod eval;
mod parse;
mod print;
mod simplify;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::ops;
use std::sync::Arc;

pub use eval::{Env, Program};
pub use parse::parse;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Coord(Arc<str>),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, i32),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const(value)
    }

    pub fn coord(name: &str) -> Self {
        Expr::Coord(Arc::from(name))
    }

    pub fn zero() -> Self {
        Expr::Const(0.0)
    }

    pub fn one() -> Self {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    // Smart constructors. These only drop exact 0/1 identities; full
    // normalization lives in `simplify`.

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => Arc::unwrap_or_clone(inner),
            e => Expr::Neg(Arc::new(e)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            b
        } else if b.is_zero() {
            a
        } else {
            Expr::Add(Arc::new(a), Arc::new(b))
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            a
        } else if a.is_zero() {
            Expr::neg(b)
        } else {
            Expr::Sub(Arc::new(a), Arc::new(b))
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            Expr::zero()
        } else if a.is_one() {
            b
        } else if b.is_one() {
            a
        } else {
            Expr::Mul(Arc::new(a), Arc::new(b))
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_one() {
            a
        } else {
            Expr::Div(Arc::new(a), Arc::new(b))
        }
    }

    pub fn pow(base: Expr, exponent: i32) -> Expr {
        match exponent {
            1 => base,
            _ => Expr::Pow(Arc::new(base), exponent),
        }
    }

    pub fn sin(e: Expr) -> Expr {
        Expr::Sin(Arc::new(e))
    }

    pub fn cos(e: Expr) -> Expr {
        Expr::Cos(Arc::new(e))
    }

    pub fn exp(e: Expr) -> Expr {
        Expr::Exp(Arc::new(e))
    }

    /// Sum of an iterator of terms; the empty sum is `0`.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::zero(), Expr::add)
    }

    /// Product of an iterator of factors; the empty product is `1`.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        factors.into_iter().fold(Expr::one(), Expr::mul)
    }

    /// Names of all coordinates occurring in the expression.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Coord(name) => {
                out.insert(name.to_string());
            }
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Sin(e) | Expr::Cos(e) | Expr::Exp(e) => {
                e.collect_vars(out)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces coordinates for which `subst` returns `Some`.
    pub fn substitute<F>(&self, subst: &F) -> Expr
    where
        F: Fn(&str) -> Option<Expr>,
    {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Coord(name) => subst(name).unwrap_or_else(|| self.clone()),
            Expr::Neg(e) => Expr::Neg(Arc::new(e.substitute(subst))),
            Expr::Add(a, b) => Expr::Add(Arc::new(a.substitute(subst)), Arc::new(b.substitute(subst))),
            Expr::Sub(a, b) => Expr::Sub(Arc::new(a.substitute(subst)), Arc::new(b.substitute(subst))),
            Expr::Mul(a, b) => Expr::Mul(Arc::new(a.substitute(subst)), Arc::new(b.substitute(subst))),
            Expr::Div(a, b) => Expr::Div(Arc::new(a.substitute(subst)), Arc::new(b.substitute(subst))),
            Expr::Pow(e, n) => Expr::Pow(Arc::new(e.substitute(subst)), *n),
            Expr::Sin(e) => Expr::Sin(Arc::new(e.substitute(subst))),
            Expr::Cos(e) => Expr::Cos(Arc::new(e.substitute(subst))),
            Expr::Exp(e) => Expr::Exp(Arc::new(e.substitute(subst))),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Coord(_) => 1,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Sin(e) | Expr::Cos(e) | Expr::Exp(e) => 1 + e.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Expr::Const(_) => 0,
            Expr::Coord(_) => 1,
            Expr::Neg(_) => 2,
            Expr::Add(..) => 3,
            Expr::Sub(..) => 4,
            Expr::Mul(..) => 5,
            Expr::Div(..) => 6,
            Expr::Pow(..) => 7,
            Expr::Sin(_) => 8,
            Expr::Cos(_) => 9,
            Expr::Exp(_) => 10,
        }
    }

    /// A total structural order, used to put sums and products into a
    /// deterministic arrangement during simplification.
    pub fn structural_cmp(&self, other: &Expr) -> Ordering {
        use Expr::*;
        match (self, other) {
            (Const(a), Const(b)) => a.total_cmp(b),
            (Coord(a), Coord(b)) => a.cmp(b),
            (Neg(a), Neg(b)) | (Sin(a), Sin(b)) | (Cos(a), Cos(b)) | (Exp(a), Exp(b)) => a.structural_cmp(b),
            (Pow(a, n), Pow(b, m)) => a.structural_cmp(b).then(n.cmp(m)),
            (Add(a1, a2), Add(b1, b2))
            | (Sub(a1, a2), Sub(b1, b2))
            | (Mul(a1, a2), Mul(b1, b2))
            | (Div(a1, a2), Div(b1, b2)) => a1.structural_cmp(b1).then_with(|| a2.structural_cmp(b2)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Self {
        Expr::Const(value)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
