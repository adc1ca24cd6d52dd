//! Best-effort algebraic normalization.
//!
//! Sums are flattened into `constant + Σ cᵢ·tᵢ` with like terms merged, and
//! products into `c · Π bⱼ^nⱼ` with equal bases merged. Terms and factors are
//! sorted by [`Expr::structural_cmp`]. Constant folding never produces a
//! non-finite value: a fold that would divide by zero is left in place so
//! that evaluation still reports the error.

use std::sync::Arc;

use super::Expr;

const MAX_PASSES: usize = 8;

impl Expr {
    /// Returns an expression with the same value at every point where `self`
    /// evaluates without error.
    pub fn simplify(&self) -> Expr {
        let mut current = simplify_once(self);
        for _ in 1..MAX_PASSES {
            let next = simplify_once(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn simplify_once(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Coord(_) => e.clone(),
        Expr::Neg(_) | Expr::Add(..) | Expr::Sub(..) => {
            let mut sum = Sum::default();
            sum.collect(e, 1.0);
            sum.build()
        }
        Expr::Mul(..) | Expr::Div(..) | Expr::Pow(..) => {
            let mut product = Product::default();
            if product.collect(e, 1) {
                product.build()
            } else {
                shallow(e)
            }
        }
        Expr::Sin(a) => unary(a, f64::sin, Expr::sin),
        Expr::Cos(a) => unary(a, f64::cos, Expr::cos),
        Expr::Exp(a) => unary(a, f64::exp, Expr::exp),
    }
}

fn unary(arg: &Expr, fold: fn(f64) -> f64, rebuild: fn(Expr) -> Expr) -> Expr {
    let arg = simplify_once(arg);
    match arg.as_const().and_then(|c| finite(fold(c))) {
        Some(v) => Expr::Const(v),
        None => rebuild(arg),
    }
}

/// Rebuilds a product node with simplified children and no structural
/// rewriting; used when a product contains a literal division by zero.
fn shallow(e: &Expr) -> Expr {
    match e {
        Expr::Mul(a, b) => Expr::Mul(Arc::new(simplify_once(a)), Arc::new(simplify_once(b))),
        Expr::Div(a, b) => Expr::Div(Arc::new(simplify_once(a)), Arc::new(simplify_once(b))),
        Expr::Pow(a, n) => Expr::Pow(Arc::new(simplify_once(a)), *n),
        _ => e.clone(),
    }
}

/// Splits a simplified term into its numeric coefficient and the rest.
fn split_coefficient(e: Expr) -> (f64, Expr) {
    match e {
        Expr::Const(c) => (c, Expr::one()),
        Expr::Neg(inner) => {
            let (c, rest) = split_coefficient(Arc::unwrap_or_clone(inner));
            (-c, rest)
        }
        Expr::Mul(a, b) => match a.as_const() {
            Some(c) => (c, Arc::unwrap_or_clone(b)),
            None => (1.0, Expr::Mul(a, b)),
        },
        Expr::Div(a, b) => {
            let (c, rest) = split_coefficient(Arc::unwrap_or_clone(a));
            (c, Expr::Div(Arc::new(rest), b))
        }
        other => (1.0, other),
    }
}

#[derive(Default)]
struct Sum {
    constant: f64,
    terms: Vec<(f64, Expr)>,
}

impl Sum {
    fn collect(&mut self, e: &Expr, sign: f64) {
        match e {
            Expr::Add(a, b) => {
                self.collect(a, sign);
                self.collect(b, sign);
            }
            Expr::Sub(a, b) => {
                self.collect(a, sign);
                self.collect(b, -sign);
            }
            Expr::Neg(a) => self.collect(a, -sign),
            Expr::Const(c) => self.constant += sign * c,
            other => {
                let simplified = simplify_once(other);
                if matches!(simplified, Expr::Add(..) | Expr::Sub(..) | Expr::Neg(_)) && simplified != *other {
                    self.collect(&simplified, sign);
                    return;
                }
                let (c, rest) = split_coefficient(simplified);
                if rest.is_one() {
                    self.constant += sign * c;
                } else if let Some(slot) = self.terms.iter_mut().find(|(_, t)| *t == rest) {
                    slot.0 += sign * c;
                } else {
                    self.terms.push((sign * c, rest));
                }
            }
        }
    }

    fn build(mut self) -> Expr {
        self.terms.retain(|(c, _)| *c != 0.0);
        self.terms.sort_by(|a, b| a.1.structural_cmp(&b.1));
        let scaled = |c: f64, t: Expr| if c == 1.0 { t } else { Expr::Mul(Arc::new(Expr::Const(c)), Arc::new(t)) };

        let mut acc: Option<Expr> = (self.constant != 0.0).then_some(Expr::Const(self.constant));
        for (c, t) in self.terms {
            acc = Some(match acc {
                None if c < 0.0 => Expr::Neg(Arc::new(scaled(-c, t))),
                None => scaled(c, t),
                Some(a) if c < 0.0 => Expr::Sub(Arc::new(a), Arc::new(scaled(-c, t))),
                Some(a) => Expr::Add(Arc::new(a), Arc::new(scaled(c, t))),
            });
        }
        acc.unwrap_or_else(Expr::zero)
    }
}

#[derive(Default)]
struct Product {
    coefficient: Option<f64>,
    factors: Vec<(Expr, i32)>,
}

impl Product {
    fn scale(&mut self, c: f64) {
        self.coefficient = Some(self.coefficient.unwrap_or(1.0) * c);
    }

    /// Returns false if a literal zero appears with a negative power, in
    /// which case the caller keeps the node unchanged.
    fn collect(&mut self, e: &Expr, power: i32) -> bool {
        match e {
            Expr::Mul(a, b) => self.collect(a, power) && self.collect(b, power),
            Expr::Div(a, b) => match power.checked_neg() {
                Some(neg) => self.collect(a, power) && self.collect(b, neg),
                None => false,
            },
            Expr::Pow(base, n) => match power.checked_mul(*n) {
                Some(p) => self.collect(base, p),
                None => false,
            },
            Expr::Neg(a) => {
                if power % 2 != 0 {
                    self.scale(-1.0);
                }
                self.collect(a, power)
            }
            Expr::Const(c) => {
                if *c == 0.0 && power < 0 {
                    return false;
                }
                match finite(c.powi(power)) {
                    Some(v) => {
                        self.scale(v);
                        true
                    }
                    None => false,
                }
            }
            other => {
                let simplified = simplify_once(other);
                if matches!(simplified, Expr::Mul(..) | Expr::Div(..) | Expr::Pow(..) | Expr::Neg(_) | Expr::Const(_))
                    && simplified != *other
                {
                    return self.collect(&simplified, power);
                }
                self.push(simplified, power)
            }
        }
    }

    fn push(&mut self, base: Expr, power: i32) -> bool {
        if let Some(slot) = self.factors.iter_mut().find(|(b, _)| *b == base) {
            match slot.1.checked_add(power) {
                Some(p) => slot.1 = p,
                None => return false,
            }
        } else {
            self.factors.push((base, power));
        }
        true
    }

    fn build(mut self) -> Expr {
        let c = self.coefficient.unwrap_or(1.0);
        if c == 0.0 {
            return Expr::zero();
        }
        self.factors.retain(|(_, p)| *p != 0);
        self.factors.sort_by(|a, b| a.0.structural_cmp(&b.0));

        let power = |b: Expr, p: i32| if p == 1 { b } else { Expr::Pow(Arc::new(b), p) };
        let mut numerator: Option<Expr> = None;
        let mut denominator: Option<Expr> = None;
        for (b, p) in self.factors {
            let (slot, p) = if p > 0 { (&mut numerator, p) } else { (&mut denominator, -p) };
            let f = power(b, p);
            *slot = Some(match slot.take() {
                None => f,
                Some(acc) => Expr::Mul(Arc::new(acc), Arc::new(f)),
            });
        }

        let magnitude = c.abs();
        let body = match (numerator, denominator) {
            (None, None) => return Expr::Const(c),
            (Some(n), None) => with_coefficient(magnitude, n),
            (None, Some(d)) => Expr::Div(Arc::new(Expr::Const(magnitude)), Arc::new(d)),
            (Some(n), Some(d)) => Expr::Div(Arc::new(with_coefficient(magnitude, n)), Arc::new(d)),
        };
        if c < 0.0 {
            Expr::Neg(Arc::new(body))
        } else {
            body
        }
    }
}

fn with_coefficient(c: f64, e: Expr) -> Expr {
    if c == 1.0 {
        e
    } else {
        Expr::Mul(Arc::new(Expr::Const(c)), Arc::new(e))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    fn s(src: &str) -> String {
        parse(src).unwrap().simplify().to_string()
    }

    #[test]
    fn identity_elimination_and_folding() {
        assert_eq!(s("0*x + y"), "y");
        assert_eq!(s("x^1 * 1"), "x");
        assert_eq!(s("2*3"), "6");
        assert_eq!(s("x - x"), "0");
        assert_eq!(s("-(-x)"), "x");
        assert_eq!(s("x*x"), "x^2");
        assert_eq!(s("exp(0)"), "1");
        assert_eq!(s("2*x + 3*x"), "5*x");
    }

    #[test]
    fn annihilation_cancels_symbolically() {
        // dt(ξ) + p·dx(ξ) for ξ = ∂x − p∂t
        assert_eq!(s("1*(-p) + p*1 + 0*0"), "0");
        assert_eq!(s("x*y - y*x"), "0");
    }

    #[test]
    fn division_by_literal_zero_is_preserved() {
        let e = parse("x/0").unwrap().simplify();
        assert!(e.eval(&[("x", 1.0)]).is_err());
        let e = parse("0^-1").unwrap().simplify();
        assert!(e.eval(&[("x", 1.0)]).is_err());
    }

    #[test]
    fn idempotent_on_examples() {
        for src in ["(1+y^2)*exp(x)", "2*y*(1-y^2)*exp(x) + (1-y^2)*(-2*y)*exp(x)", "-(a-b)*(c/d)^-2", "x/y/z*y"] {
            let once = parse(src).unwrap().simplify();
            assert_eq!(once.simplify(), once, "{src}");
        }
    }
}
