use super::Expr;

impl Expr {
    /// Exact partial derivative with respect to `coord`.
    ///
    /// The result is built with the 0/1-eliding constructors but is not
    /// otherwise simplified.
    pub fn diff(&self, coord: &str) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Coord(name) => {
                if &**name == coord {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Neg(e) => Expr::neg(e.diff(coord)),
            Expr::Add(a, b) => Expr::add(a.diff(coord), b.diff(coord)),
            Expr::Sub(a, b) => Expr::sub(a.diff(coord), b.diff(coord)),
            Expr::Mul(a, b) => {
                let da = a.diff(coord);
                let db = b.diff(coord);
                Expr::add(
                    Expr::mul(da, (**b).clone()),
                    Expr::mul((**a).clone(), db),
                )
            }
            Expr::Div(a, b) => {
                let da = a.diff(coord);
                let db = b.diff(coord);
                if db.is_zero() {
                    return Expr::div(da, (**b).clone());
                }
                let numerator = Expr::sub(
                    Expr::mul(da, (**b).clone()),
                    Expr::mul((**a).clone(), db),
                );
                Expr::div(numerator, Expr::pow((**b).clone(), 2))
            }
            Expr::Pow(base, n) => {
                if *n == 0 {
                    return Expr::zero();
                }
                let db = base.diff(coord);
                if db.is_zero() {
                    return Expr::zero();
                }
                let outer = if *n == 1 {
                    Expr::one()
                } else {
                    Expr::mul(Expr::Const(f64::from(*n)), Expr::pow((**base).clone(), n - 1))
                };
                Expr::mul(outer, db)
            }
            Expr::Sin(e) => chain(Expr::cos((**e).clone()), e.diff(coord)),
            Expr::Cos(e) => chain(Expr::neg(Expr::sin((**e).clone())), e.diff(coord)),
            Expr::Exp(e) => chain(self.clone(), e.diff(coord)),
        }
    }
}

fn chain(outer: Expr, inner: Expr) -> Expr {
    if inner.is_zero() {
        Expr::zero()
    } else {
        Expr::mul(outer, inner)
    }
}
