//! Charts, vector fields, frames and smooth maps, with the Lie-derivative
//! calculus along vector fields.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Program};
use crate::jets;

/// A closed coordinate interval `[lo, hi]`; for periodic coordinates it is
/// read as the half-open period `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub const PERIOD: Interval = Interval { lo: 0.0, hi: TAU };

    pub const REAL_LINE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

/// A single coordinate system: ordered coordinate names, periodicity flags
/// and the sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coords: Vec<String>,
    periodic: Vec<bool>,
    bounds: Vec<Interval>,
}

impl Chart {
    pub fn new(coords: Vec<String>, periodic: Vec<bool>, bounds: Vec<Interval>) -> Result<Self> {
        let m = coords.len();
        if m == 0 {
            return Err(Error::InvalidChart("a chart needs at least one coordinate".into()));
        }
        if periodic.len() != m || bounds.len() != m {
            return Err(Error::InvalidChart(format!(
                "{m} coordinates but {} periodicity flags and {} intervals",
                periodic.len(),
                bounds.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &coords {
            if !is_identifier(name) || name == "pi" || ["sin", "cos", "exp"].contains(&name.as_str()) {
                return Err(Error::InvalidChart(format!("`{name}` is not a valid coordinate name")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{name}`")));
            }
        }
        for ((name, iv), &per) in coords.iter().zip(&bounds).zip(&periodic) {
            if per && *iv != Interval::PERIOD {
                return Err(Error::InvalidChart(format!("periodic coordinate `{name}` must have box [0, 2π)")));
            }
            if !(iv.lo < iv.hi) {
                return Err(Error::InvalidChart(format!("empty interval [{}, {}] for `{name}`", iv.lo, iv.hi)));
            }
        }
        Ok(Chart { coords, periodic, bounds })
    }

    /// Non-periodic chart with the same interval on every axis.
    pub fn cube(coords: &[&str], lo: f64, hi: f64) -> Result<Self> {
        let m = coords.len();
        Chart::new(
            coords.iter().map(|s| s.to_string()).collect(),
            vec![false; m],
            vec![Interval::new(lo, hi); m],
        )
    }

    /// Non-periodic chart on all of ℝ^m. Such a chart can be evaluated
    /// anywhere but cannot be sampled.
    pub fn unbounded(coords: &[&str]) -> Result<Self> {
        Chart::cube(coords, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.bounds)
                .all(|(&v, iv)| v >= iv.lo && v <= iv.hi)
    }

    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.dim()
            )));
        }
        if !self.contains(point) {
            return Err(Error::OutsideBox { point: point.to_vec() });
        }
        Ok(())
    }

    /// Verifies that every coordinate of `e` is declared in this chart.
    pub fn check_expr(&self, e: &Expr) -> Result<()> {
        match e.free_vars().into_iter().find(|v| self.index_of(v).is_none()) {
            Some(name) => Err(Error::UnknownCoordinate { name, chart: self.to_string() }),
            None => Ok(()),
        }
    }

    pub fn compile(&self, e: &Expr) -> Result<Program> {
        e.compile(&self.coords)
            .map_err(|name| Error::UnknownCoordinate { name, chart: self.to_string() })
    }

    pub fn parse(&self, src: &str) -> Result<Expr> {
        let e = parse(src)?;
        self.check_expr(&e)?;
        Ok(e)
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coords.join(", "))
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c == '_' || c.is_ascii_alphabetic())
        && chars.all(|c| c == '_' || c.is_ascii_alphanumeric())
}

fn same_chart(a: &Chart, b: &Chart) -> Result<()> {
    if a.coords == b.coords {
        Ok(())
    } else {
        Err(Error::ChartMismatch(format!("{a} vs {b}")))
    }
}

/// A vector field `Σ ξⁱ ∂ᵢ` given by its coefficient expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Arc<Chart>,
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, components: Vec<Expr>) -> Result<Self> {
        if components.len() != chart.dim() {
            return Err(Error::Dimension(format!(
                "vector field has {} components on a {}-dimensional chart",
                components.len(),
                chart.dim()
            )));
        }
        for c in &components {
            chart.check_expr(c)?;
        }
        Ok(VectorField { chart, components })
    }

    pub fn parse(chart: Arc<Chart>, components: &[&str]) -> Result<Self> {
        let exprs = components.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>>>()?;
        VectorField::new(chart, exprs)
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(chart: Arc<Chart>, i: usize) -> Self {
        let components = (0..chart.dim())
            .map(|j| if i == j { Expr::one() } else { Expr::zero() })
            .collect();
        VectorField { chart, components }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// `Σ cᵢ Xᵢ` for constant coefficients.
    pub fn linear_combination(coefficients: &[f64], fields: &[VectorField]) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::Dimension("empty linear combination".into()))?;
        if coefficients.len() != fields.len() {
            return Err(Error::Dimension("coefficient count differs from field count".into()));
        }
        for f in fields {
            same_chart(&first.chart, &f.chart)?;
        }
        let components = (0..first.chart.dim())
            .map(|i| {
                Expr::sum(
                    coefficients
                        .iter()
                        .zip(fields)
                        .map(|(&c, f)| Expr::mul(Expr::Const(c), f.components[i].clone())),
                )
                .simplify()
            })
            .collect();
        Ok(VectorField { chart: first.chart.clone(), components })
    }

    /// `L_ξ f = Σᵢ ξⁱ ∂ᵢ f`, simplified.
    pub fn lie_derivative(&self, f: &Expr) -> Result<Expr> {
        self.chart.check_expr(f)?;
        Ok(self.lie_derivative_unchecked(f))
    }

    pub(crate) fn lie_derivative_unchecked(&self, f: &Expr) -> Expr {
        Expr::sum(
            self.components
                .iter()
                .zip(self.chart.coords())
                .filter(|(xi, _)| !xi.is_zero())
                .map(|(xi, x)| Expr::mul(xi.clone(), f.diff(x))),
        )
        .simplify()
    }

    /// Squared norm under the flat metric, `Σᵢ (ξⁱ)²`.
    pub fn flat_norm_sq(&self) -> Expr {
        Expr::sum(self.components.iter().map(|c| Expr::pow(c.clone(), 2))).simplify()
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.chart.check_point(point)?;
        self.components
            .iter()
            .map(|c| Ok(self.chart.compile(c)?.eval(point)?))
            .collect()
    }
}

/// `L_ξ f` as a free function.
pub fn lie_derivative(xi: &VectorField, f: &Expr) -> Result<Expr> {
    xi.lie_derivative(f)
}

/// `{L_a, L_b} f = L_a L_b f + L_b L_a f`.
pub fn anticommutator(a: &VectorField, b: &VectorField, f: &Expr) -> Result<Expr> {
    same_chart(&a.chart, &b.chart)?;
    a.chart.check_expr(f)?;
    Ok(anticommutator_unchecked(a, b, f))
}

pub(crate) fn anticommutator_unchecked(a: &VectorField, b: &VectorField, f: &Expr) -> Expr {
    let ab = a.lie_derivative_unchecked(&b.lie_derivative_unchecked(f));
    if a == b {
        return Expr::mul(Expr::Const(2.0), ab).simplify();
    }
    let ba = b.lie_derivative_unchecked(&a.lie_derivative_unchecked(f));
    Expr::add(ab, ba).simplify()
}

/// An ordered local trivialization `{ξ_1, …, ξ_k}` of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    chart: Arc<Chart>,
    vectors: Vec<VectorField>,
}

impl Frame {
    pub fn new(chart: Arc<Chart>, vectors: Vec<VectorField>) -> Result<Self> {
        let k = vectors.len();
        if k == 0 || k > chart.dim() {
            return Err(Error::Dimension(format!(
                "frame size {k} must lie in 1..={}",
                chart.dim()
            )));
        }
        for v in &vectors {
            same_chart(&chart, &v.chart)?;
        }
        Ok(Frame { chart, vectors })
    }

    /// Frame from lists of component expressions.
    pub fn parse(chart: Arc<Chart>, vectors: &[&[&str]]) -> Result<Self> {
        let vectors = vectors
            .iter()
            .map(|v| VectorField::parse(chart.clone(), v))
            .collect::<Result<Vec<_>>>()?;
        Frame::new(chart, vectors)
    }

    /// The coordinate frame `{∂_1, …, ∂_m}`.
    pub fn standard(chart: Arc<Chart>) -> Self {
        let vectors = (0..chart.dim()).map(|i| VectorField::coordinate(chart.clone(), i)).collect();
        Frame { chart, vectors }
    }

    /// The frame `ξ'_a = Σ_b M_ab ξ_b` for a constant k×k matrix `M`.
    pub fn mixed(&self, mixing: &[Vec<f64>]) -> Result<Self> {
        if mixing.len() != self.k() || mixing.iter().any(|row| row.len() != self.k()) {
            return Err(Error::Dimension(format!("mixing matrix must be {0}×{0}", self.k())));
        }
        let vectors = mixing
            .iter()
            .map(|row| VectorField::linear_combination(row, &self.vectors))
            .collect::<Result<Vec<_>>>()?;
        Frame::new(self.chart.clone(), vectors)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn vectors(&self) -> &[VectorField] {
        &self.vectors
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    /// Whether the k×m matrix of frame components has rank k at `point`.
    pub fn rank_check(&self, point: &[f64], tolerance: f64) -> Result<bool> {
        self.chart.check_point(point)?;
        let rows = self
            .vectors
            .iter()
            .map(|v| v.eval(point))
            .collect::<Result<Vec<_>>>()?;
        let labels = (0..self.k()).map(crate::error::RowLabel::First).collect();
        let matrix = jets::JetMatrix::from_rows(1, labels, &rows);
        Ok(jets::rank_check(&matrix, tolerance)?.full_rank)
    }
}

pub fn frame_rank_check(frame: &Frame, point: &[f64], tolerance: f64) -> Result<bool> {
    frame.rank_check(point, tolerance)
}

/// A map `M → ℝ^q` given by its component expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    chart: Arc<Chart>,
    components: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(chart: Arc<Chart>, components: Vec<Expr>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Dimension("a map needs at least one component".into()));
        }
        Self::new_allow_empty(chart, components)
    }

    /// Like [`SmoothMap::new`] but permits `q = 0`, which only ever fails a
    /// dimension check downstream.
    pub fn new_allow_empty(chart: Arc<Chart>, components: Vec<Expr>) -> Result<Self> {
        for c in &components {
            chart.check_expr(c)?;
        }
        Ok(SmoothMap { chart, components })
    }

    pub fn parse(chart: Arc<Chart>, components: &[&str]) -> Result<Self> {
        let exprs = components.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>>>()?;
        SmoothMap::new(chart, exprs)
    }

    pub fn identity(chart: Arc<Chart>) -> Self {
        let components = chart.coords().iter().map(|c| Expr::coord(c)).collect();
        SmoothMap { chart, components }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn q(&self) -> usize {
        self.components.len()
    }

    /// Values at `point`, without a box check.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.chart.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.chart.dim()
            )));
        }
        self.components
            .iter()
            .map(|c| Ok(self.chart.compile(c)?.eval(point)?))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> Arc<Chart> {
        Arc::new(Chart::cube(&["x", "y"], -2.0, 2.0).unwrap())
    }

    fn close(a: &Expr, b: &str, chart: &Chart, point: &[f64]) {
        let b = chart.parse(b).unwrap();
        let va = chart.compile(a).unwrap().eval(point).unwrap();
        let vb = chart.compile(&b).unwrap().eval(point).unwrap();
        assert!((va - vb).abs() <= 1e-12 * va.abs().max(1.0), "{a} = {va} vs {b} = {vb}");
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::cube(&["x", "x"], 0.0, 1.0).is_err());
        assert!(Chart::cube(&["x"], 1.0, 1.0).is_err());
        assert!(Chart::cube(&["pi"], 0.0, 1.0).is_err());
        assert!(Chart::cube(&[], 0.0, 1.0).is_err());
        assert!(Chart::new(vec!["t".into()], vec![true], vec![Interval::new(0.0, 1.0)]).is_err());
        assert!(Chart::new(vec!["t".into()], vec![true], vec![Interval::PERIOD]).is_ok());
    }

    #[test]
    fn lie_derivative_examples() {
        let chart = plane();
        let xi = VectorField::parse(chart.clone(), &["2*y", "1-y^2"]).unwrap();
        let eta = VectorField::parse(chart.clone(), &["3*y-1", "1-y^2"]).unwrap();
        let g = chart.parse("y*exp(x)").unwrap();
        let lg = lie_derivative(&xi, &g).unwrap();
        let le = lie_derivative(&eta, &g).unwrap();
        for p in [[0.0, 0.0], [1.3, -0.7], [-2.0, 2.0]] {
            close(&lg, "(1+y^2)*exp(x)", &chart, &p);
            close(&le, "(2*y^2-y+1)*exp(x)", &chart, &p);
        }
        let dx = VectorField::coordinate(chart.clone(), 0);
        assert!(dx.lie_derivative(&Expr::Const(5.0)).unwrap().is_zero());
    }

    #[test]
    fn lie_derivative_rejects_foreign_coordinates() {
        let xi = VectorField::coordinate(plane(), 0);
        let err = xi.lie_derivative(&parse("z*x").unwrap()).unwrap_err();
        assert!(matches!(err, Error::UnknownCoordinate { ref name, .. } if name == "z"));
    }

    #[test]
    fn anticommutator_examples() {
        let chart = plane();
        let dx = VectorField::coordinate(chart.clone(), 0);
        let dy = VectorField::coordinate(chart.clone(), 1);
        assert_eq!(anticommutator(&dx, &dx, &parse("x^2").unwrap()).unwrap(), Expr::Const(4.0));
        assert_eq!(anticommutator(&dx, &dy, &parse("x*y").unwrap()).unwrap(), Expr::Const(2.0));

        let a = VectorField::parse(chart.clone(), &["2*y", "1-y^2"]).unwrap();
        let b = VectorField::parse(chart.clone(), &["sin(x)", "x*y"]).unwrap();
        let f = parse("exp(x)*y^3").unwrap();
        let ab = anticommutator(&a, &b, &f).unwrap();
        let ba = anticommutator(&b, &a, &f).unwrap();
        for p in [[0.1, 0.2], [-1.5, 1.9]] {
            let va = chart.compile(&ab).unwrap().eval(&p).unwrap();
            let vb = chart.compile(&ba).unwrap().eval(&p).unwrap();
            assert!((va - vb).abs() <= 1e-12 * va.abs().max(1.0));
        }
    }

    #[test]
    fn flat_norm_examples() {
        let chart = plane();
        let xi = VectorField::parse(chart.clone(), &["y*(1-y^2)", "1-3*y^2"]).unwrap();
        close(&xi.flat_norm_sq(), "y^2*(1-y^2)^2 + (1-3*y^2)^2", &chart, &[0.4, 1.7]);
        assert_eq!(VectorField::coordinate(chart.clone(), 0).flat_norm_sq(), Expr::one());
        let zero = VectorField::parse(chart, &["0", "0"]).unwrap();
        assert!(zero.flat_norm_sq().is_zero());
    }

    #[test]
    fn frame_rank_examples() {
        let chart = plane();
        let f = Frame::parse(chart.clone(), &[&["2*y", "1-y^2"]]).unwrap();
        assert!(f.rank_check(&[0.0, 0.0], 1e-9).unwrap());
        let degenerate = Frame::parse(chart.clone(), &[&["1", "0"], &["1", "0"]]).unwrap();
        assert!(!degenerate.rank_check(&[0.5, 0.5], 1e-9).unwrap());
        assert!(matches!(f.rank_check(&[3.0, 0.0], 1e-9), Err(Error::OutsideBox { .. })));
    }

    #[test]
    fn frame_size_bounds() {
        let chart = plane();
        assert!(Frame::new(chart.clone(), vec![]).is_err());
        let dx = VectorField::coordinate(chart.clone(), 0);
        assert!(Frame::new(chart, vec![dx.clone(), dx.clone(), dx]).is_err());
    }
}
