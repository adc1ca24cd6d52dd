//! Poisson-type brackets and the frames they generate: the canonical
//! symplectic bracket, flat Riemann-Poisson brackets, and the canonical
//! contact distribution on ℝ^{2n+1}.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{Chart, Frame, Interval, SmoothMap, VectorField};

/// A bilinear antisymmetric bracket on the functions of a chart.
pub trait PoissonBracket {
    fn chart(&self) -> &Arc<Chart>;

    /// `{f, g}` as a simplified expression.
    fn bracket(&self, f: &Expr, g: &Expr) -> Result<Expr>;
}

/// `|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|` at `point`, with the brackets
/// composed symbolically.
pub fn jacobi_residual(bracket: &dyn PoissonBracket, f: &Expr, g: &Expr, h: &Expr, point: &[f64]) -> Result<f64> {
    let jacobiator = jacobiator(bracket, f, g, h)?;
    Ok(bracket.chart().compile(&jacobiator)?.eval(point)?.abs())
}

/// The symbolic Jacobiator `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`.
pub fn jacobiator(bracket: &dyn PoissonBracket, f: &Expr, g: &Expr, h: &Expr) -> Result<Expr> {
    let a = bracket.bracket(f, &bracket.bracket(g, h)?)?;
    let b = bracket.bracket(g, &bracket.bracket(h, f)?)?;
    let c = bracket.bracket(h, &bracket.bracket(f, g)?)?;
    Ok(Expr::sum([a, b, c]).simplify())
}

/// A chart with canonical coordinates `(φ¹, …, φⁿ, p₁, …, pₙ)` and
/// symplectic form `ω = dφ^α ∧ dp_α`; `φ^α` pairs with `p_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticChart {
    n: usize,
    chart: Arc<Chart>,
}

impl SymplecticChart {
    /// Uses the first half of the coordinates as positions and the second
    /// half as the paired momenta.
    pub fn new(chart: Arc<Chart>) -> Result<Self> {
        if chart.dim() % 2 != 0 {
            return Err(Error::InvalidChart(format!("symplectic chart {chart} has odd dimension")));
        }
        Ok(SymplecticChart { n: chart.dim() / 2, chart })
    }

    /// `T*𝕋ⁿ` with angles `phi1..phin` on `[0, 2π)` and momenta `p1..pn`
    /// on `[−2, 2]`.
    pub fn cotangent_torus(n: usize) -> Self {
        assert!(n >= 1);
        let mut coords: Vec<String> = (1..=n).map(|i| format!("phi{i}")).collect();
        coords.extend((1..=n).map(|i| format!("p{i}")));
        let periodic = (0..2 * n).map(|i| i < n).collect();
        let bounds = (0..2 * n)
            .map(|i| if i < n { Interval::new(0.0, TAU) } else { Interval::new(-2.0, 2.0) })
            .collect();
        let chart = Chart::new(coords, periodic, bounds).expect("valid torus chart");
        SymplecticChart { n, chart: Arc::new(chart) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn position(&self, alpha: usize) -> &str {
        &self.chart.coords()[alpha]
    }

    pub fn momentum(&self, alpha: usize) -> &str {
        &self.chart.coords()[self.n + alpha]
    }

    /// `{f, g} = Σ_α (∂f/∂φ^α ∂g/∂p_α − ∂f/∂p_α ∂g/∂φ^α)`, so `{φ^α, p_α} = 1`.
    pub fn canonical_bracket(&self, f: &Expr, g: &Expr) -> Result<Expr> {
        self.chart.check_expr(f)?;
        self.chart.check_expr(g)?;
        Ok(antisymmetric(f, g, |f, g| {
            let terms = (0..self.n).flat_map(|a| {
                let (q, p) = (self.position(a), self.momentum(a));
                [
                    Expr::mul(f.diff(q), g.diff(p)),
                    Expr::neg(Expr::mul(f.diff(p), g.diff(q))),
                ]
            });
            Expr::sum(terms).simplify()
        }))
    }

    /// `X_h = Σ_α (∂h/∂p_α) ∂_{φ^α} − (∂h/∂φ^α) ∂_{p_α}`.
    ///
    /// With this convention `L_{X_h} g = {g, h}`.
    pub fn hamiltonian_field(&self, h: &Expr) -> Result<VectorField> {
        self.chart.check_expr(h)?;
        let mut components = vec![Expr::zero(); 2 * self.n];
        for a in 0..self.n {
            components[a] = h.diff(self.momentum(a)).simplify();
            components[self.n + a] = Expr::neg(h.diff(self.position(a))).simplify();
        }
        VectorField::new(self.chart.clone(), components)
    }
}

impl PoissonBracket for SymplecticChart {
    fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    fn bracket(&self, f: &Expr, g: &Expr) -> Result<Expr> {
        self.canonical_bracket(f, g)
    }
}

/// A flat Riemann-Poisson structure on an m-dimensional chart, determined
/// by m − 2 functions `h₁, …, h_{m−2}`:
/// `{f, g}_H = det(∇h₁; …; ∇h_{m−2}; ∇f; ∇g)`.
///
/// The functions enter only through their gradients, so multivalued
/// functions (such as `B_i θ^i` on a torus) are given by their gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct RpStructure {
    chart: Arc<Chart>,
    gradients: Vec<Vec<Expr>>,
    /// `P^{ij} = det(∇h₁; …; ∇h_{m−2}; e_i; e_j)`.
    tensor: Vec<Vec<Expr>>,
}

impl RpStructure {
    pub fn new(chart: Arc<Chart>, functions: &[Expr]) -> Result<Self> {
        for h in functions {
            chart.check_expr(h)?;
        }
        let gradients = functions
            .iter()
            .map(|h| chart.coords().iter().map(|x| h.diff(x).simplify()).collect())
            .collect();
        RpStructure::from_gradients(chart, gradients)
    }

    pub fn from_gradients(chart: Arc<Chart>, gradients: Vec<Vec<Expr>>) -> Result<Self> {
        let m = chart.dim();
        if m < 3 {
            return Err(Error::InvalidChart(format!("Riemann-Poisson structures need m >= 3, got {m}")));
        }
        if gradients.len() != m - 2 {
            return Err(Error::Dimension(format!("expected {} functions, got {}", m - 2, gradients.len())));
        }
        for g in &gradients {
            if g.len() != m {
                return Err(Error::Dimension(format!("gradient has {} components, chart has {m}", g.len())));
            }
            for c in g {
                chart.check_expr(c)?;
            }
        }
        let unit = |i: usize| (0..m).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect::<Vec<_>>();
        let mut tensor = vec![vec![Expr::zero(); m]; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let mut rows = gradients.clone();
                rows.push(unit(i));
                rows.push(unit(j));
                let p = symbolic_det(&rows).simplify();
                tensor[j][i] = Expr::neg(p.clone()).simplify();
                tensor[i][j] = p;
            }
        }
        Ok(RpStructure { chart, gradients, tensor })
    }

    pub fn gradients(&self) -> &[Vec<Expr>] {
        &self.gradients
    }

    /// The bivector `P^{ij}` with `{f, g}_H = Σ P^{ij} ∂_i f ∂_j g`.
    pub fn tensor(&self) -> &[Vec<Expr>] {
        &self.tensor
    }

    fn gradient(&self, f: &Expr) -> Vec<Expr> {
        self.chart.coords().iter().map(|x| f.diff(x).simplify()).collect()
    }

    /// The defining determinant, expanded symbolically.
    pub fn rp_bracket(&self, f: &Expr, g: &Expr) -> Result<Expr> {
        self.chart.check_expr(f)?;
        self.chart.check_expr(g)?;
        Ok(antisymmetric(f, g, |f, g| {
            let mut rows = self.gradients.clone();
            rows.push(self.gradient(f));
            rows.push(self.gradient(g));
            symbolic_det(&rows).simplify()
        }))
    }

    /// The field `ξ_h` with `L_{ξ_h} g = sign · {h, g}_H`, from the cofactor
    /// expansion `ξ_h^j = sign · Σ_i P^{ij} ∂_i h`.
    pub fn hamiltonian_field(&self, h: &Expr, sign: f64) -> Result<VectorField> {
        self.chart.check_expr(h)?;
        let grad = self.gradient(h);
        let m = self.chart.dim();
        let components = (0..m)
            .map(|j| {
                Expr::mul(
                    Expr::Const(sign),
                    Expr::sum((0..m).map(|i| Expr::mul(self.tensor[i][j].clone(), grad[i].clone()))),
                )
                .simplify()
            })
            .collect();
        VectorField::new(self.chart.clone(), components)
    }
}

impl PoissonBracket for RpStructure {
    fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    fn bracket(&self, f: &Expr, g: &Expr) -> Result<Expr> {
        self.rp_bracket(f, g)
    }
}

/// Expands `{f, g}` with the arguments in structural order and negates when
/// they were swapped, so `{g, f}` evaluates to exactly `−{f, g}`.
fn antisymmetric(f: &Expr, g: &Expr, expand: impl Fn(&Expr, &Expr) -> Expr) -> Expr {
    match f.structural_cmp(g) {
        std::cmp::Ordering::Equal => Expr::zero(),
        std::cmp::Ordering::Less => expand(f, g),
        std::cmp::Ordering::Greater => Expr::neg(expand(g, f)),
    }
}

/// Determinant of a square matrix of expressions by Laplace expansion down
/// the rows, memoizing minors by their remaining column set.
pub fn symbolic_det(rows: &[Vec<Expr>]) -> Expr {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "symbolic_det needs a square matrix");
    assert!(n < 32, "matrix too large for symbolic expansion");
    if n == 0 {
        return Expr::one();
    }
    let mut memo: HashMap<u32, Expr> = HashMap::new();
    minor(rows, 0, (1u32 << n) - 1, &mut memo)
}

fn minor(rows: &[Vec<Expr>], row: usize, cols: u32, memo: &mut HashMap<u32, Expr>) -> Expr {
    if row == rows.len() {
        return Expr::one();
    }
    if let Some(e) = memo.get(&cols) {
        return e.clone();
    }
    let mut terms = Vec::new();
    let mut sign = 1.0;
    for j in 0..rows.len() {
        if cols & (1 << j) == 0 {
            continue;
        }
        let entry = &rows[row][j];
        if !entry.is_zero() {
            let sub = minor(rows, row + 1, cols & !(1 << j), memo);
            if !sub.is_zero() {
                let term = Expr::mul(entry.clone(), sub);
                terms.push(if sign > 0.0 { term } else { Expr::neg(term) });
            }
        }
        sign = -sign;
    }
    let result = Expr::sum(terms).simplify();
    memo.insert(cols, result.clone());
    result
}

/// The canonical contact frame `ξ_i = ∂_{x^i} − p_i ∂_t`, `ξ_{n+i} = ∂_{p_i}`
/// on ℝ^{2n+1}, over the chart `(x, p, t)` for `n = 1` and
/// `(x1, …, xn, p1, …, pn, t)` otherwise, with box `[−2, 2]^{2n+1}`.
pub fn contact_frame(n: usize) -> Frame {
    assert!(n >= 1);
    contact_frame_on(Arc::new(contact_chart(n))).expect("contact chart has odd dimension")
}

pub fn contact_chart(n: usize) -> Chart {
    let coords: Vec<String> = if n == 1 {
        vec!["x".into(), "p".into(), "t".into()]
    } else {
        (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=n).map(|i| format!("p{i}")))
            .chain(std::iter::once("t".to_string()))
            .collect()
    };
    let m = coords.len();
    Chart::new(coords, vec![false; m], vec![Interval::new(-2.0, 2.0); m]).expect("valid contact chart")
}

fn contact_n(chart: &Chart) -> Result<usize> {
    let m = chart.dim();
    if m < 3 || m % 2 == 0 {
        return Err(Error::InvalidChart(format!("contact chart {chart} must have dimension 2n+1 >= 3")));
    }
    Ok((m - 1) / 2)
}

/// The contact frame on a chart whose coordinates are read positionally as
/// `(x¹, …, xⁿ, p₁, …, pₙ, t)`.
pub fn contact_frame_on(chart: Arc<Chart>) -> Result<Frame> {
    let n = contact_n(&chart)?;
    let m = chart.dim();
    let c = chart.coords();
    let mut vectors = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut comps = vec![Expr::zero(); m];
        comps[i] = Expr::one();
        comps[m - 1] = Expr::neg(Expr::coord(&c[n + i]));
        vectors.push(VectorField::new(chart.clone(), comps)?);
    }
    for i in 0..n {
        vectors.push(VectorField::coordinate(chart.clone(), n + i));
    }
    Frame::new(chart, vectors)
}

/// Coefficients of the contact form `θ = dt + Σ_α p_α dx^α` annihilated by
/// the contact frame, in chart order.
pub fn contact_form(chart: &Chart) -> Result<Vec<Expr>> {
    let n = contact_n(chart)?;
    let c = chart.coords();
    let mut form = vec![Expr::zero(); chart.dim()];
    for i in 0..n {
        form[i] = Expr::coord(&c[n + i]);
    }
    form[2 * n] = Expr::one();
    Ok(form)
}

/// `θ(ξ_a)` for each frame vector, simplified.
pub fn annihilation(frame: &Frame, form: &[Expr]) -> Result<Vec<Expr>> {
    if form.len() != frame.chart().dim() {
        return Err(Error::Dimension("form and chart dimensions differ".into()));
    }
    Ok(frame
        .vectors()
        .iter()
        .map(|v| Expr::sum(v.components().iter().zip(form).map(|(a, b)| Expr::mul(a.clone(), b.clone()))).simplify())
        .collect())
}

/// The projection `(x, p, t) ↦ (x, p)` onto the first 2n coordinates.
pub fn contact_projection(chart: Arc<Chart>) -> Result<SmoothMap> {
    let n = contact_n(&chart)?;
    let comps = chart.coords()[..2 * n].iter().map(|c| Expr::coord(c)).collect();
    SmoothMap::new(chart, comps)
}
