//! Worked examples of partial immersions packaged as named fixtures.
//!
//! Each fixture carries a chart, a frame, a candidate immersion in critical
//! dimension, the free map obtained by composing it with the monomial free
//! map, and any closed-form Lie derivatives and first integrals known for it.

use std::sync::Arc;

use crate::brackets::{
    contact_frame, contact_projection, PoissonBracket, RpStructure, SymplecticChart,
};
use crate::constructions::{compose, monomial_free_map};
use crate::error::{Error, Result, RowLabel};
use crate::expr::{parse, Expr};
use crate::fields::{Chart, Frame, Interval, SmoothMap};
use crate::jets::d1_exprs;

pub const FIXTURE_NAMES: [&str; 10] = [
    "planar-hamiltonian",
    "planar-finite-type",
    "planar-intrinsically-exact",
    "integrable-torus-1",
    "integrable-torus-2",
    "integrable-torus-3",
    "riemann-poisson-e3",
    "novikov-t3",
    "contact-1",
    "contact-2",
];

/// A closed form asserted for entry `(row, column)` of `D₁` of the immersion.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedEntry {
    pub row: RowLabel,
    pub column: usize,
    pub expected: Expr,
}

/// A function that should be annihilated by frame vector `vector`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstIntegral {
    pub vector: usize,
    pub function: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Canonical(SymplecticChart),
    RiemannPoisson(RpStructure),
}

impl Structure {
    pub fn as_bracket(&self) -> &dyn PoissonBracket {
        match self {
            Structure::Canonical(s) => s,
            Structure::RiemannPoisson(r) => r,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub chart: Arc<Chart>,
    pub frame: Option<Frame>,
    pub immersion: Option<SmoothMap>,
    /// `monomial_free_map(k) ∘ immersion`.
    pub free_map: Option<SmoothMap>,
    pub expected: Vec<ExpectedEntry>,
    pub first_integrals: Vec<FirstIntegral>,
    pub structure: Option<Structure>,
    /// Functions whose Hamiltonian fields make up the frame.
    pub hamiltonians: Vec<Expr>,
    /// Test functions for bracket-law checks.
    pub bracket_functions: Vec<Expr>,
    pub notes: Vec<String>,
}

/// Outcome of comparing one closed form against the symbolic result.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaOutcome {
    pub description: String,
    pub max_deviation: f64,
    pub passed: bool,
}

pub fn list_fixtures() -> Vec<&'static str> {
    FIXTURE_NAMES.to_vec()
}

pub fn fixture(name: &str) -> Result<Fixture> {
    match name {
        "planar-hamiltonian" => Ok(planar_hamiltonian()),
        "planar-finite-type" => Ok(planar_finite_type()),
        "planar-intrinsically-exact" => Ok(planar_intrinsically_exact()),
        "integrable-torus-1" => Ok(integrable_torus(1)),
        "integrable-torus-2" => Ok(integrable_torus(2)),
        "integrable-torus-3" => Ok(integrable_torus(3)),
        "riemann-poisson-e3" => Ok(riemann_poisson_e3()),
        "novikov-t3" => Ok(novikov_t3()),
        "contact-1" => Ok(contact(1)),
        "contact-2" => Ok(contact(2)),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

fn e(src: &str) -> Expr {
    parse(src).expect("fixture expressions parse")
}

fn plane() -> Arc<Chart> {
    Arc::new(Chart::cube(&["x", "y"], -2.0, 2.0).expect("valid chart"))
}

impl Fixture {
    fn immersed(
        name: &str,
        frame: Frame,
        immersion: SmoothMap,
        expected: Vec<ExpectedEntry>,
        first_integrals: Vec<FirstIntegral>,
        notes: Vec<String>,
    ) -> Fixture {
        let k = frame.k();
        let free_map = compose(&monomial_free_map(k), &immersion).expect("critical dimension");
        Fixture {
            name: name.to_string(),
            chart: frame.chart().clone(),
            frame: Some(frame),
            immersion: Some(immersion),
            free_map: Some(free_map),
            expected,
            first_integrals,
            structure: None,
            hamiltonians: Vec::new(),
            bracket_functions: Vec::new(),
            notes,
        }
    }

    pub fn k(&self) -> Option<usize> {
        self.frame.as_ref().map(Frame::k)
    }

    /// Compares each closed form with the symbolic `D₁` entry at every point;
    /// deviations are relative to `max(1, |expected|)`.
    pub fn check_expected(&self, points: &[Vec<f64>], tolerance: f64) -> Result<Vec<FormulaOutcome>> {
        let (Some(frame), Some(immersion)) = (&self.frame, &self.immersion) else {
            return Ok(Vec::new());
        };
        let d1 = d1_exprs(frame, immersion)?;
        self.expected
            .iter()
            .map(|entry| {
                let computed = d1
                    .row(entry.row)
                    .and_then(|r| r.get(entry.column))
                    .ok_or_else(|| Error::Dimension(format!("no entry {} column {}", entry.row, entry.column)))?;
                let a = self.chart.compile(computed)?;
                let b = self.chart.compile(&entry.expected)?;
                let mut worst = 0f64;
                for p in points {
                    let (va, vb) = (a.eval(p)?, b.eval(p)?);
                    worst = worst.max((va - vb).abs() / vb.abs().max(1.0));
                }
                Ok(FormulaOutcome {
                    description: format!("{}f{} = {}", entry.row, entry.column + 1, entry.expected),
                    max_deviation: worst,
                    passed: worst <= tolerance,
                })
            })
            .collect()
    }

    /// Evaluates `L_{ξ_a} h` for each first integral; deviations are absolute.
    pub fn check_first_integrals(&self, points: &[Vec<f64>], tolerance: f64) -> Result<Vec<FormulaOutcome>> {
        let Some(frame) = &self.frame else {
            return Ok(Vec::new());
        };
        self.first_integrals
            .iter()
            .map(|w| {
                let l = frame.vectors()[w.vector].lie_derivative(&w.function)?;
                let prog = self.chart.compile(&l)?;
                let mut worst = 0f64;
                for p in points {
                    worst = worst.max(prog.eval(p)?.abs());
                }
                Ok(FormulaOutcome {
                    description: format!("L{}({}) = 0", w.vector + 1, w.function),
                    max_deviation: worst,
                    passed: worst <= tolerance,
                })
            })
            .collect()
    }
}

fn planar_hamiltonian() -> Fixture {
    let chart = plane();
    let frame = Frame::parse(chart.clone(), &[&["2*y", "1-y^2"]]).expect("valid frame");
    let g = SmoothMap::parse(chart, &["y*exp(x)"]).expect("valid map");
    Fixture::immersed(
        "planar-hamiltonian",
        frame,
        g,
        vec![ExpectedEntry { row: RowLabel::First(0), column: 0, expected: e("(1+y^2)*exp(x)") }],
        vec![FirstIntegral { vector: 0, function: e("(1-y^2)*exp(x)") }],
        vec!["the line field is the kernel of d((1-y^2)*exp(x))".into()],
    )
}

fn planar_finite_type() -> Fixture {
    let chart = plane();
    let frame = Frame::parse(chart.clone(), &[&["3*y-1", "1-y^2"]]).expect("valid frame");
    let g = SmoothMap::parse(chart, &["y*exp(x)"]).expect("valid map");
    Fixture::immersed(
        "planar-finite-type",
        frame,
        g,
        vec![ExpectedEntry { row: RowLabel::First(0), column: 0, expected: e("(2*y^2-y+1)*exp(x)") }],
        vec![FirstIntegral { vector: 0, function: e("(1-y)*(1+y)^2*exp(x)") }],
        vec!["the first integral (1-y)*(1+y)^2*exp(x) has vanishing gradient on y = -1".into()],
    )
}

fn planar_intrinsically_exact() -> Fixture {
    let chart = plane();
    let frame = Frame::parse(chart.clone(), &[&["y*(1-y^2)", "1-3*y^2"]]).expect("valid frame");
    let f = SmoothMap::parse(chart, &["y*(1-y^2)*exp(x)"]).expect("valid map");
    let norm = frame.vectors()[0].flat_norm_sq();
    Fixture::immersed(
        "planar-intrinsically-exact",
        frame,
        f,
        vec![ExpectedEntry {
            row: RowLabel::First(0),
            column: 0,
            expected: Expr::mul(e("exp(x)"), norm),
        }],
        Vec::new(),
        vec![
            "the dual 1-form is exp(-x)*d(y*(1-y^2)*exp(x)), so L f = |xi|^2 / exp(-x)".into(),
            "the closed form y^2*(1-y^2)^2 + (1-3*y^2)^2 is asserted with its exp(x) factor".into(),
        ],
    )
}

fn integrable_torus(n: usize) -> Fixture {
    let s = SymplecticChart::cotangent_torus(n);
    let chart = s.chart().clone();
    let actions: Vec<Expr> = (1..=n).map(|a| e(&format!("exp(p{a})*cos(phi{a})"))).collect();
    let vectors = actions
        .iter()
        .map(|h| s.hamiltonian_field(h))
        .collect::<Result<Vec<_>>>()
        .expect("Hamiltonian fields");
    let frame = Frame::new(chart.clone(), vectors).expect("valid frame");
    let g = SmoothMap::new(chart, (1..=n).map(|a| e(&format!("exp(p{a})*sin(phi{a})"))).collect())
        .expect("valid map");
    let mut expected = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let value = if a == b { e(&format!("exp(2*p{})", a + 1)) } else { Expr::zero() };
            expected.push(ExpectedEntry { row: RowLabel::First(a), column: b, expected: value });
        }
    }
    let first_integrals = (0..n)
        .flat_map(|a| actions.iter().map(move |h| FirstIntegral { vector: a, function: h.clone() }))
        .collect();
    let mut fixture = Fixture::immersed(
        &format!("integrable-torus-{n}"),
        frame,
        g,
        expected,
        first_integrals,
        vec![
            "frame vectors are X_I = (dI/dp) d/dphi - (dI/dphi) d/dp for I = exp(p)*cos(phi), so L_X g = {g, I} = exp(2p)".into(),
            "the component order exp(p)*(sin(phi), cos(phi)) would give exp(2p)*sin(2*phi) instead".into(),
        ],
    );
    fixture.bracket_functions = actions
        .iter()
        .cloned()
        .chain((1..=n).map(|a| e(&format!("exp(p{a})*sin(phi{a})"))))
        .collect();
    fixture.hamiltonians = actions;
    fixture.structure = Some(Structure::Canonical(s));
    fixture
}

/// Choices for the Hamiltonian `h = λ z + μ`; any positive `λ` works.
pub const RP_LAMBDA: &str = "1+x^2";
pub const RP_MU: &str = "sin(x*y)";
/// Orientation making `L_ξ f` positive for `ξ = sign · {h, ·}_H`.
pub const RP_SIGN: f64 = -1.0;

fn riemann_poisson_e3() -> Fixture {
    let chart = Arc::new(Chart::cube(&["x", "y", "z"], -2.0, 2.0).expect("valid chart"));
    let big_h = e("(1-y^2)*exp(x)");
    let rp = RpStructure::new(chart.clone(), std::slice::from_ref(&big_h)).expect("valid structure");
    let h = e(&format!("({RP_LAMBDA})*z + {RP_MU}"));
    let xi = rp.hamiltonian_field(&h, RP_SIGN).expect("Hamiltonian field");
    let frame = Frame::new(chart.clone(), vec![xi]).expect("valid frame");
    let f = SmoothMap::parse(chart, &["y*exp(x)"]).expect("valid map");
    let mut fixture = Fixture::immersed(
        "riemann-poisson-e3",
        frame,
        f,
        vec![ExpectedEntry {
            row: RowLabel::First(0),
            column: 0,
            expected: e(&format!("(1+y^2)*({RP_LAMBDA})*exp(2*x)")),
        }],
        vec![
            FirstIntegral { vector: 0, function: h.clone() },
            FirstIntegral { vector: 0, function: big_h.clone() },
        ],
        vec![
            format!("h = lambda*z + mu with lambda = {RP_LAMBDA}, mu = {RP_MU}"),
            format!("frame vector is {RP_SIGN} * {{h, .}}_H; the plain determinant gives {{h, f}}_H = -(1+y^2)*lambda*exp(2x)"),
        ],
    );
    fixture.hamiltonians = vec![h.clone()];
    fixture.bracket_functions = vec![e("x*y"), e("z^2 - x"), e("y*z + x^2"), h, big_h];
    fixture.structure = Some(Structure::RiemannPoisson(rp));
    fixture
}

fn novikov_t3() -> Fixture {
    let chart = Arc::new(
        Chart::new(
            vec!["theta1".into(), "theta2".into(), "theta3".into()],
            vec![true; 3],
            vec![Interval::PERIOD; 3],
        )
        .expect("valid chart"),
    );
    let b = vec![Expr::zero(), Expr::zero(), Expr::one()];
    let rp = RpStructure::from_gradients(chart.clone(), vec![b]).expect("valid structure");
    Fixture {
        name: "novikov-t3".into(),
        chart,
        frame: None,
        immersion: None,
        free_map: None,
        expected: Vec::new(),
        first_integrals: Vec::new(),
        structure: Some(Structure::RiemannPoisson(rp)),
        hamiltonians: Vec::new(),
        bracket_functions: vec![
            e("sin(theta1)*cos(theta2)"),
            e("cos(theta3) + sin(theta1)*sin(theta2)"),
            e("cos(theta1)^2*sin(theta3)"),
            e("sin(theta2 + theta3)"),
        ],
        notes: vec![
            "multivalued h = B.theta stored through its constant gradient B = (0, 0, 1)".into(),
            "bracket is eps^{ijk} d_i f d_j g B_k".into(),
        ],
    }
}

fn contact(n: usize) -> Fixture {
    let frame = contact_frame(n);
    let pi = contact_projection(frame.chart().clone()).expect("projection");
    let expected = (0..2 * n)
        .flat_map(|a| {
            (0..2 * n).map(move |b| ExpectedEntry {
                row: RowLabel::First(a),
                column: b,
                expected: if a == b { Expr::one() } else { Expr::zero() },
            })
        })
        .collect();
    Fixture::immersed(
        &format!("contact-{n}"),
        frame,
        pi,
        expected,
        Vec::new(),
        vec!["frame d/dx - p d/dt, d/dp spans the kernel of dt + p dx".into()],
    )
}
