//! Check manifests.
//!
//! A manifest is a TOML document with the sections below. Expressions are
//! strings in the expression language of `hfree-core`.
//!
//! ```toml
//! [manifold]
//! coords = ["x", "y"]            # or `dim = 2` for x1, x2, ...
//! periodic = [false, false]      # optional; periodic axes live on [0, 2*pi)
//! box = [[-2, 2], [-2, 2]]       # one [lo, hi] per axis, or a single pair
//!
//! [frame]                        # either an explicit frame ...
//! vectors = [["2*y", "1-y^2"]]
//!
//! [structure]                    # ... or one generated by a structure
//! kind = "canonical"             # | "riemann-poisson" | "contact"
//! hamiltonians = ["..."]         # frame vectors are their Hamiltonian fields
//! casimirs = ["..."]             # riemann-poisson: the m-2 functions h_i
//! gradients = [["0", "0", "1"]]  # riemann-poisson: or their gradients
//! sign = 1.0                     # riemann-poisson: orientation of the fields
//! functions = ["..."]            # test functions for mode = "bracket-laws"
//!
//! [map]
//! components = ["y*exp(x)"]
//!
//! [outer]                        # optional outer map for mode = "identity"
//! coords = ["u"]
//! components = ["u", "u^2"]
//!
//! [check]
//! mode = "immersion"             # | "free" | "identity" | "bracket-laws"
//! samples = 10000
//! seed = 0
//! tolerance = 1e-9
//! grid = [5, 5]                  # optional; replaces random sampling
//! ```
//!
//! Bounds may be numbers or constant expressions such as `"2*pi"`.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

use hfree_core::brackets::{contact_frame_on, RpStructure, SymplecticChart};
use hfree_core::gallery::Structure;
use hfree_core::sampling::SamplePlan;
use hfree_core::{Chart, Expr, Frame, Interval, SmoothMap, VectorField, DEFAULT_TOLERANCE};
use thiserror::Error;
use toml::de::{DeTable, DeValue};
use toml::{Spanned, Table, Value};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Immersion,
    Free,
    Identity,
    BracketLaws,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Immersion, Mode::Free, Mode::Identity, Mode::BracketLaws];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Immersion => "immersion",
            Mode::Free => "free",
            Mode::Identity => "identity",
            Mode::BracketLaws => "bracket-laws",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected immersion, free, identity or bracket-laws)"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifestError {
    #[error("{line}:{column}: {message}")]
    At { line: usize, column: usize, message: String },
    #[error("{0}")]
    General(String),
}

#[derive(Debug, Clone)]
pub struct CheckSettings {
    pub mode: Option<Mode>,
    pub plan: SamplePlan,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub chart: Arc<Chart>,
    pub frame: Option<Frame>,
    pub structure: Option<Structure>,
    /// Hamiltonians whose fields form the frame, when given by a structure.
    pub hamiltonians: Vec<Expr>,
    pub bracket_functions: Vec<Expr>,
    pub map: Option<SmoothMap>,
    pub outer: Option<SmoothMap>,
    pub check: CheckSettings,
}

#[derive(Clone, Copy)]
enum Key<'a> {
    Name(&'a str),
    Index(usize),
}

/// Resolves key paths to source spans, for error positions.
struct Spans<'i> {
    src: &'i str,
    root: Option<Spanned<DeTable<'i>>>,
}

impl<'i> Spans<'i> {
    fn new(src: &'i str) -> Self {
        Spans { src, root: DeTable::parse(src).ok() }
    }

    fn span(&self, path: &[Key<'_>]) -> Option<Range<usize>> {
        let root = self.root.as_ref()?;
        let (first, rest) = path.split_first()?;
        let Key::Name(name) = first else { return None };
        let mut current = root.get_ref().get(*name)?;
        for key in rest {
            current = match (key, current.get_ref()) {
                (Key::Name(n), DeValue::Table(t)) => t.get(*n)?,
                (Key::Index(i), DeValue::Array(a)) => a.iter().nth(*i)?,
                _ => return Some(current.span()),
            };
        }
        Some(current.span())
    }

    fn error(&self, path: &[Key<'_>], message: impl Into<String>) -> ManifestError {
        let message = format!("{}: {}", render_path(path), message.into());
        let mut path = path.to_vec();
        while !path.is_empty() {
            if let Some(span) = self.span(&path) {
                return at_offset(self.src, span.start, message);
            }
            path.pop();
        }
        ManifestError::General(message)
    }
}

fn render_path(path: &[Key<'_>]) -> String {
    let mut out = String::new();
    for key in path {
        match key {
            Key::Name(n) if out.is_empty() => out.push_str(n),
            Key::Name(n) => {
                out.push('.');
                out.push_str(n);
            }
            Key::Index(i) => out.push_str(&format!("[{i}]")),
        }
    }
    out
}

fn at_offset(src: &str, offset: usize, message: String) -> ManifestError {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    ManifestError::At { line, column, message }
}

type Parsed<T> = Result<T, ManifestError>;

struct Reader<'i> {
    spans: Spans<'i>,
    table: Table,
}

impl<'i> Reader<'i> {
    fn section(&self, name: &'static str) -> Parsed<Option<&Table>> {
        match self.table.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(self.spans.error(&[Key::Name(name)], "expected a table")),
        }
    }

    fn check_keys(&self, section: &'static str, table: &Table, allowed: &[&str]) -> Parsed<()> {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(self.spans.error(
                    &[Key::Name(section), Key::Name(key)],
                    format!("unknown key (expected one of: {})", allowed.join(", ")),
                ));
            }
        }
        Ok(())
    }

    fn string(&self, path: &[Key<'_>], v: &Value) -> Parsed<String> {
        v.as_str().map(str::to_string).ok_or_else(|| self.spans.error(path, "expected a string"))
    }

    fn strings(&self, path: &[Key<'_>], v: &Value) -> Parsed<Vec<String>> {
        let arr = v.as_array().ok_or_else(|| self.spans.error(path, "expected an array of strings"))?;
        arr.iter()
            .enumerate()
            .map(|(i, item)| self.string(&with(path, Key::Index(i)), item))
            .collect()
    }

    fn positive_int(&self, path: &[Key<'_>], v: &Value) -> Parsed<usize> {
        match v.as_integer() {
            Some(n) if n > 0 => Ok(n as usize),
            _ => Err(self.spans.error(path, "expected a positive integer")),
        }
    }

    fn real(&self, path: &[Key<'_>], v: &Value) -> Parsed<f64> {
        match v {
            Value::Integer(n) => Ok(*n as f64),
            Value::Float(x) => Ok(*x),
            Value::String(s) => {
                let e = hfree_core::parse(s).map_err(|e| self.spans.error(path, e.to_string()))?;
                let empty: [(&str, f64); 0] = [];
                e.eval(&empty).map_err(|e| self.spans.error(path, format!("not a constant: {e}")))
            }
            _ => Err(self.spans.error(path, "expected a number")),
        }
    }

    fn expr(&self, path: &[Key<'_>], chart: &Chart, v: &Value) -> Parsed<Expr> {
        let src = self.string(path, v)?;
        chart.parse(&src).map_err(|e| self.spans.error(path, e.to_string()))
    }

    fn exprs(&self, path: &[Key<'_>], chart: &Chart, v: &Value) -> Parsed<Vec<Expr>> {
        let arr = v.as_array().ok_or_else(|| self.spans.error(path, "expected an array of expressions"))?;
        arr.iter()
            .enumerate()
            .map(|(i, item)| self.expr(&with(path, Key::Index(i)), chart, item))
            .collect()
    }
}

fn with<'a>(path: &[Key<'a>], key: Key<'a>) -> Vec<Key<'a>> {
    let mut p = path.to_vec();
    p.push(key);
    p
}

impl FromStr for Manifest {
    type Err = ManifestError;

    fn from_str(src: &str) -> Parsed<Self> {
        Manifest::parse(src)
    }
}

impl Manifest {
    pub fn parse(src: &str) -> Parsed<Self> {
        let table: Table = src.parse().map_err(|e: toml::de::Error| match e.span() {
            Some(span) => at_offset(src, span.start, e.message().to_string()),
            None => ManifestError::General(e.message().to_string()),
        })?;
        let r = Reader { spans: Spans::new(src), table };
        for key in r.table.keys() {
            if !["manifold", "frame", "structure", "map", "outer", "check"].contains(&key.as_str()) {
                return Err(r.spans.error(&[Key::Name(key)], "unknown section"));
            }
        }
        let chart = Arc::new(parse_chart(&r)?);
        let check = parse_check(&r, &chart)?;
        let (structure_frame, structure, hamiltonians, bracket_functions) = parse_structure(&r, &chart)?;
        let frame = match (parse_frame(&r, &chart)?, structure_frame) {
            (Some(_), Some(_)) => {
                return Err(r.spans.error(&[Key::Name("frame")], "give either [frame] or a frame-generating [structure], not both"));
            }
            (a, b) => a.or(b),
        };
        let map = match r.section("map")? {
            None => None,
            Some(t) => {
                r.check_keys("map", t, &["components"])?;
                let path = [Key::Name("map"), Key::Name("components")];
                let v = t.get("components").ok_or_else(|| r.spans.error(&path[..1], "missing `components`"))?;
                let comps = r.exprs(&path, &chart, v)?;
                Some(SmoothMap::new_allow_empty(chart.clone(), comps).map_err(|e| r.spans.error(&path, e.to_string()))?)
            }
        };
        let outer = parse_outer(&r)?;
        let manifest = Manifest { chart, frame, structure, hamiltonians, bracket_functions, map, outer, check };
        if let Some(mode) = manifest.check.mode {
            manifest.require(mode).map_err(|m| r.spans.error(&[Key::Name("check"), Key::Name("mode")], m))?;
        }
        Ok(manifest)
    }

    /// Verifies that the sections needed by `mode` are present.
    pub fn require(&self, mode: Mode) -> Result<(), String> {
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(format!("mode `{mode}` needs {what}")) };
        match mode {
            Mode::Immersion | Mode::Free | Mode::Identity => {
                need(self.frame.is_some(), "a frame")?;
                need(self.map.is_some(), "a [map] section")
            }
            Mode::BracketLaws => {
                need(
                    matches!(self.structure, Some(Structure::Canonical(_) | Structure::RiemannPoisson(_))),
                    "a canonical or riemann-poisson [structure]",
                )?;
                need(self.bracket_functions.len() >= 3, "at least three test `functions` in [structure]")
            }
        }
    }
}

fn parse_chart(r: &Reader<'_>) -> Parsed<Chart> {
    let root = [Key::Name("manifold")];
    let t = r.section("manifold")?.ok_or_else(|| ManifestError::General("missing [manifold] section".into()))?;
    r.check_keys("manifold", t, &["dim", "coords", "periodic", "box"])?;
    let key = |k| [Key::Name("manifold"), Key::Name(k)];
    let dim = t.get("dim").map(|v| r.positive_int(&key("dim"), v)).transpose()?;
    let coords = match (t.get("coords"), dim) {
        (Some(v), _) => r.strings(&key("coords"), v)?,
        (None, Some(d)) => (1..=d).map(|i| format!("x{i}")).collect(),
        (None, None) => return Err(r.spans.error(&root, "give `coords` or `dim`")),
    };
    if let Some(d) = dim {
        if d != coords.len() {
            return Err(r.spans.error(&key("dim"), format!("dim = {d} but {} coordinates are listed", coords.len())));
        }
    }
    let m = coords.len();
    let mut seen = HashSet::new();
    if let Some(dup) = coords.iter().find(|c| !seen.insert(c.as_str())) {
        return Err(r.spans.error(&key("coords"), format!("duplicate coordinate `{dup}`")));
    }
    let periodic = match t.get("periodic") {
        None => vec![false; m],
        Some(v) => {
            let arr = v.as_array().ok_or_else(|| r.spans.error(&key("periodic"), "expected an array of booleans"))?;
            if arr.len() != m {
                return Err(r.spans.error(&key("periodic"), format!("expected {m} entries, found {}", arr.len())));
            }
            arr.iter()
                .enumerate()
                .map(|(i, b)| {
                    b.as_bool().ok_or_else(|| r.spans.error(&with(&key("periodic"), Key::Index(i)), "expected a boolean"))
                })
                .collect::<Parsed<Vec<_>>>()?
        }
    };
    let pair = |path: &[Key<'_>], v: &Value| -> Parsed<Interval> {
        match v.as_array().map(Vec::as_slice) {
            Some([lo, hi]) => Ok(Interval::new(r.real(&with(path, Key::Index(0)), lo)?, r.real(&with(path, Key::Index(1)), hi)?)),
            _ => Err(r.spans.error(path, "expected a pair [lo, hi]")),
        }
    };
    let mut bounds = match t.get("box") {
        None if periodic.iter().all(|&p| p) => vec![Interval::PERIOD; m],
        None => return Err(r.spans.error(&root, "missing `box`")),
        Some(v) => {
            let arr = v.as_array().ok_or_else(|| r.spans.error(&key("box"), "expected an array"))?;
            if arr.len() == 2 && arr.iter().all(|x| !x.is_array()) {
                vec![pair(&key("box"), v)?; m]
            } else if arr.len() == m {
                arr.iter()
                    .enumerate()
                    .map(|(i, x)| pair(&with(&key("box"), Key::Index(i)), x))
                    .collect::<Parsed<Vec<_>>>()?
            } else {
                return Err(r.spans.error(&key("box"), format!("expected {m} pairs, found {}", arr.len())));
            }
        }
    };
    for (i, (iv, &per)) in bounds.iter_mut().zip(&periodic).enumerate() {
        if per {
            if iv.lo.abs() > 1e-9 || (iv.hi - TAU).abs() > 1e-9 {
                return Err(r.spans.error(&with(&key("box"), Key::Index(i)), "periodic axes must have the box [0, 2*pi]"));
            }
            *iv = Interval::PERIOD;
        }
    }
    Chart::new(coords, periodic, bounds).map_err(|e| r.spans.error(&root, e.to_string()))
}

fn parse_check(r: &Reader<'_>, chart: &Chart) -> Parsed<CheckSettings> {
    let empty = Table::new();
    let t = r.section("check")?.unwrap_or(&empty);
    r.check_keys("check", t, &["mode", "samples", "seed", "tolerance", "grid"])?;
    let key = |k| [Key::Name("check"), Key::Name(k)];
    let mode = t
        .get("mode")
        .map(|v| r.string(&key("mode"), v)?.parse::<Mode>().map_err(|e| r.spans.error(&key("mode"), e)))
        .transpose()?;
    let samples = t.get("samples").map(|v| r.positive_int(&key("samples"), v)).transpose()?.unwrap_or(DEFAULT_SAMPLES);
    let seed = match t.get("seed") {
        None => DEFAULT_SEED,
        Some(Value::Integer(n)) if *n >= 0 => *n as u64,
        Some(Value::String(s)) => s.parse().map_err(|_| r.spans.error(&key("seed"), "expected a 64-bit unsigned integer"))?,
        Some(_) => return Err(r.spans.error(&key("seed"), "expected a 64-bit unsigned integer")),
    };
    let tolerance = t.get("tolerance").map(|v| r.real(&key("tolerance"), v)).transpose()?.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(r.spans.error(&key("tolerance"), "expected a positive real"));
    }
    let plan = match t.get("grid") {
        None => SamplePlan::random(samples, seed),
        Some(v) => {
            let arr = v.as_array().ok_or_else(|| r.spans.error(&key("grid"), "expected an array of counts"))?;
            if arr.len() != chart.dim() {
                return Err(r.spans.error(&key("grid"), format!("expected {} counts, found {}", chart.dim(), arr.len())));
            }
            let counts = arr
                .iter()
                .enumerate()
                .map(|(i, c)| r.positive_int(&with(&key("grid"), Key::Index(i)), c))
                .collect::<Parsed<Vec<_>>>()?;
            SamplePlan::Grid { counts }
        }
    };
    Ok(CheckSettings { mode, plan, tolerance })
}

fn parse_frame(r: &Reader<'_>, chart: &Arc<Chart>) -> Parsed<Option<Frame>> {
    let Some(t) = r.section("frame")? else { return Ok(None) };
    r.check_keys("frame", t, &["vectors"])?;
    let path = [Key::Name("frame"), Key::Name("vectors")];
    let v = t.get("vectors").ok_or_else(|| r.spans.error(&path[..1], "missing `vectors`"))?;
    let arr = v.as_array().ok_or_else(|| r.spans.error(&path, "expected an array of vectors"))?;
    let vectors = arr
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let p = with(&path, Key::Index(i));
            let comps = r.exprs(&p, chart, item)?;
            VectorField::new(chart.clone(), comps).map_err(|e| r.spans.error(&p, e.to_string()))
        })
        .collect::<Parsed<Vec<_>>>()?;
    Frame::new(chart.clone(), vectors).map(Some).map_err(|e| r.spans.error(&path, e.to_string()))
}

type StructureParts = (Option<Frame>, Option<Structure>, Vec<Expr>, Vec<Expr>);

fn parse_structure(r: &Reader<'_>, chart: &Arc<Chart>) -> Parsed<StructureParts> {
    let Some(t) = r.section("structure")? else { return Ok((None, None, Vec::new(), Vec::new())) };
    let root = [Key::Name("structure")];
    let key = |k| [Key::Name("structure"), Key::Name(k)];
    let kind = r.string(&key("kind"), t.get("kind").ok_or_else(|| r.spans.error(&root, "missing `kind`"))?)?;
    let list = |name: &'static str| -> Parsed<Vec<Expr>> {
        t.get(name).map(|v| r.exprs(&key(name), chart, v)).transpose().map(Option::unwrap_or_default)
    };
    let fail = |name: &'static str| move |e: hfree_core::Error| r.spans.error(&key(name), e.to_string());
    match kind.as_str() {
        "canonical" => {
            r.check_keys("structure", t, &["kind", "hamiltonians", "functions"])?;
            let s = SymplecticChart::new(chart.clone()).map_err(fail("kind"))?;
            let hamiltonians = list("hamiltonians")?;
            let frame = if hamiltonians.is_empty() {
                None
            } else {
                let fields = hamiltonians.iter().map(|h| s.hamiltonian_field(h)).collect::<Result<Vec<_>, _>>().map_err(fail("hamiltonians"))?;
                Some(Frame::new(chart.clone(), fields).map_err(fail("hamiltonians"))?)
            };
            Ok((frame, Some(Structure::Canonical(s)), hamiltonians, list("functions")?))
        }
        "riemann-poisson" => {
            r.check_keys("structure", t, &["kind", "casimirs", "gradients", "hamiltonians", "sign", "functions"])?;
            let rp = match (t.get("casimirs"), t.get("gradients")) {
                (Some(_), None) => RpStructure::new(chart.clone(), &list("casimirs")?).map_err(fail("casimirs"))?,
                (None, Some(v)) => {
                    let arr = v.as_array().ok_or_else(|| r.spans.error(&key("gradients"), "expected an array of gradients"))?;
                    let grads = arr
                        .iter()
                        .enumerate()
                        .map(|(i, g)| r.exprs(&with(&key("gradients"), Key::Index(i)), chart, g))
                        .collect::<Parsed<Vec<_>>>()?;
                    RpStructure::from_gradients(chart.clone(), grads).map_err(fail("gradients"))?
                }
                _ => return Err(r.spans.error(&root, "give exactly one of `casimirs` or `gradients`")),
            };
            let sign = t.get("sign").map(|v| r.real(&key("sign"), v)).transpose()?.unwrap_or(1.0);
            if sign != 1.0 && sign != -1.0 {
                return Err(r.spans.error(&key("sign"), "expected 1 or -1"));
            }
            let hamiltonians = list("hamiltonians")?;
            let frame = if hamiltonians.is_empty() {
                None
            } else {
                let fields = hamiltonians.iter().map(|h| rp.hamiltonian_field(h, sign)).collect::<Result<Vec<_>, _>>().map_err(fail("hamiltonians"))?;
                Some(Frame::new(chart.clone(), fields).map_err(fail("hamiltonians"))?)
            };
            Ok((frame, Some(Structure::RiemannPoisson(rp)), hamiltonians, list("functions")?))
        }
        "contact" => {
            r.check_keys("structure", t, &["kind"])?;
            let frame = contact_frame_on(chart.clone()).map_err(fail("kind"))?;
            Ok((Some(frame), None, Vec::new(), Vec::new()))
        }
        other => Err(r.spans.error(&key("kind"), format!("unknown structure `{other}` (expected canonical, riemann-poisson or contact)"))),
    }
}

fn parse_outer(r: &Reader<'_>) -> Parsed<Option<SmoothMap>> {
    let Some(t) = r.section("outer")? else { return Ok(None) };
    r.check_keys("outer", t, &["coords", "components"])?;
    let key = |k| [Key::Name("outer"), Key::Name(k)];
    let coords_v = t.get("coords").ok_or_else(|| r.spans.error(&key("coords")[..1], "missing `coords`"))?;
    let coords = r.strings(&key("coords"), coords_v)?;
    let refs: Vec<&str> = coords.iter().map(String::as_str).collect();
    let chart = Arc::new(Chart::unbounded(&refs).map_err(|e| r.spans.error(&key("coords"), e.to_string()))?);
    let comps_v = t.get("components").ok_or_else(|| r.spans.error(&key("components")[..1], "missing `components`"))?;
    let comps = r.exprs(&key("components"), &chart, comps_v)?;
    SmoothMap::new(chart, comps).map(Some).map_err(|e| r.spans.error(&key("components"), e.to_string()))
}
