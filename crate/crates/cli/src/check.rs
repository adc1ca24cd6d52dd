//! Running checks over sampled points and folding the outcomes into a report.

use std::sync::Arc;
use std::time::Instant;

use hfree_core::brackets::jacobiator;
use hfree_core::constructions::{monomial_free_map, CompositionCheck};
use hfree_core::gallery::{Fixture, Structure};
use hfree_core::jets::{check_critical, d1_exprs, d2_exprs, rank_check, CompiledJet};
use hfree_core::sampling::{sample_points, SamplePlan};
use hfree_core::{Chart, Error as CoreError, Expr, Frame, Program, SmoothMap};
use rayon::prelude::*;
use thiserror::Error;

use crate::manifest::{Manifest, Mode};
use crate::report::{Failure, Report, Verdict, Worst, FAILURE_CAP};

/// Name of the environment variable selecting the worker count.
pub const THREADS_VAR: &str = "HFREE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    /// Rayon's global pool.
    #[default]
    Default,
    Serial,
    Count(usize),
}

impl Threads {
    /// Reads [`THREADS_VAR`]; `0` means serial evaluation.
    pub fn from_env() -> Result<Self, CheckError> {
        match std::env::var(THREADS_VAR) {
            Err(_) => Ok(Threads::Default),
            Ok(v) => Threads::parse(&v),
        }
    }

    pub fn parse(v: &str) -> Result<Self, CheckError> {
        match v.trim().parse::<usize>() {
            Ok(0) => Ok(Threads::Serial),
            Ok(n) => Ok(Threads::Count(n)),
            Err(_) => Err(CheckError::Threads(v.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Setup(String),
    #[error("{THREADS_VAR} must be a non-negative integer, got `{0}`")]
    Threads(String),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Result of evaluating one predicate at one point.
#[derive(Debug, Clone, PartialEq)]
struct Outcome {
    criterion: Option<f64>,
    failure: Option<String>,
}

impl Outcome {
    fn error(e: impl std::fmt::Display) -> Self {
        Outcome { criterion: None, failure: Some(format!("evaluation error: {e}")) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Worse {
    Smaller,
    Larger,
}

/// Folded outcome of one check over all points.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub verdict: Verdict,
    pub points_checked: usize,
    pub worst: Option<Worst>,
    /// The first [`FAILURE_CAP`] failures in sample order.
    pub failures: Vec<Failure>,
    pub failure_count: usize,
}

impl CheckResult {
    fn below_critical(name: &str, critical: usize, actual: usize) -> Self {
        CheckResult {
            name: name.to_string(),
            verdict: Verdict::BelowCriticalDimension,
            points_checked: 0,
            worst: None,
            failures: vec![Failure {
                point: Vec::new(),
                reason: format!("target dimension {actual} is below the critical dimension {critical}"),
            }],
            failure_count: 1,
        }
    }

    pub fn summary(&self) -> String {
        let worst = match &self.worst {
            Some(Worst { point, criterion: Some(c) }) => format!(", worst {c:.6e} at {}", crate::report::format_point(point)),
            _ => String::new(),
        };
        format!(
            "{}: {} over {} points, {} failing{}",
            self.name,
            self.verdict.as_str(),
            self.points_checked,
            self.failure_count,
            worst
        )
    }
}

fn evaluate<F>(points: &[Vec<f64>], threads: Threads, f: F) -> Result<Vec<Outcome>, CheckError>
where
    F: Fn(&[f64]) -> Outcome + Sync,
{
    Ok(match threads {
        Threads::Serial => points.iter().map(|p| f(p)).collect(),
        Threads::Default => points.par_iter().map(|p| f(p)).collect(),
        Threads::Count(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| points.par_iter().map(|p| f(p)).collect())
        }
    })
}

/// Serial fold in sample order: the worst point is the first one attaining
/// the extreme criterion.
fn fold(name: &str, points: &[Vec<f64>], outcomes: Vec<Outcome>, worse: Worse) -> CheckResult {
    let mut worst: Option<(usize, f64)> = None;
    let mut failures = Vec::new();
    let mut failure_count = 0;
    for (i, o) in outcomes.into_iter().enumerate() {
        if let Some(c) = o.criterion {
            let replace = match worst {
                None => true,
                Some((_, w)) => match worse {
                    Worse::Smaller => c < w,
                    Worse::Larger => c > w,
                },
            };
            if replace {
                worst = Some((i, c));
            }
        }
        if let Some(reason) = o.failure {
            failure_count += 1;
            if failures.len() < FAILURE_CAP {
                failures.push(Failure { point: points[i].clone(), reason });
            }
        }
    }
    let worst = match worst {
        Some((i, c)) => Some(Worst { point: points[i].clone(), criterion: Some(c) }),
        None => points.first().map(|p| Worst { point: p.clone(), criterion: None }),
    };
    CheckResult {
        name: name.to_string(),
        verdict: if failure_count == 0 { Verdict::Pass } else { Verdict::Fail },
        points_checked: points.len(),
        worst,
        failures,
        failure_count,
    }
}

fn rank_outcome(jet: &CompiledJet, point: &[f64], tolerance: f64, needed: usize) -> Outcome {
    let m = match jet.eval(point) {
        Ok(m) => m,
        Err(e) => return Outcome::error(e),
    };
    match rank_check(&m, tolerance) {
        Ok(r) => Outcome {
            criterion: Some(r.sigma_min),
            failure: (!r.full_rank).then(|| format!("rank {} < {needed}, sigma_min = {:.6e}", r.rank, r.sigma_min)),
        },
        Err(e) => Outcome::error(e),
    }
}

/// The immersion check: `D₁(f)` has rank `k` at every point.
pub fn check_immersion(
    frame: &Frame,
    map: &SmoothMap,
    points: &[Vec<f64>],
    tolerance: f64,
    threads: Threads,
) -> Result<CheckResult, CheckError> {
    let name = Mode::Immersion.as_str();
    if let Err(CoreError::BelowCriticalDimension { critical, actual }) = check_critical(1, frame.k(), map.q()) {
        return Ok(CheckResult::below_critical(name, critical, actual));
    }
    let jet = d1_exprs(frame, map)?.compile()?;
    let outcomes = evaluate(points, threads, |p| rank_outcome(&jet, p, tolerance, frame.k()))?;
    Ok(fold(name, points, outcomes, Worse::Smaller))
}

/// The freeness check: `D₂(f)` has rank `k + s_k` at every point.
pub fn check_free(
    frame: &Frame,
    map: &SmoothMap,
    points: &[Vec<f64>],
    tolerance: f64,
    threads: Threads,
) -> Result<CheckResult, CheckError> {
    let name = Mode::Free.as_str();
    let k = frame.k();
    if let Err(CoreError::BelowCriticalDimension { critical, actual }) = check_critical(2, k, map.q()) {
        return Ok(CheckResult::below_critical(name, critical, actual));
    }
    let jet = d2_exprs(frame, map)?.compile()?;
    let needed = k + k * (k + 1) / 2;
    let outcomes = evaluate(points, threads, |p| rank_outcome(&jet, p, tolerance, needed))?;
    Ok(fold(name, points, outcomes, Worse::Smaller))
}

/// The determinant identity and block factorization of `D₂(F∘f)`; the
/// criterion is the larger of the two relative residuals.
pub fn check_identity(
    frame: &Frame,
    map: &SmoothMap,
    outer: Option<&SmoothMap>,
    points: &[Vec<f64>],
    tolerance: f64,
    threads: Threads,
) -> Result<CheckResult, CheckError> {
    let k = frame.k();
    if map.q() != k {
        return Err(CheckError::Setup(format!(
            "identity mode needs a map with k = {k} components, found {}",
            map.q()
        )));
    }
    let default_outer;
    let outer = match outer {
        Some(o) => o,
        None => {
            default_outer = monomial_free_map(k);
            &default_outer
        }
    };
    let check = CompositionCheck::new(frame, map, outer)?;
    let outcomes = evaluate(points, threads, |p| {
        let blocks = match check.decompose(p) {
            Ok(b) => b,
            Err(e) => return Outcome::error(e),
        };
        let identity = match check.residual(p) {
            Ok(r) => r,
            Err(e) => return Outcome::error(e),
        };
        let law = blocks.law_residual();
        let criterion = identity.rel_residual.max(law);
        let failure = if criterion.is_nan() || criterion > tolerance {
            Some(format!(
                "det D2(F∘f) = {:.6e} but det(D1)^(k+2)·det D2(F) = {:.6e}; block law residual {:.3e}",
                identity.lhs, identity.rhs, law
            ))
        } else {
            None
        };
        Outcome { criterion: Some(criterion), failure }
    })?;
    Ok(fold(Mode::Identity.as_str(), points, outcomes, Worse::Larger))
}

/// Tolerances for [`check_bracket_laws`]. Antisymmetry and involution are
/// always checked exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawTolerances {
    /// Relative, on `{f, gh} = {f, g}h + g{f, h}`.
    pub leibniz: f64,
    /// Absolute, on the Jacobiator.
    pub jacobi: f64,
}

struct CompiledLaws {
    functions: Vec<Program>,
    /// `({f_i, f_j}, {f_j, f_i})` for `i < j`.
    antisymmetry: Vec<(Program, Program)>,
    /// `({f_i, f_j f_l}, {f_i, f_j}, {f_i, f_l}, j, l)`.
    leibniz: Vec<(Program, Program, Program, usize, usize)>,
    jacobi: Vec<Program>,
    involution: Vec<Program>,
}

fn compile_laws(structure: &Structure, functions: &[Expr], hamiltonians: &[Expr]) -> Result<CompiledLaws, CoreError> {
    let b = structure.as_bracket();
    let chart: &Arc<Chart> = b.chart();
    let compile = |e: &Expr| chart.compile(e);
    let n = functions.len();
    let mut laws = CompiledLaws {
        functions: functions.iter().map(compile).collect::<Result<_, _>>()?,
        antisymmetry: Vec::new(),
        leibniz: Vec::new(),
        jacobi: Vec::new(),
        involution: Vec::new(),
    };
    for i in 0..n {
        for j in i + 1..n {
            let fg = b.bracket(&functions[i], &functions[j])?;
            let gf = b.bracket(&functions[j], &functions[i])?;
            laws.antisymmetry.push((compile(&fg)?, compile(&gf)?));
            for l in j + 1..n {
                laws.jacobi.push(compile(&jacobiator(b, &functions[i], &functions[j], &functions[l])?)?);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for l in j + 1..n {
                if i == j || i == l {
                    continue;
                }
                let product = Expr::mul(functions[j].clone(), functions[l].clone());
                laws.leibniz.push((
                    compile(&b.bracket(&functions[i], &product)?)?,
                    compile(&b.bracket(&functions[i], &functions[j])?)?,
                    compile(&b.bracket(&functions[i], &functions[l])?)?,
                    j,
                    l,
                ));
            }
        }
    }
    if matches!(structure, Structure::Canonical(_)) {
        for a in 0..hamiltonians.len() {
            for c in a + 1..hamiltonians.len() {
                laws.involution.push(compile(&b.bracket(&hamiltonians[a], &hamiltonians[c])?)?);
            }
        }
    }
    Ok(laws)
}

fn law_outcome(laws: &CompiledLaws, point: &[f64], tol: LawTolerances) -> Result<Outcome, CoreError> {
    let values = laws.functions.iter().map(|f| f.eval(point)).collect::<Result<Vec<_>, _>>()?;
    let mut problems = Vec::new();
    let mut criterion = 0f64;
    for (fg, gf) in &laws.antisymmetry {
        let s = fg.eval(point)? + gf.eval(point)?;
        criterion = criterion.max(s.abs());
        if s != 0.0 {
            problems.push(format!("antisymmetry defect {s:.3e}"));
        }
    }
    for (lhs, fg, fh, j, l) in &laws.leibniz {
        let a = lhs.eval(point)?;
        let b = fg.eval(point)? * values[*l] + values[*j] * fh.eval(point)?;
        let r = (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
        criterion = criterion.max(r);
        if !(r <= tol.leibniz) {
            problems.push(format!("Leibniz residual {r:.3e}"));
        }
    }
    for jac in &laws.jacobi {
        let r = jac.eval(point)?.abs();
        criterion = criterion.max(r);
        if !(r <= tol.jacobi) {
            problems.push(format!("Jacobi residual {r:.3e}"));
        }
    }
    for inv in &laws.involution {
        let v = inv.eval(point)?;
        criterion = criterion.max(v.abs());
        if v != 0.0 {
            problems.push(format!("involution defect {v:.3e}"));
        }
    }
    problems.truncate(3);
    Ok(Outcome { criterion: Some(criterion), failure: (!problems.is_empty()).then(|| problems.join("; ")) })
}

/// Antisymmetry, Leibniz and Jacobi laws on all pairs and triples of
/// `functions`, and pairwise involution of the `hamiltonians` of a
/// canonical structure.
pub fn check_bracket_laws(
    structure: &Structure,
    functions: &[Expr],
    hamiltonians: &[Expr],
    points: &[Vec<f64>],
    tolerances: LawTolerances,
    threads: Threads,
) -> Result<CheckResult, CheckError> {
    let laws = compile_laws(structure, functions, hamiltonians)?;
    let outcomes = evaluate(points, threads, |p| law_outcome(&laws, p, tolerances).unwrap_or_else(Outcome::error))?;
    Ok(fold(Mode::BracketLaws.as_str(), points, outcomes, Worse::Larger))
}

/// Closed-form Lie derivatives (relative deviation) and first integrals
/// (absolute value) of a gallery fixture.
pub fn check_formulas(fixture: &Fixture, points: &[Vec<f64>], threads: Threads) -> Result<CheckResult, CheckError> {
    const RELATIVE: f64 = 1e-10;
    const ABSOLUTE: f64 = 1e-12;
    let (Some(frame), Some(immersion)) = (&fixture.frame, &fixture.immersion) else {
        return Err(CheckError::Setup(format!("fixture `{}` has no immersion", fixture.name)));
    };
    let d1 = d1_exprs(frame, immersion)?;
    let chart = &fixture.chart;
    let mut formulas = Vec::new();
    for entry in &fixture.expected {
        let computed = d1.row(entry.row).and_then(|r| r.get(entry.column)).ok_or_else(|| {
            CheckError::Setup(format!("fixture `{}` has no entry {} column {}", fixture.name, entry.row, entry.column))
        })?;
        let label = format!("{}f{} = {}", entry.row, entry.column + 1, entry.expected);
        formulas.push((label, chart.compile(computed)?, Some(chart.compile(&entry.expected)?)));
    }
    for w in &fixture.first_integrals {
        let l = frame.vectors()[w.vector].lie_derivative(&w.function)?;
        formulas.push((format!("L{}({}) = 0", w.vector + 1, w.function), chart.compile(&l)?, None));
    }
    let outcomes = evaluate(points, threads, |p| {
        let mut criterion = 0f64;
        let mut problems = Vec::new();
        for (label, computed, expected) in &formulas {
            let value = match computed.eval(p) {
                Ok(v) => v,
                Err(e) => return Outcome::error(e),
            };
            let (deviation, limit) = match expected {
                Some(exp) => match exp.eval(p) {
                    Ok(want) => ((value - want).abs() / want.abs().max(1.0), RELATIVE),
                    Err(e) => return Outcome::error(e),
                },
                None => (value.abs(), ABSOLUTE),
            };
            criterion = criterion.max(deviation);
            if !(deviation <= limit) {
                problems.push(format!("{label} off by {deviation:.3e}"));
            }
        }
        Outcome { criterion: Some(criterion), failure: (!problems.is_empty()).then(|| problems.join("; ")) }
    })?;
    Ok(fold("formulas", points, outcomes, Worse::Larger))
}

fn box_note(chart: &Chart) -> String {
    let axes: Vec<String> = chart
        .coords()
        .iter()
        .zip(chart.bounds())
        .zip(chart.periodic())
        .map(|((c, iv), &per)| {
            if per {
                format!("{c} in [0, 2*pi) periodic")
            } else {
                format!("{c} in [{}, {}]", iv.lo, iv.hi)
            }
        })
        .collect();
    format!("sampled box: {}", axes.join(", "))
}

fn single_report(result: CheckResult, mode: &str, mut notes: Vec<String>, started: Instant) -> Report {
    if result.failure_count > result.failures.len() {
        notes.push(format!("{} failing points, first {} listed", result.failure_count, result.failures.len()));
    }
    Report {
        verdict: result.verdict,
        mode: mode.to_string(),
        points_checked: result.points_checked,
        worst: result.worst,
        failures: result.failures,
        fixture_notes: notes,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

/// Runs `mode` (or the manifest's own mode) on a parsed manifest.
pub fn run_check(manifest: &Manifest, mode: Option<Mode>, threads: Threads) -> Result<Report, CheckError> {
    let started = Instant::now();
    let mode = mode
        .or(manifest.check.mode)
        .ok_or_else(|| CheckError::Setup("no check mode given; set `mode` in [check]".into()))?;
    manifest.require(mode).map_err(CheckError::Setup)?;
    let points = sample_points(&manifest.chart, &manifest.check.plan)?;
    let tol = manifest.check.tolerance;
    let frame = manifest.frame.as_ref();
    let map = manifest.map.as_ref();
    let result = match mode {
        Mode::Immersion => check_immersion(frame.expect("required"), map.expect("required"), &points, tol, threads)?,
        Mode::Free => check_free(frame.expect("required"), map.expect("required"), &points, tol, threads)?,
        Mode::Identity => check_identity(
            frame.expect("required"),
            map.expect("required"),
            manifest.outer.as_ref(),
            &points,
            tol,
            threads,
        )?,
        Mode::BracketLaws => check_bracket_laws(
            manifest.structure.as_ref().expect("required"),
            &manifest.bracket_functions,
            &manifest.hamiltonians,
            &points,
            LawTolerances { leibniz: tol, jacobi: tol },
            threads,
        )?,
    };
    Ok(single_report(result, mode.as_str(), vec![box_note(&manifest.chart)], started))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryOptions {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Run only this check instead of every applicable one.
    pub mode: Option<Mode>,
}

impl Default for GalleryOptions {
    fn default() -> Self {
        GalleryOptions {
            samples: crate::manifest::DEFAULT_SAMPLES,
            seed: crate::manifest::DEFAULT_SEED,
            tolerance: hfree_core::DEFAULT_TOLERANCE,
            mode: None,
        }
    }
}

/// Bracket-law tolerances used for gallery structures.
pub const GALLERY_LAWS: LawTolerances = LawTolerances { leibniz: 1e-10, jacobi: 1e-8 };

/// Runs the checks that apply to a gallery fixture: immersion, freeness of
/// the composed map, the determinant identity, closed-form formulas and
/// bracket laws. The combined verdict passes iff every check passes.
pub fn run_gallery(fixture: &Fixture, options: &GalleryOptions, threads: Threads) -> Result<Report, CheckError> {
    let started = Instant::now();
    let points = sample_points(&fixture.chart, &SamplePlan::random(options.samples, options.seed))?;
    let tol = options.tolerance;
    let wants = |m: Mode| options.mode.is_none_or(|chosen| chosen == m);
    let mut results = Vec::new();
    if let (Some(frame), Some(immersion), Some(free)) = (&fixture.frame, &fixture.immersion, &fixture.free_map) {
        if wants(Mode::Immersion) {
            results.push(check_immersion(frame, immersion, &points, tol, threads)?);
        }
        if wants(Mode::Free) {
            results.push(check_free(frame, free, &points, tol, threads)?);
        }
        if wants(Mode::Identity) {
            results.push(check_identity(frame, immersion, None, &points, tol, threads)?);
        }
        if options.mode.is_none() && !(fixture.expected.is_empty() && fixture.first_integrals.is_empty()) {
            results.push(check_formulas(fixture, &points, threads)?);
        }
    }
    if let Some(structure) = &fixture.structure {
        if wants(Mode::BracketLaws) {
            results.push(check_bracket_laws(
                structure,
                &fixture.bracket_functions,
                &fixture.hamiltonians,
                &points,
                GALLERY_LAWS,
                threads,
            )?);
        }
    }
    if results.is_empty() {
        let mode = options.mode.map_or("gallery", Mode::as_str);
        return Err(CheckError::Setup(format!("fixture `{}` has no `{mode}` check", fixture.name)));
    }

    let mut notes = fixture.notes.clone();
    notes.push(box_note(&fixture.chart));
    if let Some(mode) = options.mode {
        let result = results.pop().expect("one result");
        return Ok(single_report(result, mode.as_str(), notes, started));
    }
    notes.extend(results.iter().map(CheckResult::summary));
    let verdict = if results.iter().any(|r| r.verdict == Verdict::BelowCriticalDimension) {
        Verdict::BelowCriticalDimension
    } else if results.iter().all(|r| r.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let primary = results
        .iter()
        .find(|r| r.name == Mode::Free.as_str())
        .or_else(|| results.iter().find(|r| r.name == Mode::BracketLaws.as_str()))
        .unwrap_or(&results[0]);
    let worst = primary.worst.clone();
    let failure_count: usize = results.iter().map(|r| r.failure_count).sum();
    let failures: Vec<Failure> = results
        .iter()
        .flat_map(|r| {
            r.failures.iter().map(move |f| Failure { point: f.point.clone(), reason: format!("{}: {}", r.name, f.reason) })
        })
        .take(FAILURE_CAP)
        .collect();
    if failure_count > failures.len() {
        notes.push(format!("{failure_count} failures, first {} listed", failures.len()));
    }
    Ok(Report {
        verdict,
        mode: "gallery".into(),
        points_checked: points.len(),
        worst,
        failures,
        fixture_notes: notes,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar() -> (Frame, Arc<Chart>) {
        let chart = Arc::new(Chart::cube(&["x", "y"], -2.0, 2.0).unwrap());
        (Frame::parse(chart.clone(), &[&["2*y", "1-y^2"]]).unwrap(), chart)
    }

    #[test]
    fn threads_parse() {
        assert_eq!(Threads::parse("0").unwrap(), Threads::Serial);
        assert_eq!(Threads::parse(" 4 ").unwrap(), Threads::Count(4));
        assert!(Threads::parse("many").is_err());
    }

    #[test]
    fn constant_map_fails_with_zero_sigma() {
        let (frame, chart) = planar();
        let map = SmoothMap::parse(chart.clone(), &["3"]).unwrap();
        let pts = sample_points(&chart, &SamplePlan::random(20, 1)).unwrap();
        let r = check_immersion(&frame, &map, &pts, 1e-9, Threads::Serial).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.failure_count, 20);
        let worst = r.worst.unwrap();
        assert_eq!(worst.criterion, Some(0.0));
        assert_eq!(worst.point, pts[0]);
    }

    #[test]
    fn worst_ties_go_to_lowest_index() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let outcomes = vec![
            Outcome { criterion: Some(2.0), failure: None },
            Outcome { criterion: Some(1.0), failure: None },
            Outcome { criterion: Some(1.0), failure: None },
        ];
        let r = fold("t", &pts, outcomes.clone(), Worse::Smaller);
        assert_eq!(r.worst.unwrap().point, vec![1.0]);
        let r = fold("t", &pts, outcomes, Worse::Larger);
        assert_eq!(r.worst.unwrap().point, vec![0.0]);
    }

    #[test]
    fn failures_are_capped() {
        let pts: Vec<Vec<f64>> = (0..250).map(|i| vec![f64::from(i)]).collect();
        let outcomes = (0..250).map(|_| Outcome::error("boom")).collect();
        let r = fold("t", &pts, outcomes, Worse::Smaller);
        assert_eq!(r.failures.len(), FAILURE_CAP);
        assert_eq!(r.failure_count, 250);
        assert_eq!(r.worst.unwrap().criterion, None);
    }

    #[test]
    fn empty_map_is_below_critical() {
        let (frame, chart) = planar();
        let map = SmoothMap::new_allow_empty(chart.clone(), Vec::new()).unwrap();
        let pts = sample_points(&chart, &SamplePlan::random(5, 1)).unwrap();
        let r = check_free(&frame, &map, &pts, 1e-9, Threads::Serial).unwrap();
        assert_eq!(r.verdict, Verdict::BelowCriticalDimension);
        assert_eq!(r.points_checked, 0);
        let r = check_immersion(&frame, &map, &pts, 1e-9, Threads::Serial).unwrap();
        assert_eq!(r.verdict, Verdict::BelowCriticalDimension);
    }

    #[test]
    fn division_by_zero_is_a_failure_not_an_abort() {
        let chart = Arc::new(Chart::cube(&["x"], -1.0, 1.0).unwrap());
        let frame = Frame::standard(chart.clone());
        let map = SmoothMap::parse(chart.clone(), &["1/x"]).unwrap();
        let pts = sample_points(&chart, &SamplePlan::Grid { counts: vec![3] }).unwrap();
        let r = check_immersion(&frame, &map, &pts, 1e-9, Threads::Serial).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].point, vec![0.0]);
        assert!(r.failures[0].reason.contains("evaluation error"), "{}", r.failures[0].reason);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let (frame, chart) = planar();
        let map = SmoothMap::parse(chart.clone(), &["y*exp(x)"]).unwrap();
        let free = hfree_core::constructions::compose(&monomial_free_map(1), &map).unwrap();
        let pts = sample_points(&chart, &SamplePlan::random(500, 9)).unwrap();
        let a = check_free(&frame, &free, &pts, 1e-9, Threads::Serial).unwrap();
        let b = check_free(&frame, &free, &pts, 1e-9, Threads::Count(3)).unwrap();
        let c = check_free(&frame, &free, &pts, 1e-9, Threads::Default).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.verdict, Verdict::Pass);
    }
}
