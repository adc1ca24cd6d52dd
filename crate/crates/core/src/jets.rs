//! First- and second-order jet matrices along a frame, and the numerical
//! rank analysis behind the immersion and freeness predicates.
//!
//! For a frame `{ξ_1, …, ξ_k}` and a map `f = (f¹, …, f^q)`:
//!
//! * `D₁(f)` is the k×q matrix `(L_{ξ_a} fⁱ)`;
//! * `D₂(f)` stacks `D₁(f)` on top of the s_k rows `{L_{ξ_a}, L_{ξ_b}} fⁱ`,
//!   `a ≤ b` in lexicographic order, where `s_k = k(k+1)/2`.
//!
//! Diagonal second-order rows use the anticommutator `{L_a, L_a} = 2L_a²`,
//! the same as the off-diagonal ones.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result, RowLabel};
use crate::expr::{Expr, Program};
use crate::fields::{Chart, Frame, SmoothMap};

/// Default rank tolerance, relative to `max(1, σ_max)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// `s_k = k(k+1)/2`, the number of unordered pairs `a ≤ b` among `k` indices.
pub const fn sym_dim(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Pairs `(a, b)`, `a ≤ b < k`, in lexicographic order.
pub fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |a| (a..k).map(move |b| (a, b)))
}

/// Row labels of a jet matrix of the given order for a frame of size `k`.
pub fn row_labels(k: usize, order: u8) -> Vec<RowLabel> {
    let mut labels: Vec<RowLabel> = (0..k).map(RowLabel::First).collect();
    if order == 2 {
        labels.extend(pairs(k).map(|(a, b)| RowLabel::Second(a, b)));
    }
    labels
}

/// Jet matrix entries as expressions, before evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct JetExprs {
    order: u8,
    chart: Arc<Chart>,
    labels: Vec<RowLabel>,
    entries: Vec<Vec<Expr>>,
}

impl JetExprs {
    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<Expr>] {
        &self.entries
    }

    pub fn row(&self, label: RowLabel) -> Option<&[Expr]> {
        self.labels.iter().position(|l| *l == label).map(|i| self.entries[i].as_slice())
    }

    pub fn compile(&self) -> Result<CompiledJet> {
        let programs = self
            .entries
            .iter()
            .map(|row| row.iter().map(|e| self.chart.compile(e)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledJet {
            order: self.order,
            labels: self.labels.clone(),
            cols: self.entries.first().map_or(0, Vec::len),
            programs,
        })
    }

    /// Evaluates every entry at a point of the chart box.
    pub fn at(&self, point: &[f64]) -> Result<JetMatrix> {
        self.chart.check_point(point)?;
        self.compile()?.eval(point)
    }
}

/// A [`JetExprs`] compiled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledJet {
    order: u8,
    labels: Vec<RowLabel>,
    cols: usize,
    programs: Vec<Vec<Program>>,
}

impl CompiledJet {
    /// Evaluates at `point` without a box check.
    pub fn eval(&self, point: &[f64]) -> Result<JetMatrix> {
        let rows = self.programs.len();
        let mut entries = DMatrix::zeros(rows, self.cols);
        for (i, row) in self.programs.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                entries[(i, j)] = p.eval(point)?;
            }
        }
        Ok(JetMatrix { order: self.order, labels: self.labels.clone(), entries })
    }
}

/// A numerically evaluated jet matrix with labelled rows.
#[derive(Debug, Clone, PartialEq)]
pub struct JetMatrix {
    order: u8,
    labels: Vec<RowLabel>,
    entries: DMatrix<f64>,
}

impl JetMatrix {
    pub fn new(order: u8, labels: Vec<RowLabel>, entries: DMatrix<f64>) -> Self {
        assert_eq!(labels.len(), entries.nrows(), "one label per row");
        JetMatrix { order, labels, entries }
    }

    pub fn from_rows(order: u8, labels: Vec<RowLabel>, rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let entries = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
        JetMatrix::new(order, labels, entries)
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.nrows())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Present iff the matrix is square.
    pub det: Option<f64>,
    pub full_rank: bool,
}

/// Singular-value rank of a jet matrix.
///
/// `rank` counts singular values above `τ·max(1, σ_max)`; `sigma_min` is the
/// smallest of the `min(rows, cols)` singular values, so `full_rank` holds
/// exactly when `sigma_min` clears the threshold.
pub fn rank_check(m: &JetMatrix, tolerance: f64) -> Result<RankReport> {
    for (i, label) in m.labels.iter().enumerate() {
        if m.entries.row(i).iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { label: *label });
        }
    }
    let (rows, cols) = m.entries.shape();
    let det = (rows == cols).then(|| if rows == 0 { 1.0 } else { m.entries.determinant() });
    if rows == 0 || cols == 0 {
        return Ok(RankReport { rank: 0, sigma_min: 0.0, sigma_max: 0.0, det, full_rank: rows == 0 });
    }
    let sv = m.entries.clone().svd(false, false).singular_values;
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = tolerance * sigma_max.max(1.0);
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    Ok(RankReport { rank, sigma_min, sigma_max, det, full_rank: sigma_min > threshold })
}

fn same_chart(frame: &Frame, map: &SmoothMap) -> Result<()> {
    if frame.chart().coords() == map.chart().coords() {
        Ok(())
    } else {
        Err(Error::ChartMismatch(format!("frame on {} but map on {}", frame.chart(), map.chart())))
    }
}

/// `D₁(f) = (L_{ξ_a} fⁱ)` as expressions.
pub fn d1_exprs(frame: &Frame, map: &SmoothMap) -> Result<JetExprs> {
    same_chart(frame, map)?;
    let entries = frame
        .vectors()
        .iter()
        .map(|xi| map.components().iter().map(|f| xi.lie_derivative_unchecked(f)).collect())
        .collect();
    Ok(JetExprs { order: 1, chart: frame.chart().clone(), labels: row_labels(frame.k(), 1), entries })
}

/// `D₂(f)`: the rows of `D₁(f)` followed by the anticommutator rows.
pub fn d2_exprs(frame: &Frame, map: &SmoothMap) -> Result<JetExprs> {
    let first = d1_exprs(frame, map)?;
    let xs = frame.vectors();
    let mut entries = first.entries.clone();
    for (a, b) in pairs(frame.k()) {
        let row = (0..map.q())
            .map(|i| {
                let ab = xs[a].lie_derivative_unchecked(&first.entries[b][i]);
                if a == b {
                    Expr::mul(Expr::Const(2.0), ab).simplify()
                } else {
                    let ba = xs[b].lie_derivative_unchecked(&first.entries[a][i]);
                    Expr::add(ab, ba).simplify()
                }
            })
            .collect();
        entries.push(row);
    }
    Ok(JetExprs { order: 2, chart: frame.chart().clone(), labels: row_labels(frame.k(), 2), entries })
}

pub fn d1_matrix(frame: &Frame, map: &SmoothMap, point: &[f64]) -> Result<JetMatrix> {
    d1_exprs(frame, map)?.at(point)
}

pub fn d2_matrix(frame: &Frame, map: &SmoothMap, point: &[f64]) -> Result<JetMatrix> {
    d2_exprs(frame, map)?.at(point)
}

/// Fails with [`Error::BelowCriticalDimension`] when `q` is smaller than
/// the row count of the jet matrix of this order.
pub fn check_critical(order: u8, k: usize, q: usize) -> Result<()> {
    let critical = if order == 1 { k } else { k + sym_dim(k) };
    if q < critical {
        Err(Error::BelowCriticalDimension { critical, actual: q })
    } else {
        Ok(())
    }
}

pub fn immersion_report_at(frame: &Frame, map: &SmoothMap, point: &[f64], tolerance: f64) -> Result<RankReport> {
    check_critical(1, frame.k(), map.q())?;
    rank_check(&d1_matrix(frame, map, point)?, tolerance)
}

pub fn free_report_at(frame: &Frame, map: &SmoothMap, point: &[f64], tolerance: f64) -> Result<RankReport> {
    check_critical(2, frame.k(), map.q())?;
    rank_check(&d2_matrix(frame, map, point)?, tolerance)
}

/// Whether `D₁(f)` has full rank k at `point`.
pub fn is_immersion_at(frame: &Frame, map: &SmoothMap, point: &[f64], tolerance: f64) -> Result<bool> {
    Ok(immersion_report_at(frame, map, point, tolerance)?.full_rank)
}

/// Whether `D₂(f)` has full rank k + s_k at `point`.
pub fn is_free_at(frame: &Frame, map: &SmoothMap, point: &[f64], tolerance: f64) -> Result<bool> {
    Ok(free_report_at(frame, map, point, tolerance)?.full_rank)
}
