//! Building partially free maps out of partial immersions.
//!
//! If `F : ℝ^k → ℝ^{k+s_k}` is free and `f` is an ℋ-immersion into ℝ^k, the
//! chain rule gives the block factorization
//!
//! ```text
//! D₂(F∘f) = | D₁(f)   0 | · D₂(F)∘f
//!           |   C     D |
//! ```
//!
//! where `C` holds the anticommutator rows of `D₂(f)` and `D = ρ(D₁(f))` is
//! the symmetric square of `D₁(f)`. Since `det ρ(A) = (det A)^{k+1}`,
//! `det D₂(F∘f) = (det D₁(f))^{k+2} · det D₂(F)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::fields::{Chart, Frame, SmoothMap};
use crate::jets::{d2_exprs, pairs, sym_dim, CompiledJet};

/// The map `(x¹, …, x^m) ↦ (x¹, …, x^m, (x¹)², x¹x², …, (x^m)²)` listing all
/// monic monomials of degree one and two, on the unbounded chart
/// `(x1, …, xm)`.
pub fn monomial_free_map(m: usize) -> SmoothMap {
    assert!(m >= 1, "monomial_free_map needs m >= 1");
    let names: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let chart = Arc::new(Chart::unbounded(&refs).expect("valid coordinate names"));
    let x = |i: usize| Expr::coord(&names[i]);
    let mut components: Vec<Expr> = (0..m).map(x).collect();
    components.extend(pairs(m).map(|(a, b)| if a == b { Expr::pow(x(a), 2) } else { Expr::mul(x(a), x(b)) }));
    SmoothMap::new(chart, components).expect("components use chart coordinates")
}

/// `F∘f`: substitutes the components of `inner` for the coordinates of the
/// chart of `outer`. The result lives on the chart of `inner`.
pub fn compose(outer: &SmoothMap, inner: &SmoothMap) -> Result<SmoothMap> {
    let coords = outer.chart().coords();
    if inner.q() != coords.len() {
        return Err(Error::Dimension(format!(
            "cannot compose: inner map has {} components, outer map expects {}",
            inner.q(),
            coords.len()
        )));
    }
    let subst = |name: &str| coords.iter().position(|c| c == name).map(|i| inner.components()[i].clone());
    let components = outer
        .components()
        .iter()
        .map(|c| c.substitute(&subst).simplify())
        .collect();
    SmoothMap::new(inner.chart().clone(), components)
}

/// The symmetric square `ρ(A)` of a k×k matrix, acting on symmetric
/// 2-tensors in the basis of pairs `(a ≤ b)`:
///
/// * `ρ(A)[(a,b),(c,c)] = A[a,c]·A[b,c]`
/// * `ρ(A)[(a,b),(c,d)] = A[a,c]·A[b,d] + A[a,d]·A[b,c]` for `c < d`
pub fn sym_square(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "sym_square needs a square matrix");
    let k = a.nrows();
    let idx: Vec<(usize, usize)> = pairs(k).collect();
    DMatrix::from_fn(sym_dim(k), sym_dim(k), |row, col| {
        let (i, j) = idx[row];
        let (c, d) = idx[col];
        if c == d {
            a[(i, c)] * a[(j, c)]
        } else {
            a[(i, c)] * a[(j, d)] + a[(i, d)] * a[(j, c)]
        }
    })
}

/// The blocks of the chain-rule factorization of `D₂(F∘f)` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub d1: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub d2_outer: DMatrix<f64>,
    pub d2_composite: DMatrix<f64>,
}

impl BlockDecomposition {
    /// `[[D₁, 0], [C, D]]`.
    pub fn lower_block(&self) -> DMatrix<f64> {
        let k = self.d1.nrows();
        let s = self.d.nrows();
        let mut m = DMatrix::zeros(k + s, k + s);
        m.view_mut((0, 0), (k, k)).copy_from(&self.d1);
        m.view_mut((k, 0), (s, k)).copy_from(&self.c);
        m.view_mut((k, k), (s, s)).copy_from(&self.d);
        m
    }

    /// `[[D₁, 0], [C, D]] · D₂(F)`.
    pub fn block_product(&self) -> DMatrix<f64> {
        self.lower_block() * &self.d2_outer
    }

    /// Largest entrywise relative deviation between `D₂(F∘f)` and the
    /// block product, each entry scaled by `max(1, |lhs|, |rhs|)`.
    pub fn law_residual(&self) -> f64 {
        max_relative_deviation(&self.d2_composite, &self.block_product())
    }
}

pub(crate) fn max_relative_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / 1f64.max(x.abs()).max(y.abs()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    /// `det D₂(F∘f)`.
    pub lhs: f64,
    /// `(det D₁(f))^{k+2} · det D₂(F)`.
    pub rhs: f64,
    /// `|lhs − rhs| / max(1, |lhs|, |rhs|)`.
    pub rel_residual: f64,
}

impl IdentityResidual {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let rel_residual = (lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs());
        IdentityResidual { lhs, rhs, rel_residual }
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.rel_residual <= tolerance
    }
}

/// Precompiled jets for checking the composition identities at many points.
#[derive(Debug, Clone)]
pub struct CompositionCheck {
    k: usize,
    inner: Vec<Program>,
    d2_inner: CompiledJet,
    d2_outer: CompiledJet,
    d2_composite: CompiledJet,
    chart: Arc<Chart>,
}

impl CompositionCheck {
    /// Prepares the check in critical dimension: `inner` has `k` components
    /// and `outer` maps ℝ^k to ℝ^{k+s_k}.
    pub fn new(frame: &Frame, inner: &SmoothMap, outer: &SmoothMap) -> Result<Self> {
        let k = frame.k();
        if inner.q() != k {
            return Err(Error::Dimension(format!("inner map must have k = {k} components, has {}", inner.q())));
        }
        if outer.chart().dim() != k || outer.q() != k + sym_dim(k) {
            return Err(Error::Dimension(format!(
                "outer map must go from ℝ^{k} to ℝ^{}, goes from ℝ^{} to ℝ^{}",
                k + sym_dim(k),
                outer.chart().dim(),
                outer.q()
            )));
        }
        let composite = compose(outer, inner)?;
        let outer_frame = Frame::standard(outer.chart().clone());
        let inner_programs = inner
            .components()
            .iter()
            .map(|c| inner.chart().compile(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompositionCheck {
            k,
            inner: inner_programs,
            d2_inner: d2_exprs(frame, inner)?.compile()?,
            d2_outer: d2_exprs(&outer_frame, outer)?.compile()?,
            d2_composite: d2_exprs(frame, &composite)?.compile()?,
            chart: frame.chart().clone(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn decompose(&self, point: &[f64]) -> Result<BlockDecomposition> {
        self.chart.check_point(point)?;
        self.decompose_unchecked(point)
    }

    pub(crate) fn decompose_unchecked(&self, point: &[f64]) -> Result<BlockDecomposition> {
        let block = |name: &'static str| move |e: Error| Error::Block { block: name, source: Box::new(e) };
        let k = self.k;
        let s = sym_dim(k);
        let inner = self.d2_inner.eval(point).map_err(block("D2(f)"))?;
        let d1 = inner.matrix().rows(0, k).into_owned();
        let c = inner.matrix().rows(k, s).into_owned();
        let image = self
            .inner
            .iter()
            .map(|p| p.eval(point))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| block("f")(e.into()))?;
        let d2_outer = self.d2_outer.eval(&image).map_err(block("D2(F)"))?.matrix().clone();
        let d2_composite = self.d2_composite.eval(point).map_err(block("D2(F∘f)"))?.matrix().clone();
        let d = sym_square(&d1);
        Ok(BlockDecomposition { d1, c, d, d2_outer, d2_composite })
    }

    pub fn residual(&self, point: &[f64]) -> Result<IdentityResidual> {
        self.chart.check_point(point)?;
        self.residual_unchecked(point)
    }

    pub(crate) fn residual_unchecked(&self, point: &[f64]) -> Result<IdentityResidual> {
        let b = self.decompose_unchecked(point)?;
        let exponent = i32::try_from(self.k + 2).expect("small frame");
        let lhs = b.d2_composite.determinant();
        let rhs = b.d1.determinant().powi(exponent) * b.d2_outer.determinant();
        Ok(IdentityResidual::new(lhs, rhs))
    }
}

pub fn block_decomposition(frame: &Frame, inner: &SmoothMap, outer: &SmoothMap, point: &[f64]) -> Result<BlockDecomposition> {
    CompositionCheck::new(frame, inner, outer)?.decompose(point)
}

/// Both sides of `det D₂(F∘f) = (det D₁(f))^{k+2} · det D₂(F)` at `point`.
pub fn verify_det_identity(frame: &Frame, inner: &SmoothMap, outer: &SmoothMap, point: &[f64]) -> Result<IdentityResidual> {
    CompositionCheck::new(frame, inner, outer)?.residual(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{d2_matrix, is_free_at, DEFAULT_TOLERANCE};

    #[test]
    fn monomial_map_values() {
        let f1 = monomial_free_map(1);
        assert_eq!(f1.eval(&[2.0]).unwrap(), vec![2.0, 4.0]);
        let f2 = monomial_free_map(2);
        assert_eq!(f2.eval(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0, 1.0, 2.0, 4.0]);
        assert_eq!(f2.eval(&[0.0, 0.0]).unwrap(), vec![0.0; 5]);
        assert_eq!(monomial_free_map(4).q(), 14);
    }

    #[test]
    fn monomial_map_is_free() {
        for m in 1..=3 {
            let f = monomial_free_map(m);
            let frame = Frame::standard(f.chart().clone());
            for p in [vec![0.0; m], vec![1.5; m], (0..m).map(|i| i as f64 - 1.0).collect()] {
                assert!(is_free_at(&frame, &f, &p, DEFAULT_TOLERANCE).unwrap());
            }
        }
    }

    #[test]
    fn compose_examples() {
        let plane = Arc::new(Chart::cube(&["x", "y"], -2.0, 2.0).unwrap());
        let g = SmoothMap::parse(plane.clone(), &["y*exp(x)"]).unwrap();
        let fg = compose(&monomial_free_map(1), &g).unwrap();
        let expected = SmoothMap::parse(plane.clone(), &["y*exp(x)", "y^2*exp(2*x)"]).unwrap();
        for p in [[0.3, -1.2], [1.9, 0.4]] {
            let a = fg.eval(&p).unwrap();
            let b = expected.eval(&p).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }

        let id = SmoothMap::identity(Arc::new(Chart::unbounded(&["u", "v"]).unwrap()));
        let f = SmoothMap::parse(plane.clone(), &["x*y", "sin(x)"]).unwrap();
        assert_eq!(compose(&id, &f).unwrap().eval(&[0.7, 0.2]).unwrap(), f.eval(&[0.7, 0.2]).unwrap());

        assert!(matches!(compose(&monomial_free_map(2), &g), Err(Error::Dimension(_))));
    }

    #[test]
    fn sym_square_examples() {
        assert_eq!(sym_square(&DMatrix::from_element(1, 1, 3.0)), DMatrix::from_element(1, 1, 9.0));
        for k in 1..=4 {
            assert_eq!(sym_square(&DMatrix::identity(k, k)), DMatrix::identity(sym_dim(k), sym_dim(k)));
        }
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
        let d = sym_square(&a);
        assert_eq!(d, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 6.0, 9.0])));
        assert!((d.determinant() - 216.0).abs() < 1e-9);
    }

    fn planar() -> (Frame, SmoothMap) {
        let plane = Arc::new(Chart::cube(&["x", "y"], -2.0, 2.0).unwrap());
        let frame = Frame::parse(plane.clone(), &[&["2*y", "1-y^2"]]).unwrap();
        let g = SmoothMap::parse(plane, &["y*exp(x)"]).unwrap();
        (frame, g)
    }

    #[test]
    fn planar_decomposition_at_origin() {
        let (frame, g) = planar();
        let b = block_decomposition(&frame, &g, &monomial_free_map(1), &[0.0, 0.0]).unwrap();
        assert_eq!(b.d1, DMatrix::from_element(1, 1, 1.0));
        assert_eq!(b.d, DMatrix::from_element(1, 1, 1.0));
        assert!(b.law_residual() < 1e-12);

        let r = verify_det_identity(&frame, &g, &monomial_free_map(1), &[0.0, 0.0]).unwrap();
        assert!((r.lhs - 4.0).abs() < 1e-12);
        assert!((r.rhs - 4.0).abs() < 1e-12);
        assert!(r.passes(1e-12));
    }

    #[test]
    fn identity_inner_map_has_trivial_blocks() {
        let chart = Arc::new(Chart::cube(&["u", "v"], -1.0, 1.0).unwrap());
        let frame = Frame::standard(chart.clone());
        let b = block_decomposition(&frame, &SmoothMap::identity(chart), &monomial_free_map(2), &[0.3, -0.4]).unwrap();
        assert!(b.c.iter().all(|&v| v == 0.0));
        assert_eq!(b.d, DMatrix::identity(3, 3));
        assert!(b.law_residual() < 1e-12);
    }

    #[test]
    fn degenerate_inner_map_gives_zero_on_both_sides() {
        let line = Arc::new(Chart::cube(&["x"], -1.0, 1.0).unwrap());
        let frame = Frame::standard(line.clone());
        // d/dx (x^2) vanishes at the origin
        let f = SmoothMap::parse(line, &["x^2"]).unwrap();
        let r = verify_det_identity(&frame, &f, &monomial_free_map(1), &[0.0]).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.rel_residual, 0.0);
    }

    #[test]
    fn composite_matches_direct_d2() {
        let (frame, g) = planar();
        let composite = compose(&monomial_free_map(1), &g).unwrap();
        let b = block_decomposition(&frame, &g, &monomial_free_map(1), &[0.5, 1.0]).unwrap();
        let direct = d2_matrix(&frame, &composite, &[0.5, 1.0]).unwrap();
        assert_eq!(&b.d2_composite, direct.matrix());
    }

    #[test]
    fn dimension_errors() {
        let (frame, g) = planar();
        assert!(matches!(CompositionCheck::new(&frame, &g, &monomial_free_map(2)), Err(Error::Dimension(_))));
        let g2 = SmoothMap::parse(g.chart().clone(), &["x", "y"]).unwrap();
        assert!(matches!(CompositionCheck::new(&frame, &g2, &monomial_free_map(1)), Err(Error::Dimension(_))));
    }

    #[test]
    fn evaluation_errors_name_the_block() {
        let line = Arc::new(Chart::cube(&["x"], -1.0, 1.0).unwrap());
        let frame = Frame::standard(line.clone());
        let f = SmoothMap::parse(line, &["1/x"]).unwrap();
        let err = verify_det_identity(&frame, &f, &monomial_free_map(1), &[0.0]).unwrap_err();
        assert!(matches!(err, Error::Block { block: "D2(f)", .. }), "{err}");
    }
}
