//! Symbolic construction and numerical certification of partial immersions
//! and partially free maps along distributions.
//!
//! Scalar fields are [`Expr`] trees over the coordinates of a [`Chart`].
//! A distribution is given locally by a [`Frame`] of vector fields, and a
//! candidate map by a [`SmoothMap`]. The [`jets`] module assembles the
//! first- and second-order Lie-derivative matrices and decides the
//! immersion and freeness predicates numerically at sample points.

pub mod brackets;
pub mod constructions;
pub mod error;
pub mod expr;
pub mod fields;
pub mod gallery;
pub mod jets;
pub mod sampling;

pub use brackets::{PoissonBracket, RpStructure, SymplecticChart};
pub use constructions::{BlockDecomposition, CompositionCheck, IdentityResidual};
pub use error::{Error, EvalError, ParseError, Result, RowLabel};
pub use expr::{parse, Expr, Program};
pub use fields::{Chart, Frame, Interval, SmoothMap, VectorField};
pub use gallery::Fixture;
pub use jets::{JetExprs, JetMatrix, RankReport, DEFAULT_TOLERANCE};
pub use sampling::{sample_points, SamplePlan, SplitMix64};
