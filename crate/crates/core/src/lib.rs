//! Null distances, time separations and curvature comparison on discretised
//! generalized cones `I x_f X` over finite metric spaces.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cone;
pub mod convergence;
pub mod curvature;
pub mod error;
pub mod graph;
pub mod lpls;
pub mod matrix;
pub mod metric;
pub mod model;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use graph::WeightedEdge;
pub use matrix::SquareMatrix;
pub use metric::{
    distortion, epsilon_net, gh_distance_exact, intrinsic_metric, quadruple_curvature_check, validate_metric,
    Correspondence, EpsilonNet, GhResult, MetricViolation, Provenance, QuadrupleVerdict, QuadrupleWitness,
    ValidationReport,
};
pub use model::{comparison_angle, realize_timelike_triangle, LorentzianModelPlane, ModelPoint, RiemannianModelPlane, Side};
pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Space = metric::FiniteLengthSpace<f64>;
pub type Matrix = SquareMatrix<f64>;
pub type Point = ModelPoint<f64>;
pub type Triangle = model::ComparisonTriangle<f64>;
pub type Cone = cone::ConeGrid<f64>;
pub type Warping = cone::WarpingFunction<f64>;
pub type NullCurve = cone::PiecewiseNullCurve<f64>;
pub type PreLengthSpace = lpls::DiscretePreLengthSpace<f64>;
pub type TimeFunction = lpls::GeneralizedTimeFunction<f64>;
pub type Sequence = convergence::WarpingSequence<f64>;
pub type TimelikeTriangle = curvature::TimelikeTriangle<f64>;
pub type CurvatureVerdict = curvature::CurvatureVerdict<f64>;
