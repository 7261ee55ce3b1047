//! Generalized cones `I x_f X`: warping functions, the discretised grid,
//! null distance, time separation and null curves.

mod analysis;
mod grid;
mod nullcurve;
mod nulldist;
mod phi;
mod timesep;
mod warping;

pub use analysis::{ConeBoundsReport, FiberComparison, MinimizerAnalysis, RunDefect, SandwichReport};
pub use grid::{CausalClass, ConeGrid, ConePoint};
pub use nullcurve::{FiberPosition, FiberTrack, NullSegment, PiecewiseNullCurve, TrackLeg, MAX_NULL_SEGMENTS};
pub use nulldist::MATRIX_POINT_LIMIT;
pub use phi::{EquivalenceReport, PhiMap};
pub use timesep::TimeSeparationRow;
pub use warping::{gudermannian, Interval, WarpingFunction, WarpingKind};
