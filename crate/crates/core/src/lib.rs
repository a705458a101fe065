//! Moments of the parabolic Anderson model `∂u = (ν/2)∂²u + λ u Ẇ` started
//! from a Dirac delta.
//!
//! The crate evaluates the exact second and third moment formulas, checks
//! them against direct numerical contour integration, bounds the third
//! moment, locates the intermittency front and runs a lattice Monte Carlo
//! simulator for statistical comparison.

pub mod contour;
pub mod error;
pub mod front;
pub mod lambda;
pub mod logvalue;
pub mod moments;
pub mod quadrature;
pub mod sim;
pub mod specfun;

pub use contour::{bc_contour_moment, contour_shift_check, ContourConfig, ContourResult};
pub use error::{PamError, Result};
pub use front::{empirical_front, growth_index, rate_function, FrontResult};
pub use logvalue::LogValue;
pub use moments::{
    second_moment, second_moment_two_point, third_moment, third_moment_bounds, third_moment_log,
    third_moment_three_point, ModelParams, MomentValue, ThirdMomentBounds, TriplePoint,
};
pub use quadrature::{ErrorNorm, GaussianDecay, Integral, QuadratureConfig};
pub use sim::{
    cone_snapshot, estimate_moment, simulate_field, MomentEstimate, ReplicaSet, SimGrid, Snapshot,
};
