//! Solid angle of oriented closed curves and links in 3-space.
//!
//! The solid angle `ω(x)` subtended by an oriented curve `K` is a function on
//! the complement of `K` with values in `R / 4πZ`. This crate computes it by
//! several independent routes and builds knotted fields on top of it:
//!
//! * [`curve`]: polyline curves and links, Frenet frames, writhe, linking
//!   number, projective twist and Fuller's writhe identity.
//! * [`spherical`]: the projection of a curve onto the observation sphere,
//!   crossing counts, turning angles, the dual curve and the Gauss–Bonnet
//!   evaluator.
//! * [`solidangle`]: point and grid evaluators (Dirac-string triangle sum,
//!   midpoint quadrature, tangent developable), the homotopy formula and the
//!   discontinuity-surface switching policy.
//! * [`framing`]: the solid-angle framing and the local structure of `ω`
//!   near the curve.
//! * [`fields`]: distance, scroll-wave phase and nematic director fields.
//! * [`io`]: curve files, legacy VTK and raw volume output.
//!
//! All angles are reported in the canonical range `[0, 4π)` unless stated
//! otherwise.

pub mod checks;
pub mod curve;
pub mod error;
pub mod fields;
pub mod framing;
pub mod io;
pub mod knots;
pub mod solidangle;
pub mod spherical;

pub use curve::{Link, LinkingNumber, OrientedCurve};
pub use error::{Error, Result};
pub use solidangle::{EvalConfig, Evaluator, GridSpec, ScalarField};

/// Three-vector used throughout the crate.
pub type Vec3 = nalgebra::Vector3<f64>;

pub(crate) const TWO_PI: f64 = std::f64::consts::TAU;
pub(crate) const FOUR_PI: f64 = 2.0 * std::f64::consts::TAU;

/// Reduces an angle into `[0, 4π)`.
pub fn wrap_4pi(value: f64) -> f64 {
    let r = value.rem_euclid(FOUR_PI);
    if r >= FOUR_PI {
        0.0
    } else {
        r
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_2pi(value: f64) -> f64 {
    let r = value.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// Reduces a difference of solid angles into `(-2π, 2π]`, the representative
/// closest to zero.
pub fn wrap_delta(value: f64) -> f64 {
    let r = wrap_4pi(value);
    if r > TWO_PI {
        r - FOUR_PI
    } else {
        r
    }
}
