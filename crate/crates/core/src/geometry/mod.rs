//! Planar (and radially symmetric n-dimensional) domains with exact or
//! semi-analytic distance, normal and curvature queries.

mod curve;
mod domain;
mod ellipse;

pub use curve::{BoundaryCurve, Piece, PieceFoot};
pub use domain::{BoundaryProbe, DistanceResult, Domain, DomainFile, DomainKind};
pub use ellipse::project_to_ellipse;

use thiserror::Error;

/// A point or vector in the plane.
pub type Vec2 = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("member {index} of a convex intersection has a boundary piece with zero mean curvature ({kind})")]
    FlatMember { index: usize, kind: String },
    #[error("point has dimension {got}, domain has dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("point is not finite")]
    NonFinite,
    #[error("projection did not converge after {iterations} iterations (last iterate {last:?})")]
    ProjectionDiverged { iterations: usize, last: Vec2 },
    #[error("point is {distance:e} away from the boundary (tolerance 1e-8)")]
    NotOnBoundary { distance: f64 },
    #[error("{0} is only supported for planar domains")]
    PlanarOnly(&'static str),
    #[error("smoothing is not supported for {0}")]
    Unsupported(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: Vec2, s: f64) -> Vec2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Vec2, b: Vec2) -> f64 {
    norm(sub(a, b))
}

/// Left normal: rotation by +90 degrees.
#[inline]
pub fn perp(a: Vec2) -> Vec2 {
    [-a[1], a[0]]
}

#[inline]
pub fn unit(a: Vec2) -> Vec2 {
    let l = norm(a);
    [a[0] / l, a[1] / l]
}

#[inline]
pub fn lerp(a: Vec2, b: Vec2, t: f64) -> Vec2 {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = a.rem_euclid(tau);
    if r >= tau {
        0.0
    } else {
        r
    }
}
