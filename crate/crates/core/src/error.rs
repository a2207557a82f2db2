use thiserror::Error;

use crate::geometry::{GeometryError, Vec2};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("target spacing {h} is too coarse to resolve the {feature}")]
    TooCoarse { feature: String, h: f64 },
    #[error("mesh: {0}")]
    Mesh(String),
    #[error("node {node} has no full difference stencil (missing neighbours: {missing})")]
    Stencil { node: usize, missing: String },
    #[error("field value {value:e} at interior node {node} ({x:?}) is not positive")]
    NonPositive { node: usize, x: Vec2, value: f64 },
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("linear solve failed: {0}")]
    Linear(String),
    #[error("{0}")]
    Analysis(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
