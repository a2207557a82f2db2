//! Numerical laboratory for the singular Dirichlet problem of minimal graphs
//! in hyperbolic space,
//! `Δf − f_i f_j f_ij / (1 + |∇f|²) + n/f = 0` in Ω, `f = 0` on ∂Ω.

pub mod geometry;
pub mod io;
pub mod analysis;
pub mod barriers;
pub mod chaplygin;
pub mod error;
pub mod mesh;
pub mod newton;
pub mod operator;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
