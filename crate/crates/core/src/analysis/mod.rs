//! Measurements on solved fields: Hölder semi-norms, boundary growth
//! exponents and expansion coefficients, the gradient invariant, concavity,
//! the sign of the Laplacian and the weak form of the equation.

mod holder;
mod invariants;
mod rays;
mod weak;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{dist, Vec2};
use crate::mesh::Mesh;

pub use holder::{holder_bound, holder_seminorm, HolderReport, PairSampling};
pub use invariants::{
    concavity_check, gradient_invariant, gradient_power_max, laplacian_sign, ConcavityReport, InvariantReport,
    LaplacianReport,
};
pub use rays::{expansion_fit, growth_exponent, ray_samples, ExpansionFit, ExponentReport, RaySample, Window};
pub use weak::{default_bumps, weak_identity_check, Bump, WeakIdentityReport};

/// Node subsets on which a check is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    #[default]
    All,
    /// Nodes with `0 < d < width`.
    Collar { width: f64 },
    /// Nodes within `radius` of any of `centers`.
    Near { centers: Vec<Vec2>, radius: f64 },
}

impl Region {
    pub fn contains(&self, x: Vec2, d: f64) -> bool {
        match self {
            Region::All => true,
            Region::Collar { width } => d > 0.0 && d < *width,
            Region::Near { centers, radius } => centers.iter().any(|c| dist(*c, x) < *radius),
        }
    }
}

/// Gradient and Hessian at every interior node (`None` on the boundary).
pub fn nodal_derivatives(mesh: &Mesh, f: &[f64]) -> Result<Vec<Option<(Vec2, [f64; 3])>>> {
    let nb = mesh.first_boundary();
    (0..mesh.len())
        .into_par_iter()
        .map(|k| if k < nb { mesh.derivatives(f, k).map(Some) } else { Ok(None) })
        .collect()
}

/// Largest nodal value.
pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}
