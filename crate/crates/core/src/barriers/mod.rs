//! Comparison functions for the operator `Q`: the exact hemisphere, the
//! global collar barrier `ψ(d) = A(d^p − d^q)` and the local barrier
//! `A d^α + B|x′ − x₀′|²`, with numerical sign checks and comparison against
//! solved fields.
//!
//! Barrier kinds are strategies behind the [`Barrier`] trait; a
//! [`BarrierRegistry`] maps the `kind` tag of a [`BarrierSpec`] to the
//! constructor of the matching strategy.

mod global;
mod hemisphere;
mod local;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Vec2};
use crate::mesh::Mesh;
use crate::operator::OperatorCoefficients;

pub use global::{
    calibrate_global, h_factor, h_factor_expanded, m_psi, m_psi_direct, GlobalCalibration, GlobalPsi, SIGN_GRID,
};
pub use hemisphere::Hemisphere;
pub use local::{calibrate_local, LocalCalibration, LocalHalfspace, TAU_CAP};

/// Parameters of a comparison function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BarrierSpec {
    /// `ψ(d) = A(d^p − d^q)` on the collar `0 < d < δ`.
    GlobalPsi { a: f64, p: f64, q: f64, delta: f64 },
    /// `A d^α + B|x′ − x₀′|²` on `G_r = {|x′ − x₀′| < √r, 0 < d < r}`,
    /// with `x′` the tangential coordinate at the boundary point `x0`.
    LocalHalfspace {
        x0: Vec2,
        a: f64,
        b: f64,
        alpha: f64,
        r: f64,
    },
    /// `(R² − |x − x₀|²)^{1/2}`.
    Hemisphere { x0: Vec2, radius: f64 },
}

impl BarrierSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            BarrierSpec::GlobalPsi { .. } => "global_psi",
            BarrierSpec::LocalHalfspace { .. } => "local_halfspace",
            BarrierSpec::Hemisphere { .. } => "hemisphere",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BarrierSpec::GlobalPsi { a, p, q, delta } => {
                a > 0.0 && p > 0.0 && p < q && q < 2.0 - p && delta > 0.0
            }
            BarrierSpec::LocalHalfspace { a, b, alpha, r, .. } => {
                a > 0.0 && b > 0.0 && alpha > 0.0 && alpha < 1.0 && r > 0.0
            }
            BarrierSpec::Hemisphere { radius, .. } => radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("barrier parameters out of range: {self:?}")))
        }
    }
}

/// Value, gradient and Hessian `[hxx, hxy, hyy]` of a barrier at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec2,
    pub hess: [f64; 3],
}

impl Jet {
    /// `Q[w]` and the sum of magnitudes of its three terms.
    pub fn q(&self, n: f64) -> (f64, f64) {
        let lap = self.hess[0] + self.hess[2];
        let [gx, gy] = self.grad;
        let g2 = gx * gx + gy * gy;
        let cross = (gx * gx * self.hess[0] + 2.0 * gx * gy * self.hess[1] + gy * gy * self.hess[2]) / (1.0 + g2);
        let sing = n / self.value;
        let q = OperatorCoefficients::at(self.grad).contract(self.hess) + sing;
        (q, lap.abs() + cross.abs() + sing)
    }
}

/// Sample counts for sign checks: boundary feet times inward offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub boundary: usize,
    pub normal: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            boundary: 64,
            normal: 32,
        }
    }
}

/// Smallest distance at which `d` is differenced.
pub const FD_OFFSET: f64 = 1e-5;

/// `d`, `∇d` and `D²d` by central differences at offset [`FD_OFFSET`].
pub fn distance_jet(domain: &Domain, x: Vec2) -> Result<Jet> {
    let h = FD_OFFSET;
    let d = |dx: f64, dy: f64| domain.sd([x[0] + dx, x[1] + dy]);
    let c = d(0.0, 0.0)?;
    let (xp, xm, yp, ym) = (d(h, 0.0)?, d(-h, 0.0)?, d(0.0, h)?, d(0.0, -h)?);
    let pp = d(h, h)?;
    let pm = d(h, -h)?;
    let mp = d(-h, h)?;
    let mm = d(-h, -h)?;
    Ok(Jet {
        value: c,
        grad: [(xp - xm) / (2.0 * h), (yp - ym) / (2.0 * h)],
        hess: [
            (xp - 2.0 * c + xm) / (h * h),
            (pp - pm - mp + mm) / (4.0 * h * h),
            (yp - 2.0 * c + ym) / (h * h),
        ],
    })
}

/// A comparison function bound to a domain.
pub trait Barrier: Send + Sync {
    fn spec(&self) -> BarrierSpec;
    fn jet(&self, x: Vec2) -> Result<Jet>;
    /// Whether `x` (at distance `d` from the boundary) lies in the region
    /// where the barrier is asserted.
    fn contains(&self, x: Vec2, d: f64) -> bool;
    /// Points of the region used by sign checks.
    fn samples(&self, sampling: Sampling) -> Result<Vec<Vec2>>;
    /// Exact solutions are checked for `|Q| ≤ tol`, supersolutions for
    /// `Q ≤ tol·scale`.
    fn is_exact(&self) -> bool {
        false
    }
    fn value(&self, x: Vec2) -> Result<f64> {
        Ok(self.jet(x)?.value)
    }
}

type Builder = Box<dyn Fn(&BarrierSpec, &Domain) -> Result<Box<dyn Barrier>> + Send + Sync>;

/// Constructors of barrier strategies keyed by kind.
pub struct BarrierRegistry {
    builders: BTreeMap<&'static str, Builder>,
}

impl Default for BarrierRegistry {
    fn default() -> Self {
        let mut r = Self {
            builders: BTreeMap::new(),
        };
        r.register("hemisphere", |s, d| Ok(Box::new(Hemisphere::new(s, d)?)));
        r.register("global_psi", |s, d| Ok(Box::new(GlobalPsi::new(s, d)?)));
        r.register("local_halfspace", |s, d| Ok(Box::new(LocalHalfspace::new(s, d)?)));
        r
    }
}

impl BarrierRegistry {
    pub fn register<F>(&mut self, kind: &'static str, build: F)
    where
        F: Fn(&BarrierSpec, &Domain) -> Result<Box<dyn Barrier>> + Send + Sync + 'static,
    {
        self.builders.insert(kind, Box::new(build));
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, spec: &BarrierSpec, domain: &Domain) -> Result<Box<dyn Barrier>> {
        spec.validate()?;
        let build = self
            .builders
            .get(spec.kind())
            .ok_or_else(|| Error::Invalid(format!("no barrier registered for kind {}", spec.kind())))?;
        build(spec, domain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignSample {
    pub x: Vec2,
    pub d: f64,
    pub w: f64,
    pub q: f64,
    /// Sum of the magnitudes of the terms of `Q[w]`.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignReport {
    pub barrier: BarrierSpec,
    pub exact: bool,
    pub samples: Vec<SignSample>,
    /// Largest `Q/scale` (supersolutions) or `|Q|` (exact solutions).
    pub max_violation: f64,
    pub max_q: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const SUPERSOLUTION_TOL: f64 = 1e-6;
pub const EXACT_TOL: f64 = 1e-8;

/// Evaluates `Q[w]` at the barrier's sample points.
pub fn verify_supersolution(barrier: &dyn Barrier, domain: &Domain, sampling: Sampling) -> Result<SignReport> {
    let n = domain.n() as f64;
    let points = barrier.samples(sampling)?;
    if points.is_empty() {
        return Err(Error::Analysis("barrier region has no sample points".into()));
    }
    let samples: Vec<SignSample> = points
        .par_iter()
        .map(|&x| {
            let jet = barrier.jet(x)?;
            if !(jet.value > 0.0) {
                return Err(Error::Analysis(format!(
                    "barrier value {:e} at {x:?} is not positive",
                    jet.value
                )));
            }
            let (q, scale) = jet.q(n);
            Ok(SignSample {
                x,
                d: domain.sd(x)?,
                w: jet.value,
                q,
                scale,
            })
        })
        .collect::<Result<_>>()?;
    let exact = barrier.is_exact();
    let violation = |s: &SignSample| if exact { s.q.abs() } else { s.q / s.scale };
    let max_violation = samples.iter().map(violation).fold(f64::NEG_INFINITY, f64::max);
    let max_q = samples.iter().map(|s| s.q).fold(f64::NEG_INFINITY, f64::max);
    let tolerance = if exact { EXACT_TOL } else { SUPERSOLUTION_TOL };
    Ok(SignReport {
        barrier: barrier.spec(),
        exact,
        samples,
        max_violation,
        max_q,
        tolerance,
        pass: max_violation <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub barrier: BarrierSpec,
    pub nodes_checked: usize,
    /// `max (f − w)` over the region; `-inf` when no node is in the region.
    pub max_violation: f64,
    pub at: Option<Vec2>,
}

impl ComparisonReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

/// Default tolerance of [`ComparisonReport::passes`] for solved fields.
pub const COMPARISON_TOL: f64 = 5e-3;

/// `max (f − w)` over mesh nodes in the barrier's region.
pub fn compare(mesh: &Mesh, f: &[f64], barrier: &dyn Barrier) -> Result<ComparisonReport> {
    if f.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut at = None;
    let mut count = 0;
    for (k, &x) in mesh.nodes.iter().enumerate() {
        if !barrier.contains(x, mesh.dist[k]) {
            continue;
        }
        count += 1;
        let v = f[k] - barrier.value(x)?;
        if v > worst {
            worst = v;
            at = Some(x);
        }
    }
    Ok(ComparisonReport {
        barrier: barrier.spec(),
        nodes_checked: count,
        max_violation: worst,
        at,
    })
}

/// Boundary feet (with inward normals) spaced evenly along the boundary,
/// skipping corners.
pub(crate) fn boundary_feet(domain: &Domain, count: usize) -> Result<Vec<(Vec2, Vec2)>> {
    let curve = domain.curve()?;
    let len = curve.length();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let b = curve.point_at_arclength((k as f64 + 0.5) * len / count as f64);
        let probe = domain.boundary_probe(&b)?;
        if probe.is_corner {
            continue;
        }
        out.push((b, [probe.inward_normal[0], probe.inward_normal[1]]));
    }
    Ok(out)
}

/// `count` offsets log-spaced in `[lo, hi]`.
pub(crate) fn log_offsets(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}
