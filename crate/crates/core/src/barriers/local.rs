//! The local barrier `w = A d^α + B|x′ − x₀′|²` on
//! `G_r = {|x′ − x₀′| < √r, 0 < d < r}` near a strictly convex boundary point.

use serde::Serialize;

use super::{boundary_feet, distance_jet, log_offsets, verify_supersolution, Barrier, BarrierSpec, Jet, Sampling, SignReport, FD_OFFSET};
use crate::error::{Error, Result};
use crate::geometry::{add, dot, perp, scale, sub, Domain, Vec2};

pub struct LocalHalfspace {
    x0: Vec2,
    tangent: Vec2,
    a: f64,
    b: f64,
    alpha: f64,
    r: f64,
    domain: Domain,
}

impl LocalHalfspace {
    pub fn new(spec: &BarrierSpec, domain: &Domain) -> Result<Self> {
        let BarrierSpec::LocalHalfspace { x0, a, b, alpha, r } = *spec else {
            return Err(Error::Invalid(format!("expected a local_halfspace barrier, got {}", spec.kind())));
        };
        let probe = domain.boundary_probe(&x0)?;
        match probe.mean_curvature {
            Some(h) if h > 0.0 => {}
            _ => {
                return Err(Error::Invalid(format!(
                    "local barrier needs a smooth boundary point with H > 0 at {x0:?}"
                )))
            }
        }
        let nu = [probe.inward_normal[0], probe.inward_normal[1]];
        Ok(Self {
            x0: [probe.point[0], probe.point[1]],
            tangent: perp(nu),
            a,
            b,
            alpha,
            r,
            domain: domain.clone(),
        })
    }

    fn tangential(&self, x: Vec2) -> f64 {
        dot(sub(x, self.x0), self.tangent)
    }
}

impl Barrier for LocalHalfspace {
    fn spec(&self) -> BarrierSpec {
        BarrierSpec::LocalHalfspace {
            x0: self.x0,
            a: self.a,
            b: self.b,
            alpha: self.alpha,
            r: self.r,
        }
    }

    fn jet(&self, x: Vec2) -> Result<Jet> {
        let dj = distance_jet(&self.domain, x)?;
        let d = dj.value;
        if !(d > 0.0) {
            return Err(Error::Analysis(format!("point {x:?} is not inside the domain")));
        }
        let s = self.tangential(x);
        let t = self.tangent;
        let c1 = self.a * self.alpha * d.powf(self.alpha - 1.0);
        let c2 = self.a * self.alpha * (self.alpha - 1.0) * d.powf(self.alpha - 2.0);
        let [gx, gy] = dj.grad;
        Ok(Jet {
            value: self.a * d.powf(self.alpha) + self.b * s * s,
            grad: [c1 * gx + 2.0 * self.b * s * t[0], c1 * gy + 2.0 * self.b * s * t[1]],
            hess: [
                c2 * gx * gx + c1 * dj.hess[0] + 2.0 * self.b * t[0] * t[0],
                c2 * gx * gy + c1 * dj.hess[1] + 2.0 * self.b * t[0] * t[1],
                c2 * gy * gy + c1 * dj.hess[2] + 2.0 * self.b * t[1] * t[1],
            ],
        })
    }

    fn contains(&self, x: Vec2, d: f64) -> bool {
        d > 0.0 && d < self.r && self.tangential(x).abs() < self.r.sqrt()
    }

    fn samples(&self, sampling: Sampling) -> Result<Vec<Vec2>> {
        let half = self.r.sqrt();
        let offsets = log_offsets((2.0 * FD_OFFSET).max(1e-4 * self.r), self.r * (1.0 - 1e-6), sampling.normal);
        let len = self.domain.curve()?.length();
        // Enough feet along the whole boundary that `sampling.boundary` of
        // them fall inside the tangential window.
        let total = ((sampling.boundary as f64) * len / (2.0 * half)).ceil() as usize;
        let mut out = Vec::new();
        for (b, nu) in boundary_feet(&self.domain, total.max(sampling.boundary))? {
            if self.tangential(b).abs() >= half || dot(sub(b, self.x0), perp(self.tangent)).abs() > half {
                continue;
            }
            for &t in &offsets {
                let x = add(b, scale(nu, t));
                let d = self.domain.sd(x)?;
                if d >= 2.0 * FD_OFFSET && self.contains(x, d) {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }
}

/// Largest factor the local calibration tries for `τ`.
pub const TAU_CAP: f64 = 1_048_576.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalCalibration {
    pub spec: BarrierSpec,
    pub tau: f64,
    /// Sign check of the returned barrier (the last one tried on failure).
    pub report: SignReport,
    pub pass: bool,
}

/// Doubles `τ` from 1 until `A = τ sup f/r^α`, `B = sup f/r` passes the sign
/// check on `G_r`, giving up beyond [`TAU_CAP`].
pub fn calibrate_local(
    domain: &Domain,
    x0: Vec2,
    sup_f: f64,
    r: f64,
    alpha: f64,
    sampling: Sampling,
) -> Result<LocalCalibration> {
    if !(sup_f > 0.0 && r > 0.0) {
        return Err(Error::Invalid("local calibration needs sup f > 0 and r > 0".into()));
    }
    let mut tau = 1.0;
    loop {
        let spec = BarrierSpec::LocalHalfspace {
            x0,
            a: tau * sup_f / r.powf(alpha),
            b: sup_f / r,
            alpha,
            r,
        };
        spec.validate()?;
        let barrier = LocalHalfspace::new(&spec, domain)?;
        let report = verify_supersolution(&barrier, domain, sampling)?;
        if report.pass || tau >= TAU_CAP {
            return Ok(LocalCalibration {
                spec: barrier.spec(),
                tau,
                pass: report.pass,
                report,
            });
        }
        tau *= 2.0;
    }
}
