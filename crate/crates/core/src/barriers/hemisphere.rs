//! The exact solution on a disk, `(R² − |x − x₀|²)^{1/2}`.

use super::{boundary_feet, log_offsets, Barrier, BarrierSpec, Jet, Sampling};
use crate::error::{Error, Result};
use crate::geometry::{add, scale, Domain, Vec2};

pub struct Hemisphere {
    x0: Vec2,
    radius: f64,
    domain: Domain,
}

impl Hemisphere {
    pub fn new(spec: &BarrierSpec, domain: &Domain) -> Result<Self> {
        match *spec {
            BarrierSpec::Hemisphere { x0, radius } => Ok(Self {
                x0,
                radius,
                domain: domain.clone(),
            }),
            _ => Err(Error::Invalid(format!("expected a hemisphere, got {}", spec.kind()))),
        }
    }

    fn r2(&self, x: Vec2) -> f64 {
        (x[0] - self.x0[0]).powi(2) + (x[1] - self.x0[1]).powi(2)
    }
}

impl Barrier for Hemisphere {
    fn spec(&self) -> BarrierSpec {
        BarrierSpec::Hemisphere {
            x0: self.x0,
            radius: self.radius,
        }
    }

    fn jet(&self, x: Vec2) -> Result<Jet> {
        let s = self.radius * self.radius - self.r2(x);
        if !(s > 0.0) {
            return Err(Error::Analysis(format!("point {x:?} is outside the hemisphere's disk")));
        }
        let w = s.sqrt();
        let (u, v) = (x[0] - self.x0[0], x[1] - self.x0[1]);
        let w3 = w * s;
        Ok(Jet {
            value: w,
            grad: [-u / w, -v / w],
            hess: [-1.0 / w - u * u / w3, -u * v / w3, -1.0 / w - v * v / w3],
        })
    }

    fn contains(&self, x: Vec2, d: f64) -> bool {
        d > 0.0 && self.r2(x) < self.radius * self.radius
    }

    fn samples(&self, sampling: Sampling) -> Result<Vec<Vec2>> {
        let offsets = log_offsets(1e-3 * self.radius, self.radius * (1.0 - 1e-3), sampling.normal);
        let mut out = Vec::new();
        for (b, nu) in boundary_feet(&self.domain, sampling.boundary)? {
            for &t in &offsets {
                let x = add(b, scale(nu, t));
                if self.radius * self.radius - self.r2(x) > 1e-6 * self.radius * self.radius {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }

    fn value(&self, x: Vec2) -> Result<f64> {
        Ok((self.radius * self.radius - self.r2(x)).max(0.0).sqrt())
    }

    fn is_exact(&self) -> bool {
        true
    }
}
