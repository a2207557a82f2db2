use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, Domain, Vec2};
use crate::mesh::Mesh;

/// `φ(x) = amplitude·exp(−1/(1 − |x−c|²/ρ²))` inside the disk, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec2,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Self {
            center,
            radius,
            amplitude: 1.0,
        }
    }

    /// Value and gradient at `x`.
    pub fn eval(&self, x: Vec2) -> (f64, Vec2) {
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        let rr = self.radius * self.radius;
        let s = (dx * dx + dy * dy) / rr;
        if s >= 1.0 {
            return (0.0, [0.0, 0.0]);
        }
        let phi = self.amplitude * (-1.0 / (1.0 - s)).exp();
        let c = -2.0 * phi / (rr * (1.0 - s) * (1.0 - s));
        (phi, [c * dx, c * dy])
    }
}

/// Three bumps of radius `0.3ρ` at the mesh centre `c` and at `c + 0.35ρ e₁`,
/// `c − 0.35ρ e₂`, with `ρ` the distance from `c` to the boundary.
pub fn default_bumps(domain: &Domain) -> Result<Vec<Bump>> {
    let c = domain.center();
    let c = [c[0], c[1]];
    let rho = domain.sd(c)?;
    let radius = 0.3 * rho;
    Ok([[0.0, 0.0], [0.35, 0.0], [0.0, -0.35]]
        .iter()
        .map(|o| Bump::new([c[0] + o[0] * rho, c[1] + o[1] * rho], radius))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakIdentityReport {
    pub bump: Bump,
    /// `∫ ∇f·∇φ / √(1+|∇f|²)`.
    pub flux_term: f64,
    /// `∫ nφ / (f√(1+|∇f|²))`.
    pub source_term: f64,
    /// `|flux − source| / (|flux| + |source|)`, zero when both vanish.
    pub residual: f64,
    pub cells: usize,
}

const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Evaluates the divergence-form identity against each bump with 2×2 Gauss
/// quadrature on the isoparametric bilinear cells, `f` and `∇f` interpolated
/// from nodal values and nodal derivatives.
pub fn weak_identity_check(
    mesh: &Mesh,
    f: &[f64],
    domain: &Domain,
    n: usize,
    bumps: &[Bump],
) -> Result<Vec<WeakIdentityReport>> {
    if f.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let cells = mesh.cells();
    bumps
        .iter()
        .map(|b| {
            if !(b.radius > 0.0) {
                return Err(Error::Invalid("bump radius must be positive".into()));
            }
            if domain.sd(b.center)? <= b.radius {
                return Err(Error::Invalid(format!(
                    "bump at {:?} with radius {} touches the boundary",
                    b.center, b.radius
                )));
            }
            let touched: Vec<&[usize; 4]> = cells
                .iter()
                .filter(|c| {
                    let reach = c.iter().map(|&k| dist(mesh.nodes[k], mesh.nodes[c[0]])).fold(0.0, f64::max);
                    c.iter().any(|&k| dist(mesh.nodes[k], b.center) < b.radius + reach)
                })
                .collect();
            // Summed in cell order so the result does not depend on scheduling.
            let parts: Vec<(f64, f64)> = touched
                .par_iter()
                .map(|c| cell_integrals(mesh, f, n, b, c))
                .collect::<Result<_>>()?;
            let (flux, source) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
            let denom = flux.abs() + source.abs();
            Ok(WeakIdentityReport {
                bump: *b,
                flux_term: flux,
                source_term: source,
                residual: if denom > 0.0 { (flux - source).abs() / denom } else { 0.0 },
                cells: touched.len(),
            })
        })
        .collect()
}

fn cell_integrals(mesh: &Mesh, f: &[f64], n: usize, b: &Bump, c: &[usize; 4]) -> Result<(f64, f64)> {
    let mut grads = [[0.0; 2]; 4];
    for (slot, &k) in grads.iter_mut().zip(c) {
        if mesh.is_boundary(k) {
            return Err(Error::Invalid("bump support reaches a boundary cell".into()));
        }
        *slot = mesh.gradient(f, k)?;
    }
    let p: Vec<Vec2> = c.iter().map(|&k| mesh.nodes[k]).collect();
    let (mut flux, mut source) = (0.0, 0.0);
    for &u in &GAUSS {
        for &v in &GAUSS {
            let w = [(1.0 - u) * (1.0 - v), u * (1.0 - v), u * v, (1.0 - u) * v];
            let du = [-(1.0 - v), 1.0 - v, v, -v];
            let dv = [-(1.0 - u), -u, u, 1.0 - u];
            let mut x = [0.0; 2];
            let (mut xu, mut xv) = ([0.0; 2], [0.0; 2]);
            let (mut fv, mut g) = (0.0, [0.0; 2]);
            for a in 0..4 {
                for d in 0..2 {
                    x[d] += w[a] * p[a][d];
                    xu[d] += du[a] * p[a][d];
                    xv[d] += dv[a] * p[a][d];
                    g[d] += w[a] * grads[a][d];
                }
                fv += w[a] * f[c[a]];
            }
            let jac = (xu[0] * xv[1] - xu[1] * xv[0]).abs();
            let weight = 0.25 * jac;
            let (phi, gphi) = b.eval(x);
            if phi == 0.0 {
                continue;
            }
            let root = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
            flux += weight * (g[0] * gphi[0] + g[1] * gphi[1]) / root;
            source += weight * n as f64 * phi / (fv * root);
        }
    }
    Ok((flux, source))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hemisphere(mesh: &Mesh) -> Vec<f64> {
        mesh.nodes
            .iter()
            .map(|x| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0).sqrt())
            .collect()
    }

    #[test]
    fn bump_gradient_matches_differences() {
        let b = Bump::new([0.1, -0.2], 0.4);
        let x = [0.25, -0.05];
        let (_, g) = b.eval(x);
        let e = 1e-6;
        let fd = [
            (b.eval([x[0] + e, x[1]]).0 - b.eval([x[0] - e, x[1]]).0) / (2.0 * e),
            (b.eval([x[0], x[1] + e]).0 - b.eval([x[0], x[1] - e]).0) / (2.0 * e),
        ];
        assert!((g[0] - fd[0]).abs() < 1e-8 && (g[1] - fd[1]).abs() < 1e-8);
    }

    #[test]
    fn hemisphere_satisfies_weak_identity() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.02, 3.0).unwrap();
        let f = hemisphere(&mesh);
        let bumps = [Bump::new([0.0, 0.0], 0.5), Bump::new([0.3, 0.1], 0.4), Bump::new([-0.2, -0.4], 0.3)];
        let r = weak_identity_check(&mesh, &f, &ball, 2, &bumps).unwrap();
        assert!(r[0].residual <= 1e-3, "{:?}", r[0]);
        for x in &r {
            assert!(x.residual <= 1e-2, "{x:?}");
        }
    }

    #[test]
    fn zero_bump_and_touching_support() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.05, 3.0).unwrap();
        let f = hemisphere(&mesh);
        let zero = Bump {
            amplitude: 0.0,
            ..Bump::new([0.0, 0.0], 0.5)
        };
        let r = weak_identity_check(&mesh, &f, &ball, 2, &[zero]).unwrap();
        assert_eq!((r[0].flux_term, r[0].source_term, r[0].residual), (0.0, 0.0, 0.0));
        assert!(weak_identity_check(&mesh, &f, &ball, 2, &[Bump::new([0.6, 0.0], 0.5)]).is_err());
    }
}
