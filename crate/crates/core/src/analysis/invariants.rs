use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{nodal_derivatives, sup_norm, Region};
use crate::error::{Error, Result};
use crate::geometry::{lerp, norm, Domain, Vec2};
use crate::mesh::Mesh;

const RATIO_SLACK: f64 = 1.02;
/// Concavity passes when the midpoint violation is at most this times `‖f‖∞`.
pub const CONCAVITY_TOL: f64 = 5e-3;
/// Tolerance on `max Δf`.
pub const LAPLACIAN_TOL: f64 = 5e-3;
const LAPLACIAN_RATIO_SLACK: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub n: usize,
    /// `max fⁿ√(1+|∇f|²)` over interior nodes.
    pub max_invariant: f64,
    pub at: Vec2,
    /// `‖f‖ⁿ∞`.
    pub reference: f64,
    pub ratio: f64,
    /// `max |∇f^{n+1}| / ((n+1) diamⁿ)`.
    pub derivative_ratio: f64,
    pub pass: bool,
}

fn take_max(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Evaluates `fⁿ√(1+|∇f|²) ≤ ‖f‖ⁿ∞` and `|∇f^{n+1}| ≤ (n+1) diamⁿ` on the
/// interior nodes.
pub fn gradient_invariant(mesh: &Mesh, f: &[f64], n: usize, diam: f64) -> Result<InvariantReport> {
    if f.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let ders = nodal_derivatives(mesh, f)?;
    let ni = n as i32;
    let none = (f64::NEG_INFINITY, 0);
    let (inv, grad) = ders
        .par_iter()
        .enumerate()
        .filter_map(|(k, d)| d.map(|(g, _)| (k, g)))
        .map(|(k, g)| {
            let fk = f[k].max(0.0);
            let p = norm(g);
            let inv = fk.powi(ni) * (1.0 + p * p).sqrt();
            let grad = (n as f64 + 1.0) * fk.powi(ni) * p;
            ((inv, k), (grad, k))
        })
        .reduce(|| (none, none), |a, b| (take_max(a.0, b.0), take_max(a.1, b.1)));
    let reference = sup_norm(f).powi(ni);
    if !(reference > 0.0) {
        return Err(Error::Analysis("gradient invariant needs a nonzero field".into()));
    }
    let ratio = inv.0 / reference;
    let derivative_ratio = grad.0 / ((n as f64 + 1.0) * diam.powi(ni));
    Ok(InvariantReport {
        n,
        max_invariant: inv.0,
        at: mesh.nodes[inv.1],
        reference,
        ratio,
        derivative_ratio,
        pass: ratio <= RATIO_SLACK && derivative_ratio <= RATIO_SLACK,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    /// `max ½(f(x)+f(y)) − f((x+y)/2)` over the pairs (negative when every
    /// pair is strictly concave).
    pub max_violation: f64,
    pub at: Option<[Vec2; 2]>,
    pub sup_norm: f64,
    pub tolerance: f64,
    pub pairs: usize,
    pub seed: u64,
    pub pass: bool,
}

/// Midpoint concavity over random pairs of interior nodes, the midpoint
/// value taken from piecewise-linear interpolation.
pub fn concavity_check(mesh: &Mesh, f: &[f64], domain: &Domain, pairs: usize, seed: u64) -> Result<ConcavityReport> {
    if !domain.is_convex() {
        return Err(Error::Invalid("concavity check needs a convex domain".into()));
    }
    if f.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let interior = mesh.first_boundary();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let list: Vec<(usize, usize)> = (0..pairs)
        .map(|_| (rng.random_range(0..interior), rng.random_range(0..interior)))
        .collect();
    let none = (f64::NEG_INFINITY, 0, 0);
    let top = list
        .par_iter()
        .map(|&(a, b)| {
            let mid = lerp(mesh.nodes[a], mesh.nodes[b], 0.5);
            (0.5 * (f[a] + f[b]) - mesh.interpolate_linear(f, mid), a, b)
        })
        .reduce(
            || none,
            |x, y| if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) { y } else { x },
        );
    let sup = sup_norm(f);
    let tolerance = CONCAVITY_TOL * sup;
    Ok(ConcavityReport {
        max_violation: top.0,
        at: (pairs > 0).then(|| [mesh.nodes[top.1], mesh.nodes[top.2]]),
        sup_norm: sup,
        tolerance,
        pairs,
        seed,
        pass: pairs == 0 || top.0 <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplacianReport {
    pub region: Region,
    pub nodes: usize,
    pub max_laplacian: f64,
    pub at: Option<Vec2>,
    /// `max |Δf|·f / (n(1+|∇f|²))`, at most one for solutions.
    pub max_ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Sign of the discrete Laplacian and the bound `|Δf| ≤ (n/f)(1+|∇f|²)`
/// over the interior nodes of `region`.
pub fn laplacian_sign(mesh: &Mesh, f: &[f64], n: usize, region: &Region) -> Result<LaplacianReport> {
    if f.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let ders = nodal_derivatives(mesh, f)?;
    let vals: Vec<(usize, f64, f64)> = ders
        .iter()
        .enumerate()
        .filter_map(|(k, d)| d.map(|(g, h)| (k, g, h)))
        .filter(|(k, _, _)| region.contains(mesh.nodes[*k], mesh.dist[*k]))
        .map(|(k, g, h)| {
            let lap = h[0] + h[2];
            let ratio = lap.abs() * f[k] / (n as f64 * (1.0 + g[0] * g[0] + g[1] * g[1]));
            (k, lap, ratio)
        })
        .collect();
    let top = vals
        .iter()
        .fold(None::<(usize, f64)>, |m, &(k, l, _)| match m {
            Some((_, b)) if b >= l => m,
            _ => Some((k, l)),
        });
    let max_ratio = vals.iter().fold(0.0, |m: f64, v| m.max(v.2));
    let max_laplacian = top.map_or(f64::NEG_INFINITY, |t| t.1);
    Ok(LaplacianReport {
        region: region.clone(),
        nodes: vals.len(),
        max_laplacian,
        at: top.map(|t| mesh.nodes[t.0]),
        max_ratio,
        tolerance: LAPLACIAN_TOL,
        pass: max_laplacian <= LAPLACIAN_TOL && max_ratio <= LAPLACIAN_RATIO_SLACK,
    })
}

/// `max |∇(f^power)|` over the interior nodes of `region`.
pub fn gradient_power_max(mesh: &Mesh, f: &[f64], power: f64, region: &Region) -> Result<f64> {
    if f.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let ders = nodal_derivatives(mesh, f)?;
    Ok(ders
        .iter()
        .enumerate()
        .filter_map(|(k, d)| d.map(|(g, _)| (k, g)))
        .filter(|(k, _)| region.contains(mesh.nodes[*k], mesh.dist[*k]))
        .map(|(k, g)| power * f[k].max(0.0).powf(power - 1.0) * norm(g))
        .fold(0.0, f64::max))
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
    fn invariant_on_hemisphere_peaks_at_centre() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.05, 3.0).unwrap();
        let f = hemisphere(&mesh);
        let r = gradient_invariant(&mesh, &f, 2, 2.0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-6, "{}", r.ratio);
        assert!(norm(r.at) < 1e-12);
        assert!(r.pass);
        let c = 3.0;
        let g: Vec<f64> = f.iter().map(|v| c * v).collect();
        let rc = gradient_invariant(&mesh, &g, 2, 2.0).unwrap();
        assert!(rc.max_invariant >= c * c * r.max_invariant * (1.0 - 1e-9));
    }

    #[test]
    fn concavity_of_hemisphere_and_affine() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.05, 3.0).unwrap();
        let f = hemisphere(&mesh);
        let r = concavity_check(&mesh, &f, &ball, 100_000, 1).unwrap();
        assert!(r.pass, "{}", r.max_violation);
        let affine: Vec<f64> = mesh.nodes.iter().map(|x| 0.3 + 2.0 * x[0] - 0.7 * x[1]).collect();
        let a = concavity_check(&mesh, &affine, &ball, 100_000, 1).unwrap();
        assert!(a.max_violation.abs() < 1e-12, "{}", a.max_violation);
    }

    #[test]
    fn laplacian_on_hemisphere() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.05, 3.0).unwrap();
        let f = hemisphere(&mesh);
        let r = laplacian_sign(&mesh, &f, 2, &Region::All).unwrap();
        assert!(r.max_laplacian < 0.0, "{}", r.max_laplacian);
        assert!(r.max_ratio <= 1.0 + 1e-3, "{}", r.max_ratio);
        assert!(r.pass);
    }

    #[test]
    fn gradient_of_square_of_hemisphere() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.05, 3.0).unwrap();
        let f = hemisphere(&mesh);
        // |∇(1 − r²)| = 2r < 2.
        let m = gradient_power_max(&mesh, &f, 2.0, &Region::All).unwrap();
        assert!(m < 2.0 + 1e-3 && m > 1.9, "{m}");
    }
}
