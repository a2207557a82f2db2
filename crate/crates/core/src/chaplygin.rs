//! The transform `w = f²/4`, which turns the minimal graph equation into the
//! degenerate equation
//! `Δw − w_i w_j w_ij/(w + |∇w|²) + w/(2w + 2|∇w|²) + (n−1)/2 = 0`
//! of Chaplygin gas flow, with the boundary law `∂w/∂ν = 1/(2H)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{expansion_fit, nodal_derivatives, ExpansionFit, Window};
use crate::error::{Error, Result};
use crate::geometry::{dist, norm, Domain, Vec2};
use crate::mesh::Mesh;
use crate::operator::{self, Regularization};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// `w = f²/4` of a field solved with boundary value `eps` (if any).
    Transformed { eps: Option<f64> },
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WField {
    pub values: Vec<f64>,
    pub provenance: Provenance,
    /// Value carried on the boundary: `ε²/4`, or zero.
    pub boundary_value: f64,
}

impl WField {
    pub fn direct(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Invalid(format!("w at node {k} is negative or not finite")));
        }
        Ok(Self {
            values,
            provenance: Provenance::Direct,
            boundary_value: 0.0,
        })
    }

    /// `f = 2√w`.
    pub fn to_f(&self) -> Vec<f64> {
        self.values.iter().map(|w| 2.0 * w.max(0.0).sqrt()).collect()
    }
}

/// `w = f²/4` nodewise.
pub fn transform(f: &[f64], eps: Option<f64>) -> WField {
    WField {
        values: f.iter().map(|v| 0.25 * v * v).collect(),
        provenance: Provenance::Transformed { eps },
        boundary_value: eps.map_or(0.0, |e| 0.25 * e * e),
    }
}

/// Threshold on `w + |∇w|²` below which a node is skipped.
pub const DEGENERACY: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fm1Residual {
    /// Nodal residual; zero on boundary and skipped nodes.
    pub values: Vec<f64>,
    pub skipped: Vec<usize>,
    pub max_interior: f64,
    pub at: Option<Vec2>,
}

/// `Δw − w_i w_j w_ij/(w+|∇w|²) + w/(2w+2|∇w|²) + (n−1)/2` at `w`, `∇w`, `D²w`.
pub fn fm1_pointwise(w: f64, g: Vec2, hm: [f64; 3], n: f64) -> f64 {
    let q = w + g[0] * g[0] + g[1] * g[1];
    let cross = g[0] * g[0] * hm[0] + 2.0 * g[0] * g[1] * hm[1] + g[1] * g[1] * hm[2];
    hm[0] + hm[2] - cross / q + w / (2.0 * q) + 0.5 * (n - 1.0)
}

pub fn fm1_residual(mesh: &Mesh, wf: &WField, n: usize) -> Result<Fm1Residual> {
    if wf.values.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let ders = nodal_derivatives(mesh, &wf.values)?;
    let evaluated: Vec<Option<f64>> = ders
        .par_iter()
        .enumerate()
        .map(|(k, d)| match d {
            None => Some(0.0),
            Some((g, hm)) => {
                let w = wf.values[k];
                (w + g[0] * g[0] + g[1] * g[1] > DEGENERACY).then(|| fm1_pointwise(w, *g, *hm, n as f64))
            }
        })
        .collect();
    let skipped: Vec<usize> = (0..mesh.len()).filter(|&k| evaluated[k].is_none()).collect();
    let values: Vec<f64> = evaluated.iter().map(|v| v.unwrap_or(0.0)).collect();
    let top = (0..mesh.first_boundary())
        .filter(|k| evaluated[*k].is_some())
        .max_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()).then(b.cmp(&a)));
    Ok(Fm1Residual {
        max_interior: top.map_or(0.0, |k| values[k].abs()),
        at: top.map(|k| mesh.nodes[k]),
        values,
        skipped,
    })
}

/// Allowed `|FM1_i|` in units of the transformed `f`-row scale `(f_i/2)·S_i`.
pub const CHAIN_RULE_FACTOR: f64 = 10.0;

/// Agreement of the two forms on a solved field. The chain rule gives
/// `FM1[f²/4] = (f/2)·Q[f]`, so the `f`-row scale `S_i` of `Q` (sum of the
/// magnitudes of the terms in row `i`) carries over as `(f_i/2)·S_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRuleReport {
    /// `max |FM1_i| / ((f_i/2) S_i)` over interior nodes.
    pub max_fm1_ratio: f64,
    pub at: Vec2,
    /// `max |Q_i| / S_i` over interior nodes, for comparison.
    pub max_q_ratio: f64,
    pub factor: f64,
    pub pass: bool,
}

pub fn chain_rule_check(mesh: &Mesh, f: &[f64], n: usize, eps: f64) -> Result<ChainRuleReport> {
    let reg = Regularization::continuation(n, eps);
    let q = operator::residual(mesh, f, reg)?;
    let s = operator::residual_terms(mesh, f, reg)?;
    let fm1 = fm1_residual(mesh, &transform(f, Some(eps)), n)?;
    let skipped: std::collections::HashSet<usize> = fm1.skipped.iter().copied().collect();
    let (mut worst, mut at, mut q_ratio) = (0.0f64, 0usize, 0.0f64);
    for k in (0..mesh.first_boundary()).filter(|k| !skipped.contains(k)) {
        let r = fm1.values[k].abs() / (0.5 * f[k] * s[k]);
        if r > worst {
            worst = r;
            at = k;
        }
        q_ratio = q_ratio.max(q[k].abs() / s[k]);
    }
    Ok(ChainRuleReport {
        max_fm1_ratio: worst,
        at: mesh.nodes[at],
        max_q_ratio: q_ratio,
        factor: CHAIN_RULE_FACTOR,
        pass: worst <= CHAIN_RULE_FACTOR,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalDerivative {
    pub point: Vec2,
    pub mean_curvature: f64,
    /// `a₁²/4` from the expansion fit of `f = 2√w`.
    pub dw_dnu: f64,
    /// `1/(2H)`.
    pub predicted: f64,
    /// `∂w/∂ν · 2H`.
    pub product: f64,
    pub pass: bool,
    pub fit: ExpansionFit,
}

/// `∂w/∂ν` at `b` through the expansion `f ≈ a₁√d + a₂d`, `w ≈ (a₁²/4) d`.
pub fn normal_derivative(mesh: &Mesh, wf: &WField, domain: &Domain, b: Vec2, window: Window) -> Result<NormalDerivative> {
    let fit = expansion_fit(mesh, &wf.to_f(), domain, b, window)?;
    let h = fit.mean_curvature;
    let dw = 0.25 * fit.a1 * fit.a1;
    let product = dw * 2.0 * h;
    Ok(NormalDerivative {
        point: fit.point,
        mean_curvature: h,
        dw_dnu: dw,
        predicted: 0.5 / h,
        product,
        pass: (0.95..=1.05).contains(&product),
        fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub h: f64,
    /// `max |∇w|` over interior nodes.
    pub max_gradient: f64,
    /// `max |w(x) − w(b)|/|x − b|` with `b` the boundary node of `x`'s ray.
    pub max_boundary_quotient: f64,
    pub value: f64,
    /// Zero-curvature boundary pieces fall outside the Lipschitz statement;
    /// there `|∇w|` grows like `d^{−1/3}`.
    pub flat_boundary: bool,
}

pub fn lipschitz_norm(mesh: &Mesh, wf: &WField, domain: &Domain) -> Result<LipschitzReport> {
    let w = &wf.values;
    if w.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let ders = nodal_derivatives(mesh, w)?;
    let max_gradient = ders.iter().flatten().map(|(g, _)| norm(*g)).fold(0.0, f64::max);
    let max_boundary_quotient = (1..mesh.first_boundary())
        .into_par_iter()
        .map(|k| {
            let (_, j) = mesh.ring_ray(k);
            let b = mesh.node(mesh.rings, j);
            (w[k] - w[b]).abs() / dist(mesh.nodes[k], mesh.nodes[b])
        })
        .reduce(|| 0.0, f64::max);
    Ok(LipschitzReport {
        h: mesh.h,
        max_gradient,
        max_boundary_quotient,
        value: max_gradient.max(max_boundary_quotient),
        flat_boundary: domain.has_flat_boundary(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paraboloid(mesh: &Mesh, r: f64) -> Vec<f64> {
        mesh.nodes.iter().map(|x| 0.25 * (r * r - x[0] * x[0] - x[1] * x[1]).max(0.0)).collect()
    }

    #[test]
    fn pointwise_hand_values() {
        let hm = [-0.5, 0.0, -0.5];
        assert_eq!(fm1_pointwise(0.25, [0.0, 0.0], hm, 2.0), 0.0);
        assert!(fm1_pointwise(3.0 / 16.0, [-0.25, 0.0], hm, 2.0).abs() < 1e-15);
        let c = 0.7;
        assert!((fm1_pointwise(c, [0.0, 0.0], [0.0; 3], 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transform_basics() {
        let f = vec![0.0, 1.0, 2.0, 0.5];
        let w = transform(&f, None);
        assert_eq!(w.values, vec![0.0, 0.25, 1.0, 0.0625]);
        assert_eq!(transform(&[0.0; 3], None).values, vec![0.0; 3]);
        assert_eq!(transform(&f, Some(1e-3)).boundary_value, 0.25e-6);
        let g: Vec<f64> = (0..1000).map(|k| 1e-4 + k as f64 * 0.013).collect();
        let back = transform(&g, None).to_f();
        assert!(g.iter().zip(&back).all(|(a, b)| (a - b).abs() <= 1e-12 * a.max(1.0)));
    }

    #[test]
    fn paraboloid_solves_fm1() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mut last = f64::INFINITY;
        for h in [0.05, 0.025] {
            let mesh = Mesh::build(&ball, h, 3.0).unwrap();
            let wf = WField::direct(paraboloid(&mesh, 1.0)).unwrap();
            let r = fm1_residual(&mesh, &wf, 2).unwrap();
            assert!(r.skipped.is_empty());
            assert!(r.max_interior < 1e-3 && r.max_interior * 2.5 <= last, "{}", r.max_interior);
            last = r.max_interior;
        }
        let mesh = Mesh::build(&ball, 0.05, 3.0).unwrap();
        let zero = WField::direct(vec![0.0; mesh.len()]).unwrap();
        let z = fm1_residual(&mesh, &zero, 2).unwrap();
        assert_eq!(z.skipped.len(), mesh.first_boundary());
    }

    #[test]
    fn paraboloid_boundary_law_and_lipschitz() {
        for r in [1.0, 2.0] {
            let ball = Domain::ball([0.0, 0.0], r).unwrap();
            let mesh = Mesh::build(&ball, 0.02 * r, 3.0).unwrap();
            let wf = WField::direct(paraboloid(&mesh, r)).unwrap();
            let nd = normal_derivative(&mesh, &wf, &ball, [0.0, r], Window::default()).unwrap();
            assert!((nd.predicted - 0.5 * r).abs() < 1e-12);
            assert!(nd.pass, "{}", nd.product);
        }
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.05, 3.0).unwrap();
        let wf = WField::direct(paraboloid(&mesh, 1.0)).unwrap();
        let l = lipschitz_norm(&mesh, &wf, &ball).unwrap();
        assert!((l.value - 0.5).abs() < 1e-3, "{l:?}");
        assert!(!l.flat_boundary);
    }
}
