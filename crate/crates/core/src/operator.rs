//! Nodal fields and the discrete operator
//! `Q_ε[f] = Δf − f_i f_j f_ij/(1 + |∇f|²) + n/max(f, ε)` with its Newton
//! linearization.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    F,
    W,
    Residual,
}

/// Nodal values on a mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub kind: FieldKind,
    /// Regularization parameter the values were computed with.
    pub eps: Option<f64>,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(kind: FieldKind, eps: Option<f64>, values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("field value at node {k} is not finite")));
        }
        Ok(Self { kind, eps, values })
    }
}

/// `a_ij(p) = δ_ij − p_i p_j/(1 + |p|²)`, stored as `[a11, a12, a22]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorCoefficients {
    pub a: [f64; 3],
}

impl OperatorCoefficients {
    pub fn at(p: Vec2) -> Self {
        let w2 = 1.0 + p[0] * p[0] + p[1] * p[1];
        Self {
            a: [1.0 - p[0] * p[0] / w2, -p[0] * p[1] / w2, 1.0 - p[1] * p[1] / w2],
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let [a, b, c] = self.a;
        let mean = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        [mean - rad, mean + rad]
    }

    /// `a_ij H_ij` for a symmetric `H = [hxx, hxy, hyy]`.
    #[inline]
    pub fn contract(&self, hm: [f64; 3]) -> f64 {
        self.a[0] * hm[0] + 2.0 * self.a[1] * hm[1] + self.a[2] * hm[2]
    }
}

/// `Q` evaluated from pointwise data, with the singular term `n/max(f, ε)`.
#[inline]
pub fn q_pointwise(g: Vec2, hm: [f64; 3], f: f64, n: f64, eps: f64) -> f64 {
    OperatorCoefficients::at(g).contract(hm) + n / f.max(eps)
}

/// Settings shared by residual and Jacobian evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    /// Dimension in the singular term.
    pub n: f64,
    pub eps: f64,
    /// Dirichlet value imposed on boundary nodes.
    pub boundary_value: f64,
}

impl Regularization {
    /// The continuation convention: boundary value equal to `ε`.
    pub fn continuation(n: usize, eps: f64) -> Self {
        Self {
            n: n as f64,
            eps,
            boundary_value: eps,
        }
    }
}

fn check_positive(mesh: &Mesh, f: &[f64]) -> Result<()> {
    if f.len() != mesh.len() {
        return Err(Error::Invalid(format!(
            "field has {} values, mesh has {} nodes",
            f.len(),
            mesh.len()
        )));
    }
    if let Some(k) = (0..mesh.first_boundary()).find(|&k| !(f[k] > 0.0)) {
        return Err(Error::NonPositive {
            node: k,
            x: mesh.nodes[k],
            value: f[k],
        });
    }
    Ok(())
}

/// `Q_ε[f]` at interior nodes and `f − g_ε` at boundary nodes.
pub fn residual(mesh: &Mesh, f: &[f64], reg: Regularization) -> Result<Vec<f64>> {
    check_positive(mesh, f)?;
    let nb = mesh.first_boundary();
    (0..mesh.len())
        .into_par_iter()
        .map(|k| {
            if k >= nb {
                return Ok(f[k] - reg.boundary_value);
            }
            let (g, hm) = mesh.derivatives(f, k)?;
            Ok(q_pointwise(g, hm, f[k], reg.n, reg.eps))
        })
        .collect()
}

/// Magnitude of the terms summed in each residual row,
/// `Σ_k |(a:c_H)_k (f_k − f_i)| + n/max(f_i, ε)`, and `1` on boundary rows.
pub fn residual_terms(mesh: &Mesh, f: &[f64], reg: Regularization) -> Result<Vec<f64>> {
    check_positive(mesh, f)?;
    let nb = mesh.first_boundary();
    (0..mesh.len())
        .into_par_iter()
        .map(|k| {
            if k >= nb {
                return Ok(1.0);
            }
            let (g, _) = mesh.derivatives(f, k)?;
            let coef = OperatorCoefficients::at(g);
            let second = mesh.with_stencil(k, |nodes, _, hess| {
                nodes
                    .iter()
                    .zip(hess)
                    .map(|(&j, ch)| (coef.contract(*ch) * (f[j] - f[k])).abs())
                    .sum::<f64>()
            })?;
            Ok(second + reg.n / f[k].max(reg.eps))
        })
        .collect()
}

/// Sparsity pattern of the Jacobian: `(row, column)` pairs in the order
/// produced by [`jacobian_values`]. Repeated pairs are summed.
pub fn jacobian_pattern(mesh: &Mesh) -> Vec<(usize, usize)> {
    let nb = mesh.first_boundary();
    (0..mesh.len())
        .into_par_iter()
        .flat_map_iter(|k| {
            let cols: Vec<usize> = if k >= nb {
                vec![k]
            } else {
                let mut c = mesh
                    .with_stencil(k, |nodes, _, _| nodes.to_vec())
                    .expect("interior nodes have stencils");
                c.push(k);
                c
            };
            cols.into_iter().map(move |c| (k, c))
        })
        .collect()
}

/// Jacobian entries of [`residual`] matching [`jacobian_pattern`].
pub fn jacobian_values(mesh: &Mesh, f: &[f64], reg: Regularization) -> Result<Vec<f64>> {
    check_positive(mesh, f)?;
    let nb = mesh.first_boundary();
    let rows: Vec<Vec<f64>> = (0..mesh.len())
        .into_par_iter()
        .map(|k| -> Result<Vec<f64>> {
            if k >= nb {
                return Ok(vec![1.0]);
            }
            let (g, hm) = mesh.derivatives(f, k)?;
            let coef = OperatorCoefficients::at(g);
            let w2 = 1.0 + g[0] * g[0] + g[1] * g[1];
            let hg = [hm[0] * g[0] + hm[1] * g[1], hm[1] * g[0] + hm[2] * g[1]];
            let ghg = g[0] * hg[0] + g[1] * hg[1];
            // ∂(a_ij H_ij)/∂g_k.
            let da = [
                -2.0 * hg[0] / w2 + 2.0 * ghg * g[0] / (w2 * w2),
                -2.0 * hg[1] / w2 + 2.0 * ghg * g[1] / (w2 * w2),
            ];
            let mut row = mesh.with_stencil(k, |_, grad, hess| {
                grad.iter()
                    .zip(hess)
                    .map(|(cg, ch)| coef.contract(*ch) + da[0] * cg[0] + da[1] * cg[1])
                    .collect::<Vec<f64>>()
            })?;
            row.push(if f[k] > reg.eps { -reg.n / (f[k] * f[k]) } else { 0.0 });
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Matrix-vector product with the Jacobian in triplet form.
pub fn apply_triplets(pattern: &[(usize, usize)], values: &[f64], x: &[f64], out_len: usize) -> Vec<f64> {
    let mut y = vec![0.0; out_len];
    for (&(r, c), v) in pattern.iter().zip(values) {
        y[r] += v * x[c];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ball_mesh(h: f64) -> Mesh {
        Mesh::build(&Domain::ball([0.0, 0.0], 1.0).unwrap(), h, 3.0).unwrap()
    }

    #[test]
    fn ellipticity_bounds() {
        for p in [[0.0, 0.0], [3.0, -1.0], [1e4, 2.0]] {
            let w2 = 1.0 + p[0] * p[0] + p[1] * p[1];
            let [lo, hi] = OperatorCoefficients::at(p).eigenvalues();
            assert!((lo - 1.0 / w2).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_and_affine_fields() {
        let m = ball_mesh(0.1);
        let reg = Regularization::continuation(2, 1e-3);
        let c = 0.7;
        let f = vec![c; m.len()];
        let r = residual(&m, &f, reg).unwrap();
        for k in 0..m.first_boundary() {
            assert!((r[k] - 2.0 / c).abs() < 1e-9);
        }
        let pattern = jacobian_pattern(&m);
        let vals = jacobian_values(&m, &f, reg).unwrap();
        let diag: f64 = pattern
            .iter()
            .zip(&vals)
            .filter(|((r, cidx), _)| *r == 5 && *cidx == 5)
            .map(|(_, v)| v)
            .sum();
        let stencil_sum: f64 = pattern
            .iter()
            .zip(&vals)
            .filter(|((r, _), _)| *r == 5)
            .map(|(_, v)| v)
            .sum();
        // Stencil rows annihilate constants, leaving the singular term.
        assert!((stencil_sum + 2.0 / (c * c)).abs() < 1e-8, "{stencil_sum}");
        assert!(diag.is_finite());

        let f: Vec<f64> = m.nodes.iter().map(|p| p[0] + 2.0).collect();
        let r = residual(&m, &f, reg).unwrap();
        for k in 0..m.first_boundary() {
            assert!((r[k] - 2.0 / (m.nodes[k][0] + 2.0)).abs() < 1e-6, "{k}");
        }
    }

    #[test]
    fn nonpositive_interior_value_is_reported() {
        let m = ball_mesh(0.1);
        let mut f = vec![1.0; m.len()];
        f[7] = 0.0;
        let err = residual(&m, &f, Regularization::continuation(2, 1e-3)).unwrap_err();
        assert!(matches!(err, Error::NonPositive { node: 7, .. }));
    }

    fn hemisphere(m: &Mesh) -> Vec<f64> {
        m.nodes
            .iter()
            .map(|p| (1.0 - p[0] * p[0] - p[1] * p[1]).max(0.0).sqrt())
            .collect()
    }

    #[test]
    fn hemisphere_residual_converges_on_interior_collar() {
        let mut errs = Vec::new();
        for h in [0.04, 0.02] {
            let m = ball_mesh(h);
            let f = hemisphere(&m);
            let r = residual(&m, &f, Regularization::continuation(2, 0.0)).unwrap();
            let e = (0..m.first_boundary())
                .filter(|&k| m.dist[k] > 0.2)
                .map(|k| r[k].abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order >= 1.5, "{errs:?}");
    }

    fn smooth_random(m: &Mesh, rng: &mut ChaCha8Rng, offset: f64) -> Vec<f64> {
        let waves: Vec<[f64; 4]> = (0..4)
            .map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
            .collect();
        m.nodes
            .iter()
            .map(|p| offset + 0.25 * waves.iter().map(|w| w[0] * (w[1] * p[0] + w[2] * p[1] + w[3]).sin()).sum::<f64>())
            .collect()
    }

    /// Relative 2-norm gap between `J δ` and a difference quotient of the residual.
    fn directional_gap(m: &Mesh, f: &[f64], delta: &[f64], t: f64, central: bool) -> f64 {
        let reg = Regularization::continuation(2, 1e-3);
        let pattern = jacobian_pattern(m);
        let vals = jacobian_values(m, f, reg).unwrap();
        let jd = apply_triplets(&pattern, &vals, delta, m.len());
        let shifted = |s: f64| -> Vec<f64> {
            let g: Vec<f64> = f.iter().zip(delta).map(|(a, b)| a + s * b).collect();
            residual(m, &g, reg).unwrap()
        };
        let (r1, r0, width) = if central {
            (shifted(t), shifted(-t), 2.0 * t)
        } else {
            (shifted(t), shifted(0.0), t)
        };
        let fd: Vec<f64> = r1.iter().zip(&r0).map(|(a, b)| (a - b) / width).collect();
        let num = jd.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den = fd.iter().map(|a| a * a).sum::<f64>().sqrt();
        num / den
    }

    #[test]
    fn jacobian_matches_finite_differences_on_random_fields() {
        // Uniform radial spacing: on the graded mesh a rough δ moves the
        // gradient by t/Δ_min, which swamps a forward quotient.
        let m = Mesh::build(&Domain::ball([0.0, 0.0], 1.0).unwrap(), 0.1, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut fields: Vec<Vec<f64>> = (0..5).map(|_| smooth_random(&m, &mut rng, 2.0)).collect();
        fields.push(hemisphere(&m).iter().map(|v| v + 0.05).collect());
        fields.push(m.nodes.iter().map(|p| 0.3 * p[0] - p[1] + 2.0).collect());
        for f in &fields {
            for _ in 0..5 {
                let delta: Vec<f64> = (0..m.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let gap = directional_gap(&m, f, &delta, 1e-6, false);
                assert!(gap <= 1e-4, "relative error {gap}");
            }
        }
    }

    #[test]
    fn jacobian_matches_central_differences_near_the_singular_profile() {
        // Forward differences at t = 1e-6 are dominated by curvature of the
        // residual where the hemisphere is steep, so use a central quotient.
        let m = ball_mesh(0.1);
        let f: Vec<f64> = hemisphere(&m).iter().map(|v| v + 0.05).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let delta: Vec<f64> = (0..m.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let gap = directional_gap(&m, &f, &delta, 1e-6, true);
            assert!(gap <= 1e-6, "relative error {gap}");
        }
    }
}
