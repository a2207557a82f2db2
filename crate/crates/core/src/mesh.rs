//! Boundary-fitted, boundary-graded polar meshes of star-shaped planar domains.
//!
//! Rays run from a centre `c` to boundary points `b_j` spaced uniformly in arc
//! length along each corner-free boundary chain. Node `(i, j)` sits at
//! `c + ρ_i (b_j − c)` with `1 − ρ_i = (1 − i/K)^γ`, so ring `K` is the
//! boundary and the radial spacing near `∂Ω` scales like `h (d/L)^{1−1/γ}`.
//! Derivatives use central differences in the logical `(i, j)` coordinates
//! mapped through the discrete metric of the same stencil. On the inner rings
//! (`ρ < 1/2`), where the polar map is strongly curved relative to the ring
//! radius, they use a least-squares quadratic fit over the same `3 × 3`
//! neighbourhood instead, which is exact for quadratics.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{add, cross, dist, norm, scale, sub, wrap_angle, Domain, Vec2};

/// Stencil slot tables in the `3 × 3` neighbourhood, slot `3a + b` with
/// `a` the radial and `b` the angular offset plus one.
const DS: [f64; 9] = [0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0];
const DT: [f64; 9] = [0.0, 0.0, 0.0, -0.5, 0.0, 0.5, 0.0, 0.0, 0.0];
const DSS: [f64; 9] = [0.0, 1.0, 0.0, 0.0, -2.0, 0.0, 0.0, 1.0, 0.0];
const DTT: [f64; 9] = [0.0, 0.0, 0.0, 1.0, -2.0, 1.0, 0.0, 0.0, 0.0];
const DST: [f64; 9] = [0.25, 0.0, -0.25, 0.0, 0.0, 0.0, -0.25, 0.0, 0.25];

/// Radial interpolation weight along a ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialWeight {
    /// Linear in the physical radius `ρ`.
    Physical,
    /// Linear in the ring index. With grading `γ`, `d^{1/γ}` is linear in
    /// the index near the boundary, so boundary-layer profiles transfer
    /// between meshes with little loss.
    Index,
}

/// Gradient and Hessian `[hxx, hxy, hyy]` coefficients of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStencil {
    pub nodes: Vec<usize>,
    pub grad: Vec<Vec2>,
    pub hess: Vec<[f64; 3]>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub h: f64,
    pub gamma: f64,
    pub center: Vec2,
    /// Number of radial layers `K`; ring `K` is the boundary.
    pub rings: usize,
    /// Number of rays.
    pub rays: usize,
    pub rho: Vec<f64>,
    /// `b_j − c` per ray.
    pub spokes: Vec<Vec2>,
    /// Rays ending at a boundary corner.
    pub corner_ray: Vec<bool>,
    pub nodes: Vec<Vec2>,
    /// Distance to the boundary per node (zero on ring `K`).
    pub dist: Vec<f64>,
    angles: Vec<f64>,
    /// Boundary arc length at the foot of each ray.
    arc: Vec<f64>,
    perimeter: f64,
    centre: NodeStencil,
    /// Fitted stencils for nodes `1..1 + inner.len()`.
    inner: Vec<NodeStencil>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub nodes: usize,
    pub interior: usize,
    pub boundary: usize,
    pub rings: usize,
    pub rays: usize,
    pub h: f64,
    pub gamma: f64,
    pub hash: String,
}

impl Mesh {
    pub fn build(domain: &Domain, h: f64, gamma: f64) -> Result<Mesh> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Invalid(format!("target spacing must be positive, got {h}")));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::Invalid(format!("grading exponent must be at least 1, got {gamma}")));
        }
        let curve = domain.curve()?;
        let center = {
            let c = domain.center();
            [c[0], c[1]]
        };
        if h > 0.5 * domain.inradius() {
            return Err(Error::TooCoarse {
                feature: format!("inscribed radius {:.4}", domain.inradius()),
                h,
            });
        }
        let perimeter = curve.length();
        let rays = (((perimeter / h).ceil() as usize).max(16)).div_ceil(4) * 4;

        // Distribute rays over corner-free chains by largest remainder.
        let chains = curve.chains();
        let lens: Vec<f64> = chains
            .iter()
            .map(|ch| ch.iter().map(|&k| curve.pieces[k].length()).sum())
            .collect();
        let ideal: Vec<f64> = lens.iter().map(|l| rays as f64 * l / perimeter).collect();
        let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
        let mut order: Vec<usize> = (0..chains.len()).collect();
        order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())));
        let mut missing = rays - counts.iter().sum::<usize>();
        for &k in order.iter().cycle() {
            if missing == 0 {
                break;
            }
            counts[k] += 1;
            missing -= 1;
        }
        if let Some(k) = counts.iter().position(|&m| m < 3) {
            return Err(Error::TooCoarse {
                feature: format!("boundary arc between corners (length {:.4})", lens[k]),
                h,
            });
        }
        let mut boundary = Vec::with_capacity(rays);
        let mut corner_ray = Vec::with_capacity(rays);
        let mut arc = Vec::with_capacity(rays);
        let mut offset = 0.0;
        for (ch, (&m, &len)) in chains.iter().zip(counts.iter().zip(&lens)) {
            for i in 0..m {
                boundary.push(curve.chain_point(ch, len * i as f64 / m as f64));
                corner_ray.push(i == 0 && curve.has_corners());
                arc.push(offset + len * i as f64 / m as f64);
            }
            offset += len;
        }
        let spokes: Vec<Vec2> = boundary.iter().map(|b| sub(*b, center)).collect();
        let mut angles = Vec::with_capacity(rays);
        angles.push(spokes[0][1].atan2(spokes[0][0]));
        for j in 1..rays {
            let step = wrap_angle(
                spokes[j][1].atan2(spokes[j][0]) - spokes[j - 1][1].atan2(spokes[j - 1][0]),
            );
            if !(step > 0.0 && step < std::f64::consts::PI) {
                return Err(Error::Mesh("boundary is not star-shaped about the mesh centre".into()));
            }
            angles.push(angles[j - 1] + step);
        }
        let closing = angles[0] + std::f64::consts::TAU - angles[rays - 1];
        if !(closing > 0.0 && closing < std::f64::consts::PI) {
            return Err(Error::Mesh("boundary is not star-shaped about the mesh centre".into()));
        }

        let reach = spokes.iter().map(|v| norm(*v)).fold(0.0, f64::max);
        let rings = ((gamma * reach / h).ceil() as usize).max(4);
        let rho: Vec<f64> = (0..=rings)
            .map(|i| 1.0 - (1.0 - i as f64 / rings as f64).powf(gamma))
            .collect();
        let mut nodes = Vec::with_capacity(1 + rings * rays);
        nodes.push(center);
        for &r in &rho[1..rings] {
            for s in &spokes {
                nodes.push(add(center, scale(*s, r)));
            }
        }
        nodes.extend_from_slice(&boundary);
        let first_boundary = 1 + (rings - 1) * rays;
        let dist = nodes
            .par_iter()
            .enumerate()
            .map(|(k, x)| {
                if k >= first_boundary {
                    Ok(0.0)
                } else {
                    domain.sd(*x)
                }
            })
            .collect::<std::result::Result<Vec<f64>, _>>()?;
        if let Some(k) = (0..first_boundary).find(|&k| dist[k] <= 0.0) {
            return Err(Error::Mesh(format!(
                "interior node {k} at {:?} has non-positive distance {:e}",
                nodes[k], dist[k]
            )));
        }
        let mut ring1 = vec![0];
        ring1.extend(1..1 + rays);
        let centre = quadratic_fit(&nodes, &ring1)?;
        let inner_rings = (1..rings).take_while(|&i| rho[i] < 0.5).count();
        let inner = (1..1 + inner_rings * rays)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (1 + (k - 1) / rays, (k - 1) % rays);
                let mut idx = vec![k];
                for a in 0..3 {
                    for b in 0..3 {
                        let n = node_index(rays, i + a - 1, j + rays + b - 1);
                        if !idx.contains(&n) {
                            idx.push(n);
                        }
                    }
                }
                quadratic_fit(&nodes, &idx)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Mesh {
            h,
            gamma,
            center,
            rings,
            rays,
            rho,
            spokes,
            corner_ray,
            nodes,
            dist,
            angles,
            arc,
            perimeter,
            centre,
            inner,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node index of ring `i`, ray `j` (ray index taken cyclically).
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        node_index(self.rays, i, j)
    }

    /// `(ring, ray)` of a node; the centre is `(0, 0)`.
    #[inline]
    pub fn ring_ray(&self, node: usize) -> (usize, usize) {
        if node == 0 {
            (0, 0)
        } else {
            (1 + (node - 1) / self.rays, (node - 1) % self.rays)
        }
    }

    /// Index of the first boundary node; nodes before it are interior.
    #[inline]
    pub fn first_boundary(&self) -> usize {
        1 + (self.rings - 1) * self.rays
    }

    #[inline]
    pub fn is_boundary(&self, node: usize) -> bool {
        node >= self.first_boundary()
    }

    pub fn interior_count(&self) -> usize {
        self.first_boundary()
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            nodes: self.len(),
            interior: self.interior_count(),
            boundary: self.rays,
            rings: self.rings,
            rays: self.rays,
            h: self.h,
            gamma: self.gamma,
            hash: self.hash(),
        }
    }

    /// SHA-256 of the mesh layout and node coordinates.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.rings as u64).to_le_bytes());
        hasher.update((self.rays as u64).to_le_bytes());
        for p in &self.nodes {
            hasher.update(p[0].to_le_bytes());
            hasher.update(p[1].to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Coefficients of the discrete gradient and Hessian at an interior node
    /// as linear combinations of nodal values.
    pub fn stencil(&self, node: usize) -> Result<NodeStencil> {
        self.with_stencil(node, |nodes, grad, hess| NodeStencil {
            nodes: nodes.to_vec(),
            grad: grad.to_vec(),
            hess: hess.to_vec(),
        })
    }

    /// Runs `f` on the stencil of `node` without allocating for grid nodes.
    pub fn with_stencil<R>(
        &self,
        node: usize,
        f: impl FnOnce(&[usize], &[Vec2], &[[f64; 3]]) -> R,
    ) -> Result<R> {
        if node >= self.len() {
            return Err(Error::Invalid(format!("node {node} out of range")));
        }
        if node == 0 {
            return Ok(f(&self.centre.nodes, &self.centre.grad, &self.centre.hess));
        }
        if let Some(st) = self.inner.get(node - 1) {
            return Ok(f(&st.nodes, &st.grad, &st.hess));
        }
        let (i, j) = self.ring_ray(node);
        if i == self.rings {
            return Err(Error::Stencil {
                node,
                missing: format!("ring {} at rays {}..={} lies outside the domain", i + 1, j as i64 - 1, j + 1),
            });
        }
        let mut idx = [0usize; 9];
        for a in 0..3 {
            for b in 0..3 {
                idx[3 * a + b] = self.node(i + a - 1, j + self.rays + b - 1);
            }
        }
        let x: [Vec2; 9] = std::array::from_fn(|k| self.nodes[idx[k]]);
        let apply = |w: &[f64; 9]| -> Vec2 {
            let mut s = [0.0, 0.0];
            for k in 0..9 {
                s[0] += w[k] * x[k][0];
                s[1] += w[k] * x[k][1];
            }
            s
        };
        let (xs, xt) = (apply(&DS), apply(&DT));
        let (xss, xtt, xst) = (apply(&DSS), apply(&DTT), apply(&DST));
        let det = cross(xs, xt);
        // g = J^{-T} (f_s, f_t) with J = [x_s | x_t].
        let ginv = [[xt[1] / det, -xs[1] / det], [-xt[0] / det, xs[0] / det]];
        let row = |u: Vec2, v: Vec2| [u[0] * v[0], u[0] * v[1] + u[1] * v[0], u[1] * v[1]];
        let minv = inverse3([row(xs, xs), row(xt, xt), row(xs, xt)]);
        let p = [xss, xtt, xst];
        let mut grad = [[0.0; 2]; 9];
        let mut hess = [[0.0; 3]; 9];
        for k in 0..9 {
            let (ds, dt) = (DS[k], DT[k]);
            let g = [ginv[0][0] * ds + ginv[0][1] * dt, ginv[1][0] * ds + ginv[1][1] * dt];
            let r = [
                DSS[k] - (p[0][0] * g[0] + p[0][1] * g[1]),
                DTT[k] - (p[1][0] * g[0] + p[1][1] * g[1]),
                DST[k] - (p[2][0] * g[0] + p[2][1] * g[1]),
            ];
            grad[k] = g;
            for (m, hm) in hess[k].iter_mut().enumerate() {
                *hm = minv[m][0] * r[0] + minv[m][1] * r[1] + minv[m][2] * r[2];
            }
        }
        Ok(f(&idx, &grad, &hess))
    }

    /// Discrete gradient and Hessian `[hxx, hxy, hyy]` of nodal values.
    pub fn derivatives(&self, f: &[f64], node: usize) -> Result<(Vec2, [f64; 3])> {
        self.with_stencil(node, |nodes, grad, hess| {
            let mut g = [0.0; 2];
            let mut hm = [0.0; 3];
            // Coefficients sum to zero; differencing against the node value
            // avoids cancellation between large coefficients.
            let base = f[node];
            for ((&k, cg), ch) in nodes.iter().zip(grad).zip(hess) {
                let v = f[k] - base;
                g[0] += cg[0] * v;
                g[1] += cg[1] * v;
                for m in 0..3 {
                    hm[m] += ch[m] * v;
                }
            }
            (g, hm)
        })
    }

    pub fn gradient(&self, f: &[f64], node: usize) -> Result<Vec2> {
        Ok(self.derivatives(f, node)?.0)
    }

    pub fn hessian(&self, f: &[f64], node: usize) -> Result<[f64; 3]> {
        Ok(self.derivatives(f, node)?.1)
    }

    /// Interpolation weights of up to four nodes for point `x`, linear in
    /// `ρ` along rays. Points beyond the outermost ring are projected onto it.
    pub fn locate(&self, x: Vec2) -> [(usize, f64); 4] {
        self.locate_with(x, RadialWeight::Physical)
    }

    pub fn locate_with(&self, x: Vec2, radial: RadialWeight) -> [(usize, f64); 4] {
        let v = sub(x, self.center);
        if norm(v) == 0.0 {
            return [(0, 1.0), (0, 0.0), (0, 0.0), (0, 0.0)];
        }
        let a0 = self.angles[0];
        let theta = a0 + wrap_angle(v[1].atan2(v[0]) - a0);
        let j = self.angles.partition_point(|&a| a <= theta).max(1) - 1;
        let jn = (j + 1) % self.rays;
        let next = if jn == 0 { self.angles[0] + std::f64::consts::TAU } else { self.angles[jn] };
        // Angular weight, with the boundary radius blended in angle, so a
        // circle about the centre is represented exactly.
        let tau = ((theta - self.angles[j]) / (next - self.angles[j])).clamp(0.0, 1.0);
        let reach = norm(self.spokes[j]) * (1.0 - tau) + norm(self.spokes[jn]) * tau;
        let rho = (norm(v) / reach).min(1.0);
        let s = 1.0 - (1.0 - rho).max(0.0).powf(1.0 / self.gamma);
        let sigma = s * self.rings as f64;
        let i = (sigma.floor() as usize).min(self.rings - 1);
        let w = match radial {
            RadialWeight::Physical => ((rho - self.rho[i]) / (self.rho[i + 1] - self.rho[i])).clamp(0.0, 1.0),
            RadialWeight::Index => sigma - i as f64,
        };
        [
            (self.node(i, j), (1.0 - w) * (1.0 - tau)),
            (self.node(i + 1, j), w * (1.0 - tau)),
            (self.node(i, jn), (1.0 - w) * tau),
            (self.node(i + 1, jn), w * tau),
        ]
    }

    pub fn interpolate(&self, values: &[f64], x: Vec2) -> f64 {
        self.locate(x).iter().map(|&(k, w)| w * values[k]).sum()
    }

    /// Piecewise-linear interpolation on the triangulation that splits every
    /// cell along its `(i, j)`–`(i+1, j+1)` diagonal; exact for affine fields.
    /// Falls back to [`Mesh::interpolate`] outside the triangulated region.
    pub fn interpolate_linear(&self, values: &[f64], x: Vec2) -> f64 {
        let (i1, j0) = self.ring_ray(self.locate(x)[1].0);
        // Cells have straight edges, so near the boundary the polar estimate
        // can land several rings inside the true cell; search outward.
        for i in i1.saturating_sub(2)..self.rings {
            for dj in [0isize, -1, 1] {
                let j = (j0 as isize + dj).rem_euclid(self.rays as isize) as usize;
                for tri in self.cell_triangles(i, j) {
                    if let Some(w) = barycentric(self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]], x) {
                        return w[0] * values[tri[0]] + w[1] * values[tri[1]] + w[2] * values[tri[2]];
                    }
                }
            }
        }
        self.interpolate(values, x)
    }

    fn cell_triangles(&self, i: usize, j: usize) -> Vec<[usize; 3]> {
        if i == 0 {
            vec![[0, self.node(1, j), self.node(1, j + 1)]]
        } else {
            let (a, b, c, d) = (self.node(i, j), self.node(i + 1, j), self.node(i + 1, j + 1), self.node(i, j + 1));
            vec![[a, b, c], [a, c, d]]
        }
    }

    /// Values of a field given on `other`, interpolated at this mesh's nodes.
    pub fn interpolate_from(&self, other: &Mesh, values: &[f64], radial: RadialWeight) -> Vec<f64> {
        self.nodes
            .par_iter()
            .map(|x| {
                other
                    .locate_with(*x, radial)
                    .iter()
                    .map(|&(k, w)| w * values[k])
                    .sum()
            })
            .collect()
    }

    /// Values of a field on `other`, a mesh of the same domain with the same
    /// centre and grading, interpolated in logical coordinates: ring index
    /// fraction along rays and boundary arc length across them. Unlike
    /// [`Mesh::interpolate_from`] this never reads values from outside the
    /// polygon spanned by `other`'s boundary nodes. Returns `None` when the
    /// meshes do not share a domain.
    pub fn transfer_from(&self, other: &Mesh, values: &[f64]) -> Option<Vec<f64>> {
        let same = dist(self.center, other.center) < 1e-12
            && (self.perimeter - other.perimeter).abs() < 1e-9 * self.perimeter
            && self.gamma == other.gamma
            && dist(self.nodes[self.first_boundary()], other.nodes[other.first_boundary()]) < 1e-9;
        if !same {
            return None;
        }
        let weights = |k: usize| -> [(usize, f64); 4] {
            if k == 0 {
                return [(0, 1.0), (0, 0.0), (0, 0.0), (0, 0.0)];
            }
            let (i, j) = self.ring_ray(k);
            let sigma = i as f64 / self.rings as f64 * other.rings as f64;
            let ic = (sigma.floor() as usize).min(other.rings - 1);
            let w = sigma - ic as f64;
            let a = self.arc[j];
            let jc = other.arc.partition_point(|&x| x <= a).max(1) - 1;
            let jn = (jc + 1) % other.rays;
            let next = if jn == 0 { other.perimeter } else { other.arc[jn] };
            let tau = ((a - other.arc[jc]) / (next - other.arc[jc])).clamp(0.0, 1.0);
            [
                (other.node(ic, jc), (1.0 - w) * (1.0 - tau)),
                (other.node(ic + 1, jc), w * (1.0 - tau)),
                (other.node(ic, jn), (1.0 - w) * tau),
                (other.node(ic + 1, jn), w * tau),
            ]
        };
        Some(
            (0..self.len())
                .into_par_iter()
                .map(|k| weights(k).iter().map(|&(n, w)| w * values[n]).sum())
                .collect(),
        )
    }

    /// Cells as node quadruples in counter-clockwise order; the centre fan
    /// is returned as degenerate quads `[0, 0, b, a]`.
    pub fn cells(&self) -> Vec<[usize; 4]> {
        let mut out = Vec::with_capacity(self.rings * self.rays);
        for j in 0..self.rays {
            out.push([0, 0, self.node(1, j + 1), self.node(1, j)]);
        }
        for i in 1..self.rings {
            for j in 0..self.rays {
                out.push([self.node(i, j), self.node(i + 1, j), self.node(i + 1, j + 1), self.node(i, j + 1)]);
            }
        }
        out
    }

    /// Node nearest to `x` (linear scan).
    pub fn nearest_node(&self, x: Vec2) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (k, p) in self.nodes.iter().enumerate() {
            let d = dist(*p, x);
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    }

    /// Plain-text layout:
    ///
    /// ```text
    /// # hypgraph mesh
    /// center <x> <y>
    /// rings <K> rays <N> h <h> grading <γ>
    /// nodes <count>
    /// <index> <x> <y> <d> <0 interior | 1 boundary>
    /// elements <count>
    /// tri <a> <b> <c> | quad <a> <b> <c> <d>
    /// ```
    pub fn write_text(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# hypgraph mesh")?;
        writeln!(w, "center {:.17e} {:.17e}", self.center[0], self.center[1])?;
        writeln!(
            w,
            "rings {} rays {} h {:.17e} grading {:.17e}",
            self.rings, self.rays, self.h, self.gamma
        )?;
        writeln!(w, "nodes {}", self.len())?;
        for (k, p) in self.nodes.iter().enumerate() {
            writeln!(
                w,
                "{k} {:.17e} {:.17e} {:.17e} {}",
                p[0],
                p[1],
                self.dist[k],
                u8::from(self.is_boundary(k))
            )?;
        }
        writeln!(w, "elements {}", self.rings * self.rays)?;
        for j in 0..self.rays {
            writeln!(w, "tri 0 {} {}", self.node(1, j), self.node(1, j + 1))?;
        }
        for i in 1..self.rings {
            for j in 0..self.rays {
                writeln!(
                    w,
                    "quad {} {} {} {}",
                    self.node(i, j),
                    self.node(i + 1, j),
                    self.node(i + 1, j + 1),
                    self.node(i, j + 1)
                )?;
            }
        }
        Ok(())
    }
}

#[inline]
fn node_index(rays: usize, i: usize, j: usize) -> usize {
    if i == 0 {
        0
    } else {
        1 + (i - 1) * rays + j % rays
    }
}

/// Least-squares quadratic fit about `idx[0]` through the nodes `idx[1..]`,
/// with the value at `idx[0]` held fixed: unknowns `(g_x, g_y, h_xx, h_xy, h_yy)`.
fn quadratic_fit(nodes: &[Vec2], idx: &[usize]) -> Result<NodeStencil> {
    let x0 = nodes[idx[0]];
    let nb = &idx[1..];
    let a = Mat::<f64>::from_fn(nb.len(), 5, |r, c| {
        let v = sub(nodes[nb[r]], x0);
        match c {
            0 => v[0],
            1 => v[1],
            2 => 0.5 * v[0] * v[0],
            3 => v[0] * v[1],
            _ => 0.5 * v[1] * v[1],
        }
    });
    let normal = a.transpose() * &a;
    let weights = normal.partial_piv_lu().solve(a.transpose());
    if weights.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::Mesh(format!("degenerate neighbourhood around node {}", idx[0])));
    }
    let mut grad = vec![[0.0; 2]];
    let mut hess = vec![[0.0; 3]];
    for r in 0..nb.len() {
        let w = |c: usize| weights[(c, r)];
        grad.push([w(0), w(1)]);
        hess.push([w(2), w(3), w(4)]);
        grad[0][0] -= w(0);
        grad[0][1] -= w(1);
        for c in 0..3 {
            hess[0][c] -= w(2 + c);
        }
    }
    Ok(NodeStencil {
        nodes: idx.to_vec(),
        grad,
        hess,
    })
}

fn inverse3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let cof = [
        [c(1, 2, 1, 2), -c(1, 2, 0, 2), c(1, 2, 0, 1)],
        [-c(0, 2, 1, 2), c(0, 2, 0, 2), -c(0, 2, 0, 1)],
        [c(0, 1, 1, 2), -c(0, 1, 0, 2), c(0, 1, 0, 1)],
    ];
    let det = m[0][0] * cof[0][0] + m[0][1] * cof[0][1] + m[0][2] * cof[0][2];
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for k in 0..3 {
            inv[r][k] = cof[k][r] / det;
        }
    }
    inv
}

/// Barycentric weights of `x` in triangle `abc`, if it lies inside.
fn barycentric(a: Vec2, b: Vec2, c: Vec2, x: Vec2) -> Option<[f64; 3]> {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if det.abs() < 1e-300 {
        return None;
    }
    let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
    let l0 = 1.0 - l1 - l2;
    let tol = -1e-12;
    (l0 >= tol && l1 >= tol && l2 >= tol).then_some([l0, l1, l2])
}
