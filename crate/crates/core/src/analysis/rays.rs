//! Profiles of a field along inward normals: growth exponent and boundary
//! expansion coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{add, dist, scale, Domain, Vec2};
use crate::mesh::Mesh;

/// Mesh layers next to the boundary excluded from fits.
pub const EXCLUDED_LAYERS: usize = 10;
/// Fits need at least this many samples.
pub const MIN_SAMPLES: usize = 8;

/// Fit window in `d`; unset ends default to the distance of the
/// [`EXCLUDED_LAYERS`]-th mesh layer on the nearest ray and to `0.05·diam`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub samples: usize,
}

impl Default for Window {
    fn default() -> Self {
        Self {
            d_min: None,
            d_max: None,
            samples: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RaySample {
    pub x: Vec2,
    pub d: f64,
    pub f: f64,
}

struct Ray {
    point: Vec2,
    normal: Vec2,
    mean_curvature: Option<f64>,
    window: [f64; 2],
    samples: Vec<RaySample>,
}

fn layer_distance(mesh: &Mesh, b: Vec2) -> f64 {
    let fb = mesh.first_boundary();
    let kb = (fb..mesh.len())
        .min_by(|&a, &c| dist(mesh.nodes[a], b).total_cmp(&dist(mesh.nodes[c], b)))
        .expect("mesh has boundary nodes");
    let (_, j) = mesh.ring_ray(kb);
    let i = mesh.rings.saturating_sub(EXCLUDED_LAYERS).max(1);
    mesh.dist[mesh.node(i, j)]
}

fn trace_ray(mesh: &Mesh, f: &[f64], domain: &Domain, b: Vec2, window: Window) -> Result<Ray> {
    if f.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let probe = domain.boundary_probe(&b)?;
    if probe.is_corner {
        return Err(Error::Invalid(format!("{b:?} is a corner; rays need a smooth boundary point")));
    }
    let point = [probe.point[0], probe.point[1]];
    let normal = [probe.inward_normal[0], probe.inward_normal[1]];
    let d_min = window.d_min.unwrap_or_else(|| layer_distance(mesh, point));
    let d_max = window.d_max.unwrap_or(0.05 * domain.diameter());
    let mut samples = Vec::new();
    if d_min > 0.0 && d_max > d_min && window.samples >= 2 {
        let (a, c) = (d_min.ln(), d_max.ln());
        for k in 0..window.samples {
            let t = (a + (c - a) * k as f64 / (window.samples - 1) as f64).exp();
            let x = add(point, scale(normal, t));
            let d = domain.sd(x)?;
            let v = mesh.interpolate(f, x);
            if d >= d_min * (1.0 - 1e-9) && d <= d_max * (1.0 + 1e-9) && v > 0.0 {
                samples.push(RaySample { x, d, f: v });
            }
        }
    }
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Analysis(format!(
            "fit window [{d_min:e}, {d_max:e}] at {point:?} has {} usable samples (need {MIN_SAMPLES}); use a finer mesh",
            samples.len()
        )));
    }
    Ok(Ray {
        point,
        normal,
        mean_curvature: probe.mean_curvature,
        window: [d_min, d_max],
        samples,
    })
}

/// Samples `(d, f)` along the inward normal at `b`.
pub fn ray_samples(mesh: &Mesh, f: &[f64], domain: &Domain, b: Vec2, window: Window) -> Result<Vec<RaySample>> {
    Ok(trace_ray(mesh, f, domain, b, window)?.samples)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub point: Vec2,
    pub normal: Vec2,
    /// Fitted `β` in `f ≈ C d^β`.
    pub beta: f64,
    pub prefactor: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
    pub samples: Vec<RaySample>,
}

/// Least-squares fit of `log f = log C + β log d` along the inward normal.
pub fn growth_exponent(mesh: &Mesh, f: &[f64], domain: &Domain, b: Vec2, window: Window) -> Result<ExponentReport> {
    let ray = trace_ray(mesh, f, domain, b, window)?;
    let xs: Vec<f64> = ray.samples.iter().map(|s| s.d.ln()).collect();
    let ys: Vec<f64> = ray.samples.iter().map(|s| s.f.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(ExponentReport {
        point: ray.point,
        normal: ray.normal,
        beta,
        prefactor: intercept.exp(),
        window: ray.window,
        r_squared,
        samples: ray.samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionFit {
    pub point: Vec2,
    pub mean_curvature: f64,
    /// Coefficients of `f ≈ a₁√d + a₂d`.
    pub a1: f64,
    pub a2: f64,
    /// `√(2/H)`.
    pub predicted_a1: f64,
    pub relative_error: f64,
    /// Root-mean-square residual of the fit.
    pub residual_rms: f64,
    pub window: [f64; 2],
    pub samples: Vec<RaySample>,
}

/// Least squares of `f` against `{√d, d}` along the inward normal.
pub fn expansion_fit(mesh: &Mesh, f: &[f64], domain: &Domain, b: Vec2, window: Window) -> Result<ExpansionFit> {
    let probe = domain.boundary_probe(&b)?;
    let h = match probe.mean_curvature {
        Some(h) if h > 0.0 => h,
        _ => {
            return Err(Error::Invalid(format!(
                "expansion needs H > 0 at {b:?} (got {:?})",
                probe.mean_curvature
            )))
        }
    };
    let ray = trace_ray(mesh, f, domain, b, window)?;
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in &ray.samples {
        let (u, v) = (s.d.sqrt(), s.d);
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        r1 += u * s.f;
        r2 += v * s.f;
    }
    let det = s11 * s22 - s12 * s12;
    let a1 = (r1 * s22 - r2 * s12) / det;
    let a2 = (s11 * r2 - s12 * r1) / det;
    let residual_rms = (ray
        .samples
        .iter()
        .map(|s| (s.f - a1 * s.d.sqrt() - a2 * s.d).powi(2))
        .sum::<f64>()
        / ray.samples.len() as f64)
        .sqrt();
    let predicted = (2.0 / h).sqrt();
    debug_assert_eq!(ray.mean_curvature, Some(h));
    Ok(ExpansionFit {
        point: ray.point,
        mean_curvature: h,
        a1,
        a2,
        predicted_a1: predicted,
        relative_error: (a1 - predicted).abs() / predicted,
        residual_rms,
        window: ray.window,
        samples: ray.samples,
    })
}
