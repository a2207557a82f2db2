use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{
    add, cross, dist, dot, norm, perp, project_to_ellipse, scale, sub, unit, wrap_angle,
    BoundaryCurve, GeometryError, Piece, Result, Vec2,
};

fn default_n() -> usize {
    2
}

/// Parametric description of a domain, as read from and written to
/// domain description files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    /// Euclidean ball in `n` dimensions. An empty centre means the origin.
    Ball {
        #[serde(default)]
        center: Vec<f64>,
        radius: f64,
    },
    /// Axis-aligned ellipse.
    Ellipse {
        #[serde(default)]
        center: Vec2,
        semi_axes: Vec2,
    },
    /// Rectangle `length × 2 radius` along the x axis with semicircular caps.
    Stadium {
        #[serde(default)]
        center: Vec2,
        length: f64,
        radius: f64,
    },
    /// Intersection of balls and ellipses (members with positive curvature).
    ConvexIntersection { members: Vec<DomainKind> },
    /// Convex polygon whose corners are rounded with the given radius
    /// (zero keeps sharp corners).
    RoundedPolygon {
        vertices: Vec<Vec2>,
        #[serde(default)]
        fillet_radius: f64,
    },
    /// Convex intersection whose corners are replaced by circular fillets.
    FilletedIntersection {
        members: Vec<DomainKind>,
        fillet_radius: f64,
    },
}

impl DomainKind {
    pub fn label(&self) -> &'static str {
        match self {
            DomainKind::Ball { .. } => "ball",
            DomainKind::Ellipse { .. } => "ellipse",
            DomainKind::Stadium { .. } => "stadium",
            DomainKind::ConvexIntersection { .. } => "convex_intersection",
            DomainKind::RoundedPolygon { .. } => "rounded_polygon",
            DomainKind::FilletedIntersection { .. } => "filleted_intersection",
        }
    }
}

/// On-disk form of a domain: `{"kind": ..., "n": ..., parameters...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(flatten)]
    pub kind: DomainKind,
}

/// Signed distance query result; `d > 0` inside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceResult {
    pub d: f64,
    pub nearest: Vec<f64>,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryProbe {
    pub point: Vec<f64>,
    pub inward_normal: Vec<f64>,
    /// Absent at corners.
    pub principal_curvatures: Option<Vec<f64>>,
    /// Mean of the principal curvatures; absent at corners.
    pub mean_curvature: Option<f64>,
    pub is_corner: bool,
}

#[derive(Debug, Clone)]
struct Fillet {
    center: Vec2,
    radius: f64,
    start: f64,
    sweep: f64,
}

#[derive(Debug, Clone)]
struct Planar {
    curve: BoundaryCurve,
    members: Vec<Domain>,
    fillets: Vec<Fillet>,
    /// Inner (offset) polygon of a rounded polygon.
    inner: Vec<Vec2>,
    center: Vec2,
    inradius: f64,
}

/// A validated domain with cached boundary representation.
#[derive(Debug, Clone)]
pub struct Domain {
    n: usize,
    kind: DomainKind,
    planar: Option<Planar>,
}

impl Domain {
    pub fn new(n: usize, kind: DomainKind) -> Result<Self> {
        if n < 2 {
            return Err(GeometryError::Invalid(format!("dimension must be at least 2, got {n}")));
        }
        if !matches!(kind, DomainKind::Ball { .. }) && n != 2 {
            return Err(GeometryError::Invalid(format!(
                "{} domains are planar, n must be 2 (got {n})",
                kind.label()
            )));
        }
        let kind = normalize(n, kind)?;
        let planar = if n == 2 { Some(build_planar(&kind)?) } else { None };
        Ok(Self { n, kind, planar })
    }

    pub fn from_file(file: DomainFile) -> Result<Self> {
        Self::new(file.n, file.kind)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DomainFile = serde_json::from_str(text)
            .map_err(|e| GeometryError::Invalid(format!("domain file: {e}")))?;
        Self::from_file(file)
    }

    /// Normalized description (explicit centres, counter-clockwise vertices).
    pub fn to_file(&self) -> DomainFile {
        DomainFile {
            n: self.n,
            kind: self.kind.clone(),
        }
    }

    pub fn ball(center: Vec2, radius: f64) -> Result<Self> {
        Self::new(
            2,
            DomainKind::Ball {
                center: center.to_vec(),
                radius,
            },
        )
    }

    pub fn ball_nd(n: usize, radius: f64) -> Result<Self> {
        Self::new(
            n,
            DomainKind::Ball {
                center: vec![0.0; n],
                radius,
            },
        )
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(
            2,
            DomainKind::Ellipse {
                center: [0.0, 0.0],
                semi_axes: [a, b],
            },
        )
    }

    pub fn stadium(length: f64, radius: f64) -> Result<Self> {
        Self::new(
            2,
            DomainKind::Stadium {
                center: [0.0, 0.0],
                length,
                radius,
            },
        )
    }

    pub fn rounded_polygon(vertices: Vec<Vec2>, fillet_radius: f64) -> Result<Self> {
        Self::new(
            2,
            DomainKind::RoundedPolygon {
                vertices,
                fillet_radius,
            },
        )
    }

    pub fn intersection(members: Vec<DomainKind>) -> Result<Self> {
        Self::new(2, DomainKind::ConvexIntersection { members })
    }

    /// Planar disk member description.
    pub fn disk_kind(center: Vec2, radius: f64) -> DomainKind {
        DomainKind::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn is_planar(&self) -> bool {
        self.planar.is_some()
    }

    fn planar(&self, what: &'static str) -> Result<&Planar> {
        self.planar.as_ref().ok_or(GeometryError::PlanarOnly(what))
    }

    pub fn curve(&self) -> Result<&BoundaryCurve> {
        Ok(&self.planar("boundary curve")?.curve)
    }

    /// Centre of a largest inscribed ball (approximate for polygons and
    /// intersections).
    pub fn center(&self) -> Vec<f64> {
        match (&self.kind, &self.planar) {
            (_, Some(p)) => p.center.to_vec(),
            (DomainKind::Ball { center, .. }, None) => center.clone(),
            _ => unreachable!("only balls are non-planar"),
        }
    }

    pub fn inradius(&self) -> f64 {
        match (&self.kind, &self.planar) {
            (_, Some(p)) => p.inradius,
            (DomainKind::Ball { radius, .. }, None) => *radius,
            _ => unreachable!("only balls are non-planar"),
        }
    }

    pub fn has_corners(&self) -> bool {
        self.planar.as_ref().is_some_and(|p| p.curve.has_corners())
    }

    pub fn corners(&self) -> Vec<Vec2> {
        self.planar
            .as_ref()
            .map(|p| p.curve.corners())
            .unwrap_or_default()
    }

    /// Member domains of an intersection (empty otherwise).
    pub fn members(&self) -> &[Domain] {
        self.planar.as_ref().map_or(&[], |p| &p.members)
    }

    /// Planar signed distance and nearest boundary point.
    pub fn sd2(&self, x: Vec2) -> Result<(f64, Vec2)> {
        if !(x[0].is_finite() && x[1].is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let planar = self.planar("planar distance")?;
        match &self.kind {
            DomainKind::Ball { center, radius } => {
                let c = [center[0], center[1]];
                let v = sub(x, c);
                let r = norm(v);
                let dir = if r == 0.0 { [1.0, 0.0] } else { scale(v, 1.0 / r) };
                Ok((radius - r, add(c, scale(dir, *radius))))
            }
            DomainKind::Ellipse { center, semi_axes } => {
                let v = sub(x, *center);
                let (_, foot) = project_to_ellipse(semi_axes[0], semi_axes[1], v)?;
                let q = (v[0] / semi_axes[0]).powi(2) + (v[1] / semi_axes[1]).powi(2);
                let d = dist(v, foot);
                Ok((if q <= 1.0 { d } else { -d }, add(*center, foot)))
            }
            DomainKind::Stadium {
                center,
                length,
                radius,
            } => {
                let v = sub(x, *center);
                let qx = v[0].clamp(-0.5 * length, 0.5 * length);
                let w = [v[0] - qx, v[1]];
                let r = norm(w);
                let dir = if r == 0.0 { [0.0, -1.0] } else { scale(w, 1.0 / r) };
                let foot = add([center[0] + qx, center[1]], scale(dir, *radius));
                Ok((radius - r, foot))
            }
            DomainKind::RoundedPolygon { fillet_radius, .. } => {
                Ok(polygon_sd(&planar.inner, *fillet_radius, x))
            }
            DomainKind::ConvexIntersection { .. } => {
                let mut best: Option<(f64, Vec2)> = None;
                for m in &planar.members {
                    let (d, foot) = m.sd2(x)?;
                    if best.is_none_or(|(b, _)| d < b) {
                        best = Some((d, foot));
                    }
                }
                let (d, foot) = best.expect("intersection has members");
                if d >= 0.0 {
                    Ok((d, foot))
                } else {
                    let (_, f) = planar.curve.nearest(x)?;
                    Ok((-f.distance, f.point))
                }
            }
            DomainKind::FilletedIntersection { .. } => {
                let inside = self.inside_filleted(planar, x)?;
                let (_, f) = planar.curve.nearest(x)?;
                Ok((if inside { f.distance } else { -f.distance }, f.point))
            }
        }
    }

    /// Planar signed distance only.
    pub fn sd(&self, x: Vec2) -> Result<f64> {
        Ok(self.sd2(x)?.0)
    }

    fn inside_filleted(&self, planar: &Planar, x: Vec2) -> Result<bool> {
        for m in &planar.members {
            if m.sd(x)? < 0.0 {
                return Ok(false);
            }
        }
        Ok(!planar.fillets.iter().any(|f| in_cutoff(f, x)))
    }

    pub fn inside(&self, x: &[f64]) -> Result<bool> {
        Ok(self.signed_distance(x)?.d >= 0.0)
    }

    pub fn signed_distance(&self, x: &[f64]) -> Result<DistanceResult> {
        if x.len() != self.n {
            return Err(GeometryError::Dimension {
                expected: self.n,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if self.planar.is_some() {
            let (d, foot) = self.sd2([x[0], x[1]])?;
            return Ok(DistanceResult {
                d,
                nearest: foot.to_vec(),
                inside: d >= 0.0,
            });
        }
        let (center, radius) = self.ball_params();
        let v: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
        let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nearest = if r == 0.0 {
            let mut p = center.to_vec();
            p[0] += radius;
            p
        } else {
            center
                .iter()
                .zip(&v)
                .map(|(c, a)| c + radius * a / r)
                .collect()
        };
        Ok(DistanceResult {
            d: radius - r,
            nearest,
            inside: r <= radius,
        })
    }

    fn ball_params(&self) -> (&[f64], f64) {
        match &self.kind {
            DomainKind::Ball { center, radius } => (center, *radius),
            _ => unreachable!("only balls are non-planar"),
        }
    }

    pub fn boundary_probe(&self, b: &[f64]) -> Result<BoundaryProbe> {
        if b.len() != self.n {
            return Err(GeometryError::Dimension {
                expected: self.n,
                got: b.len(),
            });
        }
        let Some(planar) = &self.planar else {
            let (center, radius) = self.ball_params();
            let r = b
                .iter()
                .zip(center)
                .map(|(a, c)| (a - c).powi(2))
                .sum::<f64>()
                .sqrt();
            if (r - radius).abs() > 1e-8 {
                return Err(GeometryError::NotOnBoundary {
                    distance: (r - radius).abs(),
                });
            }
            let normal = center.iter().zip(b).map(|(c, a)| (c - a) / r).collect();
            let point = center
                .iter()
                .zip(b)
                .map(|(c, a)| c + (a - c) * radius / r)
                .collect();
            return Ok(BoundaryProbe {
                point,
                inward_normal: normal,
                principal_curvatures: Some(vec![1.0 / radius; self.n - 1]),
                mean_curvature: Some(1.0 / radius),
                is_corner: false,
            });
        };
        let x = [b[0], b[1]];
        let curve = &planar.curve;
        let (k, foot) = curve.nearest(x)?;
        if foot.distance > 1e-8 {
            return Err(GeometryError::NotOnBoundary {
                distance: foot.distance,
            });
        }
        let m = curve.pieces.len();
        for j in 0..m {
            if !curve.corner_after[j] {
                continue;
            }
            let p = &curve.pieces[j];
            let q = &curve.pieces[(j + 1) % m];
            let c = p.end_point();
            if dist(c, x) <= 1e-8 {
                let bis = unit(add(
                    p.inward_normal(p.end_param()),
                    q.inward_normal(q.start_param()),
                ));
                return Ok(BoundaryProbe {
                    point: c.to_vec(),
                    inward_normal: bis.to_vec(),
                    principal_curvatures: None,
                    mean_curvature: None,
                    is_corner: true,
                });
            }
        }
        let piece = &curve.pieces[k];
        let kappa = piece.curvature(foot.param);
        Ok(BoundaryProbe {
            point: foot.point.to_vec(),
            inward_normal: piece.inward_normal(foot.param).to_vec(),
            principal_curvatures: Some(vec![kappa]),
            mean_curvature: Some(kappa),
            is_corner: false,
        })
    }

    /// Largest absolute principal curvature over the smooth boundary
    /// (sampled on elliptic arcs).
    pub fn curvature_bound(&self) -> f64 {
        let Some(planar) = &self.planar else {
            return 1.0 / self.inradius();
        };
        planar
            .curve
            .pieces
            .iter()
            .flat_map(|p| (0..=256).map(move |k| p.curvature(p.param_at_fraction(k as f64 / 256.0)).abs()))
            .fold(0.0, f64::max)
    }

    /// Whether the domain is convex: balls, and planar domains whose smooth
    /// pieces all have nonnegative curvature (corners of the supported kinds
    /// are convex by construction).
    pub fn is_convex(&self) -> bool {
        let Some(planar) = &self.planar else {
            return true;
        };
        planar
            .curve
            .pieces
            .iter()
            .all(|p| (0..=256).all(|k| p.curvature(p.param_at_fraction(k as f64 / 256.0)) >= -1e-12))
    }

    /// Whether some smooth boundary piece has zero curvature somewhere.
    pub fn has_flat_boundary(&self) -> bool {
        let Some(planar) = &self.planar else {
            return false;
        };
        planar
            .curve
            .pieces
            .iter()
            .any(|p| (0..=256).any(|k| p.curvature(p.param_at_fraction(k as f64 / 256.0)).abs() <= 1e-12))
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius, .. } => 2.0 * radius,
            DomainKind::Ellipse { semi_axes, .. } => 2.0 * semi_axes[0].max(semi_axes[1]),
            DomainKind::Stadium { length, radius, .. } => length + 2.0 * radius,
            _ => sampled_diameter(&self.planar.as_ref().expect("planar").curve),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)` of a planar domain.
    pub fn bounding_box(&self) -> Result<(Vec2, Vec2)> {
        let curve = self.curve()?;
        let pts = curve.sample(curve.length() / 4096.0);
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in pts {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let pad = 1e-3 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
        Ok(([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad]))
    }

    /// A `C^{1,1}` convex domain within Hausdorff distance `eps` of this one.
    /// Corners are replaced by circular fillets of radius at most `eps`.
    pub fn smooth_approximation(&self, eps: f64) -> Result<Domain> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(GeometryError::Invalid(format!(
                "smoothing radius must be positive, got {eps}"
            )));
        }
        match &self.kind {
            DomainKind::Ball { .. } | DomainKind::Ellipse { .. } | DomainKind::Stadium { .. } => {
                Ok(self.clone())
            }
            DomainKind::RoundedPolygon {
                vertices,
                fillet_radius,
            } => {
                if *fillet_radius > 0.0 {
                    return Ok(self.clone());
                }
                let r = eps * corner_factor(self.curve()?);
                Domain::new(
                    2,
                    DomainKind::RoundedPolygon {
                        vertices: vertices.clone(),
                        fillet_radius: r,
                    },
                )
            }
            DomainKind::ConvexIntersection { members } => {
                let curve = self.curve()?;
                if !curve.has_corners() {
                    return Ok(self.clone());
                }
                Domain::new(
                    2,
                    DomainKind::FilletedIntersection {
                        members: members.clone(),
                        fillet_radius: eps * corner_factor(curve),
                    },
                )
            }
            DomainKind::FilletedIntersection {
                members,
                fillet_radius,
            } => {
                if *fillet_radius >= eps {
                    return Ok(self.clone());
                }
                Domain::intersection(members.clone())?.smooth_approximation(eps)
            }
        }
    }
}

/// `min(1, s/(1-s))` over corners, `s = sin(φ/2)` for interior angle `φ`.
/// A fillet of radius `eps` times this factor stays within `eps` of the corner.
fn corner_factor(curve: &BoundaryCurve) -> f64 {
    let m = curve.pieces.len();
    let mut factor: f64 = 1.0;
    for k in 0..m {
        if !curve.corner_after[k] {
            continue;
        }
        let p = &curve.pieces[k];
        let q = &curve.pieces[(k + 1) % m];
        let t0 = p.tangent(p.end_param());
        let t1 = q.tangent(q.start_param());
        let turn = cross(t0, t1).atan2(dot(t0, t1));
        let s = ((PI - turn) / 2.0).sin();
        factor = factor.min(s / (1.0 - s));
    }
    factor
}

fn in_cutoff(f: &Fillet, x: Vec2) -> bool {
    let v = sub(x, f.center);
    norm(v) > f.radius && wrap_angle(v[1].atan2(v[0]) - f.start) < f.sweep
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GeometryError::Invalid(format!("{what} is not finite")))
    }
}

fn positive(v: f64, what: &str) -> Result<f64> {
    if finite(v, what)? > 0.0 {
        Ok(v)
    } else {
        Err(GeometryError::Invalid(format!("{what} must be positive, got {v}")))
    }
}

fn normalize(n: usize, kind: DomainKind) -> Result<DomainKind> {
    Ok(match kind {
        DomainKind::Ball { center, radius } => {
            let center = if center.is_empty() { vec![0.0; n] } else { center };
            if center.len() != n {
                return Err(GeometryError::Dimension {
                    expected: n,
                    got: center.len(),
                });
            }
            for c in &center {
                finite(*c, "ball centre")?;
            }
            DomainKind::Ball {
                center,
                radius: positive(radius, "ball radius")?,
            }
        }
        DomainKind::Ellipse { center, semi_axes } => {
            finite(center[0], "centre")?;
            finite(center[1], "centre")?;
            positive(semi_axes[0], "semi-axis")?;
            positive(semi_axes[1], "semi-axis")?;
            DomainKind::Ellipse { center, semi_axes }
        }
        DomainKind::Stadium {
            center,
            length,
            radius,
        } => {
            finite(center[0], "centre")?;
            finite(center[1], "centre")?;
            DomainKind::Stadium {
                center,
                length: positive(length, "stadium length")?,
                radius: positive(radius, "stadium radius")?,
            }
        }
        DomainKind::RoundedPolygon {
            mut vertices,
            fillet_radius,
        } => {
            if vertices.len() < 3 {
                return Err(GeometryError::Invalid("a polygon needs at least 3 vertices".into()));
            }
            for v in &vertices {
                finite(v[0], "vertex")?;
                finite(v[1], "vertex")?;
            }
            if finite(fillet_radius, "fillet radius")? < 0.0 {
                return Err(GeometryError::Invalid("fillet radius must be non-negative".into()));
            }
            let m = vertices.len();
            let area: f64 = (0..m)
                .map(|k| cross(vertices[k], vertices[(k + 1) % m]))
                .sum();
            if area < 0.0 {
                vertices.reverse();
            }
            DomainKind::RoundedPolygon {
                vertices,
                fillet_radius,
            }
        }
        DomainKind::ConvexIntersection { members } => DomainKind::ConvexIntersection {
            members: normalize_members(members)?,
        },
        DomainKind::FilletedIntersection {
            members,
            fillet_radius,
        } => DomainKind::FilletedIntersection {
            members: normalize_members(members)?,
            fillet_radius: positive(fillet_radius, "fillet radius")?,
        },
    })
}

fn normalize_members(members: Vec<DomainKind>) -> Result<Vec<DomainKind>> {
    if members.is_empty() {
        return Err(GeometryError::Invalid("an intersection needs at least one member".into()));
    }
    members
        .into_iter()
        .enumerate()
        .map(|(index, m)| match m {
            DomainKind::Ball { .. } | DomainKind::Ellipse { .. } => normalize(2, m),
            DomainKind::Stadium { .. } | DomainKind::RoundedPolygon { .. } => {
                Err(GeometryError::FlatMember {
                    index,
                    kind: m.label().into(),
                })
            }
            other => Err(GeometryError::Invalid(format!(
                "member {index}: nested {} is not supported",
                other.label()
            ))),
        })
        .collect()
}

fn build_planar(kind: &DomainKind) -> Result<Planar> {
    let simple = |curve: BoundaryCurve, center: Vec2, inradius: f64| Planar {
        curve,
        members: Vec::new(),
        fillets: Vec::new(),
        inner: Vec::new(),
        center,
        inradius,
    };
    match kind {
        DomainKind::Ball { center, radius } => {
            let c = [center[0], center[1]];
            let curve = BoundaryCurve::new(vec![Piece::Arc {
                center: c,
                radius: *radius,
                start: 0.0,
                sweep: TAU,
            }]);
            Ok(simple(curve, c, *radius))
        }
        DomainKind::Ellipse { center, semi_axes } => {
            let curve = BoundaryCurve::new(vec![Piece::EllipseArc {
                center: *center,
                semi: *semi_axes,
                start: 0.0,
                sweep: TAU,
            }]);
            Ok(simple(curve, *center, semi_axes[0].min(semi_axes[1])))
        }
        DomainKind::Stadium {
            center,
            length,
            radius,
        } => {
            let (c, h, r) = (*center, 0.5 * length, *radius);
            let curve = BoundaryCurve::new(vec![
                Piece::Segment {
                    a: [c[0] - h, c[1] - r],
                    b: [c[0] + h, c[1] - r],
                },
                Piece::Arc {
                    center: [c[0] + h, c[1]],
                    radius: r,
                    start: -PI / 2.0,
                    sweep: PI,
                },
                Piece::Segment {
                    a: [c[0] + h, c[1] + r],
                    b: [c[0] - h, c[1] + r],
                },
                Piece::Arc {
                    center: [c[0] - h, c[1]],
                    radius: r,
                    start: PI / 2.0,
                    sweep: PI,
                },
            ]);
            Ok(simple(curve, c, r))
        }
        DomainKind::RoundedPolygon {
            vertices,
            fillet_radius,
        } => {
            let inner = inset_polygon(vertices, *fillet_radius)?;
            let curve = BoundaryCurve::new(rounded_polygon_pieces(&inner, *fillet_radius));
            let mut planar = simple(curve, [0.0, 0.0], 0.0);
            planar.inner = inner;
            let sd = |x: Vec2| Ok(polygon_sd(&planar.inner, *fillet_radius, x).0);
            let (c, r) = maximize_sd(&planar.curve, sd)?;
            planar.center = c;
            planar.inradius = r;
            Ok(planar)
        }
        DomainKind::ConvexIntersection { members } => {
            let members = member_domains(members)?;
            let (pieces, _) = intersection_pieces(&members)?;
            let curve = BoundaryCurve::new(pieces);
            let sd = |x: Vec2| -> Result<f64> {
                let mut d = f64::INFINITY;
                for m in &members {
                    d = d.min(m.sd(x)?);
                }
                Ok(d)
            };
            let (c, r) = maximize_sd(&curve, sd)?;
            Ok(Planar {
                curve,
                members,
                fillets: Vec::new(),
                inner: Vec::new(),
                center: c,
                inradius: r,
            })
        }
        DomainKind::FilletedIntersection {
            members,
            fillet_radius,
        } => {
            let members = member_domains(members)?;
            let (pieces, owners) = intersection_pieces(&members)?;
            let sharp = BoundaryCurve::new(pieces);
            let (curve, fillets) = fillet_curve(&sharp, &owners, &members, *fillet_radius)?;
            let mut planar = Planar {
                curve,
                members,
                fillets,
                inner: Vec::new(),
                center: [0.0, 0.0],
                inradius: 0.0,
            };
            let sd = |x: Vec2| -> Result<f64> {
                let mut inside = true;
                for m in &planar.members {
                    inside &= m.sd(x)? >= 0.0;
                }
                inside &= !planar.fillets.iter().any(|f| in_cutoff(f, x));
                let (_, f) = planar.curve.nearest(x)?;
                Ok(if inside { f.distance } else { -f.distance })
            };
            let (c, r) = maximize_sd(&planar.curve, sd)?;
            planar.center = c;
            planar.inradius = r;
            Ok(planar)
        }
    }
}

fn member_domains(members: &[DomainKind]) -> Result<Vec<Domain>> {
    members.iter().map(|m| Domain::new(2, m.clone())).collect()
}

/// Compass search for the maximum of a concave function (the signed
/// distance of a convex domain), started at the boundary centroid.
fn maximize_sd(curve: &BoundaryCurve, sd: impl Fn(Vec2) -> Result<f64>) -> Result<(Vec2, f64)> {
    let mut x = curve.centroid();
    let mut best = sd(x)?;
    let mut step = 0.25 * curve.length() / TAU;
    let dirs: Vec<Vec2> = (0..16)
        .map(|k| {
            let a = TAU * k as f64 / 16.0;
            [a.cos(), a.sin()]
        })
        .collect();
    while step > 1e-13 * curve.length() {
        let mut improved = false;
        for d in &dirs {
            let y = add(x, scale(*d, step));
            let v = sd(y)?;
            if v > best {
                best = v;
                x = y;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    if best <= 0.0 {
        return Err(GeometryError::Invalid("domain has empty interior".into()));
    }
    Ok((x, best))
}

/// Vertices of the polygon whose edges are the input edges moved inward by `r`.
fn inset_polygon(vertices: &[Vec2], r: f64) -> Result<Vec<Vec2>> {
    let m = vertices.len();
    let edge = |k: usize| sub(vertices[(k + 1) % m], vertices[k]);
    for k in 0..m {
        let e0 = edge((k + m - 1) % m);
        let e1 = edge(k);
        if norm(e1) == 0.0 {
            return Err(GeometryError::Invalid(format!("polygon edge {k} has zero length")));
        }
        if cross(e0, e1) <= 0.0 {
            return Err(GeometryError::Invalid(format!(
                "polygon is not strictly convex at vertex {k}"
            )));
        }
    }
    let inner: Vec<Vec2> = (0..m)
        .map(|k| {
            let (e0, e1) = (edge((k + m - 1) % m), edge(k));
            let (n0, n1) = (perp(unit(e0)), perp(unit(e1)));
            // Solve n0·y = r, n1·y = r for the offset y of the vertex.
            let det = cross(n0, n1);
            let y = [r * (n1[1] - n0[1]) / det, r * (n0[0] - n1[0]) / det];
            add(vertices[k], y)
        })
        .collect();
    for k in 0..m {
        let e = sub(inner[(k + 1) % m], inner[k]);
        if dot(e, edge(k)) <= 0.0 {
            return Err(GeometryError::Invalid(format!(
                "fillet radius {r} too large for polygon edge {k}"
            )));
        }
    }
    Ok(inner)
}

fn rounded_polygon_pieces(inner: &[Vec2], r: f64) -> Vec<Piece> {
    let m = inner.len();
    let outward = |k: usize| scale(perp(unit(sub(inner[(k + 1) % m], inner[k]))), -1.0);
    let mut pieces = Vec::new();
    for k in 0..m {
        let o = outward(k);
        let next = (k + 1) % m;
        pieces.push(Piece::Segment {
            a: add(inner[k], scale(o, r)),
            b: add(inner[next], scale(o, r)),
        });
        if r > 0.0 {
            let o1 = outward(next);
            let start = o[1].atan2(o[0]);
            pieces.push(Piece::Arc {
                center: inner[next],
                radius: r,
                start,
                sweep: wrap_angle(o1[1].atan2(o1[0]) - start),
            });
        }
    }
    pieces
}

/// Exact signed distance of the inner polygon dilated by `r`.
fn polygon_sd(inner: &[Vec2], r: f64, x: Vec2) -> (f64, Vec2) {
    let m = inner.len();
    let mut inside = true;
    let mut best_d = f64::INFINITY;
    let mut best_foot = inner[0];
    let mut best_edge = 0;
    for k in 0..m {
        let a = inner[k];
        let b = inner[(k + 1) % m];
        let ab = sub(b, a);
        if cross(ab, sub(x, a)) < 0.0 {
            inside = false;
        }
        let t = (dot(sub(x, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
        let foot = add(a, scale(ab, t));
        let d = dist(x, foot);
        if d < best_d {
            best_d = d;
            best_foot = foot;
            best_edge = k;
        }
    }
    let edge = sub(inner[(best_edge + 1) % m], inner[best_edge]);
    let outward = scale(perp(unit(edge)), -1.0);
    if inside {
        (r + best_d, add(best_foot, scale(outward, r)))
    } else {
        let dir = if best_d > 0.0 {
            scale(sub(x, best_foot), 1.0 / best_d)
        } else {
            outward
        };
        (r - best_d, add(best_foot, scale(dir, r)))
    }
}

fn member_piece(member: &Domain, start: f64, sweep: f64) -> Piece {
    match member.kind() {
        DomainKind::Ball { center, radius } => Piece::Arc {
            center: [center[0], center[1]],
            radius: *radius,
            start,
            sweep,
        },
        DomainKind::Ellipse { center, semi_axes } => Piece::EllipseArc {
            center: *center,
            semi: *semi_axes,
            start,
            sweep,
        },
        _ => unreachable!("members are balls or ellipses"),
    }
}

/// Native angle parameter of a point on a member boundary.
fn member_angle(member: &Domain, p: Vec2) -> f64 {
    match member.kind() {
        DomainKind::Ball { center, .. } => (p[1] - center[1]).atan2(p[0] - center[0]),
        DomainKind::Ellipse { center, semi_axes } => {
            ((p[1] - center[1]) / semi_axes[1]).atan2((p[0] - center[0]) / semi_axes[0])
        }
        _ => unreachable!("members are balls or ellipses"),
    }
}

/// Boundary pieces of an intersection in counter-clockwise order, with the
/// index of the member owning each piece.
fn intersection_pieces(members: &[Domain]) -> Result<(Vec<Piece>, Vec<usize>)> {
    const SAMPLES: usize = 4096;
    let mut found: Vec<(Piece, usize)> = Vec::new();
    for (i, member) in members.iter().enumerate() {
        let at = |phi: f64| member_piece(member, 0.0, TAU).point(phi);
        let margin = |phi: f64| -> Result<f64> {
            let p = at(phi);
            let mut g = f64::INFINITY;
            for (j, other) in members.iter().enumerate() {
                if j != i {
                    g = g.min(other.sd(p)?);
                }
            }
            Ok(g)
        };
        let phis: Vec<f64> = (0..SAMPLES).map(|k| TAU * k as f64 / SAMPLES as f64).collect();
        let flags: Vec<bool> = phis
            .iter()
            .map(|&p| margin(p).map(|g| g > 0.0))
            .collect::<Result<_>>()?;
        if flags.iter().all(|&f| f) {
            found.push((member_piece(member, 0.0, TAU), i));
            continue;
        }
        // Locate sign changes of the margin by bisection.
        let mut entries = Vec::new();
        let mut exits = Vec::new();
        for k in 0..SAMPLES {
            let (f0, f1) = (flags[k], flags[(k + 1) % SAMPLES]);
            if f0 == f1 {
                continue;
            }
            let (mut lo, mut hi) = (phis[k], phis[k] + TAU / SAMPLES as f64);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (margin(mid)? > 0.0) == f0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            if f1 {
                entries.push(root);
            } else {
                exits.push(root);
            }
        }
        for &a in &entries {
            let b = exits
                .iter()
                .map(|&e| (e, wrap_angle(e - a)))
                .min_by(|x, y| x.1.total_cmp(&y.1));
            if let Some((_, sweep)) = b {
                if sweep > 0.0 {
                    found.push((member_piece(member, a, sweep), i));
                }
            }
        }
    }
    if found.is_empty() {
        return Err(GeometryError::Invalid("intersection has empty interior".into()));
    }
    let mids: Vec<Vec2> = found.iter().map(|(p, _)| p.point_at_fraction(0.5)).collect();
    let z = scale(mids.iter().fold([0.0, 0.0], |a, p| add(a, *p)), 1.0 / mids.len() as f64);
    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&a, &b| {
        let ta = sub(mids[a], z);
        let tb = sub(mids[b], z);
        ta[1].atan2(ta[0]).total_cmp(&tb[1].atan2(tb[0]))
    });
    let pieces: Vec<Piece> = order.iter().map(|&k| found[k].0.clone()).collect();
    let owners: Vec<usize> = order.iter().map(|&k| found[k].1).collect();
    let m = pieces.len();
    for k in 0..m {
        let gap = dist(pieces[k].end_point(), pieces[(k + 1) % m].start_point());
        if gap > 1e-8 {
            return Err(GeometryError::Invalid(format!(
                "intersection boundary is not closed (gap {gap:e} after piece {k})"
            )));
        }
    }
    Ok((pieces, owners))
}

/// Point with signed distance `r` to two members, near their common corner.
fn fillet_center(a: &Domain, b: &Domain, corner: Vec2, bisector: Vec2, guess: f64, r: f64) -> Result<Vec2> {
    let mut z = add(corner, scale(bisector, guess));
    for _ in 0..100 {
        let (da, fa) = a.sd2(z)?;
        let (db, fb) = b.sd2(z)?;
        let (f0, f1) = (da - r, db - r);
        if f0.abs().max(f1.abs()) < 1e-14 * (1.0 + r) {
            return Ok(z);
        }
        let ga = scale(unit(sub(z, fa)), da.signum());
        let gb = scale(unit(sub(z, fb)), db.signum());
        let det = cross(ga, gb);
        if det.abs() < 1e-14 {
            break;
        }
        let step = [(-f0 * gb[1] + f1 * ga[1]) / det, (-ga[0] * f1 + gb[0] * f0) / det];
        z = add(z, step);
    }
    let (da, _) = a.sd2(z)?;
    let (db, _) = b.sd2(z)?;
    if (da - r).abs().max((db - r).abs()) < 1e-10 {
        Ok(z)
    } else {
        Err(GeometryError::Invalid(format!(
            "fillet of radius {r} could not be placed at corner {corner:?}"
        )))
    }
}

fn fillet_curve(
    sharp: &BoundaryCurve,
    owners: &[usize],
    members: &[Domain],
    r: f64,
) -> Result<(BoundaryCurve, Vec<Fillet>)> {
    let m = sharp.pieces.len();
    // Trimmed parameter range per piece and fillet after each corner.
    let mut ranges: Vec<(f64, f64)> = sharp
        .pieces
        .iter()
        .map(|p| (p.start_param(), p.end_param()))
        .collect();
    let mut fillets: Vec<Option<Fillet>> = vec![None; m];
    for k in 0..m {
        if !sharp.corner_after[k] {
            continue;
        }
        let next = (k + 1) % m;
        let (p, q) = (&sharp.pieces[k], &sharp.pieces[next]);
        let (ma, mb) = (&members[owners[k]], &members[owners[next]]);
        let corner = p.end_point();
        let na = p.inward_normal(p.end_param());
        let nb = q.inward_normal(q.start_param());
        let turn = cross(p.tangent(p.end_param()), q.tangent(q.start_param()))
            .atan2(dot(p.tangent(p.end_param()), q.tangent(q.start_param())));
        let s = ((PI - turn) / 2.0).sin();
        let fc = fillet_center(ma, mb, corner, unit(add(na, nb)), r / s, r)?;
        let ta = ma.sd2(fc)?.1;
        let tb = mb.sd2(fc)?.1;
        let ea = p.start_param() + wrap_angle(member_angle(ma, ta) - p.start_param());
        let sb_rel = wrap_angle(member_angle(mb, tb) - q.start_param());
        let sb = q.start_param() + if sb_rel > PI { sb_rel - TAU } else { sb_rel };
        ranges[k].1 = ea;
        ranges[next].0 = sb;
        let start = (ta[1] - fc[1]).atan2(ta[0] - fc[0]);
        let sweep = wrap_angle((tb[1] - fc[1]).atan2(tb[0] - fc[0]) - start);
        fillets[k] = Some(Fillet {
            center: fc,
            radius: r,
            start,
            sweep,
        });
    }
    let mut pieces = Vec::new();
    for k in 0..m {
        let (a, b) = ranges[k];
        if !(b > a) || b - a > sharp.pieces[k].end_param() - sharp.pieces[k].start_param() + 1e-12 {
            return Err(GeometryError::Invalid(format!(
                "fillet radius {r} is too large for boundary piece {k}"
            )));
        }
        pieces.push(member_piece(&members[owners[k]], a, b - a));
        if let Some(f) = &fillets[k] {
            pieces.push(Piece::Arc {
                center: f.center,
                radius: f.radius,
                start: f.start,
                sweep: f.sweep,
            });
        }
    }
    Ok((BoundaryCurve::new(pieces), fillets.into_iter().flatten().collect()))
}

/// Largest distance between boundary points: dense pair search followed by
/// local golden-section refinement of the best pairs.
fn sampled_diameter(curve: &BoundaryCurve) -> f64 {
    let total = curve.length();
    let count = 2048usize;
    let spacing = total / count as f64;
    let mut params: Vec<f64> = (0..count).map(|k| k as f64 * spacing).collect();
    let mut acc = 0.0;
    for (k, piece) in curve.pieces.iter().enumerate() {
        acc += piece.length();
        if curve.corner_after[k] {
            params.push(acc.min(total));
        }
    }
    let pts: Vec<Vec2> = params.iter().map(|&s| curve.point_at_arclength(s)).collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..pts.len() {
        let (mut best, mut bj) = (0.0, i);
        for j in 0..pts.len() {
            let d = dist(pts[i], pts[j]);
            if d > best {
                best = d;
                bj = j;
            }
        }
        pairs.push((best, i, bj));
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut diameter = pairs[0].0;
    for &(_, i, j) in pairs.iter().take(8) {
        let (mut s, mut t) = (params[i], params[j]);
        for _ in 0..6 {
            let q = curve.point_at_arclength(t);
            s = golden_max(|u| dist(curve.point_at_arclength(u), q), s - 2.0 * spacing, s + 2.0 * spacing);
            let p = curve.point_at_arclength(s);
            t = golden_max(|u| dist(curve.point_at_arclength(u), p), t - 2.0 * spacing, t + 2.0 * spacing);
        }
        diameter = diameter.max(dist(curve.point_at_arclength(s), curve.point_at_arclength(t)));
    }
    diameter
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_boundary_distance(dom: &Domain, x: Vec2) -> f64 {
        let curve = dom.curve().unwrap();
        curve
            .sample(curve.length() / 40_000.0)
            .into_iter()
            .map(|p| dist(p, x))
            .fold(f64::INFINITY, f64::min)
    }

    fn lens() -> Domain {
        Domain::intersection(vec![
            Domain::disk_kind([0.0, 0.0], 1.0),
            Domain::disk_kind([1.0, 0.0], 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn ball_center_distance() {
        let d = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let r = d.signed_distance(&[0.0, 0.0]).unwrap();
        assert_eq!(r.d, 1.0);
        assert!((norm([r.nearest[0], r.nearest[1]]) - 1.0).abs() < 1e-15);
        let b3 = Domain::ball_nd(3, 2.0).unwrap();
        assert_eq!(b3.signed_distance(&[0.0, 0.0, 0.5]).unwrap().d, 1.5);
        assert!(b3.signed_distance(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn stadium_center_distance_matches_brute_force() {
        let s = Domain::stadium(2.0, 1.0).unwrap();
        let d = s.sd([0.0, 0.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        for x in [[0.0, 0.0], [1.5, 0.3], [-1.9, -0.2], [0.4, 0.9]] {
            let d = s.sd(x).unwrap();
            assert!((d - brute_boundary_distance(&s, x)).abs() < 1e-6, "{x:?}");
        }
    }

    #[test]
    fn ellipse_and_lens_distance_match_brute_force() {
        let e = Domain::ellipse(2.0, 1.0).unwrap();
        let l = lens();
        for (dom, x) in [
            (&e, [0.3, 0.1]),
            (&e, [1.9, 0.0]),
            (&e, [-1.0, -0.7]),
            (&l, [0.5, 0.0]),
            (&l, [0.5, 0.8]),
            (&l, [0.2, -0.3]),
        ] {
            let d = dom.sd(x).unwrap();
            assert!((d - brute_boundary_distance(dom, x)).abs() < 1e-6, "{x:?}");
        }
        // Outside points carry a negative sign.
        assert!(l.sd([-0.5, 0.0]).unwrap() < 0.0);
        assert!((l.sd([-0.5, 0.0]).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn probes() {
        let b = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let p = b.boundary_probe(&[0.6, 0.8]).unwrap();
        assert!((p.mean_curvature.unwrap() - 1.0).abs() < 1e-15);
        let s = Domain::stadium(2.0, 1.0).unwrap();
        let p = s.boundary_probe(&[0.0, 1.0]).unwrap();
        assert_eq!(p.mean_curvature, Some(0.0));
        assert!(!p.is_corner);
        assert!((p.inward_normal[1] + 1.0).abs() < 1e-15);
        let e = Domain::ellipse(2.0, 1.0).unwrap();
        let p = e.boundary_probe(&[2.0, 0.0]).unwrap();
        // Independent check: curvature from finite differences of the
        // parametrization (a cos t, b sin t) at t = 0.
        let h = 1e-4;
        let pt = |t: f64| [2.0 * f64::cos(t), f64::sin(t)];
        let (x0, x1, x2) = (pt(-h), pt(0.0), pt(h));
        let d1 = [(x2[0] - x0[0]) / (2.0 * h), (x2[1] - x0[1]) / (2.0 * h)];
        let d2 = [
            (x2[0] - 2.0 * x1[0] + x0[0]) / (h * h),
            (x2[1] - 2.0 * x1[1] + x0[1]) / (h * h),
        ];
        let kappa = cross(d1, d2).abs() / norm(d1).powi(3);
        assert!((p.mean_curvature.unwrap() - kappa).abs() < 1e-6);
        assert!((kappa - 2.0).abs() < 1e-6);
        assert!(e.boundary_probe(&[2.1, 0.0]).is_err());
    }

    #[test]
    fn lens_corners_are_flagged() {
        let l = lens();
        assert_eq!(l.corners().len(), 2);
        let y = 0.75f64.sqrt();
        let p = l.boundary_probe(&[0.5, y]).unwrap();
        assert!(p.is_corner);
        assert!(p.mean_curvature.is_none());
        assert!((p.inward_normal[1] + 1.0).abs() < 1e-9);
        let q = l.boundary_probe(&[1.0, 0.0]).unwrap();
        assert!(!q.is_corner);
        assert!((q.mean_curvature.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diameters() {
        assert_eq!(Domain::ball([0.0, 0.0], 1.0).unwrap().diameter(), 2.0);
        assert_eq!(Domain::stadium(2.0, 1.0).unwrap().diameter(), 4.0);
        // Brute force over dense boundary pairs of the stadium curve.
        let s = Domain::stadium(2.0, 1.0).unwrap();
        let pts = s.curve().unwrap().sample(0.002);
        let brute = pts
            .iter()
            .flat_map(|p| pts.iter().map(move |q| dist(*p, *q)))
            .fold(0.0, f64::max);
        assert!((brute - 4.0).abs() < 1e-5);
        let l = lens();
        assert!((l.diameter() - 3f64.sqrt()).abs() < 1e-6 * 3f64.sqrt());
        let tri = Domain::rounded_polygon(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]], 0.0).unwrap();
        assert!((tri.diameter() - 5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn flat_members_are_rejected() {
        let slab = DomainKind::Stadium {
            center: [0.0, 0.0],
            length: 10.0,
            radius: 1.0,
        };
        let err = Domain::intersection(vec![slab.clone(), slab]).unwrap_err();
        assert!(matches!(err, GeometryError::FlatMember { index: 0, .. }));
    }

    #[test]
    fn smoothing() {
        let b = Domain::ball([0.0, 0.0], 1.0).unwrap();
        assert_eq!(b.smooth_approximation(0.1).unwrap().kind(), b.kind());
        let rp = Domain::rounded_polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]], 0.2)
            .unwrap();
        assert_eq!(rp.smooth_approximation(0.1).unwrap().kind(), rp.kind());

        let l = lens();
        let s = l.smooth_approximation(0.1).unwrap();
        match s.kind() {
            DomainKind::FilletedIntersection { fillet_radius, .. } => {
                assert!((fillet_radius - 0.1).abs() < 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(!s.has_corners());
        // Hausdorff distance by dense sampling of both boundaries.
        let a = l.curve().unwrap().sample(1e-3);
        let b = s.curve().unwrap().sample(1e-3);
        let one_way = |p: &[Vec2], q: &[Vec2]| {
            p.iter()
                .map(|x| q.iter().map(|y| dist(*x, *y)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        let h = one_way(&a, &b).max(one_way(&b, &a));
        assert!(h <= 0.1, "hausdorff {h}");
        assert!(h > 0.01);
        // Smoothed domain is contained in the original.
        for p in &b {
            assert!(l.sd(*p).unwrap() > -1e-9);
        }
        // Signed distance inside the filleted domain matches brute force.
        for x in [[0.5, 0.0], [0.5, 0.7], [0.45, -0.75]] {
            let d = s.sd(x).unwrap();
            let brute = brute_boundary_distance(&s, x);
            assert!((d.abs() - brute).abs() < 1e-6, "{x:?} {d} {brute}");
        }
        assert!(s.sd([0.5, 0.86]).unwrap() < 0.0);
    }

    #[test]
    fn json_round_trip_normalizes() {
        let d = Domain::from_json(r#"{"kind":"ball","radius":1.5}"#).unwrap();
        let f = d.to_file();
        assert_eq!(f.n, 2);
        assert_eq!(
            f.kind,
            DomainKind::Ball {
                center: vec![0.0, 0.0],
                radius: 1.5
            }
        );
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(Domain::from_json(&text).unwrap().to_file(), f);
        let cw = Domain::rounded_polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], 0.0).unwrap();
        match cw.kind() {
            DomainKind::RoundedPolygon { vertices, .. } => assert_eq!(vertices[0], [1.0, 0.0]),
            _ => unreachable!(),
        }
        assert!(Domain::from_json(r#"{"kind":"ellipse","semi_axes":[1,-1]}"#).is_err());
        assert!(Domain::from_json(r#"{"kind":"stadium","n":3,"length":1,"radius":1}"#).is_err());
    }

    #[test]
    fn three_disks() {
        let c = 0.9 / 3f64.sqrt();
        let members = (0..3)
            .map(|k| {
                let a = TAU * k as f64 / 3.0;
                Domain::disk_kind([c * a.cos(), c * a.sin()], 1.0)
            })
            .collect();
        let d = Domain::intersection(members).unwrap();
        assert_eq!(d.corners().len(), 3);
        assert!(d.inradius() > 0.4);
        let x = [0.1, -0.2];
        assert!((d.sd(x).unwrap() - brute_boundary_distance(&d, x)).abs() < 1e-6);
    }
}
