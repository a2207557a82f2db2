use std::f64::consts::TAU;

use super::{
    add, cross, dist, dot, norm, perp, project_to_ellipse, scale, sub, unit, wrap_angle, Result,
    Vec2,
};

/// One smooth piece of a counter-clockwise boundary curve. The domain lies
/// to the left of the direction of travel.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Segment {
        a: Vec2,
        b: Vec2,
    },
    /// Circular arc `center + radius (cos φ, sin φ)`, `φ ∈ [start, start + sweep]`.
    Arc {
        center: Vec2,
        radius: f64,
        start: f64,
        sweep: f64,
    },
    /// Axis-aligned elliptic arc `center + (a cos θ, b sin θ)`,
    /// `θ ∈ [start, start + sweep]`.
    EllipseArc {
        center: Vec2,
        semi: Vec2,
        start: f64,
        sweep: f64,
    },
}

/// Nearest point on a piece.
#[derive(Debug, Clone, Copy)]
pub struct PieceFoot {
    pub distance: f64,
    pub point: Vec2,
    /// Curve parameter of the foot (angle for arcs, fraction for segments).
    pub param: f64,
    /// Foot was clamped to the first / last endpoint of the piece.
    pub at_start: bool,
    pub at_end: bool,
}

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

fn ellipse_speed(semi: Vec2, t: f64) -> f64 {
    (semi[0] * t.sin()).hypot(semi[1] * t.cos())
}

/// Arc length of an elliptic arc over `[t0, t1]` (composite Gauss–Legendre).
fn ellipse_length(semi: Vec2, t0: f64, t1: f64) -> f64 {
    let panels = 32usize.max(((t1 - t0).abs() / 0.05).ceil() as usize);
    let h = (t1 - t0) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = t0 + (k as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            sum += w * ellipse_speed(semi, mid + 0.5 * h * x);
        }
    }
    sum * 0.5 * h
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => dist(a, b),
            Piece::Arc { radius, sweep, .. } => radius * sweep,
            Piece::EllipseArc {
                semi, start, sweep, ..
            } => ellipse_length(semi, start, start + sweep),
        }
    }

    /// Point at parameter `u ∈ [0, 1]` where `u` is the fraction of arc length.
    pub fn point_at_fraction(&self, u: f64) -> Vec2 {
        let p = self.param_at_fraction(u);
        self.point(p)
    }

    /// Native parameter (see [`PieceFoot::param`]) at arc-length fraction `u`.
    pub fn param_at_fraction(&self, u: f64) -> f64 {
        match *self {
            Piece::Segment { .. } => u,
            Piece::Arc { start, sweep, .. } => start + u * sweep,
            Piece::EllipseArc {
                semi, start, sweep, ..
            } => {
                let total = ellipse_length(semi, start, start + sweep);
                let target = u * total;
                let mut t = start + u * sweep;
                for _ in 0..50 {
                    let g = ellipse_length(semi, start, t) - target;
                    let step = g / ellipse_speed(semi, t);
                    t -= step;
                    if step.abs() < 1e-15 {
                        break;
                    }
                }
                t
            }
        }
    }

    pub fn point(&self, param: f64) -> Vec2 {
        match *self {
            Piece::Segment { a, b } => super::lerp(a, b, param),
            Piece::Arc { center, radius, .. } => {
                [center[0] + radius * param.cos(), center[1] + radius * param.sin()]
            }
            Piece::EllipseArc { center, semi, .. } => {
                [center[0] + semi[0] * param.cos(), center[1] + semi[1] * param.sin()]
            }
        }
    }

    /// Unit tangent in the direction of travel.
    pub fn tangent(&self, param: f64) -> Vec2 {
        match *self {
            Piece::Segment { a, b } => unit(sub(b, a)),
            Piece::Arc { .. } => [-param.sin(), param.cos()],
            Piece::EllipseArc { semi, .. } => unit([-semi[0] * param.sin(), semi[1] * param.cos()]),
        }
    }

    pub fn inward_normal(&self, param: f64) -> Vec2 {
        perp(self.tangent(param))
    }

    /// Curvature with respect to the inward normal (positive for convex arcs).
    pub fn curvature(&self, param: f64) -> f64 {
        match *self {
            Piece::Segment { .. } => 0.0,
            Piece::Arc { radius, .. } => 1.0 / radius,
            Piece::EllipseArc { semi, .. } => {
                let (a, b) = (semi[0], semi[1]);
                let q = (a * param.sin()).powi(2) + (b * param.cos()).powi(2);
                a * b / q.powf(1.5)
            }
        }
    }

    pub fn start_point(&self) -> Vec2 {
        match *self {
            Piece::Segment { a, .. } => a,
            Piece::Arc { start, .. } | Piece::EllipseArc { start, .. } => self.point(start),
        }
    }

    pub fn end_point(&self) -> Vec2 {
        match *self {
            Piece::Segment { b, .. } => b,
            Piece::Arc { start, sweep, .. } | Piece::EllipseArc { start, sweep, .. } => {
                self.point(start + sweep)
            }
        }
    }

    pub fn start_param(&self) -> f64 {
        match *self {
            Piece::Segment { .. } => 0.0,
            Piece::Arc { start, .. } | Piece::EllipseArc { start, .. } => start,
        }
    }

    pub fn end_param(&self) -> f64 {
        match *self {
            Piece::Segment { .. } => 1.0,
            Piece::Arc { start, sweep, .. } | Piece::EllipseArc { start, sweep, .. } => {
                start + sweep
            }
        }
    }

    fn endpoint_foot(&self, x: Vec2) -> PieceFoot {
        let (s, e) = (self.start_point(), self.end_point());
        let (ds, de) = (dist(x, s), dist(x, e));
        if ds <= de {
            PieceFoot {
                distance: ds,
                point: s,
                param: self.start_param(),
                at_start: true,
                at_end: false,
            }
        } else {
            PieceFoot {
                distance: de,
                point: e,
                param: self.end_param(),
                at_start: false,
                at_end: true,
            }
        }
    }

    /// Nearest point of the piece to `x`.
    pub fn nearest(&self, x: Vec2) -> Result<PieceFoot> {
        match *self {
            Piece::Segment { a, b } => {
                let ab = sub(b, a);
                let t = (dot(sub(x, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
                let p = super::lerp(a, b, t);
                Ok(PieceFoot {
                    distance: dist(x, p),
                    point: p,
                    param: t,
                    at_start: t == 0.0,
                    at_end: t == 1.0,
                })
            }
            Piece::Arc {
                center,
                start,
                sweep,
                ..
            } => {
                let v = sub(x, center);
                if norm(v) == 0.0 {
                    return Ok(self.endpoint_foot(x));
                }
                let phi = v[1].atan2(v[0]);
                let rel = wrap_angle(phi - start);
                if rel <= sweep || sweep >= TAU {
                    let param = start + rel.min(sweep);
                    let p = self.point(param);
                    Ok(PieceFoot {
                        distance: dist(x, p),
                        point: p,
                        param,
                        at_start: false,
                        at_end: false,
                    })
                } else {
                    Ok(self.endpoint_foot(x))
                }
            }
            Piece::EllipseArc {
                center,
                semi,
                start,
                sweep,
            } => {
                let (theta, foot) = project_to_ellipse(semi[0], semi[1], sub(x, center))?;
                let rel = wrap_angle(theta - start);
                if rel <= sweep || sweep >= TAU {
                    let p = add(center, foot);
                    return Ok(PieceFoot {
                        distance: dist(x, p),
                        point: p,
                        param: start + rel.min(sweep),
                        at_start: false,
                        at_end: false,
                    });
                }
                // Global foot lies off the arc: search the arc itself.
                let mut best = self.endpoint_foot(x);
                let samples = 64;
                let dfun = |t: f64| dist(x, self.point(t));
                for k in 1..samples {
                    let t0 = start + sweep * k as f64 / samples as f64;
                    let mut t = t0;
                    // Newton on the squared distance derivative.
                    for _ in 0..30 {
                        let p = self.point(t);
                        let dp = [-semi[0] * t.sin(), semi[1] * t.cos()];
                        let ddp = [-semi[0] * t.cos(), -semi[1] * t.sin()];
                        let r = sub(p, x);
                        let g = dot(r, dp);
                        let h = dot(dp, dp) + dot(r, ddp);
                        if h <= 0.0 {
                            break;
                        }
                        let step = g / h;
                        t -= step;
                        if step.abs() < 1e-15 {
                            break;
                        }
                    }
                    if t > start && t < start + sweep {
                        let d = dfun(t);
                        if d < best.distance {
                            best = PieceFoot {
                                distance: d,
                                point: self.point(t),
                                param: t,
                                at_start: false,
                                at_end: false,
                            };
                        }
                    }
                }
                Ok(best)
            }
        }
    }
}

/// Closed counter-clockwise curve made of smooth pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub pieces: Vec<Piece>,
    /// `corner_after[k]` is true when the junction between piece `k` and
    /// piece `k + 1` (cyclically) has a tangent discontinuity.
    pub corner_after: Vec<bool>,
}

impl BoundaryCurve {
    pub fn new(pieces: Vec<Piece>) -> Self {
        let m = pieces.len();
        let corner_after = (0..m)
            .map(|k| {
                let p = &pieces[k];
                let q = &pieces[(k + 1) % m];
                let t0 = p.tangent(p.end_param());
                let t1 = q.tangent(q.start_param());
                cross(t0, t1).abs() > 1e-9 || dot(t0, t1) < 0.0
            })
            .collect();
        Self {
            pieces,
            corner_after,
        }
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    pub fn corners(&self) -> Vec<Vec2> {
        self.pieces
            .iter()
            .zip(&self.corner_after)
            .filter(|(_, &c)| c)
            .map(|(p, _)| p.end_point())
            .collect()
    }

    pub fn has_corners(&self) -> bool {
        self.corner_after.iter().any(|&c| c)
    }

    /// Nearest boundary point: `(piece index, foot)`.
    pub fn nearest(&self, x: Vec2) -> Result<(usize, PieceFoot)> {
        let mut best: Option<(usize, PieceFoot)> = None;
        for (k, piece) in self.pieces.iter().enumerate() {
            let foot = piece.nearest(x)?;
            if best.is_none_or(|(_, b)| foot.distance < b.distance) {
                best = Some((k, foot));
            }
        }
        Ok(best.expect("curve has at least one piece"))
    }

    /// Splits the curve into maximal corner-free chains. Each chain is a list
    /// of piece indices; the first chain starts right after a corner (or at
    /// piece 0 when the curve is smooth).
    pub fn chains(&self) -> Vec<Vec<usize>> {
        let m = self.pieces.len();
        let first = match self.corner_after.iter().position(|&c| c) {
            Some(k) => (k + 1) % m,
            None => return vec![(0..m).collect()],
        };
        let mut chains = Vec::new();
        let mut current = Vec::new();
        for step in 0..m {
            let k = (first + step) % m;
            current.push(k);
            if self.corner_after[k] {
                chains.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            chains.push(current);
        }
        chains
    }

    /// Point at arc-length `s` along a chain, measured from the chain start.
    pub fn chain_point(&self, chain: &[usize], s: f64) -> Vec2 {
        let mut rest = s.max(0.0);
        for (i, &k) in chain.iter().enumerate() {
            let piece = &self.pieces[k];
            let len = piece.length();
            if rest <= len || i + 1 == chain.len() {
                return piece.point_at_fraction((rest / len).clamp(0.0, 1.0));
            }
            rest -= len;
        }
        unreachable!("chains are never empty")
    }

    /// Points sampled uniformly in arc length: `count` points on each chain
    /// proportional to its length (corners are always sample points).
    pub fn sample(&self, spacing: f64) -> Vec<Vec2> {
        let mut pts = Vec::new();
        for chain in self.chains() {
            let len: f64 = chain.iter().map(|&k| self.pieces[k].length()).sum();
            let m = ((len / spacing).ceil() as usize).max(1);
            for i in 0..m {
                pts.push(self.chain_point(&chain, len * i as f64 / m as f64));
            }
        }
        pts
    }

    /// Point at global arc length `s` (taken modulo the total length),
    /// starting from the beginning of piece 0.
    pub fn point_at_arclength(&self, s: f64) -> Vec2 {
        let total = self.length();
        let mut rest = s.rem_euclid(total);
        for piece in &self.pieces {
            let len = piece.length();
            if rest <= len {
                return piece.point_at_fraction(rest / len);
            }
            rest -= len;
        }
        self.pieces[0].start_point()
    }

    /// Mean of densely sampled boundary points.
    pub fn centroid(&self) -> Vec2 {
        let pts = self.sample(self.length() / 2048.0);
        let s = pts.iter().fold([0.0, 0.0], |acc, p| add(acc, *p));
        scale(s, 1.0 / pts.len() as f64)
    }
}
