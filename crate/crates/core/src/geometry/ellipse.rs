use super::{GeometryError, Result, Vec2};

const MAX_ITER: usize = 200;

/// Nearest point on the axis-aligned ellipse `(x/a)^2 + (y/b)^2 = 1`
/// (centred at the origin) to `p`.
///
/// Returns the parametric angle `θ` of the foot point `(a cos θ, b sin θ)`
/// together with the foot point itself. Uses the monotone root of
/// `F(t) = (a p_x/(t+a²))² + (b p_y/(t+b²))² − 1`, bracketed and solved by
/// safeguarded Newton iteration.
pub fn project_to_ellipse(a: f64, b: f64, p: Vec2) -> Result<(f64, Vec2)> {
    // Reduce to the first quadrant with a >= b.
    let swap = b > a;
    let (ea, eb, px, py) = if swap {
        (b, a, p[1], p[0])
    } else {
        (a, b, p[0], p[1])
    };
    let sx = if px < 0.0 { -1.0 } else { 1.0 };
    let sy = if py < 0.0 { -1.0 } else { 1.0 };
    let (y0, y1) = (px.abs(), py.abs());

    let (x0, x1) = quadrant_foot(ea, eb, y0, y1)?;
    let (fx, fy) = (sx * x0, sy * x1);
    let foot = if swap { [fy, fx] } else { [fx, fy] };
    let theta = (foot[1] / b).atan2(foot[0] / a);
    Ok((theta, foot))
}

fn quadrant_foot(e0: f64, e1: f64, y0: f64, y1: f64) -> Result<(f64, f64)> {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return Ok((y0, y1));
            }
            let r0 = (e0 / e1).powi(2);
            let sbar = root(r0, z0, z1, g)?;
            let x0 = r0 * y0 / (sbar + r0);
            let x1 = y1 / (sbar + 1.0);
            Ok((x0, x1))
        } else {
            Ok((0.0, e1))
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            Ok((x0, x1))
        } else {
            Ok((e0, 0.0))
        }
    }
}

/// Root of `(r0 z0/(s+r0))² + (z1/(s+1))² − 1` by bisection on a bracket,
/// accelerated with Newton steps that stay inside the bracket.
fn root(r0: f64, z0: f64, z1: f64, g: f64) -> Result<f64> {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 {
        0.0
    } else {
        (n0 * n0 + z1 * z1).sqrt() - 1.0
    };
    let func = |s: f64| {
        let a = n0 / (s + r0);
        let b = z1 / (s + 1.0);
        let v = a * a + b * b - 1.0;
        let dv = -2.0 * (a * a / (s + r0) + b * b / (s + 1.0));
        (v, dv)
    };
    let mut s = 0.5 * (s0 + s1);
    for _ in 0..MAX_ITER {
        let (v, dv) = func(s);
        if v == 0.0 {
            return Ok(s);
        }
        if v > 0.0 {
            s0 = s;
        } else {
            s1 = s;
        }
        let newton = s - v / dv;
        let next = if dv != 0.0 && newton > s0 && newton < s1 {
            newton
        } else {
            0.5 * (s0 + s1)
        };
        if (next - s).abs() <= 1e-16 * (1.0 + s.abs()) || s1 - s0 <= 1e-16 * (1.0 + s.abs()) {
            return Ok(next);
        }
        s = next;
    }
    Err(GeometryError::ProjectionDiverged {
        iterations: MAX_ITER,
        last: [s, 0.0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: f64, b: f64, p: Vec2) -> f64 {
        let n = 200_000;
        (0..n)
            .map(|k| {
                let t = k as f64 / n as f64 * std::f64::consts::TAU;
                (a * t.cos() - p[0]).hypot(b * t.sin() - p[1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn matches_dense_sampling() {
        for &(a, b) in &[(2.0, 1.0), (1.0, 3.0), (1.5, 1.5)] {
            for &p in &[[0.3, 0.2], [-1.9, 0.1], [0.0, 0.0], [3.0, -2.0], [0.0, 0.5], [1.0, 0.0]] {
                let (_, foot) = project_to_ellipse(a, b, p).unwrap();
                let d = (foot[0] - p[0]).hypot(foot[1] - p[1]);
                assert!((d - brute(a, b, p)).abs() < 1e-6, "{a} {b} {p:?}");
                let on = (foot[0] / a).powi(2) + (foot[1] / b).powi(2);
                assert!((on - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parametric_angle_reproduces_foot() {
        let (t, foot) = project_to_ellipse(2.0, 1.0, [1.2, 0.9]).unwrap();
        assert!((2.0 * t.cos() - foot[0]).abs() < 1e-12);
        assert!((t.sin() - foot[1]).abs() < 1e-12);
    }
}
