//! The collar barrier `w = ψ(d)`, `ψ(d) = A(d^p − d^q)`, `p = 1/(n+1)`.

use serde::Serialize;

use super::{boundary_feet, distance_jet, log_offsets, Barrier, BarrierSpec, Jet, Sampling, FD_OFFSET};
use crate::error::{Error, Result};
use crate::geometry::{add, scale, Domain, Vec2};

/// `(q − p)(q + np)` with `p = 1/(n+1)`.
pub fn h_factor(q: f64, n: usize) -> f64 {
    let p = 1.0 / (n as f64 + 1.0);
    (q - p) * (q + n as f64 * p)
}

/// `q² + (2pn − 1)q + p² − p`, the expanded form of [`h_factor`].
pub fn h_factor_expanded(q: f64, n: usize) -> f64 {
    let nf = n as f64;
    let p = 1.0 / (nf + 1.0);
    q * q + (2.0 * p * nf - 1.0) * q + p * p - p
}

fn psi_params(spec: &BarrierSpec) -> Result<(f64, f64, f64, f64)> {
    match *spec {
        BarrierSpec::GlobalPsi { a, p, q, delta } => Ok((a, p, q, delta)),
        _ => Err(Error::Invalid(format!("expected a global_psi barrier, got {}", spec.kind()))),
    }
}

fn check_collar(d: f64, delta: f64) -> Result<()> {
    if d > 0.0 && d < delta {
        Ok(())
    } else {
        Err(Error::Invalid(format!("d = {d} lies outside the collar (0, {delta})")))
    }
}

/// `m(ψ) = ψ''ψ/(1 + ψ'²) + n` from the rearranged closed form
/// `d^{q−p}[−A²h(q) + n d^{2−p−q} + A² q(q − 1 + nq) d^{q−p}] /
/// [A²p² + d^{2−2p} − 2A²pq d^{q−p} + A²q² d^{2q−2p}]`.
pub fn m_psi(spec: &BarrierSpec, d: f64, n: usize) -> Result<f64> {
    let (a, p, q, delta) = psi_params(spec)?;
    check_collar(d, delta)?;
    Ok(m_closed(a, p, q, d, n))
}

fn m_closed(a: f64, p: f64, q: f64, d: f64, n: usize) -> f64 {
    let nf = n as f64;
    let a2 = a * a;
    let h = (q - p) * (q + nf * p);
    let dqp = d.powf(q - p);
    let num = -a2 * h + nf * d.powf(2.0 - p - q) + a2 * q * (q - 1.0 + nf * q) * dqp;
    let den = a2 * p * p + d.powf(2.0 - 2.0 * p) - 2.0 * a2 * p * q * dqp + a2 * q * q * d.powf(2.0 * q - 2.0 * p);
    dqp * num / den
}

fn psi_derivatives(a: f64, p: f64, q: f64, d: f64) -> [f64; 3] {
    [
        a * (d.powf(p) - d.powf(q)),
        a * (p * d.powf(p - 1.0) - q * d.powf(q - 1.0)),
        a * (p * (p - 1.0) * d.powf(p - 2.0) - q * (q - 1.0) * d.powf(q - 2.0)),
    ]
}

/// `m(ψ)` evaluated directly from `ψ`, `ψ'` and `ψ''`.
pub fn m_psi_direct(spec: &BarrierSpec, d: f64, n: usize) -> Result<f64> {
    let (a, p, q, delta) = psi_params(spec)?;
    check_collar(d, delta)?;
    let [f, f1, f2] = psi_derivatives(a, p, q, d);
    Ok(f2 * f / (1.0 + f1 * f1) + n as f64)
}

/// Points of the sign-oracle grid on `(0, δ)`.
pub const SIGN_GRID: usize = 10_000;
/// The grid spans `[δ·10^{-SIGN_GRID_DECADES}, δ)`.
const SIGN_GRID_DECADES: f64 = 12.0;
const SMALLEST_DELTA: f64 = 1e-12;
/// Relative margin on `A` over the value matching `sup f` at `d = δ`.
const A_MARGIN: f64 = 1.1;

fn sign_grid(delta: f64) -> impl Iterator<Item = f64> {
    (0..SIGN_GRID).map(move |k| {
        let t = k as f64 / SIGN_GRID as f64;
        delta * 10f64.powf(-SIGN_GRID_DECADES * (1.0 - t))
    })
}

fn grid_max_m(a: f64, p: f64, q: f64, delta: f64, n: usize) -> f64 {
    sign_grid(delta)
        .map(|d| m_closed(a, p, q, d, n))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalCalibration {
    pub spec: BarrierSpec,
    pub n: usize,
    pub lambda: f64,
    pub sup_f: f64,
    /// Upper end of the δ search: `min(p^{1/(1−p)}, 1/Λ, diam/2)`; `ψ' > 0`
    /// below the first and `d` is smooth below the second.
    pub delta_max: f64,
    /// `max m(ψ)` over the log grid with the returned `A`.
    pub grid_max_m: f64,
    pub grid_points: usize,
    /// `ψ(δ)`, at least `sup f`.
    pub psi_at_delta: f64,
    pub bisection_steps: usize,
}

/// Chooses `q = 1`, finds by bisection the largest `δ` for which
/// `m(ψ) ≤ 0` on the log grid with `A = sup f/(δ^p − δ^q)`, then returns
/// `A` enlarged by 10%.
pub fn calibrate_global(n: usize, lambda: f64, sup_f: f64, diam: f64) -> Result<GlobalCalibration> {
    if !(lambda >= 0.0 && sup_f > 0.0 && diam > 0.0) {
        return Err(Error::Invalid("calibration needs Λ ≥ 0, sup f > 0 and diam > 0".into()));
    }
    let p = 1.0 / (n as f64 + 1.0);
    let q = 1.0;
    let amp = |delta: f64| sup_f / (delta.powf(p) - delta.powf(q));
    let ok = |delta: f64| grid_max_m(amp(delta), p, q, delta, n) <= 0.0;
    let mut delta_max = p.powf(1.0 / (1.0 - p)).min(0.5 * diam);
    if lambda > 0.0 {
        delta_max = delta_max.min(1.0 / lambda);
    }
    // Keep ψ' > 0 strictly inside the collar.
    delta_max *= 1.0 - 1e-9;
    let mut steps = 0;
    let delta = if ok(delta_max) {
        delta_max
    } else {
        let mut hi = delta_max;
        let mut lo = 0.5 * delta_max;
        while !ok(lo) {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if lo < SMALLEST_DELTA {
                return Err(Error::Analysis(format!(
                    "no admissible δ above {SMALLEST_DELTA:e} for n={n}, Λ={lambda}"
                )));
            }
        }
        while (hi - lo) > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            steps += 1;
        }
        lo
    };
    let a = A_MARGIN * amp(delta);
    let spec = BarrierSpec::GlobalPsi { a, p, q, delta };
    Ok(GlobalCalibration {
        grid_max_m: grid_max_m(a, p, q, delta, n),
        grid_points: SIGN_GRID,
        psi_at_delta: a * (delta.powf(p) - delta.powf(q)),
        spec,
        n,
        lambda,
        sup_f,
        delta_max,
        bisection_steps: steps,
    })
}

/// `ψ(d)` on the collar of a planar domain.
pub struct GlobalPsi {
    spec: BarrierSpec,
    domain: Domain,
}

impl GlobalPsi {
    pub fn new(spec: &BarrierSpec, domain: &Domain) -> Result<Self> {
        psi_params(spec)?;
        domain.curve()?;
        Ok(Self {
            spec: spec.clone(),
            domain: domain.clone(),
        })
    }
}

impl Barrier for GlobalPsi {
    fn spec(&self) -> BarrierSpec {
        self.spec.clone()
    }

    fn jet(&self, x: Vec2) -> Result<Jet> {
        let (a, p, q, _) = psi_params(&self.spec)?;
        let dj = distance_jet(&self.domain, x)?;
        if !(dj.value > 0.0) {
            return Err(Error::Analysis(format!("point {x:?} is not inside the domain")));
        }
        let [f, f1, f2] = psi_derivatives(a, p, q, dj.value);
        let [gx, gy] = dj.grad;
        Ok(Jet {
            value: f,
            grad: [f1 * gx, f1 * gy],
            hess: [
                f2 * gx * gx + f1 * dj.hess[0],
                f2 * gx * gy + f1 * dj.hess[1],
                f2 * gy * gy + f1 * dj.hess[2],
            ],
        })
    }

    fn contains(&self, _x: Vec2, d: f64) -> bool {
        let (_, _, _, delta) = psi_params(&self.spec).expect("validated at construction");
        d > 0.0 && d < delta
    }

    fn samples(&self, sampling: Sampling) -> Result<Vec<Vec2>> {
        let (_, _, _, delta) = psi_params(&self.spec)?;
        let lo = (2.0 * FD_OFFSET).max(1e-4 * delta);
        let offsets = log_offsets(lo, delta * (1.0 - 1e-6), sampling.normal);
        let mut out = Vec::new();
        for (b, nu) in boundary_feet(&self.domain, sampling.boundary)? {
            for &t in &offsets {
                let x = add(b, scale(nu, t));
                let d = self.domain.sd(x)?;
                if d >= 2.0 * FD_OFFSET && self.contains(x, d) {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn h_factor_roots_and_value() {
        for n in 2..6 {
            let p = 1.0 / (n as f64 + 1.0);
            assert!(h_factor(p, n).abs() < 1e-15);
            assert!(h_factor(-(n as f64) * p, n).abs() < 1e-15);
        }
        assert!((h_factor(1.0, 2) - 10.0 / 9.0).abs() < 1e-15);
        assert!((h_factor_expanded(1.0, 2) - 10.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn h_factor_forms_agree_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let q = rng.random_range(-3.0..3.0);
            let n = rng.random_range(2..10);
            assert!((h_factor(q, n) - h_factor_expanded(q, n)).abs() <= 1e-12);
        }
    }

    #[test]
    fn m_psi_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let n = rng.random_range(2..6);
            let p = 1.0 / (n as f64 + 1.0);
            let q = rng.random_range(p + 0.01..2.0 - p - 0.01);
            let a = 10f64.powf(rng.random_range(-2.0..2.0));
            let delta = rng.random_range(0.01..0.5);
            let spec = BarrierSpec::GlobalPsi { a, p, q, delta };
            let d = delta * 10f64.powf(-rng.random_range(0.0..6.0)) * 0.999;
            let m1 = m_psi(&spec, d, n).unwrap();
            let m2 = m_psi_direct(&spec, d, n).unwrap();
            assert!((m1 - m2).abs() <= 1e-10 * m1.abs().max(1.0), "{m1} vs {m2} at {spec:?}, d={d}");
        }
    }

    #[test]
    fn m_psi_limits_and_domain() {
        let spec = BarrierSpec::GlobalPsi { a: 1e-9, p: 1.0 / 3.0, q: 1.0, delta: 0.2 };
        assert!((m_psi(&spec, 0.1, 2).unwrap() - 2.0).abs() < 1e-6);
        assert!(m_psi(&spec, 0.2, 2).is_err());
        assert!(m_psi(&spec, 0.0, 2).is_err());
        let cal = calibrate_global(2, 1.0, 1.0, 2.0).unwrap();
        assert!(m_psi(&cal.spec, 1e-9, 2).unwrap() < 0.0);
    }

    #[test]
    fn calibration_satisfies_both_conditions() {
        let cal = calibrate_global(2, 1.0, 1.0, 2.0).unwrap();
        let BarrierSpec::GlobalPsi { p, q, delta, .. } = cal.spec else { unreachable!() };
        assert!((p - 1.0 / 3.0).abs() < 1e-15 && q == 1.0);
        assert!(cal.grid_max_m <= 0.0);
        assert!(cal.psi_at_delta >= 1.0);
        assert!(delta > 0.0 && delta <= cal.delta_max);
    }
}
