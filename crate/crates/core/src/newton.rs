//! Damped Newton iteration with backtracking on the residual 2-norm.

use serde::Serialize;

use crate::error::Result;
use crate::sparse::SparsePattern;

/// A square nonlinear system `R(x) = 0` with a fixed Jacobian pattern.
pub trait System {
    fn dim(&self) -> usize;
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// `(row, column)` pairs; [`System::jacobian`] returns values in this order.
    fn pattern(&self) -> Vec<(usize, usize)>;
    fn jacobian(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Line-search iterates failing this test are rejected.
    fn admissible(&self, x: &[f64]) -> bool;
    /// Optional per-row magnitudes. The convergence test divides each
    /// residual entry by `max(1, scale)`, so rows whose terms are large
    /// (and whose roundoff is correspondingly large) are measured relative
    /// to their own size.
    fn scale(&self, _x: &[f64]) -> Result<Option<Vec<f64>>> {
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonSettings {
    /// Convergence when the residual max-norm is at most this value.
    pub tol: f64,
    pub max_steps: usize,
    /// Step reduction factor during backtracking.
    pub backtrack: f64,
    /// Smallest damping factor tried before declaring stagnation.
    pub min_step: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_steps: 50,
            backtrack: 0.5,
            min_step: 2f64.powi(-20),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    /// Final (or best) iterate.
    pub x: Vec<f64>,
    pub steps: usize,
    pub residual_max: f64,
    /// Max-norm of the row-scaled residual used by the convergence test.
    pub residual_scaled: f64,
    pub converged: bool,
    pub hit_max_steps: bool,
    /// Line search could not reduce the residual.
    pub stagnated: bool,
    /// Scaled residual max-norm before each step and after the last one.
    pub history: Vec<f64>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn scaled_max<S: System + ?Sized>(system: &S, x: &[f64], r: &[f64]) -> Result<f64> {
    Ok(match system.scale(x)? {
        Some(s) => r.iter().zip(&s).fold(0.0, |m, (a, b)| m.max(a.abs() / b.max(1.0))),
        None => max_abs(r),
    })
}

pub fn newton<S: System + ?Sized>(
    system: &S,
    pattern: &mut SparsePattern,
    x0: Vec<f64>,
    settings: NewtonSettings,
) -> Result<NewtonResult> {
    let mut x = x0;
    let mut r = system.residual(&x)?;
    let mut rmax = scaled_max(system, &x, &r)?;
    let mut history = vec![rmax];
    let mut steps = 0;
    let mut stagnated = false;
    while rmax > settings.tol && steps < settings.max_steps {
        let values = system.jacobian(&x)?;
        let factor = pattern.factor(&values)?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = factor.solve(&rhs)?;
        let r_norm = norm2(&r);
        let mut lambda = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            if system.admissible(&trial) {
                if let Ok(rt) = system.residual(&trial) {
                    if norm2(&rt) < r_norm {
                        break Some((trial, rt));
                    }
                }
            }
            lambda *= settings.backtrack;
            if lambda < settings.min_step {
                break None;
            }
        };
        steps += 1;
        match accepted {
            Some((xn, rn)) => {
                x = xn;
                r = rn;
                rmax = scaled_max(system, &x, &r)?;
                history.push(rmax);
            }
            None => {
                stagnated = true;
                break;
            }
        }
    }
    let converged = rmax <= settings.tol;
    Ok(NewtonResult {
        x,
        steps,
        residual_max: max_abs(&r),
        residual_scaled: rmax,
        converged,
        hit_max_steps: !converged && !stagnated && steps >= settings.max_steps,
        stagnated,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `x_i^2 = i + 1`, started from one.
    struct Squares(usize);

    impl System for Squares {
        fn dim(&self) -> usize {
            self.0
        }
        fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(x.iter().enumerate().map(|(i, v)| v * v - (i + 1) as f64).collect())
        }
        fn pattern(&self) -> Vec<(usize, usize)> {
            (0..self.0).map(|i| (i, i)).collect()
        }
        fn jacobian(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(x.iter().map(|v| 2.0 * v).collect())
        }
        fn admissible(&self, x: &[f64]) -> bool {
            x.iter().all(|v| *v > 0.0)
        }
    }

    #[test]
    fn converges_quadratically() {
        let s = Squares(4);
        let mut p = SparsePattern::new(4, &s.pattern()).unwrap();
        let res = newton(&s, &mut p, vec![1.0; 4], NewtonSettings::default()).unwrap();
        assert!(res.converged && !res.hit_max_steps);
        for (i, v) in res.x.iter().enumerate() {
            assert!((v - ((i + 1) as f64).sqrt()).abs() < 1e-10);
        }
        assert!(res.steps < 10);
    }

    #[test]
    fn reports_max_steps() {
        let s = Squares(2);
        let mut p = SparsePattern::new(2, &s.pattern()).unwrap();
        let settings = NewtonSettings {
            max_steps: 1,
            ..NewtonSettings::default()
        };
        let res = newton(&s, &mut p, vec![10.0; 2], settings).unwrap();
        assert!(!res.converged && res.hit_max_steps);
    }
}
