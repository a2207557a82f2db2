//! ε-continuation Newton solves on graded meshes, the radial reduction for
//! balls in any dimension, and domain-smoothing continuation for corners.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainFile};
use crate::mesh::{Mesh, MeshSummary, RadialWeight};
use crate::newton::{newton, NewtonSettings, System};
use crate::operator::{self, Field, FieldKind, Regularization};
use crate::sparse::SparsePattern;

/// Geometric sequence `start, start·ratio, …` stopping at `end` (inclusive).
pub fn geometric_schedule(start: f64, end: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && end > 0.0 && end <= start && ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Invalid(format!(
            "bad geometric schedule start={start} end={end} ratio={ratio}"
        )));
    }
    let mut out = vec![start];
    let mut e = start;
    loop {
        e *= ratio;
        if e <= end * (1.0 + 1e-12) {
            break;
        }
        out.push(e);
    }
    if *out.last().expect("non-empty") > end {
        out.push(end);
    }
    Ok(out)
}

fn strictly_decreasing(s: &[f64], what: &str) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Invalid(format!("{what} is empty")));
    }
    if s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Invalid(format!("{what} must be positive")));
    }
    if s.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid(format!("{what} must be strictly decreasing")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Target mesh spacing.
    pub h: f64,
    /// Boundary grading exponent.
    pub gamma: f64,
    pub eps_schedule: Vec<f64>,
    /// Residual max-norm tolerance relative to the `n/ε` scale.
    pub tol: f64,
    pub max_steps: usize,
    pub backtrack: f64,
    pub min_step: f64,
    /// Fillet scales for corner domains.
    pub smoothing_schedule: Vec<f64>,
    /// Allowed increase of nodal values between consecutive ε stages.
    pub monotonicity_tol: f64,
    /// Coarsest spacing of the mesh sequence: the full ε schedule runs on
    /// the coarsest level `h·2^k ≤ presolve_h`, finer levels only at the
    /// final ε. Set it at or below `h` to solve on the target mesh directly.
    #[serde(default = "default_presolve_h")]
    pub presolve_h: f64,
}

fn default_presolve_h() -> f64 {
    0.04
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 0.02,
            gamma: 3.0,
            eps_schedule: geometric_schedule(1e-1, 1e-6, 0.25).expect("valid"),
            tol: 1e-9,
            max_steps: 50,
            backtrack: 0.5,
            min_step: 2f64.powi(-20),
            smoothing_schedule: vec![1e-1, 1e-2, 1e-3],
            monotonicity_tol: 1e-8,
            presolve_h: default_presolve_h(),
        }
    }
}

impl SolverConfig {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_eps_schedule(mut self, s: Vec<f64>) -> Self {
        self.eps_schedule = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        strictly_decreasing(&self.eps_schedule, "ε schedule")?;
        strictly_decreasing(&self.smoothing_schedule, "smoothing schedule")?;
        if !(self.tol > 0.0 && self.monotonicity_tol > 0.0 && self.min_step > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Invalid("backtracking factor must lie in (0, 1)".into()));
        }
        if !(self.h > 0.0 && self.h.is_finite() && self.gamma >= 1.0) {
            return Err(Error::Invalid("need h > 0 and grading γ ≥ 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Invalid("max_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn eps_final(&self) -> f64 {
        *self.eps_schedule.last().expect("validated schedule")
    }

    /// Spacings of the mesh sequence, coarsest first, ending at `h`.
    pub fn mesh_levels(&self) -> Vec<f64> {
        let mut levels = vec![self.h];
        while levels[0] * 2.0 <= self.presolve_h * (1.0 + 1e-9) {
            levels.insert(0, levels[0] * 2.0);
        }
        levels
    }

    fn newton_settings(&self, n: usize, eps: f64) -> NewtonSettings {
        NewtonSettings {
            tol: self.tol * n as f64 / eps,
            max_steps: self.max_steps,
            backtrack: self.backtrack,
            min_step: self.min_step,
        }
    }
}

/// One continuation stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    /// Fillet scale of the smoothed domain, if any.
    pub smoothing: Option<f64>,
    pub eps: f64,
    pub newton_steps: usize,
    /// Max-norm of the raw residual.
    pub residual_max: f64,
    /// Max-norm of the row-scaled residual; convergence means this is at
    /// most `tolerance`.
    pub residual_scaled: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub hit_max_steps: bool,
    /// Largest nodal increase relative to the previous stage on the same mesh.
    pub max_increase: Option<f64>,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub domain: DomainFile,
    pub n: usize,
    pub config: SolverConfig,
    pub mesh: Mesh,
    pub field: Field,
    pub eps_final: f64,
    pub trajectory: Vec<Stage>,
    pub wall_time_s: f64,
    pub converged: bool,
    pub hit_max_steps: bool,
    pub monotone: bool,
    pub max_monotonicity_increase: f64,
    /// Smallest `f/d` over interior nodes.
    pub min_f_over_d: f64,
}

/// Serializable digest of a [`SolveReport`] (field values go to CSV).
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub domain: DomainFile,
    pub n: usize,
    pub h: f64,
    pub gamma: f64,
    pub mesh: MeshSummary,
    pub eps_final: f64,
    pub trajectory: Vec<Stage>,
    pub converged: bool,
    pub hit_max_steps: bool,
    pub monotone: bool,
    pub max_monotonicity_increase: f64,
    pub min_f_over_d: f64,
    pub max_f: f64,
    pub final_residual_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SolveReport {
    pub fn values(&self) -> &[f64] {
        &self.field.values
    }

    pub fn f_ge_d(&self) -> bool {
        self.min_f_over_d >= 0.95
    }

    pub fn summary(&self, with_time: bool) -> SolveSummary {
        SolveSummary {
            domain: self.domain.clone(),
            n: self.n,
            h: self.config.h,
            gamma: self.config.gamma,
            mesh: self.mesh.summary(),
            eps_final: self.eps_final,
            trajectory: self.trajectory.clone(),
            converged: self.converged,
            hit_max_steps: self.hit_max_steps,
            monotone: self.monotone,
            max_monotonicity_increase: self.max_monotonicity_increase,
            min_f_over_d: self.min_f_over_d,
            max_f: self.field.values.iter().copied().fold(0.0, f64::max),
            final_residual_max: self.trajectory.last().map_or(f64::NAN, |s| s.residual_max),
            wall_time_s: with_time.then_some(self.wall_time_s),
        }
    }
}

/// The discrete problem on one mesh at one ε.
pub struct PdeSystem<'a> {
    pub mesh: &'a Mesh,
    pub reg: Regularization,
}

impl System for PdeSystem<'_> {
    fn dim(&self) -> usize {
        self.mesh.len()
    }
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        operator::residual(self.mesh, x, self.reg)
    }
    fn pattern(&self) -> Vec<(usize, usize)> {
        operator::jacobian_pattern(self.mesh)
    }
    fn jacobian(&self, x: &[f64]) -> Result<Vec<f64>> {
        operator::jacobian_values(self.mesh, x, self.reg)
    }
    fn admissible(&self, x: &[f64]) -> bool {
        x[..self.mesh.first_boundary()]
            .iter()
            .all(|v| *v > 0.5 * self.reg.eps)
    }
    /// Row terms in units of `n/ε`, so the tolerance `tol·n/ε` becomes
    /// relative to the row wherever its terms exceed `n/ε`.
    fn scale(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        let unit = self.reg.eps / self.reg.n;
        let terms = operator::residual_terms(self.mesh, x, self.reg)?;
        Ok(Some(terms.into_iter().map(|t| t * unit).collect()))
    }
}

/// `(4u + ε²)^{1/2}` with `u` the discrete torsion function (`Δu = −1`,
/// `u = 0` on `∂Ω`). This is the exact solution on balls, is smooth across
/// the ridge of `d`, equals `ε` on the boundary, and satisfies `f ≥ d` since
/// `u ≥ d²/4` by comparison with the inscribed ball at each point.
pub fn initial_guess(mesh: &Mesh, eps: f64) -> Result<Vec<f64>> {
    let nb = mesh.first_boundary();
    let mut pairs = Vec::new();
    let mut values = Vec::new();
    for k in 0..mesh.len() {
        if k >= nb {
            pairs.push((k, k));
            values.push(1.0);
        } else {
            mesh.with_stencil(k, |nodes, _, hess| {
                for (&j, c) in nodes.iter().zip(hess) {
                    pairs.push((k, j));
                    values.push(c[0] + c[2]);
                }
            })?;
        }
    }
    let rhs: Vec<f64> = (0..mesh.len()).map(|k| if k < nb { -1.0 } else { 0.0 }).collect();
    let u = SparsePattern::new(mesh.len(), &pairs)?.factor(&values)?.solve(&rhs)?;
    Ok(u
        .iter()
        .enumerate()
        .map(|(k, &v)| if k < nb { (4.0 * v.max(0.0) + eps * eps).sqrt() } else { eps })
        .collect())
}

pub struct Continuation {
    pub f: Vec<f64>,
    pub stages: Vec<Stage>,
    pub converged: bool,
    pub hit_max_steps: bool,
    pub max_increase: f64,
}

/// Warm start for a smaller boundary value: `f ↦ (f² − ε₀² + ε²)^{1/2}`,
/// which maps the hemisphere family `(ρ² + ε₀² − |x|²)^{1/2}` onto itself.
fn lower_boundary_value(f: &mut [f64], eps_old: f64, eps: f64) {
    for v in f {
        *v = (*v * *v - eps_old * eps_old + eps * eps).max(eps * eps).sqrt();
    }
}

pub fn continue_on_mesh(
    mesh: &Mesh,
    pattern: &mut SparsePattern,
    n: usize,
    mut f: Vec<f64>,
    schedule: &[f64],
    config: &SolverConfig,
    smoothing: Option<f64>,
) -> Result<Continuation> {
    let nb = mesh.first_boundary();
    let mut stages = Vec::new();
    let mut max_increase: f64 = f64::NEG_INFINITY;
    let mut previous: Option<Vec<f64>> = None;
    let mut last_eps: Option<f64> = None;
    for &eps in schedule {
        if let Some(e0) = last_eps {
            lower_boundary_value(&mut f[..nb], e0, eps);
        }
        for v in &mut f[nb..] {
            *v = eps;
        }
        for v in &mut f[..nb] {
            *v = v.max(eps);
        }
        last_eps = Some(eps);
        let system = PdeSystem {
            mesh,
            reg: Regularization::continuation(n, eps),
        };
        let settings = config.newton_settings(n, eps);
        let res = newton(&system, pattern, f, settings)?;
        f = res.x;
        let inc = previous.as_ref().map(|p| {
            f.iter()
                .zip(p)
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max)
        });
        if let Some(i) = inc {
            max_increase = max_increase.max(i);
        }
        stages.push(Stage {
            smoothing,
            eps,
            newton_steps: res.steps,
            residual_max: res.residual_max,
            residual_scaled: res.residual_scaled,
            tolerance: settings.tol,
            converged: res.converged,
            hit_max_steps: res.hit_max_steps,
            max_increase: inc,
            nodes: mesh.len(),
        });
        if !res.converged {
            return Ok(Continuation {
                f,
                stages,
                converged: false,
                hit_max_steps: res.hit_max_steps,
                max_increase,
            });
        }
        previous = Some(f.clone());
    }
    Ok(Continuation {
        f,
        stages,
        converged: true,
        hit_max_steps: false,
        max_increase,
    })
}

fn planar_n(domain: &Domain) -> Result<usize> {
    if !domain.is_planar() {
        return Err(Error::Invalid(
            "field solves are planar; use the radial solver for balls in higher dimensions".into(),
        ));
    }
    Ok(domain.n())
}

fn finish(
    domain: &Domain,
    config: &SolverConfig,
    mesh: Mesh,
    cont: Continuation,
    stages: Vec<Stage>,
    start: Instant,
) -> Result<SolveReport> {
    let nb = mesh.first_boundary();
    let min_f_over_d = (0..nb)
        .map(|k| cont.f[k] / mesh.dist[k])
        .fold(f64::INFINITY, f64::min);
    let eps_final = stages.last().map_or(config.eps_final(), |s| s.eps);
    let max_inc = if cont.max_increase.is_finite() {
        cont.max_increase
    } else {
        0.0
    };
    Ok(SolveReport {
        domain: domain.to_file(),
        n: domain.n(),
        config: config.clone(),
        field: Field::new(FieldKind::F, Some(eps_final), cont.f)?,
        mesh,
        eps_final,
        trajectory: stages,
        wall_time_s: start.elapsed().as_secs_f64(),
        converged: cont.converged,
        hit_max_steps: cont.hit_max_steps,
        monotone: max_inc <= config.monotonicity_tol,
        max_monotonicity_increase: max_inc,
        min_f_over_d,
    })
}

/// Interpolates `f` from another mesh and floors the result at `eps`.
/// Meshes of the same domain use logical coordinates; otherwise the
/// interpolation is linear in the ring index along rays.
pub fn transfer(to: &Mesh, from: &Mesh, f: &[f64], eps: f64) -> Vec<f64> {
    to.transfer_from(from, f)
        .unwrap_or_else(|| to.interpolate_from(from, f, RadialWeight::Index))
        .into_iter()
        .map(|v| v.max(eps))
        .collect()
}

/// Newton steps allowed for a warm start before falling back to the full
/// ε schedule.
const WARM_START_STEPS: usize = 10;

/// Outcome of a mesh sequence on one domain.
struct Sequenced {
    mesh: Mesh,
    cont: Continuation,
    max_increase: f64,
}

/// Full ε schedule from the torsion guess.
fn cold_start(
    mesh: &Mesh,
    pattern: &mut SparsePattern,
    n: usize,
    config: &SolverConfig,
    smoothing: Option<f64>,
) -> Result<Continuation> {
    let f0 = initial_guess(mesh, config.eps_schedule[0])?;
    continue_on_mesh(mesh, pattern, n, f0, &config.eps_schedule, config, smoothing)
}

/// Newton at the final ε from `warm`, falling back to a cold start.
fn warm_start(
    mesh: &Mesh,
    pattern: &mut SparsePattern,
    n: usize,
    warm: Vec<f64>,
    config: &SolverConfig,
    smoothing: Option<f64>,
    stages: &mut Vec<Stage>,
) -> Result<Continuation> {
    let capped = SolverConfig {
        max_steps: config.max_steps.min(WARM_START_STEPS),
        ..config.clone()
    };
    let c = continue_on_mesh(mesh, pattern, n, warm, &[config.eps_final()], &capped, smoothing)?;
    if c.converged {
        return Ok(c);
    }
    stages.extend(c.stages);
    cold_start(mesh, pattern, n, config, smoothing)
}

/// Solves `target` on the mesh sequence of `config`, optionally warm-started
/// from a field on another mesh. Stops at the first level that fails.
fn solve_sequence(
    target: &Domain,
    config: &SolverConfig,
    n: usize,
    mut warm: Option<(Mesh, Vec<f64>)>,
    smoothing: Option<f64>,
    stages: &mut Vec<Stage>,
) -> Result<Sequenced> {
    let levels = config.mesh_levels();
    let mut max_increase = f64::NEG_INFINITY;
    let last = levels.len() - 1;
    for (k, &h) in levels.iter().enumerate() {
        let mesh = match Mesh::build(target, h, config.gamma) {
            Ok(m) => m,
            Err(_) if k < last => continue,
            Err(e) => return Err(e),
        };
        let mut pattern = SparsePattern::new(mesh.len(), &operator::jacobian_pattern(&mesh))?;
        let mut cont = match warm.take() {
            None => cold_start(&mesh, &mut pattern, n, config, smoothing)?,
            Some((pm, pf)) => {
                let f = transfer(&mesh, &pm, &pf, config.eps_final());
                warm_start(&mesh, &mut pattern, n, f, config, smoothing, stages)?
            }
        };
        if cont.max_increase.is_finite() {
            max_increase = max_increase.max(cont.max_increase);
        }
        stages.append(&mut cont.stages);
        if !cont.converged || k == last {
            return Ok(Sequenced {
                mesh,
                cont,
                max_increase,
            });
        }
        warm = Some((mesh, cont.f));
    }
    unreachable!("the finest level always returns")
}

/// Solves on a mesh of `domain`: the full ε schedule on the coarsest level
/// of the mesh sequence, then Newton at the final ε on each refinement.
pub fn solve(domain: &Domain, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let start = Instant::now();
    let n = planar_n(domain)?;
    let mut stages = Vec::new();
    let mut seq = solve_sequence(domain, config, n, None, None, &mut stages)?;
    seq.cont.max_increase = seq.max_increase;
    finish(domain, config, seq.mesh, seq.cont, stages, start)
}

/// Solves a corner domain through a sequence of filleted approximations,
/// warm-starting each by interpolation, and finishes on the true domain
/// whose corner nodes are boundary nodes at `ε_final`.
pub fn solve_corner(domain: &Domain, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    if !domain.has_corners() {
        return solve(domain, config);
    }
    let start = Instant::now();
    let n = planar_n(domain)?;
    // Smoothed approximations only need the coarsest level.
    let coarse = SolverConfig {
        h: config.mesh_levels()[0],
        ..config.clone()
    };
    let mut stages = Vec::new();
    let mut warm: Option<(Mesh, Vec<f64>)> = None;
    let mut max_increase = f64::NEG_INFINITY;
    for &s in &config.smoothing_schedule {
        let smooth = domain.smooth_approximation(s)?;
        let mut seq = solve_sequence(&smooth, &coarse, n, warm.take(), Some(s), &mut stages)?;
        max_increase = max_increase.max(seq.max_increase);
        if !seq.cont.converged {
            seq.cont.max_increase = max_increase;
            return finish(domain, config, seq.mesh, seq.cont, stages, start);
        }
        warm = Some((seq.mesh, seq.cont.f));
    }
    let mut seq = solve_sequence(domain, config, n, warm, None, &mut stages)?;
    seq.cont.max_increase = max_increase.max(seq.max_increase);
    finish(domain, config, seq.mesh, seq.cont, stages, start)
}

/// Radial solution profile of a ball in `n` dimensions.
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub n: usize,
    pub radius: f64,
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub converged: bool,
    pub trajectory: Vec<Stage>,
}

impl RadialProfile {
    /// Linear interpolation in `r`.
    pub fn value_at(&self, r: f64) -> f64 {
        let k = self.r.partition_point(|&x| x <= r);
        if k == 0 {
            return self.f[0];
        }
        if k >= self.r.len() {
            return *self.f.last().expect("non-empty");
        }
        let t = (r - self.r[k - 1]) / (self.r[k] - self.r[k - 1]);
        self.f[k - 1] + t * (self.f[k] - self.f[k - 1])
    }

    /// Largest nodal deviation from `√(R² − r²)`.
    pub fn max_error_vs_hemisphere(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.f)
            .map(|(r, f)| (f - (self.radius * self.radius - r * r).max(0.0).sqrt()).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialConfig {
    pub h: f64,
    pub gamma: f64,
    pub eps_schedule: Vec<f64>,
    /// Max-norm tolerance on the spacing-scaled residual rows.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for RadialConfig {
    fn default() -> Self {
        Self {
            h: 1e-4,
            gamma: 2.0,
            eps_schedule: geometric_schedule(1e-1, 1e-9, 0.25).expect("valid"),
            tol: 1e-14,
            max_steps: 50,
        }
    }
}

/// `f''/(1 + f'²) + (n − 1) f'/r + n/max(f, ε) = 0` on a graded 1-D mesh,
/// with `n f''(0) + n/f(0)` at the centre and `f(R) = ε`. Each row is
/// multiplied by the square of its local spacing; near `R` the spacing is
/// about `h²`, and unscaled rows would sit far above any fixed tolerance
/// from roundoff alone. Row scaling leaves the Newton steps unchanged.
struct RadialSystem<'a> {
    r: &'a [f64],
    n: f64,
    eps: f64,
}

impl RadialSystem<'_> {
    fn local(&self, f: &[f64], i: usize) -> (f64, f64, f64, f64) {
        let r = self.r;
        let rs = 0.5 * (r[i + 1] - r[i - 1]);
        let rss = r[i + 1] - 2.0 * r[i] + r[i - 1];
        let fs = 0.5 * (f[i + 1] - f[i - 1]);
        let fss = f[i + 1] - 2.0 * f[i] + f[i - 1];
        let p = fs / rs;
        let q = (fss - p * rss) / (rs * rs);
        (p, q, rs, rss)
    }
}

impl System for RadialSystem<'_> {
    fn dim(&self) -> usize {
        self.r.len()
    }
    fn residual(&self, f: &[f64]) -> Result<Vec<f64>> {
        let m = self.r.len() - 1;
        let mut out = vec![0.0; m + 1];
        let r1 = self.r[1];
        out[0] = self.n * 2.0 * (f[1] - f[0]) + self.n * r1 * r1 / f[0].max(self.eps);
        for i in 1..m {
            let (p, q, rs, _) = self.local(f, i);
            out[i] = rs * rs * (q / (1.0 + p * p) + (self.n - 1.0) * p / self.r[i] + self.n / f[i].max(self.eps));
        }
        out[m] = f[m] - self.eps;
        Ok(out)
    }
    fn pattern(&self) -> Vec<(usize, usize)> {
        let m = self.r.len() - 1;
        let mut p = vec![(0, 0), (0, 1)];
        for i in 1..m {
            p.extend([(i, i - 1), (i, i), (i, i + 1)]);
        }
        p.push((m, m));
        p
    }
    fn jacobian(&self, f: &[f64]) -> Result<Vec<f64>> {
        let m = self.r.len() - 1;
        let r1 = self.r[1];
        let sing = |v: f64| if v > self.eps { -self.n / (v * v) } else { 0.0 };
        let c = 2.0 * self.n;
        let mut vals = vec![-c + r1 * r1 * sing(f[0]), c];
        for i in 1..m {
            let (p, q, rs, rss) = self.local(f, i);
            let w2 = 1.0 + p * p;
            let dq_dp = -2.0 * p * q / (w2 * w2) + (self.n - 1.0) / self.r[i];
            let dq_dq = 1.0 / w2;
            let dp = 0.5 / rs;
            let qm = (1.0 + 0.5 * rss / rs) / (rs * rs);
            let qp = (1.0 - 0.5 * rss / rs) / (rs * rs);
            let s2 = rs * rs;
            vals.push(s2 * (dq_dq * qm - dq_dp * dp));
            vals.push(s2 * (dq_dq * (-2.0 / s2) + sing(f[i])));
            vals.push(s2 * (dq_dq * qp + dq_dp * dp));
        }
        vals.push(1.0);
        Ok(vals)
    }
    fn admissible(&self, f: &[f64]) -> bool {
        f[..f.len() - 1].iter().all(|v| *v > 0.5 * self.eps)
    }
}

pub fn solve_radial(n: usize, radius: f64, config: &RadialConfig) -> Result<RadialProfile> {
    if n < 2 {
        return Err(Error::Invalid(format!("dimension must be at least 2, got {n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Invalid(format!("radius must be positive, got {radius}")));
    }
    strictly_decreasing(&config.eps_schedule, "ε schedule")?;
    let m = ((config.gamma * radius / config.h).ceil() as usize).max(8);
    let r: Vec<f64> = (0..=m)
        .map(|i| radius * (1.0 - (1.0 - i as f64 / m as f64).powf(config.gamma)))
        .collect();
    let eps0 = config.eps_schedule[0];
    let mut f: Vec<f64> = r
        .iter()
        .map(|x| (radius * radius - x * x).max(0.0).sqrt().max(eps0))
        .collect();
    let mut pattern = SparsePattern::new(m + 1, &RadialSystem { r: &r, n: n as f64, eps: eps0 }.pattern())?;
    let mut trajectory = Vec::new();
    let mut converged = true;
    let mut previous: Option<Vec<f64>> = None;
    let mut last_eps: Option<f64> = None;
    for &eps in &config.eps_schedule {
        if let Some(e0) = last_eps {
            lower_boundary_value(&mut f[..m], e0, eps);
        }
        last_eps = Some(eps);
        f[m] = eps;
        let system = RadialSystem { r: &r, n: n as f64, eps };
        let settings = NewtonSettings {
            tol: config.tol,
            max_steps: config.max_steps,
            ..NewtonSettings::default()
        };
        let res = newton(&system, &mut pattern, f, settings)?;
        f = res.x;
        trajectory.push(Stage {
            smoothing: None,
            eps,
            newton_steps: res.steps,
            residual_max: res.residual_max,
            residual_scaled: res.residual_scaled,
            tolerance: settings.tol,
            converged: res.converged,
            hit_max_steps: res.hit_max_steps,
            max_increase: previous
                .as_ref()
                .map(|p| f.iter().zip(p).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max)),
            nodes: m + 1,
        });
        if !res.converged {
            converged = false;
            break;
        }
        previous = Some(f.clone());
    }
    Ok(RadialProfile {
        n,
        radius,
        r,
        f,
        converged,
        trajectory,
    })
}
