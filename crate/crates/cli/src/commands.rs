use std::fs;
use std::path::{Path, PathBuf};

use hypgraph::analysis::{
    concavity_check, default_bumps, expansion_fit, gradient_invariant, growth_exponent, holder_bound, holder_seminorm,
    laplacian_sign, weak_identity_check, ConcavityReport, ExpansionFit, ExponentReport, HolderReport, InvariantReport,
    LaplacianReport, PairSampling, Region, WeakIdentityReport, Window,
};
use hypgraph::barriers::{
    calibrate_global, calibrate_local, compare, verify_supersolution, BarrierRegistry, BarrierSpec, ComparisonReport,
    Sampling, SignReport, COMPARISON_TOL,
};
use hypgraph::chaplygin::{
    chain_rule_check, fm1_residual, lipschitz_norm, normal_derivative, transform, ChainRuleReport, LipschitzReport,
    NormalDerivative,
};
use hypgraph::geometry::{DomainKind, Vec2};
use hypgraph::io::{write_field_csv, write_ray_csv};
use hypgraph::solver::{geometric_schedule, solve as run_solve, solve_corner, SolverConfig};
use serde::Serialize;

use crate::artifacts::{self, load, read_domain, write_json, Loaded, SolveArtifact, SOLUTION_CSV, SOLVE_JSON};
use crate::failure::{Failure, Outcome};
use crate::{Common, MeshArgs, PointArgs, SolutionArgs};

pub fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y] => Ok([x, y]),
        _ => Err(format!("expected `x,y`, got `{s}`")),
    }
}

pub fn parse_window(s: &str) -> Result<Window, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi] = parts[..] else {
        return Err(format!("expected `d_min,d_max`, got `{s}`"));
    };
    let end = |t: &str| -> Result<Option<f64>, String> {
        if t == "auto" {
            Ok(None)
        } else {
            t.parse::<f64>().map(Some).map_err(|e| format!("`{t}`: {e}"))
        }
    };
    Ok(Window {
        d_min: end(lo)?,
        d_max: end(hi)?,
        ..Window::default()
    })
}

pub fn parse_schedule(s: &str) -> Result<Vec<f64>, String> {
    if let [a, b, r] = s.split(':').collect::<Vec<_>>()[..] {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        return geometric_schedule(num(a)?, num(b)?, num(r)?).map_err(|e| e.to_string());
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

fn out_dir(common: &Common) -> Outcome<&Path> {
    fs::create_dir_all(&common.out)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", common.out.display())))?;
    Ok(&common.out)
}

fn load_solution(common: &Common, s: &SolutionArgs) -> Outcome<Loaded> {
    load(&common.domain, &s.solution, s.mesh.h, s.mesh.grading)
}

fn sup(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn solve(common: &Common, mesh: &MeshArgs, schedule: Option<Vec<f64>>, presolve_h: Option<f64>) -> Outcome {
    let domain = read_domain(&common.domain)?;
    let mut config = SolverConfig::default();
    if let Some(h) = mesh.h {
        config.h = h;
    }
    if let Some(g) = mesh.grading {
        config.gamma = g;
    }
    if let Some(s) = schedule {
        config.eps_schedule = s;
    }
    if let Some(p) = presolve_h {
        config.presolve_h = p;
    }
    config.validate()?;
    let dir = out_dir(common)?;
    let report = if domain.has_corners() {
        solve_corner(&domain, &config)?
    } else {
        run_solve(&domain, &config)?
    };
    let mut csv = Vec::new();
    write_field_csv(&report.mesh, report.values(), &mut csv)?;
    artifacts::write(dir.join(SOLUTION_CSV), &String::from_utf8(csv).expect("CSV is UTF-8"))?;
    let summary = report.summary(false);
    eprintln!(
        "{}: {} nodes, ε = {:e}, converged = {}, max f = {:.6}, {:.1} s",
        domain.kind().label(),
        report.mesh.len(),
        report.eps_final,
        report.converged,
        summary.max_f,
        report.wall_time_s
    );
    write_json(
        dir,
        SOLVE_JSON,
        &SolveArtifact {
            mesh_hash: report.mesh.hash(),
            config: &config,
            summary,
        },
    )?;
    if report.converged {
        Ok(())
    } else {
        Err(Failure::NonConvergence(format!(
            "continuation stopped (hit_max_steps = {}); best iterate written",
            report.hit_max_steps
        )))
    }
}

pub struct BarrierRequest {
    pub barrier: String,
    pub solution: Option<PathBuf>,
    pub mesh: MeshArgs,
    pub sup_f: Option<f64>,
    pub point: Option<Vec2>,
    pub r: f64,
    pub alpha: f64,
    pub scale_a: f64,
}

#[derive(Serialize)]
struct BarrierOutput {
    spec: BarrierSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<serde_json::Value>,
    sign: SignReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<ComparisonReport>,
    comparison_tolerance: f64,
    pass: bool,
}

pub fn verify_barrier(common: &Common, req: &BarrierRequest) -> Outcome {
    let loaded = match &req.solution {
        Some(dir) => Some(load(&common.domain, dir, req.mesh.h, req.mesh.grading)?),
        None => None,
    };
    let domain = match &loaded {
        Some(l) => l.domain.clone(),
        None => read_domain(&common.domain)?,
    };
    let sup_f = || -> Outcome<f64> {
        req.sup_f
            .or_else(|| loaded.as_ref().map(|l| sup(&l.f)))
            .ok_or_else(|| Failure::Usage("calibration needs --sup-f or --solution".into()))
    };
    let mut local_pass = true;
    let (mut spec, calibration) = match req.barrier.as_str() {
        "hemisphere" => match domain.kind() {
            DomainKind::Ball { center, radius } if center.len() <= 2 => {
                let c = if center.is_empty() { [0.0, 0.0] } else { [center[0], center[1]] };
                (BarrierSpec::Hemisphere { x0: c, radius: *radius }, None)
            }
            _ => return Err(Failure::Usage("the hemisphere barrier needs a planar ball domain".into())),
        },
        "global" => {
            let cal = calibrate_global(domain.n(), domain.curvature_bound(), sup_f()?, domain.diameter())?;
            (cal.spec.clone(), Some(json_value(&cal)?))
        }
        "local" => {
            let p = req
                .point
                .ok_or_else(|| Failure::Usage("the local barrier needs --point".into()))?;
            let cal = calibrate_local(&domain, p, sup_f()?, req.r, req.alpha, Sampling::default())?;
            local_pass = cal.pass;
            (cal.spec.clone(), Some(json_value(&cal)?))
        }
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read barrier file {path}: {e}")))?;
            let spec: BarrierSpec =
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("barrier file {path}: {e}")))?;
            (spec, None)
        }
    };
    if req.scale_a != 1.0 {
        match &mut spec {
            BarrierSpec::GlobalPsi { a, .. } | BarrierSpec::LocalHalfspace { a, .. } => *a *= req.scale_a,
            BarrierSpec::Hemisphere { .. } => {
                return Err(Failure::Usage("--scale-a does not apply to the hemisphere".into()))
            }
        }
    }
    let barrier = BarrierRegistry::default().build(&spec, &domain)?;
    let sign = verify_supersolution(barrier.as_ref(), &domain, Sampling::default())?;
    let comparison = match &loaded {
        Some(l) => Some(compare(&l.mesh, &l.f, barrier.as_ref())?),
        None => None,
    };
    let compared = comparison.as_ref().is_none_or(|c| c.passes(COMPARISON_TOL));
    let pass = sign.pass && compared && local_pass;
    eprintln!(
        "{}: sign violation {:e} (tol {:e}){}",
        spec.kind(),
        sign.max_violation,
        sign.tolerance,
        comparison
            .as_ref()
            .map_or(String::new(), |c| format!(", max f − w = {:e}", c.max_violation))
    );
    write_json(
        out_dir(common)?,
        "barrier.json",
        &BarrierOutput {
            spec,
            calibration,
            sign,
            comparison,
            comparison_tolerance: COMPARISON_TOL,
            pass,
        },
    )?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Check("barrier is not a verified upper bound".into()))
    }
}

fn json_value<T: Serialize>(v: &T) -> Outcome<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Failure::Usage(e.to_string()))
}

fn require_points(points: &PointArgs) -> Outcome<&[Vec2]> {
    if points.points.is_empty() {
        return Err(Failure::Usage("give at least one --point".into()));
    }
    Ok(&points.points)
}

fn write_rays(dir: &Path, stem: &str, samples: &[&[hypgraph::analysis::RaySample]]) -> Outcome {
    for (k, s) in samples.iter().enumerate() {
        let mut buf = Vec::new();
        write_ray_csv(s, &mut buf)?;
        artifacts::write(dir.join(format!("{stem}_{k}.csv")), &String::from_utf8(buf).expect("CSV is UTF-8"))?;
    }
    Ok(())
}

pub fn estimate_exponent(common: &Common, s: &SolutionArgs, points: &PointArgs) -> Outcome {
    let l = load_solution(common, s)?;
    let window = points.window.unwrap_or_default();
    let reports: Vec<ExponentReport> = require_points(points)?
        .iter()
        .map(|p| growth_exponent(&l.mesh, &l.f, &l.domain, *p, window))
        .collect::<Result<_, _>>()?;
    for r in &reports {
        eprintln!("β at {:?} = {:.4} (R² = {:.5})", r.point, r.beta, r.r_squared);
    }
    let dir = out_dir(common)?;
    write_rays(dir, "ray", &reports.iter().map(|r| &r.samples[..]).collect::<Vec<_>>())?;
    write_json(dir, "exponents.json", &reports)
}

pub fn extract_expansion(common: &Common, s: &SolutionArgs, points: &PointArgs, tol: f64) -> Outcome {
    let l = load_solution(common, s)?;
    let window = points.window.unwrap_or_default();
    let fits: Vec<ExpansionFit> = require_points(points)?
        .iter()
        .map(|p| expansion_fit(&l.mesh, &l.f, &l.domain, *p, window))
        .collect::<Result<_, _>>()?;
    for f in &fits {
        eprintln!(
            "a₁ at {:?} = {:.5} (√(2/H) = {:.5}, error {:.2}%)",
            f.point,
            f.a1,
            f.predicted_a1,
            100.0 * f.relative_error
        );
    }
    let dir = out_dir(common)?;
    write_rays(dir, "expansion_ray", &fits.iter().map(|r| &r.samples[..]).collect::<Vec<_>>())?;
    write_json(dir, "expansions.json", &fits)?;
    match fits.iter().find(|f| f.relative_error > tol) {
        Some(f) => Err(Failure::Check(format!(
            "a₁ at {:?} off by {:.2}% (tolerance {:.2}%)",
            f.point,
            100.0 * f.relative_error,
            100.0 * tol
        ))),
        None => Ok(()),
    }
}

/// Relative residual allowed in the weak identity.
const WEAK_TOL: f64 = 1e-2;
/// Random pairs for the concavity check.
const CONCAVITY_PAIRS: usize = 100_000;

#[derive(Serialize)]
struct Invariants {
    gradient: InvariantReport,
    /// Absent for non-convex domains.
    concavity: Option<ConcavityReport>,
    laplacian: LaplacianReport,
    weak_identity: Vec<WeakIdentityReport>,
    weak_tolerance: f64,
    pass: bool,
}

fn invariants(l: &Loaded, seed: u64) -> Outcome<Invariants> {
    let gradient = gradient_invariant(&l.mesh, &l.f, l.n, l.domain.diameter())?;
    let concavity = if l.domain.is_convex() {
        Some(concavity_check(&l.mesh, &l.f, &l.domain, CONCAVITY_PAIRS, seed)?)
    } else {
        None
    };
    let laplacian = laplacian_sign(&l.mesh, &l.f, l.n, &Region::All)?;
    let weak_identity = weak_identity_check(&l.mesh, &l.f, &l.domain, l.n, &default_bumps(&l.domain)?)?;
    let pass = gradient.pass
        && concavity.as_ref().is_none_or(|c| c.pass)
        && laplacian.pass
        && weak_identity.iter().all(|w| w.residual <= WEAK_TOL);
    Ok(Invariants {
        gradient,
        concavity,
        laplacian,
        weak_identity,
        weak_tolerance: WEAK_TOL,
        pass,
    })
}

pub fn check_invariants(common: &Common, s: &SolutionArgs, seed: u64) -> Outcome {
    let l = load_solution(common, s)?;
    let inv = invariants(&l, seed)?;
    eprintln!(
        "invariant ratio {:.5}, concavity {}, max Δf {:e}",
        inv.gradient.ratio,
        inv.concavity.as_ref().map_or("n/a".into(), |c| format!("{:e}", c.max_violation)),
        inv.laplacian.max_laplacian
    );
    write_json(out_dir(common)?, "invariants.json", &inv)?;
    if inv.pass {
        Ok(())
    } else {
        Err(Failure::Check("invariant suite failed".into()))
    }
}

fn holder_report(
    l: &Loaded,
    alpha: Option<f64>,
    seed: u64,
    pairs: usize,
    near_corners: Option<f64>,
) -> Outcome<HolderReport> {
    let natural = 1.0 / (l.n as f64 + 1.0);
    let alpha = alpha.unwrap_or(natural);
    let mut sampling = PairSampling {
        seed,
        random_pairs: pairs,
        ..PairSampling::default()
    };
    if let Some(r) = near_corners {
        let corners = l.domain.corners();
        if corners.is_empty() {
            return Err(Failure::Usage("--near-corners needs a domain with corners".into()));
        }
        sampling.region = Region::Near { centers: corners, radius: r };
        sampling.max_distance = Some(r);
    }
    let bound = (near_corners.is_none() && (alpha - natural).abs() < 1e-12).then(|| holder_bound(l.n, l.domain.diameter()));
    Ok(holder_seminorm(&l.mesh, &l.f, alpha, &sampling, bound)?)
}

pub fn holder(
    common: &Common,
    s: &SolutionArgs,
    alpha: Option<f64>,
    seed: u64,
    pairs: usize,
    near_corners: Option<f64>,
) -> Outcome {
    let l = load_solution(common, s)?;
    let r = holder_report(&l, alpha, seed, pairs, near_corners)?;
    eprintln!(
        "[f]_α (α = {:.4}) ≥ {:.5} over {} pairs{}",
        r.alpha,
        r.seminorm,
        r.pairs,
        r.bound.map_or(String::new(), |b| format!(", bound {b:.5}"))
    );
    write_json(out_dir(common)?, "holder.json", &r)?;
    if r.pass == Some(false) {
        Err(Failure::Check("sampled semi-norm exceeds the bound".into()))
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct Fm1Summary {
    max_interior: f64,
    at: Option<Vec2>,
    skipped: Vec<usize>,
}

#[derive(Serialize)]
struct Chaplygin {
    fm1: Fm1Summary,
    chain_rule: ChainRuleReport,
    normal_derivatives: Vec<NormalDerivative>,
    lipschitz: LipschitzReport,
    pass: bool,
}

fn chaplygin(l: &Loaded, points: &[Vec2], window: Window, dir: Option<&Path>) -> Outcome<Chaplygin> {
    let wf = transform(&l.f, Some(l.eps_final));
    let fm1 = fm1_residual(&l.mesh, &wf, l.n)?;
    if let Some(dir) = dir {
        for (name, values) in [("w.csv", &wf.values), ("fm1.csv", &fm1.values)] {
            let mut buf = Vec::new();
            write_field_csv(&l.mesh, values, &mut buf)?;
            artifacts::write(dir.join(name), &String::from_utf8(buf).expect("CSV is UTF-8"))?;
        }
    }
    let chain_rule = chain_rule_check(&l.mesh, &l.f, l.n, l.eps_final)?;
    let normal_derivatives: Vec<NormalDerivative> = points
        .iter()
        .map(|p| normal_derivative(&l.mesh, &wf, &l.domain, *p, window))
        .collect::<Result<_, _>>()?;
    let lipschitz = lipschitz_norm(&l.mesh, &wf, &l.domain)?;
    let pass = chain_rule.pass && normal_derivatives.iter().all(|n| n.pass);
    Ok(Chaplygin {
        fm1: Fm1Summary {
            max_interior: fm1.max_interior,
            at: fm1.at,
            skipped: fm1.skipped,
        },
        chain_rule,
        normal_derivatives,
        lipschitz,
        pass,
    })
}

pub fn transform_chaplygin(common: &Common, s: &SolutionArgs, points: &PointArgs) -> Outcome {
    let l = load_solution(common, s)?;
    let dir = out_dir(common)?;
    let c = chaplygin(&l, &points.points, points.window.unwrap_or_default(), Some(dir))?;
    eprintln!(
        "FM1 max {:e}, chain-rule ratio {:e}, Lipschitz {:.5}{}",
        c.fm1.max_interior,
        c.chain_rule.max_fm1_ratio,
        c.lipschitz.value,
        if c.lipschitz.flat_boundary { " (flat boundary: outside the Lipschitz statement)" } else { "" }
    );
    write_json(dir, "chaplygin.json", &c)?;
    if c.pass {
        Ok(())
    } else {
        Err(Failure::Check("transform checks failed".into()))
    }
}

/// One line of the summary table.
#[derive(Serialize)]
struct Row {
    check: String,
    value: f64,
    expected: String,
    /// Absent for report-only rows.
    pass: Option<bool>,
}

#[derive(Serialize)]
struct Bundle {
    domain: hypgraph::geometry::DomainFile,
    mesh_hash: String,
    nodes: usize,
    converged: bool,
    seed: u64,
    holder: HolderReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    exponents: Vec<ExponentReport>,
    invariants: Invariants,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    expansions: Vec<ExpansionFit>,
    chaplygin: Chaplygin,
    /// Points where a fit was not applicable, with the reason.
    skipped: Vec<(Vec2, String)>,
    summary: Vec<Row>,
}

/// Tolerance on fitted exponents.
const BETA_TOL: f64 = 0.05;

pub fn report(common: &Common, s: &SolutionArgs, points: &PointArgs, seed: u64) -> Outcome {
    let l = load_solution(common, s)?;
    let window = points.window.unwrap_or_default();
    let holder = holder_report(&l, None, seed, PairSampling::default().random_pairs, None)?;
    let invariants = invariants(&l, seed)?;
    let mut exponents = Vec::new();
    let mut expansions = Vec::new();
    let mut smooth = Vec::new();
    let mut skipped = Vec::new();
    let mut expected_beta = Vec::new();
    for p in &points.points {
        let probe = l.domain.boundary_probe(p)?;
        let Some(h) = probe.mean_curvature else {
            skipped.push((*p, "corner".to_string()));
            continue;
        };
        exponents.push(growth_exponent(&l.mesh, &l.f, &l.domain, *p, window)?);
        if h > 0.0 {
            expected_beta.push(0.5);
            expansions.push(expansion_fit(&l.mesh, &l.f, &l.domain, *p, window)?);
            smooth.push(*p);
        } else {
            expected_beta.push(1.0 / (l.n as f64 + 1.0));
            skipped.push((*p, "expansion needs H > 0".to_string()));
        }
    }
    let chaplygin = chaplygin(&l, &smooth, window, None)?;

    let mut summary = vec![Row {
        check: "gradient invariant ratio".into(),
        value: invariants.gradient.ratio,
        expected: "<= 1.02".into(),
        pass: Some(invariants.gradient.pass),
    }];
    if let Some(b) = holder.bound {
        summary.push(Row {
            check: format!("Hölder semi-norm, α = {:.4}", holder.alpha),
            value: holder.seminorm,
            expected: format!("<= {:.5}", 1.02 * b),
            pass: holder.pass,
        });
    }
    for (e, want) in exponents.iter().zip(&expected_beta) {
        summary.push(Row {
            check: format!("exponent β at ({:.4}, {:.4})", e.point[0], e.point[1]),
            value: e.beta,
            expected: format!("{want:.4} ± {BETA_TOL}"),
            pass: Some((e.beta - want).abs() <= BETA_TOL),
        });
    }
    for f in &expansions {
        summary.push(Row {
            check: format!("a₁ at ({:.4}, {:.4})", f.point[0], f.point[1]),
            value: f.a1,
            expected: format!("{:.5} ± 5%", f.predicted_a1),
            pass: Some(f.relative_error <= 0.05),
        });
    }
    if let Some(c) = &invariants.concavity {
        summary.push(Row {
            check: "midpoint concavity violation".into(),
            value: c.max_violation,
            expected: format!("<= {:e}", c.tolerance),
            pass: Some(c.pass),
        });
    }
    summary.push(Row {
        check: "max Δf".into(),
        value: invariants.laplacian.max_laplacian,
        expected: format!("<= {:e}", invariants.laplacian.tolerance),
        pass: Some(invariants.laplacian.pass),
    });
    for nd in &chaplygin.normal_derivatives {
        summary.push(Row {
            check: format!("∂w/∂ν·2H at ({:.4}, {:.4})", nd.point[0], nd.point[1]),
            value: nd.product,
            expected: "[0.95, 1.05]".into(),
            pass: Some(nd.pass),
        });
    }
    summary.push(Row {
        check: "Lipschitz norm of w".into(),
        value: chaplygin.lipschitz.value,
        expected: if chaplygin.lipschitz.flat_boundary {
            "unbounded near flat boundary".into()
        } else {
            "stable under refinement".into()
        },
        pass: None,
    });
    summary.push(Row {
        check: "FM1 chain-rule ratio".into(),
        value: chaplygin.chain_rule.max_fm1_ratio,
        expected: format!("<= {}", chaplygin.chain_rule.factor),
        pass: Some(chaplygin.chain_rule.pass),
    });

    for r in &summary {
        let mark = match r.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "info",
        };
        eprintln!("{mark}  {}: {:.6} (expected {})", r.check, r.value, r.expected);
    }
    let failed = summary.iter().filter(|r| r.pass == Some(false)).count();
    let dir = out_dir(common)?;
    write_rays(dir, "ray", &exponents.iter().map(|r| &r.samples[..]).collect::<Vec<_>>())?;
    write_json(
        dir,
        "report.json",
        &Bundle {
            domain: l.domain.to_file(),
            mesh_hash: l.mesh_hash.clone(),
            nodes: l.mesh.len(),
            converged: l.converged,
            seed,
            holder,
            exponents,
            invariants,
            expansions,
            chaplygin,
            skipped,
            summary,
        },
    )?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{failed} summary rows failed")))
    }
}
