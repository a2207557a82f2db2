//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero
//! exit status if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use hypgraph::analysis::{
    concavity_check, default_bumps, expansion_fit, gradient_invariant, growth_exponent, holder_bound, holder_seminorm,
    laplacian_sign, sup_norm, weak_identity_check, PairSampling, Region, Window,
};
use hypgraph::barriers::{
    calibrate_global, compare, h_factor, h_factor_expanded, m_psi, m_psi_direct, verify_supersolution,
    BarrierRegistry, BarrierSpec, Sampling, COMPARISON_TOL, SIGN_GRID,
};
use hypgraph::chaplygin::{fm1_residual, lipschitz_norm, normal_derivative, transform, WField};
use hypgraph::geometry::{Domain, Vec2};
use hypgraph::io::to_json;
use hypgraph::mesh::Mesh;
use hypgraph::operator::{apply_triplets, jacobian_pattern, jacobian_values, residual, Regularization};
use hypgraph::solver::{solve, solve_corner, solve_radial, RadialConfig, SolveReport, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const N: usize = 2;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

/// Collects sub-checks of one criterion.
#[derive(Default)]
struct Checks(Vec<(bool, String)>);

impl Checks {
    fn add(&mut self, pass: bool, detail: String) {
        self.0.push((pass, detail));
    }

    fn verdict(self) -> Verdict {
        let pass = !self.0.is_empty() && self.0.iter().all(|c| c.0);
        let detail = self
            .0
            .iter()
            .map(|(p, d)| if *p { d.clone() } else { format!("[fail] {d}") })
            .collect::<Vec<_>>()
            .join("; ");
        Verdict::new(pass, detail)
    }
}

struct Solved {
    label: &'static str,
    domain: Domain,
    report: SolveReport,
}

impl Solved {
    fn mesh(&self) -> &Mesh {
        &self.report.mesh
    }

    fn f(&self) -> &[f64] {
        self.report.values()
    }
}

fn run(label: &'static str, domain: Domain, h: f64) -> Solved {
    let config = SolverConfig::default().with_h(h);
    let t = Instant::now();
    let report = if domain.has_corners() {
        solve_corner(&domain, &config)
    } else {
        solve(&domain, &config)
    }
    .unwrap_or_else(|e| panic!("{label} at h = {h}: {e}"));
    eprintln!(
        "solved {label} h = {h}: {} nodes, converged = {}, {:.1} s",
        report.mesh.len(),
        report.converged,
        t.elapsed().as_secs_f64()
    );
    Solved { label, domain, report }
}

fn lens() -> Domain {
    Domain::intersection(vec![Domain::disk_kind([-0.5, 0.0], 1.0), Domain::disk_kind([0.5, 0.0], 1.0)]).unwrap()
}

fn hemisphere_error(s: &Solved, radius: f64) -> f64 {
    s.mesh()
        .nodes
        .iter()
        .zip(s.f())
        .map(|(x, v)| (v - (radius * radius - x[0] * x[0] - x[1] * x[1]).max(0.0).sqrt()).abs())
        .fold(0.0, f64::max)
}

fn snap(domain: &Domain, p: Vec2) -> Vec2 {
    let b = domain.boundary_probe(&p).unwrap();
    [b.point[0], b.point[1]]
}

struct Corpus {
    ball_coarse: Solved,
    ball: Solved,
    ball2: Solved,
    ellipse: Solved,
    stadium: Solved,
    lens_coarse: Solved,
    lens: Solved,
}

fn exact_solution(c: &Corpus) -> Verdict {
    let (e4, e2) = (hemisphere_error(&c.ball_coarse, 1.0), hemisphere_error(&c.ball, 1.0));
    let converged = c.ball_coarse.report.converged && c.ball.report.converged;
    Verdict::new(
        converged && e2 <= 5e-3 && e4 / e2 >= 2.5,
        format!("max error {e4:.3e} (h 0.04), {e2:.3e} (h 0.02), factor {:.2}", e4 / e2),
    )
}

fn radial() -> Verdict {
    let mut checks = Checks::default();
    for (n, r) in [(2, 1.0), (3, 1.0), (5, 2.0)] {
        let p = solve_radial(n, r, &RadialConfig::default()).unwrap();
        let err = p.max_error_vs_hemisphere();
        checks.add(p.converged && err <= 1e-6, format!("n={n} R={r}: {err:.2e}"));
    }
    checks.verdict()
}

fn gradient(c: &Corpus) -> Verdict {
    let mut checks = Checks::default();
    for s in [&c.ball, &c.stadium, &c.lens] {
        let r = gradient_invariant(s.mesh(), s.f(), N, s.domain.diameter()).unwrap();
        checks.add(r.ratio <= 1.02 && r.pass, format!("{} {:.5}", s.label, r.ratio));
    }
    checks.verdict()
}

fn holder(c: &Corpus) -> Verdict {
    let bound = holder_bound(N, c.ball.domain.diameter());
    let r = holder_seminorm(c.ball.mesh(), c.ball.f(), 1.0 / 3.0, &PairSampling::default(), Some(bound)).unwrap();
    Verdict::new(
        r.pairs >= 100_000 && r.seminorm <= 1.02 * bound,
        format!("[f]_1/3 = {:.4} over {} pairs, bound {bound:.4}", r.seminorm, r.pairs),
    )
}

fn exponents(c: &Corpus) -> Verdict {
    let mut checks = Checks::default();
    let probes = [
        (&c.stadium, [0.0, 1.0], 1.0 / 3.0, "stadium flat"),
        (&c.stadium, [2.0, 0.0], 0.5, "stadium cap"),
        (&c.ball, [1.0, 0.0], 0.5, "ball"),
    ];
    for (s, p, expected, name) in probes {
        let b = snap(&s.domain, p);
        let r = growth_exponent(s.mesh(), s.f(), &s.domain, b, Window::default()).unwrap();
        checks.add((r.beta - expected).abs() <= 0.05, format!("{name} β = {:.4} (want {expected:.4})", r.beta));
    }
    checks.verdict()
}

fn expansion(c: &Corpus) -> Verdict {
    let mut checks = Checks::default();
    let probes = [
        (&c.ball, [1.0, 0.0], 0.02, "ball R=1"),
        (&c.ball2, [2.0, 0.0], 0.02, "ball R=2"),
        (&c.stadium, [2.0, 0.0], 0.05, "stadium cap"),
    ];
    for (s, p, tol, name) in probes {
        let b = snap(&s.domain, p);
        let r = expansion_fit(s.mesh(), s.f(), &s.domain, b, Window::default()).unwrap();
        checks.add(
            r.relative_error <= tol,
            format!("{name} a1 = {:.4} vs {:.4} ({:.2}%)", r.a1, r.predicted_a1, 100.0 * r.relative_error),
        );
    }
    checks.verdict()
}

fn barriers(c: &Corpus) -> Verdict {
    let mut checks = Checks::default();
    let registry = BarrierRegistry::default();
    for s in [&c.ball, &c.ellipse, &c.stadium, &c.lens] {
        let d = &s.domain;
        let cal = match calibrate_global(N, d.curvature_bound(), sup_norm(s.f()), d.diameter()) {
            Ok(cal) => cal,
            Err(e) => {
                checks.add(false, format!("{}: calibration failed: {e}", s.label));
                continue;
            }
        };
        let grid_ok = cal.grid_points == SIGN_GRID && cal.grid_max_m <= 0.0;
        let barrier = registry.build(&cal.spec, d).unwrap();
        let sign = verify_supersolution(barrier.as_ref(), d, Sampling::default()).unwrap();
        let cmp = compare(s.mesh(), s.f(), barrier.as_ref()).unwrap();
        checks.add(
            grid_ok && sign.pass && cmp.passes(COMPARISON_TOL),
            format!(
                "{}: grid max m {:.2e}, sign {:.2e}, max f-ψ {:.2e}",
                s.label, cal.grid_max_m, sign.max_violation, cmp.max_violation
            ),
        );
    }
    checks.verdict()
}

fn concavity(c: &Corpus) -> Verdict {
    let mut checks = Checks::default();
    for s in [&c.ball, &c.ellipse, &c.lens] {
        let cv = concavity_check(s.mesh(), s.f(), &s.domain, 100_000, 1).unwrap();
        let lap = laplacian_sign(s.mesh(), s.f(), N, &Region::All).unwrap();
        checks.add(
            cv.pass && cv.max_violation <= 5e-3 * sup_norm(s.f()) && lap.max_laplacian <= 5e-3,
            format!("{}: midpoint {:.1e}, max Δf {:.3}", s.label, cv.max_violation, lap.max_laplacian),
        );
    }
    checks.verdict()
}

fn corner_seminorm(s: &Solved) -> f64 {
    let sampling = PairSampling {
        region: Region::Near {
            centers: s.domain.corners(),
            radius: 0.2,
        },
        max_distance: Some(0.2),
        ..PairSampling::default()
    };
    holder_seminorm(s.mesh(), s.f(), 0.5, &sampling, None).unwrap().seminorm
}

fn corners(c: &Corpus) -> Verdict {
    let (a, b) = (corner_seminorm(&c.lens_coarse), corner_seminorm(&c.lens));
    let growth = b / a - 1.0;
    Verdict::new(
        c.lens.report.converged && c.lens_coarse.report.converged && growth <= 0.10,
        format!("[f]_1/2 near corners {a:.4} (h 0.04), {b:.4} (h 0.02), growth {:.2}%", 100.0 * growth),
    )
}

fn hemisphere_w(mesh: &Mesh) -> WField {
    WField::direct(mesh.nodes.iter().map(|x| (0.25 * (1.0 - x[0] * x[0] - x[1] * x[1])).max(0.0)).collect()).unwrap()
}

fn chaplygin(c: &Corpus) -> Verdict {
    let mut checks = Checks::default();
    let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
    let res: Vec<f64> = [0.05, 0.025]
        .iter()
        .map(|&h| {
            let m = Mesh::build(&ball, h, 3.0).unwrap();
            fm1_residual(&m, &hemisphere_w(&m), N).unwrap().max_interior
        })
        .collect();
    checks.add(
        res[0] / res[1] >= 2.5,
        format!("FM1 {:.2e} -> {:.2e} (factor {:.2})", res[0], res[1], res[0] / res[1]),
    );
    let probes = [
        (&c.ball, [1.0, 0.0]),
        (&c.ball, [0.0, -1.0]),
        (&c.ellipse, [1.5, 0.0]),
        (&c.ellipse, [0.0, 1.0]),
        (&c.stadium, [2.0, 0.0]),
        (&c.lens, [0.5, 0.0]),
        (&c.lens, [-0.5, 0.0]),
    ];
    for (s, p) in probes {
        let wf = transform(s.f(), Some(s.report.eps_final));
        let b = snap(&s.domain, p);
        let r = normal_derivative(s.mesh(), &wf, &s.domain, b, Window::default()).unwrap();
        checks.add(r.pass, format!("{} ({:.2},{:.2}) {:.4}", s.label, b[0], b[1], r.product));
    }
    let lip: Vec<f64> = [&c.lens_coarse, &c.lens]
        .iter()
        .map(|s| {
            let wf = transform(s.f(), Some(s.report.eps_final));
            lipschitz_norm(s.mesh(), &wf, &s.domain).unwrap().value
        })
        .collect();
    let change = (lip[1] / lip[0] - 1.0).abs();
    checks.add(change <= 0.10, format!("lens Lipschitz {:.4} -> {:.4}", lip[0], lip[1]));
    checks.verdict()
}

fn smooth_random(m: &Mesh, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let waves: Vec<[f64; 4]> = (0..4)
        .map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
        .collect();
    m.nodes
        .iter()
        .map(|p| 2.0 + 0.25 * waves.iter().map(|w| w[0] * (w[1] * p[0] + w[2] * p[1] + w[3]).sin()).sum::<f64>())
        .collect()
}

fn bundle_digest(s: &Solved, seed: u64) -> String {
    let sampling = PairSampling {
        seed,
        random_pairs: 200_000,
        ..PairSampling::default()
    };
    let holder = holder_seminorm(s.mesh(), s.f(), 1.0 / 3.0, &sampling, None).unwrap();
    let concave = concavity_check(s.mesh(), s.f(), &s.domain, 20_000, seed).unwrap();
    let weak = weak_identity_check(s.mesh(), s.f(), &s.domain, N, &default_bumps(&s.domain).unwrap()).unwrap();
    let text = to_json(&(holder, concave, weak)).unwrap();
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

fn properties(c: &Corpus) -> Verdict {
    let mut checks = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let m = Mesh::build(&Domain::ball([0.0, 0.0], 1.0).unwrap(), 0.1, 1.0).unwrap();
    let reg = Regularization::continuation(N, 1e-3);
    let pattern = jacobian_pattern(&m);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let f = smooth_random(&m, &mut rng);
        let delta: Vec<f64> = (0..m.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let jd = apply_triplets(&pattern, &jacobian_values(&m, &f, reg).unwrap(), &delta, m.len());
        let t = 1e-6;
        let shifted: Vec<f64> = f.iter().zip(&delta).map(|(a, b)| a + t * b).collect();
        let (r1, r0) = (residual(&m, &shifted, reg).unwrap(), residual(&m, &f, reg).unwrap());
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..m.len() {
            let fd = (r1[k] - r0[k]) / t;
            num += (jd[k] - fd).powi(2);
            den += fd * fd;
        }
        worst = worst.max((num / den).sqrt());
    }
    checks.add(worst <= 1e-4, format!("Jacobian vs FD {worst:.1e}"));

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..8);
        let q = rng.random_range(-3.0..3.0);
        let (a, b) = (h_factor(q, n), h_factor_expanded(q, n));
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
    }
    checks.add(worst <= 1e-12, format!("h(q) forms {worst:.1e}"));

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..6);
        let p = 1.0 / (n as f64 + 1.0);
        let q = rng.random_range(p + 0.01..2.0 - p - 0.01);
        let a = 10f64.powf(rng.random_range(-2.0..2.0));
        let delta = rng.random_range(0.01..0.5);
        let spec = BarrierSpec::GlobalPsi { a, p, q, delta };
        let d = delta * 10f64.powf(-rng.random_range(0.0..6.0)) * 0.999;
        let (m1, m2) = (m_psi(&spec, d, n).unwrap(), m_psi_direct(&spec, d, n).unwrap());
        worst = worst.max((m1 - m2).abs() / m1.abs().max(1.0));
    }
    checks.add(worst <= 1e-10, format!("m(ψ) routes {worst:.1e}"));

    let f = c.ball.f();
    let back = transform(f, Some(c.ball.report.eps_final)).to_f();
    let trip = f.iter().zip(&back).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)).fold(0.0, f64::max);
    checks.add(trip <= 1e-12, format!("transform round trip {trip:.1e}"));

    let (h1, h2) = (bundle_digest(&c.ball_coarse, 5), bundle_digest(&c.ball_coarse, 5));
    checks.add(h1 == h2, format!("report hash {}", &h1[..12]));
    checks.verdict()
}

fn main() -> ExitCode {
    let start = Instant::now();
    let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
    let corpus = Corpus {
        ball_coarse: run("ball", ball.clone(), 0.04),
        ball: run("ball", ball, 0.02),
        ball2: run("ball R=2", Domain::ball([0.0, 0.0], 2.0).unwrap(), 0.04),
        ellipse: run("ellipse", Domain::ellipse(1.5, 1.0).unwrap(), 0.02),
        stadium: run("stadium", Domain::stadium(2.0, 1.0).unwrap(), 0.01),
        lens_coarse: run("lens", lens(), 0.04),
        lens: run("lens", lens(), 0.02),
    };
    let criteria: [(&str, &dyn Fn() -> Verdict); 11] = [
        ("exact solution on the unit ball", &|| exact_solution(&corpus)),
        ("radial cross-check", &radial),
        ("gradient invariant", &|| gradient(&corpus)),
        ("global Hölder bound", &|| holder(&corpus)),
        ("boundary growth exponents", &|| exponents(&corpus)),
        ("expansion coefficient a1", &|| expansion(&corpus)),
        ("global barrier and comparison", &|| barriers(&corpus)),
        ("concavity and Laplacian sign", &|| concavity(&corpus)),
        ("corner Hölder stability", &|| corners(&corpus)),
        ("transformed equation checks", &|| chaplygin(&corpus)),
        ("property suites", &|| properties(&corpus)),
    ];
    let mut failed = 0;
    for (k, (title, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!("{} criterion {:>2} {title}: {}", if v.pass { "PASS" } else { "FAIL" }, k + 1, v.detail);
    }
    println!(
        "acceptance: {} of 11 passed in {:.0} s",
        11 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
