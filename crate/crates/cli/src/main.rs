//! `hypgraph`: solves the singular minimal-graph Dirichlet problem on planar
//! domains and runs the barrier, regularity and transform checks on the
//! solved fields.
//!
//! Exit codes: 0 pass, 1 usage, 2 non-convergence, 3 artifact mismatch,
//! 4 check failure.

mod artifacts;
mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "hypgraph", version, about = "Minimal graphs in hyperbolic space: solver and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Domain description (JSON).
    #[arg(long)]
    pub domain: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Clone)]
pub struct MeshArgs {
    /// Target mesh spacing.
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    /// Boundary grading exponent γ.
    #[arg(long, allow_negative_numbers = true)]
    pub grading: Option<f64>,
}

#[derive(Args, Clone)]
pub struct SolutionArgs {
    /// Directory written by `solve`.
    #[arg(long)]
    pub solution: PathBuf,
    #[command(flatten)]
    pub mesh: MeshArgs,
}

#[derive(Args, Clone)]
pub struct PointArgs {
    /// Boundary point `x,y` (repeatable; snapped to the nearest boundary point).
    #[arg(long = "point", value_parser = commands::parse_point)]
    pub points: Vec<[f64; 2]>,
    /// Fit window `d_min,d_max` (either end may be `auto`).
    #[arg(long, value_parser = commands::parse_window)]
    pub window: Option<hypgraph::analysis::Window>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on a domain; writes solution.csv and solve.json.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mesh: MeshArgs,
        /// Decreasing ε values `a,b,c` or a geometric range `start:end:ratio`.
        #[arg(long, value_parser = commands::parse_schedule)]
        eps_schedule: Option<Vec<f64>>,
        /// Coarsest spacing of the mesh sequence.
        #[arg(long)]
        presolve_h: Option<f64>,
    },
    /// Sign check of a barrier and, with --solution, the comparison f ≤ w.
    VerifyBarrier {
        #[command(flatten)]
        common: Common,
        /// `hemisphere`, `global`, `local`, or a barrier JSON file.
        #[arg(long)]
        barrier: String,
        #[arg(long)]
        solution: Option<PathBuf>,
        #[command(flatten)]
        mesh: MeshArgs,
        /// sup f for calibration (defaults to the solution maximum).
        #[arg(long)]
        sup_f: Option<f64>,
        /// Boundary point of the local barrier.
        #[arg(long, value_parser = commands::parse_point)]
        point: Option<[f64; 2]>,
        /// Size r of the local box G_r.
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        /// Exponent α of the local barrier.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Multiplies the barrier amplitude A (for negative controls).
        #[arg(long, default_value_t = 1.0)]
        scale_a: f64,
    },
    /// Growth exponent β of f ≈ C d^β along inward normals.
    EstimateExponent {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solution: SolutionArgs,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Coefficients of f ≈ a₁√d + a₂d, compared with a₁ = √(2/H).
    ExtractExpansion {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solution: SolutionArgs,
        #[command(flatten)]
        points: PointArgs,
        /// Allowed relative error of a₁.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Gradient invariant, concavity, Laplacian sign and the weak identity.
    CheckInvariants {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solution: SolutionArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sampled Hölder semi-norm.
    Holder {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solution: SolutionArgs,
        /// Exponent α (default 1/(n+1), compared with the global bound).
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random pairs when the node count exceeds the all-pairs limit.
        #[arg(long, default_value_t = 1_000_000)]
        pairs: usize,
        /// Restrict to pairs within this distance of a corner and of each other.
        #[arg(long)]
        near_corners: Option<f64>,
    },
    /// w = f²/4: FM1 residual, boundary law ∂w/∂ν = 1/(2H), Lipschitz norm.
    TransformChaplygin {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solution: SolutionArgs,
        #[command(flatten)]
        points: PointArgs,
    },
    /// All reports for one solution in a single bundle.
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solution: SolutionArgs,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve {
            common,
            mesh,
            eps_schedule,
            presolve_h,
        } => commands::solve(&common, &mesh, eps_schedule, presolve_h),
        Command::VerifyBarrier {
            common,
            barrier,
            solution,
            mesh,
            sup_f,
            point,
            r,
            alpha,
            scale_a,
        } => commands::verify_barrier(
            &common,
            &commands::BarrierRequest {
                barrier,
                solution,
                mesh,
                sup_f,
                point,
                r,
                alpha,
                scale_a,
            },
        ),
        Command::EstimateExponent {
            common,
            solution,
            points,
        } => commands::estimate_exponent(&common, &solution, &points),
        Command::ExtractExpansion {
            common,
            solution,
            points,
            tol,
        } => commands::extract_expansion(&common, &solution, &points, tol),
        Command::CheckInvariants { common, solution, seed } => commands::check_invariants(&common, &solution, seed),
        Command::Holder {
            common,
            solution,
            alpha,
            seed,
            pairs,
            near_corners,
        } => commands::holder(&common, &solution, alpha, seed, pairs, near_corners),
        Command::TransformChaplygin {
            common,
            solution,
            points,
        } => commands::transform_chaplygin(&common, &solution, &points),
        Command::Report {
            common,
            solution,
            points,
            seed,
        } => commands::report(&common, &solution, &points, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            f.exit()
        }
    }
}
