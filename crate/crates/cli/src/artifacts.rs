//! Solve artifacts on disk: `solve.json` (config, mesh hash, summary) and
//! `solution.csv` (the field).

use std::fs;
use std::path::{Path, PathBuf};

use hypgraph::geometry::Domain;
use hypgraph::io::{read_field_csv, to_json};
use hypgraph::mesh::Mesh;
use hypgraph::solver::{SolveSummary, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Outcome};

pub const SOLVE_JSON: &str = "solve.json";
pub const SOLUTION_CSV: &str = "solution.csv";

#[derive(Serialize)]
pub struct SolveArtifact<'a> {
    pub mesh_hash: String,
    pub config: &'a SolverConfig,
    pub summary: SolveSummary,
}

#[derive(Deserialize)]
struct StoredSummary {
    n: usize,
    eps_final: f64,
    converged: bool,
}

#[derive(Deserialize)]
struct StoredSolve {
    mesh_hash: String,
    config: SolverConfig,
    summary: StoredSummary,
}

/// A solved field reloaded against a domain file.
pub struct Loaded {
    pub domain: Domain,
    pub mesh: Mesh,
    pub f: Vec<f64>,
    pub n: usize,
    pub eps_final: f64,
    pub converged: bool,
    pub mesh_hash: String,
}

pub fn read_domain(path: &Path) -> Outcome<Domain> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(Domain::from_json(&text)?)
}

pub fn write(path: PathBuf, text: &str) -> Outcome {
    fs::write(&path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Outcome {
    write(dir.join(name), &to_json(value)?)
}

/// Rebuilds the mesh from `domain_path` with the stored `h`, `γ` (or the
/// overrides) and checks it against the stored hash and CSV coordinates.
pub fn load(domain_path: &Path, dir: &Path, h: Option<f64>, gamma: Option<f64>) -> Outcome<Loaded> {
    let domain = read_domain(domain_path)?;
    let json_path = dir.join(SOLVE_JSON);
    let text = fs::read_to_string(&json_path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", json_path.display())))?;
    let stored: StoredSolve =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", json_path.display())))?;
    let mesh = Mesh::build(
        &domain,
        h.unwrap_or(stored.config.h),
        gamma.unwrap_or(stored.config.gamma),
    )?;
    let hash = mesh.hash();
    if hash != stored.mesh_hash {
        return Err(Failure::Mismatch(format!(
            "mesh hash {hash} of {} differs from {} recorded in {}",
            domain_path.display(),
            stored.mesh_hash,
            json_path.display()
        )));
    }
    let csv_path = dir.join(SOLUTION_CSV);
    let csv = fs::read_to_string(&csv_path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", csv_path.display())))?;
    let f = read_field_csv(&mesh, &csv).map_err(|e| Failure::Mismatch(format!("{}: {e}", csv_path.display())))?;
    Ok(Loaded {
        domain,
        mesh,
        f,
        n: stored.summary.n,
        eps_final: stored.summary.eps_final,
        converged: stored.summary.converged,
        mesh_hash: hash,
    })
}
