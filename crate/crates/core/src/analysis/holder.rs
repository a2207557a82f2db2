use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Region;
use crate::error::{Error, Result};
use crate::geometry::{dist, Vec2};
use crate::mesh::Mesh;

/// `[(n+1) diamⁿ]^{1/(n+1)}`, the bound on `[f]_{C^{1/(n+1)}}`.
pub fn holder_bound(n: usize, diam: f64) -> f64 {
    ((n as f64 + 1.0) * diam.powi(n as i32)).powf(1.0 / (n as f64 + 1.0))
}

/// Relative slack of the pass test against the bound.
const BOUND_SLACK: f64 = 1.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSampling {
    /// All node pairs are used when the selected node count is at most this.
    pub all_pairs_up_to: usize,
    /// Random pairs otherwise, in addition to every node paired with the
    /// boundary node of its ray and with the centre.
    pub random_pairs: usize,
    pub seed: u64,
    /// Pairs farther apart are skipped.
    pub max_distance: Option<f64>,
    pub region: Region,
}

impl Default for PairSampling {
    fn default() -> Self {
        Self {
            all_pairs_up_to: 10_000,
            random_pairs: 1_000_000,
            seed: 0,
            max_distance: None,
            region: Region::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub alpha: f64,
    pub seminorm: f64,
    /// Largest quotient is attained at this pair.
    pub argmax: Option<[Vec2; 2]>,
    pub bound: Option<f64>,
    /// `seminorm ≤ 1.02·bound` when a bound is given.
    pub pass: Option<bool>,
    pub pairs: usize,
    pub all_pairs: bool,
    pub seed: u64,
}

fn best(a: (f64, usize, usize), b: (f64, usize, usize)) -> (f64, usize, usize) {
    if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
        b
    } else {
        a
    }
}

/// Sampled `sup |f(x) − f(y)|/|x − y|^α` over node pairs.
pub fn holder_seminorm(
    mesh: &Mesh,
    f: &[f64],
    alpha: f64,
    sampling: &PairSampling,
    bound: Option<f64>,
) -> Result<HolderReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Invalid(format!("Hölder exponent {alpha} outside (0, 1]")));
    }
    if f.len() != mesh.len() {
        return Err(Error::Invalid("field and mesh sizes differ".into()));
    }
    let selected: Vec<usize> = (0..mesh.len())
        .filter(|&k| sampling.region.contains(mesh.nodes[k], mesh.dist[k]))
        .collect();
    let quotient = |a: usize, b: usize| -> Option<f64> {
        let r = dist(mesh.nodes[a], mesh.nodes[b]);
        if r == 0.0 || sampling.max_distance.is_some_and(|m| r > m) {
            return None;
        }
        Some((f[a] - f[b]).abs() / r.powf(alpha))
    };
    let none = (f64::NEG_INFINITY, 0, 0);
    let all_pairs = selected.len() <= sampling.all_pairs_up_to;
    let (top, pairs) = if all_pairs {
        selected
            .par_iter()
            .enumerate()
            .map(|(ia, &a)| {
                selected[ia + 1..].iter().fold((none, 0usize), |(m, c), &b| match quotient(a, b) {
                    Some(q) => (best(m, (q, a, b)), c + 1),
                    None => (m, c),
                })
            })
            .reduce(|| (none, 0), |x, y| (best(x.0, y.0), x.1 + y.1))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
        let mut list: Vec<(usize, usize)> = (0..sampling.random_pairs)
            .map(|_| {
                let a = selected[rng.random_range(0..selected.len())];
                let b = selected[rng.random_range(0..selected.len())];
                (a.min(b), a.max(b))
            })
            .collect();
        let chosen: std::collections::HashSet<usize> = selected.iter().copied().collect();
        for &k in &selected {
            let (_, j) = mesh.ring_ray(k);
            for other in [mesh.node(mesh.rings, j), 0] {
                if other != k && chosen.contains(&other) {
                    list.push((k.min(other), k.max(other)));
                }
            }
        }
        list.par_iter()
            .map(|&(a, b)| match quotient(a, b) {
                Some(q) => ((q, a, b), 1usize),
                None => (none, 0),
            })
            .reduce(|| (none, 0), |x, y| (best(x.0, y.0), x.1 + y.1))
    };
    let seminorm = if pairs == 0 { 0.0 } else { top.0.max(0.0) };
    Ok(HolderReport {
        alpha,
        seminorm,
        argmax: (pairs > 0).then(|| [mesh.nodes[top.1], mesh.nodes[top.2]]),
        bound,
        pass: bound.map(|b| seminorm <= b * BOUND_SLACK),
        pairs,
        all_pairs,
        seed: sampling.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    fn hemisphere(mesh: &Mesh) -> Vec<f64> {
        mesh.nodes
            .iter()
            .map(|x| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0).sqrt())
            .collect()
    }

    #[test]
    fn bound_value() {
        assert!((holder_bound(2, 2.0) - 12f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((holder_bound(2, 2.0) - 2.2894).abs() < 1e-4);
    }

    #[test]
    fn zero_field_and_hemisphere() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.1, 3.0).unwrap();
        let zero = vec![0.0; mesh.len()];
        let r = holder_seminorm(&mesh, &zero, 1.0 / 3.0, &PairSampling::default(), None).unwrap();
        assert_eq!(r.seminorm, 0.0);
        let f = hemisphere(&mesh);
        let half = holder_seminorm(&mesh, &f, 0.5, &PairSampling::default(), None).unwrap();
        assert!(half.seminorm >= 1.4 && half.seminorm.is_finite());
        let third = holder_seminorm(&mesh, &f, 1.0 / 3.0, &PairSampling::default(), Some(holder_bound(2, 2.0))).unwrap();
        assert_eq!(third.pass, Some(true));
    }

    #[test]
    fn monotone_in_alpha_on_short_pairs() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.05, 3.0).unwrap();
        let f = hemisphere(&mesh);
        let s = PairSampling {
            all_pairs_up_to: 0,
            random_pairs: 100_000,
            max_distance: Some(1.0),
            seed: 3,
            ..PairSampling::default()
        };
        let mut last = 0.0;
        for alpha in [0.2, 1.0 / 3.0, 0.5, 0.75, 1.0] {
            let r = holder_seminorm(&mesh, &f, alpha, &s, None).unwrap();
            assert!(r.seminorm >= last);
            last = r.seminorm;
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let ball = Domain::ball([0.0, 0.0], 1.0).unwrap();
        let mesh = Mesh::build(&ball, 0.05, 3.0).unwrap();
        let f = hemisphere(&mesh);
        let s = PairSampling {
            all_pairs_up_to: 0,
            random_pairs: 20_000,
            seed: 9,
            ..PairSampling::default()
        };
        let a = holder_seminorm(&mesh, &f, 0.5, &s, None).unwrap();
        let b = holder_seminorm(&mesh, &f, 0.5, &s, None).unwrap();
        assert_eq!(a, b);
    }
}
