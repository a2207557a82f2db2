use hypgraph::geometry::{dist, Domain};
use proptest::prelude::*;

fn corpus() -> Vec<Domain> {
    vec![
        Domain::ball([0.3, -0.2], 1.3).unwrap(),
        Domain::ellipse(1.5, 1.0).unwrap(),
        Domain::stadium(2.0, 1.0).unwrap(),
        Domain::intersection(vec![Domain::disk_kind([-0.5, 0.0], 1.0), Domain::disk_kind([0.5, 0.0], 1.0)]).unwrap(),
        Domain::rounded_polygon(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]], 0.2).unwrap(),
    ]
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| [x, y])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ball_distance_is_exact(x in point(), r in 0.1..3.0f64) {
        let d = Domain::ball([0.0, 0.0], r).unwrap();
        prop_assert!((d.sd(x).unwrap() - (r - x[0].hypot(x[1]))).abs() <= 1e-12);
    }

    #[test]
    fn distance_is_one_lipschitz(x in point(), y in point()) {
        for d in corpus() {
            let gap = (d.sd(x).unwrap() - d.sd(y).unwrap()).abs();
            prop_assert!(gap <= dist(x, y) + 1e-9, "{:?}: {gap} > {}", d.kind(), dist(x, y));
        }
    }

    #[test]
    fn nearest_point_is_on_the_boundary_at_distance(x in point()) {
        for d in corpus() {
            let r = d.signed_distance(&x).unwrap();
            let foot = [r.nearest[0], r.nearest[1]];
            prop_assert!(d.sd(foot).unwrap().abs() <= 1e-9);
            prop_assert!((dist(x, foot) - r.d.abs()).abs() <= 1e-9);
            prop_assert_eq!(r.inside, r.d > 0.0);
            prop_assert_eq!(d.inside(&x).unwrap(), r.d > 0.0);
        }
    }

    #[test]
    fn probes_snap_onto_the_boundary(x in point()) {
        for d in corpus() {
            let foot = d.signed_distance(&x).unwrap().nearest;
            let p = d.boundary_probe(&foot).unwrap();
            prop_assert!(d.sd([p.point[0], p.point[1]]).unwrap().abs() <= 1e-9);
            let nu = &p.inward_normal;
            prop_assert!((nu[0].hypot(nu[1]) - 1.0).abs() <= 1e-9);
            prop_assert_eq!(p.is_corner, p.mean_curvature.is_none());
        }
    }

    #[test]
    fn ellipse_files_round_trip(a in 0.2..3.0f64, b in 0.2..3.0f64) {
        let d = Domain::ellipse(a, b).unwrap();
        let text = serde_json::to_string(&d.to_file()).unwrap();
        prop_assert_eq!(Domain::from_json(&text).unwrap().to_file(), d.to_file());
    }
}
