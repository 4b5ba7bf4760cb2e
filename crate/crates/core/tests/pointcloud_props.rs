use proptest::prelude::*;

use distmorse::distfield::{is_critical, PointCloud, SearchOptions, Target};
use distmorse::numerics::dist;
use distmorse::pointcloud::{
    candidate_bound, enumerate_critical, euler_sum, general_position_check, CloudOptions,
};

fn cloud(n: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(prop::collection::vec(-4.0f64..4.0, n), 2..9)
        .prop_map(move |pts| PointCloud::new(n, pts).unwrap())
}

fn generic(y: &PointCloud) -> bool {
    general_position_check(y).0
        && y.points
            .iter()
            .enumerate()
            .all(|(i, a)| y.points[i + 1..].iter().all(|b| dist(a, b) > 0.05))
}

fn check(y: &PointCloud) -> Result<(), TestCaseError> {
    prop_assume!(generic(y));
    let a = enumerate_critical(y, &CloudOptions::default()).unwrap();
    prop_assume!(a.cospherical.is_empty());
    prop_assert_eq!(euler_sum(&a.criticals), 1);
    prop_assert!(a.criticals.len() as u128 <= candidate_bound(y.len(), y.dim));
    let target = Target::Cloud(y.clone());
    for c in a.criticals.iter().filter(|c| c.k > 0) {
        prop_assert_eq!(c.iota, 0);
        prop_assert!(c.k <= y.dim);
        let (crit, sol) =
            is_critical(None, &target, &c.center, &SearchOptions::default(), 1e-9).unwrap();
        prop_assert!(crit, "center {:?} is not critical", c.center);
        prop_assert_eq!(sol.lambdas.len(), c.k + 1);
        for p in &c.support_points {
            prop_assert!((dist(p, &c.center) - c.radius).abs() <= 1e-9 * (1.0 + c.radius));
        }
        for p in &y.points {
            prop_assert!(dist(p, &c.center) >= c.radius * (1.0 - 1e-9));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planar_clouds(y in cloud(2)) {
        check(&y)?;
    }

    #[test]
    fn spatial_clouds(y in cloud(3)) {
        check(&y)?;
    }

    #[test]
    fn output_is_sorted_and_deterministic(y in cloud(2)) {
        prop_assume!(generic(&y));
        let a = enumerate_critical(&y, &CloudOptions::default()).unwrap();
        let b = enumerate_critical(&y, &CloudOptions::default()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.criticals.windows(2).all(|w| w[0].k <= w[1].k));
    }
}

#[test]
fn candidate_bound_small_cases() {
    // Triangle in the plane: 3 + 3 + 1.
    assert_eq!(candidate_bound(3, 2), 7);
    // Two points: at most the points and the midpoint.
    assert_eq!(candidate_bound(2, 3), 3);
    assert_eq!(candidate_bound(8, 3), 8 + 28 + 56 + 70);
}
