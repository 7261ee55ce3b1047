use approx::assert_abs_diff_eq;
use nullcone::cone::{ConeGrid, Interval, WarpingFunction};
use nullcone::convergence::{
    epsilon_isometry, lift_correspondence, null_convergence_check, product_cone_space, sandwich_bounds, sup_norm,
    uniform_total_boundedness, SamplePairs, WarpingSequence,
};
use nullcone::metric::{gh_distance_exact, Correspondence, FiniteLengthSpace};

fn unit() -> Interval<f64> {
    Interval::new(0.0, 1.0).unwrap()
}

fn constant(c: f64) -> WarpingFunction<f64> {
    WarpingFunction::constant(c, unit()).unwrap()
}

#[test]
fn sup_norm_examples() {
    let f = WarpingFunction::affine(1.0, 1.0, unit()).unwrap();
    assert_eq!(sup_norm(&f, &f, 10).unwrap(), 0.0);
    assert_eq!(sup_norm(&constant(1.0), &constant(1.25), 10).unwrap(), 0.25);
    let g = WarpingFunction::sampled(|t| 1.0 + t + t * (1.0 - t) / 10.0, unit(), 2000).unwrap();
    assert_abs_diff_eq!(sup_norm(&f, &g, 10).unwrap(), 0.025, epsilon = 1e-9);
    let other = WarpingFunction::constant(1.0, Interval::new(0.0, 2.0).unwrap()).unwrap();
    assert!(sup_norm(&f, &other, 10).is_err());
    assert!(sup_norm(&f, &f, 0).is_err());
}

#[test]
fn constant_sequence_has_zero_deviation() {
    let seq = WarpingSequence::new(vec![(1, constant(1.0)), (2, constant(1.0))], constant(1.0), 0.5).unwrap();
    let fiber = FiniteLengthSpace::uniform_path(6, 1.0).unwrap();
    let rep = null_convergence_check(&seq, &fiber, 5, &SamplePairs::All).unwrap();
    assert!(rep.checked.iter().all(|r| r.sup_deviation == 0.0));
    assert!(rep.sandwich_holds());
}

#[test]
fn sandwich_for_one_plus_one_over_j() {
    let members = [4usize, 10, 100].iter().map(|&j| (j, constant(1.0 + 1.0 / j as f64))).collect();
    let seq = WarpingSequence::new(members, constant(1.0), 1.0).unwrap();
    // The slack at j = 100 is about 0.01, so the grid step must be well below it.
    let fiber = FiniteLengthSpace::uniform_path(201, 1.0).unwrap();
    let sources = (0..8).map(|k| k * 5050 + 17 * k).collect();
    let rep = null_convergence_check(&seq, &fiber, 200, &SamplePairs::Sources(sources)).unwrap();
    assert_eq!(rep.checked.len(), 3, "{:?}", rep.excluded);
    assert!(rep.sandwich_holds(), "{rep:?}");
    assert!(rep.checked[2].sup_deviation < rep.checked[1].sup_deviation);
    assert!(rep.deviations_nonincreasing);
}

#[test]
fn coarse_grids_break_the_sandwich_at_small_eps() {
    // Grid error of a few steps exceeds the slack eps (1 + ...) when h = 0.05.
    let seq = WarpingSequence::new(vec![(100, constant(1.01))], constant(1.0), 1.0).unwrap();
    let fiber = FiniteLengthSpace::uniform_path(21, 1.0).unwrap();
    let rep = null_convergence_check(&seq, &fiber, 20, &SamplePairs::All).unwrap();
    assert!(!rep.sandwich_holds());
}

#[test]
fn large_eps_is_excluded() {
    let seq = WarpingSequence::new(vec![(1, constant(2.0)), (5, constant(1.2))], constant(1.0), 1.0).unwrap();
    let fiber = FiniteLengthSpace::uniform_path(4, 1.0).unwrap();
    let rep = null_convergence_check(&seq, &fiber, 4, &SamplePairs::All).unwrap();
    assert_eq!(rep.excluded.len(), 1);
    assert_eq!(rep.excluded[0].0, 1);
    assert_eq!(rep.checked.len(), 1);
}

#[test]
fn sandwich_bounds_collapse_at_zero_eps() {
    assert_eq!(sandwich_bounds(0.7, 0.0, 1.0), (0.7, 0.7));
}

#[test]
fn default_sampling_is_seeded() {
    assert_eq!(SamplePairs::default_for(100, 1), SamplePairs::All);
    let a = SamplePairs::default_for(40_401, 7);
    assert_eq!(a, SamplePairs::default_for(40_401, 7));
    assert_eq!(a.sources(40_401).len(), 24);
}

fn two_point(d: f64) -> FiniteLengthSpace<f64> {
    FiniteLengthSpace::from_rows(&[vec![0.0, d], vec![d, 0.0]]).unwrap()
}

#[test]
fn lifting_examples() {
    let g1 = ConeGrid::new(two_point(1.0), constant(1.0), 4).unwrap();
    let g2 = ConeGrid::new(two_point(1.2), constant(1.0), 4).unwrap();
    let id = lift_correspondence(&Correspondence::identity(2), &g1, &g1).unwrap();
    assert_eq!(id.lifted_distortion, 0.0);
    let m = lift_correspondence(&Correspondence::identity(2), &g1, &g2).unwrap();
    assert_abs_diff_eq!(m.base_distortion, 0.2, epsilon = 1e-15);
    assert!(m.lifted_distortion <= m.base_distortion);
    let full = lift_correspondence(&Correspondence::full(2, 2), &g1, &g2).unwrap();
    assert!(full.lifted_distortion <= full.base_distortion);
    assert_eq!(full.lifted.pairs().len(), 5 * 4);

    let warped = ConeGrid::new(two_point(1.0), constant(2.0), 4).unwrap();
    assert!(lift_correspondence(&Correspondence::identity(2), &g1, &warped).is_err());
    let other = ConeGrid::new(two_point(1.0), constant(1.0), 5).unwrap();
    assert!(lift_correspondence(&Correspondence::identity(2), &g1, &other).is_err());
}

#[test]
fn lifted_gh_is_bounded_by_fiber_gh() {
    let a = FiniteLengthSpace::from_rows(&[vec![0.0, 1.0, 1.5], vec![1.0, 0.0, 0.7], vec![1.5, 0.7, 0.0]]).unwrap();
    let b = two_point(1.3);
    let times = [0.0, 0.4];
    let fiber_gh = gh_distance_exact(&a, &b).unwrap().distance;
    let lifted_gh = gh_distance_exact(&product_cone_space(&a, &times).unwrap(), &product_cone_space(&b, &times).unwrap())
        .unwrap()
        .distance;
    assert!(lifted_gh <= fiber_gh + 1e-9, "{lifted_gh} vs {fiber_gh}");
}

#[test]
fn epsilon_isometry_examples() {
    let fiber = FiniteLengthSpace::uniform_path(11, 1.0).unwrap();
    let g = ConeGrid::new(fiber.clone(), constant(1.0), 10).unwrap();
    let p0 = g.index(5, 5);
    let same = epsilon_isometry(&g, &g, 0.5, p0, 0.0).unwrap();
    assert_eq!(same.distortion, 0.0);
    assert!(same.map.iter().all(|&(p, q)| p == q));
    assert!(same.pass());

    let gn = ConeGrid::new(fiber, constant(1.05), 10).unwrap();
    let eps = sandwich_bounds(1.0, 0.05, 1.0).1 - 1.0;
    let iso = epsilon_isometry(&g, &gn, 0.5, p0, eps).unwrap();
    assert!(iso.pass(), "{iso:?}");
    assert!(iso.distortion <= 3.0 * eps);
    assert!(epsilon_isometry(&g, &gn, 0.5, p0, 0.0).is_err());
}

#[test]
fn compactness_nets() {
    let fiber = FiniteLengthSpace::uniform_path(31, 1.0).unwrap();
    let family = vec![constant(1.0), constant(2.0), constant(3.0)];
    let cert = uniform_total_boundedness(&family, 3.0, &fiber, 30, 0.25).unwrap();
    assert_abs_diff_eq!(cert.mesh, 0.75, epsilon = 1e-15);
    assert!(cert.all_certified(), "{cert:?}");
    assert_eq!(cert.members.len(), 3);

    // eps equal to the diameter: the grid adds at most one step.
    let single = uniform_total_boundedness(&[constant(1.0)], 1.0, &fiber, 30, 1.0).unwrap();
    assert_eq!(single.cardinality(), 1);
    assert!(single.members[0].certified_within_grid_tolerance);
    let single = uniform_total_boundedness(&[constant(1.0)], 1.0, &fiber, 30, 1.1).unwrap();
    assert_eq!(single.cardinality(), 1);
    assert!(single.all_certified());

    let with_outlier = vec![constant(1.0), constant(4.0), constant(3.0)];
    let cert = uniform_total_boundedness(&with_outlier, 3.0, &fiber, 30, 0.25).unwrap();
    assert_eq!(cert.excluded.len(), 1);
    assert_eq!(cert.excluded[0].0, 1);
    assert!(cert.all_certified());
}
