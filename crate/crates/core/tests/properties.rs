//! Property-based checks of metric, transport, distribution and seeding invariants.

use jacobi_match::distributions::{intrinsic_distance, sample, EmpiricalSample};
use jacobi_match::rng::{derive_seed, mix64, replica_seed};
use jacobi_match::spectral::HeatKernelModel;
use jacobi_match::transport::{
    brute_force_assignment, cost_matrix, solve_assignment, w2sq_bipartite, w2sq_sorted_1d, CostMatrix, Metric,
};
use jacobi_match::{JacobiParams, Model, ProductJacobiParams, RngState};
use proptest::prelude::*;
use std::collections::HashSet;

fn params() -> impl Strategy<Value = JacobiParams> {
    (0.5f64..6.0, 0.5f64..6.0).prop_map(|(a, b)| JacobiParams::new(a, b).unwrap())
}

fn model(coords: usize) -> impl Strategy<Value = Model> {
    prop::collection::vec(params(), coords).prop_map(|f| {
        if f.len() == 1 {
            f[0].into()
        } else {
            ProductJacobiParams::new(f).unwrap().into()
        }
    })
}

fn draw(m: &Model, seed: u64, n: usize) -> EmpiricalSample {
    sample(m, &mut RngState::new(seed), n)
}

fn duplicate(s: &EmpiricalSample) -> EmpiricalSample {
    let mut pts = Vec::with_capacity(2 * s.points().len());
    for i in 0..s.len() {
        pts.extend_from_slice(s.point(i));
        pts.extend_from_slice(s.point(i));
    }
    EmpiricalSample::from_points(s.dim(), pts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn intrinsic_distance_is_a_metric(x in -1.0f64..=1.0, y in -1.0f64..=1.0, z in -1.0f64..=1.0) {
        prop_assert_eq!(intrinsic_distance(x, y), intrinsic_distance(y, x));
        prop_assert_eq!(intrinsic_distance(x, x), 0.0);
        prop_assert!(intrinsic_distance(x, z) <= intrinsic_distance(x, y) + intrinsic_distance(y, z) + 1e-15);
    }

    #[test]
    fn cdf_inverts_quantile(p in params(), u in 1e-9f64..(1.0 - 1e-9)) {
        prop_assert!((p.cdf(p.quantile(u)) - u).abs() < 1e-12);
        let theta = p.angle_quantile(u);
        prop_assert!((p.angle_cdf(theta) - u).abs() < 1e-12);
    }

    #[test]
    fn cdf_and_sf_are_complementary(p in params(), x in -1.0f64..=1.0) {
        let (c, s) = (p.cdf(x), p.sf(x));
        prop_assert!((0.0..=1.0).contains(&c) && (0.0..=1.0).contains(&s));
        prop_assert!((c + s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn w2_satisfies_triangle_inequality(m in model(2), n in 2usize..24, seed in any::<u64>()) {
        let (a, b, c) = (draw(&m, seed, n), draw(&m, seed ^ 1, n), draw(&m, seed ^ 2, n));
        let w = |p: &EmpiricalSample, q: &EmpiricalSample| w2sq_bipartite(p, q, Metric::IntrinsicProduct).unwrap().sqrt();
        prop_assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-12);
    }

    #[test]
    fn w2_in_1d_satisfies_triangle_inequality(m in model(1), n in 2usize..200, seed in any::<u64>()) {
        let (a, b, c) = (draw(&m, seed, n), draw(&m, seed ^ 1, n), draw(&m, seed ^ 2, n));
        let w = |p: &EmpiricalSample, q: &EmpiricalSample| w2sq_sorted_1d(p, q).unwrap().sqrt();
        prop_assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-12);
    }

    #[test]
    fn identity_pairing_bounds_the_optimum(m in model(2), n in 1usize..40, seed in any::<u64>()) {
        let (a, b) = (draw(&m, seed, n), draw(&m, seed.wrapping_add(7), n));
        let c = cost_matrix(&a, &b, Metric::IntrinsicProduct).unwrap();
        let identity: f64 = (0..n).map(|i| c.get(i, i)).sum::<f64>() / n as f64;
        prop_assert!(w2sq_bipartite(&a, &b, Metric::IntrinsicProduct).unwrap() <= identity + 1e-14);
    }

    #[test]
    fn duplicating_points_leaves_w2_unchanged(m in model(2), n in 1usize..20, seed in any::<u64>()) {
        let (a, b) = (draw(&m, seed, n), draw(&m, !seed, n));
        let once = w2sq_bipartite(&a, &b, Metric::IntrinsicProduct).unwrap();
        let twice = w2sq_bipartite(&duplicate(&a), &duplicate(&b), Metric::IntrinsicProduct).unwrap();
        prop_assert!((once - twice).abs() < 1e-12);
    }

    #[test]
    fn bipartite_equals_sorted_in_1d(m in model(1), n in 1usize..80, seed in any::<u64>()) {
        let (a, b) = (draw(&m, seed, n), draw(&m, seed ^ 0xff, n));
        let s = w2sq_sorted_1d(&a, &b).unwrap();
        prop_assert!((w2sq_bipartite(&a, &b, Metric::Intrinsic1d).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn solver_matches_enumeration(n in 1usize..=7, entries in prop::collection::vec(0.0f64..10.0, 49)) {
        let c = CostMatrix::from_fn(n, |i, j| entries[i * 7 + j]);
        let fast = solve_assignment(&c).unwrap();
        prop_assert!(fast.is_permutation());
        prop_assert!((fast.total_cost - brute_force_assignment(&c).unwrap().total_cost).abs() < 1e-12);
        prop_assert!((c.assignment_cost(&fast.assignment) - fast.total_cost).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_symmetric(p in params(), t in 1e-3f64..2.0, x in -1.0f64..=1.0, y in -1.0f64..=1.0) {
        let m = HeatKernelModel::new(p);
        prop_assert_eq!(m.heat_kernel_1d(t, x, y).unwrap().to_bits(), m.heat_kernel_1d(t, y, x).unwrap().to_bits());
    }

    #[test]
    fn mix_matches_reference_finalizer(z in any::<u64>()) {
        // the three xor-shift-multiply steps, written out independently
        let mut v = z;
        v = (v ^ (v >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        v = (v ^ (v >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        v ^= v >> 31;
        prop_assert_eq!(mix64(z), v);
    }

    #[test]
    fn seeds_are_pure_functions(base in any::<u64>(), n in any::<u64>(), r in any::<u64>()) {
        prop_assert_eq!(derive_seed(base, n, r), derive_seed(base, n, r));
        prop_assert_eq!(replica_seed(base, r), replica_seed(base, r));
    }
}

#[test]
fn million_seed_pairs_do_not_collide() {
    let mut seen = HashSet::with_capacity(1 << 20);
    for n in 0..1000u64 {
        for r in 0..1000u64 {
            assert!(seen.insert(derive_seed(0x1234_5678, n, r)), "collision at ({n}, {r})");
        }
    }
}
