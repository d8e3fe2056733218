use nevsamp_core::geometry::*;
use nevsamp_core::vulnerability::*;
use proptest::prelude::*;
use std::f64::consts::TAU;

const LEVEL: u32 = 3;

/// A point of the closed square `(LEVEL, k)` at relative position `(u, v) ∈ [0,1]²`.
fn in_square(k: u64, u: f64, v: f64) -> DiskPoint {
    let (r0, r1, t0, t1) = DyadicIndex::new(LEVEL, k).unwrap().bounds();
    DiskPoint::from_polar(r0 + u * (r1 - r0) * 0.999, t0 + v * (t1 - t0)).unwrap()
}

fn rel() -> impl Strategy<Value = (f64, f64)> {
    (0.0..1.0f64, 0.0..1.0f64)
}

fn instance(lambdas: std::ops::Range<usize>) -> impl Strategy<Value = (u64, Vec<(f64, f64)>)> {
    (0..8u64, prop::collection::vec(rel(), lambdas))
}

fn build(k: u64, lambdas: &[(f64, f64)], n: usize) -> VulnerabilityInstance {
    let pts = lambdas.iter().map(|&(u, v)| in_square(k, u, v)).collect();
    VulnerabilityInstance::new(pts, DyadicIndex::new(LEVEL, k).unwrap(), DEFAULT_DILATION, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn placement_order_is_irrelevant((k, lambdas) in instance(1..6), placement in prop::collection::vec(rel(), 1..5)) {
        let inst = build(k, &lambdas, placement.len());
        let mut p: Vec<DiskPoint> = placement.iter().map(|&(u, v)| in_square(k, u, v)).collect();
        let a = w_for_placement(&inst, &p).unwrap();
        p.reverse();
        p.rotate_left(1);
        prop_assert_eq!(a.to_bits(), w_for_placement(&inst, &p).unwrap().to_bits());
    }

    #[test]
    fn adding_a_zero_never_lowers_the_value((k, lambdas) in instance(1..6), placement in prop::collection::vec(rel(), 1..5), extra in rel()) {
        let inst = build(k, &lambdas, placement.len() + 1);
        let mut p: Vec<DiskPoint> = placement.iter().map(|&(u, v)| in_square(k, u, v)).collect();
        let before = w_for_placement(&inst, &p).unwrap();
        p.push(in_square(k, extra.0, extra.1));
        prop_assert!(w_for_placement(&inst, &p).unwrap() >= before);
    }

    #[test]
    fn rotating_square_and_points_keeps_values((k, lambdas) in instance(1..6), placement in prop::collection::vec(rel(), 1..4), m in 1..8u64) {
        let inst = build(k, &lambdas, placement.len());
        let p: Vec<DiskPoint> = placement.iter().map(|&(u, v)| in_square(k, u, v)).collect();
        let theta = TAU * m as f64 / DyadicIndex::count_at(LEVEL) as f64;
        let turned = VulnerabilityInstance::new(
            inst.lambda_points.iter().map(|l| l.rotate(theta)).collect(),
            DyadicIndex::new(LEVEL, (k + m) % 8).unwrap(),
            inst.delta,
            inst.n_zeros,
        )
        .unwrap();
        let q: Vec<DiskPoint> = p.iter().map(|a| a.rotate(theta)).collect();
        let (a, b) = (w_for_placement(&inst, &p).unwrap(), w_for_placement(&turned, &q).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn two_point_value_is_mobius_invariant(a in (0.0..0.9f64, 0.0..TAU), l1 in (0.0..0.9f64, 0.0..TAU), l2 in (0.0..0.9f64, 0.0..TAU)) {
        let p = |(r, t): (f64, f64)| DiskPoint::from_polar(r, t).unwrap();
        let (a, l1, l2) = (p(a), p(l1), p(l2));
        prop_assume!(pseudo_distance(l1, l2) > 1e-6);
        let before = two_point_closed_form(l1, l2);
        let after = two_point_closed_form(mobius(a, l1), mobius(a, l2));
        prop_assert!((before - after).abs() <= 1e-9 * before.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn optimizer_tracks_brute_force((k, lambdas) in instance(2..3), seed in any::<u64>()) {
        let inst = build(k, &lambdas, 1);
        let brute = w_brute_force(&inst, 64).unwrap();
        let opt = w_optimize(&inst, 8, seed).unwrap();
        prop_assert!(opt.value >= 0.95 * brute.value, "{} vs {}", opt.value, brute.value);
        prop_assert!(opt.value <= 1.05 * brute.value.max(two_point_closed_form(inst.lambda_points[0], inst.lambda_points[1])));
        prop_assert!(opt.value >= inst.lower_bound());
    }

    #[test]
    fn optimizer_is_monotone_in_n((k, lambdas) in instance(5..7), seed in any::<u64>()) {
        let mut prev = 0.0;
        for n in 1..=3 {
            let v = w_optimize(&build(k, &lambdas, n), 8, seed).unwrap().value;
            prop_assert!(v >= prev * (1.0 - 1e-6), "N={n}: {v} < {prev}");
            prop_assert!(v >= build(k, &lambdas, n).lower_bound());
            prev = v;
        }
    }
}
