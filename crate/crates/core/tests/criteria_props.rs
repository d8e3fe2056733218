use nevsamp_core::criteria::*;
use nevsamp_core::generators::*;
use nevsamp_core::profiles::Profile;
use nevsamp_core::series::Classification;
use proptest::prelude::*;
use std::f64::consts::TAU;

fn ring_spec() -> impl Strategy<Value = RingSpec> {
    (0.3..0.7f64, prop_oneof![(0.3..0.7f64).prop_map(|b| Spacing::Geometric { b }), (1.0..3.0f64).prop_map(|s| Spacing::Power { s })], 2..7u32)
        .prop_map(|(q, spacing, depth)| RingSpec { q, spacing, scale: 1.0, depth })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn generators_are_deterministic_and_roundtrip(alpha in 0.2..0.9f64, depth in 2..7u32) {
        let g = Profile::power(alpha, 1.0).unwrap();
        let a = generate_g_net(&g, depth).unwrap();
        let b = generate_g_net(&g, depth).unwrap();
        prop_assert_eq!(&a, &b);
        let back = Configuration::from_json(&a.to_json()).unwrap();
        prop_assert_eq!(&a, &back);
        let total: u64 = counts_per_square(&a).values().sum();
        prop_assert_eq!(total, a.len() as u64);
    }

    #[test]
    fn ring_radii_approach_the_boundary_strictly(spec in ring_spec()) {
        if let Ok(c) = generate_rings(&spec) {
            prop_assert!(!c.is_empty());
            for n in 1..spec.depth {
                let ratio = (1.0 - spec.radius(n + 1)) / (1.0 - spec.radius(n));
                prop_assert!(ratio > 0.0 && ratio < 1.0);
            }
            let total: u64 = counts_per_square(&c).values().sum();
            prop_assert_eq!(total, c.len() as u64);
        }
    }

    #[test]
    fn hl_partial_sums_rotate_with_the_configuration(theta in 0.0..TAU, zeta in 0.0..TAU) {
        // delta below the separation keeps every point, so the greedy order cannot matter
        let c = generate_dyadic_centers(8).unwrap();
        let a = hayman_lyons_test(&c, zeta, 0.3, 8).unwrap();
        let b = hayman_lyons_test(&c.rotated(theta), zeta + theta, 0.3, 8).unwrap();
        for (x, y) in a.partial_sums.iter().zip(&b.partial_sums) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn hl_verdict_does_not_depend_on_delta() {
    let families = [
        generate_dyadic_centers(12).unwrap(),
        generate_g_net(&Profile::power(0.5, 1.0).unwrap(), 10).unwrap(),
        generate_g_net(&Profile::power(0.25, 1.0).unwrap(), 10).unwrap(),
        generate_udisk_base(10).unwrap(),
    ];
    for c in &families {
        for zeta in [0.0, 1.0] {
            let verdicts: Vec<Classification> = [0.3, 0.5, 0.7].iter().map(|&d| hayman_lyons_test(c, zeta, d, c.depth).unwrap().classification).collect();
            assert!(verdicts.iter().all(|v| *v == verdicts[0]), "{} at {zeta}: {verdicts:?}", c.meta.kind);
        }
    }
}

#[test]
fn sampling_nets_are_hayman_lyons_sets() {
    for (alpha, depth) in [(0.5, 10), (0.6, 9)] {
        let g = Profile::power(alpha, 1.0).unwrap();
        assert_eq!(net_sampling_criterion(&g, depth).unwrap().verdict, Verdict::Sampling);
        let c = generate_g_net(&g, depth).unwrap();
        assert_eq!(hayman_lyons_test(&c, 0.0, 0.3, depth).unwrap().classification, Classification::Divergent);
    }
}
