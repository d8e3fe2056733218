use nevsamp_core::geometry::*;
use nevsamp_core::kernels::poisson_at_one;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

fn disk_point() -> impl Strategy<Value = DiskPoint> {
    (0.0..0.999f64, 0.0..TAU).prop_map(|(r, t)| DiskPoint::from_polar(r, t).unwrap())
}

/// Pseudohyperbolic distance written out directly, independent of the library formula.
fn rho_direct(z: Complex64, w: Complex64) -> f64 {
    ((z - w) / (Complex64::new(1.0, 0.0) - w.conj() * z)).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn automorphisms_preserve_distance(a in disk_point(), z in disk_point(), w in disk_point()) {
        let before = pseudo_distance(z, w);
        let after = pseudo_distance(mobius(a, z), mobius(a, w));
        prop_assert!((before - after).abs() <= 1e-12 * 1f64.max(1.0 / (1.0 - before).max(1e-3)), "{before} vs {after}");
        prop_assert!((before - rho_direct(z.z(), w.z())).abs() <= 1e-12);
    }

    #[test]
    fn strong_triangle_inequality(z in disk_point(), u in disk_point(), w in disk_point()) {
        let lhs = pseudo_distance(z, w);
        let rhs = combine(pseudo_distance(z, u), pseudo_distance(u, w));
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn dyadic_squares_partition(r in 0.5..0.99999f64, t in 0.0..TAU) {
        let z = DiskPoint::from_polar(r, t).unwrap();
        let i = dyadic_square_of(z);
        let (r_lo, r_hi, t0, t1) = i.bounds();
        prop_assert!(r_lo <= r && r < r_hi);
        let theta = normalize_angle(z.arg());
        prop_assert!(t0 <= theta && theta < t1);
        // no other square at the same or a neighbouring level claims the point
        for j in i.neighbourhood() {
            if j == i {
                continue;
            }
            let (a, b, c, d) = j.bounds();
            prop_assert!(!(a <= r && r < b && c <= theta && theta < d), "{:?} also contains the point", j);
        }
    }

    #[test]
    fn euclidean_image_boundary(a in disk_point(), r in 0.01..0.95f64, t in 0.0..TAU) {
        let e = hyperbolic_to_euclidean_c(a.z(), r);
        let b = e.center + Complex64::from_polar(e.radius, t);
        prop_assume!(b.norm() < 1.0 - 1e-9);
        prop_assert!((rho_direct(b, a.z()) - r).abs() <= 1e-10 / (1.0 - a.abs()).max(1e-6).min(1.0));
    }

    #[test]
    fn horocycle_level_set(c in 0.05..20.0f64, t in 0.01..(TAU - 0.01)) {
        let d = horocycle_disk(c).unwrap();
        let z = d.center + Complex64::from_polar(d.radius, t);
        prop_assert!((poisson_at_one(z) - c).abs() <= 1e-10 * c.max(1.0));
    }
}

#[test]
fn adjacent_square_diameters_stay_in_a_band() {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for n in 2..=20 {
        for k in [0, DyadicIndex::count_at(n) / 3, DyadicIndex::count_at(n) - 1] {
            let d = square_pseudo_diameter(DyadicIndex::new(n, k).unwrap(), 32);
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    assert!(lo > 0.5 && hi < 0.99, "band [{lo}, {hi}]");
    assert!(hi - lo < 0.1, "band [{lo}, {hi}] is not level-independent");
}
