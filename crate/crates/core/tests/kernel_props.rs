use nevsamp_core::blaschke::*;
use nevsamp_core::geometry::*;
use nevsamp_core::kernels::*;
use nevsamp_core::profiles::Profile;
use proptest::prelude::*;
use std::f64::consts::TAU;

fn disk_point(rmax: f64) -> impl Strategy<Value = DiskPoint> {
    (0.0..rmax, 0.0..TAU).prop_map(|(r, t)| DiskPoint::from_polar(r, t).unwrap())
}

fn zero_set(max: usize) -> impl Strategy<Value = ZeroSet> {
    prop::collection::vec(disk_point(0.95), 1..max).prop_map(|pts| ZeroSet::simple(pts, 4))
}

fn sample_measure() -> BoundaryMeasure {
    let mut mu = BoundaryMeasure::with_density(Density::Table { points: vec![(0.0, 1.0), (1.5, 3.0), (3.0, 0.5), (5.0, 2.0)] });
    mu.atoms.push(Atom { angle: 2.0, mass: 0.7 });
    mu
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kernel_has_unit_mean(z in disk_point(0.9)) {
        // periodic trapezoid rule: error decays like |z|^nodes
        let nodes = 4096;
        let mean: f64 = (0..nodes).map(|j| poisson_kernel(z, TAU * j as f64 / nodes as f64)).sum::<f64>() / nodes as f64;
        prop_assert!((mean - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn integrals_of_positive_measures_are_positive(z in disk_point(0.99)) {
        prop_assert!(poisson_integral(z, &sample_measure()).unwrap() >= 0.0);
    }

    #[test]
    fn blaschke_is_non_positive(zs in zero_set(6), z in disk_point(0.999)) {
        let v = blaschke_log_modulus(&zs, z);
        prop_assert!(v < 0.0 || v == f64::NEG_INFINITY);
    }

    #[test]
    fn blaschke_mobius_covariance(zs in zero_set(5), a in disk_point(0.9), z in disk_point(0.95)) {
        let moved = ZeroSet::simple(zs.zeros.iter().map(|q| mobius(a, q.point)), zs.depth);
        let lhs = blaschke_log_modulus(&moved, mobius(a, z));
        let rhs = blaschke_log_modulus(&zs, z);
        prop_assume!(rhs.is_finite() && rhs > -30.0);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn adding_a_zero_decreases_modulus(zs in zero_set(5), extra in disk_point(0.95), z in disk_point(0.95)) {
        let before = blaschke_log_modulus(&zs, z);
        prop_assume!(before.is_finite() && pseudo_distance(z, extra) > 0.0);
        let mut pts: Vec<DiskPoint> = zs.zeros.iter().map(|q| q.point).collect();
        pts.push(extra);
        let after = blaschke_log_modulus(&ZeroSet::simple(pts, zs.depth), z);
        prop_assert!(after < before);
    }

    #[test]
    fn psi_inverse_is_sqrt_times_g(alpha in 0.05..1.0f64, s in 1e-6..1.0f64) {
        let g = Profile::power(alpha, 1.0).unwrap();
        let psi = g.psi_from_g().unwrap();
        let want = s.sqrt() * g.eval(s).unwrap();
        prop_assert!((psi.inverse(s).unwrap() - want).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn poisson_integral_mean_value(z in disk_point(0.8)) {
        let mu = sample_measure();
        let centre = poisson_integral(z, &mu).unwrap();
        let h = 0.5 * (1.0 - z.abs());
        let nodes = 64;
        let avg: f64 = (0..nodes)
            .map(|j| {
                let p = DiskPoint::from_complex(z.z() + num_complex::Complex64::from_polar(h, TAU * j as f64 / nodes as f64)).unwrap();
                poisson_integral(p, &mu).unwrap()
            })
            .sum::<f64>()
            / nodes as f64;
        prop_assert!((avg - centre).abs() <= 1e-6 * centre.abs().max(1.0), "{avg} vs {centre}");
    }
}

#[test]
fn radial_mass_scale_of_an_atom() {
    let mu = BoundaryMeasure::atom(1.0, 0.3);
    let z = DiskPoint::from_polar(1.0 - 2f64.powi(-20), 1.0).unwrap();
    let v = (1.0 - z.abs()) * poisson_integral(z, &mu).unwrap();
    assert!((v / 0.6 - 1.0).abs() < 0.01);
}

#[test]
fn transforms_keep_profiles_monotone() {
    for p in [Profile::power(0.25, 1.0).unwrap(), Profile::power(0.5, 1.0).unwrap(), Profile::log_power_with(2.0, 1.0, 1.0).unwrap()] {
        assert!(p.is_monotone_sampled(1000));
        if let Ok(psi) = p.psi_from_g() {
            assert!(psi.is_monotone_sampled(1000));
        }
        assert!(p.psi_eta_raise(0.5, 12).unwrap().is_monotone_sampled(1000));
    }
}
