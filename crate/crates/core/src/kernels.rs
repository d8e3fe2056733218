//! Poisson kernels of the disk and the upper half-plane, and Poisson integrals of boundary measures.
//!
//! Densities are taken with respect to normalized arc length `dθ/2π`, so the
//! constant density `1` integrates to `1` against every kernel `P_z`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{angle_diff, normalize_angle, BoundaryArc, DiskPoint};
use crate::profiles::Profile;
use crate::quadrature::{integrate, QuadOptions};

pub const DISK_REL_TOL: f64 = 1e-8;
pub const HALFPLANE_REL_TOL: f64 = 1e-7;

/// `P_z(e^{iθ}) = (1 - |z|²)/|e^{iθ} - z|²`.
pub fn poisson_kernel(z: DiskPoint, theta: f64) -> f64 {
    poisson_kernel_c(z.z(), theta)
}

pub fn poisson_kernel_c(z: Complex64, theta: f64) -> f64 {
    let r = z.norm();
    let s = (0.5 * (theta - z.im.atan2(z.re))).sin();
    ((1.0 - r) * (1.0 + r)) / ((1.0 - r) * (1.0 - r) + 4.0 * r * s * s)
}

/// `P_z(1)`, written to stay accurate for `z` close to `1`.
pub fn poisson_at_one(z: Complex64) -> f64 {
    let d = Complex64::new(1.0 - z.re, -z.im);
    (1.0 - z.norm_sqr()) / d.norm_sqr()
}

/// Harmonic measure of the closed arc at `z`, in closed form.
pub fn arc_harmonic_measure(z: Complex64, arc: BoundaryArc) -> f64 {
    let len = arc.length();
    if len >= TAU {
        return 1.0;
    }
    if len <= 0.0 {
        return 0.0;
    }
    if len > PI {
        let q = BoundaryArc { center: arc.center - arc.half_width / 2.0, half_width: arc.half_width / 2.0 };
        let r = BoundaryArc { center: arc.center + arc.half_width / 2.0, half_width: arc.half_width / 2.0 };
        return arc_harmonic_measure(z, q) + arc_harmonic_measure(z, r);
    }
    let a = Complex64::from_polar(1.0, arc.center - arc.half_width);
    let b = Complex64::from_polar(1.0, arc.center + arc.half_width);
    let angle = ((b - z) / (a - z)).arg().rem_euclid(TAU);
    (angle / PI - len / TAU).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: f64,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedArc {
    pub arc: BoundaryArc,
    pub weight: f64,
}

/// Absolutely continuous part of a boundary measure, as a density against `dθ/2π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Density {
    Constant { value: f64 },
    /// Step function `Σ weight·χ_arc`, integrated in closed form.
    Arcs { arcs: Vec<WeightedArc> },
    /// Periodic piecewise-linear function through `(angle, value)` nodes.
    Table { points: Vec<(f64, f64)> },
    /// `ψ(|t|)/t²` for the signed angle `t ∈ [-1, 1]`, zero elsewhere.
    #[serde(rename = "classF")]
    ClassF { profile: Profile },
}

impl Density {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Density::Constant { value } => *value,
            Density::Arcs { arcs } => arcs.iter().filter(|a| a.arc.contains(theta)).map(|a| a.weight).sum(),
            Density::Table { points } => periodic_linear(points, theta),
            Density::ClassF { profile } => {
                let t = angle_diff(theta, 0.0).abs();
                if t == 0.0 || t > 1.0 {
                    0.0
                } else {
                    profile.eval_unbounded(t) / (t * t)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Density::Constant { value } if *value < 0.0 => Err(invalid("density must be non-negative")),
            Density::Arcs { arcs } if arcs.iter().any(|a| a.weight < 0.0) => Err(invalid("arc weights must be non-negative")),
            Density::Table { points } if points.is_empty() || points.iter().any(|p| p.1 < 0.0) => {
                Err(invalid("density table must be non-empty and non-negative"))
            }
            _ => Ok(()),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density::Table { points } => points.iter().map(|p| angle_diff(p.0, 0.0)).collect(),
            Density::ClassF { .. } => vec![-1.0, 0.0, 1.0],
            _ => Vec::new(),
        }
    }
}

fn periodic_linear(points: &[(f64, f64)], theta: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|&(a, v)| (normalize_angle(a), v)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let t = normalize_angle(theta);
    let n = pts.len();
    if n == 1 {
        return pts[0].1;
    }
    let i = pts.partition_point(|p| p.0 <= t);
    let (a, b) = if i == 0 || i == n {
        let (l, r) = (pts[n - 1], pts[0]);
        (l, (r.0 + TAU, r.1))
    } else {
        (pts[i - 1], pts[i])
    };
    let tt = if t < a.0 { t + TAU } else { t };
    a.1 + (b.1 - a.1) * (tt - a.0) / (b.0 - a.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct BoundaryMeasure {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
}

impl BoundaryMeasure {
    pub fn atom(angle: f64, mass: f64) -> Self {
        BoundaryMeasure { atoms: vec![Atom { angle: normalize_angle(angle), mass }], density: None }
    }

    pub fn with_density(density: Density) -> Self {
        BoundaryMeasure { atoms: Vec::new(), density: Some(density) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.iter().any(|a| !(a.mass > 0.0) || !a.angle.is_finite()) {
            return Err(invalid("atoms need positive mass and finite angle"));
        }
        if let Some(d) = &self.density {
            d.validate()?;
        }
        Ok(())
    }

    pub fn atoms_only(&self) -> bool {
        self.density.is_none()
    }

    pub fn atom_mass_total(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Poisson integral of the atomic part only; exact and cheap.
    pub fn atomic_poisson(&self, z: Complex64) -> f64 {
        self.atoms.iter().map(|a| a.mass * poisson_kernel_c(z, a.angle)).sum()
    }
}

/// `P[μ](z) = ∫ P_z dμ`: atoms summed exactly, densities by adaptive quadrature.
pub fn poisson_integral(z: DiskPoint, mu: &BoundaryMeasure) -> Result<f64> {
    mu.validate()?;
    let zc = z.z();
    let mut total = mu.atomic_poisson(zc);
    match &mu.density {
        None => {}
        Some(Density::Constant { value }) => total += value,
        Some(Density::Arcs { arcs }) => {
            total += arcs.iter().map(|a| a.weight * arc_harmonic_measure(zc, a.arc)).sum::<f64>();
        }
        Some(d) => {
            let peak = angle_diff(z.arg(), 0.0);
            let w = 1.0 - z.abs();
            let mut bps = d.breakpoints();
            if z.abs() > 0.0 {
                for m in [0.0, -4.0, -1.0, 1.0, 4.0] {
                    bps.push(peak + m * w);
                }
            }
            let r = integrate(|t| poisson_kernel_c(zc, t) * d.eval(t) / TAU, -PI, PI, &bps, QuadOptions::rel(DISK_REL_TOL))?;
            total += r.value;
        }
    }
    Ok(total)
}

/// `log|S(z)| = -P[μ](z)` for an atomic singular measure `μ`.
pub fn singular_inner_log_modulus(mu: &BoundaryMeasure, z: DiskPoint) -> Result<f64> {
    if !mu.atoms_only() {
        return Err(invalid("singular inner functions are built from atoms only"));
    }
    mu.validate()?;
    Ok(-mu.atomic_poisson(z.z()))
}

/// Harnack bounds `((1-ρ)/(1+ρ), (1+ρ)/(1-ρ))` for ratios of positive harmonic functions.
pub fn harnack_ratio_bounds(rho: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(format!("rho={rho} not in [0,1)")));
    }
    Ok(((1.0 - rho) / (1.0 + rho), (1.0 + rho) / (1.0 - rho)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(invalid(format!("half-plane point needs y > 0, got ({x}, {y})")));
        }
        Ok(HalfPlanePoint { x, y })
    }
}

/// `(1/π) · y/((x - t)² + y²)`.
pub fn halfplane_poisson_kernel(p: HalfPlanePoint, t: f64) -> f64 {
    p.y / (PI * ((p.x - t).powi(2) + p.y * p.y))
}

/// `(1/π) ∫_{-1}^{1} y/((x-t)² + y²) · density(t) dt`.
///
/// `extra_breaks` marks kinks of the density; `0` and the kernel peak are always added.
pub fn halfplane_poisson_integral(p: HalfPlanePoint, density: impl Fn(f64) -> f64, extra_breaks: &[f64]) -> Result<f64> {
    let mut bps = vec![0.0, p.x, p.x - p.y, p.x + p.y, p.x - 10.0 * p.y, p.x + 10.0 * p.y];
    bps.extend_from_slice(extra_breaks);
    let r = integrate(
        |t| {
            let d = density(t);
            if d == 0.0 {
                0.0
            } else {
                halfplane_poisson_kernel(p, t) * d
            }
        },
        -1.0,
        1.0,
        &bps,
        QuadOptions { rel_tol: HALFPLANE_REL_TOL, abs_tol: 1e-300, max_intervals: 50_000 },
    )?;
    if r.value < 0.0 {
        return Err(Error::Quadrature { estimate: r.value, error_estimate: r.error });
    }
    Ok(r.value)
}

/// `w = i(1 - z)/(1 + z)`: disk to upper half-plane, `1 ↦ 0`, `-1 ↦ ∞`.
pub fn cayley(z: Complex64) -> Complex64 {
    Complex64::i() * (1.0 - z) / (1.0 + z)
}

/// Inverse of [`cayley`]: `z = (i - w)/(i + w)`.
pub fn cayley_inverse(w: Complex64) -> Complex64 {
    (Complex64::i() - w) / (Complex64::i() + w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(poisson_kernel(DiskPoint::ORIGIN, 1.234), 1.0);
        assert!((poisson_kernel(p(0.9, 0.0), 0.0) - 19.0).abs() < 1e-12);
        assert!(((1.0 - 0.999) * poisson_kernel(p(0.999, 0.0), 0.0) - 1.999).abs() < 1e-10);
    }

    #[test]
    fn atom_integrals() {
        let mu = BoundaryMeasure::atom(0.0, 1.0);
        let r = 0.7;
        assert!((poisson_integral(p(r, 0.0), &mu).unwrap() - (1.0 + r) / (1.0 - r)).abs() < 1e-12);
        assert_eq!(singular_inner_log_modulus(&mu, DiskPoint::ORIGIN).unwrap(), -1.0);
        let two = BoundaryMeasure { atoms: vec![Atom { angle: 0.0, mass: 2.0 }, Atom { angle: 1.0, mass: 0.5 }], density: None };
        let z = p(0.2, -0.4);
        let sum = 2.0 * poisson_kernel(z, 0.0) + 0.5 * poisson_kernel(z, 1.0);
        assert!((singular_inner_log_modulus(&two, z).unwrap() + sum).abs() < 1e-13);
    }

    #[test]
    fn lebesgue_density_reproduces_one() {
        let mu = BoundaryMeasure::with_density(Density::Table { points: vec![(0.0, 1.0), (3.0, 1.0)] });
        for (re, im) in [(0.0, 0.0), (0.95, 0.1), (-0.3, -0.7)] {
            let v = poisson_integral(p(re, im), &mu).unwrap();
            assert!((v - 1.0).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn arc_measure_against_quadrature() {
        let arc = BoundaryArc { center: 0.3, half_width: 0.4 };
        for (re, im) in [(0.0, 0.0), (0.9, 0.2), (0.5, -0.5), (-0.8, 0.1), (0.95, 0.28)] {
            let z = Complex64::new(re, im);
            let closed = arc_harmonic_measure(z, arc);
            let quad = integrate(|t| poisson_kernel_c(z, t) / TAU, 0.3 - 0.4, 0.3 + 0.4, &[z.arg()], QuadOptions::rel(1e-12)).unwrap().value;
            assert!((closed - quad).abs() < 1e-10, "{closed} {quad}");
        }
        let big = BoundaryArc { center: 1.0, half_width: 2.5 };
        assert!((arc_harmonic_measure(Complex64::new(0.0, 0.0), big) - 5.0 / TAU).abs() < 1e-14);
    }

    #[test]
    fn harnack_examples() {
        assert_eq!(harnack_ratio_bounds(0.0).unwrap(), (1.0, 1.0));
        let (lo, hi) = harnack_ratio_bounds(0.5).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
        assert!(harnack_ratio_bounds(1.0).is_err());
    }

    #[test]
    fn halfplane_constant_density() {
        for y in [1.0, 0.1, 1e-3] {
            let v = halfplane_poisson_integral(HalfPlanePoint::new(0.0, y).unwrap(), |_| 1.0, &[]).unwrap();
            assert!((v - 2.0 / PI * (1.0 / y).atan()).abs() < 1e-9, "{y}");
        }
        let z = halfplane_poisson_integral(HalfPlanePoint::new(0.3, 0.2).unwrap(), |_| 0.0, &[]).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn cayley_roundtrip() {
        for (re, im) in [(0.0, 0.0), (0.5, 0.5), (-0.9, 0.0), (0.99, -0.1)] {
            let z = Complex64::new(re, im);
            let w = cayley(z);
            assert!(w.im > 0.0);
            assert!((cayley_inverse(w) - z).norm() < 1e-12);
            // Im w / |w|² is P_z(1)
            assert!((w.im / w.norm_sqr() - poisson_at_one(z)).abs() < 1e-9 * poisson_at_one(z));
        }
    }
}
