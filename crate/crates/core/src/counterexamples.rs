//! Explicit non-determination witnesses: functions `f` of the Nevanlinna class that are bounded
//! on a configuration and unbounded in the disk, handled through
//! `log|f| = log|B_Z| + scale·P[atoms] - C·h_ψ∘cayley`.

use std::f64::consts::{FRAC_1_PI, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blaschke::{log_modulus_c, Zero, ZeroSet};
use crate::criteria::{hayman_lyons_test, log_inv, udisks_sampling_criterion, Verdict};
use crate::error::{invalid, Error, Result};
use crate::generators::{generate_dyadic_centers, max_separated_subsequence, Configuration};
use crate::geometry::{dyadic_square_of, log_rho_c, DiskPoint};
use crate::kernels::{cayley, halfplane_poisson_integral, poisson_at_one, BoundaryMeasure, HalfPlanePoint};
use crate::profiles::Profile;
use crate::series::{classify_tail, geometric_tail, Classification};

/// Boundary samples of `𝒟_ψ` used to calibrate the half-plane constant.
pub const CALIBRATION_SAMPLES: usize = 200;
/// Largest admissible half-plane constant before calibration gives up.
pub const MAX_HALFPLANE_CONSTANT: f64 = 1e6;
/// Poisson threshold above which the disk witness places zeros.
pub const DEFAULT_UDISK_THRESHOLD: f64 = 0.1;

/// `½·((1-δ)/(1+δ))·log(1/δ)`.
pub fn appendix_constant(delta: f64) -> f64 {
    0.5 * (1.0 - delta) / (1.0 + delta) * (1.0 / delta).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePart {
    pub psi: Profile,
    pub constant: f64,
}

impl HalfPlanePart {
    fn density(&self, t: f64) -> f64 {
        let a = t.abs();
        if a == 0.0 || a > 1.0 {
            0.0
        } else {
            self.psi.eval_unbounded(a).min(1.0) / (a * a)
        }
    }

    /// Poisson integral of `ψ(|t|)/t²` over `[-1, 1]` in the upper half-plane.
    pub fn h_psi(&self, w: HalfPlanePoint) -> Result<f64> {
        halfplane_poisson_integral(w, |t| self.density(t), &[-1.0, 1.0])
    }

    /// `P_w(0) - C·h_ψ(w)` with the half-plane kernel `(1/π)·y/(x² + y²)`.
    pub fn h(&self, w: HalfPlanePoint) -> Result<f64> {
        Ok(w.y / (PI * (w.x * w.x + w.y * w.y)) - self.constant * self.h_psi(w)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessMeta {
    pub construction: String,
    pub params: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NevanlinnaWitness {
    pub zero_set: ZeroSet,
    pub harmonic_atoms: BoundaryMeasure,
    pub harmonic_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfplane_part: Option<HalfPlanePart>,
    /// `Σ m(1-|a|)` over the zeros of each level `0..=depth`.
    pub blaschke_per_level: Vec<f64>,
    pub depth: u32,
    pub meta: WitnessMeta,
}

fn blaschke_per_level(zs: &ZeroSet, depth: u32) -> Vec<f64> {
    let mut v = vec![0.0; depth as usize + 1];
    for z in &zs.zeros {
        let n = dyadic_square_of(z.point).n.min(depth) as usize;
        v[n] += z.mult as f64 * (1.0 - z.point.abs());
    }
    v
}

impl NevanlinnaWitness {
    fn build(zeros: Vec<Zero>, scale: f64, halfplane_part: Option<HalfPlanePart>, depth: u32, construction: &str, params: serde_json::Value) -> Result<Self> {
        let zero_set = ZeroSet::new(zeros, depth)?;
        let blaschke_per_level = blaschke_per_level(&zero_set, depth);
        Ok(NevanlinnaWitness {
            zero_set,
            harmonic_atoms: BoundaryMeasure::atom(0.0, 1.0),
            harmonic_scale: scale,
            halfplane_part,
            blaschke_per_level,
            depth,
            meta: WitnessMeta { construction: construction.into(), params },
        })
    }

    pub fn blaschke_sum(&self) -> f64 {
        self.blaschke_per_level.iter().sum()
    }

    /// Estimated Blaschke mass of the levels beyond the truncation depth.
    pub fn slack(&self) -> f64 {
        let terms = &self.blaschke_per_level;
        if terms.iter().all(|&t| t == 0.0) {
            return 0.0;
        }
        geometric_tail(0, terms).unwrap_or_else(|| terms.last().copied().unwrap_or(0.0))
    }

    /// Angle of the boundary atom the witness blows up at.
    pub fn radial_angle(&self) -> f64 {
        self.harmonic_atoms.atoms.first().map_or(0.0, |a| a.angle)
    }

    pub fn harmonic_part(&self, z: Complex64) -> Result<f64> {
        let mut h = self.harmonic_scale * self.harmonic_atoms.atomic_poisson(z);
        if let Some(hp) = &self.halfplane_part {
            let w = cayley(z);
            h -= hp.constant * hp.h_psi(HalfPlanePoint::new(w.re, w.im)?)?;
        }
        Ok(h)
    }

    pub fn log_modulus(&self, z: Complex64) -> Result<f64> {
        let b = log_modulus_c(&self.zero_set, z);
        if b == f64::NEG_INFINITY {
            return Ok(b);
        }
        Ok(b + self.harmonic_part(z)?)
    }

    pub fn log_modulus_many(&self, pts: &[Complex64]) -> Result<Vec<f64>> {
        pts.par_iter().map(|&z| self.log_modulus(z)).collect()
    }

    /// `log|f|` on the pseudohyperbolic circle `ρ(z, center) = e^{-L}` in direction `angle`.
    /// A zero at `center` contributes exactly `-m·L`, so the value is meaningful even when
    /// the radius underflows.
    pub fn log_modulus_on_circle(&self, center: DiskPoint, log_inv_radius: f64, angle: f64) -> Result<f64> {
        let c = center.z();
        let r = (-log_inv_radius).exp();
        let w = Complex64::from_polar(r, angle);
        let z = (w + c) / (Complex64::new(1.0, 0.0) + c.conj() * w);
        let mut b = 0.0;
        for a in &self.zero_set.zeros {
            let term = if a.point == center { -log_inv_radius } else { log_rho_c(z, a.point.z()) };
            b += a.mult as f64 * term;
        }
        Ok(b + self.harmonic_part(z)?)
    }
}

/// Dyadic centers up to `depth`; zeros at the centers strictly inside the horocycle `P_z(1) > c`;
/// harmonic part `P_z(1)`.
pub fn example1_witness(c_horocycle: f64, depth: u32) -> Result<NevanlinnaWitness> {
    if !(c_horocycle > 0.0) {
        return Err(invalid(format!("horocycle constant {c_horocycle} must be positive")));
    }
    let lambda = generate_dyadic_centers(depth)?;
    let zeros: Vec<Zero> = lambda.points.iter().filter(|p| poisson_at_one(p.z()) > c_horocycle).map(|&point| Zero { point, mult: 1 }).collect();
    let mut per_level = vec![0u64; depth as usize + 1];
    for z in &zeros {
        per_level[dyadic_square_of(z.point).n as usize] += 1;
    }
    NevanlinnaWitness::build(zeros, 1.0, None, depth, "example1", serde_json::json!({ "c": c_horocycle, "zeros_per_level": per_level }))
}

/// Zeros on the separated subsequence where `P_λ(1) ≥ 1`, multiplicity `floor(P_λ(1))`;
/// harmonic part `C·P_z(1)` with `C = ½·((1-δ)/(1+δ))·log(1/δ)`. Requires a convergent
/// Hayman–Lyons sum at `1`.
pub fn appendix_witness(c: &Configuration, delta: f64, depth: u32) -> Result<NevanlinnaWitness> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta={delta} not in (0,1)")));
    }
    let hl = hayman_lyons_test(c, 0.0, delta, depth)?;
    if hl.classification != Classification::Convergent {
        return Err(Error::Inapplicable(format!("Hayman-Lyons sum at 1 is {:?}, the Blaschke sum of the zeros would diverge", hl.classification)));
    }
    let sep = max_separated_subsequence(c, delta)?;
    let zeros: Vec<Zero> = sep
        .points
        .iter()
        .filter_map(|&point| {
            let p = poisson_at_one(point.z());
            (p >= 1.0).then(|| Zero { point, mult: p.floor() as u32 })
        })
        .collect();
    let scale = appendix_constant(delta);
    NevanlinnaWitness::build(zeros, scale, None, depth, "appendix", serde_json::json!({ "delta": delta, "C": scale }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub constant: f64,
    /// Smallest constant making `h ≤ 0` on the samples, before doubling.
    pub minimal: f64,
    pub worst_sample: (f64, f64),
    pub samples: usize,
}

/// Boundary points of `𝒟_ψ = {0 < y < ψ(|x|)} ∪ {y ≥ 1}` for `x > 0` (the setup is even in `x`).
pub fn halfplane_boundary_samples(psi: &Profile, depth: u32) -> Result<Vec<HalfPlanePoint>> {
    let cap = |x: f64| psi.eval_unbounded(x).min(1.0);
    let y_min = (-(depth as f64) - 4.0).exp2();
    let x_lo = psi.inverse(y_min.min(psi.eval_unbounded(1.0))).unwrap_or(1e-12).max(1e-12);
    let x_hi = 4.0;
    let graph = CALIBRATION_SAMPLES * 3 / 4;
    let mut out = Vec::with_capacity(CALIBRATION_SAMPLES);
    for j in 0..graph {
        let x = x_lo * (x_hi / x_lo).powf(j as f64 / (graph - 1) as f64);
        let y = cap(x);
        if y > 0.0 && y < 1.0 {
            out.push(HalfPlanePoint::new(x, y)?);
        }
    }
    let line = CALIBRATION_SAMPLES - out.len();
    for j in 0..line {
        out.push(HalfPlanePoint::new(x_hi * j as f64 / (line - 1).max(1) as f64, 1.0)?);
    }
    Ok(out)
}

/// Smallest `C` with `P_w(0) ≤ C·h_ψ(w)` on the boundary samples, doubled for margin.
/// The condition is linear in `C`, so the smallest value is the largest ratio.
pub fn calibrate_halfplane_constant(psi: &Profile, depth: u32) -> Result<Calibration> {
    let samples = halfplane_boundary_samples(psi, depth)?;
    let unit = HalfPlanePart { psi: psi.clone(), constant: 0.0 };
    let ratios: Vec<f64> = samples
        .par_iter()
        .map(|w| {
            let p = w.y / (PI * (w.x * w.x + w.y * w.y));
            Ok(p / unit.h_psi(*w)?)
        })
        .collect::<Result<_>>()?;
    let (i, minimal) = ratios.iter().copied().enumerate().fold((0, 0.0), |a, (i, r)| if r > a.1 { (i, r) } else { a });
    let worst = (samples[i].x, samples[i].y);
    let constant = 2.0 * minimal;
    if !(constant <= MAX_HALFPLANE_CONSTANT) {
        return Err(Error::Calibration(format!(
            "half-plane constant {constant} exceeds {MAX_HALFPLANE_CONSTANT}; worst boundary sample ({}, {})",
            worst.0, worst.1
        )));
    }
    Ok(Calibration { constant, minimal, worst_sample: worst, samples: samples.len() })
}

/// Membership in the transported approach region `{ψ(|x|) ≤ y < 1}` at `1`.
pub fn in_transported_region(psi: &Profile, z: Complex64) -> bool {
    let w = cayley(z);
    w.im < 1.0 && w.im >= psi.eval_unbounded(w.re.abs()).min(1.0)
}

/// Zeros on the points of `c` in the transported approach region at `1`; harmonic part
/// `P_w(0) - C·h_ψ(w)` at `w = cayley(z)`, i.e. `(1/π)·P_z(1) - C·h_ψ∘cayley`.
pub fn net_necessity_witness(psi: &Profile, c: &Configuration, depth: u32) -> Result<NevanlinnaWitness> {
    let cf = psi.class_f_test();
    if !cf.member {
        return Err(Error::Inapplicable(format!("profile {} is not in class F ({:?})", psi.label(), cf.verdict)));
    }
    let zeros: Vec<Zero> = c
        .points
        .iter()
        .filter(|p| dyadic_square_of(**p).n <= depth && in_transported_region(psi, p.z()))
        .map(|&point| Zero { point, mult: 1 })
        .collect();
    let per_level = blaschke_per_level(&ZeroSet::new(zeros.clone(), depth)?, depth);
    let tail = classify_tail(0, &per_level);
    if tail == Classification::Divergent {
        return Err(Error::Inapplicable("the configuration's Blaschke sum inside the approach region diverges".into()));
    }
    let cal = calibrate_halfplane_constant(psi, depth)?;
    let hp = HalfPlanePart { psi: psi.clone(), constant: cal.constant };
    NevanlinnaWitness::build(
        zeros,
        FRAC_1_PI,
        Some(hp),
        depth,
        "net-necessity",
        serde_json::json!({ "psi": psi.label(), "calibration": cal, "region_blaschke_tail": tail }),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplicityRule {
    /// `ceil(P_λ(1)/log(1/φ))` wherever `P_λ(1)` reaches the threshold.
    Ceil,
    /// `floor(P_λ(1)/log(1/φ))`, zeros only where it is at least 1.
    Floor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UdiskOptions {
    pub rule: MultiplicityRule,
    pub threshold: f64,
    /// Circle samples per disk used to calibrate the scale.
    pub per_disk: usize,
}

impl Default for UdiskOptions {
    fn default() -> Self {
        UdiskOptions { rule: MultiplicityRule::Ceil, threshold: DEFAULT_UDISK_THRESHOLD, per_disk: 8 }
    }
}

/// A point of `∪ D_λ^φ`: center index, `log(1/φ(1-|λ|))` and direction on the boundary circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskSample {
    pub index: usize,
    pub log_inv_radius: f64,
    pub angle: f64,
}

/// Zeros at the disk centers with multiplicity `m_λ ≈ P_λ(1)/log(1/φ(1-|λ|))`, harmonic part
/// `δ·P_z(1)` with `δ = ½·min(1, min -log|B|/P_z(1))` over circle samples of the zero-carrying disks.
/// Radii are taken from `φ` (in the log domain), so `c` only needs centers.
pub fn udisks_necessity_witness(phi: &Profile, c: &Configuration, depth: u32, opts: UdiskOptions) -> Result<NevanlinnaWitness> {
    let crit = udisks_sampling_criterion(phi, depth.max(1), 2.0)?;
    if crit.verdict != Verdict::NonSampling {
        return Err(Error::Inapplicable(format!("phi {} gives a sampling configuration ({:?})", phi.label(), crit.verdict)));
    }
    if !(opts.threshold > 0.0) {
        return Err(invalid("threshold must be positive"));
    }
    let mut zeros = Vec::new();
    let mut carriers = Vec::new();
    for (i, p) in c.points.iter().enumerate() {
        if dyadic_square_of(*p).n > depth {
            continue;
        }
        let l = log_inv(phi, 1.0 - p.abs());
        if !(l > 0.0) {
            return Err(Error::Precondition(format!("phi(1-|lambda|) must lie in (0,1) at point {i}")));
        }
        let pk = poisson_at_one(p.z());
        let m = match opts.rule {
            MultiplicityRule::Ceil if pk >= opts.threshold => (pk / l).ceil().max(1.0),
            MultiplicityRule::Ceil => 0.0,
            MultiplicityRule::Floor => (pk / l).floor(),
        };
        if m >= 1.0 {
            zeros.push(Zero { point: *p, mult: m as u32 });
            carriers.push((i, l));
        }
    }
    let mut w = NevanlinnaWitness::build(zeros, 0.0, None, depth, "udisks-necessity", serde_json::Value::Null)?;
    let samples: Vec<(usize, f64, f64)> =
        carriers.iter().flat_map(|&(i, l)| (0..opts.per_disk).map(move |j| (i, l, TAU * j as f64 / opts.per_disk as f64))).collect();
    // with zero scale the witness is log|B| alone
    let ratios: Vec<f64> = samples
        .par_iter()
        .map(|&(i, l, a)| {
            let b = w.log_modulus_on_circle(c.points[i], l, a)?;
            let pc = c.points[i].z();
            let r = (-l).exp();
            let z = (Complex64::from_polar(r, a) + pc) / (Complex64::new(1.0, 0.0) + pc.conj() * Complex64::from_polar(r, a));
            Ok(-b / poisson_at_one(z))
        })
        .collect::<Result<_>>()?;
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let delta = 0.5 * min_ratio.min(1.0);
    w.harmonic_scale = delta;
    w.meta.params = serde_json::json!({
        "phi": phi.label(),
        "rule": opts.rule,
        "threshold": opts.threshold,
        "delta": delta,
        "min_ratio": if min_ratio.is_finite() { serde_json::json!(min_ratio) } else { serde_json::json!("inf") },
        "calibration_samples": samples.len(),
    });
    Ok(w)
}

/// Deterministic sample of `count` points of `∪ D_λ^φ`: half on the disks with the largest
/// `P_λ(1)`, half strided over all disks, directions on a golden-ratio sequence.
pub fn udisk_samples(phi: &Profile, c: &Configuration, depth: u32, count: usize) -> Vec<DiskSample> {
    let idx: Vec<usize> = (0..c.len()).filter(|&i| dyadic_square_of(c.points[i]).n <= depth).collect();
    if idx.is_empty() || count == 0 {
        return Vec::new();
    }
    let mut by_p = idx.clone();
    by_p.sort_by(|&a, &b| poisson_at_one(c.points[b].z()).total_cmp(&poisson_at_one(c.points[a].z())).then(a.cmp(&b)));
    let half = count / 2;
    let mut chosen: Vec<usize> = by_p.iter().copied().cycle().take(half).collect();
    chosen.extend((0..count - half).map(|j| idx[j * idx.len() / (count - half)]));
    chosen
        .into_iter()
        .enumerate()
        .map(|(j, i)| DiskSample { index: i, log_inv_radius: log_inv(phi, 1.0 - c.points[i].abs()), angle: TAU * (j as f64 * 0.618_033_988_749_894_9).fract() })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub construction: String,
    pub sup_on_lambda: f64,
    pub argsup: Option<DiskPoint>,
    pub bound: f64,
    pub slack: f64,
    pub bounded_on_lambda: bool,
    /// Points of the configuration that are zeros of the witness (value `-∞`), excluded from the sup.
    pub zeros_excluded: usize,
    pub points_checked: usize,
    /// `(r, (1-r)·log|f(r ζ)|)` toward the boundary atom.
    pub radial_scan: Vec<(f64, f64)>,
    pub unbounded_radially_indicator: f64,
    pub truncation_depth: u32,
    pub blaschke_sum: f64,
}

fn summarize(w: &NevanlinnaWitness, values: &[(DiskPoint, f64)], bound: f64, r_grid: &[f64]) -> Result<WitnessReport> {
    let mut sup = f64::NEG_INFINITY;
    let mut argsup = None;
    let mut zeros_excluded = 0;
    for &(p, v) in values {
        if v == f64::NEG_INFINITY {
            zeros_excluded += 1;
        } else if v > sup {
            sup = v;
            argsup = Some(p);
        }
    }
    let slack = w.slack();
    let zeta = Complex64::from_polar(1.0, w.radial_angle());
    let radial_scan: Vec<(f64, f64)> = r_grid
        .par_iter()
        .map(|&r| {
            if !(0.0..1.0).contains(&r) {
                return Err(invalid(format!("radial grid value {r} not in [0,1)")));
            }
            Ok((r, (1.0 - r) * w.log_modulus(zeta * r)?))
        })
        .collect::<Result<_>>()?;
    let indicator = radial_scan.iter().map(|x| x.1).filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    Ok(WitnessReport {
        construction: w.meta.construction.clone(),
        sup_on_lambda: sup,
        argsup,
        bound,
        slack,
        bounded_on_lambda: sup <= bound + slack,
        zeros_excluded,
        points_checked: values.len(),
        radial_scan,
        unbounded_radially_indicator: if indicator.is_finite() { indicator } else { 0.0 },
        truncation_depth: w.depth,
        blaschke_sum: w.blaschke_sum(),
    })
}

/// Checks `log|f(λ)| ≤ bound + slack` on the points of `c` and scans `(1-r)·log|f|` radially.
pub fn verify_witness(w: &NevanlinnaWitness, c: &Configuration, bound: f64, r_grid: &[f64]) -> Result<WitnessReport> {
    let pts = c.complex_points();
    let vals = w.log_modulus_many(&pts)?;
    let pairs: Vec<(DiskPoint, f64)> = c.points.iter().copied().zip(vals).collect();
    summarize(w, &pairs, bound, r_grid)
}

/// The same check on circle samples of disks instead of configuration points.
pub fn verify_witness_on_disks(w: &NevanlinnaWitness, c: &Configuration, samples: &[DiskSample], bound: f64, r_grid: &[f64]) -> Result<WitnessReport> {
    let pairs: Vec<(DiskPoint, f64)> = samples
        .par_iter()
        .map(|s| Ok((c.points[s.index], w.log_modulus_on_circle(c.points[s.index], s.log_inv_radius, s.angle)?)))
        .collect::<Result<_>>()?;
    summarize(w, &pairs, bound, r_grid)
}

/// `1 - 2^{-j/4}` for `j = 1..=4·levels`: a radial grid refining toward the boundary.
pub fn dyadic_radial_grid(levels: u32) -> Vec<f64> {
    (1..=4 * levels).map(|j| 1.0 - (-(j as f64) / 4.0).exp2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::horocycle_disk;

    #[test]
    fn appendix_constant_value() {
        assert!((appendix_constant(0.5) - 2f64.ln() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn example1_zero_set_is_horocycle_interior() {
        let w = example1_witness(1.0, 8).unwrap();
        let lambda = generate_dyadic_centers(8).unwrap();
        let disk = horocycle_disk(1.0).unwrap();
        let inside: Vec<DiskPoint> = lambda.points.iter().copied().filter(|p| disk.contains(p.z())).collect();
        let zeros: Vec<DiskPoint> = w.zero_set.zeros.iter().map(|z| z.point).collect();
        assert_eq!(inside, zeros);
    }

    #[test]
    fn appendix_rejects_divergent_input() {
        let c = generate_dyadic_centers(8).unwrap();
        assert!(matches!(appendix_witness(&c, 0.5, 8), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn appendix_on_negative_radius() {
        let pts: Vec<DiskPoint> = (1..=20).map(|n| DiskPoint::new(-(1.0 - (-(n as f64)).exp2()), 0.0).unwrap()).collect();
        let c = Configuration::from_points(pts, 20, "custom");
        let w = appendix_witness(&c, 0.5, 20).unwrap();
        assert!(w.zero_set.is_empty());
        let r = verify_witness(&w, &c, 2.0 * w.harmonic_scale, &dyadic_radial_grid(20)).unwrap();
        assert!(r.bounded_on_lambda);
        assert!(r.unbounded_radially_indicator > 0.2);
    }

    #[test]
    fn empty_witness_is_trivial() {
        let w = NevanlinnaWitness::build(Vec::new(), 0.0, None, 4, "empty", serde_json::Value::Null).unwrap();
        let c = generate_dyadic_centers(4).unwrap();
        let r = verify_witness(&w, &c, 0.0, &[0.5, 0.9]).unwrap();
        assert!(r.bounded_on_lambda);
        assert_eq!(r.unbounded_radially_indicator, 0.0);
        assert_eq!(r.slack, 0.0);
    }

    #[test]
    fn circle_evaluation_matches_direct() {
        let w = example1_witness(1.0, 6).unwrap();
        let center = w.zero_set.zeros[3].point;
        let l = 3.0;
        let v = w.log_modulus_on_circle(center, l, 1.0).unwrap();
        let c = center.z();
        let a = Complex64::from_polar((-l).exp(), 1.0);
        let z = (a + c) / (Complex64::new(1.0, 0.0) + c.conj() * a);
        assert!((v - w.log_modulus(z).unwrap()).abs() < 1e-9);
    }
}
