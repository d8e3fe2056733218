//! The vulnerability functional
//! `w_{n,k}(Λ, N) = sup_{a_1..a_N ∈ Q̄^δ} inf_{λ ∈ Λ∩Q̄} Σ_j log 1/ρ(λ, a_j)`:
//! exact inner minimum, grid oracle, multistart optimizer and the asymptotic bound checks.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::log_inv;
use crate::error::{invalid, Error, Result};
use crate::generators::{generate_g_net, generate_udisks, Configuration};
use crate::geometry::{combine, in_dilated_square, log_rho_c, square_pseudo_diameter, DiskPoint, DyadicIndex, DEFAULT_DILATION};
use crate::profiles::Profile;

/// Largest `N` the optimizer accepts.
pub const MAX_N: usize = 8;
pub const BRUTE_MAX_N: usize = 2;
pub const BRUTE_MAX_GRID: usize = 64;
/// Boundary samples per disk when a disk configuration is turned into an instance.
pub const DISK_BOUNDARY_SAMPLES: usize = 32;

/// Serializes non-finite values as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod serde_extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            Repr::Num(*v).serialize(s)
        } else if v.is_nan() {
            Repr::Text("nan".into()).serialize(s)
        } else if *v > 0.0 {
            Repr::Text("inf".into()).serialize(s)
        } else {
            Repr::Text("-inf".into()).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("bad number {t}"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VulnerabilityInstance {
    pub lambda_points: Vec<DiskPoint>,
    pub square: DyadicIndex,
    pub delta: f64,
    #[serde(rename = "N")]
    pub n_zeros: usize,
}

impl VulnerabilityInstance {
    pub fn new(lambda_points: Vec<DiskPoint>, square: DyadicIndex, delta: f64, n_zeros: usize) -> Result<Self> {
        if lambda_points.is_empty() {
            return Err(invalid("instance needs at least one lambda point"));
        }
        if !(delta >= 0.0 && delta < 1.0) {
            return Err(invalid(format!("delta={delta} not in [0,1)")));
        }
        Ok(VulnerabilityInstance { lambda_points, square, delta, n_zeros })
    }

    /// Instance built from the points of `c` in the closed square, with the default dilation.
    /// Disk configurations contribute boundary circles: `log 1/ρ(·, a)` is superharmonic, so its
    /// minimum over a closed disk is attained on the boundary.
    pub fn from_configuration(c: &Configuration, square: DyadicIndex, n_zeros: usize) -> Result<Self> {
        let mut pts = Vec::new();
        for (i, p) in c.points.iter().enumerate() {
            if !in_dilated_square(square, 0.0, *p) {
                continue;
            }
            match &c.radii {
                Some(radii) => pts.extend(disk_boundary(*p, radii[i], DISK_BOUNDARY_SAMPLES)),
                None => pts.push(*p),
            }
        }
        VulnerabilityInstance::new(pts, square, DEFAULT_DILATION, n_zeros)
    }

    pub fn in_region(&self, a: DiskPoint) -> bool {
        in_dilated_square(self.square, self.delta, a)
    }

    /// Bound `max ρ` over pairs in the placement region: two dilations around the square diameter.
    pub fn region_diameter_bound(&self) -> f64 {
        combine(combine(self.delta, square_pseudo_diameter(self.square, 64)), self.delta)
    }

    /// `N · log(1/δ_max)`: every term of every placement is at least `log(1/δ_max)`.
    pub fn lower_bound(&self) -> f64 {
        self.n_zeros as f64 * (1.0 / self.region_diameter_bound()).ln()
    }

    fn polar_box(&self) -> (f64, f64, f64, f64) {
        let (r_lo, r_hi, t0, t1) = self.square.bounds();
        let f = (1.0 + self.delta) / (1.0 - self.delta);
        let lo = if self.square.n == 0 { 0.0 } else { (1.0 - (1.0 - r_lo) * f).max(0.0) };
        let hi = 1.0 - (1.0 - r_hi) / f;
        if self.square.n == 0 || lo < 0.05 {
            return (lo, hi, 0.0, TAU);
        }
        // euclidean radius of D(z, δ) is at most 2δ(1-|z|)/(1-δ²), and 1-|z| ≤ 1-lo
        let spread = (1.05 * 2.0 * self.delta * (1.0 - lo) / ((1.0 - self.delta * self.delta) * lo)).min(std::f64::consts::PI);
        (lo, hi, t0 - spread, t1 + spread)
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> DiskPoint {
        let (lo, hi, t0, t1) = self.polar_box();
        loop {
            let r = lo + (hi - lo) * rng.gen::<f64>();
            let t = t0 + (t1 - t0) * rng.gen::<f64>();
            if let Ok(p) = DiskPoint::from_polar(r, t) {
                if self.in_region(p) {
                    return p;
                }
            }
        }
    }
}

fn disk_boundary(center: DiskPoint, radius: f64, count: usize) -> Vec<DiskPoint> {
    let c = center.z();
    (0..count)
        .filter_map(|j| {
            let w = Complex64::from_polar(radius, TAU * j as f64 / count as f64);
            // the pseudohyperbolic circle of radius `radius` around `c`
            DiskPoint::from_complex((w + c) / (Complex64::new(1.0, 0.0) + c.conj() * w)).ok()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Brute,
    Multistart,
    /// `N = 0` or `N ≥ #Λ`: the value is known exactly.
    ShortCircuit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VulnerabilityResult {
    #[serde(with = "serde_extended_f64")]
    pub value: f64,
    pub argmax_placement: Vec<DiskPoint>,
    pub method: SearchMethod,
    /// Index of the lambda point attaining the inner minimum for the reported placement.
    pub certificate: Option<usize>,
    pub lower_bound: f64,
    pub evaluations: u64,
}

/// Inner minimum over `λ` of `Σ_j log 1/ρ(λ, a_j)`, returning `(value, argmin)`.
fn inner(lambda: &[DiskPoint], placement: &[DiskPoint]) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for (i, l) in lambda.iter().enumerate() {
        let s: f64 = placement.iter().map(|a| -log_rho_c(l.z(), a.z())).sum();
        if s < best {
            best = s;
            arg = i;
        }
    }
    (best, arg)
}

pub fn w_for_placement(inst: &VulnerabilityInstance, placement: &[DiskPoint]) -> Result<f64> {
    if let Some(a) = placement.iter().find(|a| !inst.in_region(**a)) {
        return Err(invalid(format!("placement point ({}, {}) lies outside the dilated square", a.re(), a.im())));
    }
    // summing in a canonical order makes the value exactly permutation invariant
    let mut sorted = placement.to_vec();
    sorted.sort_by(|a, b| a.re().total_cmp(&b.re()).then(a.im().total_cmp(&b.im())));
    Ok(if sorted.is_empty() { 0.0 } else { inner(&inst.lambda_points, &sorted).0 })
}

fn short_circuit(inst: &VulnerabilityInstance) -> Option<VulnerabilityResult> {
    let lb = inst.lower_bound();
    if inst.n_zeros == 0 {
        return Some(VulnerabilityResult { value: 0.0, argmax_placement: Vec::new(), method: SearchMethod::ShortCircuit, certificate: None, lower_bound: 0.0, evaluations: 0 });
    }
    let mut distinct = inst.lambda_points.clone();
    distinct.sort_by(|a, b| a.re().total_cmp(&b.re()).then(a.im().total_cmp(&b.im())));
    distinct.dedup();
    if inst.n_zeros >= distinct.len() {
        let mut placement = distinct.clone();
        placement.resize(inst.n_zeros, distinct[0]);
        return Some(VulnerabilityResult { value: f64::INFINITY, argmax_placement: placement, method: SearchMethod::ShortCircuit, certificate: None, lower_bound: lb, evaluations: 0 });
    }
    None
}

/// Exhaustive search over a polar grid of the placement region (`N ≤ 2`, grid ≤ 64).
pub fn w_brute_force(inst: &VulnerabilityInstance, grid_resolution: usize) -> Result<VulnerabilityResult> {
    if inst.n_zeros > BRUTE_MAX_N || grid_resolution > BRUTE_MAX_GRID || grid_resolution < 2 {
        return Err(Error::Guard(format!(
            "brute force needs N <= {BRUTE_MAX_N} and 2 <= grid <= {BRUTE_MAX_GRID} (got N={}, grid={grid_resolution}); use the optimizer",
            inst.n_zeros
        )));
    }
    if let Some(r) = short_circuit(inst) {
        return Ok(r);
    }
    let (lo, hi, t0, t1) = inst.polar_box();
    let m = grid_resolution;
    // log(1-r) spacing keeps the resolution uniform in the hyperbolic radial direction
    let (u_lo, u_hi) = ((1.0 - lo).ln(), (1.0 - hi).ln());
    let mut cand = Vec::new();
    for i in 0..m {
        let r = 1.0 - (u_lo + (u_hi - u_lo) * i as f64 / (m - 1) as f64).exp();
        for j in 0..m {
            let t = t0 + (t1 - t0) * j as f64 / (m - 1) as f64;
            if let Ok(p) = DiskPoint::from_polar(r, t) {
                if inst.in_region(p) {
                    cand.push(p);
                }
            }
        }
    }
    if cand.is_empty() {
        return Err(Error::Guard("grid produced no placement candidates".into()));
    }
    let table: Vec<Vec<f64>> = cand.iter().map(|a| inst.lambda_points.iter().map(|l| -log_rho_c(l.z(), a.z())).collect()).collect();
    let (value, placement, evals) = if inst.n_zeros == 1 {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, row) in table.iter().enumerate() {
            let v = row.iter().copied().fold(f64::INFINITY, f64::min);
            if v > best.0 {
                best = (v, i);
            }
        }
        (best.0, vec![cand[best.1]], cand.len() as u64)
    } else {
        // pairs g ≤ h; order of evaluation is fixed so ties resolve to the first pair found
        let best = (0..cand.len())
            .into_par_iter()
            .map(|g| {
                let mut b = (f64::NEG_INFINITY, g, g);
                for h in g..cand.len() {
                    let v = table[g].iter().zip(&table[h]).map(|(x, y)| x + y).fold(f64::INFINITY, f64::min);
                    if v > b.0 {
                        b = (v, g, h);
                    }
                }
                b
            })
            .reduce(|| (f64::NEG_INFINITY, usize::MAX, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a });
        let n = cand.len() as u64;
        (best.0, vec![cand[best.1], cand[best.2]], n * (n + 1) / 2)
    };
    let certificate = Some(inner(&inst.lambda_points, &placement).1);
    Ok(VulnerabilityResult { value, argmax_placement: placement, method: SearchMethod::Brute, certificate, lower_bound: inst.lower_bound(), evaluations: evals })
}

/// Move `a` by pseudohyperbolic distance `s` in direction `psi`.
fn step(a: DiskPoint, s: f64, psi: f64) -> Option<DiskPoint> {
    let w = Complex64::from_polar(s, psi);
    let z = a.z();
    DiskPoint::from_complex((w + z) / (Complex64::new(1.0, 0.0) + z.conj() * w)).ok()
}

const DIRECTIONS: usize = 8;
const INITIAL_STEP: f64 = 0.25;
const FINAL_STEP: f64 = 1e-7;
/// Softmin temperatures; the last stage (0) optimizes the exact minimum.
const TEMPERATURES: [f64; 5] = [0.1, 0.01, 1e-3, 1e-4, 0.0];

/// `-τ log Σ exp(-f_λ/τ)`: a smooth lower approximation of `min_λ f_λ` (exact at τ = 0).
fn softmin(f: &[f64], tau: f64) -> f64 {
    let m = f.iter().copied().fold(f64::INFINITY, f64::min);
    if tau == 0.0 || !m.is_finite() {
        return m;
    }
    m - tau * f.iter().map(|x| (-(x - m) / tau).exp()).sum::<f64>().ln()
}

fn terms_for(lambda: &[DiskPoint], a: DiskPoint) -> Vec<f64> {
    lambda.iter().map(|l| -log_rho_c(l.z(), a.z())).collect()
}

fn pattern_search(inst: &VulnerabilityInstance, mut placement: Vec<DiskPoint>, evals: &mut u64) -> (f64, Vec<DiskPoint>) {
    let lambda = &inst.lambda_points;
    let mut terms: Vec<Vec<f64>> = placement.iter().map(|a| terms_for(lambda, *a)).collect();
    let mut trial = vec![0.0; lambda.len()];
    let mut s0 = INITIAL_STEP;
    for tau in TEMPERATURES {
        // per-λ sums are rebuilt at each stage so incremental updates cannot drift
        let mut sums: Vec<f64> = (0..lambda.len()).map(|i| terms.iter().map(|t| t[i]).sum()).collect();
        let mut value = softmin(&sums, tau);
        let mut s = s0;
        let mut offset = 0.0;
        let stop = if tau == 0.0 { FINAL_STEP } else { (tau * 1e-2).max(FINAL_STEP) };
        while s > stop {
            let mut improved = false;
            for j in 0..placement.len() {
                for d in 0..DIRECTIONS {
                    let psi = offset + TAU * d as f64 / DIRECTIONS as f64;
                    let Some(cand) = step(placement[j], s, psi) else { continue };
                    if !inst.in_region(cand) {
                        continue;
                    }
                    *evals += 1;
                    let new_terms = terms_for(lambda, cand);
                    for i in 0..lambda.len() {
                        trial[i] = if new_terms[i].is_infinite() || terms[j][i].is_infinite() {
                            // recompute exactly when an infinite term enters or leaves
                            terms.iter().enumerate().map(|(jj, t)| if jj == j { new_terms[i] } else { t[i] }).sum()
                        } else {
                            sums[i] - terms[j][i] + new_terms[i]
                        };
                    }
                    let v = softmin(&trial, tau);
                    if v > value {
                        value = v;
                        improved = true;
                        placement[j] = cand;
                        terms[j] = new_terms;
                        std::mem::swap(&mut sums, &mut trial);
                    }
                }
            }
            if !improved {
                s *= 0.5;
                // rotate the stencil so ridges are approached from new directions
                offset += TAU / (3.0 * DIRECTIONS as f64);
            }
        }
        s0 = (stop * 16.0).min(INITIAL_STEP);
    }
    (inner(lambda, &placement).0, placement)
}

fn placement_key(p: &[DiskPoint]) -> Vec<(f64, f64)> {
    p.iter().map(|a| (a.re(), a.im())).collect()
}

/// Multistart pattern search; start `i` draws from ChaCha stream `i` of `seed`.
pub fn w_optimize(inst: &VulnerabilityInstance, multistart_count: usize, seed: u64) -> Result<VulnerabilityResult> {
    if inst.n_zeros > MAX_N {
        return Err(Error::Guard(format!("N={} exceeds the supported maximum {MAX_N}", inst.n_zeros)));
    }
    if multistart_count == 0 {
        return Err(invalid("at least one start is required"));
    }
    if let Some(r) = short_circuit(inst) {
        return Ok(r);
    }
    let runs: Vec<(f64, Vec<DiskPoint>, u64)> = (0..multistart_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let start: Vec<DiskPoint> = (0..inst.n_zeros).map(|_| inst.random_point(&mut rng)).collect();
            let mut evals = 1;
            let (v, p) = pattern_search(inst, start, &mut evals);
            (v, p, evals)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.2).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| {
            let better = b.0 > a.0 || (b.0 == a.0 && placement_key(&b.1).partial_cmp(&placement_key(&a.1)) == Some(std::cmp::Ordering::Less));
            if better { b } else { a }
        })
        .expect("at least one start");
    let certificate = Some(inner(&inst.lambda_points, &best.1).1);
    Ok(VulnerabilityResult { value: best.0, argmax_placement: best.1, method: SearchMethod::Multistart, certificate, lower_bound: inst.lower_bound(), evaluations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub k: u64,
    /// Points (or boundary samples) of the configuration in the square.
    pub lambda_count: usize,
    #[serde(rename = "N")]
    pub n_zeros: usize,
    #[serde(with = "serde_extended_f64")]
    pub value: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub level: u32,
    pub samples: Vec<BoundSample>,
    /// `max value / N` for nets, `max value / (N log 1/φ(2^{-n}))` for disks.
    pub max_ratio: f64,
    pub min_ratio: f64,
}

fn sample_squares(level: u32, trials: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    let count = 1u64 << level;
    if trials as u64 >= count {
        return (0..count).collect();
    }
    let mut ks: Vec<u64> = Vec::new();
    while ks.len() < trials {
        let k = rng.gen_range(0..count);
        if !ks.contains(&k) {
            ks.push(k);
        }
    }
    ks.sort_unstable();
    ks
}

fn run_bound(c: &Configuration, level: u32, ks: &[u64], n_for: impl Fn(usize) -> usize, norm: f64, starts: usize, seed: u64) -> Result<BoundCheck> {
    let mut samples = Vec::new();
    for &k in ks {
        let square = DyadicIndex::new(level, k)?;
        let probe = VulnerabilityInstance::from_configuration(c, square, 0)?;
        let points = c.points.iter().filter(|p| in_dilated_square(square, 0.0, **p)).count();
        let n = n_for(points).min(MAX_N);
        let inst = VulnerabilityInstance { n_zeros: n, ..probe };
        let (value, ratio) = if n == 0 {
            (0.0, 0.0)
        } else {
            let r = w_optimize(&inst, starts, seed ^ k)?;
            (r.value, r.value / (n as f64 * norm))
        };
        samples.push(BoundSample { k, lambda_count: inst.lambda_points.len(), n_zeros: n, value, ratio });
    }
    let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let min_ratio = samples.iter().filter(|s| s.n_zeros > 0).map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    Ok(BoundCheck { level, samples, max_ratio, min_ratio })
}

/// Runs the optimizer on `trials` random squares of a generated `g`-net at `level` and reports
/// `value / N`. `N = min(8, floor(ε·M_{n,k}))` unless `fixed_n` is given, which must itself
/// satisfy `N ≤ ε·M_{n,k}` on every sampled square.
pub fn w_gnet_bound_check(g: &Profile, level: u32, eps: f64, fixed_n: Option<usize>, trials: usize, starts: usize, seed: u64) -> Result<BoundCheck> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps={eps} not in (0,1)")));
    }
    let c = generate_g_net(g, level)?;
    let ks = sample_squares(level, trials, seed);
    if let Some(n) = fixed_n {
        for &k in &ks {
            let square = DyadicIndex::new(level, k)?;
            let m = c.points.iter().filter(|p| in_dilated_square(square, 0.0, **p)).count();
            if n as f64 > eps * m as f64 {
                return Err(Error::Precondition(format!("N={n} exceeds eps*M = {eps}*{m} in square ({level},{k})")));
            }
        }
    }
    run_bound(&c, level, &ks, |m| fixed_n.unwrap_or((eps * m as f64).floor() as usize), 1.0, starts, seed)
}

/// Disk analog: uniformly dense disks `Λ(φ)` at `level`, `N = min(8, count)` zeros per square,
/// reporting `value / (N log 1/φ(2^{-n}))`.
pub fn w_udisks_bound_check(phi: &Profile, level: u32, trials: usize, starts: usize, seed: u64) -> Result<BoundCheck> {
    let c = generate_udisks(level, phi)?;
    let ks = sample_squares(level, trials, seed);
    let norm = log_inv(phi, (-(level as f64)).exp2());
    run_bound(&c, level, &ks, |m| m, norm, starts, seed)
}

/// `-log` of the pseudohyperbolic midpoint distance: the value for two points and `N = 1`
/// when the midpoint lies in the placement region.
pub fn two_point_closed_form(l1: DiskPoint, l2: DiskPoint) -> f64 {
    let rho = crate::geometry::pseudo_distance(l1, l2);
    -(rho / (1.0 + (1.0 - rho * rho).sqrt())).ln()
}
