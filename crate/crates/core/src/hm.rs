//! Walk-on-spheres estimates of the harmonic measure of the outer circle `|z| = R_n` in
//! `D(0, R_n)` minus the excised disks `D_λ^φ`, and the matching `ε_n` product.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::log_inv;
use crate::error::{invalid, Error, Result};
use crate::generators::{generate_dyadic_centers, generate_udisk_base, Configuration};
use crate::geometry::hyperbolic_to_euclidean_c;
use crate::profiles::Profile;

pub const MAX_STEPS: u64 = 1_000_000;
/// Outer shell width as a fraction of `1 - R_n`.
pub const DEFAULT_SHELL_FRACTION: f64 = 1e-4;
/// Capture distance relative to a disk's own radius; keeps tiny disks from acting as shell-sized balls.
pub const CAPTURE_REL: f64 = 1e-3;
pub const MAX_EXPERIMENT_LEVEL: u32 = 10;
pub const EPS_PRODUCT_CONSTANTS: [f64; 3] = [0.1, 0.5, 1.0];

const GRID_CELLS: usize = 512;
const MAX_RINGS: i64 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

impl Circle {
    fn center(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// Uniform cell grid over the square `[-R, R]²`; each disk is listed in every cell its bounding box meets.
#[derive(Clone, Debug)]
struct DiskIndex {
    r: f64,
    h: f64,
    cells: Vec<Vec<u32>>,
}

impl DiskIndex {
    fn new(r: f64, disks: &[Circle]) -> Self {
        let h = 2.0 * r / GRID_CELLS as f64;
        let mut cells = vec![Vec::new(); GRID_CELLS * GRID_CELLS];
        let idx = |v: f64| (((v + r) / h).floor() as i64).clamp(0, GRID_CELLS as i64 - 1) as usize;
        for (i, d) in disks.iter().enumerate() {
            for cx in idx(d.x - d.radius)..=idx(d.x + d.radius) {
                for cy in idx(d.y - d.radius)..=idx(d.y + d.radius) {
                    cells[cy * GRID_CELLS + cx].push(i as u32);
                }
            }
        }
        DiskIndex { r, h, cells }
    }

    fn cell_of(&self, v: f64) -> i64 {
        ((v + self.r) / self.h).floor() as i64
    }

    /// `(lower bound on the distance to the nearest disk, nearest disk if found within the bound)`.
    fn nearest(&self, disks: &[Circle], p: Complex64, limit: f64) -> (f64, Option<usize>) {
        let (ci, cj) = (self.cell_of(p.re), self.cell_of(p.im));
        let n = GRID_CELLS as i64;
        let mut best = f64::INFINITY;
        let mut arg = None;
        for k in 0..=MAX_RINGS {
            for dj in -k..=k {
                for di in -k..=k {
                    if di.abs() != k && dj.abs() != k {
                        continue;
                    }
                    let (x, y) = (ci + di, cj + dj);
                    if x < 0 || y < 0 || x >= n || y >= n {
                        continue;
                    }
                    for &id in &self.cells[(y * n + x) as usize] {
                        let d = disks[id as usize];
                        let dist = (p - d.center()).norm() - d.radius;
                        if dist < best {
                            best = dist;
                            arg = Some(id as usize);
                        }
                    }
                }
            }
            // disks not met yet lie in cells of ring k+1 or beyond, at distance ≥ k·h
            let unseen = k as f64 * self.h;
            if k >= 1 && (best <= unseen || unseen >= limit) {
                return if best <= unseen { (best, arg) } else { (unseen, None) };
            }
        }
        // nothing close: the exact scan is rare and buys a long step
        disks
            .iter()
            .enumerate()
            .map(|(i, d)| ((p - d.center()).norm() - d.radius, Some(i)))
            .fold((f64::INFINITY, None), |a, b| if b.0 < a.0 { b } else { a })
    }
}

#[derive(Clone, Debug)]
pub struct ExcisedDomain {
    pub outer_radius: f64,
    pub excised: Vec<Circle>,
    /// Disks whose closure contains the start point `0`; left out of the domain.
    pub skipped_containing_start: usize,
    index: DiskIndex,
}

impl ExcisedDomain {
    pub fn new(outer_radius: f64, excised: Vec<Circle>) -> Result<Self> {
        if !(outer_radius > 0.0 && outer_radius < 1.0) {
            return Err(invalid(format!("outer radius {outer_radius} not in (0,1)")));
        }
        if let Some(d) = excised.iter().find(|d| !(d.center().norm() + d.radius < outer_radius) || !(d.radius >= 0.0)) {
            return Err(invalid(format!("excised disk at ({}, {}) radius {} is not inside the outer disk", d.x, d.y, d.radius)));
        }
        let index = DiskIndex::new(outer_radius, &excised);
        Ok(ExcisedDomain { outer_radius, excised, skipped_containing_start: 0, index })
    }
}

/// `R_n = 1 - K^{-n}` and every disk `D_λ^φ` of `c` whose euclidean closure lies in `D(0, R_n)`,
/// except disks containing `0`.
pub fn build_domain(c: &Configuration, n: u32, k: f64) -> Result<ExcisedDomain> {
    if !(k > 1.0) {
        return Err(invalid(format!("K={k} must exceed 1")));
    }
    let radii = c.radii.as_ref().ok_or_else(|| Error::Precondition("configuration has no disk radii".into()))?;
    let outer = 1.0 - k.powi(-(n as i32));
    if !(outer > 0.0) {
        return Err(invalid(format!("R_n = {outer} must be positive")));
    }
    let mut excised = Vec::new();
    let mut skipped = 0;
    for (p, &r) in c.points.iter().zip(radii) {
        let e = hyperbolic_to_euclidean_c(p.z(), r);
        if e.center.norm() + e.radius < outer {
            if e.center.norm() <= e.radius {
                skipped += 1;
            } else {
                excised.push(Circle { x: e.center.re, y: e.center.im, radius: e.radius });
            }
        }
    }
    let mut d = ExcisedDomain::new(outer, excised)?;
    d.skipped_containing_start = skipped;
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HMEstimate {
    pub escape_probability: f64,
    pub stderr: f64,
    pub walks: u64,
    pub escaped: u64,
    pub captured: u64,
    pub stalled: u64,
    pub seed: u64,
    pub eps_shell: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Escaped,
    Captured,
    Stalled,
}

fn walk(d: &ExcisedDomain, start: Complex64, eps: f64, rng: &mut ChaCha8Rng) -> Outcome {
    let mut p = start;
    for _ in 0..MAX_STEPS {
        let outer = d.outer_radius - p.norm();
        if outer < eps {
            return Outcome::Escaped;
        }
        let (inner, nearest) = d.index.nearest(&d.excised, p, outer);
        if let Some(i) = nearest {
            if inner < eps.min(CAPTURE_REL * d.excised[i].radius) {
                return Outcome::Captured;
            }
        }
        let step = outer.min(inner);
        p += Complex64::from_polar(step, TAU * rng.gen::<f64>());
    }
    Outcome::Stalled
}

/// Walk-on-spheres from `start`; walk `i` uses ChaCha stream `i` of `seed`.
pub fn estimate_escape_from(d: &ExcisedDomain, start: Complex64, walks: u64, seed: u64, eps_shell: f64) -> Result<HMEstimate> {
    if walks == 0 {
        return Err(invalid("walks must be at least 1"));
    }
    if !(eps_shell > 0.0) {
        return Err(invalid(format!("eps_shell={eps_shell} must be positive")));
    }
    if !(start.norm() < d.outer_radius) || d.excised.iter().any(|c| (start - c.center()).norm() <= c.radius) {
        return Err(invalid("start point must lie in the domain"));
    }
    let (escaped, captured, stalled) = (0..walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            match walk(d, start, eps_shell, &mut rng) {
                Outcome::Escaped => (1u64, 0u64, 0u64),
                Outcome::Captured => (0, 1, 0),
                Outcome::Stalled => (0, 0, 1),
            }
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let p = escaped as f64 / walks as f64;
    Ok(HMEstimate { escape_probability: p, stderr: (p * (1.0 - p) / walks as f64).sqrt(), walks, escaped, captured, stalled, seed, eps_shell })
}

pub fn estimate_escape(d: &ExcisedDomain, walks: u64, seed: u64, eps_shell: f64) -> Result<HMEstimate> {
    estimate_escape_from(d, Complex64::new(0.0, 0.0), walks, seed, eps_shell)
}

/// `log(R/s)/log(R/r)`: probability that Brownian motion from radius `s` reaches `|z| = r` before `|z| = R`.
pub fn annulus_capture_probability(r_inner: f64, r_outer: f64, s: f64) -> f64 {
    (r_outer / s).ln() / (r_outer / r_inner).ln()
}

/// `Π_{j=1}^{n} (1 - C/log(1/φ(K^{-j})))`.
pub fn epsilon_product(phi: &Profile, c: f64, k: f64, n: u32) -> Result<f64> {
    if !(c > 0.0) || !(k > 1.0) {
        return Err(invalid(format!("need C > 0 and K > 1 (got C={c}, K={k})")));
    }
    let mut prod = 1.0;
    for j in 1..=n {
        let f = 1.0 - c / log_inv(phi, k.powi(-(j as i32)));
        if !(f > 0.0) {
            return Err(Error::Precondition(format!("factor {j} is {f}: C={c} too large for {}", phi.label())));
        }
        prod *= f;
    }
    Ok(prod)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: u32,
    pub outer_radius: f64,
    pub excised_count: usize,
    pub skipped_containing_start: usize,
    pub estimate: HMEstimate,
    /// `(C, ε_n product)`, `None` where a factor is not positive.
    pub eps_products: Vec<(f64, Option<f64>)>,
}

/// Uniformly dense base sequence carrying the disks of the experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentBase {
    /// One point per dyadic square (separation 1/3).
    #[default]
    DyadicCenters,
    /// The 0.3-net used by the disk generator (about 3.4 points per square).
    Net,
}

impl ExperimentBase {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dyadic" | "dyadic-centers" => Ok(Self::DyadicCenters),
            "net" => Ok(Self::Net),
            _ => Err(invalid(format!("unknown base {s:?} (expected dyadic or net)"))),
        }
    }
}

/// Disk configuration `Λ(φ)` on the chosen base to `depth`, with radii from `φ`.
/// Radii that underflow are dropped: such disks are below any capture resolution.
pub fn udisks_for_experiment(phi: &Profile, depth: u32, base: ExperimentBase) -> Result<Configuration> {
    let base = match base {
        ExperimentBase::DyadicCenters => generate_dyadic_centers(depth)?,
        ExperimentBase::Net => generate_udisk_base(depth)?,
    };
    let mut pts = Vec::new();
    let mut radii = Vec::new();
    for p in &base.points {
        let l = log_inv(phi, 1.0 - p.abs());
        if !(l > 0.0) {
            return Err(Error::Precondition(format!("phi({}) must lie in (0,1)", 1.0 - p.abs())));
        }
        let r = (-l).exp();
        if r > 0.0 {
            pts.push(*p);
            radii.push(r);
        }
    }
    let mut c = Configuration::new(pts, None, Some(radii), depth, base.meta.clone())?;
    c.meta.kind = "disks".into();
    c.meta.params = serde_json::json!({ "phi": phi.label(), "depth": depth, "base": base.meta.kind });
    Ok(c)
}

pub fn sampling_vs_escape_experiment(phi: &Profile, levels: &[u32], walks: u64, seed: u64, k: f64, base: ExperimentBase) -> Result<Vec<ExperimentRow>> {
    if walks == 0 {
        return Err(invalid("walks must be at least 1"));
    }
    let Some(&top) = levels.iter().max() else { return Err(invalid("no levels given")) };
    if top > MAX_EXPERIMENT_LEVEL {
        return Err(Error::Guard(format!("levels above {MAX_EXPERIMENT_LEVEL} are too costly")));
    }
    // disks inside D(0, R_n) sit at levels below n·log2(K)
    let depth = ((top as f64) * k.log2()).ceil().max(1.0) as u32;
    let c = udisks_for_experiment(phi, depth, base)?;
    let mut rows = Vec::new();
    for &n in levels {
        let d = build_domain(&c, n, k)?;
        let eps = DEFAULT_SHELL_FRACTION * (1.0 - d.outer_radius);
        let estimate = estimate_escape(&d, walks, seed, eps)?;
        let eps_products = EPS_PRODUCT_CONSTANTS.iter().map(|&cc| (cc, epsilon_product(phi, cc, k, n).ok())).collect();
        rows.push(ExperimentRow { n, outer_radius: d.outer_radius, excised_count: d.excised.len(), skipped_containing_start: d.skipped_containing_start, estimate, eps_products });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_domain_always_escapes() {
        let d = ExcisedDomain::new(0.9, Vec::new()).unwrap();
        let e = estimate_escape(&d, 200, 1, 1e-5).unwrap();
        assert_eq!(e.escape_probability, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn annulus_oracle() {
        let d = ExcisedDomain::new(0.9, vec![Circle { x: 0.0, y: 0.0, radius: 0.1 }]).unwrap();
        let s = 0.3;
        let e = estimate_escape_from(&d, Complex64::new(s, 0.0), 20_000, 3, 1e-5).unwrap();
        let want = 1.0 - annulus_capture_probability(0.1, 0.9, s);
        let se = (want * (1.0 - want) / 20_000f64).sqrt();
        assert!((e.escape_probability - want).abs() < 3.0 * se, "{} vs {want}", e.escape_probability);
        assert_eq!(e.escaped + e.captured + e.stalled, 20_000);
    }

    #[test]
    fn epsilon_product_examples() {
        let t = Profile::power(1.0, 1.0).unwrap();
        assert!((epsilon_product(&t, 1e-12, 2.0, 10).unwrap() - 1.0).abs() < 1e-10);
        let p = epsilon_product(&t, 0.5, 2.0, 10).unwrap();
        let want: f64 = (1..=10).map(|j| 1.0 - 0.5 / (j as f64 * 2f64.ln())).product();
        assert!((p - want).abs() < 1e-14);
        assert!(epsilon_product(&t, 1.0, 2.0, 3).is_err());
    }

    #[test]
    fn walks_zero_rejected() {
        let t = Profile::power(1.0, 1.0).unwrap();
        assert!(sampling_vs_escape_experiment(&t, &[3], 0, 1, 2.0, ExperimentBase::default()).is_err());
    }

    #[test]
    fn build_domain_examples() {
        let t = Profile::power(1.0, 1.0).unwrap();
        let c = udisks_for_experiment(&t, 6, ExperimentBase::DyadicCenters).unwrap();
        assert!(build_domain(&c, 1, 2.0).unwrap().excised.is_empty());
        let d = build_domain(&c, 4, 2.0).unwrap();
        assert!(!d.excised.is_empty());
        for e in &d.excised {
            assert!(e.x.hypot(e.y) + e.radius < d.outer_radius);
        }
    }

    #[test]
    fn base_names_parse() {
        assert_eq!(ExperimentBase::parse("dyadic").unwrap(), ExperimentBase::DyadicCenters);
        assert_eq!(ExperimentBase::parse("net").unwrap(), ExperimentBase::Net);
        assert!(ExperimentBase::parse("grid").is_err());
    }
}
