//! Zero sets, log-domain Blaschke products and the shadow majorant.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{log_rho_c, privalov_shadow, DiskPoint, DyadicIndex, PolarGrid};
use crate::kernels::arc_harmonic_measure;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    #[serde(flatten)]
    pub point: DiskPoint,
    pub mult: u32,
}

/// A finite truncation of a zero sequence, labelled with its generation depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    pub depth: u32,
}

impl ZeroSet {
    pub fn new(zeros: Vec<Zero>, depth: u32) -> Result<Self> {
        if zeros.iter().any(|z| z.mult == 0) {
            return Err(invalid("zero multiplicities must be at least 1"));
        }
        Ok(ZeroSet { zeros, depth })
    }

    pub fn simple(points: impl IntoIterator<Item = DiskPoint>, depth: u32) -> Self {
        ZeroSet { zeros: points.into_iter().map(|point| Zero { point, mult: 1 }).collect(), depth }
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.zeros.iter().map(|z| z.mult as u64).sum()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let z: ZeroSet = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        ZeroSet::new(z.zeros, z.depth)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("zero sets serialize")
    }
}

/// `Σ m_a log ρ(z, a)`, `-∞` exactly at a zero.
pub fn blaschke_log_modulus(zs: &ZeroSet, z: DiskPoint) -> f64 {
    log_modulus_c(zs, z.z())
}

pub fn log_modulus_c(zs: &ZeroSet, z: Complex64) -> f64 {
    let mut s = 0.0;
    for a in &zs.zeros {
        let l = log_rho_c(z, a.point.z());
        if l == f64::NEG_INFINITY {
            return l;
        }
        s += a.mult as f64 * l;
    }
    s
}

/// Batch evaluation, parallel over points; output order follows input order.
pub fn log_modulus_batch(zs: &ZeroSet, pts: &[Complex64]) -> Vec<f64> {
    pts.par_iter().map(|&z| log_modulus_c(zs, z)).collect()
}

pub fn blaschke_sum(zs: &ZeroSet) -> f64 {
    zs.zeros.iter().map(|a| a.mult as f64 * (1.0 - a.point.abs())).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialScan {
    pub values: Vec<(f64, f64)>,
    pub max_value: f64,
    /// Grid radii that hit a zero exactly (value `-∞`).
    pub hits: Vec<f64>,
}

/// `(1 - r)·log|B(rζ)|` along the ray toward `e^{iθ}`.
pub fn radial_growth_scan(zs: &ZeroSet, theta: f64, r_grid: &[f64]) -> Result<RadialScan> {
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) || r_grid.iter().any(|&r| !(0.0..1.0).contains(&r)) {
        return Err(invalid("radial grid must be strictly increasing in [0,1)"));
    }
    let pts: Vec<Complex64> = r_grid.iter().map(|&r| Complex64::from_polar(r, theta)).collect();
    let logs = log_modulus_batch(zs, &pts);
    let values: Vec<(f64, f64)> = r_grid.iter().zip(&logs).map(|(&r, &l)| (r, if l == f64::NEG_INFINITY { l } else { (1.0 - r) * l })).collect();
    let hits = values.iter().filter(|v| v.1 == f64::NEG_INFINITY).map(|v| v.0).collect();
    let max_value = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(RadialScan { values, max_value, hits })
}

/// `P[c0 · Σ m_a χ_{I_a}](z)`, the Poisson integral of the weighted shadow indicator.
pub fn quasibounded_majorant_hb(zs: &ZeroSet, c0: f64, z: DiskPoint) -> Result<f64> {
    if !(c0 > 0.0) {
        return Err(invalid("c0 must be positive"));
    }
    let mut s = 0.0;
    for a in &zs.zeros {
        let arc = privalov_shadow(a.point)?;
        s += a.mult as f64 * arc_harmonic_measure(z.z(), arc);
    }
    Ok(c0 * s)
}

/// Far part `-Σ_{ρ(z,a) ≥ δ} m_a log ρ(z,a)` of `-log|B(z)|`.
pub fn far_part(zs: &ZeroSet, z: Complex64, delta: f64) -> f64 {
    let ld = delta.ln();
    zs.zeros
        .iter()
        .map(|a| {
            let l = log_rho_c(z, a.point.z());
            if l >= ld {
                -(a.mult as f64) * l
            } else {
                0.0
            }
        })
        .sum()
}

/// Smallest `c0` with `-log|B| ≤ H_B - Σ_{near} m log ρ` on the cloud.
///
/// The inequality is linear in `c0`, so the minimum is the largest ratio of the far
/// part to the unit majorant over the cloud. Returns `(c0, worst point index)`.
pub fn calibrate_c0(zs: &ZeroSet, cloud: &[DiskPoint], delta: f64) -> Result<(f64, Option<usize>)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta must lie in (0,1)"));
    }
    let ratios: Vec<Result<f64>> = cloud
        .par_iter()
        .map(|&z| {
            let far = far_part(zs, z.z(), delta);
            if far <= 0.0 {
                return Ok(0.0);
            }
            let unit = quasibounded_majorant_hb(zs, 1.0, z)?;
            if unit <= 0.0 {
                return Err(Error::Calibration(format!("majorant vanishes at ({}, {}) while the far part is {far}", z.re(), z.im())));
            }
            Ok(far / unit)
        })
        .collect();
    let mut best = (0.0, None);
    for (i, r) in ratios.into_iter().enumerate() {
        let r = r?;
        if r > best.0 {
            best = (r, Some(i));
        }
    }
    Ok(best)
}

/// Dyadic counts `N_{n,k}` of a Blaschke distribution.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BlaschkeDistribution {
    pub counts: BTreeMap<DyadicIndex, u64>,
    pub depth: u32,
}

#[derive(Serialize, Deserialize)]
struct CountEntry {
    n: u32,
    k: u64,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct DistributionJson {
    depth: u32,
    counts: Vec<CountEntry>,
}

impl BlaschkeDistribution {
    pub fn zero(depth: u32) -> Self {
        BlaschkeDistribution { counts: BTreeMap::new(), depth }
    }

    pub fn get(&self, i: DyadicIndex) -> u64 {
        self.counts.get(&i).copied().unwrap_or(0)
    }

    pub fn level_total(&self, n: u32) -> u64 {
        self.counts.range(DyadicIndex { n, k: 0 }..DyadicIndex { n: n + 1, k: 0 }).map(|(_, c)| c).sum()
    }

    /// `Σ 2^{-n} N_{n,k}`.
    pub fn blaschke_sum(&self) -> f64 {
        self.counts.iter().map(|(i, &c)| c as f64 * (-(i.n as f64)).exp2()).sum()
    }

    /// Tally of a zero set by dyadic square (levels beyond `depth` are dropped).
    pub fn from_zero_set(zs: &ZeroSet, depth: u32) -> Self {
        let mut counts = BTreeMap::new();
        for z in &zs.zeros {
            let i = crate::geometry::dyadic_square_of(z.point);
            if i.n <= depth {
                *counts.entry(i).or_insert(0) += z.mult as u64;
            }
        }
        BlaschkeDistribution { counts, depth }
    }

    /// All zeros stacked on the `k = 0` column with `count_per_level` each.
    pub fn column(depth: u32, count_per_level: u64) -> Self {
        let counts = (1..=depth).map(|n| (DyadicIndex { n, k: 0 }, count_per_level)).filter(|(_, c)| *c > 0).collect();
        BlaschkeDistribution { counts, depth }
    }

    /// `floor(intensity · 2^n / n²)` zeros per level spread over random squares; summable by construction.
    pub fn random_summable(depth: u32, intensity: f64, seed: u64) -> Self {
        let mut counts = BTreeMap::new();
        for n in 1..=depth {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n as u64);
            let total = (intensity * (n as f64).exp2() / (n * n) as f64).floor() as u64;
            for _ in 0..total {
                let k = rng.gen_range(0..(1u64 << n));
                *counts.entry(DyadicIndex { n, k }).or_insert(0) += 1;
            }
        }
        BlaschkeDistribution { counts, depth }
    }

    /// Restriction to the union of neighbourhoods of the given squares.
    pub fn restricted_to_neighbourhoods(&self, squares: &[DyadicIndex]) -> Self {
        let mut keep = std::collections::BTreeSet::new();
        for s in squares {
            keep.extend(s.neighbourhood());
        }
        let counts = self.counts.iter().filter(|(i, _)| keep.contains(*i)).map(|(i, c)| (*i, *c)).collect();
        BlaschkeDistribution { counts, depth: self.depth }
    }

    pub fn to_json(&self) -> String {
        let j = DistributionJson {
            depth: self.depth,
            counts: self.counts.iter().map(|(i, &count)| CountEntry { n: i.n, k: i.k, count }).collect(),
        };
        serde_json::to_string_pretty(&j).expect("distributions serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: DistributionJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut counts = BTreeMap::new();
        for e in j.counts {
            let i = DyadicIndex::new(e.n, e.k)?;
            if e.count > 0 {
                *counts.entry(i).or_insert(0) += e.count;
            }
        }
        Ok(BlaschkeDistribution { counts, depth: j.depth })
    }
}

/// Index of zeros for repeated local queries.
pub fn zero_grid(zs: &ZeroSet, max_level: u32) -> PolarGrid {
    PolarGrid::from_points(zs.zeros.iter().map(|z| z.point.z()), max_level)
}
