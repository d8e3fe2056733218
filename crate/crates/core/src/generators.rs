//! Deterministic point configurations: dyadic centers, g-nets, discretized rings,
//! uniformly dense disks, and maximal separated subsequences.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    combine, dyadic_center, dyadic_square_of, hyperbolic_to_euclidean_c, rho_c, DiskPoint, DyadicIndex, PolarGrid,
};
use crate::profiles::Profile;

/// Separation parameter of the base net under uniformly dense disks.
pub const UDISK_BASE_G: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

/// Points of the disk with optional multiplicities and pseudohyperbolic disk radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration", into = "RawConfiguration")]
pub struct Configuration {
    pub points: Vec<DiskPoint>,
    pub multiplicities: Option<Vec<u32>>,
    pub radii: Option<Vec<f64>>,
    pub depth: u32,
    pub meta: Meta,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    re: f64,
    im: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mult: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawConfiguration {
    #[serde(alias = "zeros")]
    points: Vec<RawEntry>,
    depth: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radii: Option<Vec<f64>>,
    #[serde(default = "default_meta")]
    meta: Meta,
}

fn default_meta() -> Meta {
    Meta { kind: "custom".into(), params: serde_json::Value::Null }
}

impl TryFrom<RawConfiguration> for Configuration {
    type Error = Error;
    fn try_from(raw: RawConfiguration) -> Result<Self> {
        let points = raw.points.iter().map(|e| DiskPoint::new(e.re, e.im)).collect::<Result<Vec<_>>>()?;
        let has_mult = raw.points.iter().any(|e| e.mult.is_some());
        let multiplicities = has_mult.then(|| raw.points.iter().map(|e| e.mult.unwrap_or(1)).collect());
        Configuration::new(points, multiplicities, raw.radii, raw.depth, raw.meta)
    }
}

impl From<Configuration> for RawConfiguration {
    fn from(c: Configuration) -> Self {
        let points = c
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| RawEntry { re: p.re(), im: p.im(), mult: c.multiplicities.as_ref().map(|m| m[i]) })
            .collect();
        RawConfiguration { points, depth: c.depth, radii: c.radii, meta: c.meta }
    }
}

impl Configuration {
    pub fn new(points: Vec<DiskPoint>, multiplicities: Option<Vec<u32>>, radii: Option<Vec<f64>>, depth: u32, meta: Meta) -> Result<Self> {
        if let Some(m) = &multiplicities {
            if m.len() != points.len() {
                return Err(invalid("multiplicity list length differs from point count"));
            }
            if m.iter().any(|&x| x == 0) {
                return Err(invalid("multiplicities must be at least 1"));
            }
        }
        if let Some(r) = &radii {
            if r.len() != points.len() {
                return Err(invalid("radius list length differs from point count"));
            }
            if r.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                return Err(invalid("disk radii must lie in (0,1)"));
            }
        }
        Ok(Configuration { points, multiplicities, radii, depth, meta })
    }

    pub fn from_points(points: Vec<DiskPoint>, depth: u32, kind: &str) -> Self {
        Configuration { points, multiplicities: None, radii: None, depth, meta: Meta { kind: kind.into(), params: serde_json::Value::Null } }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn multiplicity(&self, i: usize) -> u32 {
        self.multiplicities.as_ref().map_or(1, |m| m[i])
    }

    pub fn complex_points(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.z()).collect()
    }

    pub fn grid(&self) -> PolarGrid {
        PolarGrid::from_points(self.complex_points(), self.depth.max(1) + 1)
    }

    pub fn rotated(&self, theta: f64) -> Configuration {
        Configuration { points: self.points.iter().map(|p| p.rotate(theta)).collect(), ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configurations serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Indices of points, grouped by dyadic square.
    pub fn by_square(&self) -> BTreeMap<DyadicIndex, Vec<usize>> {
        let mut m: BTreeMap<DyadicIndex, Vec<usize>> = BTreeMap::new();
        for (i, p) in self.points.iter().enumerate() {
            m.entry(dyadic_square_of(*p)).or_default().push(i);
        }
        m
    }
}

/// Number of points (with multiplicity) in each dyadic square.
pub fn counts_per_square(c: &Configuration) -> BTreeMap<DyadicIndex, u64> {
    let mut m = BTreeMap::new();
    for (i, p) in c.points.iter().enumerate() {
        *m.entry(dyadic_square_of(*p)).or_insert(0) += c.multiplicity(i) as u64;
    }
    m
}

pub fn generate_dyadic_centers(depth: u32) -> Result<Configuration> {
    if depth < 1 || depth > 30 {
        return Err(invalid(format!("depth {depth} must lie in 1..=30")));
    }
    let points = (1..=depth).flat_map(|n| (0..(1u64 << n)).map(move |k| dyadic_center(DyadicIndex { n, k }))).collect();
    let mut c = Configuration::from_points(points, depth, "dyadic");
    c.meta.params = serde_json::json!({ "depth": depth });
    Ok(c)
}

/// Angular count on the circle `|z| = r` keeping neighbours at pseudohyperbolic distance `≥ s`.
fn ring_count(r: f64, s: f64) -> usize {
    let half_sin = s * (1.0 - r * r) / (2.0 * r * (1.0 - s * s).sqrt());
    if half_sin >= 1.0 {
        return 1;
    }
    let step = 2.0 * half_sin.asin();
    ((TAU / step).floor() as usize).max(1)
}

/// Rows of points aligned with dyadic levels `1..=depth`.
///
/// Level `n` spans a hyperbolic width `W = artanh(1 - 2^{-n-1}) - artanh(1 - 2^{-n})` and receives
/// `max(1, round(W / artanh(s_n)))` equally spaced rows. Within a row neighbours are exactly
/// `s_n`-separated; between rows the separation is `s_n` up to the rounding of the row count.
fn level_rows(sep: impl Fn(u32) -> Result<f64>, depth: u32) -> Result<Vec<DiskPoint>> {
    let mut pts = Vec::new();
    let mut row = 0usize;
    for n in 1..=depth {
        let s = sep(n)?;
        let t = (-(n as f64)).exp2();
        let d_lo = (1.0 - t).atanh();
        let d_hi = (1.0 - t / 2.0).atanh();
        let w = d_hi - d_lo;
        let rows = ((w / s.atanh()).round() as usize).max(1);
        for j in 0..rows {
            let r = (d_lo + (j as f64 + 0.5) * w / rows as f64).tanh();
            let m = ring_count(r, s);
            let offset = if row % 2 == 1 { 0.5 } else { 0.0 };
            for i in 0..m {
                pts.push(DiskPoint::from_polar(r, TAU * (i as f64 + offset) / m as f64)?);
            }
            row += 1;
            if pts.len() > 50_000_000 {
                return Err(Error::Guard("configuration would exceed 5e7 points".into()));
            }
        }
    }
    Ok(pts)
}

/// A g-net on levels `1..=depth`, built from level-aligned rows at separation `combine(g_n, g_n)`,
/// `g_n = g(2^{-n})`. Packing holds up to row-count rounding on levels with several rows;
/// coarse levels (`g_n` above about `0.17`) carry a single row. [`verify_net`] reports both constants.
pub fn generate_g_net(g: &Profile, depth: u32) -> Result<Configuration> {
    if depth < 1 {
        return Err(invalid("depth must be at least 1"));
    }
    let pts = level_rows(
        |n| {
            let t = (-(n as f64)).exp2();
            let gv = g.eval_unbounded(t);
            if !(gv > 0.0 && gv < 1.0) {
                return Err(invalid(format!("g({t}) = {gv} must lie in (0,1) to separate")));
            }
            Ok(combine(gv, gv))
        },
        depth,
    )?;
    let mut c = Configuration::from_points(pts, depth, "net");
    c.meta.params = serde_json::json!({ "g": g.label(), "depth": depth });
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Spacing {
    /// `ε_n = scale · b^n`
    Geometric { b: f64 },
    /// `ε_n = scale · n^{-s}`
    Power { s: f64 },
}

/// Rings at `r_n = 1 - q^n` with angular spacing driven by `ε_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub q: f64,
    pub spacing: Spacing,
    #[serde(default = "one")]
    pub scale: f64,
    pub depth: u32,
}

fn one() -> f64 {
    1.0
}

impl RingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(invalid(format!("ring ratio q={} not in (0,1)", self.q)));
        }
        if !(self.scale > 0.0) {
            return Err(invalid("spacing scale must be positive"));
        }
        match self.spacing {
            Spacing::Geometric { b } if !(b > 0.0 && b < 1.0) => Err(invalid(format!("geometric spacing b={b} not in (0,1)"))),
            Spacing::Power { s } if !(s > 0.0) => Err(invalid(format!("power spacing s={s} must be positive"))),
            _ if self.depth < 1 => Err(invalid("depth must be at least 1")),
            _ => Ok(()),
        }
    }

    pub fn radius(&self, n: u32) -> f64 {
        1.0 - self.q.powi(n as i32)
    }

    pub fn epsilon(&self, n: u32) -> f64 {
        self.scale
            * match self.spacing {
                Spacing::Geometric { b } => b.powi(n as i32),
                Spacing::Power { s } => (n as f64).powf(-s),
            }
    }

    pub fn ring_count(&self, n: u32) -> u64 {
        (1.0 / ((1.0 - self.radius(n)) * self.epsilon(n))).floor() as u64
    }

    /// Dyadic levels hit by more than one ring.
    pub fn crowded_levels(&self) -> Vec<u32> {
        let mut per: BTreeMap<u32, u32> = BTreeMap::new();
        for n in 1..=self.depth {
            let r = self.radius(n);
            if r >= 0.5 {
                *per.entry(dyadic_square_of(DiskPoint::from_polar(r, 0.0).expect("ring radius < 1")).n).or_insert(0) += 1;
            }
        }
        per.into_iter().filter(|(_, c)| *c > 1).map(|(l, _)| l).collect()
    }
}

/// `λ_{n,j} = r_n · exp(2πi·j·(1-r_n)ε_n)` for `0 ≤ j < floor(1/((1-r_n)ε_n))`.
pub fn generate_rings(spec: &RingSpec) -> Result<Configuration> {
    spec.validate()?;
    let mut pts = Vec::new();
    for n in 1..=spec.depth {
        let r = spec.radius(n);
        let cnt = spec.ring_count(n);
        if cnt == 0 {
            return Err(invalid(format!("ring {n} would be empty")));
        }
        if cnt > 50_000_000 {
            return Err(Error::Guard(format!("ring {n} would hold {cnt} points")));
        }
        let step = TAU * (1.0 - r) * spec.epsilon(n);
        for j in 0..cnt {
            pts.push(DiskPoint::from_polar(r, j as f64 * step)?);
        }
    }
    let mut c = Configuration::from_points(pts, spec.depth, "rings");
    c.meta.params = serde_json::to_value(spec).expect("ring specs serialize");
    if !spec.crowded_levels().is_empty() {
        c.meta.params["crowded_levels"] = serde_json::to_value(spec.crowded_levels()).expect("levels serialize");
    }
    Ok(c)
}

/// The separated base net of [`generate_udisks`]: one row per level at separation `combine(0.3, 0.3)`.
pub fn generate_udisk_base(base_depth: u32) -> Result<Configuration> {
    if base_depth < 1 {
        return Err(invalid("depth must be at least 1"));
    }
    let s = combine(UDISK_BASE_G, UDISK_BASE_G);
    let mut c = Configuration::from_points(level_rows(|_| Ok(s), base_depth)?, base_depth, "udisk-base");
    c.meta.params = serde_json::json!({ "depth": base_depth, "base_separation": s });
    Ok(c)
}

/// Base net with disk radii `φ(1 - |λ|)`; fails where `φ` underflows.
pub fn generate_udisks(base_depth: u32, phi: &Profile) -> Result<Configuration> {
    let s = combine(UDISK_BASE_G, UDISK_BASE_G);
    let pts = generate_udisk_base(base_depth)?.points;
    let mut radii = Vec::with_capacity(pts.len());
    for p in &pts {
        let r = phi.eval_unbounded(1.0 - p.abs());
        if !(r > 0.0 && r < 1.0) {
            return Err(invalid(format!("phi({}) = {r} must lie in (0,1)", 1.0 - p.abs())));
        }
        radii.push(r);
    }
    let mut c = Configuration::new(pts, None, Some(radii), base_depth, Meta { kind: "disks".into(), params: serde_json::Value::Null })?;
    c.meta.params = serde_json::json!({ "phi": phi.label(), "depth": base_depth, "base_separation": s });
    Ok(c)
}

/// Greedy maximal `δ`-separated subsequence in order of increasing modulus, then angle.
pub fn max_separated_subsequence(c: &Configuration, delta: f64) -> Result<Configuration> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta={delta} not in (0,1)")));
    }
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (c.points[a], c.points[b]);
        pa.abs().total_cmp(&pb.abs()).then(pa.arg().total_cmp(&pb.arg())).then(a.cmp(&b))
    });
    let mut grid = PolarGrid::new(c.depth.max(1) + 2);
    let mut kept = Vec::new();
    for i in order {
        let z = c.points[i].z();
        let e = hyperbolic_to_euclidean_c(z, delta);
        let mut clash = false;
        grid.visit_candidates(e.center, e.radius, |id| {
            if !clash && rho_c(z, grid.point(id)) < delta {
                clash = true;
            }
        });
        if !clash {
            grid.insert(z);
            kept.push(i);
        }
    }
    Ok(select(c, &kept))
}

/// Sub-configuration of the given indices, in the given order.
pub fn select(c: &Configuration, idx: &[usize]) -> Configuration {
    Configuration {
        points: idx.iter().map(|&i| c.points[i]).collect(),
        multiplicities: c.multiplicities.as_ref().map(|m| idx.iter().map(|&i| m[i]).collect()),
        radii: c.radii.as_ref().map(|r| idx.iter().map(|&i| r[i]).collect()),
        depth: c.depth,
        meta: c.meta.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetVerification {
    /// `min ρ(λ, λ') / combine(g(λ), g(λ'))` over neighbouring pairs; `≥ 1` means disjoint disks.
    pub packing: f64,
    /// The same minimum restricted to pairs whose first point lies at each level.
    pub packing_per_level: Vec<(u32, f64)>,
    /// `max_z min_λ ρ(z, λ)/g(1-|λ|)` over the sample cloud.
    pub covering: f64,
    pub points: usize,
}

/// Packing and covering constants of a configuration with respect to `g`,
/// covering measured on `samples` deterministic points of the generated annulus.
pub fn verify_net(c: &Configuration, g: &Profile, samples: usize) -> NetVerification {
    let grid = c.grid();
    let gv: Vec<f64> = c.points.iter().map(|p| g.eval_unbounded(1.0 - p.abs())).collect();
    let mut per: BTreeMap<u32, f64> = BTreeMap::new();
    for (i, p) in c.points.iter().enumerate() {
        let reach = combine(gv[i], gv[i]);
        let e = hyperbolic_to_euclidean_c(p.z(), reach);
        let slot = per.entry(dyadic_square_of(*p).n).or_insert(f64::INFINITY);
        grid.visit_candidates(e.center, e.radius, |j| {
            if j != i {
                let r = rho_c(p.z(), c.points[j].z()) / combine(gv[i], gv[j]);
                *slot = slot.min(r);
            }
        });
    }
    let packing = per.values().copied().fold(f64::INFINITY, f64::min);
    let r_end = 1.0 - (-(c.depth as f64) - 1.0).exp2();
    let mut covering: f64 = 0.0;
    for s in 0..samples {
        // low-discrepancy sweep of the annulus 1/2 ≤ |z| ≤ r_end, away from the outer edge
        let u = (s as f64 + 0.5) / samples as f64;
        let v = (s as f64 * 0.618_033_988_749_894_9).fract();
        let t_min = (2.0 * (1.0 - r_end)).min(0.5);
        let t = (0.5f64.ln() + u * (t_min.ln() - 0.5f64.ln())).exp();
        let z = Complex64::from_polar(1.0 - t, TAU * v);
        let mut best = f64::INFINITY;
        let mut radius = 0.05 * t;
        while best.is_infinite() && radius < 2.0 {
            grid.visit_candidates(z, radius, |j| {
                let r = rho_c(z, c.points[j].z()) / gv[j];
                best = best.min(r);
            });
            radius *= 2.0;
        }
        covering = covering.max(best);
    }
    NetVerification { packing, packing_per_level: per.into_iter().collect(), covering, points: c.len() }
}
