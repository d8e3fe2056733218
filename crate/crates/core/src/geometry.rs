//! Pseudohyperbolic geometry of the unit disk and its dyadic (Whitney) decomposition.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::profiles::Profile;

/// Default pseudohyperbolic dilation used for placement regions.
pub const DEFAULT_DILATION: f64 = 0.2;

/// Normalize an angle to `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed angular difference `a - b` reduced to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// A point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct DiskPoint {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPoint {
    re: f64,
    im: f64,
}

impl TryFrom<RawPoint> for DiskPoint {
    type Error = Error;
    fn try_from(p: RawPoint) -> Result<Self> {
        DiskPoint::new(p.re, p.im)
    }
}

impl From<DiskPoint> for RawPoint {
    fn from(p: DiskPoint) -> Self {
        RawPoint { re: p.re, im: p.im }
    }
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) || re * re + im * im >= 1.0 {
            return Err(Error::OutsideDisk { re, im });
        }
        Ok(DiskPoint { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::OutsideDisk { re: r * theta.cos(), im: r * theta.sin() });
        }
        Self::new(r * theta.cos(), r * theta.sin())
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Argument in `[0, 2π)`.
    pub fn arg(&self) -> f64 {
        normalize_angle(self.im.atan2(self.re))
    }

    pub fn rotate(&self, theta: f64) -> DiskPoint {
        let w = self.z() * Complex64::from_polar(1.0, theta);
        DiskPoint { re: w.re, im: w.im }
    }
}

/// `|1 - conj(w) z|^2 - |z - w|^2 = (1-|z|^2)(1-|w|^2)`, so this is `1 - ρ(z,w)^2` computed without cancellation.
pub fn one_minus_rho_sq(z: Complex64, w: Complex64) -> f64 {
    let den = (Complex64::new(1.0, 0.0) - w.conj() * z).norm_sqr();
    (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()) / den
}

/// Pseudohyperbolic distance on raw complex numbers (callers guarantee `|z|,|w| < 1`).
pub fn rho_c(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm();
    let den = (Complex64::new(1.0, 0.0) - z * w.conj()).norm();
    (num / den).min(1.0)
}

/// `ln ρ(z, w)`, `-∞` when the points coincide.
pub fn log_rho_c(z: Complex64, w: Complex64) -> f64 {
    let q = one_minus_rho_sq(z, w);
    if q < 0.5 {
        0.5 * (-q).ln_1p()
    } else {
        let num = (z - w).norm();
        if num == 0.0 {
            f64::NEG_INFINITY
        } else {
            (num / (Complex64::new(1.0, 0.0) - z * w.conj()).norm()).ln()
        }
    }
}

pub fn pseudo_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    rho_c(z.z(), w.z())
}

/// The automorphism `z ↦ (z - a)/(1 - conj(a) z)`.
pub fn mobius(a: DiskPoint, z: DiskPoint) -> DiskPoint {
    mobius_rot(a, z, 0.0)
}

/// The automorphism `z ↦ e^{iθ}(z - a)/(1 - conj(a) z)`.
pub fn mobius_rot(a: DiskPoint, z: DiskPoint, theta: f64) -> DiskPoint {
    let w = mobius_c(a.z(), z.z()) * Complex64::from_polar(1.0, theta);
    // |w| < 1 holds mathematically; clamp guards against rounding at |w| ≈ 1.
    clamp_into_disk(w)
}

pub fn mobius_c(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

pub(crate) fn clamp_into_disk(w: Complex64) -> DiskPoint {
    let r = w.norm();
    if r < 1.0 {
        DiskPoint { re: w.re, im: w.im }
    } else {
        let s = (1.0 - f64::EPSILON) / r;
        DiskPoint { re: w.re * s, im: w.im * s }
    }
}

/// `(a + b)/(1 + ab)`: the pseudohyperbolic triangle bound composition.
pub fn combine(a: f64, b: f64) -> f64 {
    (a + b) / (1.0 + a * b)
}

/// A pseudohyperbolic disk `{w : ρ(w, center) < radius}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicDisk {
    pub center: DiskPoint,
    pub radius: f64,
}

impl HyperbolicDisk {
    pub fn new(center: DiskPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(invalid(format!("hyperbolic radius {radius} not in (0,1)")));
        }
        Ok(HyperbolicDisk { center, radius })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EuclideanDisk {
    pub center: Complex64,
    pub radius: f64,
}

impl EuclideanDisk {
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

pub fn hyperbolic_to_euclidean(d: HyperbolicDisk) -> EuclideanDisk {
    hyperbolic_to_euclidean_c(d.center.z(), d.radius)
}

pub fn hyperbolic_to_euclidean_c(a: Complex64, r: f64) -> EuclideanDisk {
    let a2 = a.norm_sqr();
    let den = 1.0 - r * r * a2;
    EuclideanDisk { center: a * ((1.0 - r * r) / den), radius: r * (1.0 - a2) / den }
}

/// Index of the dyadic square `Q_{n,k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub n: u32,
    pub k: u64,
}

/// Deepest level representable without losing angular resolution.
pub const MAX_LEVEL: u32 = 48;

impl DyadicIndex {
    pub fn new(n: u32, k: u64) -> Result<Self> {
        if n > MAX_LEVEL {
            return Err(invalid(format!("level {n} exceeds {MAX_LEVEL}")));
        }
        if k >= 1u64 << n {
            return Err(invalid(format!("k={k} out of range for level {n}")));
        }
        Ok(DyadicIndex { n, k })
    }

    pub fn count_at(n: u32) -> u64 {
        1u64 << n
    }

    /// `(r_lo, r_hi, θ_lo, θ_hi)`; the root cell `n = 0` is the disk `|z| < 1/2`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let h = (-(self.n as f64)).exp2();
        let w = TAU * h;
        (1.0 - h, 1.0 - h / 2.0, w * self.k as f64, w * (self.k + 1) as f64)
    }

    /// Neighbouring indices at levels `n-1..=n+1` whose closures touch this square.
    pub fn neighbourhood(&self) -> Vec<DyadicIndex> {
        let mut out = Vec::new();
        let lo = self.n.saturating_sub(1);
        let (_, _, t0, t1) = self.bounds();
        for m in lo..=(self.n + 1).min(MAX_LEVEL) {
            let cnt = 1u64 << m;
            let w = TAU / cnt as f64;
            let k0 = (t0 / w).floor() as i64 - 1;
            let k1 = (t1 / w).ceil() as i64;
            let mut ks: Vec<u64> = (k0..=k1).map(|k| k.rem_euclid(cnt as i64) as u64).collect();
            ks.sort_unstable();
            ks.dedup();
            out.extend(ks.into_iter().map(|k| DyadicIndex { n: m, k }));
        }
        out
    }
}

fn level_of_radius(r: f64) -> u32 {
    if r < 0.5 {
        return 0;
    }
    // 1 - 2^{-n} ≤ r < 1 - 2^{-n-1}  ⇔  n = floor(-log2(1 - r))
    let mut n = (-(1.0 - r).log2()).floor().max(0.0) as u32;
    n = n.min(MAX_LEVEL);
    // fix rounding at the boundaries
    while n > 0 && r < 1.0 - (-(n as f64)).exp2() {
        n -= 1;
    }
    while n < MAX_LEVEL && r >= 1.0 - (-(n as f64) - 1.0).exp2() {
        n += 1;
    }
    n
}

fn k_of_angle(theta: f64, n: u32) -> u64 {
    let cnt = 1u64 << n;
    let k = (normalize_angle(theta) / TAU * cnt as f64).floor() as u64;
    k.min(cnt - 1)
}

pub fn dyadic_square_of(z: DiskPoint) -> DyadicIndex {
    let n = level_of_radius(z.abs());
    DyadicIndex { n, k: k_of_angle(z.arg(), n) }
}

pub fn dyadic_center(i: DyadicIndex) -> DiskPoint {
    let h = (-(i.n as f64)).exp2();
    let r = 1.0 - 0.75 * h;
    let theta = TAU * (i.k as f64 + 0.5) * h;
    DiskPoint::from_polar(r, theta).expect("dyadic centers lie in the disk")
}

/// Euclidean distance from `p` to the closed polar rectangle of a dyadic square.
pub fn distance_to_square(i: DyadicIndex, p: Complex64) -> f64 {
    let (r1, r2, t0, t1) = i.bounds();
    let rp = p.norm();
    if i.n == 0 {
        return (rp - r2).max(0.0);
    }
    let tp = normalize_angle(p.im.atan2(p.re));
    let width = t1 - t0;
    let inside_angle = rp == 0.0 || (tp - t0).rem_euclid(TAU) <= width;
    if inside_angle {
        return (r1 - rp).max(rp - r2).max(0.0);
    }
    let edge = |te: f64| {
        let c = angle_diff(tp, te).cos();
        let t = (rp * c).clamp(r1, r2);
        (p - Complex64::from_polar(t, te)).norm()
    };
    edge(t0).min(edge(t1))
}

/// Membership in the closed dilation `{z : ρ(z, Q̄) ≤ δ}`.
pub fn in_dilated_square(i: DyadicIndex, delta: f64, z: DiskPoint) -> bool {
    if delta <= 0.0 {
        return distance_to_square(i, z.z()) == 0.0;
    }
    let e = hyperbolic_to_euclidean_c(z.z(), delta);
    distance_to_square(i, e.center) <= e.radius
}

/// Sampled pseudohyperbolic diameter of the closed square (boundary grid, `per_edge` points per side).
pub fn square_pseudo_diameter(i: DyadicIndex, per_edge: usize) -> f64 {
    let (r1, r2, t0, t1) = i.bounds();
    let r2 = r2.min(1.0 - 1e-15);
    let m = per_edge.max(2);
    let mut pts = Vec::with_capacity(4 * m);
    for j in 0..m {
        let s = j as f64 / (m - 1) as f64;
        let r = r1 + s * (r2 - r1);
        let t = t0 + s * (t1 - t0);
        pts.push(Complex64::from_polar(r, t0));
        pts.push(Complex64::from_polar(r, t1));
        pts.push(Complex64::from_polar(r1, t));
        pts.push(Complex64::from_polar(r2, t));
    }
    let mut d: f64 = 0.0;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            d = d.max(rho_c(pts[a], pts[b]));
        }
    }
    d
}

/// Closed boundary arc given by its center angle and angular half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub center: f64,
    pub half_width: f64,
}

impl BoundaryArc {
    pub fn contains(&self, theta: f64) -> bool {
        angle_diff(theta, self.center).abs() <= self.half_width
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_width
    }
}

/// The arc `{ζ : |ζ - a/|a|| ≤ 1 - |a|}`.
pub fn privalov_shadow(a: DiskPoint) -> Result<BoundaryArc> {
    let r = a.abs();
    if r == 0.0 {
        return Err(Error::ShadowAtOrigin);
    }
    Ok(BoundaryArc { center: a.arg(), half_width: 2.0 * ((1.0 - r) / 2.0).asin() })
}

/// The euclidean disk bounded by the horocycle `{P_z(1) = c}`.
pub fn horocycle_disk(c: f64) -> Result<EuclideanDisk> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("horocycle level c={c} must be positive")));
    }
    Ok(EuclideanDisk { center: Complex64::new(c / (1.0 + c), 0.0), radius: 1.0 / (1.0 + c) })
}

/// `Γ_ψ(ζ) = {z : ψ(|z - ζ|) ≤ 1 - |z|}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproachRegion {
    /// Vertex angle `ζ = e^{i·vertex}`.
    pub vertex: f64,
    pub profile: Profile,
}

pub fn in_approach_region(region: &ApproachRegion, z: DiskPoint) -> bool {
    let zeta = Complex64::from_polar(1.0, region.vertex);
    let d = (z.z() - zeta).norm();
    region.profile.eval_unbounded(d) <= 1.0 - z.abs()
}

/// Bucket index over dyadic squares, clamped at `max_level`.
#[derive(Clone, Debug)]
pub struct PolarGrid {
    max_level: u32,
    cells: HashMap<DyadicIndex, Vec<usize>>,
    points: Vec<Complex64>,
}

impl PolarGrid {
    pub fn new(max_level: u32) -> Self {
        PolarGrid { max_level: max_level.min(30), cells: HashMap::new(), points: Vec::new() }
    }

    pub fn from_points(points: impl IntoIterator<Item = Complex64>, max_level: u32) -> Self {
        let mut g = Self::new(max_level);
        for p in points {
            g.insert(p);
        }
        g
    }

    fn cell_of(&self, p: Complex64) -> DyadicIndex {
        let n = level_of_radius(p.norm()).min(self.max_level);
        DyadicIndex { n, k: k_of_angle(p.im.atan2(p.re), n) }
    }

    /// Inserts a point and returns its index.
    pub fn insert(&mut self, p: Complex64) -> usize {
        let id = self.points.len();
        self.points.push(p);
        let c = self.cell_of(p);
        self.cells.entry(c).or_default().push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> Complex64 {
        self.points[id]
    }

    /// Indices of stored points with `|p - center| ≤ radius`, sorted.
    pub fn query_disk(&self, center: Complex64, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit_candidates(center, radius, |id| {
            if (self.points[id] - center).norm() <= radius {
                out.push(id);
            }
        });
        out.sort_unstable();
        out
    }

    /// Calls `f` on every point that could lie in the disk (a superset).
    pub fn visit_candidates(&self, center: Complex64, radius: f64, mut f: impl FnMut(usize)) {
        let rc = center.norm();
        let lo_r = (rc - radius).max(0.0);
        let hi_r = rc + radius;
        let n_lo = level_of_radius(lo_r.min(1.0 - 1e-16)).min(self.max_level);
        let n_hi = if hi_r >= 1.0 { self.max_level } else { level_of_radius(hi_r).min(self.max_level) };
        let tc = center.im.atan2(center.re);
        for n in n_lo..=n_hi {
            let cnt = 1u64 << n;
            let full = radius >= rc || n == 0 || {
                let half = (radius / rc).asin();
                half * 2.0 >= TAU - TAU / cnt as f64
            };
            if full {
                let mut ks: Vec<&DyadicIndex> = self.cells.keys().filter(|c| c.n == n).collect();
                ks.sort_unstable();
                for c in ks {
                    self.cells[c].iter().for_each(|&id| f(id));
                }
                continue;
            }
            let half = (radius / rc).asin();
            let w = TAU / cnt as f64;
            let k0 = ((tc - half) / w).floor() as i64;
            let k1 = ((tc + half) / w).floor() as i64;
            let span = (k1 - k0 + 1) as u64;
            if span >= cnt {
                let mut ks: Vec<&DyadicIndex> = self.cells.keys().filter(|c| c.n == n).collect();
                ks.sort_unstable();
                for c in ks {
                    self.cells[c].iter().for_each(|&id| f(id));
                }
                continue;
            }
            for k in k0..=k1 {
                let key = DyadicIndex { n, k: k.rem_euclid(cnt as i64) as u64 };
                if let Some(v) = self.cells.get(&key) {
                    v.iter().for_each(|&id| f(id));
                }
            }
        }
    }
}
