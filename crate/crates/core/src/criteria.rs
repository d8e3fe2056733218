//! Decision procedures: the Hayman–Lyons test, the sampling criteria for nets, rings and
//! uniformly dense disks, the witness-set selector and the lower-density surrogate.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeDistribution;
use crate::error::{invalid, Error, Result};
use crate::generators::{counts_per_square, max_separated_subsequence, Configuration, RingSpec, Spacing};
use crate::geometry::{dyadic_center, dyadic_square_of, hyperbolic_to_euclidean_c, rho_c, DiskPoint, DyadicIndex};
use crate::kernels::poisson_kernel_c;
use crate::profiles::Profile;
use crate::series::{classify_tail, Classification, SeriesVerdict};

/// Default `ε` in the selection rule `N_{n,k} ≤ ε·#(Λ ∩ Q_{n,k})`.
pub const DEFAULT_SELECTION_EPS: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Sampling,
    NonSampling,
    Inconclusive,
}

impl Verdict {
    /// Divergence of the governing series means sampling.
    pub fn from_divergence(c: Classification) -> Self {
        match c {
            Classification::Divergent => Verdict::Sampling,
            Classification::Convergent => Verdict::NonSampling,
            Classification::Inconclusive => Verdict::Inconclusive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub n: u32,
    /// `M_n`, `N_n`, ring count or point count, depending on the criterion.
    pub count: f64,
    pub term: f64,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub verdict: Verdict,
    pub series: SeriesVerdict,
    pub per_level: Vec<LevelRow>,
    /// The rule that turns the series classification into a verdict.
    pub rule: String,
    /// Tail-model classification of the same terms, as an independent check of the closed form.
    pub tail_check: Classification,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

fn rows(first_level: u32, counts: &[f64], series: &SeriesVerdict) -> Vec<LevelRow> {
    counts
        .iter()
        .enumerate()
        .map(|(i, &count)| LevelRow { n: first_level + i as u32, count, term: series.terms[i], partial_sum: series.partial_sums[i] })
        .collect()
}

/// Partial sums of `Σ (1-|λ|²) P_λ(ζ)` by level over a maximal `δ`-separated subsequence.
pub fn hayman_lyons_test(c: &Configuration, zeta: f64, delta: f64, depth: u32) -> Result<SeriesVerdict> {
    if depth < 1 {
        return Err(invalid("depth must be at least 1"));
    }
    let sep = max_separated_subsequence(c, delta)?;
    let mut terms = vec![0.0; depth as usize];
    for p in &sep.points {
        let n = dyadic_square_of(*p).n;
        if n >= 1 && n <= depth {
            let z = p.z();
            terms[(n - 1) as usize] += (1.0 - z.norm_sqr()) * poisson_kernel_c(z, zeta);
        }
    }
    Ok(SeriesVerdict::tail_model(1, terms))
}

/// [`hayman_lyons_test`] as a criterion report; counts are the separated points per level.
pub fn hayman_lyons_report(c: &Configuration, zeta: f64, delta: f64, depth: u32) -> Result<CriterionReport> {
    let series = hayman_lyons_test(c, zeta, delta, depth)?;
    let sep = max_separated_subsequence(c, delta)?;
    let mut counts = vec![0.0; depth as usize];
    for p in &sep.points {
        let n = dyadic_square_of(*p).n;
        if n >= 1 && n <= depth {
            counts[(n - 1) as usize] += 1.0;
        }
    }
    // being a Hayman-Lyons set is necessary for sampling, not sufficient
    let verdict = match series.classification {
        Classification::Convergent => Verdict::NonSampling,
        _ => Verdict::Inconclusive,
    };
    Ok(CriterionReport {
        criterion: "hl".into(),
        verdict,
        per_level: rows(1, &counts, &series),
        tail_check: series.classification,
        series,
        rule: format!("Hayman-Lyons set at angle {zeta} iff the sum of (1-|l|^2) P_l(zeta) over a {delta}-separated subsequence diverges"),
        flags: vec!["necessary condition only: a divergent sum does not certify sampling".into()],
    })
}

/// `Σ_n (M_n 2^{-n})^{1/2}` with `M_n = round(g(2^{-n})^{-2})`; divergence means sampling.
pub fn net_sampling_criterion(g: &Profile, depth: u32) -> Result<CriterionReport> {
    if depth < 1 {
        return Err(invalid("depth must be at least 1"));
    }
    let mut counts = Vec::new();
    let mut terms = Vec::new();
    for n in 1..=depth {
        let gv = g.eval_unbounded((-(n as f64)).exp2());
        if !(gv > 0.0) {
            return Err(invalid(format!("g(2^-{n}) = {gv} must be positive")));
        }
        let m = (gv.powi(-2)).round().max(1.0);
        counts.push(m);
        terms.push((m * (-(n as f64)).exp2()).sqrt());
    }
    let closed = match g {
        Profile::PowerLaw { alpha, .. } => Some(*alpha >= 0.5),
        Profile::ExpInvPower { .. } => Some(true),
        Profile::LogPower { alpha, .. } => Some(alpha + 0.5 >= 1.0),
        Profile::Table(_) => None,
    };
    Ok(report("net", closed, 1, counts, terms, "sampling iff sum of (M_n 2^-n)^(1/2) diverges, i.e. int dt/(t^(1/2) g(t)) = inf", Vec::new()))
}

fn report(name: &str, closed_divergent: Option<bool>, first: u32, counts: Vec<f64>, terms: Vec<f64>, rule: &str, flags: Vec<String>) -> CriterionReport {
    let tail_check = classify_tail(first, &terms);
    let series = match closed_divergent {
        Some(div) => {
            SeriesVerdict::closed_form(if div { Classification::Divergent } else { Classification::Convergent }, first, terms)
        }
        None => SeriesVerdict::tail_model(first, terms),
    };
    CriterionReport {
        criterion: name.into(),
        verdict: Verdict::from_divergence(series.classification),
        per_level: rows(first, &counts, &series),
        series,
        rule: rule.into(),
        tail_check,
        flags,
    }
}

/// `Σ_n ((1-r_n)/ε_n)^{1/2}`; divergence means sampling.
pub fn rings_sampling_criterion(spec: &RingSpec, depth: u32) -> Result<CriterionReport> {
    spec.validate()?;
    if depth < 1 {
        return Err(invalid("depth must be at least 1"));
    }
    let counts: Vec<f64> = (1..=depth).map(|n| spec.ring_count(n) as f64).collect();
    let terms: Vec<f64> = (1..=depth).map(|n| ((1.0 - spec.radius(n)) / spec.epsilon(n)).sqrt()).collect();
    // terms are (q/b)^{n/2} up to a constant, or q^{n/2} n^{s/2}
    let divergent = match spec.spacing {
        Spacing::Geometric { b } => spec.q >= b,
        Spacing::Power { .. } => false,
    };
    let mut flags = Vec::new();
    let crowded = spec.crowded_levels();
    if !crowded.is_empty() {
        flags.push(format!("several rings share dyadic levels {crowded:?}"));
    }
    Ok(report("rings", Some(divergent), 1, counts, terms, "sampling iff sum of ((1-r_n)/eps_n)^(1/2) diverges", flags))
}

/// `Σ_n 1/log(1/φ(K^{-n}))`; divergence means sampling.
pub fn udisks_sampling_criterion(phi: &Profile, depth: u32, k: f64) -> Result<CriterionReport> {
    if depth < 1 {
        return Err(invalid("depth must be at least 1"));
    }
    if !(k > 1.0) {
        return Err(invalid(format!("K={k} must exceed 1")));
    }
    let mut counts = Vec::new();
    let mut terms = Vec::new();
    for n in 1..=depth {
        let t = k.powi(-(n as i32));
        let l = log_inv(phi, t);
        if !(l > 0.0) {
            return Err(Error::Precondition(format!("phi({t}) = {} must lie in (0,1)", phi.eval_unbounded(t))));
        }
        counts.push(l);
        terms.push(1.0 / l);
    }
    let closed = match phi {
        Profile::PowerLaw { .. } | Profile::LogPower { .. } => Some(true),
        Profile::ExpInvPower { .. } => Some(false),
        Profile::Table(_) => None,
    };
    Ok(report(
        &format!("udisks(K={k})"),
        closed,
        1,
        counts,
        terms,
        "sampling iff sum of 1/log(1/phi(K^-n)) diverges, i.e. int dt/(t log(1/phi(t))) = inf",
        Vec::new(),
    ))
}

/// `log(1/φ(t))`, exact for `exp(-1/t^β)` where `φ` itself underflows.
pub fn log_inv(phi: &Profile, t: f64) -> f64 {
    match phi {
        Profile::ExpInvPower { beta } => t.powf(-beta),
        _ => -phi.eval_unbounded(t).ln(),
    }
}

/// Per-level spread of occupied-square counts: `(n, min, max)`; a ratio above 8 is flagged by callers.
pub fn level_uniformity(c: &Configuration) -> Vec<(u32, u64, u64)> {
    let mut by: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    for (i, cnt) in counts_per_square(c) {
        let e = by.entry(i.n).or_insert((u64::MAX, 0));
        e.0 = e.0.min(cnt);
        e.1 = e.1.max(cnt);
    }
    by.into_iter().map(|(n, (lo, hi))| (n, lo, hi)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorOptions {
    pub eps: f64,
    /// Constant `C` in the bound `w_{n,k} ≤ C·N` used for point configurations.
    pub vuln_constant: f64,
    /// Boundary angle for the center-based Hayman–Lyons sum.
    pub zeta: f64,
}

impl Default for SelectorOptions {
    fn default() -> Self {
        SelectorOptions { eps: DEFAULT_SELECTION_EPS, vuln_constant: 1.0, zeta: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSelection {
    pub q: Vec<DyadicIndex>,
    /// `(n, L_n)` with `L_n = #{k : (n,k) ∉ Q}`.
    pub l_n: Vec<(u32, u64)>,
    /// `(n, γ_n)` for disk configurations.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma_n: Vec<(u32, f64)>,
    /// Upper bound for `Σ_{Q} 2^{-n} w_{n,k}(Λ, N_{n,k})`.
    pub invul_partial: f64,
    pub invul: SeriesVerdict,
    /// Surrogate `Σ_n 1/max(L_n, 1)`.
    pub hl_partial: f64,
    pub hl: SeriesVerdict,
    /// `Σ_{(n,k) ∈ Q} 2^{-n} P_{c_{n,k}}(ζ)` by level.
    pub hl_centers: SeriesVerdict,
    pub verdict: Verdict,
}

/// `N_{n,k}`: zeros of the distribution counted over the neighbourhood of `Q_{n,k}`.
pub fn neighbourhood_count(dist: &BlaschkeDistribution, i: DyadicIndex) -> u64 {
    i.neighbourhood().into_iter().map(|j| dist.get(j)).sum()
}

/// Chooses the index set `Q` for a configuration against a Blaschke distribution.
///
/// Point configurations use `N_{n,k} ≤ ε·#(Λ ∩ Q_{n,k})`. Configurations with disk radii use
/// the level rule: `Q_n^c` is the `L_n = floor((1-γ_n) N_n)` squares with the largest counts, where
/// `γ_n = 1 - 1/N_n` on levels at which `log(1/φ(2^{-n}))·2^{-n}·N_n` drops below its running
/// minimum and `γ_n = 1/log(1/φ(2^{-n}))` elsewhere.
pub fn witness_selector(c: &Configuration, dist: &BlaschkeDistribution, opts: &SelectorOptions) -> Result<WitnessSelection> {
    if !(opts.eps > 0.0 && opts.eps < 1.0) {
        return Err(invalid(format!("eps={} not in (0,1)", opts.eps)));
    }
    let depth = c.depth;
    let occupied = counts_per_square(c);
    let mut q: Vec<DyadicIndex> = Vec::new();
    let mut l_n = Vec::new();
    let mut gamma_n = Vec::new();
    let mut invul_terms = vec![0.0; depth as usize];

    if let Some(radii) = &c.radii {
        // φ(2^{-n}) read off the largest disk radius present at each level
        let mut phi_n: BTreeMap<u32, f64> = BTreeMap::new();
        for (p, &r) in c.points.iter().zip(radii) {
            let e = phi_n.entry(dyadic_square_of(*p).n).or_insert(0.0);
            *e = f64::max(*e, r);
        }
        let mut running_min = f64::INFINITY;
        for n in 1..=depth {
            let log_phi = phi_n.get(&n).map_or(std::f64::consts::LN_2, |&r| -r.ln());
            let counts: Vec<(u64, u64)> = (0..(1u64 << n)).map(|k| (k, neighbourhood_count(dist, DyadicIndex { n, k }))).collect();
            let total: u64 = counts.iter().map(|x| x.1).sum();
            let x = log_phi * (-(n as f64)).exp2() * total as f64;
            let gamma = if total == 0 {
                running_min = running_min.min(x);
                1.0
            } else if x < running_min {
                running_min = x;
                1.0 - 1.0 / total as f64
            } else {
                1.0 / log_phi
            };
            gamma_n.push((n, gamma));
            let l = ((1.0 - gamma) * total as f64).floor() as u64;
            let mut sorted = counts.clone();
            sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            let excluded: std::collections::BTreeSet<u64> = sorted.iter().take(l as usize).map(|x| x.0).collect();
            let mut kept_sum = 0u64;
            for (k, cnt) in counts {
                let idx = DyadicIndex { n, k };
                if !excluded.contains(&k) && occupied.contains_key(&idx) {
                    q.push(idx);
                    kept_sum += cnt;
                }
            }
            let lcount = (1u64 << n) - q.iter().filter(|i| i.n == n).count() as u64;
            l_n.push((n, lcount));
            invul_terms[(n - 1) as usize] = (-(n as f64)).exp2() * log_phi * kept_sum as f64;
        }
    } else {
        for n in 1..=depth {
            let mut kept = 0u64;
            for k in 0..(1u64 << n) {
                let idx = DyadicIndex { n, k };
                let Some(&here) = occupied.get(&idx) else { continue };
                let nk = neighbourhood_count(dist, idx);
                if nk as f64 <= opts.eps * here as f64 {
                    q.push(idx);
                    kept += 1;
                    invul_terms[(n - 1) as usize] += (-(n as f64)).exp2() * opts.vuln_constant * nk as f64;
                }
            }
            l_n.push((n, (1u64 << n) - kept));
        }
    }

    let hl_terms: Vec<f64> = l_n.iter().map(|&(_, l)| 1.0 / l.max(1) as f64).collect();
    let mut center_terms = vec![0.0; depth as usize];
    for idx in &q {
        let cz: Complex64 = dyadic_center(*idx).z();
        center_terms[(idx.n - 1) as usize] += (-(idx.n as f64)).exp2() * poisson_kernel_c(cz, opts.zeta);
    }
    let invul = SeriesVerdict::tail_model(1, invul_terms);
    let hl = SeriesVerdict::tail_model(1, hl_terms);
    let hl_centers = SeriesVerdict::tail_model(1, center_terms);
    let verdict = if q.is_empty() {
        Verdict::Inconclusive
    } else {
        match (hl.classification, invul.classification) {
            (Classification::Divergent, Classification::Convergent) => Verdict::Sampling,
            (Classification::Convergent, _) => Verdict::NonSampling,
            _ => Verdict::Inconclusive,
        }
    };
    Ok(WitnessSelection {
        q,
        l_n,
        gamma_n,
        invul_partial: invul.total(),
        invul,
        hl_partial: hl.total(),
        hl,
        hl_centers,
        verdict,
    })
}

/// Minimum pseudohyperbolic distance between distinct points (`1` for fewer than two points).
pub fn separation_constant(c: &Configuration) -> f64 {
    let grid = c.grid();
    let mut best: f64 = 1.0;
    for (i, p) in c.points.iter().enumerate() {
        // neighbours closer than the current best lie in the euclidean image of D(p, best)
        let e = hyperbolic_to_euclidean_c(p.z(), best.min(0.999));
        grid.visit_candidates(e.center, e.radius, |j| {
            if j != i {
                best = best.min(rho_c(p.z(), c.points[j].z()));
            }
        });
    }
    best
}

/// Finite-radius surrogate of the lower uniform density:
/// `min_z Σ_{1/2 < ρ(λ,z) < r} log(1/ρ(λ,z)) / log(1/(1-r))` over the anchors.
pub fn seip_lower_density(c: &Configuration, r: f64, anchors: &[DiskPoint], min_separation: f64) -> Result<f64> {
    if !(r > 0.5 && r < 1.0) {
        return Err(invalid(format!("r={r} must lie in (1/2, 1)")));
    }
    if anchors.is_empty() {
        return Err(invalid("anchor grid is empty"));
    }
    if c.is_empty() {
        return Ok(0.0);
    }
    let sep = separation_constant(c);
    if sep < min_separation {
        return Err(Error::Precondition(format!("configuration is not separated: min distance {sep} < {min_separation}")));
    }
    let grid = c.grid();
    let denom = (1.0 / (1.0 - r)).ln();
    let mut best = f64::INFINITY;
    for a in anchors {
        let e = hyperbolic_to_euclidean_c(a.z(), r);
        let mut s = 0.0;
        grid.visit_candidates(e.center, e.radius, |j| {
            let d = rho_c(a.z(), c.points[j].z());
            if d > 0.5 && d < r {
                s += (1.0 / d).ln();
            }
        });
        best = best.min(s / denom);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::generate_dyadic_centers;

    #[test]
    fn net_truth_table() {
        let r = net_sampling_criterion(&Profile::power(0.25, 1.0).unwrap(), 20).unwrap();
        assert_eq!(r.verdict, Verdict::NonSampling);
        assert_eq!(r.tail_check, Classification::Convergent);
        let r = net_sampling_criterion(&Profile::power(0.5, 1.0).unwrap(), 20).unwrap();
        assert_eq!(r.verdict, Verdict::Sampling);
        assert_eq!(r.tail_check, Classification::Divergent);
        assert_eq!(r.per_level[3].count, 16.0);
    }

    #[test]
    fn rings_truth_table() {
        let geo = |b| RingSpec { q: 0.5, spacing: Spacing::Geometric { b }, scale: 1.0, depth: 20 };
        let r = rings_sampling_criterion(&geo(0.5), 20).unwrap();
        assert_eq!(r.verdict, Verdict::Sampling);
        assert!(r.series.terms.iter().all(|&t| (t - 1.0).abs() < 1e-12));
        assert_eq!(rings_sampling_criterion(&geo(0.25), 20).unwrap().verdict, Verdict::Sampling);
        let pw = RingSpec { q: 0.5, spacing: Spacing::Power { s: 2.0 }, scale: 1.0, depth: 20 };
        let r = rings_sampling_criterion(&pw, 20).unwrap();
        assert_eq!(r.verdict, Verdict::NonSampling);
        assert_eq!(r.tail_check, Classification::Convergent);
    }

    #[test]
    fn udisks_truth_table() {
        for k in [2.0, 4.0] {
            let r = udisks_sampling_criterion(&Profile::power(1.0, 1.0).unwrap(), 20, k).unwrap();
            assert_eq!(r.verdict, Verdict::Sampling);
            assert_eq!(r.tail_check, Classification::Divergent);
            let r = udisks_sampling_criterion(&Profile::exp_inv(1.0).unwrap(), 20, k).unwrap();
            assert_eq!(r.verdict, Verdict::NonSampling);
            assert_eq!(r.tail_check, Classification::Convergent);
        }
    }

    #[test]
    fn hl_dyadic_centers_diverge() {
        let c = generate_dyadic_centers(10).unwrap();
        let v = hayman_lyons_test(&c, 0.0, 0.4, 10).unwrap();
        assert_eq!(v.classification, Classification::Divergent);
        for w in v.terms[5..].iter() {
            assert!(*w >= 0.5, "{:?}", v.terms);
        }
    }

    #[test]
    fn selector_zero_distribution() {
        let c = generate_dyadic_centers(6).unwrap();
        let s = witness_selector(&c, &BlaschkeDistribution::zero(6), &SelectorOptions::default()).unwrap();
        assert_eq!(s.q.len(), c.len());
        assert_eq!(s.invul_partial, 0.0);
    }

    #[test]
    fn seip_examples() {
        let empty = Configuration::from_points(Vec::new(), 1, "custom");
        assert_eq!(seip_lower_density(&empty, 0.9, &[DiskPoint::ORIGIN], 0.01).unwrap(), 0.0);
        let dup = Configuration::from_points(vec![DiskPoint::ORIGIN, DiskPoint::ORIGIN], 1, "custom");
        assert!(seip_lower_density(&dup, 0.9, &[DiskPoint::ORIGIN], 0.01).is_err());
    }

    #[test]
    fn hl_radial_examples() {
        let depth = 20;
        let away: Vec<DiskPoint> = (1..=depth).map(|n| DiskPoint::new(-(1.0 - (-(n as f64)).exp2()), 0.0).unwrap()).collect();
        let c = Configuration::from_points(away, depth, "custom");
        assert_eq!(hayman_lyons_test(&c, 0.0, 0.5, depth).unwrap().classification, Classification::Convergent);
        // toward ζ the kernel term (1-|λ|²)P_λ(ζ) = (1+|λ|)² stays bounded below
        let toward: Vec<DiskPoint> = (1..=depth).map(|n| DiskPoint::new(1.0 - (-(n as f64)).exp2(), 0.0).unwrap()).collect();
        let c = Configuration::from_points(toward, depth, "custom");
        // consecutive points sit at ρ ≈ 1/3, so δ = 0.3 keeps one point per level
        assert_eq!(hayman_lyons_test(&c, 0.0, 0.3, depth).unwrap().classification, Classification::Divergent);
    }

    #[test]
    fn net_sum_form_agrees_with_integral_form() {
        let profiles = [
            Profile::power(0.1, 1.0).unwrap(),
            Profile::power(0.25, 1.0).unwrap(),
            Profile::power(0.5, 1.0).unwrap(),
            Profile::power(0.75, 1.0).unwrap(),
            Profile::log_power_with(2.0, 1.0, 0.5).unwrap(),
        ];
        for g in &profiles {
            let r = net_sampling_criterion(g, 24).unwrap();
            assert_eq!(Verdict::from_divergence(r.tail_check), r.verdict, "{}", g.label());
        }
    }

    #[test]
    fn selector_column_distribution() {
        let depth = 8;
        let c = generate_dyadic_centers(depth).unwrap();
        let opts = SelectorOptions { eps: 0.5, ..SelectorOptions::default() };
        let dist = BlaschkeDistribution::column(depth, 1);
        let s = witness_selector(&c, &dist, &opts).unwrap();
        // zeros are counted over neighbourhoods, so the column and the squares next to it drop out
        let touches_column = |i: DyadicIndex| i.neighbourhood().iter().any(|j| j.k == 0 && j.n >= 1);
        for (i, _) in counts_per_square(&c) {
            assert_eq!(s.q.contains(&i), !touches_column(i), "{i:?}");
        }
        assert!(s.q.iter().all(|i| i.k != 0 || i.n == 0));
        assert_eq!(s.hl.classification, Classification::Divergent);
    }

    #[test]
    fn seip_on_dyadic_centers() {
        let c = generate_dyadic_centers(14).unwrap();
        let anchors: Vec<DiskPoint> = [0.9, 0.95, 0.97].iter().flat_map(|&r| [0.3, 2.0, 4.5].map(|t| DiskPoint::from_polar(r, t).unwrap())).collect();
        let d = seip_lower_density(&c, 0.99, &anchors, 0.3).unwrap();
        assert!(d > 0.1 && d < 10.0, "{d}");
    }
}
