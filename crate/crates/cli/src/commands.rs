use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use anyhow::Context;
use nevsamp_core::blaschke::BlaschkeDistribution;
use nevsamp_core::counterexamples::{
    appendix_witness, dyadic_radial_grid, example1_witness, net_necessity_witness, udisk_samples, udisks_necessity_witness, verify_witness,
    verify_witness_on_disks, MultiplicityRule, UdiskOptions,
};
use nevsamp_core::criteria::{
    hayman_lyons_report, net_sampling_criterion, rings_sampling_criterion, udisks_sampling_criterion, witness_selector, CriterionReport, SelectorOptions,
};
use nevsamp_core::generators::{generate_dyadic_centers, generate_g_net, generate_rings, generate_udisks, Configuration, RingSpec, Spacing};
use nevsamp_core::geometry::DyadicIndex;
use nevsamp_core::hm::{sampling_vs_escape_experiment, ExperimentBase};
use nevsamp_core::profiles::Profile;
use nevsamp_core::vulnerability::{w_brute_force, w_optimize, VulnerabilityInstance};
use serde_json::{json, Value};

use crate::report::{self, Manifest};
use crate::{usage, AnalyzeArgs, Base, CriterionKind, GenerateArgs, HmArgs, Kind, Mode, Rule, VulnArgs, WitnessArgs, WitnessKind};

fn read_config(path: &Path) -> anyhow::Result<(Configuration, String)> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let c = Configuration::from_json(&text)?;
    Ok((c, report::file_sha256(path)?))
}

fn profile(spec: &str) -> anyhow::Result<Profile> {
    Ok(Profile::parse(spec)?)
}

/// The profile given on the command line, else the one recorded in the configuration's metadata.
fn profile_or_meta(flag: Option<&str>, c: &Configuration, key: &str) -> anyhow::Result<Profile> {
    match flag {
        Some(s) => profile(s),
        None => match c.meta.params.get(key).and_then(Value::as_str) {
            Some(s) => profile(s),
            None => Err(usage(format!("no --{key} given and the configuration does not record one"))),
        },
    }
}

fn parameters(args: &impl serde::Serialize, config_hash: Option<&str>) -> anyhow::Result<Value> {
    let mut p = serde_json::to_value(args)?;
    if let Some(h) = config_hash {
        p["config_sha256"] = json!(h);
    }
    Ok(p)
}

fn parse_spacing(s: &str) -> anyhow::Result<Spacing> {
    let (fam, v) = s.split_once(':').ok_or_else(|| usage(format!("spacing '{s}' must be geometric:b or power:s")))?;
    let v: f64 = v.parse().map_err(|_| usage(format!("bad number in spacing '{s}'")))?;
    match fam {
        "geometric" => Ok(Spacing::Geometric { b: v }),
        "power" => Ok(Spacing::Power { s: v }),
        _ => Err(usage(format!("unknown spacing family '{fam}'"))),
    }
}

pub fn generate(a: &GenerateArgs) -> anyhow::Result<()> {
    let c = match a.kind {
        Kind::Dyadic => generate_dyadic_centers(a.depth)?,
        Kind::Net => generate_g_net(&profile(a.g.as_deref().ok_or_else(|| usage("--kind net needs --g"))?)?, a.depth)?,
        Kind::Disks => generate_udisks(a.depth, &profile(a.phi.as_deref().ok_or_else(|| usage("--kind disks needs --phi"))?)?)?,
        Kind::Rings => generate_rings(&RingSpec { q: a.q, spacing: parse_spacing(&a.spacing)?, scale: a.scale, depth: a.depth })?,
    };
    fs::write(&a.out, c.to_json()).with_context(|| format!("writing {}", a.out.display()))?;
    let manifest = Manifest::new("generate", parameters(a, None)?, None, Some(a.depth))?;
    let result = json!({ "kind": c.meta.kind, "points": c.len(), "depth": c.depth, "meta": c.meta.params, "config_sha256": report::file_sha256(&a.out)? });
    report::emit(&report::build(&manifest, result)?, a.report.as_deref())
}

fn criterion_csv(path: &Path, r: &CriterionReport) -> anyhow::Result<()> {
    let rows: Vec<Vec<f64>> = r.per_level.iter().map(|l| vec![l.n as f64, l.count, l.term, l.partial_sum]).collect();
    report::write_csv(path, &["n", "count", "term", "partial_sum"], &rows)
}

pub fn analyze(a: &AnalyzeArgs) -> anyhow::Result<()> {
    let (c, hash) = read_config(&a.config)?;
    let depth = a.depth.unwrap_or(c.depth);
    let mut seed = None;
    let result = match a.criterion {
        CriterionKind::Hl => {
            let r = hayman_lyons_report(&c, TAU * a.zeta, a.delta, depth)?;
            if let Some(p) = &a.csv {
                criterion_csv(p, &r)?;
            }
            serde_json::to_value(r)?
        }
        CriterionKind::Net => {
            let r = net_sampling_criterion(&profile_or_meta(a.g.as_deref(), &c, "g")?, depth)?;
            if let Some(p) = &a.csv {
                criterion_csv(p, &r)?;
            }
            serde_json::to_value(r)?
        }
        CriterionKind::Rings => {
            let spec: RingSpec = serde_json::from_value(c.meta.params.clone()).map_err(|_| usage("configuration does not record a ring spec"))?;
            let r = rings_sampling_criterion(&spec, depth)?;
            if let Some(p) = &a.csv {
                criterion_csv(p, &r)?;
            }
            serde_json::to_value(r)?
        }
        CriterionKind::Udisks => {
            let r = udisks_sampling_criterion(&profile_or_meta(a.phi.as_deref(), &c, "phi")?, depth, a.k)?;
            if let Some(p) = &a.csv {
                criterion_csv(p, &r)?;
            }
            serde_json::to_value(r)?
        }
        CriterionKind::Witness => {
            let dist = match (&a.dist, a.dist_column, a.dist_random) {
                (Some(p), None, None) => {
                    let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
                    BlaschkeDistribution::from_json(&text)?
                }
                (None, Some(n), None) => BlaschkeDistribution::column(depth, n),
                (None, None, Some(intensity)) => {
                    let s = a.seed.ok_or_else(|| usage("--dist-random needs --seed"))?;
                    seed = Some(s);
                    BlaschkeDistribution::random_summable(depth, intensity, s)
                }
                (None, None, None) => BlaschkeDistribution::zero(depth),
                _ => return Err(usage("give at most one of --dist, --dist-column, --dist-random")),
            };
            let opts = SelectorOptions { eps: a.eps, zeta: TAU * a.zeta, ..SelectorOptions::default() };
            let s = witness_selector(&c, &dist, &opts)?;
            if let Some(p) = &a.csv {
                let rows: Vec<Vec<f64>> = s
                    .hl
                    .terms
                    .iter()
                    .zip(&s.hl.partial_sums)
                    .enumerate()
                    .map(|(i, (t, ps))| {
                        let n = s.hl.first_level + i as u32;
                        let l = s.l_n.iter().find(|(m, _)| *m == n).map_or(0, |(_, l)| *l);
                        vec![n as f64, l as f64, *t, *ps]
                    })
                    .collect();
                report::write_csv(p, &["n", "count", "term", "partial_sum"], &rows)?;
            }
            serde_json::to_value(s)?
        }
    };
    let manifest = Manifest::new("analyze", parameters(a, Some(&hash))?, seed, Some(depth))?;
    report::emit(&report::build(&manifest, result)?, a.report.as_deref())
}

fn float_param(named: Option<f64>, param: Option<&str>, default: Option<f64>, name: &str) -> anyhow::Result<f64> {
    if let Some(v) = named {
        return Ok(v);
    }
    if let Some(p) = param {
        return p.parse().map_err(|_| usage(format!("--param '{p}' is not a number")));
    }
    default.ok_or_else(|| usage(format!("missing --{name}")))
}

pub fn witness(a: &WitnessArgs) -> anyhow::Result<()> {
    let loaded = match &a.config {
        Some(p) => Some(read_config(p)?),
        None => None,
    };
    let need_config = || loaded.as_ref().map(|(c, _)| c).ok_or_else(|| usage("this construction needs --config"));
    let depth = match (a.depth, &loaded) {
        (Some(d), _) => d,
        (None, Some((c, _))) => c.depth,
        (None, None) => return Err(usage("missing --depth")),
    };
    let grid = dyadic_radial_grid(depth);
    let (w, verified) = match a.kind {
        WitnessKind::Example1 => {
            let c_h = float_param(a.c, a.param.as_deref(), Some(1.0), "c")?;
            let w = example1_witness(c_h, depth)?;
            let lambda = generate_dyadic_centers(depth)?;
            // off the zeros P_λ(1) ≤ c, so log|f| ≤ c there
            let r = verify_witness(&w, &lambda, c_h * w.harmonic_scale, &grid)?;
            (w, r)
        }
        WitnessKind::Appendix => {
            let c = need_config()?;
            let delta = float_param(a.delta, a.param.as_deref(), Some(0.5), "delta")?;
            let w = appendix_witness(c, delta, depth)?;
            let r = verify_witness(&w, c, 2.0 * w.harmonic_scale, &grid)?;
            (w, r)
        }
        WitnessKind::NetNecessity => {
            let c = need_config()?;
            let psi = match a.psi.as_deref().or(a.param.as_deref()) {
                Some(s) => profile(s)?,
                None => profile_or_meta(None, c, "g")?.psi_from_g()?,
            };
            let w = net_necessity_witness(&psi, c, depth)?;
            let r = verify_witness(&w, c, 0.0, &grid)?;
            (w, r)
        }
        WitnessKind::UdisksNecessity => {
            let c = need_config()?;
            let phi = profile_or_meta(a.phi.as_deref().or(a.param.as_deref()), c, "phi")?;
            let rule = match a.rule {
                Rule::Ceil => MultiplicityRule::Ceil,
                Rule::Floor => MultiplicityRule::Floor,
            };
            let w = udisks_necessity_witness(&phi, c, depth, UdiskOptions { rule, threshold: a.threshold, ..UdiskOptions::default() })?;
            let samples = udisk_samples(&phi, c, depth, a.samples);
            let r = verify_witness_on_disks(&w, c, &samples, 0.0, &grid)?;
            (w, r)
        }
    };
    if let Some(p) = &a.witness_out {
        fs::write(p, serde_json::to_string_pretty(&w)?).with_context(|| format!("writing {}", p.display()))?;
    }
    let result = json!({
        "verification": verified,
        "zeros": w.zero_set.len(),
        "zero_multiplicity": w.zero_set.total_multiplicity(),
        "harmonic_scale": w.harmonic_scale,
        "blaschke_per_level": w.blaschke_per_level,
        "construction_params": w.meta.params,
    });
    let manifest = Manifest::new("witness", parameters(a, loaded.as_ref().map(|(_, h)| h.as_str()))?, None, Some(depth))?;
    report::emit(&report::build(&manifest, result)?, a.report.as_deref())
}

fn parse_square(s: &str) -> anyhow::Result<DyadicIndex> {
    let (n, k) = s.split_once(',').ok_or_else(|| usage(format!("square '{s}' must be n,k")))?;
    let n: u32 = n.trim().parse().map_err(|_| usage(format!("bad level in '{s}'")))?;
    let k: u64 = k.trim().parse().map_err(|_| usage(format!("bad index in '{s}'")))?;
    Ok(DyadicIndex::new(n, k)?)
}

pub fn vuln(a: &VulnArgs) -> anyhow::Result<()> {
    let (c, hash) = read_config(&a.config)?;
    let square = parse_square(&a.square)?;
    let inst = VulnerabilityInstance::from_configuration(&c, square, a.n)?;
    let (result, seed) = match a.mode {
        Mode::Brute => (w_brute_force(&inst, a.grid)?, None),
        Mode::Opt => {
            let s = a.seed.ok_or_else(|| usage("--mode opt is randomized and needs --seed"))?;
            (w_optimize(&inst, a.starts, s)?, Some(s))
        }
    };
    let out = json!({ "lambda_points": inst.lambda_points.len(), "square": square, "delta": inst.delta, "N": a.n, "result": result });
    let manifest = Manifest::new("vuln", parameters(a, Some(&hash))?, seed, Some(square.n))?;
    report::emit(&report::build(&manifest, out)?, a.report.as_deref())
}

fn parse_levels(s: &str) -> anyhow::Result<Vec<u32>> {
    let bad = || usage(format!("levels '{s}' must be a..b or a single level"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo.trim().parse::<u32>().map_err(|_| bad())?, hi.trim().parse::<u32>().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse::<u32>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

pub fn hm(a: &HmArgs) -> anyhow::Result<()> {
    let seed = a.seed.ok_or_else(|| usage("hm is randomized and needs --seed"))?;
    let phi = profile(&a.phi)?;
    let levels = parse_levels(&a.levels)?;
    let base = match a.base {
        Base::Dyadic => ExperimentBase::DyadicCenters,
        Base::Net => ExperimentBase::Net,
    };
    let rows = sampling_vs_escape_experiment(&phi, &levels, a.walks, seed, a.k, base)?;
    if let Some(p) = &a.csv {
        let table: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let mut v = vec![r.n as f64, r.outer_radius, r.excised_count as f64, r.estimate.escape_probability, r.estimate.stderr, r.estimate.stalled as f64];
                v.extend(r.eps_products.iter().map(|(_, e)| e.unwrap_or(f64::NAN)));
                v
            })
            .collect();
        let header = ["n", "R_n", "excised_count", "escape", "stderr", "stalled", "eps_product_C0.1", "eps_product_C0.5", "eps_product_C1"];
        report::write_csv(p, &header, &table)?;
    }
    let manifest = Manifest::new("hm", parameters(a, None)?, Some(seed), levels.iter().max().copied())?;
    report::emit(&report::build(&manifest, json!({ "phi": phi.label(), "rows": rows }))?, a.report.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("3..5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_levels("7").unwrap(), vec![7]);
        assert!(parse_levels("5..3").is_err());
        assert!(parse_levels("x").is_err());
    }

    #[test]
    fn squares_and_spacings() {
        let s = parse_square("3, 5").unwrap();
        assert_eq!((s.n, s.k), (3, 5));
        assert!(parse_square("3,8").is_err());
        assert_eq!(parse_spacing("power:2").unwrap(), Spacing::Power { s: 2.0 });
        assert!(parse_spacing("linear:1").is_err());
    }
}
