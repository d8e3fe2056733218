//! Monotone profile functions on `(0, 1]` and their calculus.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::series::{classify_tail, geometric_tail, Classification, Method};

/// Default number of dyadic levels for tabulated constructions.
pub const DEFAULT_TABLE_DEPTH: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    #[default]
    Linear,
    Step,
}

/// Breakpoint table. `Linear` joins breakpoints and runs linearly to `(0, 0)` below the
/// first one; `Step` holds `y_i` on `[x_i, x_{i+1})` and is `0` below the first breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableProfile {
    points: Vec<(f64, f64)>,
    #[serde(default)]
    interp: Interp,
}

impl TableProfile {
    pub fn new(points: Vec<(f64, f64)>, interp: Interp) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("table profile needs at least one breakpoint"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(invalid("table abscissae must be strictly increasing"));
            }
            if w[1].1 < w[0].1 {
                return Err(invalid("table values must be non-decreasing"));
            }
        }
        let (x0, y0) = points[0];
        if !(x0 > 0.0) || y0 < 0.0 || points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(invalid("table breakpoints must be finite with x > 0 and y ≥ 0"));
        }
        Ok(TableProfile { points, interp })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    fn eval(&self, t: f64) -> f64 {
        let pts = &self.points;
        let (x0, y0) = pts[0];
        if t < x0 {
            return match self.interp {
                Interp::Linear => y0 * t / x0,
                Interp::Step => 0.0,
            };
        }
        // last breakpoint with x ≤ t
        let i = pts.partition_point(|p| p.0 <= t) - 1;
        if i + 1 == pts.len() {
            return pts[i].1;
        }
        match self.interp {
            Interp::Step => pts[i].1,
            Interp::Linear => {
                let (xa, ya) = pts[i];
                let (xb, yb) = pts[i + 1];
                ya + (yb - ya) * (t - xa) / (xb - xa)
            }
        }
    }

    /// Smallest `t` with `eval(t) ≥ s`.
    fn inverse(&self, s: f64) -> Option<f64> {
        let pts = &self.points;
        let (x0, y0) = pts[0];
        if s <= 0.0 || s > pts[pts.len() - 1].1 {
            return None;
        }
        if self.interp == Interp::Linear && s <= y0 {
            return Some(s / y0 * x0);
        }
        let i = pts.partition_point(|p| p.1 < s);
        match self.interp {
            Interp::Step => Some(pts[i].0),
            Interp::Linear => {
                let (xb, yb) = pts[i];
                let (xa, ya) = pts[i - 1];
                if yb == s {
                    return Some(if ya == s { xa } else { xb });
                }
                Some(xa + (s - ya) / (yb - ya) * (xb - xa))
            }
        }
    }
}

/// A non-decreasing profile `t ↦ p(t)` with `p(0+) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Profile {
    /// `scale · t^alpha`
    PowerLaw { alpha: f64, scale: f64 },
    /// `exp(-1/t^beta)`
    ExpInvPower { beta: f64 },
    /// `scale · t^alpha / log(e/t)^beta`
    LogPower {
        beta: f64,
        scale: f64,
        #[serde(default)]
        alpha: f64,
    },
    Table(TableProfile),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassFResult {
    pub member: bool,
    pub verdict: Classification,
    /// Full integral for members, partial integral down to the truncation otherwise.
    pub integral_value_or_partial: f64,
    pub method: Method,
}

impl Profile {
    pub fn power(alpha: f64, scale: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("scale", scale)?;
        Ok(Profile::PowerLaw { alpha, scale })
    }

    pub fn exp_inv(beta: f64) -> Result<Self> {
        positive("beta", beta)?;
        Ok(Profile::ExpInvPower { beta })
    }

    pub fn log_power(beta: f64, scale: f64) -> Result<Self> {
        Self::log_power_with(beta, scale, 0.0)
    }

    pub fn log_power_with(beta: f64, scale: f64, alpha: f64) -> Result<Self> {
        positive("beta", beta)?;
        positive("scale", scale)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha must be non-negative, got {alpha}")));
        }
        Ok(Profile::LogPower { beta, scale, alpha })
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Profile::Table(TableProfile::new(points, Interp::Linear)?))
    }

    pub fn step_table(points: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Profile::Table(TableProfile::new(points, Interp::Step)?))
    }

    /// Parses `pow:α[:c]`, `expinv:β`, `logpow:β[:c[:α]]` or `table:path.json`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (fam, rest) = spec.split_once(':').ok_or_else(|| Error::Parse(format!("profile spec '{spec}' lacks a family prefix")))?;
        if fam == "table" {
            return Self::load_table(Path::new(rest));
        }
        let nums: Vec<f64> = rest
            .split(':')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}' in profile spec '{spec}'"))))
            .collect::<Result<_>>()?;
        let arity = |lo: usize, hi: usize| {
            if nums.len() < lo || nums.len() > hi {
                Err(Error::Parse(format!("profile '{fam}' takes {lo}..={hi} parameters")))
            } else {
                Ok(())
            }
        };
        match fam {
            "pow" => {
                arity(1, 2)?;
                Self::power(nums[0], nums.get(1).copied().unwrap_or(1.0))
            }
            "expinv" => {
                arity(1, 1)?;
                Self::exp_inv(nums[0])
            }
            "logpow" => {
                arity(1, 3)?;
                Self::log_power_with(nums[0], nums.get(1).copied().unwrap_or(1.0), nums.get(2).copied().unwrap_or(0.0))
            }
            other => Err(Error::Parse(format!("unknown profile family '{other}'"))),
        }
    }

    /// Reads `{"points": [[x, y], ...], "interp": "linear" | "step"}`.
    pub fn load_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let t: TableProfile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Ok(Profile::Table(TableProfile::new(t.points, t.interp)?))
    }

    /// Canonical textual form (tables are summarized).
    pub fn label(&self) -> String {
        match self {
            Profile::PowerLaw { alpha, scale } => format!("pow:{alpha}:{scale}"),
            Profile::ExpInvPower { beta } => format!("expinv:{beta}"),
            Profile::LogPower { beta, scale, alpha } => format!("logpow:{beta}:{scale}:{alpha}"),
            Profile::Table(t) => format!("table[{} points]", t.points.len()),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::OutOfDomain { value: t });
        }
        Ok(self.eval_unbounded(t))
    }

    /// Evaluation on `t > 0` (analytic families by formula, tables held at their last value); `0` for `t ≤ 0`.
    pub fn eval_unbounded(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Profile::PowerLaw { alpha, scale } => scale * t.powf(*alpha),
            Profile::ExpInvPower { beta } => (-t.powf(-beta)).exp(),
            Profile::LogPower { beta, scale, alpha } => {
                let l = 1.0 - t.ln();
                if l <= 0.0 {
                    f64::INFINITY
                } else {
                    scale * t.powf(*alpha) / l.powf(*beta)
                }
            }
            Profile::Table(tab) => tab.eval(t),
        }
    }

    pub fn sup_on(&self, t_max: f64) -> f64 {
        self.eval_unbounded(t_max)
    }

    /// Generalized inverse: the smallest `t ∈ (0,1]` with `p(t) ≥ s`.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        let top = self.eval_unbounded(1.0);
        if !(s > 0.0 && s <= top) {
            return Err(Error::OutOfDomain { value: s });
        }
        let t = match self {
            Profile::PowerLaw { alpha, scale } => (s / scale).powf(1.0 / alpha),
            Profile::ExpInvPower { beta } => (1.0 / (1.0 / s).ln()).powf(1.0 / beta),
            Profile::LogPower { beta, scale, alpha } if *alpha == 0.0 => (1.0 - (scale / s).powf(1.0 / beta)).exp(),
            Profile::LogPower { .. } => self.bisect_inverse(s),
            Profile::Table(tab) => tab.inverse(s).ok_or(Error::OutOfDomain { value: s })?,
        };
        Ok(t.min(1.0))
    }

    fn bisect_inverse(&self, s: f64) -> f64 {
        // geometric bisection: profiles vary over many decades near 0
        let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0f64);
        for _ in 0..2000 {
            let mid = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_unbounded(mid) >= s {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Whether `∫_0^1 p(x)/x² dx < ∞`.
    pub fn class_f_test(&self) -> ClassFResult {
        let closed = |member: bool, value: f64| ClassFResult {
            member,
            verdict: if member { Classification::Convergent } else { Classification::Divergent },
            integral_value_or_partial: value,
            method: Method::ClosedForm,
        };
        match self {
            Profile::PowerLaw { alpha, scale } => {
                if *alpha > 1.0 {
                    closed(true, scale / (alpha - 1.0))
                } else {
                    closed(false, self.dyadic_integral(DEFAULT_TABLE_DEPTH))
                }
            }
            Profile::ExpInvPower { .. } => closed(true, self.dyadic_integral(64)),
            Profile::LogPower { beta, alpha, .. } => {
                let member = *alpha > 1.0 || (*alpha == 1.0 && *beta > 1.0);
                closed(member, self.dyadic_integral(DEFAULT_TABLE_DEPTH))
            }
            Profile::Table(tab) => self.table_class_f(tab),
        }
    }

    fn shell_integral(&self, j: u32) -> f64 {
        let a = (-(j as f64) - 1.0).exp2();
        let b = (-(j as f64)).exp2();
        let bps: Vec<f64> = match self {
            Profile::Table(t) => t.points.iter().map(|p| p.0).collect(),
            _ => Vec::new(),
        };
        integrate(|x| self.eval_unbounded(x) / (x * x), a, b, &bps, QuadOptions::rel(1e-10))
            .map(|r| r.value)
            .unwrap_or_else(|e| match e {
                Error::Quadrature { estimate, .. } => estimate,
                _ => f64::NAN,
            })
    }

    fn dyadic_integral(&self, depth: u32) -> f64 {
        (0..depth).map(|j| self.shell_integral(j)).sum()
    }

    fn table_class_f(&self, tab: &TableProfile) -> ClassFResult {
        let x0 = tab.points[0].0;
        let shells = ((1.0 / x0).log2().floor() as u32).clamp(1, 60);
        let terms: Vec<f64> = (0..shells).map(|j| self.shell_integral(j)).collect();
        let partial: f64 = terms.iter().sum();
        let verdict = classify_tail(0, &terms);
        let value = match verdict {
            Classification::Convergent => partial + geometric_tail(0, &terms).unwrap_or(0.0),
            _ => partial,
        };
        ClassFResult { member: verdict == Classification::Convergent, verdict, integral_value_or_partial: value, method: Method::Quadrature }
    }

    /// The profile `ψ` with `ψ^{-1}(t) = √t · g(t)`.
    pub fn psi_from_g(&self) -> Result<Profile> {
        match self {
            Profile::PowerLaw { alpha, scale } => {
                let e = alpha + 0.5;
                Profile::power(1.0 / e, scale.powf(-1.0 / e))
            }
            _ => {
                let mut pts = Vec::new();
                let steps = 4 * DEFAULT_TABLE_DEPTH;
                for j in (0..=steps).rev() {
                    let t = (-(j as f64) / 4.0).exp2();
                    let x = t.sqrt() * self.eval_unbounded(t);
                    pts.push((x, t));
                }
                if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(invalid("√t·g(t) is not strictly increasing on the table grid"));
                }
                if pts[0].0 <= 0.0 {
                    return Err(invalid("√t·g(t) vanishes on the table grid"));
                }
                Profile::table(pts)
            }
        }
    }

    /// Step profile with value `((1+η)/(1-η))·p(2^{-n})` on `[2^{-(n+2)}, 2^{-(n+1)})`, `n < depth`,
    /// and the `n = 0` plateau continued over `[1/2, 1]`.
    pub fn psi_eta_raise(&self, eta: f64, depth: u32) -> Result<Profile> {
        if !(0.0..1.0).contains(&eta) {
            return Err(invalid(format!("eta={eta} not in [0,1)")));
        }
        let f = (1.0 + eta) / (1.0 - eta);
        let mut pts: Vec<(f64, f64)> = (0..depth.max(1))
            .rev()
            .map(|n| ((-(n as f64) - 2.0).exp2(), f * self.eval_unbounded((-(n as f64)).exp2())))
            .collect();
        // enforce monotonicity against rounding in table inputs
        for i in 1..pts.len() {
            pts[i].1 = pts[i].1.max(pts[i - 1].1);
        }
        Profile::step_table(pts)
    }

    /// Checks monotonicity on a log-spaced sample of `count` points of `(0, 1]`.
    pub fn is_monotone_sampled(&self, count: usize) -> bool {
        let mut prev = 0.0;
        for i in 0..count {
            let t = (-(40.0 * (count - 1 - i) as f64 / (count - 1).max(1) as f64)).exp2();
            let v = self.eval_unbounded(t);
            if v < prev {
                return false;
            }
            prev = v;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(Profile::power(1.0, 1.0).unwrap().eval(0.25).unwrap(), 0.25);
        assert!((Profile::exp_inv(1.0).unwrap().eval(0.5).unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        let t = Profile::table(vec![(0.5, 0.1), (1.0, 0.3)]).unwrap();
        assert!((t.eval(0.75).unwrap() - 0.2).abs() < 1e-15);
        assert!((t.eval(0.25).unwrap() - 0.05).abs() < 1e-15);
        assert!(t.eval(0.0).is_err());
        assert!(t.eval(1.5).is_err());
    }

    #[test]
    fn inverse_examples() {
        let p = Profile::power(2.0, 1.0).unwrap();
        assert!((p.inverse(0.25).unwrap() - 0.5).abs() < 1e-15);
        let t = Profile::table(vec![(0.25, 0.1), (0.5, 0.2), (1.0, 0.3)]).unwrap();
        assert_eq!(t.inverse(0.2).unwrap(), 0.5);
        assert_eq!(t.inverse(0.1).unwrap(), 0.25);
        assert!(p.inverse(2.0).is_err());
        let l = Profile::log_power(2.0, 0.5).unwrap();
        let s = l.eval(0.01).unwrap();
        assert!((l.inverse(s).unwrap() - 0.01).abs() < 1e-12);
        let la = Profile::log_power_with(2.0, 1.0, 1.0).unwrap();
        let s = la.eval(0.003).unwrap();
        assert!((la.eval(la.inverse(s).unwrap()).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn class_f_examples() {
        let r = Profile::power(4.0 / 3.0, 1.0).unwrap().class_f_test();
        assert!(r.member);
        assert!((r.integral_value_or_partial - 3.0).abs() < 1e-12);
        assert!(!Profile::power(1.0, 1.0).unwrap().class_f_test().member);
        assert!(Profile::log_power_with(2.0, 1.0, 1.0).unwrap().class_f_test().member);
        assert!(!Profile::log_power_with(1.0, 1.0, 1.0).unwrap().class_f_test().member);
        assert!(!Profile::log_power(2.0, 1.0).unwrap().class_f_test().member);
        let e = Profile::exp_inv(1.0).unwrap().class_f_test();
        assert!(e.member);
        // ∫_1^∞ e^{-u} du = e^{-1}
        assert!((e.integral_value_or_partial - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn psi_from_power() {
        let psi = Profile::power(0.25, 1.0).unwrap().psi_from_g().unwrap();
        match psi {
            Profile::PowerLaw { alpha, scale } => {
                assert!((alpha - 4.0 / 3.0).abs() < 1e-15);
                assert!((scale - 1.0).abs() < 1e-15);
            }
            _ => panic!("expected power law"),
        }
        let psi = Profile::power(0.5, 1.0).unwrap().psi_from_g().unwrap();
        assert!(!psi.class_f_test().member);
    }

    #[test]
    fn eta_raise_plateaus() {
        let p = Profile::power(1.0, 1.0).unwrap();
        let r = p.psi_eta_raise(0.0, 10).unwrap();
        for n in 0..10 {
            let x = 1.5 * (-(n as f64) - 2.0).exp2();
            assert_eq!(r.eval(x).unwrap(), (-(n as f64)).exp2());
        }
        assert_eq!(r.eval(0.75).unwrap(), 1.0);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(Profile::parse("pow:0.5").unwrap(), Profile::power(0.5, 1.0).unwrap());
        assert_eq!(Profile::parse("pow:2:0.5").unwrap(), Profile::power(2.0, 0.5).unwrap());
        assert_eq!(Profile::parse("expinv:1").unwrap(), Profile::exp_inv(1.0).unwrap());
        assert_eq!(Profile::parse("logpow:2:0.5").unwrap(), Profile::log_power(2.0, 0.5).unwrap());
        assert!(Profile::parse("pow").is_err());
        assert!(Profile::parse("pow:-1").is_err());
        assert!(Profile::parse("sin:1").is_err());
    }
}
