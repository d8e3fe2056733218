//! Truncated series with a tail-model classifier.

use serde::{Deserialize, Serialize};

/// Increments at or above `DIVERGENCE_C / n` over the whole tail window count as divergence.
pub const DIVERGENCE_C: f64 = 1e-3;
/// A fitted tail ratio at or below this counts as geometric decay.
pub const CONVERGENCE_Q: f64 = 0.9;
/// Largest log-residual of the tail fit, as a fraction of the fitted decline over the window.
pub const FIT_TOLERANCE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Divergent,
    Convergent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    TailModel,
    Quadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub classification: Classification,
    /// First level represented in `terms`/`partial_sums`.
    pub first_level: u32,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub method: Method,
}

impl SeriesVerdict {
    pub fn closed_form(classification: Classification, first_level: u32, terms: Vec<f64>) -> Self {
        assert!(classification != Classification::Inconclusive, "closed forms always decide");
        let partial_sums = partial_sums(&terms);
        SeriesVerdict { classification, first_level, terms, partial_sums, method: Method::ClosedForm }
    }

    pub fn tail_model(first_level: u32, terms: Vec<f64>) -> Self {
        let classification = classify_tail(first_level, &terms);
        let partial_sums = partial_sums(&terms);
        SeriesVerdict { classification, first_level, terms, partial_sums, method: Method::TailModel }
    }

    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

pub fn partial_sums(terms: &[f64]) -> Vec<f64> {
    terms
        .iter()
        .scan(0.0, |s, &t| {
            *s += t;
            Some(*s)
        })
        .collect()
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Geometric ratio fitted to the positive terms of the tail window, if there are enough.
pub fn tail_ratio(first_level: u32, terms: &[f64]) -> Option<f64> {
    tail_fit(first_level, terms).map(|(q, _)| q)
}

/// Fitted ratio and the largest log-residual of the fit over the tail window.
fn tail_fit(first_level: u32, terms: &[f64]) -> Option<(f64, f64)> {
    let w = window(terms.len());
    let start = terms.len() - w;
    let (xs, ys): (Vec<f64>, Vec<f64>) = terms[start..]
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0)
        .map(|(i, &t)| ((first_level as usize + start + i) as f64, t.ln()))
        .unzip();
    let slope = ls_slope(&xs, &ys)?;
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let residual = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).abs()).fold(0.0, f64::max);
    Some((slope.exp(), residual))
}

fn window(len: usize) -> usize {
    len.div_ceil(3)
}

/// Classify a non-negative series from its last third of terms.
///
/// `terms[i]` is the increment contributed by level `first_level + i`.
pub fn classify_tail(first_level: u32, terms: &[f64]) -> Classification {
    if terms.is_empty() {
        return Classification::Inconclusive;
    }
    let w = window(terms.len());
    let start = terms.len() - w;
    let tail = &terms[start..];
    if tail.iter().all(|&t| t == 0.0) {
        return Classification::Convergent;
    }
    if let Some((q, residual)) = tail_fit(first_level, terms) {
        // a decay fitted through scatter larger than the decay itself is not evidence
        let decline = -q.ln() * (w - 1) as f64;
        if q <= CONVERGENCE_Q && residual <= FIT_TOLERANCE * decline {
            return Classification::Convergent;
        }
    }
    let divergent = tail.iter().enumerate().all(|(i, &t)| {
        let n = (first_level as usize + start + i).max(1) as f64;
        t >= DIVERGENCE_C / n
    });
    if divergent {
        Classification::Divergent
    } else {
        Classification::Inconclusive
    }
}

/// Geometric extrapolation of the omitted tail `Σ_{i > len} terms_i`; `None` without a decaying fit.
pub fn geometric_tail(first_level: u32, terms: &[f64]) -> Option<f64> {
    let q = tail_ratio(first_level, terms)?;
    if q >= 1.0 {
        return None;
    }
    let last = terms.iter().rev().find(|&&t| t > 0.0).copied().unwrap_or(0.0);
    Some(last * q / (1.0 - q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_is_convergent() {
        let t: Vec<f64> = (1..=20).map(|n| 0.25f64.powi(n)).collect();
        assert_eq!(classify_tail(1, &t), Classification::Convergent);
        let q = tail_ratio(1, &t).unwrap();
        assert!((q - 0.25).abs() < 1e-12);
    }

    #[test]
    fn harmonic_and_constant_are_divergent() {
        let h: Vec<f64> = (1..=30).map(|n| 1.0 / n as f64).collect();
        assert_eq!(classify_tail(1, &h), Classification::Divergent);
        assert_eq!(classify_tail(1, &[1.0; 12]), Classification::Divergent);
    }

    #[test]
    fn oscillating_is_inconclusive() {
        let t: Vec<f64> = (1..=30).map(|n| if n % 2 == 0 { 1.0 } else { 0.0 }).collect();
        assert_eq!(classify_tail(1, &t), Classification::Inconclusive);
    }

    #[test]
    fn scattered_large_terms_are_not_convergent() {
        let t = [0.48, 1.03, 3.26, 1.12, 0.30, 2.66, 3.77, 0.89, 1.55, 2.08, 5.1, 1.42, 5.54, 0.66];
        assert_ne!(classify_tail(1, &t), Classification::Convergent);
        let noisy: Vec<f64> = (1..=20).map(|n| 0.5f64.powi(n) * if n % 2 == 0 { 1.2 } else { 0.9 }).collect();
        assert_eq!(classify_tail(1, &noisy), Classification::Convergent);
    }

    #[test]
    fn trailing_zeros_converge() {
        let mut t = vec![1.0; 10];
        t.extend([0.0; 10]);
        assert_eq!(classify_tail(1, &t), Classification::Convergent);
    }

    #[test]
    fn tail_estimate() {
        let t: Vec<f64> = (1..=20).map(|n| 0.5f64.powi(n)).collect();
        let tail = geometric_tail(1, &t).unwrap();
        assert!((tail - 0.5f64.powi(20)).abs() < 1e-15);
    }
}
