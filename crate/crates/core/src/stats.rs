//! Goodness-of-fit statistics for the Monte Carlo checks.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Result};

/// Asymptotic Kolmogorov critical value at the 1% level.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Effective sample size `n` (one-sample) or `n m / (n + m)` (two-sample).
    pub effective_n: f64,
    pub critical_1pct: f64,
    pub p_value: f64,
}

impl KsResult {
    fn new(statistic: f64, effective_n: f64) -> Self {
        Self {
            statistic,
            effective_n,
            critical_1pct: KS_CRITICAL_1PCT / effective_n.sqrt(),
            p_value: kolmogorov_sf(
                (effective_n.sqrt() + 0.12 + 0.11 / effective_n.sqrt()) * statistic,
            ),
        }
    }

    pub fn rejected_1pct(&self) -> bool {
        self.statistic > self.critical_1pct
    }
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov distance between the sample and `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(domain("empty sample"));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult::new(d, n))
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(domain("empty sample"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsResult::new(d, n * m / (n + m)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins after merging neighbours with expected count below 5.
    pub bins: usize,
}

/// Pearson goodness of fit of `observed` counts to cell probabilities `probs`.
/// Adjacent cells are merged from the left until each expects at least 5.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return Err(domain(
            "need matching observed and probability vectors with at least two cells",
        ));
    }
    if probs.iter().any(|&p| !(p >= 0.0)) {
        return Err(domain("cell probabilities must be >= 0"));
    }
    let total: u64 = observed.iter().sum();
    let psum: f64 = probs.iter().sum();
    let nt = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&oi, &pi) in observed.iter().zip(probs) {
        o += oi as f64;
        e += nt * pi / psum;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    if cells.len() < 2 {
        return Err(domain("too few cells with expected count >= 5"));
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| domain(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: chi.sf(statistic),
        bins: cells.len(),
    })
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
