//! Coalescent-time laws of a CPP with stem age `t`, and the closed forms of the
//! Feller diffusion limit.
//!
//! The generic functions take any [`NodeHeightModel`] and work with the
//! normalised node-height law `F(tau) = F_H(tau) / F_H(t)` on `[0, t]`.
//! Densities evaluate to zero outside their support so that they can be
//! integrated over boxes; malformed parameters are errors.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::models::NodeHeightModel;
use crate::numerics::{beta_unchecked, mu_unchecked};

/// How the stem age `T_1` is conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum StemConditioning {
    FixedStem {
        t: f64,
    },
    /// Uniform prior on `T_1` over `[0, t]`; `t` may be `+inf`.
    UniformPrior {
        #[serde(with = "maybe_infinite")]
        t: f64,
    },
    RootAtInfinity,
}

impl StemConditioning {
    pub fn validate(&self, model: &NodeHeightModel) -> Result<()> {
        match *self {
            StemConditioning::FixedStem { t } => {
                if !(t > 0.0) || t.is_infinite() {
                    return Err(domain(format!(
                        "fixed stem age must be finite and > 0, got {t}"
                    )));
                }
            }
            StemConditioning::UniformPrior { t } => {
                if !(t > 0.0) {
                    return Err(domain(format!(
                        "uniform prior horizon must be > 0, got {t}"
                    )));
                }
                if t.is_infinite() && model.total_mass() < 1.0 {
                    return Err(Error::UnsupportedConditioning(format!(
                        "uniform prior on [0, inf) needs total mass 1, {model} has {}",
                        model.total_mass()
                    )));
                }
            }
            StemConditioning::RootAtInfinity => {
                if model.total_mass() < 1.0 {
                    return Err(Error::UnsupportedConditioning(format!(
                        "root at infinity needs total mass 1 (a single ancestral founder), {model} has {}",
                        model.total_mass()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            StemConditioning::FixedStem { .. } => "fixed",
            StemConditioning::UniformPrior { .. } => "unif",
            StemConditioning::RootAtInfinity => "root-inf",
        }
    }
}

// JSON has no infinity; an infinite horizon is written as the string "inf"
pub(crate) mod maybe_infinite {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            Repr::Text("inf".into()).serialize(s)
        } else {
            Repr::Num(*v).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Conditioning data for the Feller diffusion closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FellerSetting {
    pub alpha: f64,
    pub t: f64,
    pub x: Option<f64>,
    pub nu: Option<f64>,
}

impl FellerSetting {
    pub fn new(alpha: f64, t: f64) -> Result<Self> {
        let s = Self {
            alpha,
            t,
            x: None,
            nu: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_x(mut self, x: f64) -> Result<Self> {
        self.x = Some(x);
        self.validate()?;
        Ok(self)
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        self.nu = Some(nu);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(domain(format!("alpha must be finite, got {}", self.alpha)));
        }
        if !(self.t > 0.0) || self.t.is_infinite() {
            return Err(domain(format!(
                "stem age t must be finite and > 0, got {}",
                self.t
            )));
        }
        if let Some(x) = self.x {
            if !(x > 0.0) || x.is_infinite() {
                return Err(domain(format!("x must be finite and > 0, got {x}")));
            }
        }
        if let Some(nu) = self.nu {
            if !(nu > 0.0) || nu.is_infinite() {
                return Err(domain(format!("nu must be finite and > 0, got {nu}")));
            }
        }
        Ok(())
    }

    pub fn require_x(&self) -> Result<f64> {
        self.x
            .ok_or(Error::MissingConditioning("x (scaled current population)"))
    }

    pub fn delta(&self) -> f64 {
        self.alpha.abs()
    }
}

// the normalised law on [0, t], with F_H(t) evaluated once
pub(crate) struct Normalized<'a> {
    model: &'a NodeHeightModel,
    t: f64,
    ft: f64,
    st: f64,
}

impl<'a> Normalized<'a> {
    pub(crate) fn new(model: &'a NodeHeightModel, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(domain(format!("stem age must be > 0, got {t}")));
        }
        let ft = model.cdf_raw(t);
        if !(ft > 0.0) {
            return Err(domain(format!(
                "F_H(t) = 0 at t = {t}; normalisation undefined"
            )));
        }
        Ok(Self {
            model,
            t,
            ft,
            st: model.sf_raw(t),
        })
    }

    pub(crate) fn t(&self) -> f64 {
        self.t
    }

    pub(crate) fn cdf(&self, tau: f64) -> f64 {
        if tau >= self.t {
            return 1.0;
        }
        (self.model.cdf_raw(tau) / self.ft).min(1.0)
    }

    pub(crate) fn sf(&self, tau: f64) -> f64 {
        if tau >= self.t {
            return 0.0;
        }
        if self.ft < 0.5 {
            return 1.0 - self.cdf(tau);
        }
        ((self.model.sf_raw(tau) - self.st) / self.ft).max(0.0)
    }

    pub(crate) fn pdf(&self, tau: f64) -> f64 {
        self.model.pdf_raw(tau) / self.ft
    }
}

fn ln_fact(n: usize) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

fn check_n_k(n: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(domain(format!("need n >= 2 leaves, got {n}")));
    }
    if k < 2 || k > n {
        return Err(domain(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    Ok(())
}

fn in_simplex(taus: &[f64], t: f64) -> bool {
    taus.iter().all(|&x| x > 0.0 && x < t) && taus.windows(2).all(|w| w[0] > w[1])
}

/// `(n-1)! prod F(tau_j)`, the integral of the ranked joint density of
/// `T_2 > ... > T_n` over the box `prod [0, tau_j]`.
///
/// `taus` holds `tau_2 > ... > tau_n`, all inside `(0, t)`. The box reaches
/// outside the ordered cone, so the value exceeds 1 when several `tau_j` sit
/// close to `t`.
pub fn joint_cdf_given_stem(
    model: &NodeHeightModel,
    t: f64,
    n: usize,
    taus: &[f64],
) -> Result<f64> {
    if n < 2 || taus.len() != n - 1 {
        return Err(domain(format!(
            "need n >= 2 and n - 1 times, got n = {n} with {} times",
            taus.len()
        )));
    }
    if !in_simplex(taus, t) {
        return Err(domain(format!(
            "times must be strictly decreasing inside (0, {t}), got {taus:?}"
        )));
    }
    let norm = Normalized::new(model, t)?;
    let ln = ln_fact(n - 1) + taus.iter().map(|&x| norm.cdf(x).ln()).sum::<f64>();
    Ok(ln.exp())
}

/// Joint density of the `k - 1` largest coalescent times `T_2 > ... > T_k`.
pub fn joint_density_top_k(
    model: &NodeHeightModel,
    t: f64,
    n: usize,
    k: usize,
    taus: &[f64],
) -> Result<f64> {
    check_n_k(n, k)?;
    if taus.len() != k - 1 {
        return Err(domain(format!(
            "need k - 1 = {} times, got {}",
            k - 1,
            taus.len()
        )));
    }
    let norm = Normalized::new(model, t)?;
    if !in_simplex(taus, t) {
        return Ok(0.0);
    }
    let last = taus[k - 2];
    let ln = ln_fact(n - 1) - ln_fact(n - k)
        + taus.iter().map(|&x| norm.pdf(x).ln()).sum::<f64>()
        + (n - k) as f64 * norm.cdf(last).ln();
    Ok(ln.exp())
}

/// Marginal density of `T_k` given `n` leaves and stem age `t`.
pub fn marginal_density_tk(
    model: &NodeHeightModel,
    t: f64,
    n: usize,
    k: usize,
    tau: f64,
) -> Result<f64> {
    check_n_k(n, k)?;
    let norm = Normalized::new(model, t)?;
    Ok(marginal_tk_norm(&norm, n, k, tau))
}

pub(crate) fn marginal_tk_norm(norm: &Normalized<'_>, n: usize, k: usize, tau: f64) -> f64 {
    if !(tau > 0.0 && tau < norm.t()) {
        return 0.0;
    }
    let coef = ln_fact(n - 1) - ln_fact(n - k) - ln_fact(k - 2);
    let ln = coef
        + (k - 2) as f64 * norm.sf(tau).ln()
        + norm.pdf(tau).ln()
        + (n - k) as f64 * norm.cdf(tau).ln();
    ln.exp()
}

/// Density of `T_i` at `tau` given `T_j = s` for `i < j`; does not depend on `n`.
pub fn cond_density_ti_given_tj(
    model: &NodeHeightModel,
    t: f64,
    i: usize,
    j: usize,
    s: f64,
    tau: f64,
) -> Result<f64> {
    if i < 2 || j <= i {
        return Err(domain(format!("need 2 <= i < j, got i = {i}, j = {j}")));
    }
    if !(s > 0.0 && s < t) {
        return Err(domain(format!(
            "conditioning time s must lie in (0, {t}), got {s}"
        )));
    }
    let norm = Normalized::new(model, t)?;
    if !(tau > s && tau < t) {
        return Ok(0.0);
    }
    let ss = norm.sf(s);
    let st = norm.sf(tau);
    let gap = (ss - st).max(0.0);
    let coef = ln_fact(j - 2) - ln_fact(i - 2) - ln_fact(j - i - 1);
    let ln = coef + (j - i - 1) as f64 * gap.ln() + (i - 2) as f64 * st.ln()
        - (j - 2) as f64 * ss.ln()
        + norm.pdf(tau).ln();
    Ok(ln.exp())
}

/// Density of `T_1` under a uniform prior on `[0, t]`, given `n` leaves: `n F^(n-1) f`.
pub fn unif_prior_t1_density(model: &NodeHeightModel, t: f64, n: usize, tau: f64) -> Result<f64> {
    if n < 1 {
        return Err(domain("need n >= 1 leaves"));
    }
    let norm = Normalized::new(model, t)?;
    if !(tau > 0.0 && tau < t) {
        return Ok(0.0);
    }
    Ok(n as f64 * norm.cdf(tau).powi(n as i32 - 1) * norm.pdf(tau))
}

/// Joint density of `T_1 > ... > T_n` under a uniform prior on `[0, t]`: `n! prod f`.
pub fn unif_prior_joint_density(
    model: &NodeHeightModel,
    t: f64,
    n: usize,
    taus: &[f64],
) -> Result<f64> {
    if n < 1 || taus.len() != n {
        return Err(domain(format!(
            "need n >= 1 and n times, got n = {n} with {} times",
            taus.len()
        )));
    }
    let norm = Normalized::new(model, t)?;
    if !in_simplex(taus, t) {
        return Ok(0.0);
    }
    let ln = ln_fact(n) + taus.iter().map(|&x| norm.pdf(x).ln()).sum::<f64>();
    Ok(ln.exp())
}

// x / beta(tau) - x / beta(t), at |alpha|
fn feller_gap(delta: f64, x: f64, t: f64, tau: f64) -> f64 {
    x / beta_unchecked(tau, delta) - x / beta_unchecked(t, delta)
}

// x mu(tau) / (2 beta(tau)), at |alpha|
fn feller_rate(delta: f64, x: f64, tau: f64) -> f64 {
    x * mu_unchecked(tau, delta) / (2.0 * beta_unchecked(tau, delta))
}

/// Joint density of the population coalescent times `T_2 > ... > T_k` of a
/// Feller diffusion conditioned on `X(t) = x`.
pub fn feller_joint_density(setting: &FellerSetting, k: usize, taus: &[f64]) -> Result<f64> {
    setting.validate()?;
    let x = setting.require_x()?;
    if k < 2 || taus.len() != k - 1 {
        return Err(domain(format!(
            "need k >= 2 and k - 1 times, got k = {k} with {} times",
            taus.len()
        )));
    }
    let (delta, t) = (setting.delta(), setting.t);
    if !in_simplex(taus, t) {
        return Ok(0.0);
    }
    let ln = taus
        .iter()
        .map(|&tau| feller_rate(delta, x, tau).ln())
        .sum::<f64>()
        - feller_gap(delta, x, t, taus[k - 2]);
    Ok(ln.exp())
}

/// Marginal density of `T_k` for a Feller diffusion conditioned on `X(t) = x`.
pub fn feller_marginal_tk(setting: &FellerSetting, k: usize, tau: f64) -> Result<f64> {
    setting.validate()?;
    let x = setting.require_x()?;
    if k < 2 {
        return Err(domain(format!("need k >= 2, got {k}")));
    }
    let (delta, t) = (setting.delta(), setting.t);
    if !(tau > 0.0 && tau < t) {
        return Ok(0.0);
    }
    let d = feller_gap(delta, x, t, tau);
    let ln = (k - 2) as f64 * d.ln() - ln_fact(k - 2) + feller_rate(delta, x, tau).ln() - d;
    Ok(ln.exp())
}

/// Density of `T_i` at `tau` given `T_j = s` (`i < j`) for a Feller diffusion;
/// independent of the final population.
pub fn feller_cond_ti_given_tj(
    setting: &FellerSetting,
    i: usize,
    j: usize,
    s: f64,
    tau: f64,
) -> Result<f64> {
    setting.validate()?;
    if i < 2 || j <= i {
        return Err(domain(format!("need 2 <= i < j, got i = {i}, j = {j}")));
    }
    let (delta, t) = (setting.delta(), setting.t);
    if !(s > 0.0 && s < t) {
        return Err(domain(format!(
            "conditioning time s must lie in (0, {t}), got {s}"
        )));
    }
    if !(tau > s && tau < t) {
        return Ok(0.0);
    }
    let (bs, bt, btau) = (
        beta_unchecked(s, delta),
        beta_unchecked(t, delta),
        beta_unchecked(tau, delta),
    );
    let coef = ln_fact(j - 2) - ln_fact(i - 2) - ln_fact(j - i - 1) - std::f64::consts::LN_2;
    let (i_, j_) = (i as f64, j as f64);
    let ln = coef + mu_unchecked(tau, delta).ln() + (i_ - 1.0) * bs.ln() + (j_ - i_) * bt.ln()
        - (j_ - 2.0) * btau.ln()
        + (j_ - i_ - 1.0) * (btau - bs).ln()
        + (i_ - 2.0) * (bt - btau).ln()
        - (j_ - 2.0) * (bt - bs).ln();
    Ok(ln.exp())
}

/// `P(T_i <= tau | T_1 = t) = 1 - (1 - beta(tau) / beta(t))^(i-1)` for a Feller
/// diffusion conditioned only on non-extinction; uses the signed drift.
pub fn feller_popcoal_cdf(setting: &FellerSetting, i: usize, tau: f64) -> Result<f64> {
    setting.validate()?;
    if i < 2 {
        return Err(domain(format!("need i >= 2, got {i}")));
    }
    let t = setting.t;
    if !(tau >= 0.0) {
        return Err(domain(format!("tau must be >= 0, got {tau}")));
    }
    if tau >= t {
        return Ok(1.0);
    }
    let b = beta_unchecked(tau, setting.alpha) / beta_unchecked(t, setting.alpha);
    Ok(-((i - 1) as f64 * (-b).ln_1p()).exp_m1())
}

/// Density matching [`feller_popcoal_cdf`]:
/// `(i-1)/2 * mu(tau) beta(tau) / beta(t) * (1 - beta(tau)/beta(t))^(i-2)`.
pub fn feller_popcoal_pdf(setting: &FellerSetting, i: usize, tau: f64) -> Result<f64> {
    setting.validate()?;
    if i < 2 {
        return Err(domain(format!("need i >= 2, got {i}")));
    }
    let (alpha, t) = (setting.alpha, setting.t);
    if !(tau > 0.0 && tau < t) {
        return Ok(0.0);
    }
    let bt = beta_unchecked(t, alpha);
    let b = beta_unchecked(tau, alpha) / bt;
    Ok(0.5 * (i - 1) as f64 * (alpha * tau).exp() / bt * (1.0 - b).powi(i as i32 - 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureSpec};
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::new(1e-12, 1e-11, 2000).unwrap()
    }

    fn models() -> Vec<NodeHeightModel> {
        vec![
            NodeHeightModel::wiuf(1.0, 1.0).unwrap(),
            NodeHeightModel::wiuf(2.0, 0.05).unwrap(),
            NodeHeightModel::birth_death(1.0, 2.0).unwrap(),
            NodeHeightModel::birth_death(1.5, 1.5).unwrap(),
            NodeHeightModel::poisson_feller(-1.0, 0.7).unwrap(),
        ]
    }

    #[test]
    fn joint_cdf_small_cases() {
        let w = NodeHeightModel::wiuf(1.0, 1.0).unwrap();
        let t = 3f64.ln();
        let f2 = w.normalized_cdf(t, 2f64.ln()).unwrap();
        assert_relative_eq!(
            joint_cdf_given_stem(&w, t, 2, &[2f64.ln()]).unwrap(),
            f2,
            max_relative = 1e-14
        );
        // F(log 1.5) = (0.5/1.5) / (2/3) = 0.5
        let v = joint_cdf_given_stem(&w, t, 3, &[2f64.ln(), 1.5f64.ln()]).unwrap();
        assert_relative_eq!(v, 2.0 * 0.75 * 0.5, max_relative = 1e-13);
        assert!(joint_cdf_given_stem(&w, t, 3, &[0.2, 0.5]).is_err());
        assert!(joint_cdf_given_stem(&w, t, 3, &[0.2]).is_err());
        assert!(joint_cdf_given_stem(&w, t, 2, &[2.0]).is_err());
    }

    #[test]
    fn top_k_reduces_to_order_statistic() {
        for m in models() {
            let t = 1.3;
            for n in 2..7 {
                for &tau in &[0.1, 0.6, 1.2] {
                    let a = joint_density_top_k(&m, t, n, 2, &[tau]).unwrap();
                    let f = m.normalized_pdf(t, tau).unwrap();
                    let big = m.normalized_cdf(t, tau).unwrap();
                    assert_relative_eq!(
                        a,
                        (n - 1) as f64 * f * big.powi(n as i32 - 2),
                        max_relative = 1e-12
                    );
                    assert_relative_eq!(
                        a,
                        marginal_density_tk(&m, t, n, 2, tau).unwrap(),
                        max_relative = 1e-12
                    );
                }
            }
        }
        let w = NodeHeightModel::wiuf(1.0, 1.0).unwrap();
        assert!(joint_density_top_k(&w, 1.0, 3, 4, &[0.5, 0.4, 0.3]).is_err());
        assert_eq!(
            joint_density_top_k(&w, 1.0, 3, 3, &[0.4, 0.5]).unwrap(),
            0.0
        );
    }

    #[test]
    fn top_k_normalises_on_simplex() {
        let w = NodeHeightModel::wiuf(1.0, 1.0).unwrap();
        let sp = QuadratureSpec::new(1e-11, 1e-10, 2000).unwrap();
        let total = integrate(
            |a| {
                integrate(
                    |b| joint_density_top_k(&w, 1.0, 3, 3, &[a, b]).unwrap(),
                    0.0,
                    a,
                    &sp,
                )
                .unwrap()
            },
            0.0,
            1.0,
            &sp,
        )
        .unwrap();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn marginals_normalise() {
        for m in models() {
            for &t in &[0.5, 2.0] {
                for n in 2..=8 {
                    for k in 2..=n {
                        let z = integrate(
                            |x| marginal_density_tk(&m, t, n, k, x).unwrap(),
                            0.0,
                            t,
                            &spec(),
                        )
                        .unwrap();
                        assert!((z - 1.0).abs() < 1e-8, "{m} n={n} k={k} {z}");
                    }
                }
            }
        }
    }

    #[test]
    fn conditional_normalises_and_ignores_n() {
        for m in models() {
            let t = 2.0;
            for &(i, j) in &[(2, 3), (2, 4), (3, 5), (4, 9)] {
                for &s in &[0.05, 0.8, 1.7] {
                    let z = integrate(
                        |x| cond_density_ti_given_tj(&m, t, i, j, s, x).unwrap(),
                        s,
                        t,
                        &spec(),
                    )
                    .unwrap();
                    assert!((z - 1.0).abs() < 1e-8, "{m} i={i} j={j} s={s}: {z}");
                }
            }
            let s = 0.3;
            for &tau in &[0.4, 1.0, 1.9] {
                let f = m.normalized_pdf(t, tau).unwrap();
                let big_s = m.normalized_cdf(t, s).unwrap();
                let want = f / (1.0 - big_s);
                assert_relative_eq!(
                    cond_density_ti_given_tj(&m, t, 2, 3, s, tau).unwrap(),
                    want,
                    max_relative = 1e-12
                );
            }
        }
        let w = NodeHeightModel::wiuf(1.0, 1.0).unwrap();
        assert!(cond_density_ti_given_tj(&w, 1.0, 3, 3, 0.2, 0.5).is_err());
        assert!(cond_density_ti_given_tj(&w, 1.0, 2, 3, 1.2, 0.5).is_err());
        assert_eq!(
            cond_density_ti_given_tj(&w, 1.0, 2, 3, 0.4, 0.3).unwrap(),
            0.0
        );
    }

    #[test]
    fn conditional_is_ratio_of_joint_marginals() {
        // f(T_i | T_j) from the 2-d marginal of the order statistics, n = 6
        let m = NodeHeightModel::wiuf(1.3, 0.4).unwrap();
        let t = 1.5;
        let n = 6;
        let (i, j, s, tau) = (2usize, 4usize, 0.5, 0.9);
        let norm = Normalized::new(&m, t).unwrap();
        let (fs, ft, st) = (norm.cdf(s), norm.cdf(tau), norm.sf(tau));
        let ln_joint = ln_fact(n - 1) - ln_fact(i - 2) - ln_fact(j - i - 1) - ln_fact(n - j)
            + (i - 2) as f64 * st.ln()
            + (j - i - 1) as f64 * (ft - fs).ln()
            + (n - j) as f64 * fs.ln()
            + norm.pdf(tau).ln()
            + norm.pdf(s).ln();
        let joint = ln_joint.exp();
        let marg = marginal_density_tk(&m, t, n, j, s).unwrap();
        assert_relative_eq!(
            joint / marg,
            cond_density_ti_given_tj(&m, t, i, j, s, tau).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn uniform_prior_identity() {
        for m in models() {
            let t = 1.7;
            assert_relative_eq!(
                integrate(
                    |x| unif_prior_t1_density(&m, t, 4, x).unwrap(),
                    0.0,
                    t,
                    &spec()
                )
                .unwrap(),
                1.0,
                max_relative = 1e-9
            );
            for &tau in &[0.2, 1.0] {
                assert_relative_eq!(
                    unif_prior_t1_density(&m, t, 1, tau).unwrap(),
                    m.normalized_pdf(t, tau).unwrap(),
                    max_relative = 1e-14
                );
            }
            for taus in [[1.5, 1.0, 0.3], [0.9, 0.5, 0.1], [1.6, 1.59, 0.01]] {
                let a = unif_prior_joint_density(&m, t, 3, &taus).unwrap();
                let b = joint_density_top_k(&m, t, 4, 4, &taus).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-13);
            }
        }
    }

    fn fs(alpha: f64, t: f64, x: f64) -> FellerSetting {
        FellerSetting::new(alpha, t).unwrap().with_x(x).unwrap()
    }

    #[test]
    fn feller_documented_values() {
        let s = fs(0.0, 1.0, 1.0);
        let want = 8.0 * (-2.0f64).exp();
        assert_relative_eq!(
            feller_joint_density(&s, 2, &[0.5]).unwrap(),
            want,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            feller_marginal_tk(&s, 2, 0.5).unwrap(),
            want,
            max_relative = 1e-14
        );
        assert_relative_eq!(want, 1.082_682, epsilon = 1e-6);
        let p = FellerSetting::new(0.0, 1.0).unwrap();
        assert_relative_eq!(
            feller_popcoal_cdf(&p, 2, 0.5).unwrap(),
            0.5,
            max_relative = 1e-15
        );
        assert!(matches!(
            feller_marginal_tk(&p, 2, 0.5),
            Err(Error::MissingConditioning(_))
        ));
    }

    #[test]
    fn feller_marginals_sum_over_k() {
        let s = fs(0.0, 1.0, 1.0);
        let total: f64 = (2..=60)
            .map(|k| feller_marginal_tk(&s, k, 0.5).unwrap())
            .sum();
        assert_relative_eq!(total, feller_rate(0.0, 1.0, 0.5), max_relative = 1e-10);
    }

    #[test]
    fn feller_densities_normalise() {
        for &alpha in &[0.0, 1.0, -1.0, 2.5] {
            for &x in &[0.3, 1.0, 4.0] {
                let s = fs(alpha, 1.5, x);
                for k in 2..=6 {
                    let z = integrate(
                        |tau| feller_marginal_tk(&s, k, tau).unwrap(),
                        0.0,
                        1.5,
                        &spec(),
                    )
                    .unwrap();
                    assert!((z - 1.0).abs() < 1e-8, "alpha={alpha} x={x} k={k}: {z}");
                }
            }
            let s = FellerSetting::new(alpha, 2.0).unwrap();
            for &(i, j) in &[(2, 3), (2, 4), (3, 5)] {
                for &c in &[0.1, 1.0, 1.8] {
                    let z = integrate(
                        |tau| feller_cond_ti_given_tj(&s, i, j, c, tau).unwrap(),
                        c,
                        2.0,
                        &spec(),
                    )
                    .unwrap();
                    assert!((z - 1.0).abs() < 1e-8, "alpha={alpha} ({i},{j}) s={c}: {z}");
                }
            }
            for i in 2..6 {
                let z = integrate(
                    |tau| feller_popcoal_pdf(&s, i, tau).unwrap(),
                    0.0,
                    2.0,
                    &spec(),
                )
                .unwrap();
                assert!((z - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn feller_joint_marginalises() {
        // integrate out tau_2 from the k = 3 joint to recover the k = 3 marginal
        let s = fs(0.7, 1.2, 1.5);
        for &tau3 in &[0.2, 0.6, 1.0] {
            let m = integrate(
                |a| feller_joint_density(&s, 3, &[a, tau3]).unwrap(),
                tau3,
                1.2,
                &spec(),
            )
            .unwrap();
            assert_relative_eq!(
                m,
                feller_marginal_tk(&s, 3, tau3).unwrap(),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn feller_forms_use_abs_alpha() {
        for &a in &[0.3, 1.0, 2.7] {
            let (p, m) = (fs(a, 1.0, 2.0), fs(-a, 1.0, 2.0));
            for &tau in &[0.1, 0.5, 0.9] {
                assert_eq!(
                    feller_marginal_tk(&p, 3, tau).unwrap(),
                    feller_marginal_tk(&m, 3, tau).unwrap()
                );
                assert_eq!(
                    feller_cond_ti_given_tj(&p, 2, 4, 0.05, tau).unwrap(),
                    feller_cond_ti_given_tj(&m, 2, 4, 0.05, tau).unwrap()
                );
            }
            assert_eq!(
                feller_joint_density(&p, 3, &[0.7, 0.2]).unwrap(),
                feller_joint_density(&m, 3, &[0.7, 0.2]).unwrap()
            );
        }
    }

    #[test]
    fn feller_conditional_is_small_gamma_limit() {
        // Wiuf form with gamma = 2 delta x / n for large n
        let (delta, t, x) = (1.0, 1.0, 1.0);
        let n = 1e6;
        let w = NodeHeightModel::wiuf(delta, 2.0 * delta * x / n).unwrap();
        let s = FellerSetting::new(delta, t).unwrap();
        for &(i, j) in &[(2, 3), (2, 5), (3, 4)] {
            for &tau in &[0.4, 0.7, 0.95] {
                let a = feller_cond_ti_given_tj(&s, i, j, 0.3, tau).unwrap();
                let b = cond_density_ti_given_tj(&w, t, i, j, 0.3, tau).unwrap();
                assert!(
                    (a - b).abs() < 1e-4 * a.max(1.0),
                    "({i},{j}) tau={tau}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn feller_marginal_is_large_n_limit() {
        let (delta, t, x) = (0.8, 1.0, 1.2);
        let n = 1_000_000usize;
        let w = NodeHeightModel::wiuf(delta, 2.0 * delta * x / n as f64).unwrap();
        let s = fs(delta, t, x);
        for k in 2..5 {
            for &tau in &[0.3, 0.6] {
                let a = feller_marginal_tk(&s, k, tau).unwrap();
                let b = marginal_density_tk(&w, t, n, k, tau).unwrap();
                assert!(
                    (a - b).abs() < 1e-4 * a.max(1.0),
                    "k={k} tau={tau}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn alpha_continuity() {
        for &a in &[1e-8, -1e-8] {
            let (p, z) = (fs(a, 1.0, 1.0), fs(0.0, 1.0, 1.0));
            assert!(
                (feller_marginal_tk(&p, 3, 0.4).unwrap() - feller_marginal_tk(&z, 3, 0.4).unwrap())
                    .abs()
                    < 1e-6
            );
            assert!(
                (feller_popcoal_cdf(&p, 3, 0.4).unwrap() - feller_popcoal_cdf(&z, 3, 0.4).unwrap())
                    .abs()
                    < 1e-6
            );
        }
    }

    #[test]
    fn popcoal_monotone_in_i() {
        let s = FellerSetting::new(-0.5, 2.0).unwrap();
        for &tau in &[0.1, 1.0, 1.9] {
            let mut prev = 0.0;
            for i in 2..20 {
                let c = feller_popcoal_cdf(&s, i, tau).unwrap();
                assert!(c >= prev);
                prev = c;
            }
        }
        assert_eq!(feller_popcoal_cdf(&s, 2, 2.0).unwrap(), 1.0);
        assert!(feller_popcoal_cdf(&s, 1, 1.0).is_err());
    }

    #[test]
    fn popcoal_is_mixture_over_exponential_population() {
        // averaging the x-conditioned T_2 law over X(t) ~ Exp(mean beta(t; alpha))
        for &alpha in &[1.0, -1.0] {
            let t = 1.5;
            let mean = beta_unchecked(t, alpha);
            let tau = 0.6;
            let cdf_given_x = |x: f64| (-feller_gap(alpha.abs(), x, t, tau)).exp();
            let mixed = integrate(
                |x| cdf_given_x(x) * (-x / mean).exp() / mean,
                0.0,
                f64::INFINITY,
                &spec(),
            )
            .unwrap();
            let s = FellerSetting::new(alpha, t).unwrap();
            assert_relative_eq!(
                mixed,
                feller_popcoal_cdf(&s, 2, tau).unwrap(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn conditioning_validation() {
        let sub = NodeHeightModel::birth_death(1.0, 2.0).unwrap();
        assert!(StemConditioning::RootAtInfinity.validate(&sub).is_err());
        assert!(StemConditioning::UniformPrior { t: f64::INFINITY }
            .validate(&sub)
            .is_err());
        assert!(StemConditioning::UniformPrior { t: 3.0 }
            .validate(&sub)
            .is_ok());
        assert!(StemConditioning::FixedStem { t: 0.0 }
            .validate(&sub)
            .is_err());
        assert!(FellerSetting::new(0.0, -1.0).is_err());
        assert!(FellerSetting::new(0.0, 1.0).unwrap().with_x(0.0).is_err());
    }
}
