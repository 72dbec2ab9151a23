//! Node-height distributions.
//!
//! Every model here is a law on `[0, inf]` for the depth of a node of a
//! coalescent point process. Mass at `+inf` is allowed (sub-critical
//! birth-death without conditioning on a single founder), so `total_mass`
//! may be below one.
//!
//! Parameter validation happens in the constructors; a constructed model is
//! always valid.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::numerics::beta_unchecked;

/// The variant data of a [`NodeHeightModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Reconstructed tree of a linear birth-death process.
    BirthDeath { lambda: f64, mu: f64 },
    /// Birth-death node height rescaled by its mass, i.e. conditioned on a single founder.
    BirthDeathSingleAncestor { lambda: f64, mu: f64 },
    /// `(e^{delta tau} - 1) / (e^{delta tau} - 1 + gamma)`.
    WiufForm { delta: f64, gamma: f64 },
    /// Bernoulli sampling of the tips of `base` with retention probability `rho`.
    BernoulliThinned {
        base: Box<NodeHeightModel>,
        rho: f64,
    },
    /// Feller diffusion with drift `alpha`, Poisson-sampled at rate `nu`.
    PoissonFeller { alpha: f64, nu: f64 },
}

/// A node-height distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeHeightModel {
    kind: ModelKind,
}

fn check_rate(name: &str, v: f64, strict: bool) -> Result<()> {
    let ok = if strict { v > 0.0 } else { v >= 0.0 };
    if !ok || !v.is_finite() {
        let bound = if strict { "> 0" } else { ">= 0" };
        return Err(domain(format!(
            "{name} must be finite and {bound}, got {v}"
        )));
    }
    Ok(())
}

impl NodeHeightModel {
    pub fn birth_death(lambda: f64, mu: f64) -> Result<Self> {
        check_rate("lambda", lambda, true)?;
        check_rate("mu", mu, false)?;
        Ok(Self {
            kind: ModelKind::BirthDeath { lambda, mu },
        })
    }

    pub fn birth_death_single_ancestor(lambda: f64, mu: f64) -> Result<Self> {
        check_rate("lambda", lambda, true)?;
        check_rate("mu", mu, false)?;
        Ok(Self {
            kind: ModelKind::BirthDeathSingleAncestor { lambda, mu },
        })
    }

    pub fn wiuf(delta: f64, gamma: f64) -> Result<Self> {
        check_rate("delta", delta, true)?;
        check_rate("gamma", gamma, true)?;
        Ok(Self {
            kind: ModelKind::WiufForm { delta, gamma },
        })
    }

    pub fn bernoulli_thinned(base: NodeHeightModel, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(domain(format!("rho must lie in (0, 1], got {rho}")));
        }
        Ok(Self {
            kind: ModelKind::BernoulliThinned {
                base: Box::new(base),
                rho,
            },
        })
    }

    pub fn poisson_feller(alpha: f64, nu: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(domain(format!("alpha must be finite, got {alpha}")));
        }
        check_rate("nu", nu, true)?;
        Ok(Self {
            kind: ModelKind::PoissonFeller { alpha, nu },
        })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// `P(H <= tau)`; `tau` may be `+inf`.
    pub fn cdf(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.cdf_raw(tau))
    }

    /// `P(H > tau)`, computed without cancellation.
    pub fn sf(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.sf_raw(tau))
    }

    /// Density of the node height; the analytic derivative of [`cdf`](Self::cdf).
    pub fn pdf(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.pdf_raw(tau))
    }

    /// `lim_{tau -> inf} cdf(tau)`.
    pub fn total_mass(&self) -> f64 {
        match &self.kind {
            ModelKind::BirthDeath { lambda, mu } => {
                if lambda >= mu {
                    1.0
                } else {
                    lambda / mu
                }
            }
            ModelKind::BernoulliThinned { base, rho } => {
                let m = base.total_mass();
                if m == 1.0 {
                    1.0
                } else {
                    rho * m / (1.0 - (1.0 - rho) * m)
                }
            }
            _ => 1.0,
        }
    }

    pub(crate) fn cdf_raw(&self, tau: f64) -> f64 {
        match &self.kind {
            ModelKind::BirthDeath { lambda, mu } => {
                let b = 2.0 * lambda * beta_unchecked(tau, lambda - mu);
                if b.is_infinite() {
                    1.0
                } else {
                    b / (1.0 + b)
                }
            }
            ModelKind::BirthDeathSingleAncestor { lambda, mu } => {
                let bd = ModelKind::BirthDeath {
                    lambda: *lambda,
                    mu: *mu,
                };
                let f = Self { kind: bd }.cdf_raw(tau);
                if lambda >= mu {
                    f
                } else {
                    (f * mu / lambda).min(1.0)
                }
            }
            ModelKind::WiufForm { delta, gamma } => {
                let e = (delta * tau).exp_m1();
                if e.is_infinite() {
                    1.0
                } else {
                    e / (e + gamma)
                }
            }
            ModelKind::BernoulliThinned { base, rho } => {
                let f = base.cdf_raw(tau);
                let s = base.sf_raw(tau);
                rho * f / (s + rho * f)
            }
            ModelKind::PoissonFeller { alpha, nu } => {
                let (delta, c) = feller_scale(*alpha, *nu);
                let b = 2.0 * beta_unchecked(tau, delta);
                if b.is_infinite() {
                    1.0
                } else {
                    b / (b + c)
                }
            }
        }
    }

    pub(crate) fn sf_raw(&self, tau: f64) -> f64 {
        match &self.kind {
            ModelKind::BirthDeath { lambda, mu } => {
                let b = 2.0 * lambda * beta_unchecked(tau, lambda - mu);
                1.0 / (1.0 + b)
            }
            ModelKind::BirthDeathSingleAncestor { lambda, mu } => {
                let alpha = lambda - mu;
                let beta = beta_unchecked(tau, alpha);
                if alpha >= 0.0 {
                    1.0 / (1.0 + 2.0 * lambda * beta)
                } else {
                    // (1 + 2 alpha beta) / (1 + 2 lambda beta) = e^{alpha tau} / (1 + 2 lambda beta)
                    (alpha * tau).exp() / (1.0 + 2.0 * lambda * beta)
                }
            }
            ModelKind::WiufForm { delta, gamma } => {
                let e = (delta * tau).exp_m1();
                gamma / (e + gamma)
            }
            ModelKind::BernoulliThinned { base, rho } => {
                let f = base.cdf_raw(tau);
                let s = base.sf_raw(tau);
                s / (s + rho * f)
            }
            ModelKind::PoissonFeller { alpha, nu } => {
                let (delta, c) = feller_scale(*alpha, *nu);
                let b = 2.0 * beta_unchecked(tau, delta);
                c / (b + c)
            }
        }
    }

    pub(crate) fn pdf_raw(&self, tau: f64) -> f64 {
        if tau.is_infinite() {
            return 0.0;
        }
        match &self.kind {
            ModelKind::BirthDeath { lambda, mu } => {
                let alpha = lambda - mu;
                if alpha * tau > 700.0 {
                    return 0.0;
                }
                let s = 1.0 / (1.0 + 2.0 * lambda * beta_unchecked(tau, alpha));
                lambda * (alpha * tau).exp() * s * s
            }
            ModelKind::BirthDeathSingleAncestor { lambda, mu } => {
                let bd = Self {
                    kind: ModelKind::BirthDeath {
                        lambda: *lambda,
                        mu: *mu,
                    },
                };
                let f = bd.pdf_raw(tau);
                if lambda >= mu {
                    f
                } else {
                    f * mu / lambda
                }
            }
            ModelKind::WiufForm { delta, gamma } => {
                let s = self.sf_raw(tau);
                delta * s / (1.0 + (gamma - 1.0) * (-delta * tau).exp())
            }
            ModelKind::BernoulliThinned { base, rho } => {
                let f = base.cdf_raw(tau);
                let s = base.sf_raw(tau);
                let d = s + rho * f;
                rho * base.pdf_raw(tau) / (d * d)
            }
            ModelKind::PoissonFeller { alpha, nu } => {
                let (delta, c) = feller_scale(*alpha, *nu);
                let s = self.sf_raw(tau);
                // e^{delta tau} / (2 beta(tau; delta) + c) = 1 / (2 beta(tau; -delta) + c e^{-delta tau})
                s / (2.0 * beta_unchecked(tau, -delta) + c * (-delta * tau).exp())
            }
        }
    }

    /// The `tau` with `cdf(tau) = p`, for `0 <= p < total_mass`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        let mass = self.total_mass();
        if !(p >= 0.0 && p < mass) {
            return Err(domain(format!("quantile needs 0 <= p < {mass}, got {p}")));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        if let ModelKind::WiufForm { delta, gamma } = self.kind {
            return Ok((gamma * p / (1.0 - p)).ln_1p() / delta);
        }
        Ok(self.invert(p, false))
    }

    /// The `tau` with `sf(tau) = q`, for `1 - total_mass < q <= 1`.
    pub fn quantile_sf(&self, q: f64) -> Result<f64> {
        let mass = self.total_mass();
        if !(q > 1.0 - mass && q <= 1.0) {
            return Err(domain(format!(
                "survival quantile needs {} < q <= 1, got {q}",
                1.0 - mass
            )));
        }
        if q == 1.0 {
            return Ok(0.0);
        }
        if let ModelKind::WiufForm { delta, gamma } = self.kind {
            return Ok((gamma * (1.0 - q) / q).ln_1p() / delta);
        }
        Ok(self.invert(q, true))
    }

    // bisection on the monotone cdf (or sf); the bracket is grown by doubling
    fn invert(&self, target: f64, upper: bool) -> f64 {
        let below = |tau: f64| {
            if upper {
                self.sf_raw(tau) > target
            } else {
                self.cdf_raw(tau) < target
            }
        };
        let mut lo = 0.0;
        let mut hi = 1.0;
        while below(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return hi;
            }
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// `1 / (1 - F_H(tau))`; infinite where the cdf reaches one.
    pub fn inverse_tail(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(1.0 / self.sf_raw(tau))
    }

    /// `d/dtau log(1 / (1 - F_H(tau)))`, the death rate of the reversed reconstructed process.
    pub fn effective_death_rate(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        let s = self.sf_raw(tau);
        if !(s > 0.0) {
            return Err(domain(format!(
                "effective death rate undefined where cdf = 1 (tau = {tau})"
            )));
        }
        Ok(self.pdf_raw(tau) / s)
    }

    /// `(delta, gamma)` such that the Wiuf form reproduces this model's
    /// single-founder node-height law.
    pub fn to_wiuf_form(&self) -> Result<(f64, f64)> {
        match &self.kind {
            ModelKind::WiufForm { delta, gamma } => Ok((*delta, *gamma)),
            ModelKind::BirthDeath { lambda, mu } if lambda > mu => Ok((lambda - mu, (lambda - mu) / lambda)),
            ModelKind::BirthDeath { lambda, mu } if lambda < mu => Err(Error::Unsupported(format!(
                "sub-critical birth-death (lambda = {lambda}, mu = {mu}) has mass at infinity; use the single-ancestor model"
            ))),
            ModelKind::BirthDeath { .. } | ModelKind::BirthDeathSingleAncestor { .. } if self.is_critical_bd() => Err(
                Error::Unsupported("critical birth-death has delta = 0 and no Wiuf form".into()),
            ),
            ModelKind::BirthDeathSingleAncestor { lambda, mu } => {
                let delta = (lambda - mu).abs();
                Ok((delta, delta / lambda.max(*mu)))
            }
            ModelKind::BernoulliThinned { base, rho } => match base.kind() {
                ModelKind::BirthDeath { lambda, mu } if lambda != mu => {
                    let delta = (lambda - mu).abs();
                    Ok((delta, delta / (rho * lambda).max(mu - (1.0 - rho) * lambda)))
                }
                _ if base.total_mass() == 1.0 => {
                    let (delta, gamma) = base.to_wiuf_form()?;
                    Ok((delta, gamma / rho))
                }
                _ => Err(Error::Unsupported(format!("no Wiuf form for thinned model {base}"))),
            },
            ModelKind::PoissonFeller { alpha, nu } => {
                let alpha = *alpha;
                if alpha > 0.0 {
                    Ok((alpha, alpha / nu))
                } else if alpha < 0.0 {
                    Ok((-alpha, alpha / (alpha - nu)))
                } else {
                    Err(Error::Unsupported("critical Feller diffusion has delta = 0 and no Wiuf form".into()))
                }
            }
            _ => unreachable!("guards above cover the birth-death variants"),
        }
    }

    fn is_critical_bd(&self) -> bool {
        matches!(self.kind, ModelKind::BirthDeath { lambda, mu } | ModelKind::BirthDeathSingleAncestor { lambda, mu } if lambda == mu)
    }

    /// `F(tau) = cdf(tau) / cdf(t)` on `[0, t]`; `t` may be `+inf`.
    pub fn normalized_cdf(&self, t: f64, tau: f64) -> Result<f64> {
        let ft = self.check_stem(t, tau)?;
        Ok((self.cdf_raw(tau) / ft).min(1.0))
    }

    /// `f(tau) = pdf(tau) / cdf(t)` on `[0, t]`.
    pub fn normalized_pdf(&self, t: f64, tau: f64) -> Result<f64> {
        let ft = self.check_stem(t, tau)?;
        Ok(self.pdf_raw(tau) / ft)
    }

    fn check_stem(&self, t: f64, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        if !(t > 0.0) {
            return Err(domain(format!("stem age must be > 0, got {t}")));
        }
        if tau > t {
            return Err(domain(format!("tau = {tau} exceeds stem age {t}")));
        }
        let ft = self.cdf_raw(t);
        if !(ft > 0.0) {
            return Err(domain(format!(
                "cdf(t) = 0 at t = {t}; normalisation undefined"
            )));
        }
        Ok(ft)
    }

    /// `1 - F(tau)` for the normalised law on `[0, t]`, without cancellation.
    #[cfg(test)]
    pub(crate) fn normalized_sf_raw(&self, t: f64, tau: f64) -> f64 {
        let ft = self.cdf_raw(t);
        if ft < 0.5 {
            return 1.0 - self.cdf_raw(tau) / ft;
        }
        // 1 - F(tau)/F(t) = (S(tau) - S(t)) / F(t)
        ((self.sf_raw(tau) - self.sf_raw(t)) / ft).max(0.0)
    }

    /// The `tau` at which the normalised law on `[0, t]` has survival `u`.
    pub(crate) fn normalized_quantile_sf(&self, t: f64, u: f64) -> f64 {
        let ft = self.cdf_raw(t);
        let st = self.sf_raw(t);
        // sf(tau) = u F(t) + S(t); for t = inf, S(t) = 1 - mass
        let q = u * ft + st;
        if q >= 1.0 {
            return 0.0;
        }
        match self.kind {
            ModelKind::WiufForm { delta, gamma } => (gamma * (1.0 - q) / q).ln_1p() / delta,
            _ => {
                if q <= 1.0 - self.total_mass() {
                    return t;
                }
                self.invert(q, true).min(t)
            }
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0) {
        return Err(domain(format!("tau must be >= 0, got {tau}")));
    }
    Ok(())
}

// Poisson-sampled Feller cdf is 2 beta(tau; |alpha|) / (2 beta(tau; |alpha|) + c)
fn feller_scale(alpha: f64, nu: f64) -> (f64, f64) {
    let delta = alpha.abs();
    let c = 1.0 / (nu + (-alpha).max(0.0));
    (delta, c)
}

/// `(alpha, nu) -> (-alpha, nu - alpha)`: the Poisson-sampled Feller process
/// with the same coalescent-time law.
pub fn symmetric_partner(alpha: f64, nu: f64) -> Result<(f64, f64)> {
    if !(nu > 0.0) || !alpha.is_finite() || !nu.is_finite() {
        return Err(domain(format!(
            "symmetric partner needs finite alpha and nu > 0, got ({alpha}, {nu})"
        )));
    }
    if alpha >= nu {
        return Err(Error::NoPartner { alpha, nu });
    }
    Ok((-alpha, nu - alpha))
}

/// Leading-order birth and death rates whose `epsilon -> 0` limit is the
/// Feller diffusion with drift `alpha`.
pub fn feller_prelimit_rates(epsilon: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0) || !alpha.is_finite() {
        return Err(domain(format!(
            "epsilon must be > 0 and alpha finite, got ({epsilon}, {alpha})"
        )));
    }
    let lambda = 0.5 / epsilon + 0.5 * alpha;
    let mu = 0.5 / epsilon - 0.5 * alpha;
    if !(mu > 0.0) || !(lambda > 0.0) {
        return Err(domain(format!(
            "epsilon = {epsilon} too large for alpha = {alpha}: rates ({lambda}, {mu})"
        )));
    }
    Ok((lambda, mu))
}

impl fmt::Display for NodeHeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModelKind::BirthDeath { lambda, mu } => write!(f, "bd:lambda={lambda},mu={mu}"),
            ModelKind::BirthDeathSingleAncestor { lambda, mu } => {
                write!(f, "bdsa:lambda={lambda},mu={mu}")
            }
            ModelKind::WiufForm { delta, gamma } => write!(f, "wiuf:delta={delta},gamma={gamma}"),
            ModelKind::BernoulliThinned { base, rho } => {
                let inner = base.to_string();
                let (kind, params) = inner.split_once(':').unwrap_or((&inner, ""));
                write!(f, "bern:rho={rho},of={kind}")?;
                if !params.is_empty() {
                    write!(f, ",{params}")?;
                }
                Ok(())
            }
            ModelKind::PoissonFeller { alpha, nu } => write!(f, "feller:alpha={alpha},nu={nu}"),
        }
    }
}

/// A parsed model specification: either a node-height model or a bare Feller
/// setting (`feller:alpha=..` without a sampling rate).
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Node(NodeHeightModel),
    Feller { alpha: f64 },
}

impl ModelSpec {
    pub fn node(&self) -> Option<&NodeHeightModel> {
        match self {
            ModelSpec::Node(m) => Some(m),
            ModelSpec::Feller { .. } => None,
        }
    }
}

/// Grammar: `kind:key=value[,key=value]*` with kinds
///
/// * `bd:lambda=L,mu=M`, `bdsa:lambda=L,mu=M`
/// * `wiuf:delta=D,gamma=G`
/// * `bern:rho=R[,of=bd|bdsa|wiuf|feller],<base keys>` (base defaults to `bd`)
/// * `feller:alpha=A[,nu=N]`; with `nu` this is the Poisson-sampled node-height model
impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Parse {
            pos: 0,
            msg: format!("expected `kind:key=value,...`, got `{s}`"),
        })?;
        let offset = kind.len() + 1;
        let mut pairs: Vec<(String, f64, usize)> = Vec::new();
        let mut of: Option<String> = None;
        let mut pos = offset;
        for item in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| Error::Parse {
                pos,
                msg: format!("expected key=value, got `{item}`"),
            })?;
            let k = k.trim().to_ascii_lowercase();
            if k == "of" {
                of = Some(v.trim().to_ascii_lowercase());
            } else {
                let val: f64 = v.trim().parse().map_err(|_| Error::Parse {
                    pos: pos + k.len() + 1,
                    msg: format!("`{v}` is not a number"),
                })?;
                if pairs.iter().any(|(name, _, _)| *name == k) {
                    return Err(Error::Parse {
                        pos,
                        msg: format!("duplicate key `{k}`"),
                    });
                }
                pairs.push((k, val, pos));
            }
            pos += item.len() + 1;
        }
        let kind = kind.trim().to_ascii_lowercase();
        if of.is_some() && kind != "bern" {
            return Err(Error::Parse {
                pos: 0,
                msg: "`of=` is only valid for `bern`".into(),
            });
        }
        build_spec(&kind, &mut pairs, of.as_deref(), s.len())
    }
}

fn take(pairs: &mut Vec<(String, f64, usize)>, key: &str, end: usize) -> Result<f64> {
    take_opt(pairs, key).ok_or_else(|| Error::Parse {
        pos: end,
        msg: format!("missing `{key}`"),
    })
}

fn take_opt(pairs: &mut Vec<(String, f64, usize)>, key: &str) -> Option<f64> {
    let i = pairs.iter().position(|(k, _, _)| k == key)?;
    Some(pairs.remove(i).1)
}

fn build_spec(
    kind: &str,
    pairs: &mut Vec<(String, f64, usize)>,
    of: Option<&str>,
    end: usize,
) -> Result<ModelSpec> {
    let spec = match kind {
        "bd" => ModelSpec::Node(NodeHeightModel::birth_death(
            take(pairs, "lambda", end)?,
            take(pairs, "mu", end)?,
        )?),
        "bdsa" => ModelSpec::Node(NodeHeightModel::birth_death_single_ancestor(
            take(pairs, "lambda", end)?,
            take(pairs, "mu", end)?,
        )?),
        "wiuf" => ModelSpec::Node(NodeHeightModel::wiuf(
            take(pairs, "delta", end)?,
            take(pairs, "gamma", end)?,
        )?),
        "feller" => {
            let alpha = take(pairs, "alpha", end)?;
            match take_opt(pairs, "nu") {
                Some(nu) => ModelSpec::Node(NodeHeightModel::poisson_feller(alpha, nu)?),
                None => {
                    if !alpha.is_finite() {
                        return Err(domain(format!("alpha must be finite, got {alpha}")));
                    }
                    ModelSpec::Feller { alpha }
                }
            }
        }
        "bern" => {
            let rho = take(pairs, "rho", end)?;
            let base_kind = of.unwrap_or("bd");
            if base_kind == "bern" {
                return Err(Error::Parse {
                    pos: 0,
                    msg: "nested `bern` bases are not supported in the text grammar".into(),
                });
            }
            match build_spec(base_kind, pairs, None, end)? {
                ModelSpec::Node(base) => {
                    ModelSpec::Node(NodeHeightModel::bernoulli_thinned(base, rho)?)
                }
                ModelSpec::Feller { .. } => {
                    return Err(Error::Parse {
                        pos: end,
                        msg: "a thinned Feller base needs `nu`".into(),
                    })
                }
            }
        }
        other => {
            return Err(Error::Parse {
                pos: 0,
                msg: format!(
                    "unknown model kind `{other}` (expected bd, bdsa, wiuf, bern, feller)"
                ),
            })
        }
    };
    if let Some((k, _, pos)) = pairs.first() {
        return Err(Error::Parse {
            pos: *pos,
            msg: format!("unknown key `{k}` for `{kind}`"),
        });
    }
    Ok(spec)
}

impl FromStr for NodeHeightModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<ModelSpec>()? {
            ModelSpec::Node(m) => Ok(m),
            ModelSpec::Feller { .. } => Err(Error::Parse {
                pos: s.len(),
                msg: "a Feller node-height model needs a sampling rate `nu`".into(),
            }),
        }
    }
}
