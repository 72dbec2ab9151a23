//! The functions `beta(tau; alpha)` and `mu(tau; alpha)` that carry all of the
//! time dependence of the Feller diffusion formulas.

use crate::error::{domain, Result};

/// Below this value of `|alpha * tau|` the Taylor expansions are used.
pub const TAYLOR_THRESHOLD: f64 = 1e-6;

/// `beta(tau; alpha) = (exp(alpha*tau) - 1) / (2 alpha)`, with `beta(tau; 0) = tau / 2`.
pub fn beta_fn(tau: f64, alpha: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(domain(format!("beta_fn requires tau >= 0, got {tau}")));
    }
    Ok(beta_unchecked(tau, alpha))
}

/// `mu(tau; alpha) = 2 alpha exp(alpha*tau) / (exp(alpha*tau) - 1)`, with `mu(tau; 0) = 2 / tau`.
pub fn mu_fn(tau: f64, alpha: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(domain(format!("mu_fn requires tau > 0, got {tau}")));
    }
    Ok(mu_unchecked(tau, alpha))
}

#[inline]
pub(crate) fn beta_unchecked(tau: f64, alpha: f64) -> f64 {
    if tau.is_infinite() {
        return if alpha < 0.0 {
            -0.5 / alpha
        } else {
            f64::INFINITY
        };
    }
    let x = alpha * tau;
    if x.abs() < TAYLOR_THRESHOLD {
        0.5 * tau * (1.0 + x / 2.0 + x * x / 6.0)
    } else {
        x.exp_m1() / (2.0 * alpha)
    }
}

#[inline]
pub(crate) fn mu_unchecked(tau: f64, alpha: f64) -> f64 {
    let x = alpha * tau;
    if x.abs() < TAYLOR_THRESHOLD {
        2.0 / tau * (1.0 + x / 2.0 + x * x / 12.0)
    } else {
        2.0 * alpha / -(-x).exp_m1()
    }
}
