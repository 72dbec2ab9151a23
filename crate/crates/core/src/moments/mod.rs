//! Expected coalescent times `E[T_k]` and waiting times `E[W_k] = E[T_k - T_{k+1}]`.
//!
//! Three routes are provided: quadrature against the inverse normalised
//! node-height law, the order-lowering recursions, and for the Wiuf form the
//! hypergeometric closed forms. The closed forms are the default path; the
//! recursions lose precision quickly for large `n` and are kept for
//! cross-checks.

mod exact;
mod table;

pub use exact::wiuf_unif_waiting_exact;
pub use table::{fmt17, MomentKind, MomentTable};

use crate::analytics::Normalized;
use crate::error::{domain, Result};
use crate::models::NodeHeightModel;
use crate::numerics::{hyp2f1_b1, integrate, QuadratureSpec};

fn ln_fact(n: usize) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

fn moment_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_subdivisions: 2000,
    }
}

fn check_wiuf(delta: f64, gamma: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() || !(gamma > 0.0) || !gamma.is_finite() {
        return Err(domain(format!(
            "need delta > 0 and gamma > 0, got ({delta}, {gamma})"
        )));
    }
    Ok(())
}

/// `E_n[T_k | T_1 = t]` by quadrature of `u^(k-2) (1-u)^(n-k) G(u)`, where `G`
/// inverts `u = 1 - F(tau)`. `t` may be `+inf` for models of total mass one.
pub fn expected_tk_quadrature(model: &NodeHeightModel, t: f64, n: usize, k: usize) -> Result<f64> {
    if n < 2 || k < 2 || k > n {
        return Err(domain(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    if t.is_infinite() && model.total_mass() < 1.0 {
        return Err(domain(format!(
            "{model} has mass at infinity; E[T_k | T_1 = inf] diverges"
        )));
    }
    let norm = Normalized::new(model, t)?;
    let coef = (ln_fact(n - 1) - ln_fact(n - k) - ln_fact(k - 2)).exp();
    let (a, b) = ((k - 2) as i32, (n - k) as i32);
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        u.powi(a) * (1.0 - u).powi(b) * model.normalized_quantile_sf(norm.t(), u)
    };
    let v = integrate(g, 0.0, 1.0, &moment_quadrature())?;
    Ok(coef * v)
}

/// `E_m[T_2 | T_1 = t]` for `m = 2..=n`, the seed row of the recursion.
pub fn tk_seed_row(model: &NodeHeightModel, t: f64, n: usize) -> Result<Vec<f64>> {
    (2..=n)
        .map(|m| expected_tk_quadrature(model, t, m, 2))
        .collect()
}

// rows[m][k] = E_m[T_k], m = 2..=n, k = 2..=m; `numerator_offset` 1 gives the
// correct (n - 1) numerator, 0 the variant with n
fn tk_recursion_table(
    seed_row: &[f64],
    n: usize,
    numerator_offset: usize,
) -> Result<Vec<Vec<f64>>> {
    if seed_row.len() + 1 < n {
        return Err(domain(format!(
            "seed row covers n <= {}, need {n}",
            seed_row.len() + 1
        )));
    }
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    for m in 2..=n {
        let mut row = vec![f64::NAN; m + 1];
        row[2] = seed_row[m - 2];
        for k in 3..=m {
            let (mf, kf) = (m as f64, k as f64);
            row[k] = ((mf - numerator_offset as f64) / (kf - 2.0)) * rows[m - 1][k - 1]
                - ((mf - kf + 1.0) / (kf - 2.0)) * row[k - 1];
        }
        rows[m] = row;
    }
    Ok(rows)
}

/// `E_n[T_k | T_1 = t]` from the recursion in `(n, k)` seeded by `E_m[T_2 | T_1 = t]`
/// (`seed_row[m - 2]` for `m = 2..=n`).
pub fn expected_tk_recursive(seed_row: &[f64], n: usize, k: usize) -> Result<f64> {
    if k < 2 || k > n {
        return Err(domain(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    Ok(tk_recursion_table(seed_row, n, 1)?[n][k])
}

/// `E_n[W_k | T_1 = t]` for `k = 1..=n` via the waiting-time recursion, with
/// boundary `E_m[W_1] = t - E_m[T_2]` from quadrature.
pub fn expected_wk_recursive(model: &NodeHeightModel, t: f64, n: usize, k: usize) -> Result<f64> {
    if k < 1 || k > n {
        return Err(domain(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if !t.is_finite() {
        return Err(domain(
            "the fixed-stem waiting-time recursion needs a finite stem age",
        ));
    }
    let mut w1 = vec![t];
    for m in 2..=n {
        w1.push(t - expected_tk_quadrature(model, t, m, 2)?);
    }
    Ok(waiting_recursion(&w1, n, false)[n][k])
}

/// `E_n^unif[W_k]` under a uniform prior on `T_1` over `[0, horizon]` via the
/// uniform-prior recursion. The boundary `E_m^unif[W_1]` is the Wiuf formula
/// when `horizon` is infinite and the model has a Wiuf form, and otherwise
/// `E_{m+1}[T_2 | horizon] - E_{m+1}[T_3 | horizon]` by quadrature.
pub fn expected_wk_unif_recursive(
    model: &NodeHeightModel,
    n: usize,
    k: usize,
    horizon: f64,
) -> Result<f64> {
    if k < 1 || k > n {
        return Err(domain(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let wiuf = if horizon.is_infinite() && model.total_mass() == 1.0 {
        model.to_wiuf_form().ok()
    } else {
        None
    };
    let w1: Vec<f64> = match wiuf {
        Some((delta, gamma)) => (1..=n)
            .map(|m| expected_w1_unif_wiuf(delta, gamma, m))
            .collect::<Result<_>>()?,
        None => (1..=n)
            .map(|m| {
                let top = expected_tk_quadrature(model, horizon, m + 1, 2)?;
                let next = if m + 1 >= 3 {
                    expected_tk_quadrature(model, horizon, m + 1, 3)?
                } else {
                    0.0
                };
                Ok(top - next)
            })
            .collect::<Result<_>>()?,
    };
    Ok(waiting_recursion(&w1, n, true)[n][k])
}

// rows[m][k] = E_m[W_k] for m = 1..=n, k = 1..=m from w1[m - 1] = E_m[W_1]
pub(crate) fn waiting_recursion(w1: &[f64], n: usize, uniform_prior: bool) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    for m in 1..=n {
        let mut row = vec![f64::NAN; m + 1];
        row[1] = w1[m - 1];
        for k in 2..=m {
            let (mf, kf) = (m as f64, k as f64);
            row[k] = if uniform_prior {
                (mf / kf) * rows[m - 1][k - 1] - ((mf - kf + 1.0) / kf) * row[k - 1]
            } else {
                ((mf - 1.0) / (kf - 1.0)) * rows[m - 1][k - 1]
                    - ((mf - kf + 1.0) / (kf - 1.0)) * row[k - 1]
            };
        }
        rows[m] = row;
    }
    rows
}

/// `E_n^unif[W_k]`, `k = 1..=n`, for the Wiuf form under an improper uniform
/// prior on `T_1`, by the recursion in double precision.
pub fn wiuf_unif_waiting_recursive(delta: f64, gamma: f64, n: usize) -> Result<Vec<f64>> {
    check_wiuf(delta, gamma)?;
    let w1: Vec<f64> = (1..=n)
        .map(|m| expected_w1_unif_wiuf(delta, gamma, m))
        .collect::<Result<_>>()?;
    Ok(waiting_recursion(&w1, n, true)[n][1..].to_vec())
}

/// Wiuf's `E_n^unif[W_1]` for the node-height law `(e^{delta tau} - 1) / (e^{delta tau} - 1 + gamma)`.
pub fn expected_w1_unif_wiuf(delta: f64, gamma: f64, n: usize) -> Result<f64> {
    check_wiuf(delta, gamma)?;
    if n < 1 {
        return Err(domain("need n >= 1"));
    }
    let nf = n as f64;
    if gamma == 1.0 {
        return Ok(1.0 / delta);
    }
    let z = 1.0 - gamma;
    if z.abs() <= 0.5 {
        // (gamma/delta) sum_l n/(n+l) z^l
        let mut sum = 0.0;
        let mut zl = 1.0;
        let mut l = 0.0;
        loop {
            let term = nf / (nf + l) * zl;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            zl *= z;
            l += 1.0;
        }
        return Ok(gamma / delta * sum);
    }
    let mut s = 0.0;
    for i in 1..n {
        s += gamma / i as f64 * z.powi(i as i32 - n as i32);
    }
    Ok(-(nf / delta) * s - (nf / delta) * gamma / z.powi(n as i32) * gamma.ln())
}

/// `E_n^unif[W_k] = (gamma/delta) (1/k) 2F1(n-k+1, 1; n+1; 1-gamma)`, `1 <= k <= n`.
pub fn expected_wk_unif_closed(delta: f64, gamma: f64, n: usize, k: usize) -> Result<f64> {
    check_wiuf(delta, gamma)?;
    if k < 1 || k > n {
        return Err(domain(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if gamma == 1.0 {
        return Ok(1.0 / (delta * k as f64));
    }
    let f = hyp2f1_b1((n - k + 1) as u32, (n + 1) as u32, 1.0 - gamma)?;
    Ok(gamma / delta / k as f64 * f)
}

/// The falling-factorial series for `E_n^unif[W_k]`, valid for `|1 - gamma| < 1`.
pub fn expected_wk_unif_series(delta: f64, gamma: f64, n: usize, k: usize) -> Result<f64> {
    check_wiuf(delta, gamma)?;
    if k < 1 || k > n {
        return Err(domain(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let z = 1.0 - gamma;
    if !(z.abs() < 1.0) {
        return Err(domain(format!(
            "series needs |1 - gamma| < 1, got gamma = {gamma}"
        )));
    }
    // n_[k] / (n+l)_[k] = prod_{m<k} (n-m)/(n+l-m)
    let (nf, kf) = (n as f64, k as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut l = 0.0;
    while l < 1e7 {
        term *= z * (nf + l + 1.0 - kf) / (nf + l + 1.0);
        sum += term;
        l += 1.0;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    Ok(gamma / delta / kf * sum)
}

/// `E_n[W_k | T_1 = inf] = (gamma/delta) (1/(k-1)) 2F1(n-k+1, 1; n; 1-gamma)`, `2 <= k <= n`.
pub fn expected_wk_root_infinity(delta: f64, gamma: f64, n: usize, k: usize) -> Result<f64> {
    if k < 2 || k > n {
        return Err(domain(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    expected_wk_unif_closed(delta, gamma, n - 1, k - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn w1_documented_values() {
        let v = expected_w1_unif_wiuf(1.0, 0.5, 1).unwrap();
        assert_relative_eq!(v, 2f64.ln(), max_relative = 1e-14);
        assert_eq!(expected_w1_unif_wiuf(2.0, 1.0, 5).unwrap(), 0.5);
        assert_relative_eq!(
            expected_w1_unif_wiuf(2.0, 1.0 - 1e-9, 5).unwrap(),
            0.5,
            max_relative = 1e-8
        );
        assert_relative_eq!(
            expected_wk_unif_closed(1.0, 0.5, 1, 1).unwrap(),
            2f64.ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            expected_wk_root_infinity(1.0, 0.5, 2, 2).unwrap(),
            2f64.ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn w1_branches_agree() {
        // literal formula vs stable series on the overlap where both are accurate
        for &gamma in &[0.55, 0.7, 1.3, 1.45] {
            for n in 1..6 {
                let z: f64 = 1.0 - gamma;
                let nf = n as f64;
                let s: f64 = (1..n)
                    .map(|i| gamma / i as f64 * z.powi(i as i32 - n as i32))
                    .sum();
                let literal = -nf * s - nf * gamma / z.powi(n as i32) * gamma.ln();
                assert_relative_eq!(
                    expected_w1_unif_wiuf(1.0, gamma, n).unwrap(),
                    literal,
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn gamma_one_special_values() {
        for &delta in &[0.5, 1.0, 3.0] {
            for n in 1..=20 {
                for k in 1..=n {
                    let v = expected_wk_unif_closed(delta, 1.0, n, k).unwrap();
                    assert_relative_eq!(v, 1.0 / (delta * k as f64), max_relative = 1e-12);
                }
                for k in 2..=n {
                    let v = expected_wk_root_infinity(delta, 1.0, n, k).unwrap();
                    assert_relative_eq!(v, 1.0 / (delta * (k - 1) as f64), max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_matches_series() {
        for &gamma in &[0.05, 0.5, 0.999, 1.5] {
            for n in 1..=20 {
                for k in 1..=n {
                    let a = expected_wk_unif_closed(1.0, gamma, n, k).unwrap();
                    let b = expected_wk_unif_series(1.0, gamma, n, k).unwrap();
                    assert_relative_eq!(a, b, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn small_gamma_asymptotes() {
        let (delta, gamma) = (1.0, 1e-6);
        let w1 = expected_wk_unif_closed(delta, gamma, 1, 1).unwrap();
        assert!((w1 / (-gamma * gamma.ln()) - 1.0).abs() < 0.01);
        for n in [2usize, 5, 20] {
            // the leading term converges logarithmically: n gamma (log(1/gamma) - H_{n-1}) / delta
            let w1 = expected_wk_unif_closed(delta, gamma, n, 1).unwrap();
            let h: f64 = (1..n).map(|i| 1.0 / i as f64).sum();
            let next = n as f64 * gamma / delta * (-gamma.ln() - h);
            assert_relative_eq!(w1, next, max_relative = 1e-4);
            for k in 2..=n {
                let w = expected_wk_unif_closed(delta, gamma, n, k).unwrap();
                let want = n as f64 * gamma / delta / (k * (k - 1)) as f64;
                assert!((w / want - 1.0).abs() < 0.01);
            }
        }
    }

    #[test]
    fn scaling_in_delta() {
        for &gamma in &[0.05, 2.0] {
            let a = expected_wk_unif_closed(1.0, gamma, 7, 3).unwrap();
            let b = expected_wk_unif_closed(4.0, gamma, 7, 3).unwrap();
            assert_relative_eq!(a / 4.0, b, max_relative = 1e-15);
        }
    }

    #[test]
    fn quadrature_inverse_for_wiuf() {
        // G(u) = (1/delta) log((gamma + (1 - gamma) u) / u) at t = inf
        let w = NodeHeightModel::wiuf(1.0, 1.0).unwrap();
        assert_relative_eq!(
            w.normalized_quantile_sf(f64::INFINITY, 0.5),
            2f64.ln(),
            max_relative = 1e-15
        );
        let e = expected_tk_quadrature(&w, 1e3, 2, 2).unwrap();
        assert!(e.is_finite() && e > 0.0);
    }

    #[test]
    fn quadrature_matches_density_moment() {
        let sp = QuadratureSpec::new(1e-12, 1e-11, 2000).unwrap();
        for m in [
            NodeHeightModel::wiuf(1.0, 0.3).unwrap(),
            NodeHeightModel::birth_death(1.0, 2.0).unwrap(),
            NodeHeightModel::poisson_feller(0.0, 2.0).unwrap(),
        ] {
            let t = 2.0;
            for n in 2..7 {
                for k in 2..=n {
                    let q = expected_tk_quadrature(&m, t, n, k).unwrap();
                    let d = integrate(
                        |x| x * crate::analytics::marginal_density_tk(&m, t, n, k, x).unwrap(),
                        0.0,
                        t,
                        &sp,
                    )
                    .unwrap();
                    assert!((q - d).abs() < 1e-7, "{m} n={n} k={k}: {q} vs {d}");
                }
            }
        }
    }

    #[test]
    fn tk_recursion_uses_n_minus_one() {
        let m = NodeHeightModel::wiuf(1.0, 0.3).unwrap();
        let t = 2.0;
        let n = 12;
        let seed = tk_seed_row(&m, t, n).unwrap();
        let good = tk_recursion_table(&seed, n, 1).unwrap();
        let bad = tk_recursion_table(&seed, n, 0).unwrap();
        let mut worst_bad = 0.0f64;
        for nn in 3..=n {
            for k in 3..=nn {
                let q = expected_tk_quadrature(&m, t, nn, k).unwrap();
                assert!((good[nn][k] - q).abs() < 1e-6, "n={nn} k={k}");
                worst_bad = worst_bad.max((bad[nn][k] - q).abs());
            }
        }
        assert!(worst_bad > 1e-2, "{worst_bad}");
        // single step k = n = 3
        let q = expected_tk_quadrature(&m, t, 3, 3).unwrap();
        assert!((expected_tk_recursive(&seed, 3, 3).unwrap() - q).abs() < 1e-10);
    }

    #[test]
    fn fixed_stem_waiting_times_telescope() {
        let m = NodeHeightModel::birth_death(2.0, 1.0).unwrap();
        let t = 1.5;
        let n = 8;
        let total: f64 = (1..n)
            .map(|k| expected_wk_recursive(&m, t, n, k).unwrap())
            .sum();
        let tn = expected_tk_quadrature(&m, t, n, n).unwrap();
        assert!((total + tn - t).abs() < 1e-8);
        assert!((expected_wk_recursive(&m, t, n, n).unwrap() - tn).abs() < 1e-8);
        for k in 1..n {
            let direct = if k == 1 {
                t
            } else {
                expected_tk_quadrature(&m, t, n, k).unwrap()
            } - expected_tk_quadrature(&m, t, n, k + 1).unwrap();
            assert!((expected_wk_recursive(&m, t, n, k).unwrap() - direct).abs() < 1e-7);
        }
    }

    #[test]
    fn uniform_prior_shift_identity() {
        let m = NodeHeightModel::wiuf(1.0, 0.4).unwrap();
        let h = 3.0;
        for n in 1..6 {
            for k in 1..=n {
                let w = expected_wk_unif_recursive(&m, n, k, h).unwrap();
                let a = expected_tk_quadrature(&m, h, n + 1, k + 1).unwrap();
                let b = if k == n {
                    0.0
                } else {
                    expected_tk_quadrature(&m, h, n + 1, k + 2).unwrap()
                };
                assert!((w - (a - b)).abs() < 1e-7, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn unif_recursion_matches_closed_form_moderate_n() {
        for &gamma in &[0.05, 0.5, 2.0] {
            let w = NodeHeightModel::wiuf(1.0, gamma).unwrap();
            for n in 1..=8 {
                for k in 1..=n {
                    let r = expected_wk_unif_recursive(&w, n, k, f64::INFINITY).unwrap();
                    let c = expected_wk_unif_closed(1.0, gamma, n, k).unwrap();
                    assert_relative_eq!(r, c, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn root_infinity_shift() {
        for &gamma in &[0.05, 3.0] {
            for n in 2..10 {
                for k in 2..=n {
                    assert_eq!(
                        expected_wk_root_infinity(1.5, gamma, n, k).unwrap(),
                        expected_wk_unif_closed(1.5, gamma, n - 1, k - 1).unwrap()
                    );
                }
            }
        }
        assert!(expected_wk_root_infinity(1.0, 1.0, 3, 1).is_err());
    }

    #[test]
    fn root_infinity_by_quadrature() {
        let w = NodeHeightModel::wiuf(1.0, 0.5).unwrap();
        let n = 6;
        let et: Vec<f64> = (2..=n)
            .map(|k| expected_tk_quadrature(&w, f64::INFINITY, n, k).unwrap())
            .collect();
        for k in 2..=n {
            let next = if k == n { 0.0 } else { et[k - 1] };
            let w_k = et[k - 2] - next;
            assert_relative_eq!(
                w_k,
                expected_wk_root_infinity(1.0, 0.5, n, k).unwrap(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn domain_checks() {
        assert!(expected_wk_unif_closed(0.0, 1.0, 3, 1).is_err());
        assert!(expected_wk_unif_closed(1.0, 1.0, 3, 4).is_err());
        assert!(expected_w1_unif_wiuf(1.0, -1.0, 3).is_err());
        assert!(expected_tk_quadrature(
            &NodeHeightModel::birth_death(1.0, 2.0).unwrap(),
            f64::INFINITY,
            3,
            2
        )
        .is_err());
        assert!(expected_wk_unif_series(1.0, 2.5, 3, 1).is_err());
    }
}
