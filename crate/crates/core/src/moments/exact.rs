//! Extended-precision evaluation of the uniform-prior waiting-time recursion
//! for the Wiuf form, used as a reference for the double-precision routes.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

use crate::error::{domain, Result};

type Big = FBig<HalfEven, 2>;

fn big(x: f64, prec: usize) -> Big {
    Big::try_from(x)
        .expect("finite input")
        .with_precision(prec)
        .value()
}

fn bits_needed(gamma: f64, n: usize) -> usize {
    let z = (1.0 - gamma).abs();
    let per_power = if z > 0.0 && z < 1.0 {
        (-z.log2()).ceil() as usize
    } else {
        0
    };
    256 + n * (per_power + 4)
}

/// `E_n^unif[W_k]` for `k = 1..=n`: Wiuf's boundary formula for `E_m[W_1]`
/// followed by the uniform-prior recursion, all in binary floating point with
/// enough bits to absorb the cancellation in the boundary formula.
pub fn wiuf_unif_waiting_exact(delta: f64, gamma: f64, n: usize) -> Result<Vec<f64>> {
    if !(delta > 0.0) || !(gamma > 0.0) || !delta.is_finite() || !gamma.is_finite() || n < 1 {
        return Err(domain(format!(
            "need delta, gamma > 0 and n >= 1, got ({delta}, {gamma}, {n})"
        )));
    }
    let prec = bits_needed(gamma, n);
    let d = big(delta, prec);
    let g = big(gamma, prec);
    let one = big(1.0, prec);
    let z = &one - &g;
    let ln_g = g.ln();

    let w1: Vec<Big> = (1..=n)
        .map(|m| {
            let mf = big(m as f64, prec);
            if gamma == 1.0 {
                return &one / &d;
            }
            // z^{-m}, then z^{i-m} = z^{-m} z^i
            let mut z_neg_m = one.clone();
            for _ in 0..m {
                z_neg_m = &z_neg_m / &z;
            }
            let mut sum = big(0.0, prec);
            let mut zi = one.clone();
            for i in 1..m {
                zi = &zi * &z;
                sum = &sum + &g / big(i as f64, prec) * &zi * &z_neg_m;
            }
            let lead = &mf / &d;
            -(&lead * &sum) - &lead * &g * &z_neg_m * &ln_g
        })
        .collect();

    let mut prev: Vec<Big> = Vec::new();
    for m in 1..=n {
        let mf = big(m as f64, prec);
        let mut row = vec![w1[m - 1].clone()];
        for k in 2..=m {
            let kf = big(k as f64, prec);
            let c1 = &mf / &kf;
            let c2 = (&mf - &kf + &one) / &kf;
            let v = &c1 * &prev[k - 2] - &c2 * &row[k - 2];
            row.push(v);
        }
        prev = row;
    }
    Ok(prev.iter().map(|v| v.to_f64().value()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::expected_wk_unif_closed;

    #[test]
    fn gamma_one_is_harmonic() {
        let v = wiuf_unif_waiting_exact(2.0, 1.0, 6).unwrap();
        for (k, w) in v.iter().enumerate() {
            assert!((w - 1.0 / (2.0 * (k + 1) as f64)).abs() < 1e-15, "{v:?}");
        }
    }

    #[test]
    fn agrees_with_closed_form_near_one() {
        let n = 20;
        let v = wiuf_unif_waiting_exact(1.0, 0.999, n).unwrap();
        for k in 1..=n {
            let c = expected_wk_unif_closed(1.0, 0.999, n, k).unwrap();
            assert!(
                ((v[k - 1] - c) / c).abs() < 1e-11,
                "k={k}: {} vs {c}",
                v[k - 1]
            );
        }
    }

    #[test]
    fn n_one_is_boundary() {
        let v = wiuf_unif_waiting_exact(1.0, 0.5, 1).unwrap();
        assert!((v[0] - 2f64.ln()).abs() < 1e-15);
    }
}
