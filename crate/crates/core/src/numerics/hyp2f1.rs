//! Gauss hypergeometric function `2F1(a, 1; c; z)` for integer `c > a >= 1`
//! and real `z < 1`.
//!
//! * `|z| <= 0.5`: power series.
//! * `0.5 < z < 1`: Euler integral `(c-1) * int_0^1 (1-t)^(c-2) (1-z t)^(-a) dt`.
//! * `z < -0.5`: Pfaff transformation onto `z / (z - 1)` in `(1/3, 1)`.

use super::quadrature::{integrate, QuadratureSpec};
use crate::error::{domain, Result};

const SERIES_RADIUS: f64 = 0.5;

/// `2F1(a, 1; c; z)`.
pub fn hyp2f1_b1(a: u32, c: u32, z: f64) -> Result<f64> {
    if a == 0 || c <= a {
        return Err(domain(format!(
            "hyp2f1_b1 needs integers c > a >= 1, got a = {a}, c = {c}"
        )));
    }
    if !(z < 1.0) {
        return Err(domain(format!("hyp2f1_b1 needs z < 1, got {z}")));
    }
    eval(a, c, z)
}

fn eval(a: u32, c: u32, z: f64) -> Result<f64> {
    if z.abs() <= SERIES_RADIUS {
        Ok(series(a, c, z))
    } else if z > 0.0 {
        euler_integral(a, c, z)
    } else {
        // Pfaff: (1-z)^-1 2F1(c-a, 1; c; z/(z-1))
        let w = z / (z - 1.0);
        Ok(eval(c - a, c, w)? / (1.0 - z))
    }
}

/// Direct summation of the defining series; converges for `|z| < 1`.
pub fn hyp2f1_b1_series(a: u32, c: u32, z: f64) -> f64 {
    series(a, c, z)
}

fn series(a: u32, c: u32, z: f64) -> f64 {
    // term_l = (a)_l / (c)_l z^l, since (1)_l / l! = 1
    let (a, c) = (a as f64, c as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut l = 0.0;
    loop {
        term *= (a + l) / (c + l) * z;
        sum += term;
        l += 1.0;
        if term.abs() <= 1e-17 * sum.abs() || l > 100_000.0 {
            return sum;
        }
    }
}

fn euler_integral(a: u32, c: u32, z: f64) -> Result<f64> {
    let pow = (c - 2) as i32;
    let a = a as i32;
    let spec = QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: 2e-13,
        max_subdivisions: 2000,
    };
    // in s = 1 - t the integrand is s^(c-2) / (1 - z + z s)^a, with a layer of width ~ 1 - z at s = 0
    let layer = 1.0 - z;
    let split = (64.0 * layer).min(0.5);
    let g = |s: f64| s.powi(pow) / (layer + z * s).powi(a);
    let head = integrate(g, 0.0, split, &spec)?;
    let bulk = integrate(g, split, 1.0, &spec)?;
    Ok((c - 1) as f64 * (head + bulk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn special_values() {
        assert_eq!(hyp2f1_b1(5, 9, 0.0).unwrap(), 1.0);
        let z = 0.5;
        assert_relative_eq!(
            hyp2f1_b1(1, 2, z).unwrap(),
            -(1.0f64 - z).ln() / z,
            max_relative = 1e-14
        );
        assert_relative_eq!(hyp2f1_b1(1, 2, 0.5).unwrap(), 1.386_294_4, epsilon = 1e-7);
    }

    #[test]
    fn log_identity_all_branches() {
        for &z in &[-50.0f64, -3.0, -0.9, -0.5, -0.1, 0.2, 0.6, 0.9, 0.999] {
            let exact = -(-z).ln_1p() / z;
            assert_relative_eq!(hyp2f1_b1(1, 2, z).unwrap(), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn gauss_sum_limit() {
        // 2F1(n-k+1, 1; n+1; 1) = n / (k-1)
        let v = hyp2f1_b1(7, 9, 1.0 - 1e-12).unwrap();
        assert!((v - 8.0).abs() <= 1e-6, "{v}");
        for n in 2..=20u32 {
            for k in 2..=n {
                let v = hyp2f1_b1(n - k + 1, n + 1, 1.0 - 1e-12).unwrap();
                let want = n as f64 / (k - 1) as f64;
                assert!((v - want).abs() <= 1e-6 * want, "n={n} k={k} {v} vs {want}");
            }
        }
    }

    #[test]
    fn series_agreement_on_unit_interval() {
        for a in 1..=12u32 {
            for c in (a + 1)..=14u32 {
                for i in 0..=18 {
                    let z = 0.05 * i as f64;
                    let v = hyp2f1_b1(a, c, z).unwrap();
                    let s = hyp2f1_b1_series(a, c, z);
                    assert_relative_eq!(v, s, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn pfaff_agrees_with_series_on_negative_axis() {
        for a in 1..=10u32 {
            for c in (a + 1)..=12u32 {
                for &z in &[-0.5, -0.4, -0.25, -0.1] {
                    let w = z / (z - 1.0);
                    let pfaff = hyp2f1_b1_series(c - a, c, w) / (1.0 - z);
                    assert_relative_eq!(pfaff, hyp2f1_b1_series(a, c, z), max_relative = 1e-13);
                    assert_relative_eq!(hyp2f1_b1(a, c, z).unwrap(), pfaff, max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn positive_and_finite_far_left() {
        for a in 1..=20u32 {
            for c in (a + 1)..=21u32 {
                for &z in &[-999.0, -50.0, -5.0] {
                    let v = hyp2f1_b1(a, c, z).unwrap();
                    assert!(v.is_finite() && v > 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(hyp2f1_b1(3, 3, 0.1).is_err());
        assert!(hyp2f1_b1(0, 3, 0.1).is_err());
        assert!(hyp2f1_b1(2, 3, 1.0).is_err());
        assert!(hyp2f1_b1(2, 3, 1.5).is_err());
    }
}
