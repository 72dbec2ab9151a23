//! From population trees to samples: the k-sampling mixing measures, the
//! partial-fraction k-sample joint cdf of a Feller diffusion, and the index
//! chain that matches sample coalescent times to population coalescent times
//! in an exchangeable binary tree.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::models::NodeHeightModel;
use crate::numerics::{beta_unchecked, integrate, QuadratureSpec};

/// The variable in which [`lambert_measure_density`] is expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambertRegime {
    /// Bernoulli-sampled CPP with node-height mass `a` at the stem; variable `rho` in `(0, 1)`.
    BernoulliCpp { a: f64 },
    /// Poisson-sampled Feller diffusion; variable `v = 2 nu beta(t)` in `(0, inf)`.
    FellerPoisson,
}

/// Density of the mixing measure that turns Bernoulli (or Poisson) sampling
/// into sampling of exactly `k` tips.
pub fn lambert_measure_density(k: usize, x: f64, regime: LambertRegime) -> Result<f64> {
    if k < 1 {
        return Err(domain("need k >= 1"));
    }
    let kf = k as f64;
    match regime {
        LambertRegime::BernoulliCpp { a } => {
            if !(a > 0.0 && a < 1.0) {
                return Err(domain(format!("need a in (0, 1), got {a}")));
            }
            if !(x > 0.0 && x < 1.0) {
                return Err(domain(format!("need rho in (0, 1), got {x}")));
            }
            let d = 1.0 - a * (1.0 - x);
            Ok(kf * (1.0 - a) * x.powi(k as i32 - 1) / d.powi(k as i32 + 1))
        }
        LambertRegime::FellerPoisson => {
            if !(x > 0.0) {
                return Err(domain(format!("need v > 0, got {x}")));
            }
            if x.is_infinite() {
                return Ok(0.0);
            }
            // k v^(k-1) / (1+v)^(k+1) = k w^(k-1) (1-w)^2 with w = v/(1+v)
            let w = x / (1.0 + x);
            let omw = 1.0 / (1.0 + x);
            Ok(kf * w.powi(k as i32 - 1) * omw * omw)
        }
    }
}

fn mix_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_subdivisions: 2000,
    }
}

/// `int_0^inf integrand(nu) mu_k(dnu)` for a Poisson-sampled Feller diffusion
/// with drift `alpha` and stem age `t`, computed in `w = v / (1 + v)` with
/// `v = 2 nu beta(t; alpha)`, where the weight is `k w^(k-1)` on `(0, 1)`.
pub fn ksample_mix<F: FnMut(f64) -> f64>(
    mut integrand: F,
    k: usize,
    t: f64,
    alpha: f64,
) -> Result<f64> {
    if k < 1 {
        return Err(domain("need k >= 1"));
    }
    if !(t > 0.0) || !t.is_finite() || !alpha.is_finite() {
        return Err(domain(format!(
            "need finite t > 0 and finite alpha, got t = {t}, alpha = {alpha}"
        )));
    }
    let bt = beta_unchecked(t, alpha);
    let km1 = k as i32 - 1;
    let g = |w: f64| {
        if w <= 0.0 || w >= 1.0 {
            return 0.0;
        }
        let v = w / (1.0 - w);
        k as f64 * w.powi(km1) * integrand(v / (2.0 * bt))
    };
    integrate(g, 0.0, 1.0, &mix_quadrature())
}

fn check_ksample_times(t: f64, k: usize, taus: &[f64]) -> Result<()> {
    if k < 2 || taus.len() != k - 1 {
        return Err(domain(format!(
            "need k >= 2 and k - 1 times, got k = {k} with {} times",
            taus.len()
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("need finite t > 0, got {t}")));
    }
    let ok = taus.iter().all(|&x| x > 0.0 && x < t) && taus.windows(2).all(|w| w[0] > w[1]);
    if !ok {
        return Err(domain(format!(
            "times must be strictly decreasing inside (0, {t}), got {taus:?}"
        )));
    }
    Ok(())
}

/// `k`-sample analogue of [`crate::analytics::joint_cdf_given_stem`] for a
/// Feller diffusion with stem age `t`: the Poisson-sampled `(k-1)! prod F_nu(tau_j)`
/// mixed over the `k`-sampling measure numerically.
pub fn ksample_joint_cdf_by_mixing(alpha: f64, t: f64, k: usize, taus: &[f64]) -> Result<f64> {
    check_ksample_times(t, k, taus)?;
    let ln_km1 = statrs::function::gamma::ln_gamma(k as f64);
    let mut err = None;
    let v = ksample_mix(
        |nu| {
            if !(nu > 0.0) || !nu.is_finite() {
                // nu -> 0 makes F(tau) = beta(tau)/beta(t); nu -> inf makes it 1
                return if nu > 0.0 { (ln_km1).exp() } else { 0.0 };
            }
            let m = match NodeHeightModel::poisson_feller(alpha, nu) {
                Ok(m) => m,
                Err(e) => {
                    err = Some(e);
                    return 0.0;
                }
            };
            let ft = m.cdf_raw(t);
            let ln: f64 = taus.iter().map(|&x| (m.cdf_raw(x) / ft).ln()).sum();
            (ln_km1 + ln).exp()
        },
        k,
        t,
        alpha,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Relative separation below which two ratios `B_j` are treated as a double pole.
pub const POLE_TOLERANCE: f64 = 1e-6;

/// Partial-fraction closed form of the `k`-sample joint cdf:
/// `k! (C - sum_j G_j log B_j)` with `B_j = beta(t)/beta(tau_j)`,
/// `C = prod (1 - B_j)^(-1)` and `G_j = -B_j^(k-1) / ((1-B_j)^2 prod_{l != j} (B_j - B_l))`.
pub fn ksample_joint_cdf_feller(alpha: f64, t: f64, k: usize, taus: &[f64]) -> Result<f64> {
    check_ksample_times(t, k, taus)?;
    if !alpha.is_finite() {
        return Err(domain(format!("alpha must be finite, got {alpha}")));
    }
    let bt = beta_unchecked(t, alpha);
    let b: Vec<f64> = taus
        .iter()
        .map(|&x| bt / beta_unchecked(x, alpha))
        .collect();
    for (j, &bj) in b.iter().enumerate() {
        if (bj - 1.0).abs() <= POLE_TOLERANCE {
            return Err(Error::DegeneratePole(bj, 1.0));
        }
        for &bl in &b[j + 1..] {
            if (bj - bl).abs() <= POLE_TOLERANCE * bj.max(bl) {
                return Err(Error::DegeneratePole(bj, bl));
            }
        }
    }
    let c: f64 = b.iter().map(|&bj| 1.0 / (1.0 - bj)).product();
    let mut s = 0.0;
    for (j, &bj) in b.iter().enumerate() {
        let mut den = (1.0 - bj) * (1.0 - bj);
        for (l, &bl) in b.iter().enumerate() {
            if l != j {
                den *= bj - bl;
            }
        }
        let g = -bj.powi(k as i32 - 1) / den;
        s += g * bj.ln();
    }
    let kfact: f64 = (2..=k).map(|m| m as f64).product();
    Ok(kfact * (c - s))
}

/// The 2-sample MRCA cdf
/// `2 b_tau/(b_tau - b_t) + 2 b_tau b_t/(b_tau - b_t)^2 log(b_t/b_tau)`, `b = beta(.; alpha)`.
pub fn two_sample_cdf_closed(alpha: f64, t: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < t) || !t.is_finite() || !alpha.is_finite() {
        return Err(domain(format!(
            "need 0 < tau < t < inf, got tau = {tau}, t = {t}"
        )));
    }
    let (bs, bt) = (beta_unchecked(tau, alpha), beta_unchecked(t, alpha));
    let d = bs - bt;
    Ok(2.0 * bs / d + 2.0 * bs * bt / (d * d) * (bt / bs).ln())
}

/// `sum_{i >= 2} P(T_i <= tau | T_1 = t) P(T~_2 = T_i)`, the 2-sample MRCA cdf
/// from the population coalescent-time laws and the index-chain weights
/// `2 / (i (i + 1))`, summed until the tail bound drops below `1e-12`.
pub fn two_sample_cdf_via_series(alpha: f64, t: f64, tau: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() || !alpha.is_finite() {
        return Err(domain(format!(
            "need finite t > 0 and finite alpha, got t = {t}, alpha = {alpha}"
        )));
    }
    if !(tau >= 0.0) {
        return Err(domain(format!("tau must be >= 0, got {tau}")));
    }
    if tau >= t {
        return Ok(1.0);
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    let b = beta_unchecked(tau, alpha) / beta_unchecked(t, alpha);
    let q = 1.0 - b;
    // 1 - sum_i q^(i-1) 2/(i(i+1))
    let mut s = 0.0;
    let mut qi = q;
    let mut i = 2u64;
    loop {
        let fi = i as f64;
        let w = 2.0 / (fi * (fi + 1.0));
        s += qi * w;
        // remaining terms: q^i sum_{m > i} 2/(m(m+1)) <= q^i 2/(i+1), and <= q^i w / (1 - q)
        let tail = qi * q * (2.0 / (fi + 1.0)).min(w / b);
        if tail < 1e-13 {
            break;
        }
        if i > 100_000_000 {
            return Err(Error::Numerical {
                context: format!("2-sample series at beta ratio {b}"),
                estimate: 1.0 - s,
                error_bound: tail,
            });
        }
        qi *= q;
        i += 1;
    }
    Ok(1.0 - s)
}

// log P(i_n <= i) = sum_{m=1}^{n-1} log((i - m)/(i + m))
fn ln_root_cdf(n: u64, i: u64) -> f64 {
    if i < n {
        return f64::NEG_INFINITY;
    }
    let fi = i as f64;
    (1..n)
        .map(|m| (-2.0 * m as f64 / (fi + m as f64)).ln_1p())
        .sum()
}

/// `P(i_n <= i)`: the population index of the shallowest sample coalescence is at most `i`.
pub fn saunders_root_cdf(n: usize, i: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("need n >= 2, got {n}")));
    }
    Ok(ln_root_cdf(n as u64, i).exp())
}

/// `P(T~_n = T_i) = n(n-1) (i-1)!(i-2)! / ((i-n)!(i+n-1)!)`, `i >= n`.
pub fn saunders_root_pmf(n: usize, i: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("need n >= 2, got {n}")));
    }
    if i < n as u64 {
        return Err(domain(format!("root index must be >= n = {n}, got {i}")));
    }
    let (nf, fi) = (n as f64, i as f64);
    Ok((nf * (nf - 1.0) / ((fi - 1.0) * fi)).ln().exp() * ln_root_cdf(n as u64, i).exp())
}

/// `P(i_k <= i | i_{k+1} = j)` for `k <= i <= j - 1`.
pub fn saunders_step_cdf(k: usize, j: u64, i: u64) -> Result<f64> {
    check_step(k, j, i)?;
    Ok((ln_root_cdf(k as u64, i) - ln_root_cdf(k as u64, j - 1))
        .exp()
        .min(1.0))
}

/// `P(T~_k = T_i | T~_{k+1} = T_j)`, `k <= i <= j - 1`.
pub fn saunders_step_pmf(k: usize, j: u64, i: u64) -> Result<f64> {
    check_step(k, j, i)?;
    let (kf, fi) = (k as f64, i as f64);
    let ln = (kf * (kf - 1.0) / ((fi - 1.0) * fi)).ln() + ln_root_cdf(k as u64, i)
        - ln_root_cdf(k as u64, j - 1);
    Ok(ln.exp())
}

fn check_step(k: usize, j: u64, i: u64) -> Result<()> {
    if k < 2 {
        return Err(domain(format!("need k >= 2, got {k}")));
    }
    if j <= k as u64 {
        return Err(domain(format!("need j > k, got j = {j}, k = {k}")));
    }
    if i < k as u64 || i >= j {
        return Err(domain(format!(
            "step index must lie in [{k}, {}], got {i}",
            j - 1
        )));
    }
    Ok(())
}

/// Population coalescent indices `i_k` with `T~_k = T_{i_k}`, `k = 2..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexChain {
    pub n: usize,
    /// `indices[k - 2] = i_k`.
    pub indices: Vec<u64>,
}

impl IndexChain {
    pub fn index(&self, k: usize) -> u64 {
        self.indices[k - 2]
    }

    pub fn is_valid(&self) -> bool {
        self.indices.len() + 1 == self.n
            && self
                .indices
                .iter()
                .enumerate()
                .all(|(m, &i)| i >= m as u64 + 2)
            && self.indices.windows(2).all(|w| w[0] < w[1])
    }
}

/// Mass beyond which the root index distribution is truncated; the tail is
/// lumped into the last atom.
pub const ROOT_TAIL_MASS: f64 = 1e-12;

/// Draws `i_n` from the root law and `i_{n-1}, ..., i_2` from the step laws by
/// inverse cdf.
pub fn sample_index_chain<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<IndexChain> {
    if n < 2 {
        return Err(domain(format!("need n >= 2, got {n}")));
    }
    let nu = n as u64;
    let u: f64 = rng.random::<f64>().min(1.0 - ROOT_TAIL_MASS);
    let ln_u = u.ln();
    let root = search_up(nu, |i| ln_root_cdf(nu, i) >= ln_u);
    let mut indices = vec![0u64; n - 1];
    indices[n - 2] = root;
    let mut j = root;
    for k in (2..n).rev() {
        let ku = k as u64;
        let norm = ln_root_cdf(ku, j - 1);
        let u: f64 = rng.random();
        let ln_u = u.ln();
        let i = bisect(ku, j - 1, |i| ln_root_cdf(ku, i) - norm >= ln_u);
        indices[k - 2] = i;
        j = i;
    }
    Ok(IndexChain { n, indices })
}

// smallest i >= lo with pred(i), pred monotone and eventually true
fn search_up<P: Fn(u64) -> bool>(lo: u64, pred: P) -> u64 {
    if pred(lo) {
        return lo;
    }
    let mut below = lo;
    let mut step = 1u64;
    loop {
        let hi = lo.saturating_add(step);
        if pred(hi) || hi == u64::MAX {
            return bisect(below + 1, hi, pred);
        }
        below = hi;
        step = step.saturating_mul(2);
    }
}

// smallest i in [lo, hi] with pred(i); hi is returned if none earlier
fn bisect<P: Fn(u64) -> bool>(mut lo: u64, mut hi: u64, pred: P) -> u64 {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::function::gamma::ln_gamma;

    fn lf(n: u64) -> f64 {
        ln_gamma(n as f64 + 1.0)
    }

    // the factorial forms, evaluated independently through log-gamma
    fn root_factorial(n: u64, i: u64) -> f64 {
        ((n * (n - 1)) as f64).ln() + lf(i - 1) + lf(i - 2) - lf(i - n) - lf(i + n - 1)
    }

    fn step_factorial(k: u64, j: u64, i: u64) -> f64 {
        ((k * (k - 1)) as f64).ln() + lf(j - k - 1) + lf(j + k - 2) - lf(j - 1) - lf(j - 2)
            + lf(i - 1)
            + lf(i - 2)
            - lf(i - k)
            - lf(i + k - 1)
    }

    #[test]
    fn documented_pmf_values() {
        assert_relative_eq!(
            saunders_root_pmf(2, 2).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(saunders_root_pmf(3, 3).unwrap(), 0.1, max_relative = 1e-14);
        assert_relative_eq!(
            saunders_step_pmf(2, 4, 2).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            saunders_step_pmf(2, 4, 3).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            saunders_step_pmf(2, 3, 2).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        for i in 2..200u64 {
            let w = 2.0 / (i * (i + 1)) as f64;
            assert_relative_eq!(saunders_root_pmf(2, i).unwrap(), w, max_relative = 1e-12);
        }
    }

    #[test]
    fn pmfs_match_factorial_forms() {
        for n in 2..=50u64 {
            for i in n..n + 300 {
                let a = saunders_root_pmf(n as usize, i).unwrap();
                assert_relative_eq!(a, root_factorial(n, i).exp(), max_relative = 1e-10);
            }
        }
        for k in 2..=30u64 {
            for j in k + 1..=60 {
                for i in k..j {
                    let a = saunders_step_pmf(k as usize, j, i).unwrap();
                    assert_relative_eq!(a, step_factorial(k, j, i).exp(), max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn pmfs_sum_to_one() {
        for n in 2..=50usize {
            // partial sum up to I plus the exact tail 1 - cdf(I)
            let big_i = 20_000u64;
            let s: f64 = (n as u64..=big_i)
                .map(|i| saunders_root_pmf(n, i).unwrap())
                .sum();
            let tail = 1.0 - saunders_root_cdf(n, big_i).unwrap();
            assert!((s + tail - 1.0).abs() <= 1e-10, "n={n}: {s} + {tail}");
        }
        for k in 2..=49usize {
            for j in (k as u64 + 1)..=50 {
                let s: f64 = (k as u64..j)
                    .map(|i| saunders_step_pmf(k, j, i).unwrap())
                    .sum();
                assert!((s - 1.0).abs() <= 1e-12, "k={k} j={j}: {s}");
            }
        }
    }

    #[test]
    fn support_errors() {
        assert!(saunders_root_pmf(3, 2).is_err());
        assert!(saunders_step_pmf(2, 4, 4).is_err());
        assert!(saunders_step_pmf(3, 4, 2).is_err());
        assert!(saunders_step_pmf(1, 4, 2).is_err());
    }

    #[test]
    fn chains_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20_000 {
            let c = sample_index_chain(10, &mut rng).unwrap();
            assert!(c.is_valid(), "{c:?}");
        }
    }

    #[test]
    fn root_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let reps = 200_000;
        let hits = (0..reps)
            .filter(|_| sample_index_chain(2, &mut rng).unwrap().index(2) == 2)
            .count();
        let p = 1.0 / 3.0;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((hits as f64 / reps as f64 - p).abs() < 4.0 * se);
        // n = 3: (i_3, i_2) = (3, 2) with probability 1/10
        let hits = (0..reps)
            .filter(|_| sample_index_chain(3, &mut rng).unwrap().indices == vec![2, 3])
            .count();
        let se = (0.09 / reps as f64).sqrt();
        assert!((hits as f64 / reps as f64 - 0.1).abs() < 4.0 * se);
    }

    #[test]
    fn lambert_measures_normalise() {
        let sp = QuadratureSpec::new(1e-13, 1e-12, 1000).unwrap();
        for k in [1usize, 2, 5] {
            let z = integrate(
                |v| lambert_measure_density(k, v, LambertRegime::FellerPoisson).unwrap(),
                0.0,
                f64::INFINITY,
                &sp,
            )
            .unwrap();
            assert_relative_eq!(z, 1.0, max_relative = 1e-10);
        }
        for a in [0.3, 0.9] {
            for k in [1usize, 3] {
                let z = integrate(
                    |r| {
                        if r <= 0.0 || r >= 1.0 {
                            0.0
                        } else {
                            lambert_measure_density(k, r, LambertRegime::BernoulliCpp { a })
                                .unwrap()
                        }
                    },
                    0.0,
                    1.0,
                    &sp,
                )
                .unwrap();
                assert!((z - 1.0).abs() < 1e-10);
            }
        }
        assert_relative_eq!(
            lambert_measure_density(1, 1.0, LambertRegime::FellerPoisson).unwrap(),
            0.25
        );
        assert!(lambert_measure_density(1, 1.5, LambertRegime::BernoulliCpp { a: 0.5 }).is_err());
    }

    #[test]
    fn mixing_basics() {
        assert_relative_eq!(
            ksample_mix(|_| 1.0, 3, 1.0, 0.5).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        // integrand v/(1+v) = w with k = 1
        let bt = beta_unchecked(1.0, 0.0);
        let v = ksample_mix(|nu| 2.0 * nu * bt / (1.0 + 2.0 * nu * bt), 1, 1.0, 0.0).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn two_sample_documented_value() {
        let want = -2.0 + 4.0 * 2f64.ln();
        assert_relative_eq!(want, 0.772_588_7, epsilon = 1e-7);
        assert!((ksample_joint_cdf_feller(0.0, 1.0, 2, &[0.5]).unwrap() - want).abs() < 1e-12);
        assert!((two_sample_cdf_closed(0.0, 1.0, 0.5).unwrap() - want).abs() < 1e-12);
        assert!((two_sample_cdf_via_series(0.0, 1.0, 0.5).unwrap() - want).abs() < 1e-10);
        assert!((ksample_joint_cdf_by_mixing(0.0, 1.0, 2, &[0.5]).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn typo_weight_is_not_a_distribution() {
        // 2/(i(i-1)) over i >= 2 sums to 2, not 1
        let s: f64 = (2..100_000u64).map(|i| 2.0 / (i * (i - 1)) as f64).sum();
        assert!((s - 2.0).abs() < 1e-4);
    }

    #[test]
    fn series_limits() {
        assert_eq!(two_sample_cdf_via_series(0.3, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(two_sample_cdf_via_series(0.3, 1.0, 0.0).unwrap(), 0.0);
        assert!(two_sample_cdf_via_series(0.3, 1.0, 1e-6).unwrap() < 1e-4);
        assert!(two_sample_cdf_via_series(0.3, 1.0, 1.0 - 1e-9).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn route_triangle_small_grid() {
        for &alpha in &[0.0, 1.0, -1.0] {
            let t = 1.5;
            for k in 2..=4usize {
                let taus: Vec<f64> = (0..k - 1).map(|j| t * (0.8 - 0.25 * j as f64)).collect();
                let a = ksample_joint_cdf_feller(alpha, t, k, &taus).unwrap();
                let b = ksample_joint_cdf_by_mixing(alpha, t, k, &taus).unwrap();
                assert!((a - b).abs() < 1e-7, "alpha={alpha} k={k}: {a} vs {b}");
                assert!(a > 0.0);
            }
            for &tau in &[0.1, 0.7, 1.4] {
                let c = two_sample_cdf_closed(alpha, t, tau).unwrap();
                assert!((two_sample_cdf_via_series(alpha, t, tau).unwrap() - c).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_poles_are_reported() {
        let r = ksample_joint_cdf_feller(0.0, 1.0, 3, &[0.5, 0.5 - 1e-9]);
        assert!(matches!(r, Err(Error::DegeneratePole(..))));
        let ok = ksample_joint_cdf_by_mixing(0.0, 1.0, 3, &[0.5, 0.5 - 1e-9]).unwrap();
        let near = ksample_joint_cdf_feller(0.0, 1.0, 3, &[0.5, 0.49]).unwrap();
        assert!((ok - near).abs() < 0.02, "{ok} vs {near}");
    }

    #[test]
    fn joint_cdf_monotone_in_each_time() {
        let base = [1.2, 0.7, 0.3];
        let v0 = ksample_joint_cdf_feller(0.5, 1.5, 4, &base).unwrap();
        for j in 0..3 {
            let mut up = base;
            up[j] += 0.05;
            assert!(ksample_joint_cdf_feller(0.5, 1.5, 4, &up).unwrap() >= v0);
        }
    }
}
