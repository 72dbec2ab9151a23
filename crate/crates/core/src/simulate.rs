//! Tree simulators and a forward birth-death oracle.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, OpenClosed01, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::FellerSetting;
use crate::error::{domain, Error, Result};
use crate::models::NodeHeightModel;
use crate::numerics::beta_unchecked;
use crate::sampling::sample_index_chain;
use crate::trees::CoalescentTree;

/// Generator handed out by [`RngState::rng`] and [`run_replicates`].
pub type ReplicateRng = ChaCha8Rng;

/// Seed plus stream index of a ChaCha8 generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream: u64,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        use rand::SeedableRng;
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }

    /// Same seed, another stream.
    pub fn with_stream(&self, stream: u64) -> Self {
        Self {
            seed: self.seed,
            stream,
        }
    }
}

/// Runs `f` once per replicate index in `range`, replicate `r` on stream `r` of
/// `base.seed`. Results come back in index order whatever the thread count.
pub fn run_replicates<T, F>(base: RngState, range: std::ops::Range<u64>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    range
        .into_par_iter()
        .map(|r| f(&mut base.with_stream(r).rng()))
        .collect()
}

fn check_stem(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("stem age must be finite and > 0, got {t}")));
    }
    Ok(())
}

fn below(t: f64) -> f64 {
    f64::from_bits(t.to_bits() - 1)
}

// draw from the law normalised on [0, t], u uniform on (0, 1]
fn draw_normalized(model: &NodeHeightModel, t: f64, ft: f64, u: f64) -> f64 {
    let tau = if ft < 0.5 {
        // cdf(tau) = (1 - u) F(t) has no cancellation here
        model.quantile((1.0 - u) * ft).unwrap_or(0.0)
    } else {
        model.normalized_quantile_sf(t, u)
    };
    tau.clamp(f64::MIN_POSITIVE, below(t))
}

/// Draws node depths until one exceeds `t`.
pub fn simulate_cpp<R: Rng + ?Sized>(
    model: &NodeHeightModel,
    t: f64,
    rng: &mut R,
) -> Result<CoalescentTree> {
    check_stem(t)?;
    let ft = model.cdf(t)?;
    let mut heights = Vec::new();
    loop {
        let u: f64 = rng.random();
        // H < t exactly when U < F(t); given that, U / F(t) is uniform
        if u >= ft {
            break;
        }
        heights.push(draw_normalized(model, t, ft, 1.0 - u / ft));
    }
    CoalescentTree::from_heights(t, heights)
}

/// Tree on `n` leaves: `n - 1` independent depths from the law normalised on `[0, t]`.
pub fn simulate_cpp_given_n<R: Rng + ?Sized>(
    model: &NodeHeightModel,
    t: f64,
    n: usize,
    rng: &mut R,
) -> Result<CoalescentTree> {
    check_stem(t)?;
    if n < 1 {
        return Err(domain("need n >= 1"));
    }
    let ft = model.cdf(t)?;
    if !(ft > 0.0) {
        return Err(domain(format!("cdf(t) = 0 at t = {t}")));
    }
    let heights = (0..n - 1)
        .map(|_| draw_normalized(model, t, ft, rng.sample(OpenClosed01)))
        .collect();
    CoalescentTree::from_heights(t, heights)
}

fn require_full_mass(model: &NodeHeightModel) -> Result<()> {
    let mass = model.total_mass();
    if mass < 1.0 {
        return Err(Error::UnsupportedConditioning(format!(
            "{model} has total mass {mass} < 1; the tree need not descend from a single founder"
        )));
    }
    Ok(())
}

fn draw_unbounded<R: Rng + ?Sized>(model: &NodeHeightModel, rng: &mut R) -> Result<f64> {
    let q: f64 = rng.sample(OpenClosed01);
    Ok(model.quantile_sf(q)?.max(f64::MIN_POSITIVE))
}

/// Tree on `n` leaves with `T_1 = inf`: `n - 1` independent depths on `(0, inf)`.
pub fn simulate_root_infinity<R: Rng + ?Sized>(
    model: &NodeHeightModel,
    n: usize,
    rng: &mut R,
) -> Result<CoalescentTree> {
    require_full_mass(model)?;
    if n < 1 {
        return Err(domain("need n >= 1"));
    }
    let heights = (0..n - 1)
        .map(|_| draw_unbounded(model, rng))
        .collect::<Result<_>>()?;
    CoalescentTree::from_heights(f64::INFINITY, heights)
}

/// Tree on `n` leaves under an improper uniform prior on `T_1`: `n` independent
/// depths, the largest of which becomes the stem.
pub fn simulate_unif_prior<R: Rng + ?Sized>(
    model: &NodeHeightModel,
    n: usize,
    rng: &mut R,
) -> Result<CoalescentTree> {
    require_full_mass(model)?;
    if n < 1 {
        return Err(domain("need n >= 1"));
    }
    let mut draws = (0..n)
        .map(|_| draw_unbounded(model, rng))
        .collect::<Result<Vec<_>>>()?;
    let top = (0..n)
        .max_by(|&a, &b| draws[a].total_cmp(&draws[b]))
        .expect("n >= 1");
    let stem = draws.swap_remove(top);
    if let Some(h) = draws.iter_mut().find(|h| **h >= stem) {
        *h = below(stem);
    }
    CoalescentTree::from_heights(stem, draws)
}

/// Root-at-infinity tree of `WiufForm(delta, gamma)` through the Yule time
/// change: standard exponential heights `u` mapped to `log(1 + gamma (e^u - 1)) / delta`.
pub fn simulate_yule_transform<R: Rng + ?Sized>(
    delta: f64,
    gamma: f64,
    n: usize,
    rng: &mut R,
) -> Result<CoalescentTree> {
    NodeHeightModel::wiuf(delta, gamma)?;
    if n < 2 {
        return Err(domain(format!("need n >= 2, got {n}")));
    }
    let heights = (0..n - 1)
        .map(|_| {
            let u: f64 = rng.sample(Exp1);
            ((gamma * u.exp_m1()).ln_1p() / delta).max(f64::MIN_POSITIVE)
        })
        .collect();
    CoalescentTree::from_heights(f64::INFINITY, heights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BdEventKind {
    Birth { parent: usize, child: usize },
    Death { lineage: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdEvent {
    pub time: f64,
    pub kind: BdEventKind,
}

/// Forward history of a birth-death process started from lineage 0 at time 0
/// and stopped at time `t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BdGenealogy {
    pub t: f64,
    pub events: Vec<BdEvent>,
    /// Survivors at `t` in planar order.
    pub survivors: Vec<usize>,
    /// Reconstructed node depths between consecutive survivors.
    pub node_heights: Vec<f64>,
}

/// Population size at which [`simulate_bd_oracle`] gives up by default.
pub const DEFAULT_POPULATION_CAP: usize = 1_000_000;

/// Event-by-event simulation with exponential clocks.
pub fn simulate_bd_oracle<R: Rng + ?Sized>(
    lambda: f64,
    mu: f64,
    t: f64,
    rng: &mut R,
    cap: usize,
) -> Result<BdGenealogy> {
    if !(lambda > 0.0 && mu > 0.0) || !lambda.is_finite() || !mu.is_finite() {
        return Err(domain(format!(
            "rates must be finite and > 0, got lambda = {lambda}, mu = {mu}"
        )));
    }
    check_stem(t)?;
    let p_birth = lambda / (lambda + mu);
    let mut alive = vec![0usize];
    let mut births = vec![0.0f64];
    // children of each lineage in birth order
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut dead = vec![false];
    let mut events = Vec::new();
    let mut now = 0.0;
    while !alive.is_empty() {
        let rate = (lambda + mu) * alive.len() as f64;
        let e: f64 = rng.sample(Exp1);
        now += e / rate;
        if now >= t {
            break;
        }
        let slot = rng.random_range(0..alive.len());
        let who = alive[slot];
        if rng.random::<f64>() < p_birth {
            let child = births.len();
            births.push(now);
            children.push(Vec::new());
            dead.push(false);
            children[who].push(child);
            alive.push(child);
            events.push(BdEvent {
                time: now,
                kind: BdEventKind::Birth { parent: who, child },
            });
            if alive.len() > cap {
                return Err(Error::CapExceeded { cap });
            }
        } else {
            alive.swap_remove(slot);
            dead[who] = true;
            events.push(BdEvent {
                time: now,
                kind: BdEventKind::Death { lineage: who },
            });
        }
    }
    let mut survivors = Vec::with_capacity(alive.len());
    let mut node_heights = Vec::with_capacity(alive.len());
    if !alive.is_empty() {
        planar_order(
            0,
            t,
            &births,
            &children,
            &dead,
            &mut survivors,
            &mut node_heights,
        );
    }
    Ok(BdGenealogy {
        t,
        events,
        survivors,
        node_heights,
    })
}

// leaves of lineage `root`: the lineage itself, then daughter clades from the
// youngest to the oldest; a daughter clade born at s joins the leaves to its
// left at depth t - s
fn planar_order(
    root: usize,
    t: f64,
    births: &[f64],
    children: &[Vec<usize>],
    dead: &[bool],
    leaves: &mut Vec<usize>,
    heights: &mut Vec<f64>,
) {
    struct Frame {
        lin: usize,
        next: usize,
        mark: usize,
        joins_left: bool,
    }
    let mut joins = Vec::new();
    let mut stack = Vec::new();
    let open = |lin: usize, joins_left: bool, leaves: &mut Vec<usize>, stack: &mut Vec<Frame>| {
        let mark = leaves.len();
        if !dead[lin] {
            leaves.push(lin);
        }
        stack.push(Frame {
            lin,
            next: 0,
            mark,
            joins_left,
        });
    };
    open(root, false, leaves, &mut stack);
    while let Some(top) = stack.last_mut() {
        let kids = &children[top.lin];
        if top.next < kids.len() {
            let d = kids[kids.len() - 1 - top.next];
            top.next += 1;
            let joins_left = leaves.len() > top.mark;
            open(d, joins_left, leaves, &mut stack);
            continue;
        }
        let f = stack.pop().expect("non-empty");
        if f.joins_left && leaves.len() > f.mark {
            joins.push((f.mark - 1, t - births[f.lin]));
        }
    }
    heights.clear();
    heights.resize(leaves.len().saturating_sub(1), f64::NAN);
    for (pos, h) in joins {
        heights[pos] = h;
    }
}

impl BdGenealogy {
    pub fn n_survivors(&self) -> usize {
        self.survivors.len()
    }

    /// Reconstructed tree of the survivors with stem age `t`; `None` after extinction.
    pub fn reconstructed_tree(&self) -> Option<CoalescentTree> {
        if self.survivors.is_empty() {
            return None;
        }
        CoalescentTree::from_heights(self.t, self.node_heights.clone()).ok()
    }

    /// Tree spanned by `k` survivors chosen uniformly without replacement.
    pub fn subsample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<CoalescentTree> {
        let n = self.survivors.len();
        if k < 1 || k > n {
            return Err(domain(format!("cannot subsample {k} of {n} survivors")));
        }
        let mut picked = rand::seq::index::sample(rng, n, k).into_vec();
        picked.sort_unstable();
        // the join of two leaves is the deepest node between them in planar order
        let heights = picked
            .windows(2)
            .map(|w| {
                self.node_heights[w[0]..w[1]]
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        CoalescentTree::from_heights(self.t, heights)
    }
}

/// Poisson sample size with mean `2 nu x`.
pub fn poisson_sample_size<R: Rng + ?Sized>(x: f64, nu: f64, rng: &mut R) -> Result<u64> {
    if !(x >= 0.0 && nu > 0.0) || !x.is_finite() || !nu.is_finite() {
        return Err(domain(format!(
            "need x >= 0 and nu > 0, got x = {x}, nu = {nu}"
        )));
    }
    let mean = 2.0 * nu * x;
    if mean == 0.0 {
        return Ok(0);
    }
    let p = Poisson::new(mean).map_err(|e| domain(format!("Poisson mean {mean}: {e}")))?;
    Ok(p.sample(rng) as u64)
}

/// Pre-limit Poisson sample: a birth-death process with the rates of
/// [`crate::models::feller_prelimit_rates`] runs from one individual for time
/// `t`; with `Z` survivors the population size is `x = epsilon Z`, and
/// `min(N, Z)` survivors are taken uniformly with `N ~ Poisson(2 nu x)`.
/// `None` when nothing is sampled.
pub fn simulate_prelimit_poisson_sample<R: Rng + ?Sized>(
    epsilon: f64,
    alpha: f64,
    nu: f64,
    t: f64,
    rng: &mut R,
) -> Result<Option<CoalescentTree>> {
    let (lambda, mu) = crate::models::feller_prelimit_rates(epsilon, alpha)?;
    let g = simulate_bd_oracle(lambda, mu, t, rng, DEFAULT_POPULATION_CAP)?;
    let z = g.n_survivors();
    if z == 0 {
        return Ok(None);
    }
    let n = poisson_sample_size(epsilon * z as f64, nu, rng)?.min(z as u64) as usize;
    if n == 0 {
        return Ok(None);
    }
    g.subsample(n, rng).map(Some)
}

// inverse of beta(.; delta)
fn beta_inverse(b: f64, delta: f64) -> f64 {
    let y = 2.0 * delta * b;
    if y.abs() < 1e-12 {
        2.0 * b * (1.0 - y / 2.0)
    } else {
        y.ln_1p() / delta
    }
}

/// `n`-sample tree from a Feller diffusion observed at population size `x`:
/// an index chain matches each sample coalescence to a population coalescence,
/// whose times are drawn from their joint law given `x`. In the variable
/// `D = x (1 / beta(tau) - 1 / beta(t))` the population coalescences are the
/// points of a unit-rate Poisson process, so the chain's times follow from
/// gamma increments.
pub fn simulate_feller_ksample<R: Rng + ?Sized>(
    setting: &FellerSetting,
    n: usize,
    rng: &mut R,
) -> Result<CoalescentTree> {
    setting.validate()?;
    let x = setting.require_x()?;
    if n < 2 {
        return Err(domain(format!("need n >= 2, got {n}")));
    }
    let (delta, t) = (setting.delta(), setting.t);
    let inv_bt = 1.0 / beta_unchecked(t, delta);
    let chain = sample_index_chain(n, rng)?;
    let mut times = Vec::with_capacity(n - 1);
    let mut d = 0.0;
    let mut prev = 1u64;
    for &i in &chain.indices {
        let g = Gamma::new((i - prev) as f64, 1.0).map_err(|e| domain(e.to_string()))?;
        d += g.sample(rng);
        prev = i;
        let tau = beta_inverse(1.0 / (inv_bt + d / x), delta);
        times.push(tau.clamp(f64::MIN_POSITIVE, below(t)));
    }
    // times are T~_2 > ... > T~_n; a random planar order makes a CPP-shaped tree
    let mut heights = times;
    for i in (1..heights.len()).rev() {
        let j = rng.random_range(0..=i);
        heights.swap(i, j);
    }
    CoalescentTree::from_heights(t, heights)
}
