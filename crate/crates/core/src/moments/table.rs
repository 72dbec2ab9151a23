use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{expected_tk_quadrature, expected_wk_root_infinity, expected_wk_unif_closed};
use crate::analytics::StemConditioning;
use crate::error::{domain, Result};
use crate::models::NodeHeightModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    Waiting,
    Coalescent,
}

/// Expected waiting times `E[W_k]` or coalescent times `E[T_k]` for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub n: usize,
    pub regime: StemConditioning,
    pub kind: MomentKind,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    /// `(k, value)` in increasing `k`.
    pub values: Vec<(usize, f64)>,
}

impl MomentTable {
    /// Waiting times for the Wiuf form from the hypergeometric closed forms
    /// (uniform prior on `[0, inf)` or root at infinity) or quadrature (fixed
    /// stem, finite uniform prior).
    pub fn wiuf(
        delta: f64,
        gamma: f64,
        n: usize,
        regime: StemConditioning,
        kind: MomentKind,
    ) -> Result<Self> {
        let model = NodeHeightModel::wiuf(delta, gamma)?;
        let mut table = Self::for_model(&model, n, regime, kind)?;
        table.delta = Some(delta);
        table.gamma = Some(gamma);
        Ok(table)
    }

    pub fn for_model(
        model: &NodeHeightModel,
        n: usize,
        regime: StemConditioning,
        kind: MomentKind,
    ) -> Result<Self> {
        if n < 1 {
            return Err(domain("need n >= 1"));
        }
        regime.validate(model)?;
        let wiuf = model
            .to_wiuf_form()
            .ok()
            .filter(|_| model.total_mass() == 1.0);
        let times = coalescent_times(model, n, regime)?;
        let values = match kind {
            MomentKind::Coalescent => times,
            MomentKind::Waiting => {
                let direct = match (regime, wiuf) {
                    (StemConditioning::UniformPrior { t }, Some((d, g))) if t.is_infinite() => {
                        Some(
                            (1..=n)
                                .map(|k| Ok((k, expected_wk_unif_closed(d, g, n, k)?)))
                                .collect::<Result<Vec<_>>>()?,
                        )
                    }
                    (StemConditioning::RootAtInfinity, Some((d, g))) => Some(
                        (2..=n)
                            .map(|k| Ok((k, expected_wk_root_infinity(d, g, n, k)?)))
                            .collect::<Result<Vec<_>>>()?,
                    ),
                    _ => None,
                };
                match direct {
                    Some(v) => v,
                    None => differences(&times, n),
                }
            }
        };
        let (delta, gamma) = match wiuf {
            Some((d, g)) => (Some(d), Some(g)),
            None => (None, None),
        };
        Ok(Self {
            n,
            regime,
            kind,
            delta,
            gamma,
            values,
        })
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.iter().find(|(kk, _)| *kk == k).map(|(_, v)| *v)
    }

    /// CSV with header `n,k,value,regime,delta,gamma`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,k,value,regime,delta,gamma\n");
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        for (k, v) in &self.values {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.n,
                k,
                fmt17(*v),
                self.regime.name(),
                opt(self.delta),
                opt(self.gamma)
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serialises")
    }
}

/// Formats with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.16e}")
}

// E[T_k] for the k that exist under the regime: fixed stem k = 1..=n with
// T_1 = t, uniform prior k = 1..=n, root at infinity k = 2..=n
fn coalescent_times(
    model: &NodeHeightModel,
    n: usize,
    regime: StemConditioning,
) -> Result<Vec<(usize, f64)>> {
    let (ks, t, shift): (Vec<usize>, f64, usize) = match regime {
        StemConditioning::FixedStem { t } => ((1..=n).collect(), t, 0),
        StemConditioning::UniformPrior { t } => ((1..=n).collect(), t, 1),
        StemConditioning::RootAtInfinity => ((2..=n).collect(), f64::INFINITY, 0),
    };
    ks.par_iter()
        .map(|&k| {
            let (nn, kk) = (n + shift, k + shift);
            let v = if kk == 1 {
                t
            } else if nn < 2 {
                0.0
            } else {
                expected_tk_quadrature(model, t, nn, kk)?
            };
            Ok((k, v))
        })
        .collect()
}

fn differences(times: &[(usize, f64)], n: usize) -> Vec<(usize, f64)> {
    times
        .iter()
        .map(|&(k, v)| {
            let next = if k == n {
                0.0
            } else {
                times
                    .iter()
                    .find(|(kk, _)| *kk == k + 1)
                    .map(|x| x.1)
                    .unwrap_or(0.0)
            };
            (k, v - next)
        })
        .collect()
}
