//! Measurement distributions and the total variation distance between them.
//!
//! Distances here use the sum of absolute differences without the usual
//! one-half factor, so they range over `[0, 2]`. [`tvd_pct`] maps a value
//! onto the 0–100 percentage scale.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::DistributionError;

/// Bitstring → weight. Weights are shot counts or probabilities; `shots` is
/// their total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub shots: f64,
    pub counts: BTreeMap<String, f64>,
}

impl Distribution {
    /// Builds a distribution whose `shots` is the sum of the counts.
    pub fn from_counts<I, S>(counts: I) -> Result<Self, DistributionError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in counts {
            *map.entry(k.into()).or_insert(0.0) += v;
        }
        let shots = map.values().sum();
        let d = Distribution { shots, counts: map };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), DistributionError> {
        if self.counts.is_empty() || self.shots <= 0.0 {
            return Err(DistributionError::Empty);
        }
        let mut width = None;
        for (k, &v) in &self.counts {
            if !k.chars().all(|c| c == '0' || c == '1') {
                return Err(DistributionError::Invalid(format!("bitstring `{k}` is not binary")));
            }
            if !(v >= 0.0 && v.is_finite()) {
                return Err(DistributionError::Invalid(format!("weight {v} for `{k}`")));
            }
            match width {
                None => width = Some(k.len()),
                Some(w) if w != k.len() => return Err(DistributionError::LengthMismatch(w, k.len())),
                _ => {}
            }
        }
        let total: f64 = self.counts.values().sum();
        if (total - self.shots).abs() > 1e-9 * self.shots.max(1.0) {
            return Err(DistributionError::Invalid(format!("counts sum to {total}, shots is {}", self.shots)));
        }
        Ok(())
    }

    pub fn width(&self) -> Option<usize> {
        self.counts.keys().next().map(String::len)
    }

    pub fn probability(&self, key: &str) -> f64 {
        self.counts.get(key).map_or(0.0, |c| c / self.shots)
    }

    pub fn normalized(&self) -> Distribution {
        Distribution {
            shots: 1.0,
            counts: self.counts.iter().map(|(k, v)| (k.clone(), v / self.shots)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DistributionError> {
        let d: Distribution = serde_json::from_str(text).map_err(|e| DistributionError::Invalid(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }
}

/// `Σ_i |a_i − b_i| / shots` over the union of outcomes. When the totals
/// differ both sides are normalized first.
pub fn tvd(a: &Distribution, b: &Distribution) -> Result<f64, DistributionError> {
    for d in [a, b] {
        if d.counts.is_empty() || d.shots <= 0.0 {
            return Err(DistributionError::Empty);
        }
    }
    if let (Some(wa), Some(wb)) = (a.width(), b.width()) {
        if wa != wb {
            return Err(DistributionError::LengthMismatch(wa, wb));
        }
    }
    let keys: BTreeSet<&String> = a.counts.keys().chain(b.counts.keys()).collect();
    let get = |d: &Distribution, k: &String| d.counts.get(k).copied().unwrap_or(0.0);
    if a.shots == b.shots {
        Ok(keys.iter().map(|k| (get(a, k) - get(b, k)).abs()).sum::<f64>() / a.shots)
    } else {
        Ok(keys.iter().map(|k| (get(a, k) / a.shots - get(b, k) / b.shots).abs()).sum())
    }
}

/// Maps a `[0, 2]` distance onto a 0–100 percentage.
pub fn tvd_pct(value: f64) -> f64 {
    value / 2.0 * 100.0
}
