//! Simulation-free selection of one dummy-SWAP position.
//!
//! Three pruning passes run in a fixed order; the metric id decides how many
//! of them apply and whether the highest or the lowest score wins:
//!
//! | id  | passes | pick    |
//! |-----|--------|---------|
//! | 1/2 | 1      | max/min |
//! | 3/4 | 1,2    | max/min |
//! | 5/6 | 1,2,3  | max/min |
//!
//! A pass that would empty the set is skipped and recorded as such.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::MetricError;
use crate::features::{self, ScoredCandidate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct MetricId(u8);

impl MetricId {
    pub const ALL: [MetricId; 6] = [MetricId(1), MetricId(2), MetricId(3), MetricId(4), MetricId(5), MetricId(6)];

    pub fn new(id: u8) -> Result<Self, MetricError> {
        if (1..=6).contains(&id) {
            Ok(MetricId(id))
        } else {
            Err(MetricError::InvalidId(id))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn picks_highest(self) -> bool {
        self.0 % 2 == 1
    }

    /// Number of pruning passes applied (1, 2 or 3).
    pub fn passes(self) -> usize {
        usize::from(self.0.div_ceil(2))
    }
}

impl TryFrom<u8> for MetricId {
    type Error = MetricError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        MetricId::new(v)
    }
}

impl From<MetricId> for u8 {
    fn from(m: MetricId) -> u8 {
        m.0
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "metric-{}", self.0)
    }
}

/// Drops candidates at the output (depth 0) touching no measured qubit.
pub fn prune_pass1(scored: &[ScoredCandidate]) -> Vec<ScoredCandidate> {
    scored
        .iter()
        .filter(|s| !(s.features.depth == 0 && s.features.measured_qubits == 0))
        .cloned()
        .collect()
}

/// Keeps only candidates involving a constant qubit.
pub fn prune_pass2(scored: &[ScoredCandidate]) -> Vec<ScoredCandidate> {
    scored.iter().filter(|s| s.features.involves_constant).cloned().collect()
}

/// Keeps only candidates with at least one control on a path to a measurement.
pub fn prune_pass3(scored: &[ScoredCandidate]) -> Vec<ScoredCandidate> {
    scored.iter().filter(|s| s.features.controls_in_paths >= 1).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassTrace {
    pub pass: usize,
    pub before: usize,
    pub after: usize,
    /// The pass would have emptied the set and was not applied.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricOutcome {
    pub metric_id: MetricId,
    pub chosen: ScoredCandidate,
    pub surviving_set: Vec<ScoredCandidate>,
    pub pruning_trace: Vec<PassTrace>,
}

impl MetricOutcome {
    pub fn any_skipped(&self) -> bool {
        self.pruning_trace.iter().any(|t| t.skipped)
    }
}

/// Orders by score, then prefers the earliest slice and the lowest pair.
fn better(a: &ScoredCandidate, b: &ScoredCandidate, highest: bool) -> bool {
    let by_score = a.score.partial_cmp(&b.score).unwrap_or(Ordering::Equal);
    let by_score = if highest { by_score } else { by_score.reverse() };
    match by_score {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            let ka = (a.candidate.slice_index, a.candidate.qubit_a, a.candidate.qubit_b);
            let kb = (b.candidate.slice_index, b.candidate.qubit_a, b.candidate.qubit_b);
            ka < kb
        }
    }
}

type Pass = fn(&[ScoredCandidate]) -> Vec<ScoredCandidate>;

/// Runs the pruning chain for `metric` over precomputed candidates.
pub fn select_from(scored: &[ScoredCandidate], metric: MetricId) -> Result<MetricOutcome, MetricError> {
    if scored.is_empty() {
        return Err(MetricError::NoCandidates);
    }
    let passes: [Pass; 3] = [prune_pass1, prune_pass2, prune_pass3];
    let mut set = scored.to_vec();
    let mut trace = Vec::new();
    for (i, pass) in passes.iter().take(metric.passes()).enumerate() {
        let next = pass(&set);
        let skipped = next.is_empty();
        trace.push(PassTrace { pass: i + 1, before: set.len(), after: if skipped { set.len() } else { next.len() }, skipped });
        if !skipped {
            set = next;
        }
    }
    let highest = metric.picks_highest();
    let chosen = set
        .iter()
        .fold(None::<&ScoredCandidate>, |best, c| match best {
            Some(b) if !better(c, b, highest) => Some(b),
            _ => Some(c),
        })
        .expect("surviving set is nonempty")
        .clone();
    Ok(MetricOutcome { metric_id: metric, chosen, surviving_set: set, pruning_trace: trace })
}

pub fn select(circuit: &Circuit, metric: MetricId) -> Result<MetricOutcome, MetricError> {
    let scored = features::score_candidates(circuit)?;
    select_from(&scored, metric)
}
