//! Exhaustive evaluation harness: every candidate position is obfuscated,
//! simulated against the original and restored, then the six metrics are
//! scored against the Best/Worst/Average of that sweep.
//!
//! Percentage deltas are in points on the `tvd / 2 × 100` scale.
//! `delta_vs_best_pct = (best − metric)`, so smaller is better;
//! `delta_vs_average_pct = (metric − average)`, so larger is better.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::distribution::tvd_pct;
use crate::error::{Error, MetricError};
use crate::features::{self, FeatureVector};
use crate::metrics::{self, MetricId};
use crate::obfuscator;
use crate::simulator::{self, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub position_id: usize,
    pub slice_index: usize,
    pub qubit_a: usize,
    pub qubit_b: usize,
    pub features: FeatureVector,
    pub score: f64,
    pub tvd: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric_id: MetricId,
    pub chosen_position: usize,
    pub tvd: Option<f64>,
    pub delta_vs_best_pct: Option<f64>,
    pub delta_vs_average_pct: Option<f64>,
    /// A pruning pass was skipped because it would have emptied the set.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub circuit_name: String,
    pub candidate_rows: Vec<CandidateRow>,
    pub best_tvd: Option<f64>,
    pub worst_tvd: Option<f64>,
    pub average_tvd: Option<f64>,
    pub metric_rows: Vec<MetricRow>,
    pub sim_config: SimConfig,
    /// Every candidate evaluated without error.
    pub complete: bool,
    /// No candidate corrupts the output at all.
    pub obfuscation_resistant: bool,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn candidates_csv(&self) -> String {
        let mut out = String::from(
            "position_id,slice_index,qubit_a,qubit_b,depth,measured,control_usage,controls_in_paths,constant,score,tvd\n",
        );
        for r in &self.candidate_rows {
            let f = &r.features;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.position_id,
                r.slice_index,
                r.qubit_a,
                r.qubit_b,
                f.depth,
                f.measured_qubits,
                f.control_usage,
                f.controls_in_paths,
                u8::from(f.involves_constant),
                r.score,
                r.tvd.map(|t| t.to_string()).unwrap_or_default()
            );
        }
        out
    }
}

/// Evaluates one candidate: insert, simulate, restore.
fn evaluate(circuit: &Circuit, row: &mut CandidateRow, config: &SimConfig) {
    let cand = crate::slicing::CandidatePosition {
        position_id: row.position_id,
        slice_index: row.slice_index,
        qubit_a: crate::circuit::QubitId(row.qubit_a),
        qubit_b: crate::circuit::QubitId(row.qubit_b),
    };
    let result = (|| -> Result<f64, Error> {
        let (obf, key) = obfuscator::insert_swap(circuit, &cand)?;
        let value = simulator::circuit_tvd(circuit, &obf, config)?;
        obfuscator::restore(&obf, &key)?;
        Ok(value)
    })();
    match result {
        Ok(v) => row.tvd = Some(v),
        Err(e) => row.error = Some(e.to_string()),
    }
}

pub fn run_sweep(name: &str, circuit: &Circuit, config: &SimConfig, parallel: bool) -> Result<SweepReport, Error> {
    let scored = features::score_candidates(circuit)?;
    if scored.is_empty() {
        return Err(MetricError::NoCandidates.into());
    }
    let mut rows: Vec<CandidateRow> = scored
        .iter()
        .map(|s| CandidateRow {
            position_id: s.candidate.position_id,
            slice_index: s.candidate.slice_index,
            qubit_a: s.candidate.qubit_a.0,
            qubit_b: s.candidate.qubit_b.0,
            features: s.features,
            score: s.score,
            tvd: None,
            error: None,
        })
        .collect();
    if parallel {
        rows.par_iter_mut().for_each(|r| evaluate(circuit, r, config));
    } else {
        rows.iter_mut().for_each(|r| evaluate(circuit, r, config));
    }

    let values: Vec<f64> = rows.iter().filter_map(|r| r.tvd).collect();
    let complete = values.len() == rows.len();
    let (best, worst, average) = if values.is_empty() {
        (None, None, None)
    } else {
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let worst = values.iter().copied().fold(f64::INFINITY, f64::min);
        (Some(best), Some(worst), Some(values.iter().sum::<f64>() / values.len() as f64))
    };

    let mut metric_rows = Vec::with_capacity(6);
    for m in MetricId::ALL {
        let outcome = metrics::select_from(&scored, m)?;
        let pos = outcome.chosen.candidate.position_id;
        let value = rows.iter().find(|r| r.position_id == pos).and_then(|r| r.tvd);
        metric_rows.push(MetricRow {
            metric_id: m,
            chosen_position: pos,
            tvd: value,
            delta_vs_best_pct: value.zip(best).map(|(v, b)| tvd_pct(b) - tvd_pct(v)),
            delta_vs_average_pct: value.zip(average).map(|(v, a)| tvd_pct(v) - tvd_pct(a)),
            fallback: outcome.any_skipped(),
        });
    }

    Ok(SweepReport {
        circuit_name: name.to_string(),
        candidate_rows: rows,
        best_tvd: best,
        worst_tvd: worst,
        average_tvd: average,
        metric_rows,
        sim_config: config.clone(),
        complete,
        obfuscation_resistant: best.is_some_and(|b| b == 0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric_id: MetricId,
    pub circuits: usize,
    pub mean_delta_vs_best_pct: f64,
    pub mean_delta_vs_average_pct: f64,
    /// Circuits where the metric's TVD is strictly above the Average TVD.
    pub beats_average: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub circuits: Vec<String>,
    /// Reports left out because they were incomplete.
    pub skipped: Vec<String>,
    pub metrics: Vec<MetricSummary>,
}

impl ComparisonSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric_id,circuits,mean_delta_vs_best_pct,mean_delta_vs_average_pct,beats_average\n");
        for m in &self.metrics {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                m.metric_id.get(),
                m.circuits,
                m.mean_delta_vs_best_pct,
                m.mean_delta_vs_average_pct,
                m.beats_average
            );
        }
        out
    }
}

/// Aggregates metric performance over the complete reports.
pub fn compare_metrics(reports: &[SweepReport]) -> ComparisonSummary {
    let (used, skipped): (Vec<&SweepReport>, Vec<&SweepReport>) = reports.iter().partition(|r| r.complete);
    let metrics = MetricId::ALL
        .iter()
        .map(|&m| {
            let rows: Vec<(&SweepReport, &MetricRow)> = used
                .iter()
                .filter_map(|r| r.metric_rows.iter().find(|row| row.metric_id == m).map(|row| (*r, row)))
                .collect();
            let n = rows.len();
            let mean = |f: &dyn Fn(&MetricRow) -> Option<f64>| {
                if n == 0 {
                    0.0
                } else {
                    rows.iter().filter_map(|(_, row)| f(row)).sum::<f64>() / n as f64
                }
            };
            MetricSummary {
                metric_id: m,
                circuits: n,
                mean_delta_vs_best_pct: mean(&|r| r.delta_vs_best_pct),
                mean_delta_vs_average_pct: mean(&|r| r.delta_vs_average_pct),
                beats_average: rows
                    .iter()
                    .filter(|(rep, row)| matches!((row.tvd, rep.average_tvd), (Some(v), Some(a)) if v > a))
                    .count(),
            }
        })
        .collect();
    ComparisonSummary {
        circuits: used.iter().map(|r| r.circuit_name.clone()).collect(),
        skipped: skipped.iter().map(|r| r.circuit_name.clone()).collect(),
        metrics,
    }
}
