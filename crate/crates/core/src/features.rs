//! Positional features of a dummy-SWAP candidate and its selection score.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, QubitId};
use crate::error::SliceError;
use crate::slicing::{self, CandidatePosition, Slice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Slices between the candidate and the output.
    pub depth: usize,
    /// How many of the two qubits are ever measured (0..=2).
    pub measured_qubits: usize,
    /// Control-slot incidences of the two qubits over the whole circuit.
    pub control_usage: usize,
    /// Distinct controls met on forward paths that reach a measurement.
    pub controls_in_paths: usize,
    pub involves_constant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub candidate: CandidatePosition,
    pub features: FeatureVector,
    pub score: f64,
}

pub fn feature_measured(circuit: &Circuit, candidate: &CandidatePosition) -> usize {
    candidate
        .qubits()
        .iter()
        .filter(|q| circuit.gates.iter().any(|g| g.kind == GateKind::Measure && g.qubits[0] == **q))
        .count()
}

pub fn feature_control_usage(circuit: &Circuit, candidate: &CandidatePosition) -> usize {
    circuit
        .gates
        .iter()
        .flat_map(|g| g.controls())
        .filter(|q| candidate.involves(**q))
        .count()
}

pub fn feature_constant(circuit: &Circuit, candidate: &CandidatePosition) -> bool {
    candidate.qubits().iter().any(|q| circuit.constant_qubits.contains_key(q))
}

/// Counts the distinct `(gate, control qubit)` incidences met while walking
/// forward from both candidate qubits, keeping only those on walks that end
/// at a measurement.
///
/// A walk moves slice by slice along its wire. At a gate where the wire is a
/// control it forks: one branch stays on the wire, the other bends onto the
/// gate's target. A SWAP carries the walk onto its partner wire. Empty
/// slices are stepped over. A walk ends successfully at a MEASURE on its
/// wire and unsuccessfully at the end of the circuit.
pub fn feature_controls_in_paths(circuit: &Circuit, slices: &[Slice], candidate: &CandidatePosition) -> usize {
    let grid = slicing::occupancy_grid(circuit, slices);
    let n = circuit.num_qubits;
    let depth = slices.len();
    // reaches[s][q]: a walk standing on wire q at slice s can reach a measurement.
    let mut reaches = vec![vec![false; n]; depth + 1];
    for s in (0..depth).rev() {
        for q in 0..n {
            reaches[s][q] = match grid[s][q].map(|g| &circuit.gates[g]) {
                Some(g) if g.kind == GateKind::Measure => true,
                Some(g) if g.controls().contains(&QubitId(q)) => {
                    let t = g.target().expect("controlled gate has a target").0;
                    reaches[s + 1][q] || reaches[s + 1][t]
                }
                Some(g) if g.kind == GateKind::Swap => {
                    let other = if g.qubits[0].0 == q { g.qubits[1].0 } else { g.qubits[0].0 };
                    reaches[s + 1][other]
                }
                _ => reaches[s + 1][q],
            };
        }
    }

    let mut seen = vec![vec![false; n]; depth + 1];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let start = candidate.slice_index + 1;
    for q in candidate.qubits() {
        stack.push((start.min(depth), q.0));
    }
    let mut counted: BTreeSet<(usize, usize)> = BTreeSet::new();
    while let Some((s, q)) = stack.pop() {
        if s >= depth || std::mem::replace(&mut seen[s][q], true) {
            continue;
        }
        let Some(gi) = grid[s][q] else {
            stack.push((s + 1, q));
            continue;
        };
        let g = &circuit.gates[gi];
        if g.kind == GateKind::Measure {
            continue;
        }
        if g.controls().contains(&QubitId(q)) {
            if reaches[s][q] {
                counted.insert((gi, q));
            }
            let t = g.target().expect("controlled gate has a target").0;
            stack.push((s + 1, q));
            stack.push((s + 1, t));
        } else if g.kind == GateKind::Swap {
            let other = if g.qubits[0].0 == q { g.qubits[1].0 } else { g.qubits[0].0 };
            stack.push((s + 1, other));
        } else {
            stack.push((s + 1, q));
        }
    }
    counted.len()
}

/// Raw sum of depth and control usage.
pub fn score(features: &FeatureVector) -> f64 {
    (features.depth + features.control_usage) as f64
}

pub fn extract_features(circuit: &Circuit, slices: &[Slice], candidate: &CandidatePosition) -> FeatureVector {
    FeatureVector {
        depth: slicing::depth_from_output(slices, candidate),
        measured_qubits: feature_measured(circuit, candidate),
        control_usage: feature_control_usage(circuit, candidate),
        controls_in_paths: feature_controls_in_paths(circuit, slices, candidate),
        involves_constant: feature_constant(circuit, candidate),
    }
}

/// Slices the circuit, enumerates every candidate and scores it.
pub fn score_candidates(circuit: &Circuit) -> Result<Vec<ScoredCandidate>, SliceError> {
    let slices = slicing::slice_circuit(circuit)?;
    Ok(slicing::enumerate_candidates(&slices)
        .into_iter()
        .map(|candidate| {
            let features = extract_features(circuit, &slices, &candidate);
            ScoredCandidate { candidate, score: score(&features), features }
        })
        .collect())
}

pub const FEATURE_CSV_HEADER: &str =
    "position_id,slice_index,qubit_a,qubit_b,depth,measured,control_usage,controls_in_paths,constant,score";

pub fn features_csv(rows: &[ScoredCandidate]) -> String {
    let mut out = String::from(FEATURE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (c, f) = (&r.candidate, &r.features);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            c.position_id,
            c.slice_index,
            c.qubit_a.0,
            c.qubit_b.0,
            f.depth,
            f.measured_qubits,
            f.control_usage,
            f.controls_in_paths,
            u8::from(f.involves_constant),
            r.score
        ));
    }
    out
}
