//! Partitioning of a circuit into parallel slices and enumeration of the
//! dummy-SWAP insertion points those slices leave open.
//!
//! Two layering rules apply:
//!
//! * If the circuit contains at least one barrier spanning every qubit, the
//!   full barriers are the slice boundaries. Each non-empty region between
//!   consecutive full barriers is one slice, and its gates must act on
//!   disjoint qubits. Partial barriers are ignored in this mode.
//! * Otherwise gates are layered ASAP in program order. A partial barrier
//!   synchronises the qubits it spans.
//!
//! Measurements occupy their qubit in the slice they land in; barriers are
//! never slice members.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, QubitId};
use crate::error::SliceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlicingMode {
    Barrier,
    Asap,
}

pub fn slicing_mode(circuit: &Circuit) -> SlicingMode {
    if circuit.has_full_barrier() {
        SlicingMode::Barrier
    } else {
        SlicingMode::Asap
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub index: usize,
    /// Indices into `Circuit::gates`, in program order.
    pub gates: Vec<usize>,
    pub occupied: BTreeSet<QubitId>,
    pub free: BTreeSet<QubitId>,
}

/// Slice index of every gate; `None` for barriers.
pub fn gate_levels(circuit: &Circuit) -> Result<Vec<Option<usize>>, SliceError> {
    match slicing_mode(circuit) {
        SlicingMode::Barrier => barrier_levels(circuit),
        SlicingMode::Asap => Ok(asap_levels(circuit)),
    }
}

fn barrier_levels(circuit: &Circuit) -> Result<Vec<Option<usize>>, SliceError> {
    let n = circuit.num_qubits;
    let mut levels = vec![None; circuit.gates.len()];
    let mut region = 0;
    let mut slice = 0;
    let mut used = vec![false; n];
    let mut region_nonempty = false;
    for (i, g) in circuit.gates.iter().enumerate() {
        if g.kind == GateKind::Barrier {
            if g.is_full_barrier(n) {
                if region_nonempty {
                    slice += 1;
                }
                region += 1;
                region_nonempty = false;
                used.iter_mut().for_each(|u| *u = false);
            }
            continue;
        }
        for q in &g.qubits {
            if std::mem::replace(&mut used[q.0], true) {
                return Err(SliceError::OverlapInRegion { region, qubit: q.0 });
            }
        }
        region_nonempty = true;
        levels[i] = Some(slice);
    }
    Ok(levels)
}

fn asap_levels(circuit: &Circuit) -> Vec<Option<usize>> {
    let mut next_free = vec![0usize; circuit.num_qubits];
    circuit
        .gates
        .iter()
        .map(|g| {
            let level = g.qubits.iter().map(|q| next_free[q.0]).max().unwrap_or(0);
            if g.kind == GateKind::Barrier {
                for q in &g.qubits {
                    next_free[q.0] = level;
                }
                None
            } else {
                for q in &g.qubits {
                    next_free[q.0] = level + 1;
                }
                Some(level)
            }
        })
        .collect()
}

/// Sort keys that reorder an ASAP-layered circuit slice by slice without
/// changing its semantics: a gate in slice `l` gets `2l + 1`, a partial
/// barrier synchronising at slice `m` gets `2m`.
pub(crate) fn asap_order_keys(circuit: &Circuit) -> Vec<usize> {
    let mut next_free = vec![0usize; circuit.num_qubits];
    circuit
        .gates
        .iter()
        .map(|g| {
            let level = g.qubits.iter().map(|q| next_free[q.0]).max().unwrap_or(0);
            if g.kind == GateKind::Barrier {
                for q in &g.qubits {
                    next_free[q.0] = level;
                }
                2 * level
            } else {
                for q in &g.qubits {
                    next_free[q.0] = level + 1;
                }
                2 * level + 1
            }
        })
        .collect()
}

pub fn slice_circuit(circuit: &Circuit) -> Result<Vec<Slice>, SliceError> {
    let levels = gate_levels(circuit)?;
    let count = levels.iter().flatten().max().map_or(0, |m| m + 1);
    let all: BTreeSet<QubitId> = (0..circuit.num_qubits).map(QubitId).collect();
    let mut slices: Vec<Slice> = (0..count)
        .map(|index| Slice { index, gates: Vec::new(), occupied: BTreeSet::new(), free: BTreeSet::new() })
        .collect();
    for (i, level) in levels.iter().enumerate() {
        if let Some(l) = level {
            slices[*l].gates.push(i);
            slices[*l].occupied.extend(circuit.gates[i].qubits.iter().copied());
        }
    }
    for s in &mut slices {
        s.free = all.difference(&s.occupied).copied().collect();
    }
    Ok(slices)
}

/// `grid[slice][qubit]` is the gate index acting on that qubit in that slice.
pub fn occupancy_grid(circuit: &Circuit, slices: &[Slice]) -> Vec<Vec<Option<usize>>> {
    slices
        .iter()
        .map(|s| {
            let mut row = vec![None; circuit.num_qubits];
            for &g in &s.gates {
                for q in &circuit.gates[g].qubits {
                    row[q.0] = Some(g);
                }
            }
            row
        })
        .collect()
}

/// A legal dummy-SWAP insertion point: two qubits idle in one slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidatePosition {
    /// 1-based ordinal in enumeration order.
    pub position_id: usize,
    pub slice_index: usize,
    pub qubit_a: QubitId,
    pub qubit_b: QubitId,
}

impl CandidatePosition {
    pub fn qubits(&self) -> [QubitId; 2] {
        [self.qubit_a, self.qubit_b]
    }

    pub fn involves(&self, q: QubitId) -> bool {
        self.qubit_a == q || self.qubit_b == q
    }
}

/// All unordered free pairs, slice-major then lexicographic.
pub fn enumerate_candidates(slices: &[Slice]) -> Vec<CandidatePosition> {
    let mut out = Vec::new();
    for s in slices {
        let free: Vec<QubitId> = s.free.iter().copied().collect();
        for (i, &a) in free.iter().enumerate() {
            for &b in &free[i + 1..] {
                out.push(CandidatePosition {
                    position_id: out.len() + 1,
                    slice_index: s.index,
                    qubit_a: a,
                    qubit_b: b,
                });
            }
        }
    }
    out
}

/// Number of slices strictly after the candidate's slice.
pub fn depth_from_output(slices: &[Slice], candidate: &CandidatePosition) -> usize {
    slices.len().saturating_sub(candidate.slice_index + 1)
}
