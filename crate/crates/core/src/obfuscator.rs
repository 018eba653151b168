//! Dummy-SWAP insertion, the restoration key, and post-compilation restore.
//!
//! The inserted SWAP is fenced by full-width barriers on both sides of its
//! slice. A circuit that is already barrier-delimited reuses its barriers
//! and gains at most one at either end. An ASAP-layered circuit is rewritten
//! into slice order with a full barrier between every pair of slices, so the
//! fences around the dummy look like every other slice boundary.
//!
//! The key records the SWAP location and which full barriers were added.
//! `restore` removes exactly those and checks a SHA-256 digest of the
//! canonical original.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{circuit_stats, Circuit, CircuitStats, Gate, GateKind, QubitId};
use crate::error::{ObfuscationError, SliceError};
use crate::metrics::{self, MetricId, MetricOutcome};
use crate::qasm;
use crate::slicing::{self, CandidatePosition, SlicingMode};

pub const KEY_VERSION: u32 = 1;
pub const HASH_ALGORITHM: &str = "sha256";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub marker_id: String,
    pub slice_index: usize,
    pub qubit_a: usize,
    pub qubit_b: usize,
    /// Ordinals, among the full barriers of the obfuscated circuit, of the
    /// barriers this insertion added.
    pub added_barriers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObfuscationKey {
    pub version: u32,
    pub hash_algorithm: String,
    pub original_digest: String,
    pub insertions: Vec<Insertion>,
    pub metric_used: Option<MetricId>,
}

impl ObfuscationKey {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("key serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Marker-free copy in a layout that does not depend on how independent
/// gates happened to be interleaved: barrier-delimited circuits keep their
/// order, ASAP circuits are stably reordered slice by slice.
pub fn canonical_form(circuit: &Circuit) -> Circuit {
    let mut c = circuit.without_markers();
    if slicing::slicing_mode(&c) == SlicingMode::Asap {
        let keys = slicing::asap_order_keys(&c);
        let mut order: Vec<usize> = (0..c.gates.len()).collect();
        order.sort_by_key(|&i| keys[i]);
        c.gates = order.into_iter().map(|i| c.gates[i].clone()).collect();
    }
    c
}

/// Hex SHA-256 of the canonical serialization.
pub fn circuit_digest(circuit: &Circuit) -> String {
    let text = qasm::serialize_qasm(&canonical_form(circuit));
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn full_barrier_positions(circuit: &Circuit) -> Vec<usize> {
    circuit
        .gates
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_full_barrier(circuit.num_qubits))
        .map(|(i, _)| i)
        .collect()
}

/// Inserts a marked SWAP at `candidate` and returns the obfuscated circuit
/// with its single-insertion key. The slice count is unchanged.
pub fn insert_swap(
    circuit: &Circuit,
    candidate: &CandidatePosition,
) -> Result<(Circuit, ObfuscationKey), ObfuscationError> {
    let slices = slicing::slice_circuit(circuit)?;
    let slice = slices.get(candidate.slice_index).ok_or(ObfuscationError::NoSuchSlice {
        slice: candidate.slice_index,
        num_slices: slices.len(),
    })?;
    for q in candidate.qubits() {
        if q.0 >= circuit.num_qubits || !slice.free.contains(&q) || candidate.qubit_a == candidate.qubit_b {
            return Err(ObfuscationError::OccupiedQubit { slice: candidate.slice_index, qubit: q.0 });
        }
    }

    let digest = circuit_digest(circuit);
    let marker_id = format!("{}-{}", &digest[..16], 0);
    let mut swap = Gate::swap(candidate.qubit_a.0, candidate.qubit_b.0);
    swap.dummy_marker = Some(marker_id.clone());

    // Build the new gate list as (gate, added) pairs so the added barriers can be located afterwards.
    let mut tagged: Vec<(Gate, bool)> = Vec::with_capacity(circuit.gates.len() + slices.len() + 2);
    let s = candidate.slice_index;
    let last = slices.len() - 1;
    match slicing::slicing_mode(circuit) {
        SlicingMode::Barrier => {
            let first_gate = slice.gates[0];
            let last_gate = *slice.gates.last().expect("slices are nonempty");
            let full = |i: usize| circuit.gates[i].is_full_barrier(circuit.num_qubits);
            let fenced_before = (0..first_gate).any(full);
            let closing = (last_gate + 1..circuit.gates.len()).find(|&i| full(i));
            for (i, g) in circuit.gates.iter().enumerate() {
                if i == first_gate && !fenced_before {
                    tagged.push((circuit.full_barrier(), true));
                }
                if Some(i) == closing {
                    tagged.push((swap.clone(), false));
                }
                tagged.push((g.clone(), false));
            }
            if closing.is_none() {
                tagged.push((swap.clone(), false));
                tagged.push((circuit.full_barrier(), true));
            }
        }
        SlicingMode::Asap => {
            let levels = slicing::gate_levels(circuit)?;
            let keys = slicing::asap_order_keys(circuit);
            let mut order: Vec<usize> = (0..circuit.gates.len()).collect();
            order.sort_by_key(|&i| keys[i]);
            if s == 0 {
                tagged.push((circuit.full_barrier(), true));
            }
            let mut current = 0;
            for i in order {
                // Partial barriers have no level; their key places them at the start of slice key/2.
                let level = levels[i].unwrap_or(keys[i] / 2);
                while current < level.min(last + 1) {
                    if current == s {
                        tagged.push((swap.clone(), false));
                    }
                    if current < last || current == s {
                        tagged.push((circuit.full_barrier(), true));
                    }
                    current += 1;
                }
                tagged.push((circuit.gates[i].clone(), false));
            }
            while current <= last {
                if current == s {
                    tagged.push((swap.clone(), false));
                }
                if current < last || current == s {
                    tagged.push((circuit.full_barrier(), true));
                }
                current += 1;
            }
        }
    }

    let n = circuit.num_qubits;
    let added_barriers = tagged
        .iter()
        .filter(|(g, _)| g.is_full_barrier(n))
        .enumerate()
        .filter(|(_, (_, added))| *added)
        .map(|(ordinal, _)| ordinal)
        .collect();
    let mut obfuscated = Circuit { gates: Vec::with_capacity(tagged.len()), ..circuit.clone() };
    for (g, _) in tagged {
        obfuscated.push(g)?;
    }
    debug_assert_eq!(slicing::slice_circuit(&obfuscated).map(|s| s.len()), Ok(slices.len()));

    let key = ObfuscationKey {
        version: KEY_VERSION,
        hash_algorithm: HASH_ALGORITHM.into(),
        original_digest: digest,
        insertions: vec![Insertion {
            marker_id,
            slice_index: s,
            qubit_a: candidate.qubit_a.0,
            qubit_b: candidate.qubit_b.0,
            added_barriers,
        }],
        metric_used: None,
    };
    Ok((obfuscated, key))
}

/// Removes every keyed dummy SWAP and the barriers added with it, then
/// verifies the digest of the result.
pub fn restore(obfuscated: &Circuit, key: &ObfuscationKey) -> Result<Circuit, ObfuscationError> {
    if key.hash_algorithm != HASH_ALGORITHM {
        return Err(ObfuscationError::KeyMismatch(format!("unsupported hash algorithm `{}`", key.hash_algorithm)));
    }
    let mut c = obfuscated.clone();
    for ins in key.insertions.iter().rev() {
        let slices = slicing::slice_circuit(&c).map_err(|e: SliceError| {
            ObfuscationError::KeyMismatch(format!("cannot locate dummy {}: {e}", ins.marker_id))
        })?;
        let missing = || {
            ObfuscationError::KeyMismatch(format!(
                "dummy swap {} not found on q{},q{} in slice {}",
                ins.marker_id, ins.qubit_a, ins.qubit_b, ins.slice_index
            ))
        };
        let slice = slices.get(ins.slice_index).ok_or_else(missing)?;
        let pair: BTreeSet<QubitId> = [QubitId(ins.qubit_a), QubitId(ins.qubit_b)].into();
        let matches: Vec<usize> = slice
            .gates
            .iter()
            .copied()
            .filter(|&i| {
                let g = &c.gates[i];
                g.kind == GateKind::Swap
                    && g.qubits.iter().copied().collect::<BTreeSet<_>>() == pair
                    && g.dummy_marker.as_ref().is_none_or(|m| *m == ins.marker_id)
            })
            .collect();
        let swap_at = matches
            .iter()
            .copied()
            .find(|&i| c.gates[i].dummy_marker.as_deref() == Some(ins.marker_id.as_str()))
            .or_else(|| matches.first().copied())
            .ok_or_else(missing)?;

        let barriers = full_barrier_positions(&c);
        let mut remove: BTreeSet<usize> = BTreeSet::from([swap_at]);
        for &ordinal in &ins.added_barriers {
            let at = barriers.get(ordinal).ok_or_else(|| {
                ObfuscationError::KeyMismatch(format!(
                    "barrier #{ordinal} added with {} is missing (circuit has {})",
                    ins.marker_id,
                    barriers.len()
                ))
            })?;
            remove.insert(*at);
        }
        c.gates = c
            .gates
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !remove.contains(i))
            .map(|(_, g)| g)
            .collect();
    }
    let restored = c.without_markers();
    let digest = circuit_digest(&restored);
    if digest != key.original_digest {
        return Err(ObfuscationError::KeyMismatch(format!(
            "restored circuit digest {digest} does not match key digest {}",
            key.original_digest
        )));
    }
    Ok(restored)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obfuscation {
    pub circuit: Circuit,
    pub key: ObfuscationKey,
    pub outcome: MetricOutcome,
}

/// Picks a position with `metric` and inserts the dummy SWAP there.
pub fn obfuscate(circuit: &Circuit, metric: MetricId) -> Result<Obfuscation, ObfuscationError> {
    let outcome = metrics::select(circuit, metric)?;
    let (obf, mut key) = insert_swap(circuit, &outcome.chosen.candidate)?;
    key.metric_used = Some(metric);
    Ok(Obfuscation { circuit: obf, key, outcome })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub original: CircuitStats,
    pub obfuscated: CircuitStats,
    /// `None` when the original value is zero and the other is not.
    pub depth_delta_pct: Option<f64>,
    pub gate_delta_pct: Option<f64>,
    pub per_kind_delta: BTreeMap<GateKind, i64>,
}

fn pct(before: usize, after: usize) -> Option<f64> {
    match (before, after) {
        (0, 0) => Some(0.0),
        (0, _) => None,
        (b, a) => Some(100.0 * (a as f64 - b as f64) / b as f64),
    }
}

pub fn overhead_report(original: &Circuit, obfuscated: &Circuit) -> Result<OverheadReport, SliceError> {
    let before = circuit_stats(original)?;
    let after = circuit_stats(obfuscated)?;
    let kinds: BTreeSet<GateKind> = before.per_kind.keys().chain(after.per_kind.keys()).copied().collect();
    let per_kind_delta = kinds
        .into_iter()
        .map(|k| {
            let b = before.per_kind.get(&k).copied().unwrap_or(0) as i64;
            let a = after.per_kind.get(&k).copied().unwrap_or(0) as i64;
            (k, a - b)
        })
        .collect();
    Ok(OverheadReport {
        depth_delta_pct: pct(before.depth, after.depth),
        gate_delta_pct: pct(before.gate_count, after.gate_count),
        per_kind_delta,
        original: before,
        obfuscated: after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qasm::{parse_qasm, serialize_qasm};

    fn cand(slice: usize, a: usize, b: usize) -> CandidatePosition {
        CandidatePosition { position_id: 1, slice_index: slice, qubit_a: QubitId(a), qubit_b: QubitId(b) }
    }

    fn asap_circuit() -> Circuit {
        parse_qasm("qreg q[4]; creg c[2]; x q[0]; cx q[0],q[1]; x q[2]; ccx q[0],q[1],q[3]; measure q[3] -> c[0];")
            .unwrap()
    }

    #[test]
    fn asap_insertion_preserves_depth_and_round_trips() {
        let c = asap_circuit();
        let slices = slicing::slice_circuit(&c).unwrap();
        for cand in slicing::enumerate_candidates(&slices) {
            let (obf, key) = insert_swap(&c, &cand).unwrap();
            assert_eq!(slicing::slice_circuit(&obf).unwrap().len(), slices.len());
            assert_eq!(slicing::slicing_mode(&obf), SlicingMode::Barrier);
            let back = restore(&obf, &key).unwrap();
            assert_eq!(serialize_qasm(&canonical_form(&back)), serialize_qasm(&canonical_form(&c)));
        }
    }

    #[test]
    fn barrier_circuit_reuses_barriers() {
        let c = parse_qasm("qreg q[3]; x q[0]; barrier q; x q[1]; barrier q; x q[2];").unwrap();
        let (obf, key) = insert_swap(&c, &cand(1, 0, 2)).unwrap();
        assert!(key.insertions[0].added_barriers.is_empty());
        assert_eq!(obf.gates.len(), c.gates.len() + 1);
        assert_eq!(restore(&obf, &key).unwrap(), c);

        let (obf, key) = insert_swap(&c, &cand(0, 1, 2)).unwrap();
        assert_eq!(key.insertions[0].added_barriers, vec![0]);
        assert_eq!(restore(&obf, &key).unwrap(), c);

        let (obf, key) = insert_swap(&c, &cand(2, 0, 1)).unwrap();
        assert_eq!(key.insertions[0].added_barriers, vec![2]);
        assert_eq!(restore(&obf, &key).unwrap(), c);
    }

    #[test]
    fn stale_candidate_rejected() {
        let c = asap_circuit();
        assert!(matches!(insert_swap(&c, &cand(0, 0, 1)), Err(ObfuscationError::OccupiedQubit { qubit: 0, .. })));
        assert!(matches!(insert_swap(&c, &cand(9, 1, 2)), Err(ObfuscationError::NoSuchSlice { .. })));
    }

    #[test]
    fn default_serialization_hides_marker() {
        let c = asap_circuit();
        let (obf, key) = insert_swap(&c, &cand(0, 1, 3)).unwrap();
        let text = serialize_qasm(&obf);
        assert!(text.contains("swap q[1],q[3];"));
        assert!(text.contains("barrier"));
        assert!(!text.contains("DUMMY"));
        assert!(!text.contains(&key.insertions[0].marker_id));
        assert!(!text.contains(&key.original_digest[..16]));
    }

    #[test]
    fn restore_after_text_round_trip() {
        let c = asap_circuit();
        let (obf, key) = insert_swap(&c, &cand(1, 2, 3)).unwrap();
        let reparsed = parse_qasm(&serialize_qasm(&obf)).unwrap();
        let key = ObfuscationKey::from_json(&key.to_json()).unwrap();
        assert_eq!(circuit_digest(&restore(&reparsed, &key).unwrap()), circuit_digest(&c));
    }

    #[test]
    fn wrong_pair_is_a_mismatch() {
        let c = asap_circuit();
        let (obf, mut key) = insert_swap(&c, &cand(0, 1, 3)).unwrap();
        key.insertions[0].qubit_b = 2;
        assert!(matches!(restore(&obf, &key), Err(ObfuscationError::KeyMismatch(_))));
    }

    #[test]
    fn deleted_swap_names_marker() {
        let c = asap_circuit();
        let (mut obf, key) = insert_swap(&c, &cand(0, 1, 3)).unwrap();
        obf.gates.retain(|g| g.kind != GateKind::Swap);
        match restore(&obf, &key) {
            Err(ObfuscationError::KeyMismatch(msg)) => assert!(msg.contains(&key.insertions[0].marker_id), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tampered_circuit_fails_digest() {
        let c = asap_circuit();
        let (mut obf, key) = insert_swap(&c, &cand(0, 1, 3)).unwrap();
        obf.gates.push(Gate::x(2));
        assert!(matches!(restore(&obf, &key), Err(ObfuscationError::KeyMismatch(m)) if m.contains("digest")));
    }

    #[test]
    fn overhead_of_identical_and_one_swap() {
        let c = asap_circuit();
        let r = overhead_report(&c, &c).unwrap();
        assert_eq!(r.depth_delta_pct, Some(0.0));
        assert_eq!(r.gate_delta_pct, Some(0.0));
        assert!(r.per_kind_delta.values().all(|&d| d == 0));

        let mut wide = Circuit::new(4, 0);
        for i in 0..40 {
            wide.push(Gate::x(i % 2)).unwrap();
        }
        let (obf, _) = insert_swap(&wide, &cand(0, 2, 3)).unwrap();
        let r = overhead_report(&wide, &obf).unwrap();
        assert_eq!(r.gate_delta_pct, Some(2.5));
        assert_eq!(r.depth_delta_pct, Some(0.0));
        assert_eq!(r.per_kind_delta[&GateKind::Swap], 1);
    }

    #[test]
    fn obfuscate_records_metric() {
        let c = asap_circuit().with_constant(2, true).unwrap();
        let o = obfuscate(&c, MetricId::new(5).unwrap()).unwrap();
        assert_eq!(o.key.metric_used, Some(MetricId::new(5).unwrap()));
        assert_eq!(o.key.insertions[0].slice_index, o.outcome.chosen.candidate.slice_index);
        assert!(restore(&o.circuit, &o.key).is_ok());
    }
}
