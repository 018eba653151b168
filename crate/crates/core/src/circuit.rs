//! Circuit intermediate representation.
//!
//! Registers are flattened: every quantum register contributes a contiguous
//! run of [`QubitId`]s in declaration order, and likewise for classical bits.
//! The register table is kept only so that serialization can reproduce the
//! original names.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CircuitError;
use crate::slicing;

/// Flat qubit index across all quantum registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub usize);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    X,
    H,
    Cx,
    Ccx,
    Swap,
    Measure,
    Barrier,
}

impl GateKind {
    /// Required number of qubit operands, `None` for barriers (variadic).
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::X | GateKind::H | GateKind::Measure => Some(1),
            GateKind::Cx | GateKind::Swap => Some(2),
            GateKind::Ccx => Some(3),
            GateKind::Barrier => None,
        }
    }

    /// Number of leading operands that act as controls.
    pub fn num_controls(self) -> usize {
        match self {
            GateKind::Cx => 1,
            GateKind::Ccx => 2,
            _ => 0,
        }
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Barrier)
    }

    pub fn qasm_name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Cx => "cx",
            GateKind::Ccx => "ccx",
            GateKind::Swap => "swap",
            GateKind::Measure => "measure",
            GateKind::Barrier => "barrier",
        }
    }

    pub fn from_qasm_name(name: &str) -> Option<Self> {
        Some(match name {
            "x" => GateKind::X,
            "h" => GateKind::H,
            "cx" | "CX" => GateKind::Cx,
            "ccx" => GateKind::Ccx,
            "swap" => GateKind::Swap,
            "measure" => GateKind::Measure,
            "barrier" => GateKind::Barrier,
            _ => return None,
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.qasm_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<QubitId>,
    /// Destination bit, set only for `Measure`.
    pub clbit: Option<usize>,
    /// Set only on inserted dummy SWAPs.
    pub dummy_marker: Option<String>,
}

impl Gate {
    fn new(kind: GateKind, qubits: &[usize]) -> Self {
        Gate {
            kind,
            qubits: qubits.iter().copied().map(QubitId).collect(),
            clbit: None,
            dummy_marker: None,
        }
    }

    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, &[q])
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, &[q])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cx, &[control, target])
    }

    pub fn ccx(c0: usize, c1: usize, target: usize) -> Self {
        Gate::new(GateKind::Ccx, &[c0, c1, target])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Swap, &[a, b])
    }

    pub fn measure(q: usize, clbit: usize) -> Self {
        Gate {
            clbit: Some(clbit),
            ..Gate::new(GateKind::Measure, &[q])
        }
    }

    pub fn barrier(qubits: &[usize]) -> Self {
        Gate::new(GateKind::Barrier, qubits)
    }

    pub fn controls(&self) -> &[QubitId] {
        &self.qubits[..self.kind.num_controls()]
    }

    /// Target of a CX/CCX.
    pub fn target(&self) -> Option<QubitId> {
        match self.kind {
            GateKind::Cx | GateKind::Ccx => self.qubits.last().copied(),
            _ => None,
        }
    }

    pub fn acts_on(&self, q: QubitId) -> bool {
        self.qubits.contains(&q)
    }

    /// A barrier spanning every qubit of a circuit with `num_qubits` qubits.
    pub fn is_full_barrier(&self, num_qubits: usize) -> bool {
        self.kind == GateKind::Barrier && {
            let mut seen = vec![false; num_qubits];
            for q in &self.qubits {
                if q.0 < num_qubits {
                    seen[q.0] = true;
                }
            }
            seen.iter().all(|&s| s)
        }
    }
}

/// A named register occupying `size` consecutive flat indices from `offset`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub offset: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub qregs: Vec<Register>,
    pub cregs: Vec<Register>,
    pub gates: Vec<Gate>,
    /// Declared initial values for constant (ancilla-like) qubits.
    pub constant_qubits: BTreeMap<QubitId, bool>,
}

impl Circuit {
    /// An empty circuit with a single `q` and (if `num_clbits > 0`) a single `c` register.
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        let qregs = if num_qubits > 0 {
            vec![Register { name: "q".into(), offset: 0, size: num_qubits }]
        } else {
            Vec::new()
        };
        let cregs = if num_clbits > 0 {
            vec![Register { name: "c".into(), offset: 0, size: num_clbits }]
        } else {
            Vec::new()
        };
        Circuit {
            num_qubits,
            num_clbits,
            qregs,
            cregs,
            gates: Vec::new(),
            constant_qubits: BTreeMap::new(),
        }
    }

    /// Builder-style push; validates the gate against this circuit.
    pub fn with_gate(mut self, gate: Gate) -> Result<Self, CircuitError> {
        self.push(gate)?;
        Ok(self)
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        self.check_gate(&gate)?;
        if gate.kind == GateKind::Measure {
            let dup = self.gates.iter().any(|g| {
                g.kind == GateKind::Measure && g.qubits == gate.qubits && g.clbit == gate.clbit
            });
            if dup {
                return Err(CircuitError::DuplicateMeasure {
                    qubit: gate.qubits[0].0,
                    clbit: gate.clbit.unwrap_or_default(),
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn set_constant(&mut self, q: usize, value: bool) -> Result<(), CircuitError> {
        if q >= self.num_qubits {
            return Err(CircuitError::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
        }
        self.constant_qubits.insert(QubitId(q), value);
        Ok(())
    }

    pub fn with_constant(mut self, q: usize, value: bool) -> Result<Self, CircuitError> {
        self.set_constant(q, value)?;
        Ok(self)
    }

    pub fn full_barrier(&self) -> Gate {
        Gate::barrier(&(0..self.num_qubits).collect::<Vec<_>>())
    }

    fn check_gate(&self, gate: &Gate) -> Result<(), CircuitError> {
        if let Some(n) = gate.kind.arity() {
            if gate.qubits.len() != n {
                return Err(CircuitError::Arity {
                    kind: gate.kind,
                    expected: n,
                    found: gate.qubits.len(),
                });
            }
        } else if gate.qubits.is_empty() {
            return Err(CircuitError::Arity { kind: gate.kind, expected: 1, found: 0 });
        }
        for (i, q) in gate.qubits.iter().enumerate() {
            if q.0 >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q.0, num_qubits: self.num_qubits });
            }
            if gate.qubits[..i].contains(q) {
                return Err(CircuitError::RepeatedQubit { kind: gate.kind, qubit: q.0 });
            }
        }
        match (gate.kind, gate.clbit) {
            (GateKind::Measure, Some(c)) if c >= self.num_clbits => {
                return Err(CircuitError::ClbitOutOfRange { clbit: c, num_clbits: self.num_clbits })
            }
            (GateKind::Measure, None) => return Err(CircuitError::MissingClbit),
            (GateKind::Measure, Some(_)) => {}
            (_, Some(_)) => return Err(CircuitError::UnexpectedClbit { kind: gate.kind }),
            (_, None) => {}
        }
        if gate.dummy_marker.is_some() && gate.kind != GateKind::Swap {
            return Err(CircuitError::MarkerOnNonSwap { kind: gate.kind });
        }
        Ok(())
    }

    /// Checks every structural invariant of the circuit.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let mut probe = Circuit { gates: Vec::new(), ..self.clone() };
        for g in &self.gates {
            probe.push(g.clone())?;
        }
        for q in self.constant_qubits.keys() {
            if q.0 >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q.0, num_qubits: self.num_qubits });
            }
        }
        Ok(())
    }

    /// Qubits that are the source of at least one MEASURE.
    pub fn measured_qubits(&self) -> Vec<QubitId> {
        let mut out: Vec<QubitId> = self
            .gates
            .iter()
            .filter(|g| g.kind == GateKind::Measure)
            .map(|g| g.qubits[0])
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Classical bits written by at least one MEASURE, ascending.
    pub fn measured_clbits(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.gates.iter().filter_map(|g| g.clbit).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn has_full_barrier(&self) -> bool {
        self.gates.iter().any(|g| g.is_full_barrier(self.num_qubits))
    }

    /// Copy with every dummy marker cleared.
    pub fn without_markers(&self) -> Circuit {
        let mut c = self.clone();
        for g in &mut c.gates {
            g.dummy_marker = None;
        }
        c
    }

    /// Structural equality ignoring dummy markers.
    pub fn same_structure(&self, other: &Circuit) -> bool {
        self.without_markers() == other.without_markers()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    /// X/H/CX/CCX/SWAP gates; barriers and measurements excluded.
    pub gate_count: usize,
    /// Number of slices.
    pub depth: usize,
    pub per_kind: BTreeMap<GateKind, usize>,
}

pub fn circuit_stats(circuit: &Circuit) -> Result<CircuitStats, crate::error::SliceError> {
    let depth = slicing::slice_circuit(circuit)?.len();
    let mut per_kind = BTreeMap::new();
    for g in &circuit.gates {
        *per_kind.entry(g.kind).or_insert(0) += 1;
    }
    let gate_count = circuit.gates.iter().filter(|g| g.kind.is_unitary()).count();
    Ok(CircuitStats { gate_count, depth, per_kind })
}
