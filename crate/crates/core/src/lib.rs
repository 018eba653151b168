//! Obfuscation of gate-level quantum circuits with dummy SWAP gates.
//!
//! A circuit is split into parallel slices; every pair of qubits idle in a
//! slice is a place where a SWAP can go without growing the depth. Each
//! position is described by a handful of structural features, and six
//! pruning-and-scoring metrics pick one position without simulating. The
//! obfuscator inserts the SWAP between barriers and hands back a key that
//! restores the original after third-party compilation.
//!
//! The simulator and sweep modules measure how much a dummy corrupts the
//! output (total variation distance) so the metrics can be judged against
//! an exhaustive search.

pub mod circuit;
pub mod distribution;
pub mod error;
pub mod features;
pub mod fixtures;
pub mod metrics;
pub mod obfuscator;
pub mod qasm;
pub mod simulator;
pub mod slicing;
pub mod sweep;

pub use circuit::{circuit_stats, Circuit, CircuitStats, Gate, GateKind, QubitId};
pub use distribution::{tvd, Distribution};
pub use error::{Error, Result};
pub use features::{FeatureVector, ScoredCandidate};
pub use metrics::{select, MetricId, MetricOutcome};
pub use obfuscator::{insert_swap, obfuscate, overhead_report, restore, ObfuscationKey};
pub use qasm::{parse_qasm, serialize_qasm};
pub use simulator::{circuit_tvd, simulate_exact, simulate_noisy, simulate_shots, NoiseSpec, SimConfig};
pub use slicing::{enumerate_candidates, slice_circuit, CandidatePosition, Slice};
pub use sweep::{compare_metrics, run_sweep, SweepReport};
