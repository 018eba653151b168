//! Statevector simulation of the supported gate set.
//!
//! Qubit `k` is bit `k` of the amplitude index. Bitstrings (inputs and
//! outcomes) are written most-significant first: the first character of an
//! input is the highest qubit, the first character of an outcome is the
//! highest measured classical bit.
//!
//! A MEASURE whose qubit is never touched again is deferred to the end and
//! marginalised; one followed by further gates on its qubit collapses the
//! state, splitting the run into weighted branches.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, QubitId};
use crate::distribution::{tvd, Distribution};
use crate::error::SimError;

pub const MAX_QUBITS: usize = 20;

/// Outcomes below this probability are dropped from exact distributions.
const PROB_EPS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl StateVector {
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn swap_pairs(&mut self, mask_set: usize, mask_clear: usize, flip: usize) {
        for i in 0..self.amps.len() {
            if i & mask_set == mask_set && i & mask_clear == 0 {
                self.amps.swap(i, i ^ flip);
            }
        }
    }

    /// Applies a unitary gate; measurements and barriers are ignored.
    pub fn apply(&mut self, gate: &Gate) {
        let bit = |q: QubitId| 1usize << q.0;
        let q = &gate.qubits;
        match gate.kind {
            GateKind::X => self.swap_pairs(0, bit(q[0]), bit(q[0])),
            GateKind::Cx => self.swap_pairs(bit(q[0]), bit(q[1]), bit(q[1])),
            GateKind::Ccx => self.swap_pairs(bit(q[0]) | bit(q[1]), bit(q[2]), bit(q[2])),
            GateKind::Swap => self.swap_pairs(bit(q[0]), bit(q[1]), bit(q[0]) | bit(q[1])),
            GateKind::H => {
                let m = bit(q[0]);
                let r = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = (a + b) * r;
                        self.amps[i | m] = (a - b) * r;
                    }
                }
            }
            GateKind::Measure | GateKind::Barrier => {}
        }
    }

    pub fn apply_pauli(&mut self, pauli: Pauli, q: QubitId) {
        let m = 1usize << q.0;
        match pauli {
            Pauli::X => self.swap_pairs(0, m, m),
            Pauli::Z => {
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            Pauli::Y => {
                let im = Complex64::new(0.0, 1.0);
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = -im * a1;
                        self.amps[i | m] = im * a0;
                    }
                }
            }
        }
    }

    /// Projects qubit `q` onto `value`; returns the probability of that
    /// outcome and renormalises when it is nonzero.
    fn collapse(&mut self, q: QubitId, value: bool) -> f64 {
        let m = 1usize << q.0;
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & m != 0) == value)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if p > 0.0 {
            let s = 1.0 / p.sqrt();
            for (i, a) in self.amps.iter_mut().enumerate() {
                if (i & m != 0) == value {
                    *a *= s;
                } else {
                    *a = Complex64::new(0.0, 0.0);
                }
            }
        }
        p
    }
}

/// Parses an MSB-first input bitstring and applies declared constants.
pub fn input_index(circuit: &Circuit, input_bits: &str) -> Result<usize, SimError> {
    let n = circuit.num_qubits;
    if input_bits.chars().count() != n {
        return Err(SimError::InputLength { expected: n, found: input_bits.chars().count() });
    }
    let mut index = 0usize;
    for (pos, ch) in input_bits.chars().enumerate() {
        let q = n - 1 - pos;
        match ch {
            '0' => {}
            '1' => index |= 1 << q,
            c => return Err(SimError::InputChar(c)),
        }
    }
    for (q, &v) in &circuit.constant_qubits {
        if v {
            index |= 1 << q.0;
        } else {
            index &= !(1 << q.0);
        }
    }
    Ok(index)
}

fn check_cap(circuit: &Circuit) -> Result<(), SimError> {
    if circuit.num_qubits > MAX_QUBITS {
        return Err(SimError::QubitCapExceeded { num_qubits: circuit.num_qubits, cap: MAX_QUBITS });
    }
    Ok(())
}

/// Final state of the unitary part of the circuit (measurements ignored).
pub fn final_state(circuit: &Circuit, input_bits: &str) -> Result<StateVector, SimError> {
    check_cap(circuit)?;
    let mut sv = StateVector::basis(circuit.num_qubits, input_index(circuit, input_bits)?);
    for g in &circuit.gates {
        sv.apply(g);
    }
    Ok(sv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Depolarizing probability after each single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each two- or three-qubit gate.
    pub p2: f64,
    pub seed: u64,
    pub trajectories: usize,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidNoise(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        if self.trajectories == 0 {
            return Err(SimError::InvalidNoise("trajectories must be at least 1".into()));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0
    }
}

#[derive(Clone, Copy)]
enum ClbitSource {
    Unset,
    Deferred(QubitId),
    Collapsed,
}

struct Branch {
    weight: f64,
    state: StateVector,
    clbits: Vec<bool>,
}

/// Core run: exact outcome probabilities, optionally with Pauli errors drawn
/// from `noise`.
fn run(
    circuit: &Circuit,
    input_bits: &str,
    mut noise: Option<(&mut ChaCha8Rng, f64, f64)>,
) -> Result<Distribution, SimError> {
    check_cap(circuit)?;
    let measured = circuit.measured_clbits();
    if measured.is_empty() {
        return Err(SimError::NoMeasurements);
    }
    let start = input_index(circuit, input_bits)?;
    let n = circuit.num_qubits;

    // last_use[q]: index of the last unitary gate acting on q.
    let mut last_use = vec![None; n];
    for (i, g) in circuit.gates.iter().enumerate() {
        if g.kind.is_unitary() {
            for q in &g.qubits {
                last_use[q.0] = Some(i);
            }
        }
    }

    let mut sources = vec![ClbitSource::Unset; circuit.num_clbits];
    let mut branches = vec![Branch { weight: 1.0, state: StateVector::basis(n, start), clbits: vec![false; circuit.num_clbits] }];
    for (i, g) in circuit.gates.iter().enumerate() {
        match g.kind {
            GateKind::Barrier => {}
            GateKind::Measure => {
                let q = g.qubits[0];
                let c = g.clbit.expect("measure has a classical target");
                if last_use[q.0].is_some_and(|last| last > i) {
                    sources[c] = ClbitSource::Collapsed;
                    let mut next = Vec::with_capacity(branches.len() * 2);
                    for b in branches {
                        let mut one = b.state.clone();
                        let mut zero = b.state;
                        let p1 = one.collapse(q, true);
                        let p0 = zero.collapse(q, false);
                        for (value, p, state) in [(false, p0, zero), (true, p1, one)] {
                            if p * b.weight > PROB_EPS {
                                let mut clbits = b.clbits.clone();
                                clbits[c] = value;
                                next.push(Branch { weight: b.weight * p, state, clbits });
                            }
                        }
                    }
                    branches = next;
                } else {
                    sources[c] = ClbitSource::Deferred(q);
                }
            }
            _ => {
                for b in &mut branches {
                    b.state.apply(g);
                }
                if let Some((rng, p1, p2)) = noise.as_mut() {
                    let p = if g.qubits.len() == 1 { *p1 } else { *p2 };
                    if rng.random::<f64>() < p {
                        let q = g.qubits[rng.random_range(0..g.qubits.len())];
                        let pauli = [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)];
                        for b in &mut branches {
                            b.state.apply_pauli(pauli, q);
                        }
                    }
                }
            }
        }
    }

    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for b in &branches {
        for (idx, amp) in b.state.amps.iter().enumerate() {
            let p = amp.norm_sqr() * b.weight;
            if p <= 0.0 {
                continue;
            }
            let key: String = measured
                .iter()
                .rev()
                .map(|&c| {
                    let bit = match sources[c] {
                        ClbitSource::Deferred(q) => idx >> q.0 & 1 == 1,
                        ClbitSource::Collapsed => b.clbits[c],
                        ClbitSource::Unset => false,
                    };
                    if bit { '1' } else { '0' }
                })
                .collect();
            *counts.entry(key).or_insert(0.0) += p;
        }
    }
    counts.retain(|_, p| *p > PROB_EPS);
    Ok(Distribution { shots: 1.0, counts })
}

/// Exact probability distribution over the measured classical bits.
pub fn simulate_exact(circuit: &Circuit, input_bits: &str) -> Result<Distribution, SimError> {
    run(circuit, input_bits, None)
}

/// Draws `shots` samples from the exact distribution with a seeded RNG.
pub fn simulate_shots(circuit: &Circuit, input_bits: &str, shots: u64, seed: u64) -> Result<Distribution, SimError> {
    let exact = simulate_exact(circuit, input_bits)?;
    Ok(sample(&exact, shots, seed))
}

/// Multinomial sampling via a chain of conditional binomials.
pub fn sample(exact: &Distribution, shots: u64, seed: u64) -> Distribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = exact.counts.values().sum();
    let mut remaining = shots;
    let mut mass = total;
    let mut counts = BTreeMap::new();
    let last = exact.counts.len().saturating_sub(1);
    for (i, (k, &w)) in exact.counts.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let drawn = if i == last || mass <= w {
            remaining
        } else {
            let p = (w / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, p).expect("p in [0, 1]").sample(&mut rng)
        };
        if drawn > 0 {
            counts.insert(k.clone(), drawn as f64);
        }
        remaining -= drawn;
        mass -= w;
    }
    Distribution { shots: shots as f64, counts }
}

/// Averages exact distributions over independent Pauli-error trajectories.
/// Trajectory `t` uses stream `t` of a ChaCha generator seeded with
/// `noise.seed`, so results do not depend on thread scheduling.
pub fn simulate_noisy(circuit: &Circuit, input_bits: &str, noise: &NoiseSpec) -> Result<Distribution, SimError> {
    noise.validate()?;
    if noise.is_noiseless() {
        return simulate_exact(circuit, input_bits);
    }
    let runs: Vec<Distribution> = (0..noise.trajectories)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            rng.set_stream(t as u64);
            run(circuit, input_bits, Some((&mut rng, noise.p1, noise.p2)))
        })
        .collect::<Result<_, _>>()?;
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for d in &runs {
        for (k, v) in &d.counts {
            *counts.entry(k.clone()).or_insert(0.0) += v;
        }
    }
    let t = noise.trajectories as f64;
    counts.values_mut().for_each(|v| *v /= t);
    Ok(Distribution { shots: 1.0, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    #[default]
    Mean,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum InputPolicy {
    /// Every basis assignment of the non-constant qubits.
    AllBasis { aggregate: Aggregate },
    /// One MSB-first input bitstring.
    Fixed { bits: String },
    /// Hadamard on every non-constant qubit before the circuit.
    UniformSuperposition,
}

impl Default for InputPolicy {
    fn default() -> Self {
        InputPolicy::AllBasis { aggregate: Aggregate::Mean }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SimMode {
    #[default]
    Exact,
    Shots { shots: u64, seed: u64 },
    Noisy(NoiseSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SimConfig {
    pub mode: SimMode,
    pub inputs: InputPolicy,
}

impl SimConfig {
    pub fn exact() -> Self {
        SimConfig::default()
    }
}

/// Every basis input over the non-constant qubits, MSB-first, in counting order.
pub fn basis_inputs(circuit: &Circuit) -> Vec<String> {
    let free: Vec<usize> = (0..circuit.num_qubits)
        .filter(|q| !circuit.constant_qubits.contains_key(&QubitId(*q)))
        .collect();
    (0..1usize << free.len())
        .map(|k| {
            let mut bits = vec!['0'; circuit.num_qubits];
            for (j, &q) in free.iter().enumerate() {
                if k >> j & 1 == 1 {
                    bits[circuit.num_qubits - 1 - q] = '1';
                }
            }
            for (q, &v) in &circuit.constant_qubits {
                bits[circuit.num_qubits - 1 - q.0] = if v { '1' } else { '0' };
            }
            bits.into_iter().collect()
        })
        .collect()
}

fn with_superposition_prep(circuit: &Circuit) -> Circuit {
    let mut c = circuit.clone();
    let prep: Vec<Gate> = (0..c.num_qubits)
        .filter(|q| !c.constant_qubits.contains_key(&QubitId(*q)))
        .map(Gate::h)
        .collect();
    c.gates.splice(0..0, prep);
    c
}

/// Runs one input under `mode`. `salt` is added to the seed so different
/// inputs of one batch draw independent streams.
pub fn simulate_mode(circuit: &Circuit, input: &str, mode: &SimMode, salt: u64) -> Result<Distribution, SimError> {
    match mode {
        SimMode::Exact => simulate_exact(circuit, input),
        SimMode::Shots { shots, seed } => simulate_shots(circuit, input, *shots, seed.wrapping_add(salt)),
        SimMode::Noisy(spec) => {
            let spec = NoiseSpec { seed: spec.seed.wrapping_add(salt), ..*spec };
            simulate_noisy(circuit, input, &spec)
        }
    }
}

fn check_layout(a: &Circuit, b: &Circuit) -> Result<(), SimError> {
    if a.num_qubits != b.num_qubits {
        return Err(SimError::LayoutMismatch(format!("{} vs {} qubits", a.num_qubits, b.num_qubits)));
    }
    if a.measured_clbits() != b.measured_clbits() {
        return Err(SimError::LayoutMismatch("measured classical bits differ".into()));
    }
    if a.constant_qubits != b.constant_qubits {
        return Err(SimError::LayoutMismatch("constant qubit declarations differ".into()));
    }
    Ok(())
}

/// Distance between the outputs of two circuits with the same layout.
pub fn circuit_tvd(original: &Circuit, obfuscated: &Circuit, config: &SimConfig) -> Result<f64, SimError> {
    check_layout(original, obfuscated)?;
    match &config.inputs {
        InputPolicy::Fixed { bits } => {
            let a = simulate_mode(original, bits, &config.mode, 0)?;
            let b = simulate_mode(obfuscated, bits, &config.mode, 0)?;
            Ok(tvd(&a, &b)?)
        }
        InputPolicy::UniformSuperposition => {
            let zeros = "0".repeat(original.num_qubits);
            let a = simulate_mode(&with_superposition_prep(original), &zeros, &config.mode, 0)?;
            let b = simulate_mode(&with_superposition_prep(obfuscated), &zeros, &config.mode, 0)?;
            Ok(tvd(&a, &b)?)
        }
        InputPolicy::AllBasis { aggregate } => {
            let inputs = basis_inputs(original);
            let mut values = Vec::with_capacity(inputs.len());
            for (i, input) in inputs.iter().enumerate() {
                let a = simulate_mode(original, input, &config.mode, i as u64)?;
                let b = simulate_mode(obfuscated, input, &config.mode, i as u64)?;
                values.push(tvd(&a, &b)?);
            }
            Ok(match aggregate {
                Aggregate::Mean => values.iter().sum::<f64>() / values.len() as f64,
                Aggregate::Max => values.iter().copied().fold(0.0, f64::max),
            })
        }
    }
}
