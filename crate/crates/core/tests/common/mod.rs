//! Brute-force reference implementations used to cross-check the library.
//! Nothing here calls into the slicing, feature, metric or simulator code.
#![allow(dead_code, clippy::needless_range_loop)]

/// (slice, qubit, controls seen so far as (gate, qubit)).
type Walk = (usize, usize, Vec<(usize, usize)>);

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_complex::Complex64;
use swapobf::{Circuit, Gate, GateKind};

/// Gate indices grouped by slice, computed from first principles.
pub fn oracle_slices(c: &Circuit) -> Vec<Vec<usize>> {
    let n = c.num_qubits;
    let full = |g: &Gate| g.kind == GateKind::Barrier && (0..n).all(|q| g.qubits.iter().any(|x| x.0 == q));
    if c.gates.iter().any(full) {
        let mut out = vec![Vec::new()];
        for (i, g) in c.gates.iter().enumerate() {
            if full(g) {
                out.push(Vec::new());
            } else if g.kind != GateKind::Barrier {
                out.last_mut().unwrap().push(i);
            }
        }
        out.retain(|s| !s.is_empty());
        return out;
    }
    // DAG over every instruction: a gate starts once all earlier instructions
    // sharing a wire have finished and lasts one step; a barrier lasts zero.
    let mut finish = vec![0usize; c.gates.len()];
    let mut level: Vec<Option<usize>> = vec![None; c.gates.len()];
    for i in 0..c.gates.len() {
        let g = &c.gates[i];
        let start = (0..i)
            .filter(|&j| c.gates[j].qubits.iter().any(|q| g.qubits.contains(q)))
            .map(|j| finish[j])
            .max()
            .unwrap_or(0);
        if g.kind == GateKind::Barrier {
            finish[i] = start;
        } else {
            finish[i] = start + 1;
            level[i] = Some(start);
        }
    }
    let count = level.iter().flatten().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); count];
    for (i, l) in level.iter().enumerate() {
        if let Some(l) = l {
            out[*l].push(i);
        }
    }
    out
}

/// `(slice, a, b)` for every pair of qubits no gate in the slice touches.
pub fn oracle_candidates(c: &Circuit) -> Vec<(usize, usize, usize)> {
    let slices = oracle_slices(c);
    let mut out = Vec::new();
    for (s, gates) in slices.iter().enumerate() {
        let busy = |q: usize| gates.iter().any(|&g| c.gates[g].qubits.iter().any(|x| x.0 == q));
        for a in 0..c.num_qubits {
            for b in a + 1..c.num_qubits {
                if !busy(a) && !busy(b) {
                    out.push((s, a, b));
                }
            }
        }
    }
    out
}

pub fn oracle_measured(c: &Circuit, a: usize, b: usize) -> usize {
    let measured: BTreeSet<usize> =
        c.gates.iter().filter(|g| g.kind == GateKind::Measure).map(|g| g.qubits[0].0).collect();
    usize::from(measured.contains(&a)) + usize::from(measured.contains(&b))
}

fn control_slots(kind: GateKind) -> usize {
    match kind {
        GateKind::Cx => 1,
        GateKind::Ccx => 2,
        _ => 0,
    }
}

pub fn oracle_control_usage(c: &Circuit, a: usize, b: usize) -> usize {
    let mut n = 0;
    for g in &c.gates {
        for q in &g.qubits[..control_slots(g.kind)] {
            if q.0 == a || q.0 == b {
                n += 1;
            }
        }
    }
    n
}

/// Enumerates every forward path explicitly and unions the controls met on
/// the ones that end in a measurement.
pub fn oracle_controls_in_paths(c: &Circuit, slice: usize, a: usize, b: usize) -> usize {
    let slices = oracle_slices(c);
    let at = |s: usize, q: usize| {
        slices[s].iter().copied().find(|&g| c.gates[g].qubits.iter().any(|x| x.0 == q))
    };
    let mut queue: VecDeque<Walk> = VecDeque::new();
    queue.push_back((slice + 1, a, Vec::new()));
    queue.push_back((slice + 1, b, Vec::new()));
    let mut found: BTreeSet<(usize, usize)> = BTreeSet::new();
    while let Some((s, q, seen)) = queue.pop_front() {
        if s >= slices.len() {
            continue;
        }
        let Some(gi) = at(s, q) else {
            queue.push_back((s + 1, q, seen));
            continue;
        };
        let g = &c.gates[gi];
        let k = control_slots(g.kind);
        let pos = g.qubits.iter().position(|x| x.0 == q).unwrap();
        if g.kind == GateKind::Measure {
            found.extend(seen);
        } else if pos < k {
            let mut next = seen.clone();
            next.push((gi, q));
            queue.push_back((s + 1, q, next.clone()));
            queue.push_back((s + 1, g.qubits[k].0, next));
        } else if g.kind == GateKind::Swap {
            queue.push_back((s + 1, g.qubits[1 - pos].0, seen));
        } else {
            queue.push_back((s + 1, q, seen));
        }
    }
    found.len()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCandidate {
    pub slice: usize,
    pub a: usize,
    pub b: usize,
    pub depth: usize,
    pub measured: usize,
    pub control_usage: usize,
    pub controls_in_paths: usize,
    pub constant: bool,
}

impl OracleCandidate {
    pub fn score(&self) -> f64 {
        (self.depth + self.control_usage) as f64
    }
}

pub fn oracle_features(c: &Circuit) -> Vec<OracleCandidate> {
    let depth = oracle_slices(c).len();
    oracle_candidates(c)
        .into_iter()
        .map(|(slice, a, b)| OracleCandidate {
            slice,
            a,
            b,
            depth: depth - slice - 1,
            measured: oracle_measured(c, a, b),
            control_usage: oracle_control_usage(c, a, b),
            controls_in_paths: oracle_controls_in_paths(c, slice, a, b),
            constant: c.constant_qubits.keys().any(|q| q.0 == a || q.0 == b),
        })
        .collect()
}

/// `(survivors, chosen)` for a metric id in 1..=6.
pub fn oracle_select(cands: &[OracleCandidate], metric: u8) -> (Vec<OracleCandidate>, OracleCandidate) {
    let filters: [&dyn Fn(&OracleCandidate) -> bool; 3] = [
        &|x| x.depth > 0 || x.measured > 0,
        &|x| x.constant,
        &|x| x.controls_in_paths > 0,
    ];
    let mut set = cands.to_vec();
    for f in filters.iter().take(usize::from(metric).div_ceil(2)) {
        let kept: Vec<_> = set.iter().copied().filter(|x| f(x)).collect();
        if !kept.is_empty() {
            set = kept;
        }
    }
    let mut ranked = set.clone();
    ranked.sort_by(|x, y| {
        let s = x.score().partial_cmp(&y.score()).unwrap();
        let s = if metric % 2 == 1 { s.reverse() } else { s };
        s.then((x.slice, x.a, x.b).cmp(&(y.slice, y.a, y.b)))
    });
    (set, ranked[0])
}

pub type Matrix = Vec<Vec<Complex64>>;

fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect())
        .collect()
}

/// Full `2^n × 2^n` matrix of one gate; qubit 0 is the low bit.
pub fn gate_matrix(n: usize, g: &Gate) -> Matrix {
    let dim = 1 << n;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    let bit = |i: usize, q: usize| i >> q & 1;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for col in 0..dim {
        let q: Vec<usize> = g.qubits.iter().map(|x| x.0).collect();
        match g.kind {
            GateKind::H => {
                let flipped = col ^ (1 << q[0]);
                let sign = if bit(col, q[0]) == 1 { -s } else { s };
                m[col][col] += Complex64::new(sign, 0.0);
                m[flipped][col] += Complex64::new(s, 0.0);
            }
            _ => {
                let row = match g.kind {
                    GateKind::X => col ^ (1 << q[0]),
                    GateKind::Cx if bit(col, q[0]) == 1 => col ^ (1 << q[1]),
                    GateKind::Ccx if bit(col, q[0]) == 1 && bit(col, q[1]) == 1 => col ^ (1 << q[2]),
                    GateKind::Swap if bit(col, q[0]) != bit(col, q[1]) => col ^ (1 << q[0]) ^ (1 << q[1]),
                    _ => col,
                };
                m[row][col] = Complex64::new(1.0, 0.0);
            }
        }
    }
    m
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// Product of every unitary gate's matrix, in program order.
pub fn circuit_unitary(c: &Circuit) -> Matrix {
    let mut u = identity(1 << c.num_qubits);
    for g in &c.gates {
        if g.kind.is_unitary() {
            u = matmul(&gate_matrix(c.num_qubits, g), &u);
        }
    }
    u
}

/// Basis index of an MSB-first input with constants forced.
pub fn oracle_input_index(c: &Circuit, bits: &str) -> usize {
    let n = c.num_qubits;
    let mut idx = 0;
    for q in 0..n {
        let forced = c.constant_qubits.iter().find(|(k, _)| k.0 == q).map(|(_, v)| *v);
        let on = forced.unwrap_or(bits.as_bytes()[n - 1 - q] == b'1');
        if on {
            idx |= 1 << q;
        }
    }
    idx
}

pub fn oracle_inputs(c: &Circuit) -> Vec<String> {
    let n = c.num_qubits;
    (0..1usize << n)
        .map(|i| (0..n).rev().map(|q| if i >> q & 1 == 1 { '1' } else { '0' }).collect::<String>())
        .filter(|s| {
            c.constant_qubits
                .iter()
                .all(|(q, v)| (s.as_bytes()[n - 1 - q.0] == b'1') == *v)
        })
        .collect()
}

/// Marginal over the measured classical bits of a circuit whose measurements
/// are all terminal, computed from the dense unitary.
pub fn oracle_distribution(c: &Circuit, u: &Matrix, bits: &str) -> BTreeMap<String, f64> {
    let col = oracle_input_index(c, bits);
    let mut clbit_to_qubit: BTreeMap<usize, usize> = BTreeMap::new();
    for g in &c.gates {
        if g.kind == GateKind::Measure {
            clbit_to_qubit.insert(g.clbit.unwrap(), g.qubits[0].0);
        }
    }
    let mut out = BTreeMap::new();
    for (row, r) in u.iter().enumerate() {
        let p = r[col].norm_sqr();
        if p < 1e-15 {
            continue;
        }
        let key: String =
            clbit_to_qubit.values().rev().map(|&q| if row >> q & 1 == 1 { '1' } else { '0' }).collect();
        *out.entry(key).or_insert(0.0) += p;
    }
    out
}

pub fn abs_diff_sum(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    keys.iter().map(|k| (a.get(*k).unwrap_or(&0.0) - b.get(*k).unwrap_or(&0.0)).abs()).sum()
}

/// Rebuilds the circuit as a flat gate list with a SWAP between slice `s`
/// and slice `s + 1`.
pub fn oracle_with_swap(c: &Circuit, s: usize, a: usize, b: usize) -> Circuit {
    let slices = oracle_slices(c);
    let mut out = Circuit::new(c.num_qubits, c.num_clbits);
    out.constant_qubits = c.constant_qubits.clone();
    for (i, gates) in slices.iter().enumerate() {
        for &g in gates {
            out.push(c.gates[g].clone()).unwrap();
        }
        if i == s {
            out.push(Gate::swap(a, b)).unwrap();
        }
    }
    out
}

/// Mean exact distance over every basis input of the non-constant qubits.
pub fn oracle_circuit_tvd(orig: &Circuit, obf: &Circuit) -> f64 {
    let (uo, uf) = (circuit_unitary(orig), circuit_unitary(obf));
    let inputs = oracle_inputs(orig);
    let total: f64 = inputs
        .iter()
        .map(|i| abs_diff_sum(&oracle_distribution(orig, &uo, i), &oracle_distribution(obf, &uf, i)))
        .sum();
    total / inputs.len() as f64
}

/// Density-matrix evolution with the depolarizing-Pauli channel after each
/// gate; returns probabilities over all qubits as MSB-first strings.
pub fn density_matrix_probs(c: &Circuit, bits: &str, p1: f64, p2: f64) -> BTreeMap<String, f64> {
    let n = c.num_qubits;
    let dim = 1 << n;
    let zero = Complex64::new(0.0, 0.0);
    let mut rho = vec![vec![zero; dim]; dim];
    let s = oracle_input_index(c, bits);
    rho[s][s] = Complex64::new(1.0, 0.0);
    let dagger = |m: &Matrix| -> Matrix { (0..dim).map(|i| (0..dim).map(|j| m[j][i].conj()).collect()).collect() };
    let pauli = |kind: u8, q: usize| -> Matrix {
        let mut m = vec![vec![zero; dim]; dim];
        for col in 0..dim {
            let b = col >> q & 1;
            let (row, v) = match kind {
                0 => (col ^ (1 << q), Complex64::new(1.0, 0.0)),
                1 => (col ^ (1 << q), if b == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) }),
                _ => (col, if b == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) }),
            };
            m[row][col] = v;
        }
        m
    };
    for g in c.gates.iter().filter(|g| g.kind.is_unitary()) {
        let u = gate_matrix(n, g);
        rho = matmul(&matmul(&u, &rho), &dagger(&u));
        let p = if g.qubits.len() == 1 { p1 } else { p2 };
        if p > 0.0 {
            let w = p / (3 * g.qubits.len()) as f64;
            let mut next: Matrix = rho.iter().map(|r| r.iter().map(|x| x * (1.0 - p)).collect()).collect();
            for q in &g.qubits {
                for k in 0..3 {
                    let pm = pauli(k, q.0);
                    let term = matmul(&matmul(&pm, &rho), &dagger(&pm));
                    for i in 0..dim {
                        for j in 0..dim {
                            next[i][j] += term[i][j] * w;
                        }
                    }
                }
            }
            rho = next;
        }
    }
    (0..dim)
        .filter(|&i| rho[i][i].re > 1e-15)
        .map(|i| ((0..n).rev().map(|q| if i >> q & 1 == 1 { '1' } else { '0' }).collect(), rho[i][i].re))
        .collect()
}

/// The two distributions printed for the counter example, 100000 shots each.
pub const COUNTER_ORIGINAL: [(&str, f64); 8] = [
    ("00000", 10212.0),
    ("10000", 7889.0),
    ("10100", 5084.0),
    ("11000", 10057.0),
    ("11100", 5227.0),
    ("00100", 7186.0),
    ("01000", 46956.0),
    ("01100", 7389.0),
];
pub const COUNTER_OBFUSCATED: [(&str, f64); 8] = [
    ("00000", 14672.0),
    ("10000", 3969.0),
    ("10100", 6662.0),
    ("11000", 2319.0),
    ("11100", 1646.0),
    ("00100", 53046.0),
    ("01000", 6458.0),
    ("01100", 11228.0),
];
/// Σ|Δcount| over the pair above, summed by hand: 111474.
pub const COUNTER_TVD: f64 = 1.11474;
