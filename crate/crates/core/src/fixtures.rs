//! Benchmark circuits shipped with the crate.

use crate::circuit::Circuit;
use crate::error::QasmError;
use crate::qasm::parse_qasm;

/// `(name, qasm text)` for every bundled benchmark.
pub const BUNDLED: &[(&str, &str)] = &[
    ("ref3", include_str!("../fixtures/ref3.qasm")),
    ("counter123", include_str!("../fixtures/counter123.qasm")),
    ("mod5", include_str!("../fixtures/mod5.qasm")),
    ("adder6", include_str!("../fixtures/adder6.qasm")),
    ("parity6", include_str!("../fixtures/parity6.qasm")),
];

pub fn load(name: &str) -> Option<Result<Circuit, QasmError>> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| parse_qasm(text))
}

pub fn all() -> Vec<(&'static str, Circuit)> {
    BUNDLED
        .iter()
        .map(|(n, text)| (*n, parse_qasm(text).expect("bundled fixture parses")))
        .collect()
}
