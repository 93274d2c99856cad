//! Clifford circuits: file format, validation and simulation.
//!
//! Circuit files are JSON objects:
//!
//! ```json
//! {"n": 2, "gates": [{"g": "H", "q": [1]}, {"g": "CNOT", "q": [1, 2]}]}
//! ```
//!
//! Qubits are 1-based in the file and 0-based in [`Circuit`]. `CNOT` takes
//! `[control, target]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tableau::{Gate, GateKind, Tableau, TableauError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{location}: {message}")]
    Field { location: String, message: String },
}

impl ParseError {
    pub(crate) fn from_json(e: &serde_json::Error) -> Self {
        ParseError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
    }

    fn field(location: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError::Field { location: location.into(), message: message.into() }
    }
}

/// Serialized form of a circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub n: i64,
    #[serde(default)]
    pub gates: Vec<GateEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateEntry {
    pub g: String,
    pub q: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self, TableauError> {
        if n == 0 {
            return Err(TableauError::InvalidSize);
        }
        for gate in &gates {
            let qs = gate.qubits();
            if let Some(&q) = qs.iter().find(|&&q| q >= n) {
                return Err(TableauError::QubitOutOfRange { qubit: q, n });
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(TableauError::DuplicateTargets(qs[0]));
            }
        }
        Ok(Self { n, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn to_file(&self) -> CircuitFile {
        CircuitFile {
            n: self.n as i64,
            gates: self
                .gates
                .iter()
                .map(|g| GateEntry {
                    g: g.kind().name().to_string(),
                    q: g.qubits().into_iter().map(|q| q as i64 + 1).collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &CircuitFile) -> Result<Self, ParseError> {
        if file.n < 1 {
            return Err(ParseError::field("n", format!("qubit count must be at least 1, got {}", file.n)));
        }
        let n = file.n as usize;
        let mut gates = Vec::with_capacity(file.gates.len());
        for (i, entry) in file.gates.iter().enumerate() {
            let kind: GateKind = entry
                .g
                .parse()
                .map_err(|e: String| ParseError::field(format!("gates[{i}].g"), e))?;
            if entry.q.len() != kind.arity() {
                return Err(ParseError::field(
                    format!("gates[{i}].q"),
                    format!("{} takes {} qubit(s), got {}", kind.name(), kind.arity(), entry.q.len()),
                ));
            }
            let mut qubits = Vec::with_capacity(entry.q.len());
            for (j, &q) in entry.q.iter().enumerate() {
                if q < 1 || q > file.n {
                    return Err(ParseError::field(
                        format!("gates[{i}].q[{j}]"),
                        format!("qubit {q} outside 1..={}", file.n),
                    ));
                }
                qubits.push(q as usize - 1);
            }
            let gate = Gate::new(kind, &qubits).map_err(|e| ParseError::field(format!("gates[{i}].q"), e.to_string()))?;
            gates.push(gate);
        }
        Ok(Self { n, gates })
    }

    /// Output tableau of the circuit applied to |+⟩^n.
    pub fn simulate(&self) -> Tableau {
        let mut t = Tableau::new_plus(self.n).expect("circuit has at least one qubit");
        for gate in &self.gates {
            t.apply(gate).expect("circuit gates validated on construction");
        }
        t
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let file: CircuitFile = serde_json::from_str(text).map_err(|e| ParseError::from_json(&e))?;
    Circuit::from_file(&file)
}

pub fn simulate_circuit(c: &Circuit) -> Tableau {
    c.simulate()
}
