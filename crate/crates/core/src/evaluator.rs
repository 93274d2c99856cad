//! Runs a finished board on the cluster state and grades it.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::board::{Board, BoardDescription, CellState, RuleViolation};
use crate::canonical::{extract_subsystem, groups_equal, missing_generator, CanonicalError, ComparisonMode};
use crate::circuit::Circuit;
use crate::cluster::build_cluster_tableau;
use crate::tableau::{Basis, OutcomePolicy};

/// Exact non-negative rational, written `"a/b"` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(pub Ratio<u64>);

impl Fraction {
    pub fn new(numer: u64, denom: u64) -> Self {
        Fraction(Ratio::new(numer, denom))
    }

    pub fn zero() -> Self {
        Fraction::new(0, 1)
    }

    pub fn one() -> Self {
        Fraction::new(1, 1)
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Fraction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected a fraction \"a/b\", got {s:?}");
        let (a, b) = s.split_once('/').unwrap_or((s, "1"));
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        Ok(Fraction::new(a, b))
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    EntangledOutputs,
    Mismatch,
    OutputCount,
    RuleViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rule: Option<u8>,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Self { kind, rule: None, message: message.into() }
    }

    fn violation(v: &RuleViolation) -> Self {
        Self { kind: DiagnosticKind::RuleViolation, rule: Some(v.rule()), message: v.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub correct: bool,
    pub mode: ComparisonMode,
    pub covered_fraction: Fraction,
    pub score: Fraction,
    pub diagnostics: Vec<Diagnostic>,
    /// A canonical generator of the board's output state missing from the
    /// circuit's, when the two differ.
    pub witness: Option<String>,
}

impl VerificationResult {
    pub fn has(&self, kind: DiagnosticKind) -> bool {
        self.diagnostics.iter().any(|d| d.kind == kind)
    }
}

/// Single-qubit measurements the board prescribes, in row-major qubit
/// order. Output cells and open Out cells are left alone.
pub fn board_to_measurements(board: &Board) -> Vec<(usize, Basis)> {
    let grid = board.grid();
    grid.cells()
        .filter_map(|p| {
            let q = grid.qubit(p).unwrap();
            match board.cell_state(p) {
                CellState::Green => Some((q, Basis::Z)),
                CellState::Measured(b) => Some((q, b)),
                CellState::Open | CellState::Output(_) => None,
            }
        })
        .collect()
}

/// Covered fraction (cells not measured in Z over all cells) and the score
/// a correct board would get.
pub fn score_board(board: &Board) -> (Fraction, Fraction) {
    let total = board.grid().num_cells() as u64;
    let covered = Ratio::new(board.non_green_cells() as u64, total);
    (Fraction(covered), Fraction(Ratio::from_integer(1) - covered))
}

/// Grades `board` against `circuit`. A wrong board is a result with
/// `correct == false`, not an error.
pub fn evaluate(
    board: &Board,
    circuit: &Circuit,
    mode: ComparisonMode,
    policy: &mut OutcomePolicy,
) -> VerificationResult {
    let (covered_fraction, score) = score_board(board);
    let mut result = VerificationResult {
        correct: false,
        mode,
        covered_fraction,
        score: Fraction::zero(),
        diagnostics: Vec::new(),
        witness: None,
    };
    if let Err(e) = board.check_invariants() {
        result.diagnostics.push(Diagnostic::new(DiagnosticKind::RuleViolation, e));
        return result;
    }
    let outputs = board.ordered_outputs();
    if outputs.len() != circuit.num_qubits() {
        result.diagnostics.push(Diagnostic::new(
            DiagnosticKind::OutputCount,
            format!("{} output(s) marked, circuit has {} qubit(s)", outputs.len(), circuit.num_qubits()),
        ));
        return result;
    }
    let grid = board.grid();
    let mut state = build_cluster_tableau(&grid);
    for (q, basis) in board_to_measurements(board) {
        state.measure(q, basis, policy).expect("board cells are valid qubits");
    }
    let qubits: Vec<usize> = outputs.iter().map(|&p| grid.qubit(p).unwrap()).collect();
    let produced = match extract_subsystem(&state, &qubits) {
        Ok(t) => t,
        Err(CanonicalError::EntangledOutputs { needed, found }) => {
            result.diagnostics.push(Diagnostic::new(
                DiagnosticKind::EntangledOutputs,
                format!(
                    "outputs are entangled with unmeasured cells: only {found} of {needed} stabilizer generators live on the outputs"
                ),
            ));
            return result;
        }
        Err(e) => unreachable!("extraction of a valid board failed: {e}"),
    };
    let expected = circuit.simulate();
    result.correct = groups_equal(&produced, &expected, mode).expect("sizes match");
    if result.correct {
        result.score = score;
    } else {
        let witness = missing_generator(&produced, &expected, mode).expect("sizes match");
        let w = witness.map(|w| w.to_string());
        result.diagnostics.push(Diagnostic::new(
            DiagnosticKind::Mismatch,
            match &w {
                Some(w) => format!("board output is stabilized by {w}, the circuit output is not"),
                None => "board output differs from the circuit output".into(),
            },
        ));
        result.witness = w;
    }
    result
}

/// Like [`evaluate`], for a board read from a file: rule violations become
/// diagnostics instead of errors.
pub fn evaluate_description(
    desc: &BoardDescription,
    circuit: &Circuit,
    mode: ComparisonMode,
    policy: &mut OutcomePolicy,
) -> VerificationResult {
    match desc.build() {
        Ok(board) => evaluate(&board, circuit, mode, policy),
        Err(v) => VerificationResult {
            correct: false,
            mode,
            covered_fraction: Fraction::zero(),
            score: Fraction::zero(),
            diagnostics: vec![Diagnostic::violation(&v)],
            witness: None,
        },
    }
}
