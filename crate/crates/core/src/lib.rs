//! Measurement-based Clifford circuit puzzles on square-grid cluster states.
//!
//! A circuit is simulated with a stabilizer tableau; a board of colored
//! polyomino blocks is run as single-qubit Pauli measurements on a cluster
//! state, and the state left on the marked output cells is compared with
//! the circuit's output.

pub mod bits;
pub mod board;
pub mod canonical;
pub mod circuit;
pub mod cluster;
pub mod engine;
pub mod evaluator;
pub mod patterns;
pub mod tableau;

pub use board::{Board, BoardDescription, BoardFile, CellState, PlacementSpec, RuleViolation};
pub use canonical::{extract_subsystem, groups_equal, missing_generator, reduce, CanonicalError, ComparisonMode};
pub use circuit::{parse_circuit, simulate_circuit, Circuit, CircuitFile, ParseError};
pub use cluster::{build_cluster_tableau, Grid, Pos};
pub use engine::{builtin_level, builtin_levels, Engine, Level, Move, Reply, Request, Session, Status};
pub use evaluator::{
    board_to_measurements, evaluate, evaluate_description, score_board, Diagnostic, DiagnosticKind, Fraction,
    VerificationResult,
};
pub use patterns::{minimal_pattern, neighborhood_equivalent, BlockKind, PatternError, Polyomino, WireKind};
pub use tableau::{Anticommuting, Basis, Gate, GateKind, Membership, OutcomePolicy, PauliRow, Tableau, TableauError};
