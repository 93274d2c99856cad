//! Levels, play sessions and the line-delimited JSON protocol.
//!
//! Every request is one JSON object:
//!
//! ```json
//! {"op": "place", "session": 1, "rev": 0, "payload": {"kind": "H", "anchor": [2, 2], "rot": 0}}
//! ```
//!
//! and gets exactly one reply with the same `op`, the session id, its
//! revision after the request and a `status` of `ok`, `rejected` (an illegal
//! move, with the rule it breaks) or `error` (a malformed request). Cells
//! are 1-based `[row, col]`; placement indices are 0-based.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::board::{Board, BoardFile, OutputFile, PlacementFile, PlacementSpec, RuleViolation};
use crate::canonical::ComparisonMode;
use crate::circuit::{Circuit, CircuitFile, GateEntry, ParseError};
use crate::cluster::{Grid, Pos};
use crate::evaluator::{evaluate, score_board, Fraction, VerificationResult};
use crate::patterns::{BlockKind, WireKind};
use crate::tableau::OutcomePolicy;

const LEVEL_SOURCES: [&str; 7] = [
    include_str!("../levels/L1.json"),
    include_str!("../levels/L2.json"),
    include_str!("../levels/L3.json"),
    include_str!("../levels/L4.json"),
    include_str!("../levels/L5.json"),
    include_str!("../levels/L6.json"),
    include_str!("../levels/L7.json"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(default)]
    pub placements: Vec<PlacementFile>,
    #[serde(default)]
    pub outputs: Vec<OutputFile>,
}

/// Level file: a circuit file plus grid, par and optionally a reference
/// solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelFile {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub n: i64,
    #[serde(default)]
    pub gates: Vec<GateEntry>,
    pub grid: crate::board::GridFile,
    pub par: Fraction,
    #[serde(default)]
    pub allowed: Option<Vec<String>>,
    #[serde(default)]
    pub solution: Option<SolutionFile>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub id: String,
    pub name: String,
    pub circuit: Circuit,
    pub grid: Grid,
    /// Covered fraction of the reference solution.
    pub par: Fraction,
    pub allowed: Vec<BlockKind>,
    pub solution: Option<BoardFile>,
}

impl Level {
    pub fn parse(text: &str) -> Result<Level, ParseError> {
        let file: LevelFile = serde_json::from_str(text).map_err(|e| ParseError::from_json(&e))?;
        Level::from_file(file)
    }

    pub fn from_file(file: LevelFile) -> Result<Level, ParseError> {
        let circuit = Circuit::from_file(&CircuitFile { n: file.n, gates: file.gates })?;
        let grid = file.grid.to_grid()?;
        let allowed = match file.allowed {
            None => BlockKind::ALL.to_vec(),
            Some(codes) => codes
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    c.parse().map_err(|e: crate::patterns::PatternError| ParseError::Field {
                        location: format!("allowed[{i}]"),
                        message: e.to_string(),
                    })
                })
                .collect::<Result<_, _>>()?,
        };
        let solution = file.solution.map(|s| BoardFile { grid: file.grid.clone(), placements: s.placements, outputs: s.outputs });
        Ok(Level { id: file.id, name: file.name, circuit, grid, par: file.par, allowed, solution })
    }

    /// Reference solution built on an empty board.
    pub fn solution_board(&self) -> Option<Result<Board, String>> {
        let file = self.solution.as_ref()?;
        Some(
            file.describe()
                .map_err(|e| e.to_string())
                .and_then(|d| d.build().map_err(|e| e.to_string())),
        )
    }

    fn summary(&self) -> Value {
        json!({
            "id": self.id,
            "name": self.name,
            "circuit": self.circuit.to_file(),
            "grid": {"w": self.grid.width, "h": self.grid.height},
            "par": self.par,
            "allowed": self.allowed.iter().map(|k| k.code()).collect::<Vec<_>>(),
        })
    }
}

/// The built-in level set, in play order.
pub fn builtin_levels() -> Vec<Level> {
    LEVEL_SOURCES.iter().map(|s| Level::parse(s).expect("built-in level files are valid")).collect()
}

pub fn builtin_level(id: &str) -> Option<Level> {
    builtin_levels().into_iter().find(|l| l.id == id)
}

/// One accepted player action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    Place(PlacementSpec),
    Rotate { placement: usize },
    InsertWire { placement: usize, site: Pos, kind: WireKind },
    ChooseOut { placement: usize, cells: Vec<Pos> },
    MarkOutputs(Vec<(Pos, usize)>),
}

impl Move {
    /// Board after the move, or the rule it breaks.
    pub fn apply(&self, board: &Board) -> Result<Board, RuleViolation> {
        let edit = |placement: usize, f: &dyn Fn(&mut PlacementSpec)| {
            let mut specs = board.specs();
            let spec = specs.get_mut(placement).ok_or(RuleViolation::NoSuchPlacement(placement))?;
            f(spec);
            Board::rebuild(board.grid(), &specs, board.outputs())
        };
        match self {
            Move::Place(spec) => board.place_spec(spec.clone()),
            Move::Rotate { placement } => edit(*placement, &|s| *s = s.rotated()),
            Move::InsertWire { placement, site, kind } => edit(*placement, &|s| s.wires.push((*site, *kind))),
            Move::ChooseOut { placement, cells } => edit(*placement, &|s| s.outs.extend(cells.iter().copied())),
            Move::MarkOutputs(marks) => board.mark_outputs(marks),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: u64,
    pub level: Level,
    pub board: Board,
    pub history: Vec<Move>,
    pub rev: u64,
}

impl Session {
    pub fn new(id: u64, level: Level) -> Self {
        let board = Board::new(level.grid);
        Session { id, level, board, history: Vec::new(), rev: 0 }
    }

    /// Applies a move; illegal moves leave the session untouched.
    pub fn play(&mut self, m: Move) -> Result<(), RuleViolation> {
        self.board = m.apply(&self.board)?;
        self.history.push(m);
        self.rev += 1;
        Ok(())
    }

    /// Drops the last move and rebuilds the board from the rest. Returns
    /// false when there is nothing to undo.
    pub fn undo(&mut self) -> bool {
        if self.history.pop().is_none() {
            return false;
        }
        self.board = replay(self.level.grid, &self.history).expect("history holds only accepted moves");
        self.rev += 1;
        true
    }

    pub fn state(&self) -> Value {
        let (covered, score) = score_board(&self.board);
        json!({
            "level": self.level.summary(),
            "cells": self.board.render(),
            "board": self.board.to_file(),
            "open_outs": self.board.open_outs().iter().map(|&p| cell_json(p)).collect::<Vec<_>>(),
            "covered_fraction": covered,
            "score_if_correct": score,
            "moves": self.history.len(),
        })
    }

    pub fn submit(&self, mode: ComparisonMode, policy: &mut OutcomePolicy) -> VerificationResult {
        evaluate(&self.board, &self.level.circuit, mode, policy)
    }
}

/// Rebuilds a board by applying `moves` to an empty grid.
pub fn replay(grid: Grid, moves: &[Move]) -> Result<Board, RuleViolation> {
    moves.iter().try_fold(Board::new(grid), |b, m| m.apply(&b))
}

fn cell_json(p: Pos) -> [i64; 2] {
    [p.row as i64 + 1, p.col as i64 + 1]
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("malformed request: {0}")]
    Malformed(String),
    #[error("unknown op {0:?}")]
    UnknownOp(String),
    #[error("unknown session {0}")]
    UnknownSession(u64),
    #[error("unknown level {0:?}")]
    UnknownLevel(String),
    #[error("stale revision: request has {got}, session is at {current}")]
    StaleRevision { got: u64, current: u64 },
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Request {
    pub op: String,
    #[serde(default)]
    pub session: Option<u64>,
    #[serde(default)]
    pub rev: Option<u64>,
    #[serde(default)]
    pub payload: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Rejected,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub op: String,
    pub session: Option<u64>,
    pub rev: Option<u64>,
    pub status: Status,
    pub payload: Value,
}

enum Outcome {
    Ok(Value),
    Rejected(RuleViolation),
}

/// All sessions of one engine process.
#[derive(Debug, Default)]
pub struct Engine {
    sessions: HashMap<u64, Session>,
    next_id: u64,
    /// Seed for random measurement outcomes; `None` post-selects +1.
    seed: Option<u64>,
}

impl Engine {
    pub fn new(seed: Option<u64>) -> Self {
        Engine { sessions: HashMap::new(), next_id: 1, seed }
    }

    /// Engine whose outcome seed comes from `ENGINE_SEED`, if set.
    pub fn from_env() -> Self {
        Engine::new(std::env::var("ENGINE_SEED").ok().and_then(|s| s.trim().parse().ok()))
    }

    pub fn session(&self, id: u64) -> Option<&Session> {
        self.sessions.get(&id)
    }

    pub fn policy(&self) -> OutcomePolicy {
        match self.seed {
            Some(s) => OutcomePolicy::seeded(s),
            None => OutcomePolicy::PlusOne,
        }
    }

    /// Handles one protocol line; never panics and always returns one
    /// reply line (without the trailing newline).
    pub fn handle_line(&mut self, line: &str) -> String {
        let reply = match serde_json::from_str::<Value>(line) {
            Err(e) => error_reply("", None, None, ProtocolError::Malformed(e.to_string())),
            Ok(v) => {
                let op = v.get("op").and_then(Value::as_str).unwrap_or("").to_string();
                let session = v.get("session").and_then(Value::as_u64);
                match serde_json::from_value::<Request>(v) {
                    Err(e) => error_reply(&op, session, None, ProtocolError::Malformed(e.to_string())),
                    Ok(req) => self.handle_guarded(req),
                }
            }
        };
        serde_json::to_string(&reply).expect("replies serialize")
    }

    fn handle_guarded(&mut self, req: Request) -> Reply {
        let (op, session) = (req.op.clone(), req.session);
        match catch_unwind(AssertUnwindSafe(|| self.handle(req))) {
            Ok(r) => r,
            Err(_) => error_reply(&op, session, None, ProtocolError::Internal("request handler failed".into())),
        }
    }

    pub fn handle(&mut self, req: Request) -> Reply {
        let op = req.op.clone();
        if op == "new_session" {
            return match self.new_session(&req.payload) {
                Ok(id) => {
                    let s = &self.sessions[&id];
                    ok_reply(&op, s, s.state())
                }
                Err(e) => error_reply(&op, None, None, e),
            };
        }
        let Some(id) = req.session else {
            return error_reply(&op, None, None, ProtocolError::Malformed("missing session".into()));
        };
        let seed_policy = self.policy();
        let Some(session) = self.sessions.get_mut(&id) else {
            return error_reply(&op, Some(id), None, ProtocolError::UnknownSession(id));
        };
        if let Some(got) = req.rev {
            if got != session.rev {
                let current = session.rev;
                return error_reply(&op, Some(id), Some(current), ProtocolError::StaleRevision { got, current });
            }
        }
        match dispatch(session, &op, &req.payload, seed_policy) {
            Ok(Outcome::Ok(payload)) => ok_reply(&op, session, payload),
            Ok(Outcome::Rejected(v)) => Reply {
                op,
                session: Some(id),
                rev: Some(session.rev),
                status: Status::Rejected,
                payload: json!({"rule": v.rule(), "message": v.to_string()}),
            },
            Err(e) => error_reply(&op, Some(id), Some(session.rev), e),
        }
    }

    fn new_session(&mut self, payload: &Value) -> Result<u64, ProtocolError> {
        let level_id = payload
            .get("level")
            .and_then(Value::as_str)
            .ok_or_else(|| ProtocolError::Malformed("payload.level must be a level id".into()))?;
        let level = builtin_level(level_id).ok_or_else(|| ProtocolError::UnknownLevel(level_id.to_string()))?;
        let id = self.next_id.max(1);
        self.next_id = id + 1;
        self.sessions.insert(id, Session::new(id, level));
        Ok(id)
    }
}

fn ok_reply(op: &str, s: &Session, payload: Value) -> Reply {
    Reply { op: op.to_string(), session: Some(s.id), rev: Some(s.rev), status: Status::Ok, payload }
}

fn error_reply(op: &str, session: Option<u64>, rev: Option<u64>, e: ProtocolError) -> Reply {
    Reply {
        op: op.to_string(),
        session,
        rev,
        status: Status::Error,
        payload: json!({"message": e.to_string()}),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacePayload {
    kind: String,
    anchor: [i64; 2],
    #[serde(default)]
    rot: i64,
    #[serde(default)]
    dry_run: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RotatePayload {
    #[serde(default)]
    placement: Option<usize>,
    #[serde(default)]
    dry_run: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InsertWirePayload {
    site: [i64; 2],
    kind: String,
    #[serde(default)]
    placement: Option<usize>,
    #[serde(default)]
    dry_run: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChooseOutPayload {
    cells: Vec<[i64; 2]>,
    #[serde(default)]
    placement: Option<usize>,
    #[serde(default)]
    dry_run: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkPayload {
    marks: Vec<OutputFile>,
    #[serde(default)]
    dry_run: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SubmitPayload {
    #[serde(default)]
    mode: ComparisonMode,
}

fn payload<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, ProtocolError> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| ProtocolError::Malformed(format!("payload: {e}")))
}

fn pos(c: [i64; 2], what: &str) -> Result<Pos, ProtocolError> {
    let ok = |v: i64| (i32::MIN as i64 + 1..=i32::MAX as i64).contains(&v);
    if !c.iter().all(|&v| ok(v)) {
        return Err(ProtocolError::Malformed(format!("{what}: coordinate out of range")));
    }
    Ok(Pos::new((c[0] - 1) as i32, (c[1] - 1) as i32))
}

fn last_placement(s: &Session) -> Result<usize, ProtocolError> {
    s.board
        .placements()
        .len()
        .checked_sub(1)
        .ok_or_else(|| ProtocolError::Malformed("no block on the board".into()))
}

fn dispatch(s: &mut Session, op: &str, p: &Value, mut policy: OutcomePolicy) -> Result<Outcome, ProtocolError> {
    let (m, dry_run) = match op {
        "get_state" => {
            payload::<serde_json::Map<String, Value>>(p)?;
            return Ok(Outcome::Ok(s.state()));
        }
        "undo" => {
            payload::<serde_json::Map<String, Value>>(p)?;
            if !s.undo() {
                return Err(ProtocolError::Malformed("nothing to undo".into()));
            }
            return Ok(Outcome::Ok(s.state()));
        }
        "submit" => {
            let sp: SubmitPayload = payload(p)?;
            let result = s.submit(sp.mode, &mut policy);
            return Ok(Outcome::Ok(json!({"result": result, "state": s.state()})));
        }
        "place" => {
            let pp: PlacePayload = payload(p)?;
            let kind: BlockKind = match pp.kind.parse() {
                Ok(k) => k,
                Err(e) => return Ok(Outcome::Rejected(RuleViolation::Pattern(e))),
            };
            if !s.level.allowed.contains(&kind) {
                return Ok(Outcome::Rejected(RuleViolation::Pattern(
                    crate::patterns::PatternError::UnsupportedKind(format!("{kind} is not allowed in this level")),
                )));
            }
            if !(0..4).contains(&pp.rot) {
                return Err(ProtocolError::Malformed(format!("rot must be 0..=3, got {}", pp.rot)));
            }
            let spec = PlacementSpec::new(kind, pos(pp.anchor, "anchor")?, pp.rot as u8);
            (Move::Place(spec), pp.dry_run)
        }
        "rotate" => {
            let rp: RotatePayload = payload(p)?;
            let placement = match rp.placement {
                Some(i) => i,
                None => last_placement(s)?,
            };
            (Move::Rotate { placement }, rp.dry_run)
        }
        "insert_wire" => {
            let wp: InsertWirePayload = payload(p)?;
            let kind: WireKind = match wp.kind.parse() {
                Ok(k) => k,
                Err(e) => return Ok(Outcome::Rejected(RuleViolation::Pattern(e))),
            };
            let site = pos(wp.site, "site")?;
            let placement = match wp.placement {
                Some(i) => i,
                None => s
                    .board
                    .placements()
                    .iter()
                    .rposition(|pl| pl.block.tiles().contains_key(&site))
                    .ok_or_else(|| ProtocolError::Malformed("no block tile at site".into()))?,
            };
            (Move::InsertWire { placement, site, kind }, wp.dry_run)
        }
        "choose_out" => {
            let cp: ChooseOutPayload = payload(p)?;
            let cells = cp.cells.iter().map(|&c| pos(c, "cells")).collect::<Result<Vec<_>, _>>()?;
            let placement = match cp.placement {
                Some(i) => i,
                None => last_placement(s)?,
            };
            (Move::ChooseOut { placement, cells }, cp.dry_run)
        }
        "mark_outputs" => {
            let mp: MarkPayload = payload(p)?;
            let mut marks = Vec::new();
            for m in &mp.marks {
                if m.q < 1 {
                    return Err(ProtocolError::Malformed(format!("output index must be >= 1, got {}", m.q)));
                }
                marks.push((pos(m.cell, "marks")?, m.q as usize));
            }
            (Move::MarkOutputs(marks), mp.dry_run)
        }
        other => return Err(ProtocolError::UnknownOp(other.to_string())),
    };
    if dry_run {
        return Ok(match m.apply(&s.board) {
            Ok(b) => {
                let (covered, _) = score_board(&b);
                Outcome::Ok(json!({"dry_run": true, "cells": b.render(), "covered_fraction": covered}))
            }
            Err(v) => Outcome::Rejected(v),
        });
    }
    Ok(match s.play(m) {
        Ok(()) => Outcome::Ok(s.state()),
        Err(v) => Outcome::Rejected(v),
    })
}
