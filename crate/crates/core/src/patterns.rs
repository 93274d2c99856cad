//! Polyomino measurement blocks.
//!
//! A block is a set of colored tiles (each a Pauli measurement) plus one
//! In→Out leg per logical qubit. A leg is the chain of tiles the qubit is
//! teleported along, starting at its In tile and ending at its terminal
//! tile; the leg's Out cell is an unmeasured neighbor of the terminal tile.
//! Tiles that are not on any leg (the orange rungs of two-qubit blocks)
//! couple the legs.
//!
//! Along a leg an X tile acts as `H` and a Y tile as `H·S`, up to Pauli
//! byproducts. A Y rung between two leg tiles entangles them with a `CZ`
//! and applies `S†` to both. The library shapes below are built from those
//! two facts and checked against the evaluator in the test suite.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::Pos;
use crate::tableau::{Basis, GateKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("unsupported block kind {0:?}")]
    UnsupportedKind(String),
    #[error("no tile of the block at {0:?}")]
    NotATile(Pos),
    #[error("cannot insert a wire after {at:?}: {reason}")]
    IllegalInsertion { at: Pos, reason: String },
    #[error("wire insertion collides: {0}")]
    WireCollision(String),
    #[error("illegal Out tile {cell:?}: {reason}")]
    IllegalOut { cell: Pos, reason: String },
    #[error("malformed block: {0}")]
    Malformed(String),
}

impl PatternError {
    /// Game rule the error corresponds to.
    pub fn rule(&self) -> u8 {
        match self {
            PatternError::UnsupportedKind(_) => 1,
            PatternError::Malformed(_) => 2,
            PatternError::IllegalOut { .. } => 4,
            PatternError::NotATile(_)
            | PatternError::IllegalInsertion { .. }
            | PatternError::WireCollision(_) => 6,
        }
    }
}

/// Identity blocks used to stretch and bend other blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WireKind {
    /// Two X tiles.
    #[serde(rename = "X2")]
    BlueDomino,
    /// Three Y tiles.
    #[serde(rename = "Y3")]
    OrangeTromino,
}

impl WireKind {
    pub fn basis(self) -> Basis {
        match self {
            WireKind::BlueDomino => Basis::X,
            WireKind::OrangeTromino => Basis::Y,
        }
    }

    pub fn tile_count(self) -> usize {
        match self {
            WireKind::BlueDomino => 2,
            WireKind::OrangeTromino => 3,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            WireKind::BlueDomino => "X2",
            WireKind::OrangeTromino => "Y3",
        }
    }
}

impl FromStr for WireKind {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "X2" => Ok(WireKind::BlueDomino),
            "Y3" => Ok(WireKind::OrangeTromino),
            other => Err(PatternError::UnsupportedKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    Gate(GateKind),
    Wire(WireKind),
    Monomino(Basis),
}

impl BlockKind {
    pub const ALL: [BlockKind; 10] = [
        BlockKind::Gate(GateKind::H),
        BlockKind::Gate(GateKind::S),
        BlockKind::Gate(GateKind::Cnot),
        BlockKind::Gate(GateKind::Cz),
        BlockKind::Gate(GateKind::Swap),
        BlockKind::Wire(WireKind::BlueDomino),
        BlockKind::Wire(WireKind::OrangeTromino),
        BlockKind::Monomino(Basis::X),
        BlockKind::Monomino(Basis::Y),
        BlockKind::Monomino(Basis::Z),
    ];

    pub fn arity(self) -> usize {
        match self {
            BlockKind::Gate(g) => g.arity(),
            BlockKind::Wire(_) | BlockKind::Monomino(_) => 1,
        }
    }

    /// The logical gate the block implements on |+⟩ inputs, if any.
    pub fn gate(self) -> Option<GateKind> {
        match self {
            BlockKind::Gate(g) => Some(g),
            BlockKind::Wire(_) => Some(GateKind::I),
            BlockKind::Monomino(Basis::X) => Some(GateKind::H),
            BlockKind::Monomino(_) => None,
        }
    }

    pub fn code(self) -> String {
        match self {
            BlockKind::Gate(g) => g.name().to_string(),
            BlockKind::Wire(w) => w.code().to_string(),
            BlockKind::Monomino(b) => format!("M{}", b.letter()),
        }
    }
}

impl FromStr for BlockKind {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "MX" => BlockKind::Monomino(Basis::X),
            "MY" => BlockKind::Monomino(Basis::Y),
            "MZ" => BlockKind::Monomino(Basis::Z),
            "X2" | "Y3" => BlockKind::Wire(s.parse()?),
            other => BlockKind::Gate(
                other.parse().map_err(|_| PatternError::UnsupportedKind(other.to_string()))?,
            ),
        })
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TileRole {
    In,
    Body,
    Out,
}

/// One logical qubit's path through a block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Leg {
    /// Tile positions from the In tile to the terminal tile.
    pub chain: Vec<Pos>,
    /// Committed Out cell, adjacent to the terminal tile.
    pub out: Pos,
}

impl Leg {
    pub fn input(&self) -> Pos {
        self.chain[0]
    }

    pub fn terminal(&self) -> Pos {
        *self.chain.last().expect("legs are non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polyomino {
    kind: BlockKind,
    tiles: BTreeMap<Pos, Basis>,
    legs: Vec<Leg>,
}

fn straight(bases: &[Basis], row: i32, start_col: i32) -> (Vec<(Pos, Basis)>, Leg) {
    let tiles: Vec<(Pos, Basis)> = bases
        .iter()
        .enumerate()
        .map(|(i, &b)| (Pos::new(row, start_col + i as i32), b))
        .collect();
    let leg = Leg {
        chain: tiles.iter().map(|(p, _)| *p).collect(),
        out: Pos::new(row, start_col + bases.len() as i32),
    };
    (tiles, leg)
}

fn assemble(kind: BlockKind, parts: Vec<(Vec<(Pos, Basis)>, Leg)>, rungs: &[Pos]) -> Polyomino {
    let mut tiles = BTreeMap::new();
    let mut legs = Vec::new();
    for (ts, leg) in parts {
        tiles.extend(ts);
        legs.push(leg);
    }
    for &r in rungs {
        tiles.insert(r, Basis::Y);
    }
    Polyomino { kind, tiles, legs }
}

/// The library shape for `kind`, with leg 0's In tile at the origin and
/// each Out cell straight ahead of its terminal tile.
///
/// Two-qubit blocks run their legs two rows apart (leg 0 on top) joined by
/// orange rungs; for CNOT leg 0 is the control.
pub fn minimal_pattern(kind: BlockKind) -> Polyomino {
    use Basis::{X, Y};
    match kind {
        BlockKind::Gate(GateKind::H) => assemble(kind, vec![straight(&[X, Y, Y, Y], 0, 0)], &[]),
        BlockKind::Gate(GateKind::S) => assemble(kind, vec![straight(&[X, X, Y, X], 0, 0)], &[]),
        BlockKind::Gate(GateKind::I) | BlockKind::Wire(WireKind::BlueDomino) => {
            assemble(BlockKind::Wire(WireKind::BlueDomino), vec![straight(&[X, X], 0, 0)], &[])
        }
        BlockKind::Wire(WireKind::OrangeTromino) => assemble(kind, vec![straight(&[Y, Y, Y], 0, 0)], &[]),
        BlockKind::Monomino(b) => assemble(kind, vec![straight(&[b], 0, 0)], &[]),
        BlockKind::Gate(GateKind::Cz) => assemble(
            kind,
            vec![straight(&[Y, X], 0, 0), straight(&[Y, X], 2, 0)],
            &[Pos::new(1, 0)],
        ),
        BlockKind::Gate(GateKind::Cnot) => assemble(
            kind,
            vec![straight(&[Y, X], 0, 0), straight(&[X, Y], 2, -1)],
            &[Pos::new(1, 0)],
        ),
        BlockKind::Gate(GateKind::Swap) => assemble(
            kind,
            vec![
                straight(&[Y, X, X, Y, X, X, Y, X], 0, 0),
                straight(&[X, Y, X, X, Y, X, X, Y], 2, -1),
            ],
            &[Pos::new(1, 0), Pos::new(1, 3), Pos::new(1, 6)],
        ),
    }
}

impl Polyomino {
    /// Builds a block from raw parts, checking the structural invariants.
    pub fn from_parts(kind: BlockKind, tiles: BTreeMap<Pos, Basis>, legs: Vec<Leg>) -> Result<Self, PatternError> {
        let p = Self { kind, tiles, legs };
        p.validate()?;
        Ok(p)
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn tiles(&self) -> &BTreeMap<Pos, Basis> {
        &self.tiles
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn inputs(&self) -> Vec<Pos> {
        self.legs.iter().map(Leg::input).collect()
    }

    pub fn outs(&self) -> Vec<Pos> {
        self.legs.iter().map(|l| l.out).collect()
    }

    /// Tiles followed by Out cells.
    pub fn cells(&self) -> Vec<Pos> {
        self.tiles.keys().copied().chain(self.outs()).collect()
    }

    pub fn role(&self, p: Pos) -> Option<TileRole> {
        if self.legs.iter().any(|l| l.input() == p) {
            Some(TileRole::In)
        } else if self.tiles.contains_key(&p) {
            Some(TileRole::Body)
        } else if self.legs.iter().any(|l| l.out == p) {
            Some(TileRole::Out)
        } else {
            None
        }
    }

    fn map_positions(&self, f: impl Fn(Pos) -> Pos) -> Polyomino {
        Polyomino {
            kind: self.kind,
            tiles: self.tiles.iter().map(|(&p, &b)| (f(p), b)).collect(),
            legs: self
                .legs
                .iter()
                .map(|l| Leg { chain: l.chain.iter().map(|&p| f(p)).collect(), out: f(l.out) })
                .collect(),
        }
    }

    pub fn translated(&self, by: Pos) -> Polyomino {
        self.map_positions(|p| p + by)
    }

    /// Quarter turn clockwise about the origin.
    pub fn rotate(&self) -> Polyomino {
        self.map_positions(Pos::rotated)
    }

    pub fn rotated_about(&self, center: Pos) -> Polyomino {
        self.map_positions(|p| p.rotated_about(center))
    }

    /// Smallest and largest corner of the box around tiles and Out cells.
    pub fn bounding_box(&self) -> (Pos, Pos) {
        let cells = self.cells();
        let min = Pos::new(
            cells.iter().map(|p| p.row).min().unwrap(),
            cells.iter().map(|p| p.col).min().unwrap(),
        );
        let max = Pos::new(
            cells.iter().map(|p| p.row).max().unwrap(),
            cells.iter().map(|p| p.col).max().unwrap(),
        );
        (min, max)
    }

    fn tile_neighbors(&self, p: Pos) -> impl Iterator<Item = Pos> + '_ {
        p.neighbors().into_iter().filter(|q| self.tiles.contains_key(q))
    }

    fn tile_degree(&self, p: Pos) -> usize {
        self.tile_neighbors(p).count()
    }

    fn edges(&self) -> BTreeSet<(Pos, Pos)> {
        let mut edges = BTreeSet::new();
        for &p in self.tiles.keys() {
            for q in self.tile_neighbors(p) {
                if p < q {
                    edges.insert((p, q));
                }
            }
        }
        edges
    }

    fn chain_position(&self, p: Pos) -> Option<(usize, usize)> {
        self.legs
            .iter()
            .enumerate()
            .find_map(|(li, l)| l.chain.iter().position(|&q| q == p).map(|i| (li, i)))
    }

    /// Checks why `cell` cannot serve as the Out of leg `leg`, if anything.
    fn out_problem(&self, leg: usize, cell: Pos) -> Option<String> {
        if self.tiles.contains_key(&cell) {
            return Some("cell is already a tile of the block".into());
        }
        if !cell.is_adjacent(self.legs[leg].terminal()) {
            return Some("not adjacent to the last colored tile".into());
        }
        let touching = self.tile_degree(cell);
        if touching != 1 {
            return Some(format!("touches {touching} tiles of the block"));
        }
        for (li, other) in self.legs.iter().enumerate() {
            if li != leg && (other.out == cell || other.out.is_adjacent(cell)) {
                return Some(format!("touches the Out tile of leg {li}"));
            }
        }
        None
    }

    /// Every legal Out cell for leg `leg`.
    pub fn out_candidates(&self, leg: usize) -> Vec<Pos> {
        self.legs[leg]
            .terminal()
            .neighbors()
            .into_iter()
            .filter(|&c| self.out_problem(leg, c).is_none())
            .collect()
    }

    /// Commits `cell` as the Out of the leg whose terminal tile it touches.
    pub fn choose_out(&self, cell: Pos) -> Result<Polyomino, PatternError> {
        let illegal = |reason: String| PatternError::IllegalOut { cell, reason };
        let Some(leg) = self.legs.iter().position(|l| l.terminal().is_adjacent(cell)) else {
            return Err(illegal("not adjacent to the last colored tile of any leg".into()));
        };
        if let Some(reason) = self.out_problem(leg, cell) {
            return Err(illegal(reason));
        }
        let mut next = self.clone();
        next.legs[leg].out = cell;
        Ok(next)
    }

    /// Splices a wire between the tile at `after` and the next cell along
    /// its leg, pushing everything downstream of that link outward.
    pub fn insert_wire(&self, after: Pos, wire: WireKind) -> Result<Polyomino, PatternError> {
        if !self.tiles.contains_key(&after) {
            return Err(PatternError::NotATile(after));
        }
        let illegal = |reason: String| PatternError::IllegalInsertion { at: after, reason };
        let degree = self.tile_degree(after);
        if degree > 2 {
            return Err(illegal(format!("tile has {degree} neighbors")));
        }
        let (li, idx) = self
            .chain_position(after)
            .ok_or_else(|| illegal("tile is not on an In→Out path".into()))?;
        let leg = &self.legs[li];
        let forward_is_out = idx + 1 == leg.chain.len();
        let forward = if forward_is_out { leg.out } else { leg.chain[idx + 1] };
        let dir = forward - after;
        let shift = dir.scaled(wire.tile_count() as i32);

        let moved: BTreeSet<Pos> = if forward_is_out {
            BTreeSet::new()
        } else {
            let mut seen = BTreeSet::from([forward]);
            let mut queue = VecDeque::from([forward]);
            while let Some(p) = queue.pop_front() {
                for q in self.tile_neighbors(p) {
                    if (p == forward && q == after) || seen.contains(&q) {
                        continue;
                    }
                    seen.insert(q);
                    queue.push_back(q);
                }
            }
            if seen.contains(&after) {
                return Err(illegal("the link is part of a loop".into()));
            }
            seen
        };
        let mv = |p: Pos| if moved.contains(&p) { p + shift } else { p };

        let wire_cells: Vec<Pos> = (1..=wire.tile_count() as i32).map(|k| after + dir.scaled(k)).collect();
        let mut tiles = BTreeMap::new();
        for (&p, &b) in &self.tiles {
            if tiles.insert(mv(p), b).is_some() {
                return Err(PatternError::WireCollision(format!("tiles overlap at {:?}", mv(p))));
            }
        }
        for &c in &wire_cells {
            if tiles.insert(c, wire.basis()).is_some() {
                return Err(PatternError::WireCollision(format!("wire overlaps a tile at {c:?}")));
            }
        }
        let legs: Vec<Leg> = self
            .legs
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let mut chain: Vec<Pos> = l.chain.iter().map(|&p| mv(p)).collect();
                let out_moves = moved.contains(&l.terminal()) || (i == li && forward_is_out);
                if i == li {
                    chain.splice(idx + 1..idx + 1, wire_cells.iter().copied());
                }
                Leg { chain, out: if out_moves { l.out + shift } else { l.out } }
            })
            .collect();

        let mut expected: BTreeSet<(Pos, Pos)> = self
            .edges()
            .into_iter()
            .filter(|&(a, b)| !((a == after && b == forward) || (a == forward && b == after)))
            .map(|(a, b)| {
                let (a, b) = (mv(a), mv(b));
                if a < b { (a, b) } else { (b, a) }
            })
            .collect();
        let mut path = vec![after];
        path.extend(&wire_cells);
        if !forward_is_out {
            path.push(forward + shift);
        }
        for w in path.windows(2) {
            expected.insert(if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) });
        }

        let next = Polyomino { kind: self.kind, tiles, legs };
        if next.edges() != expected {
            return Err(PatternError::WireCollision("the stretched block touches itself".into()));
        }
        next.validate_outs().map_err(|e| PatternError::WireCollision(e.to_string()))?;
        Ok(next)
    }

    fn validate_outs(&self) -> Result<(), PatternError> {
        for (li, leg) in self.legs.iter().enumerate() {
            if let Some(reason) = self.out_problem(li, leg.out) {
                return Err(PatternError::IllegalOut { cell: leg.out, reason });
            }
        }
        Ok(())
    }

    /// Structural invariants: connected distinct tiles, well-formed legs,
    /// legal Out cells.
    pub fn validate(&self) -> Result<(), PatternError> {
        let bad = |m: String| Err(PatternError::Malformed(m));
        if self.tiles.is_empty() {
            return bad("no tiles".into());
        }
        if self.legs.len() != self.kind.arity() {
            return bad(format!("{} legs for a {}-qubit block", self.legs.len(), self.kind.arity()));
        }
        let mut on_chain = BTreeSet::new();
        for leg in &self.legs {
            if leg.chain.is_empty() {
                return bad("empty leg".into());
            }
            for (i, p) in leg.chain.iter().enumerate() {
                if !self.tiles.contains_key(p) {
                    return bad(format!("leg cell {p:?} is not a tile"));
                }
                if !on_chain.insert(*p) {
                    return bad(format!("tile {p:?} lies on two legs"));
                }
                if i > 0 && !leg.chain[i - 1].is_adjacent(*p) {
                    return bad(format!("leg breaks between {:?} and {p:?}", leg.chain[i - 1]));
                }
            }
        }
        let start = *self.tiles.keys().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for q in self.tile_neighbors(p) {
                if seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        if seen.len() != self.tiles.len() {
            return bad("tiles are not edge-connected".into());
        }
        self.validate_outs()
    }

    fn signature(&self) -> Vec<(Option<Basis>, TileRole, Vec<Option<Basis>>)> {
        let outs = self.outs();
        let basis_at = |p: Pos| -> Option<Option<Basis>> {
            if let Some(&b) = self.tiles.get(&p) {
                Some(Some(b))
            } else if outs.contains(&p) {
                Some(None)
            } else {
                None
            }
        };
        let mut sig: Vec<_> = self
            .cells()
            .into_iter()
            .map(|p| {
                let mut around: Vec<Option<Basis>> =
                    p.neighbors().into_iter().filter_map(basis_at).collect();
                around.sort();
                (basis_at(p).unwrap(), self.role(p).unwrap(), around)
            })
            .collect();
        sig.sort();
        sig
    }
}

/// Structural deformation test: true iff the tiles (and Out cells) of `a`
/// and `b` can be matched one-to-one keeping basis, role and the multiset of
/// non-green neighbor colors. Directions are ignored.
pub fn neighborhood_equivalent(a: &Polyomino, b: &Polyomino) -> bool {
    a.tiles.len() == b.tiles.len() && a.legs.len() == b.legs.len() && a.signature() == b.signature()
}

impl fmt::Display for Polyomino {
    /// ASCII sketch: In tiles lowercase, other tiles uppercase, `o` for Out.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (min, max) = self.bounding_box();
        let inputs = self.inputs();
        let outs = self.outs();
        for r in min.row..=max.row {
            for c in min.col..=max.col {
                let p = Pos::new(r, c);
                let ch = match self.tiles.get(&p) {
                    Some(b) if inputs.contains(&p) => b.letter().to_ascii_lowercase(),
                    Some(b) => b.letter(),
                    None if outs.contains(&p) => 'o',
                    None => '.',
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
