//! The playing board: placed blocks, their connections and marked outputs.
//!
//! Every cell starts green (a Z measurement). A placed block recolors its
//! tiles and reserves its Out cells, which stay unmeasured until a later
//! block drops an In tile on them. Two cells of different blocks may only
//! touch when one of them is such an In/Out junction shared by both.
//!
//! Board files are JSON with 1-based `[row, col]` cells:
//!
//! ```json
//! {"grid": {"w": 5, "h": 3},
//!  "placements": [{"kind": "X2", "anchor": [2, 2], "rot": 0, "wires": [], "out": []}],
//!  "outputs": [{"cell": [2, 4], "q": 1}]}
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::ParseError;
use crate::cluster::{Grid, Pos};
use crate::patterns::{minimal_pattern, BlockKind, PatternError, Polyomino, WireKind};
use crate::tableau::Basis;

/// A move or board that breaks one of the placement rules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleViolation {
    #[error("cell {0} lies outside the board")]
    OutOfBounds(Cell),
    #[error("cell {0} is already taken")]
    Overlap(Cell),
    #[error("cells {0} and {1} of different blocks touch away from an In/Out junction")]
    IllegalTouch(Cell, Cell),
    #[error("no In tile of the block lands on an open Out tile")]
    Unconnected,
    #[error("no placement {0}")]
    NoSuchPlacement(usize),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("output marking: {0}")]
    Marking(String),
}

impl RuleViolation {
    pub fn rule(&self) -> u8 {
        match self {
            RuleViolation::OutOfBounds(_) => 1,
            RuleViolation::Overlap(_) | RuleViolation::IllegalTouch(..) | RuleViolation::Unconnected => 3,
            RuleViolation::NoSuchPlacement(_) => 1,
            RuleViolation::Pattern(e) => e.rule(),
            RuleViolation::Marking(_) => 7,
        }
    }
}

/// A board cell printed 1-based, as in the file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell(pub Pos);

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.0.row + 1, self.0.col + 1)
    }
}

/// How a block was put on the board, replayable from scratch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementSpec {
    pub kind: BlockKind,
    /// Board cell of the library shape's first In tile.
    pub anchor: Pos,
    /// Quarter turns clockwise about the anchor.
    pub rot: u8,
    /// Wires spliced in order, each after the tile at the given board cell.
    pub wires: Vec<(Pos, WireKind)>,
    /// Committed Out cells; empty keeps the straight-ahead defaults.
    pub outs: Vec<Pos>,
}

impl PlacementSpec {
    pub fn new(kind: BlockKind, anchor: Pos, rot: u8) -> Self {
        Self { kind, anchor, rot: rot % 4, wires: Vec::new(), outs: Vec::new() }
    }

    /// Builds the block in board coordinates.
    pub fn build(&self) -> Result<Polyomino, PatternError> {
        let mut p = minimal_pattern(self.kind);
        for _ in 0..self.rot % 4 {
            p = p.rotate();
        }
        p = p.translated(self.anchor);
        for &(site, wire) in &self.wires {
            p = p.insert_wire(site, wire)?;
        }
        for &out in &self.outs {
            p = p.choose_out(out)?;
        }
        Ok(p)
    }

    /// The same placement turned a quarter clockwise about its anchor.
    pub fn rotated(&self) -> Self {
        let a = self.anchor;
        Self {
            kind: self.kind,
            anchor: a,
            rot: (self.rot + 1) % 4,
            wires: self.wires.iter().map(|&(s, w)| (s.rotated_about(a), w)).collect(),
            outs: self.outs.iter().map(|o| o.rotated_about(a)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub spec: PlacementSpec,
    pub block: Polyomino,
    /// Per leg: whether a later block's In tile sits on this leg's Out.
    pub consumed: Vec<bool>,
}

/// What the evaluator does with a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "state", content = "value")]
pub enum CellState {
    /// Default Z measurement.
    Green,
    /// Colored tile.
    Measured(Basis),
    /// Open Out tile, not marked as an output.
    Open,
    /// Marked output with its 1-based logical index.
    Output(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Board {
    grid: Grid,
    placements: Vec<Placement>,
    /// `(cell, logical index)` with indices 1-based.
    outputs: Vec<(Pos, usize)>,
}

impl Board {
    pub fn new(grid: Grid) -> Self {
        Self { grid, placements: Vec::new(), outputs: Vec::new() }
    }

    /// Replays placements and marks from scratch.
    pub fn rebuild(grid: Grid, specs: &[PlacementSpec], outputs: &[(Pos, usize)]) -> Result<Self, RuleViolation> {
        let mut board = Board::new(grid);
        for spec in specs {
            board = board.place_spec(spec.clone())?;
        }
        if !outputs.is_empty() {
            board = board.mark_outputs(outputs)?;
        }
        Ok(board)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn specs(&self) -> Vec<PlacementSpec> {
        self.placements.iter().map(|p| p.spec.clone()).collect()
    }

    pub fn outputs(&self) -> &[(Pos, usize)] {
        &self.outputs
    }

    /// Output cells ordered by logical index.
    pub fn ordered_outputs(&self) -> Vec<Pos> {
        let mut outs = self.outputs.clone();
        outs.sort_by_key(|&(_, i)| i);
        outs.into_iter().map(|(p, _)| p).collect()
    }

    /// Basis of the tile covering `p`; a junction shows the later In tile.
    pub fn tile_at(&self, p: Pos) -> Option<Basis> {
        self.placements.iter().rev().find_map(|pl| pl.block.tiles().get(&p).copied())
    }

    /// Out cells no later block has built on.
    pub fn open_outs(&self) -> Vec<Pos> {
        self.placements
            .iter()
            .flat_map(|pl| {
                pl.block.legs().iter().zip(&pl.consumed).filter(|(_, c)| !**c).map(|(l, _)| l.out)
            })
            .collect()
    }

    pub fn cell_state(&self, p: Pos) -> CellState {
        if let Some(&(_, i)) = self.outputs.iter().find(|(c, _)| *c == p) {
            return CellState::Output(i);
        }
        if let Some(b) = self.tile_at(p) {
            return CellState::Measured(b);
        }
        if self.open_outs().contains(&p) {
            CellState::Open
        } else {
            CellState::Green
        }
    }

    /// Cells not measured in Z: X and Y tiles, open Outs and outputs.
    pub fn non_green_cells(&self) -> usize {
        self.grid
            .cells()
            .filter(|&p| !matches!(self.cell_state(p), CellState::Green | CellState::Measured(Basis::Z)))
            .count()
    }

    fn owners(&self) -> BTreeMap<Pos, BTreeSet<usize>> {
        let mut owners: BTreeMap<Pos, BTreeSet<usize>> = BTreeMap::new();
        for (i, pl) in self.placements.iter().enumerate() {
            for c in pl.block.cells() {
                owners.entry(c).or_default().insert(i);
            }
        }
        owners
    }

    pub fn place_spec(&self, spec: PlacementSpec) -> Result<Board, RuleViolation> {
        let block = spec.build()?;
        self.place(spec, block)
    }

    /// Puts `p` on the board with its first In tile at `anchor`. The
    /// recorded spec only names the kind, so replaying it gives back `p`
    /// only for library shapes.
    pub fn place_block(&self, p: &Polyomino, anchor: Pos) -> Result<Board, RuleViolation> {
        let block = p.translated(anchor - p.inputs()[0]);
        let spec = PlacementSpec::new(p.kind(), anchor, 0);
        self.place(spec, block)
    }

    fn place(&self, spec: PlacementSpec, block: Polyomino) -> Result<Board, RuleViolation> {
        for c in block.cells() {
            if !self.grid.contains(c) {
                return Err(RuleViolation::OutOfBounds(Cell(c)));
            }
        }
        let open: BTreeMap<Pos, (usize, usize)> = self
            .placements
            .iter()
            .enumerate()
            .flat_map(|(i, pl)| {
                pl.block
                    .legs()
                    .iter()
                    .enumerate()
                    .filter(|(l, _)| !pl.consumed[*l])
                    .map(move |(l, leg)| (leg.out, (i, l)))
            })
            .collect();
        let mut owners = self.owners();
        let inputs = block.inputs();
        let mut junctions = Vec::new();
        for c in block.cells() {
            if let Some(taken) = owners.get(&c) {
                match open.get(&c) {
                    Some(&slot) if inputs.contains(&c) => junctions.push(slot),
                    _ => return Err(RuleViolation::Overlap(Cell(c))),
                }
                debug_assert!(!taken.is_empty());
            }
        }
        if self.outputs.iter().any(|(p, _)| block.tiles().contains_key(p)) {
            return Err(RuleViolation::Marking("a block cannot cover a marked output".into()));
        }
        if !self.placements.is_empty() && junctions.is_empty() {
            return Err(RuleViolation::Unconnected);
        }
        let me = self.placements.len();
        for c in block.cells() {
            owners.entry(c).or_default().insert(me);
        }
        for c in block.cells() {
            for nb in c.neighbors() {
                if let Some(theirs) = owners.get(&nb) {
                    if owners[&c].is_disjoint(theirs) {
                        return Err(RuleViolation::IllegalTouch(Cell(c), Cell(nb)));
                    }
                }
            }
        }
        let mut next = self.clone();
        for (i, l) in junctions {
            next.placements[i].consumed[l] = true;
        }
        let legs = block.legs().len();
        next.placements.push(Placement { spec, block, consumed: vec![false; legs] });
        Ok(next)
    }

    /// Replaces the outputs with `marks` (`(cell, 1-based index)`).
    pub fn mark_outputs(&self, marks: &[(Pos, usize)]) -> Result<Board, RuleViolation> {
        let bad = |m: String| Err(RuleViolation::Marking(m));
        if marks.is_empty() {
            return bad("no outputs given".into());
        }
        let mut cells = BTreeSet::new();
        let mut indices = BTreeSet::new();
        for &(c, i) in marks {
            if !self.grid.contains(c) {
                return bad(format!("cell {} is off the board", Cell(c)));
            }
            if self.tile_at(c).is_some() {
                return bad(format!("cell {} is a measured tile", Cell(c)));
            }
            if !cells.insert(c) {
                return bad(format!("cell {} marked twice", Cell(c)));
            }
            if i == 0 || i > marks.len() {
                return bad(format!("index {i} outside 1..={}", marks.len()));
            }
            if !indices.insert(i) {
                return bad(format!("index {i} used twice"));
            }
        }
        let mut next = self.clone();
        next.outputs = marks.to_vec();
        Ok(next)
    }

    /// Rechecks every board invariant from the cell contents alone.
    pub fn check_invariants(&self) -> Result<(), String> {
        let owners = self.owners();
        for (c, who) in &owners {
            if !self.grid.contains(*c) {
                return Err(format!("{} off the board", Cell(*c)));
            }
            if who.len() > 2 {
                return Err(format!("{} shared by {} blocks", Cell(*c), who.len()));
            }
            if who.len() == 2 {
                let (a, b) = (*who.first().unwrap(), *who.last().unwrap());
                let pa = &self.placements[a].block;
                let pb = &self.placements[b].block;
                if !(pa.outs().contains(c) && pb.inputs().contains(c)) {
                    return Err(format!("{} overlaps without an Out→In junction", Cell(*c)));
                }
            }
            for nb in c.neighbors() {
                if let Some(theirs) = owners.get(&nb) {
                    if who.is_disjoint(theirs) {
                        return Err(format!("{} and {} touch across blocks", Cell(*c), Cell(nb)));
                    }
                }
            }
        }
        for (i, pl) in self.placements.iter().enumerate().skip(1) {
            let linked = pl
                .block
                .inputs()
                .iter()
                .any(|c| self.placements[..i].iter().any(|q| q.block.outs().contains(c)));
            if !linked {
                return Err(format!("placement {i} is not connected"));
            }
        }
        let mut idx: Vec<usize> = self.outputs.iter().map(|&(_, i)| i).collect();
        idx.sort_unstable();
        if idx != (1..=idx.len()).collect::<Vec<_>>() {
            return Err("output indices are not 1..n".into());
        }
        for &(c, _) in &self.outputs {
            if self.tile_at(c).is_some() {
                return Err(format!("output {} is measured", Cell(c)));
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> BoardFile {
        let cell = |p: Pos| [p.row as i64 + 1, p.col as i64 + 1];
        BoardFile {
            grid: GridFile { w: self.grid.width as i64, h: self.grid.height as i64 },
            placements: self
                .placements
                .iter()
                .map(|pl| PlacementFile {
                    kind: pl.spec.kind.code(),
                    anchor: cell(pl.spec.anchor),
                    rot: pl.spec.rot as i64,
                    wires: pl
                        .spec
                        .wires
                        .iter()
                        .map(|&(s, w)| WireFile { site: cell(s), kind: w.code().to_string() })
                        .collect(),
                    out: pl.spec.outs.iter().map(|&o| cell(o)).collect(),
                })
                .collect(),
            outputs: self.outputs.iter().map(|&(c, q)| OutputFile { cell: cell(c), q: q as i64 }).collect(),
        }
    }

    /// Grid as rows of single-letter cell codes: `Z`, `X`, `Y`, `o` for an
    /// open Out, digits for outputs.
    pub fn render(&self) -> Vec<String> {
        (0..self.grid.height as i32)
            .map(|r| {
                (0..self.grid.width as i32)
                    .map(|c| match self.cell_state(Pos::new(r, c)) {
                        CellState::Green => "Z".to_string(),
                        CellState::Measured(b) => b.letter().to_string(),
                        CellState::Open => "o".to_string(),
                        CellState::Output(i) if i < 10 => i.to_string(),
                        CellState::Output(_) => "#".to_string(),
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridFile {
    pub w: i64,
    pub h: i64,
}

impl GridFile {
    pub fn to_grid(&self) -> Result<Grid, ParseError> {
        if self.w < 1 || self.h < 1 {
            return Err(ParseError::Field {
                location: "grid".into(),
                message: format!("grid must be at least 1x1, got {}x{}", self.w, self.h),
            });
        }
        Ok(Grid::new(self.w as usize, self.h as usize).expect("checked positive"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFile {
    pub site: [i64; 2],
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementFile {
    pub kind: String,
    pub anchor: [i64; 2],
    #[serde(default)]
    pub rot: i64,
    #[serde(default)]
    pub wires: Vec<WireFile>,
    #[serde(default)]
    pub out: Vec<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub cell: [i64; 2],
    pub q: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardFile {
    pub grid: GridFile,
    #[serde(default)]
    pub placements: Vec<PlacementFile>,
    #[serde(default)]
    pub outputs: Vec<OutputFile>,
}

fn to_pos(c: [i64; 2]) -> Pos {
    Pos::new((c[0] - 1) as i32, (c[1] - 1) as i32)
}

/// Board file decoded into checked but not yet rule-validated parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardDescription {
    pub grid: Grid,
    pub specs: Vec<PlacementSpec>,
    pub outputs: Vec<(Pos, usize)>,
}

impl BoardDescription {
    pub fn build(&self) -> Result<Board, RuleViolation> {
        Board::rebuild(self.grid, &self.specs, &self.outputs)
    }
}

impl BoardFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::from_json(&e))
    }

    /// Checks field values; rule checks happen in [`BoardDescription::build`].
    pub fn describe(&self) -> Result<BoardDescription, ParseError> {
        let grid = self.grid.to_grid()?;
        let field = |loc: String, msg: String| ParseError::Field { location: loc, message: msg };
        let in_range = |c: [i64; 2]| c.iter().all(|v| (i32::MIN as i64 + 1..=i32::MAX as i64).contains(v));
        let mut specs = Vec::new();
        for (i, pf) in self.placements.iter().enumerate() {
            let kind: BlockKind = pf
                .kind
                .parse()
                .map_err(|e: PatternError| field(format!("placements[{i}].kind"), e.to_string()))?;
            if !(0..4).contains(&pf.rot) {
                return Err(field(format!("placements[{i}].rot"), format!("rotation must be 0..=3, got {}", pf.rot)));
            }
            if !in_range(pf.anchor) {
                return Err(field(format!("placements[{i}].anchor"), "coordinate out of range".into()));
            }
            let mut spec = PlacementSpec::new(kind, to_pos(pf.anchor), pf.rot as u8);
            for (j, w) in pf.wires.iter().enumerate() {
                let kind: WireKind = w
                    .kind
                    .parse()
                    .map_err(|e: PatternError| field(format!("placements[{i}].wires[{j}].kind"), e.to_string()))?;
                if !in_range(w.site) {
                    return Err(field(format!("placements[{i}].wires[{j}].site"), "coordinate out of range".into()));
                }
                spec.wires.push((to_pos(w.site), kind));
            }
            for (j, &o) in pf.out.iter().enumerate() {
                if !in_range(o) {
                    return Err(field(format!("placements[{i}].out[{j}]"), "coordinate out of range".into()));
                }
                spec.outs.push(to_pos(o));
            }
            specs.push(spec);
        }
        let mut outputs = Vec::new();
        for (i, o) in self.outputs.iter().enumerate() {
            if o.q < 1 {
                return Err(field(format!("outputs[{i}].q"), format!("logical index must be >= 1, got {}", o.q)));
            }
            if !in_range(o.cell) {
                return Err(field(format!("outputs[{i}].cell"), "coordinate out of range".into()));
            }
            outputs.push((to_pos(o.cell), o.q as usize));
        }
        Ok(BoardDescription { grid, specs, outputs })
    }
}
