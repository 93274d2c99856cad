//! Square-grid cluster states.

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::tableau::{Basis, PauliRow, Tableau, TableauError};

/// A grid cell or a relative offset, 0-based `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub row: i32,
    pub col: i32,
}

impl Pos {
    pub const fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }

    /// Quarter turn clockwise about the origin: `(r, c) → (c, −r)`.
    pub fn rotated(self) -> Self {
        Pos::new(self.col, -self.row)
    }

    /// Quarter turn clockwise about `center`.
    pub fn rotated_about(self, center: Pos) -> Self {
        (self - center).rotated() + center
    }

    pub fn neighbors(self) -> [Pos; 4] {
        [
            Pos::new(self.row - 1, self.col),
            Pos::new(self.row, self.col + 1),
            Pos::new(self.row + 1, self.col),
            Pos::new(self.row, self.col - 1),
        ]
    }

    pub fn is_adjacent(self, other: Pos) -> bool {
        (self.row - other.row).abs() + (self.col - other.col).abs() == 1
    }

    pub fn scaled(self, k: i32) -> Pos {
        Pos::new(self.row * k, self.col * k)
    }
}

impl Add for Pos {
    type Output = Pos;
    fn add(self, o: Pos) -> Pos {
        Pos::new(self.row + o.row, self.col + o.col)
    }
}

impl Sub for Pos {
    type Output = Pos;
    fn sub(self, o: Pos) -> Pos {
        Pos::new(self.row - o.row, self.col - o.col)
    }
}

/// A `width × height` square lattice. Qubits are numbered row-major:
/// cell `(row, col)` is qubit `row · width + col` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    #[serde(rename = "w")]
    pub width: usize,
    #[serde(rename = "h")]
    pub height: usize,
}

impl Grid {
    pub fn new(width: usize, height: usize) -> Result<Self, TableauError> {
        if width == 0 || height == 0 {
            return Err(TableauError::InvalidSize);
        }
        Ok(Self { width, height })
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, p: Pos) -> bool {
        p.row >= 0 && p.col >= 0 && (p.row as usize) < self.height && (p.col as usize) < self.width
    }

    pub fn qubit(&self, p: Pos) -> Option<usize> {
        self.contains(p).then(|| p.row as usize * self.width + p.col as usize)
    }

    pub fn cell(&self, qubit: usize) -> Pos {
        Pos::new((qubit / self.width) as i32, (qubit % self.width) as i32)
    }

    pub fn cells(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.num_cells()).map(|q| self.cell(q))
    }

    pub fn lattice_neighbors(&self, p: Pos) -> impl Iterator<Item = Pos> + '_ {
        p.neighbors().into_iter().filter(|&q| self.contains(q))
    }

    /// Lattice edges `(a, b)` with `a < b`, as qubit indices.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for p in self.cells() {
            let a = self.qubit(p).unwrap();
            for q in [Pos::new(p.row, p.col + 1), Pos::new(p.row + 1, p.col)] {
                if let Some(b) = self.qubit(q) {
                    edges.push((a, b));
                }
            }
        }
        edges
    }
}

/// Cluster-state tableau: stabilizer `i` is `X_i ∏_{j ∈ N(i)} Z_j`,
/// destabilizer `i` is `Z_i`.
pub fn build_cluster_tableau(grid: &Grid) -> Tableau {
    let n = grid.num_cells();
    let destabs = (0..n).map(|q| PauliRow::single(n, q, Basis::Z)).collect();
    let stabs = grid
        .cells()
        .map(|p| {
            let mut row = PauliRow::single(n, grid.qubit(p).unwrap(), Basis::X);
            for nb in grid.lattice_neighbors(p) {
                row.z.set(grid.qubit(nb).unwrap(), true);
            }
            row
        })
        .collect();
    Tableau::from_rows(destabs, stabs).expect("cluster tableau is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{groups_equal, ComparisonMode};
    use crate::tableau::{Gate, OutcomePolicy};

    fn stabs(t: &Tableau) -> Vec<String> {
        t.stabilizers().iter().map(|r| r.to_string()).collect()
    }

    #[test]
    fn small_clusters() {
        assert_eq!(stabs(&build_cluster_tableau(&Grid::new(2, 1).unwrap())), ["+XZ", "+ZX"]);
        assert_eq!(stabs(&build_cluster_tableau(&Grid::new(1, 1).unwrap())), ["+X"]);
        let t = build_cluster_tableau(&Grid::new(2, 2).unwrap());
        assert_eq!(t.stabilizers()[0].to_string(), "+XZZI");
    }

    #[test]
    fn indexing_is_row_major() {
        let g = Grid::new(3, 2).unwrap();
        assert_eq!(g.qubit(Pos::new(1, 0)), Some(3));
        assert_eq!(g.cell(5), Pos::new(1, 2));
        assert_eq!(g.qubit(Pos::new(2, 0)), None);
        assert_eq!(g.qubit(Pos::new(0, -1)), None);
        assert_eq!(g.edges().len(), 7);
    }

    #[test]
    fn matches_cz_construction() {
        let g = Grid::new(3, 3).unwrap();
        let mut t = Tableau::new_plus(9).unwrap();
        for (a, b) in g.edges() {
            t.apply(&Gate::Cz(a, b)).unwrap();
        }
        assert!(groups_equal(&t, &build_cluster_tableau(&g), ComparisonMode::Strict).unwrap());
    }

    #[test]
    fn all_z_gives_product_state() {
        let g = Grid::new(3, 2).unwrap();
        let mut t = build_cluster_tableau(&g);
        let mut policy = OutcomePolicy::PlusOne;
        for q in 0..6 {
            t.measure(q, Basis::Z, &mut policy).unwrap();
        }
        let zero = Tableau::new_zero(6).unwrap();
        assert!(groups_equal(&t, &zero, ComparisonMode::Strict).unwrap());
    }

    #[test]
    fn rotation() {
        assert_eq!(Pos::new(0, 1).rotated(), Pos::new(1, 0));
        assert_eq!(Pos::new(1, 0).rotated(), Pos::new(0, -1));
        let c = Pos::new(2, 2);
        let p = Pos::new(2, 4);
        assert_eq!(p.rotated_about(c), Pos::new(4, 2));
    }
}
