//! Independent reference implementations used as test oracles.
//!
//! The oracles never call the tableau code: states are dense complex
//! vectors, Pauli strings multiply letter by letter, and boards are run by
//! projecting a dense graph state cell by cell. The board helpers at the
//! end build test boards and run the library's own pipeline on them.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tangram_core::{
    board_to_measurements, build_cluster_tableau, extract_subsystem, groups_equal, minimal_pattern, Basis, BlockKind,
    Board, CellState, Circuit, ComparisonMode, Gate, Grid, OutcomePolicy, PauliRow, Polyomino, Pos, Tableau,
};

pub const TOL: f64 = 1e-9;

// ---------------------------------------------------------------- dense states

/// Qubit `q` is bit `q` of the amplitude index.
#[derive(Debug, Clone)]
pub struct Dense {
    pub n: usize,
    pub amps: Vec<C>,
}

impl Dense {
    pub fn plus(n: usize) -> Self {
        let dim = 1usize << n;
        let a = C::new(1.0 / (dim as f64).sqrt(), 0.0);
        Dense { n, amps: vec![a; dim] }
    }

    pub fn apply(&mut self, g: &Gate) {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        match *g {
            Gate::I(_) => {}
            Gate::H(q) => {
                let b = 1 << q;
                for j in 0..self.amps.len() {
                    if j & b == 0 {
                        let (x, y) = (self.amps[j], self.amps[j | b]);
                        self.amps[j] = (x + y) * s2;
                        self.amps[j | b] = (x - y) * s2;
                    }
                }
            }
            Gate::S(q) => {
                for (j, a) in self.amps.iter_mut().enumerate() {
                    if j >> q & 1 == 1 {
                        *a *= C::i();
                    }
                }
            }
            Gate::Cz(p, q) => {
                for (j, a) in self.amps.iter_mut().enumerate() {
                    if j >> p & 1 == 1 && j >> q & 1 == 1 {
                        *a = -*a;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let t = 1 << target;
                for j in 0..self.amps.len() {
                    if j >> control & 1 == 1 && j & t == 0 {
                        self.amps.swap(j, j | t);
                    }
                }
            }
            Gate::Swap(p, q) => {
                for j in 0..self.amps.len() {
                    if j >> p & 1 == 1 && j >> q & 1 == 0 {
                        let k = j ^ (1 << p) ^ (1 << q);
                        self.amps.swap(j, k);
                    }
                }
            }
        }
    }

    pub fn run(circuit: &Circuit) -> Self {
        let mut s = Dense::plus(circuit.num_qubits());
        for g in circuit.gates() {
            s.apply(g);
        }
        s
    }

    pub fn outer(&self) -> Vec<Vec<C>> {
        self.amps.iter().map(|a| self.amps.iter().map(|b| a * b.conj()).collect()).collect()
    }
}

/// `P v` for a signed Pauli string, built straight from its letters.
pub fn apply_pauli(p: &PauliRow, v: &[C]) -> Vec<C> {
    let n = p.num_qubits();
    let mut out = vec![C::new(0.0, 0.0); v.len()];
    for (j, &a) in v.iter().enumerate() {
        let mut amp = if p.sign { -a } else { a };
        let mut k = j;
        for q in 0..n {
            let bit = j >> q & 1 == 1;
            match p.letter(q) {
                'I' => {}
                'X' => k ^= 1 << q,
                'Z' => {
                    if bit {
                        amp = -amp;
                    }
                }
                // Y|0> = i|1>, Y|1> = -i|0>
                'Y' => {
                    k ^= 1 << q;
                    amp *= if bit { -C::i() } else { C::i() };
                }
                _ => unreachable!(),
            }
        }
        out[k] += amp;
    }
    out
}

/// Dense projector `∏ (I + S_i) / 2` onto the stabilized state.
pub fn projector(t: &Tableau) -> Vec<Vec<C>> {
    let dim = 1usize << t.num_qubits();
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = vec![C::new(0.0, 0.0); dim];
        v[j] = C::new(1.0, 0.0);
        for s in t.stabilizers() {
            let sv = apply_pauli(s, &v);
            for (a, b) in v.iter_mut().zip(sv) {
                *a = (*a + b) * 0.5;
            }
        }
        cols.push(v);
    }
    (0..dim).map(|r| (0..dim).map(|c| cols[c][r]).collect()).collect()
}

pub fn max_entry_diff(a: &[Vec<C>], b: &[Vec<C>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

// ------------------------------------------------------------ symbolic Paulis

/// A Pauli string with a phase `i^phase`, multiplied letter by letter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym {
    pub phase: u8,
    pub letters: Vec<char>,
}

/// `a · b` for single-qubit Paulis: `(i-power, letter)`.
pub fn mul_letter(a: char, b: char) -> (u8, char) {
    match (a, b) {
        ('I', x) | (x, 'I') => (0, x),
        (x, y) if x == y => (0, 'I'),
        ('X', 'Y') => (1, 'Z'),
        ('Y', 'Z') => (1, 'X'),
        ('Z', 'X') => (1, 'Y'),
        ('Y', 'X') => (3, 'Z'),
        ('Z', 'Y') => (3, 'X'),
        ('X', 'Z') => (3, 'Y'),
        _ => unreachable!("not a Pauli letter"),
    }
}

impl Sym {
    pub fn identity(n: usize) -> Self {
        Sym { phase: 0, letters: vec!['I'; n] }
    }

    pub fn parse(s: &str) -> Self {
        let (phase, body) = match s.chars().next() {
            Some('-') => (2, &s[1..]),
            Some('+') => (0, &s[1..]),
            _ => (0, s),
        };
        Sym { phase, letters: body.chars().collect() }
    }

    pub fn from_row(r: &PauliRow) -> Self {
        Sym { phase: if r.sign { 2 } else { 0 }, letters: (0..r.num_qubits()).map(|q| r.letter(q)).collect() }
    }

    pub fn mul(&self, other: &Sym) -> Sym {
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, c) = mul_letter(a, b);
                phase += p;
                c
            })
            .collect();
        Sym { phase: phase % 4, letters }
    }

    pub fn commutes(&self, other: &Sym) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != 'I' && b != 'I' && a != b)
            .count();
        anti % 2 == 0
    }

    /// `+XYZ` style text; only defined for real phases.
    pub fn text(&self) -> String {
        let sign = match self.phase {
            0 => '+',
            2 => '-',
            _ => panic!("imaginary phase"),
        };
        std::iter::once(sign).chain(self.letters.iter().copied()).collect()
    }
}

/// Every element of the group generated by `gens`, as text.
pub fn enumerate_group(gens: &[Sym]) -> BTreeSet<String> {
    let n = gens[0].letters.len();
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << gens.len() {
        let mut acc = Sym::identity(n);
        for (i, g) in gens.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc = acc.mul(g);
            }
        }
        out.insert(acc.text());
    }
    out
}

pub fn group_of(t: &Tableau) -> BTreeSet<String> {
    enumerate_group(&t.stabilizers().iter().map(Sym::from_row).collect::<Vec<_>>())
}

pub fn unsigned(group: &BTreeSet<String>) -> BTreeSet<String> {
    group.iter().map(|s| s[1..].to_string()).collect()
}

/// Every Pauli string of length `n` (phase 0), in a fixed order.
pub fn all_paulis(n: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                ['I', 'X', 'Y', 'Z'].into_iter().map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

// ------------------------------------------------------------ random inputs

pub fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    let pick = if n == 1 { rng.random_range(0..3) } else { rng.random_range(0..6) };
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n);
    if n > 1 {
        while b == a {
            b = rng.random_range(0..n);
        }
    }
    match pick {
        0 => Gate::H(a),
        1 => Gate::S(a),
        2 => Gate::I(a),
        3 => Gate::Cnot { control: a, target: b },
        4 => Gate::Cz(a, b),
        _ => Gate::Swap(a, b),
    }
}

pub fn random_circuit(rng: &mut ChaCha8Rng, max_n: usize, max_gates: usize) -> Circuit {
    let n = rng.random_range(1..=max_n);
    let len = rng.random_range(0..=max_gates);
    Circuit::new(n, (0..len).map(|_| random_gate(rng, n)).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ------------------------------------------------------------- dense boards

/// Dense state on a growing list of live qubits; list position = bit.
struct Live {
    ids: Vec<usize>,
    amps: Vec<C>,
}

impl Live {
    fn add(&mut self, id: usize) {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let old = std::mem::take(&mut self.amps);
        self.amps = old.iter().map(|a| a * s2).chain(old.iter().map(|a| a * s2)).collect();
        self.ids.push(id);
    }

    fn cz(&mut self, a: usize, b: usize) {
        let pa = self.ids.iter().position(|&x| x == a).unwrap();
        let pb = self.ids.iter().position(|&x| x == b).unwrap();
        for (j, amp) in self.amps.iter_mut().enumerate() {
            if j >> pa & 1 == 1 && j >> pb & 1 == 1 {
                *amp = -*amp;
            }
        }
    }

    /// Projects `id` onto an eigenvector of `basis` (the +1 one unless it
    /// has zero weight) and removes it.
    fn measure(&mut self, id: usize, basis: Basis) {
        let p = self.ids.iter().position(|&x| x == id).unwrap();
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let eig = |plus: bool| -> [C; 2] {
            let sgn = if plus { 1.0 } else { -1.0 };
            match basis {
                Basis::Z if plus => [C::new(1.0, 0.0), C::new(0.0, 0.0)],
                Basis::Z => [C::new(0.0, 0.0), C::new(1.0, 0.0)],
                Basis::X => [C::new(s2, 0.0), C::new(sgn * s2, 0.0)],
                Basis::Y => [C::new(s2, 0.0), C::new(0.0, sgn * s2)],
            }
        };
        let contract = |e: [C; 2]| -> Vec<C> {
            let half = self.amps.len() / 2;
            (0..half)
                .map(|j| {
                    let lo = j & ((1 << p) - 1);
                    let hi = (j >> p) << (p + 1);
                    let j0 = hi | lo;
                    e[0].conj() * self.amps[j0] + e[1].conj() * self.amps[j0 | 1 << p]
                })
                .collect()
        };
        let mut v = contract(eig(true));
        let mut norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        if norm < 1e-12 {
            v = contract(eig(false));
            norm = v.iter().map(|a| a.norm_sqr()).sum();
        }
        let k = 1.0 / norm.sqrt();
        self.amps = v.into_iter().map(|a| a * k).collect();
        self.ids.remove(p);
    }
}

/// Runs `board` on a dense cluster state. Each cell in `refs` gets an extra
/// reference qubit attached by one edge, so the result carries the whole
/// process rather than its action on |+⟩. Returns the density matrix on the
/// outputs (by logical index) followed by the reference qubits.
pub fn dense_board(board: &Board, refs: &[Pos]) -> Vec<Vec<C>> {
    let grid = board.grid();
    let cells: Vec<Pos> = grid.cells().collect();
    let ncell = cells.len();
    let id_of = |p: Pos| grid.qubit(p).unwrap();
    let mut nbrs: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &p in &cells {
        nbrs.insert(id_of(p), grid.lattice_neighbors(p).map(id_of).collect());
    }
    for (i, &r) in refs.iter().enumerate() {
        nbrs.insert(ncell + i, vec![id_of(r)]);
        nbrs.get_mut(&id_of(r)).unwrap().push(ncell + i);
    }
    let basis_of = |id: usize| -> Option<Basis> {
        if id >= ncell {
            return None;
        }
        match board.cell_state(cells[id]) {
            CellState::Green => Some(Basis::Z),
            CellState::Measured(b) => Some(b),
            CellState::Open | CellState::Output(_) => None,
        }
    };
    let mut live = Live { ids: Vec::new(), amps: vec![C::new(1.0, 0.0)] };
    let mut added = BTreeSet::new();
    let order: Vec<usize> = (ncell..ncell + refs.len()).chain(0..ncell).collect();
    for id in order {
        live.add(id);
        for &nb in &nbrs[&id] {
            if added.contains(&nb) {
                live.cz(id, nb);
            }
        }
        added.insert(id);
        let ready: Vec<usize> = live
            .ids
            .iter()
            .copied()
            .filter(|&q| basis_of(q).is_some() && nbrs[&q].iter().all(|nb| added.contains(nb)))
            .collect();
        for q in ready {
            live.measure(q, basis_of(q).unwrap());
        }
    }
    let mut keep: Vec<usize> = board.ordered_outputs().into_iter().map(id_of).collect();
    keep.extend(ncell..ncell + refs.len());
    reduced_density(&live.ids, &live.amps, &keep)
}

fn reduced_density(ids: &[usize], amps: &[C], keep: &[usize]) -> Vec<Vec<C>> {
    let kpos: Vec<usize> = keep.iter().map(|k| ids.iter().position(|x| x == k).unwrap()).collect();
    let tpos: Vec<usize> = (0..ids.len()).filter(|p| !kpos.contains(p)).collect();
    let index = |a: usize, t: usize| -> usize {
        let mut j = 0;
        for (i, &p) in kpos.iter().enumerate() {
            j |= (a >> i & 1) << p;
        }
        for (i, &p) in tpos.iter().enumerate() {
            j |= (t >> i & 1) << p;
        }
        j
    };
    let dk = 1 << kpos.len();
    let dt = 1 << tpos.len();
    let mut rho = vec![vec![C::new(0.0, 0.0); dk]; dk];
    for (a, row) in rho.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            *entry = (0..dt).map(|t| amps[index(a, t)] * amps[index(b, t)].conj()).sum();
        }
    }
    rho
}

/// Reference state: the circuit applied to the first `k` halves of `k`
/// edge-linked pairs (`refs == true`), or to |+⟩ inputs otherwise.
pub fn dense_reference(circuit: &Circuit, refs: bool) -> Dense {
    let k = circuit.num_qubits();
    if !refs {
        return Dense::run(circuit);
    }
    let mut s = Dense::plus(2 * k);
    for i in 0..k {
        s.apply(&Gate::Cz(i, k + i));
    }
    for g in circuit.gates() {
        s.apply(g);
    }
    s
}

/// Largest `⟨φ| P† ρ P |φ⟩` over Pauli strings `P`: 1 iff `ρ` is `|φ⟩` up
/// to a Pauli byproduct.
pub fn best_pauli_fidelity(rho: &[Vec<C>], phi: &Dense) -> f64 {
    all_paulis(phi.n)
        .into_iter()
        .map(|letters| {
            let text: String = std::iter::once('+').chain(letters).collect();
            let p: PauliRow = text.parse().unwrap();
            let v = apply_pauli(&p, &phi.amps);
            let mut f = C::new(0.0, 0.0);
            for (i, row) in rho.iter().enumerate() {
                for (j, r) in row.iter().enumerate() {
                    f += v[i].conj() * r * v[j];
                }
            }
            f.re
        })
        .fold(0.0, f64::max)
}

// ------------------------------------------------------------- board helpers

/// `p` alone on its smallest enclosing grid, every Out marked as an output
/// in leg order. Also returns the In cells in leg order.
pub fn lone_block(p: &Polyomino) -> (Board, Vec<Pos>) {
    let (min, max) = p.bounding_box();
    let grid = Grid::new((max.col - min.col + 1) as usize, (max.row - min.row + 1) as usize).unwrap();
    lone_block_on(p, grid, Pos::new(0, 0) - min)
}

/// `p` shifted by `offset` on `grid`, Outs marked in leg order.
pub fn lone_block_on(p: &Polyomino, grid: Grid, offset: Pos) -> (Board, Vec<Pos>) {
    let anchor = p.inputs()[0] + offset;
    let board = Board::new(grid).place_block(p, anchor).unwrap();
    let placed = &board.placements()[0].block;
    let marks: Vec<(Pos, usize)> = placed.outs().into_iter().enumerate().map(|(i, o)| (o, i + 1)).collect();
    let inputs = placed.inputs();
    (board.mark_outputs(&marks).unwrap(), inputs)
}

pub fn gate_circuit(kind: BlockKind) -> Circuit {
    let g = kind.gate().expect("block implements a gate");
    let qubits: Vec<usize> = (0..kind.arity()).collect();
    Circuit::new(kind.arity(), vec![Gate::new(g, &qubits).unwrap()]).unwrap()
}

pub fn library_block(kind: BlockKind) -> Polyomino {
    minimal_pattern(kind)
}

/// Process check through the library pipeline: each In cell gets a
/// reference qubit, and the outputs plus references must match the
/// circuit applied to one half of edge-linked pairs (unsigned).
pub fn tableau_process_correct(board: &Board, inputs: &[Pos], circuit: &Circuit, policy: &mut OutcomePolicy) -> bool {
    let grid = board.grid();
    let n = grid.num_cells();
    let k = inputs.len();
    assert_eq!(k, circuit.num_qubits());
    let cluster = build_cluster_tableau(&grid);
    let widen = |r: &PauliRow| -> PauliRow {
        let mut w = PauliRow::identity(n + k);
        for q in 0..n {
            w.x.set(q, r.x.get(q));
            w.z.set(q, r.z.get(q));
        }
        w.sign = r.sign;
        w
    };
    let mut t = Tableau::new_plus(n + k).unwrap();
    for (a, b) in grid.edges() {
        t.apply(&Gate::Cz(a, b)).unwrap();
    }
    for (i, &p) in inputs.iter().enumerate() {
        t.apply(&Gate::Cz(grid.qubit(p).unwrap(), n + i)).unwrap();
    }
    // The grid part must still be the library's cluster state.
    for s in cluster.stabilizers() {
        let mut w = widen(s);
        for (i, &p) in inputs.iter().enumerate() {
            if w.x.get(grid.qubit(p).unwrap()) {
                w.z.set(n + i, true);
            }
        }
        assert!(matches!(t.membership(&w).unwrap(), tangram_core::Membership::Present { same_sign: true }));
    }
    for (q, basis) in board_to_measurements(board) {
        t.measure(q, basis, policy).unwrap();
    }
    let mut keep: Vec<usize> = board.ordered_outputs().into_iter().map(|p| grid.qubit(p).unwrap()).collect();
    keep.extend(n..n + k);
    let Ok(produced) = extract_subsystem(&t, &keep) else {
        return false;
    };
    let mut reference = Tableau::new_plus(2 * k).unwrap();
    for i in 0..k {
        reference.apply(&Gate::Cz(i, k + i)).unwrap();
    }
    for g in circuit.gates() {
        reference.apply(g).unwrap();
    }
    groups_equal(&produced, &reference, ComparisonMode::Unsigned).unwrap()
}

/// Same check on the dense oracle.
pub fn dense_process_fidelity(board: &Board, inputs: &[Pos], circuit: &Circuit) -> f64 {
    let rho = dense_board(board, inputs);
    best_pauli_fidelity(&rho, &dense_reference(circuit, true))
}

/// Dense check of the board's action on |+⟩ inputs.
pub fn dense_fidelity(board: &Board, circuit: &Circuit) -> f64 {
    let rho = dense_board(board, &[]);
    best_pauli_fidelity(&rho, &dense_reference(circuit, false))
}
