//! Stabilizer tableaus for pure n-qubit stabilizer states.
//!
//! A tableau holds `2n` Pauli rows: rows `0..n` are destabilizers and rows
//! `n..2n` are the stabilizer generators. Each row stores an X bit-vector, a
//! Z bit-vector and a sign bit, and denotes `(-1)^r ∏_j i^{x_j z_j} X^{x_j}
//! Z^{z_j}`, so that `x_j = z_j = 1` reads as `Y_j`. Gate updates, Z-basis
//! measurement and row multiplication follow the Aaronson–Gottesman
//! construction; X and Y measurements are reduced to Z by conjugation.
//!
//! Qubit indices are 0-based here. Conversion from the 1-based file formats
//! happens at the parsing boundary.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, BitRow};

/// Two Pauli rows whose product is not Hermitian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("rows anticommute")]
pub struct Anticommuting;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("tableau must have at least one qubit")]
    InvalidSize,
    #[error("qubit {qubit} out of range for {n}-qubit tableau")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("two-qubit gate needs distinct targets, got {0} twice")]
    DuplicateTargets(usize),
    #[error("row {0} out of range")]
    RowOutOfRange(usize),
    #[error("rowsum needs two distinct rows, got {0} twice")]
    SameRow(usize),
    #[error("rows {h} and {k} anticommute; their product has an imaginary phase")]
    AnticommutingRows { h: usize, k: usize },
    #[error("tableau invariant violated: {0}")]
    Invariant(String),
    #[error("cannot parse Pauli string {0:?}")]
    BadPauli(String),
}

/// Single-qubit Pauli measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    /// Display color of the measurement tile.
    pub fn color(self) -> &'static str {
        match self {
            Basis::X => "blue",
            Basis::Y => "orange",
            Basis::Z => "green",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }
}

/// Gate names of the supported Clifford set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    S,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "CZ")]
    Cz,
    #[serde(rename = "SWAP")]
    Swap,
    I,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::S | GateKind::I => 1,
            GateKind::Cnot | GateKind::Cz | GateKind::Swap => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
            GateKind::I => "I",
        }
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "H" => GateKind::H,
            "S" => GateKind::S,
            "CNOT" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "SWAP" => GateKind::Swap,
            "I" => GateKind::I,
            other => return Err(format!("unknown gate {other:?}")),
        })
    }
}

/// A gate application on concrete (0-based) qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    Swap(usize, usize),
    I(usize),
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::S(_) => GateKind::S,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Cz(..) => GateKind::Cz,
            Gate::Swap(..) => GateKind::Swap,
            Gate::I(_) => GateKind::I,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::I(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz(a, b) | Gate::Swap(a, b) => vec![a, b],
        }
    }

    /// Builds a gate from a kind and its target list.
    pub fn new(kind: GateKind, qubits: &[usize]) -> Result<Self, TableauError> {
        let bad = || TableauError::Invariant(format!("{} takes {} qubit(s)", kind.name(), kind.arity()));
        if qubits.len() != kind.arity() {
            return Err(bad());
        }
        let gate = match kind {
            GateKind::H => Gate::H(qubits[0]),
            GateKind::S => Gate::S(qubits[0]),
            GateKind::I => Gate::I(qubits[0]),
            GateKind::Cnot => Gate::Cnot { control: qubits[0], target: qubits[1] },
            GateKind::Cz => Gate::Cz(qubits[0], qubits[1]),
            GateKind::Swap => Gate::Swap(qubits[0], qubits[1]),
        };
        if kind.arity() == 2 && qubits[0] == qubits[1] {
            return Err(TableauError::DuplicateTargets(qubits[0]));
        }
        Ok(gate)
    }
}

/// The four-case phase exponent used when multiplying two single-qubit
/// Paulis `(x1, z1) · (x2, z2)`: the product picks up `i^g`.
pub fn g_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i8 {
    let (x2, z2) = (x2 as i8, z2 as i8);
    match (x1, z1) {
        (false, false) => 0,
        (false, true) => x2 * (1 - 2 * z2),
        (true, false) => z2 * (2 * x2 - 1),
        (true, true) => z2 - x2,
    }
}

/// A signed Pauli string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliRow {
    pub x: BitRow,
    pub z: BitRow,
    /// `true` means an overall factor of −1.
    pub sign: bool,
}

impl PauliRow {
    pub fn identity(n: usize) -> Self {
        Self { x: BitRow::zeros(n), z: BitRow::zeros(n), sign: false }
    }

    pub fn single(n: usize, q: usize, basis: Basis) -> Self {
        let mut row = Self::identity(n);
        match basis {
            Basis::X => row.x.set(q, true),
            Basis::Z => row.z.set(q, true),
            Basis::Y => {
                row.x.set(q, true);
                row.z.set(q, true);
            }
        }
        row
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Pauli letter on qubit `q` (`'I'`, `'X'`, `'Y'` or `'Z'`).
    pub fn letter(&self, q: usize) -> char {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits()).filter(|&q| self.x.get(q) || self.z.get(q)).collect()
    }

    pub fn commutes_with(&self, other: &PauliRow) -> bool {
        self.x.dot(&other.z) == self.z.dot(&other.x)
    }

    /// Phase exponent `p mod 4` of `other · self`, where the bare bit strings
    /// would combine as `self ⊕ other`.
    fn product_phase(&self, other: &PauliRow) -> u8 {
        let mut p: i32 = 2 * self.sign as i32 + 2 * other.sign as i32;
        for j in 0..self.num_qubits() {
            p += g_phase(other.x.get(j), other.z.get(j), self.x.get(j), self.z.get(j)) as i32;
        }
        p.rem_euclid(4) as u8
    }

    /// Replaces `self` by `other · self`. Errors when the product is not
    /// Hermitian, i.e. the rows anticommute.
    pub fn mul_assign_left(&mut self, other: &PauliRow) -> Result<(), Anticommuting> {
        let p = self.product_phase(other);
        if p % 2 == 1 {
            return Err(Anticommuting);
        }
        self.sign = p == 2;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
        Ok(())
    }

    /// Same as [`mul_assign_left`](Self::mul_assign_left) but drops an
    /// imaginary phase instead of failing. Used for destabilizer rows, whose
    /// signs carry no meaning.
    fn mul_assign_left_lossy(&mut self, other: &PauliRow) {
        let p = self.product_phase(other);
        self.sign = p == 2;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// Keeps only the listed qubits, in the listed order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliRow {
        PauliRow { x: self.x.select(qubits), z: self.z.select(qubits), sign: self.sign }
    }
}

impl fmt::Display for PauliRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.sign { "-" } else { "+" })?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliRow {
    type Err = TableauError;

    /// Parses strings like `"+XZI"`, `"-Y"` or `"XX"` (sign optional).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sign, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        if body.is_empty() {
            return Err(TableauError::BadPauli(s.to_string()));
        }
        let mut row = PauliRow::identity(body.len());
        row.sign = sign;
        for (q, ch) in body.chars().enumerate() {
            match ch {
                'I' | '_' => {}
                'X' => row.x.set(q, true),
                'Z' => row.z.set(q, true),
                'Y' => {
                    row.x.set(q, true);
                    row.z.set(q, true);
                }
                _ => return Err(TableauError::BadPauli(s.to_string())),
            }
        }
        Ok(row)
    }
}

/// How random measurement outcomes are resolved.
#[derive(Debug, Clone, Default)]
pub enum OutcomePolicy {
    /// Post-select every random outcome to +1.
    #[default]
    PlusOne,
    /// Draw random outcomes from a seeded generator.
    Random(Box<ChaCha8Rng>),
}

impl OutcomePolicy {
    pub fn seeded(seed: u64) -> Self {
        OutcomePolicy::Random(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    fn draw(&mut self) -> bool {
        match self {
            OutcomePolicy::PlusOne => false,
            OutcomePolicy::Random(rng) => rng.random(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    fn from_sign(sign: bool) -> Self {
        if sign {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    pub outcome: Outcome,
    /// True iff the measured Pauli (up to sign) was already in the group.
    pub deterministic: bool,
}

/// Result of asking whether a Pauli string belongs to a stabilizer group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Absent,
    /// The string is in the group up to sign; `same_sign` says whether the
    /// group contains it with the given sign.
    Present { same_sign: bool },
}

#[derive(Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliRow>,
}

impl Tableau {
    /// The product state |+⟩^n: destabilizers Z_j, stabilizers X_j.
    pub fn new_plus(n: usize) -> Result<Self, TableauError> {
        if n == 0 {
            return Err(TableauError::InvalidSize);
        }
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|q| PauliRow::single(n, q, Basis::Z)));
        rows.extend((0..n).map(|q| PauliRow::single(n, q, Basis::X)));
        Ok(Self { n, rows })
    }

    /// The computational basis state |0⟩^n.
    pub fn new_zero(n: usize) -> Result<Self, TableauError> {
        if n == 0 {
            return Err(TableauError::InvalidSize);
        }
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|q| PauliRow::single(n, q, Basis::X)));
        rows.extend((0..n).map(|q| PauliRow::single(n, q, Basis::Z)));
        Ok(Self { n, rows })
    }

    /// Builds a tableau from `n` independent commuting stabilizer generators,
    /// completing it with a matching set of destabilizers.
    pub fn from_stabilizers(stabilizers: Vec<PauliRow>) -> Result<Self, TableauError> {
        let n = stabilizers.len();
        if n == 0 {
            return Err(TableauError::InvalidSize);
        }
        if let Some(bad) = stabilizers.iter().find(|s| s.num_qubits() != n) {
            return Err(TableauError::Invariant(format!(
                "generator {bad} has {} qubits, expected {n}",
                bad.num_qubits()
            )));
        }
        let destabilizers = complete_destabilizers(&stabilizers)?;
        let mut rows = destabilizers;
        rows.extend(stabilizers);
        let t = Self { n, rows };
        t.check_invariants()?;
        Ok(t)
    }

    /// Builds a tableau from explicit destabilizer and stabilizer rows.
    pub fn from_rows(destabilizers: Vec<PauliRow>, stabilizers: Vec<PauliRow>) -> Result<Self, TableauError> {
        let n = stabilizers.len();
        if n == 0 {
            return Err(TableauError::InvalidSize);
        }
        if destabilizers.len() != n
            || destabilizers.iter().chain(&stabilizers).any(|r| r.num_qubits() != n)
        {
            return Err(TableauError::Invariant("row shapes do not form a 2n x 2n tableau".into()));
        }
        let mut rows = destabilizers;
        rows.extend(stabilizers);
        let t = Self { n, rows };
        t.check_invariants()?;
        Ok(t)
    }

    /// An even number of equal-width rows taken as they are, with no
    /// validity checks. Meant for exercising row operations on arbitrary
    /// rows; only [`rowsum`](Self::rowsum) and the accessors are reliable
    /// on such a tableau.
    pub fn from_rows_unchecked(rows: Vec<PauliRow>) -> Result<Self, TableauError> {
        let n = rows.len() / 2;
        if n == 0 || !rows.len().is_multiple_of(2) || rows.iter().any(|r| r.num_qubits() != rows[0].num_qubits()) {
            return Err(TableauError::Invariant("need an even, non-zero number of equal-width rows".into()));
        }
        Ok(Self { n, rows })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[PauliRow] {
        &self.rows
    }

    pub fn destabilizers(&self) -> &[PauliRow] {
        &self.rows[..self.n]
    }

    pub fn stabilizers(&self) -> &[PauliRow] {
        &self.rows[self.n..]
    }

    fn check_qubit(&self, q: usize) -> Result<(), TableauError> {
        if q >= self.n {
            Err(TableauError::QubitOutOfRange { qubit: q, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Conjugates every row by the gate.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), TableauError> {
        let qs = gate.qubits();
        for &q in &qs {
            self.check_qubit(q)?;
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(TableauError::DuplicateTargets(qs[0]));
        }
        match *gate {
            Gate::I(_) => {}
            Gate::H(a) => self.h(a),
            Gate::S(a) => self.s(a),
            Gate::Cnot { control, target } => self.cnot(control, target),
            Gate::Cz(a, b) => self.cz(a, b),
            Gate::Swap(a, b) => {
                for row in &mut self.rows {
                    row.x.swap_bits(a, b);
                    row.z.swap_bits(a, b);
                }
            }
        }
        Ok(())
    }

    fn h(&mut self, a: usize) {
        for row in &mut self.rows {
            let (x, z) = (row.x.get(a), row.z.get(a));
            row.sign ^= x & z;
            row.x.set(a, z);
            row.z.set(a, x);
        }
    }

    fn s(&mut self, a: usize) {
        for row in &mut self.rows {
            let (x, z) = (row.x.get(a), row.z.get(a));
            row.sign ^= x & z;
            row.z.set(a, z ^ x);
        }
    }

    fn s_dagger(&mut self, a: usize) {
        self.s(a);
        self.s(a);
        self.s(a);
    }

    fn cnot(&mut self, c: usize, t: usize) {
        for row in &mut self.rows {
            let (xc, zc, xt, zt) = (row.x.get(c), row.z.get(c), row.x.get(t), row.z.get(t));
            row.sign ^= xc & zt & !(xt ^ zc);
            row.x.set(t, xt ^ xc);
            row.z.set(c, zc ^ zt);
        }
    }

    fn cz(&mut self, a: usize, b: usize) {
        for row in &mut self.rows {
            let (xa, za, xb, zb) = (row.x.get(a), row.z.get(a), row.x.get(b), row.z.get(b));
            row.sign ^= xa & xb & (za ^ zb);
            row.z.set(a, za ^ xb);
            row.z.set(b, zb ^ xa);
        }
    }

    /// Row `h` ← row `k` · row `h` with exact sign tracking.
    ///
    /// Errors if the two rows anticommute; for a valid tableau that can only
    /// happen when pairing a destabilizer with its own stabilizer.
    pub fn rowsum(&mut self, h: usize, k: usize) -> Result<(), TableauError> {
        let len = self.rows.len();
        if h >= len {
            return Err(TableauError::RowOutOfRange(h));
        }
        if k >= len {
            return Err(TableauError::RowOutOfRange(k));
        }
        if h == k {
            return Err(TableauError::SameRow(h));
        }
        let other = self.rows[k].clone();
        self.rows[h]
            .mul_assign_left(&other)
            .map_err(|_| TableauError::AnticommutingRows { h, k })
    }

    /// Rowsum that tolerates anticommuting rows (imaginary phase dropped).
    pub(crate) fn rowsum_lossy(&mut self, h: usize, k: usize) {
        let other = self.rows[k].clone();
        self.rows[h].mul_assign_left_lossy(&other);
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        self.rows.swap(a, b);
    }

    /// Measures qubit `q` in the given Pauli basis and projects the state.
    pub fn measure(
        &mut self,
        q: usize,
        basis: Basis,
        policy: &mut OutcomePolicy,
    ) -> Result<Measurement, TableauError> {
        self.check_qubit(q)?;
        match basis {
            Basis::Z => self.measure_z(q, policy),
            Basis::X => {
                self.h(q);
                let m = self.measure_z(q, policy);
                self.h(q);
                m
            }
            Basis::Y => {
                self.s_dagger(q);
                self.h(q);
                let m = self.measure_z(q, policy);
                self.h(q);
                self.s(q);
                m
            }
        }
    }

    fn measure_z(&mut self, q: usize, policy: &mut OutcomePolicy) -> Result<Measurement, TableauError> {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| self.rows[i].x.get(q)) {
            for i in 0..2 * n {
                if i != p && self.rows[i].x.get(q) {
                    if i < n {
                        self.rowsum_lossy(i, p);
                    } else {
                        self.rowsum(i, p)?;
                    }
                }
            }
            self.rows[p - n] = self.rows[p].clone();
            let sign = policy.draw();
            let mut z = PauliRow::single(n, q, Basis::Z);
            z.sign = sign;
            self.rows[p] = z;
            Ok(Measurement { outcome: Outcome::from_sign(sign), deterministic: false })
        } else {
            let mut acc = PauliRow::identity(n);
            for i in 0..n {
                if self.rows[i].x.get(q) {
                    acc.mul_assign_left(&self.rows[i + n])
                        .map_err(|_| TableauError::Invariant("stabilizers anticommute".into()))?;
                }
            }
            Ok(Measurement { outcome: Outcome::from_sign(acc.sign), deterministic: true })
        }
    }

    /// Decides whether `pauli` lies in the stabilizer group.
    pub fn membership(&self, pauli: &PauliRow) -> Result<Membership, TableauError> {
        if pauli.num_qubits() != self.n {
            return Err(TableauError::Invariant(format!(
                "Pauli on {} qubits tested against {}-qubit tableau",
                pauli.num_qubits(),
                self.n
            )));
        }
        if !self.stabilizers().iter().all(|s| s.commutes_with(pauli)) {
            return Ok(Membership::Absent);
        }
        let mut acc = PauliRow::identity(self.n);
        for i in 0..self.n {
            if !self.rows[i].commutes_with(pauli) {
                acc.mul_assign_left(&self.rows[i + self.n])
                    .map_err(|_| TableauError::Invariant("stabilizers anticommute".into()))?;
            }
        }
        if acc.x != pauli.x || acc.z != pauli.z {
            return Err(TableauError::Invariant("destabilizer decomposition failed".into()));
        }
        Ok(Membership::Present { same_sign: acc.sign == pauli.sign })
    }

    /// Checks commutation structure and full rank.
    pub fn check_invariants(&self) -> Result<(), TableauError> {
        let n = self.n;
        let stabs = self.stabilizers();
        for i in 0..n {
            for j in i + 1..n {
                if !stabs[i].commutes_with(&stabs[j]) {
                    return Err(TableauError::Invariant(format!(
                        "stabilizers {i} and {j} anticommute"
                    )));
                }
            }
        }
        for (i, d) in self.destabilizers().iter().enumerate() {
            for (j, s) in stabs.iter().enumerate() {
                if d.commutes_with(s) == (i == j) {
                    return Err(TableauError::Invariant(format!(
                        "destabilizer {i} has wrong commutation with stabilizer {j}"
                    )));
                }
            }
        }
        let joined: Vec<BitRow> = self.rows.iter().map(|r| concat(&r.x, &r.z)).collect();
        if rank(joined, 2 * n) != 2 * n {
            return Err(TableauError::Invariant("tableau is rank deficient".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "destabilizers:")?;
        for row in self.destabilizers() {
            writeln!(f, "  {row}")?;
        }
        writeln!(f, "stabilizers:")?;
        for row in self.stabilizers() {
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub(crate) fn concat(a: &BitRow, b: &BitRow) -> BitRow {
    BitRow::from_bits((0..a.len()).map(|i| a.get(i)).chain((0..b.len()).map(|i| b.get(i))))
}

pub(crate) fn rank(mut rows: Vec<BitRow>, width: usize) -> usize {
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(c)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor_assign(&pivot);
            }
        }
        r += 1;
    }
    r
}

/// Finds destabilizers for a full set of commuting independent stabilizers:
/// `D_i` anticommutes with `S_i` only, and the `D_i` commute pairwise.
fn complete_destabilizers(stabs: &[PauliRow]) -> Result<Vec<PauliRow>, TableauError> {
    let n = stabs.len();
    for i in 0..n {
        for j in i + 1..n {
            if !stabs[i].commutes_with(&stabs[j]) {
                return Err(TableauError::Invariant(format!("generators {i} and {j} anticommute")));
            }
        }
    }
    // Symplectic form: <v, S> = v.x · S.z + v.z · S.x, so each equation row
    // is (S.z | S.x) acting on (v.x | v.z).
    let equations: Vec<BitRow> = stabs.iter().map(|s| concat(&s.z, &s.x)).collect();
    let mut destabs = Vec::with_capacity(n);
    for i in 0..n {
        let rhs: Vec<bool> = (0..n).map(|j| j == i).collect();
        let v = bits::solve(&equations, &rhs, 2 * n)
            .ok_or_else(|| TableauError::Invariant("generators are not independent".into()))?;
        let mut row = PauliRow::identity(n);
        for q in 0..n {
            row.x.set(q, v.get(q));
            row.z.set(q, v.get(n + q));
        }
        destabs.push(row);
    }
    for j in 0..n {
        for i in 0..j {
            if !destabs[i].commutes_with(&destabs[j]) {
                destabs[j].x.xor_assign(&stabs[i].x);
                destabs[j].z.xor_assign(&stabs[i].z);
            }
        }
    }
    Ok(destabs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliRow {
        s.parse().unwrap()
    }

    fn stab_strings(t: &Tableau) -> Vec<String> {
        t.stabilizers().iter().map(|r| r.to_string()).collect()
    }

    #[test]
    fn plus_state_layout() {
        let t = Tableau::new_plus(2).unwrap();
        assert_eq!(stab_strings(&t), ["+XI", "+IX"]);
        let d: Vec<String> = t.destabilizers().iter().map(|r| r.to_string()).collect();
        assert_eq!(d, ["+ZI", "+IZ"]);
        assert_eq!(stab_strings(&Tableau::new_plus(1).unwrap()), ["+X"]);
        Tableau::new_plus(3).unwrap().check_invariants().unwrap();
        assert_eq!(Tableau::new_plus(0), Err(TableauError::InvalidSize));
    }

    #[test]
    fn gate_examples() {
        let mut t = Tableau::new_plus(1).unwrap();
        t.apply(&Gate::H(0)).unwrap();
        assert_eq!(stab_strings(&t), ["+Z"]);

        let mut t = Tableau::new_plus(2).unwrap();
        t.apply(&Gate::Cz(0, 1)).unwrap();
        assert_eq!(stab_strings(&t), ["+XZ", "+ZX"]);

        let mut t = Tableau::new_plus(2).unwrap();
        t.apply(&Gate::Cnot { control: 0, target: 1 }).unwrap();
        assert_eq!(stab_strings(&t), ["+XX", "+IX"]);
    }

    #[test]
    fn gate_index_errors() {
        let mut t = Tableau::new_plus(2).unwrap();
        assert_eq!(t.apply(&Gate::H(2)), Err(TableauError::QubitOutOfRange { qubit: 2, n: 2 }));
        assert_eq!(t.apply(&Gate::Cz(1, 1)), Err(TableauError::DuplicateTargets(1)));
        assert_eq!(Gate::new(GateKind::Cnot, &[0, 0]), Err(TableauError::DuplicateTargets(0)));
    }

    #[test]
    fn g_phase_cases() {
        assert_eq!(g_phase(false, false, true, true), 0);
        assert_eq!(g_phase(false, true, true, true), -1);
        assert_eq!(g_phase(true, true, false, true), 1);
        assert_eq!(g_phase(true, false, true, true), 1);
        assert_eq!(g_phase(true, false, false, true), -1);
    }

    #[test]
    fn rowsum_examples() {
        // X1X2 · Z1Z2 combined into row h = -Y1Y2
        let mut t = Tableau { n: 2, rows: vec![p("XX"), p("ZZ"), p("II"), p("II")] };
        t.rowsum(0, 1).unwrap();
        assert_eq!(t.rows[0].to_string(), "-YY");

        let mut t = Tableau { n: 1, rows: vec![p("X"), p("I")] };
        t.rowsum(0, 1).unwrap();
        assert_eq!(t.rows[0].to_string(), "+X");

        let mut t = Tableau { n: 1, rows: vec![p("-Z"), p("Z")] };
        t.rowsum(0, 1).unwrap();
        assert_eq!(t.rows[0].to_string(), "-I");

        let mut t = Tableau { n: 1, rows: vec![p("X"), p("Z")] };
        assert_eq!(t.rowsum(0, 1), Err(TableauError::AnticommutingRows { h: 0, k: 1 }));
        assert_eq!(t.rowsum(0, 0), Err(TableauError::SameRow(0)));
    }

    #[test]
    fn measurement_examples() {
        let mut policy = OutcomePolicy::PlusOne;
        let mut t = Tableau::new_plus(1).unwrap();
        let m = t.measure(0, Basis::Z, &mut policy).unwrap();
        assert_eq!(m, Measurement { outcome: Outcome::Plus, deterministic: false });
        assert_eq!(stab_strings(&t), ["+Z"]);

        let mut t = Tableau::new_plus(1).unwrap();
        let m = t.measure(0, Basis::X, &mut policy).unwrap();
        assert_eq!(m, Measurement { outcome: Outcome::Plus, deterministic: true });
        assert_eq!(t, Tableau::new_plus(1).unwrap());

        let mut t = Tableau::new_plus(2).unwrap();
        t.apply(&Gate::Cz(0, 1)).unwrap();
        t.measure(0, Basis::Z, &mut policy).unwrap();
        assert_eq!(t.membership(&p("IX")).unwrap(), Membership::Present { same_sign: true });
        t.check_invariants().unwrap();
    }

    #[test]
    fn y_measurement_post_selects_plus_y() {
        let mut policy = OutcomePolicy::PlusOne;
        let mut t = Tableau::new_zero(1).unwrap();
        let m = t.measure(0, Basis::Y, &mut policy).unwrap();
        assert!(!m.deterministic);
        assert_eq!(stab_strings(&t), ["+Y"]);
        let again = t.measure(0, Basis::Y, &mut policy).unwrap();
        assert_eq!(again, Measurement { outcome: Outcome::Plus, deterministic: true });
    }

    #[test]
    fn deterministic_minus_outcome() {
        let mut t = Tableau::new_plus(1).unwrap();
        t.apply(&Gate::S(0)).unwrap();
        t.apply(&Gate::S(0)).unwrap();
        let m = t.measure(0, Basis::X, &mut OutcomePolicy::PlusOne).unwrap();
        assert_eq!(m, Measurement { outcome: Outcome::Minus, deterministic: true });
    }

    #[test]
    fn from_stabilizers_completes_destabilizers() {
        let t = Tableau::from_stabilizers(vec![p("XX"), p("ZZ")]).unwrap();
        t.check_invariants().unwrap();
        let t = Tableau::from_stabilizers(vec![p("XZZ"), p("ZXI"), p("ZIX")]).unwrap();
        t.check_invariants().unwrap();
        assert!(Tableau::from_stabilizers(vec![p("XI"), p("ZI")]).is_err());
        assert!(Tableau::from_stabilizers(vec![p("XI"), p("XI")]).is_err());
    }

    #[test]
    fn membership_signs() {
        let t = Tableau::from_stabilizers(vec![p("XX"), p("ZZ")]).unwrap();
        assert_eq!(t.membership(&p("-YY")).unwrap(), Membership::Present { same_sign: true });
        assert_eq!(t.membership(&p("YY")).unwrap(), Membership::Present { same_sign: false });
        assert_eq!(t.membership(&p("XI")).unwrap(), Membership::Absent);
    }

    #[test]
    fn parse_pauli_strings() {
        assert_eq!(p("-XYZI").to_string(), "-XYZI");
        assert_eq!(p("X_Z").to_string(), "+XIZ");
        assert!("".parse::<PauliRow>().is_err());
        assert!("+Q".parse::<PauliRow>().is_err());
    }
}
