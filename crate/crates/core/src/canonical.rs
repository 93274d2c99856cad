//! Canonical (minimal-support) form of stabilizer tableaus, group equality
//! and extraction of the state held on a subset of qubits.
//!
//! The stabilizer block is brought to fully reduced row-echelon form over
//! the column order `x_0..x_{n-1}, z_0..z_{n-1}`: first the X block is
//! eliminated, then the rows with no X part are eliminated on the Z block.
//! Every stabilizer row operation `S_m ← S_r · S_m` is paired with
//! `D_r ← D_m · D_r` on the destabilizers so the tableau stays valid. The
//! reduced row-echelon basis of a subspace is unique, and the group fixes the
//! sign of each basis element, so two tableaus generate the same signed group
//! exactly when their reduced stabilizer blocks are identical.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tableau::{Membership, PauliRow, Tableau, TableauError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("stabilizer generators are not independent")]
    RankDeficient,
    #[error("tableaus have different sizes ({left} vs {right} qubits)")]
    DimensionMismatch { left: usize, right: usize },
    #[error("outputs are entangled with the rest of the register: {found} of {needed} generators are supported on the outputs")]
    EntangledOutputs { needed: usize, found: usize },
    #[error("invalid output list: {0}")]
    BadOutputs(String),
}

/// Whether stabilizer signs take part in a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonMode {
    Strict,
    /// Signs ignored: states equal up to a Pauli byproduct.
    #[default]
    Unsigned,
}

impl std::str::FromStr for ComparisonMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(ComparisonMode::Strict),
            "unsigned" => Ok(ComparisonMode::Unsigned),
            other => Err(format!("unknown comparison mode {other:?}")),
        }
    }
}

/// Returns the canonical form of `t`.
pub fn reduce(t: &Tableau) -> Result<Tableau, CanonicalError> {
    let mut t = t.clone();
    reduce_in_place(&mut t)?;
    Ok(t)
}

pub fn reduce_in_place(t: &mut Tableau) -> Result<(), CanonicalError> {
    let n = t.num_qubits();
    let mut r = 0;
    // X block first; afterwards rows r..n have no X part, so the Z pass only
    // pivots on pure-Z rows but clears its pivot columns from every row.
    for block in [Block::X, Block::Z] {
        for c in 0..n {
            if r == n {
                break;
            }
            let Some(i) = (r..n).find(|&i| block.bit(&t.rows()[n + i], c)) else {
                continue;
            };
            if i != r {
                t.swap_rows(r, i);
                t.swap_rows(n + r, n + i);
            }
            for m in 0..n {
                if m != r && block.bit(&t.rows()[n + m], c) {
                    t.rowsum(n + m, n + r)?;
                    t.rowsum_lossy(r, m);
                }
            }
            r += 1;
        }
    }
    if r < n {
        return Err(CanonicalError::RankDeficient);
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Block {
    X,
    Z,
}

impl Block {
    fn bit(self, row: &PauliRow, c: usize) -> bool {
        match self {
            Block::X => row.x.get(c),
            Block::Z => row.z.get(c),
        }
    }
}

/// True iff both tableaus stabilize the same state (up to stabilizer signs
/// in [`ComparisonMode::Unsigned`]).
pub fn groups_equal(a: &Tableau, b: &Tableau, mode: ComparisonMode) -> Result<bool, CanonicalError> {
    if a.num_qubits() != b.num_qubits() {
        return Err(CanonicalError::DimensionMismatch { left: a.num_qubits(), right: b.num_qubits() });
    }
    let (ra, rb) = (reduce(a)?, reduce(b)?);
    Ok(ra.stabilizers().iter().zip(rb.stabilizers()).all(|(p, q)| {
        p.x == q.x && p.z == q.z && (mode == ComparisonMode::Unsigned || p.sign == q.sign)
    }))
}

/// First canonical generator of `candidate` that `reference` does not
/// contain (with matching sign in strict mode).
pub fn missing_generator(
    candidate: &Tableau,
    reference: &Tableau,
    mode: ComparisonMode,
) -> Result<Option<PauliRow>, CanonicalError> {
    if candidate.num_qubits() != reference.num_qubits() {
        return Err(CanonicalError::DimensionMismatch {
            left: candidate.num_qubits(),
            right: reference.num_qubits(),
        });
    }
    for row in reduce(candidate)?.stabilizers() {
        match reference.membership(row)? {
            Membership::Absent => return Ok(Some(row.clone())),
            Membership::Present { same_sign: false } if mode == ComparisonMode::Strict => {
                return Ok(Some(row.clone()))
            }
            Membership::Present { .. } => {}
        }
    }
    Ok(None)
}

/// Tableau of the state held on `outputs`, columns in the given order.
///
/// Only meaningful when the outputs are in a product state with everything
/// else; otherwise fewer than `outputs.len()` canonical generators are
/// supported on them and [`CanonicalError::EntangledOutputs`] is returned.
pub fn extract_subsystem(t: &Tableau, outputs: &[usize]) -> Result<Tableau, CanonicalError> {
    let n = t.num_qubits();
    if outputs.is_empty() {
        return Err(CanonicalError::BadOutputs("no output qubits".into()));
    }
    let mut inside = vec![false; n];
    for &q in outputs {
        if q >= n {
            return Err(CanonicalError::BadOutputs(format!("qubit {q} out of range")));
        }
        if inside[q] {
            return Err(CanonicalError::BadOutputs(format!("qubit {q} listed twice")));
        }
        inside[q] = true;
    }
    let reduced = reduce(t)?;
    let rows: Vec<PauliRow> = reduced
        .stabilizers()
        .iter()
        .filter(|row| row.support().into_iter().all(|q| inside[q]))
        .map(|row| row.restrict(outputs))
        .collect();
    if rows.len() != outputs.len() {
        return Err(CanonicalError::EntangledOutputs { needed: outputs.len(), found: rows.len() });
    }
    Ok(Tableau::from_stabilizers(rows)?)
}
