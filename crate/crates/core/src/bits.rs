//! Packed GF(2) row vectors.

use std::fmt;

const WORD: usize = 64;

/// Fixed-length bit vector over GF(2), packed into `u64` words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(WORD)] }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut row = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            row.set(i, b);
        }
        row
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the bitwise AND of two rows.
    pub fn dot(&self, other: &BitRow) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// True iff every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitRow) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn swap_bits(&mut self, i: usize, j: usize) {
        let (a, b) = (self.get(i), self.get(j));
        self.set(i, b);
        self.set(j, a);
    }

    /// New row holding the bits at `positions`, in that order.
    pub fn select(&self, positions: &[usize]) -> BitRow {
        BitRow::from_bits(positions.iter().map(|&p| self.get(p)))
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Solve `rows · v = rhs` over GF(2), where `rows` are the equations.
///
/// Returns one solution (free variables set to zero) or `None` if the system
/// is inconsistent.
pub fn solve(rows: &[BitRow], rhs: &[bool], width: usize) -> Option<BitRow> {
    let mut m: Vec<(BitRow, bool)> = rows.iter().cloned().zip(rhs.iter().copied()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..m.len()).find(|&i| m[i].0.get(c)) else {
            continue;
        };
        m.swap(r, p);
        let (pivot_row, pivot_rhs) = m[r].clone();
        for (i, (row, b)) in m.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor_assign(&pivot_row);
                *b ^= pivot_rhs;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|(_, b)| *b) {
        return None;
    }
    let mut v = BitRow::zeros(width);
    for (i, &c) in pivots.iter().enumerate() {
        v.set(c, m[i].1);
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_across_words() {
        let mut b = BitRow::zeros(130);
        b.set(0, true);
        b.set(64, true);
        b.set(129, true);
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(b.first_one(), Some(0));
        b.flip(0);
        assert_eq!(b.first_one(), Some(64));
        assert_eq!(b.count_ones(), 2);
    }

    #[test]
    fn dot_and_subset() {
        let a = BitRow::from_bits([true, true, false]);
        let b = BitRow::from_bits([true, false, true]);
        assert!(a.dot(&b));
        assert!(!a.dot(&BitRow::from_bits([true, true, false])));
        assert!(BitRow::from_bits([true, false, false]).is_subset_of(&a));
        assert!(!b.is_subset_of(&a));
    }

    #[test]
    fn solve_small_system() {
        // x0 + x1 = 1, x1 + x2 = 0, x2 = 1
        let rows = vec![
            BitRow::from_bits([true, true, false]),
            BitRow::from_bits([false, true, true]),
            BitRow::from_bits([false, false, true]),
        ];
        let v = solve(&rows, &[true, false, true], 3).unwrap();
        assert_eq!(v, BitRow::from_bits([false, true, true]));
        let bad = vec![BitRow::from_bits([true]), BitRow::from_bits([true])];
        assert!(solve(&bad, &[true, false], 1).is_none());
    }
}
