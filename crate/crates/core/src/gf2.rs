//! Bit-packed GF(2) vectors and matrices.
//!
//! Rows are stored in `u64` words so rank computations and row-space
//! membership tests on a few hundred columns stay cheap enough to run once
//! per Monte Carlo trial.

use std::fmt;

use crate::error::{Error, Result};
use crate::pauli::PauliVector;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            if *b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in ones {
            v.toggle(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

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
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
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

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |i| self.get(*i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Dense GF(2) matrix, row-major.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct BinaryMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            rows: vec![BitVec::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BinaryMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitVec>, cols: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(BinaryMatrix { rows, cols })
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| {
                if r.len() != cols {
                    return Err(Error::LengthMismatch {
                        expected: cols,
                        found: r.len(),
                    });
                }
                Ok(BitVec::from_bools(
                    &r.iter().map(|b| *b != 0).collect::<Vec<_>>(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BinaryMatrix { rows, cols })
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value)
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(BitVec::count_ones).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for r in &self.rows {
            for j in r.ones() {
                w[j] += 1;
            }
        }
        w
    }

    /// Sparse view: the set column indices of each row.
    pub fn row_supports(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(|r| r.ones().collect()).collect()
    }

    /// `self · v` over GF(2).
    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = BitVec::zeros(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            if r.dot(v) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != other.nrows() {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows(),
                self.cols,
                other.nrows(),
                other.cols
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = BitVec::zeros(other.cols);
                for k in r.ones() {
                    acc.xor_assign(&other.rows[k]);
                }
                acc
            })
            .collect();
        Ok(BinaryMatrix {
            rows,
            cols: other.cols,
        })
    }

    pub fn rank(&self) -> usize {
        RowSpace::new(self.rows.clone(), self.cols).rank()
    }

    /// Swap two rows (used by fuzz tests).
    pub fn swap_rows(&mut self, a: usize, b: usize) {
        self.rows.swap(a, b);
    }

    /// `row[dst] += row[src]`.
    pub fn add_row(&mut self, dst: usize, src: usize) {
        let s = self.rows[src].clone();
        self.rows[dst].xor_assign(&s);
    }
}

/// Echelon basis of a row space, with the combination of input rows that
/// produced each basis vector.
#[derive(Clone, Debug)]
pub struct RowSpace {
    width: usize,
    input_rows: usize,
    basis: Vec<BitVec>,
    combos: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(rows: Vec<BitVec>, width: usize) -> Self {
        let input_rows = rows.len();
        let mut basis: Vec<BitVec> = Vec::new();
        let mut combos: Vec<BitVec> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        for (idx, row) in rows.into_iter().enumerate() {
            let mut v = row;
            let mut c = BitVec::zeros(input_rows);
            c.set(idx, true);
            for (k, p) in pivots.iter().enumerate() {
                if v.get(*p) {
                    v.xor_assign(&basis[k]);
                    c.xor_assign(&combos[k]);
                }
            }
            if let Some(p) = v.first_one() {
                // keep the basis fully reduced on pivot columns
                for k in 0..basis.len() {
                    if basis[k].get(p) {
                        basis[k].xor_assign(&v);
                        combos[k].xor_assign(&c);
                    }
                }
                basis.push(v);
                combos.push(c);
                pivots.push(p);
            }
        }
        RowSpace {
            width,
            input_rows,
            basis,
            combos,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Reduce `v` against the basis; returns the remainder and the input-row
    /// combination that was subtracted.
    fn reduce(&self, v: &BitVec) -> (BitVec, BitVec) {
        let mut r = v.clone();
        let mut c = BitVec::zeros(self.input_rows);
        for (k, p) in self.pivots.iter().enumerate() {
            if r.get(*p) {
                r.xor_assign(&self.basis[k]);
                c.xor_assign(&self.combos[k]);
            }
        }
        (r, c)
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        v.len() == self.width && self.reduce(v).0.is_zero()
    }

    /// Coefficients `c` over the input rows with `Σ c_i row_i = v`, if any.
    pub fn express(&self, v: &BitVec) -> Option<BitVec> {
        if v.len() != self.width {
            return None;
        }
        let (r, c) = self.reduce(v);
        r.is_zero().then_some(c)
    }
}

/// GF(2) matrix of symplectic images `(x | z)` of Pauli rows.
#[derive(Clone, Debug)]
pub struct SymplecticMatrix {
    n: usize,
    rows: BinaryMatrix,
}

impl SymplecticMatrix {
    pub fn from_paulis(n: usize, rows: &[PauliVector]) -> Result<Self> {
        let bits = rows
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        found: r.len(),
                    });
                }
                Ok(r.to_symplectic())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SymplecticMatrix {
            n,
            rows: BinaryMatrix::from_rows(bits, 2 * n)?,
        })
    }

    pub fn from_binary(n: usize, rows: BinaryMatrix) -> Result<Self> {
        if rows.ncols() != 2 * n {
            return Err(Error::LengthMismatch {
                expected: 2 * n,
                found: rows.ncols(),
            });
        }
        Ok(SymplecticMatrix { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn binary(&self) -> &BinaryMatrix {
        &self.rows
    }

    pub fn binary_mut(&mut self) -> &mut BinaryMatrix {
        &mut self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn row_pauli(&self, i: usize) -> PauliVector {
        PauliVector::from_symplectic(self.rows.row(i)).expect("even width")
    }

    pub fn row_space(&self) -> RowSpace {
        RowSpace::new(self.rows.rows().to_vec(), 2 * self.n)
    }
}

/// GF(2) rank of a symplectic matrix.
pub fn symplectic_rank(m: &SymplecticMatrix) -> usize {
    m.binary().rank()
}

/// Whether the symplectic image of `v` lies in the row space of `m`.
pub fn in_row_space(m: &SymplecticMatrix, v: &PauliVector) -> Result<bool> {
    if v.len() != m.n() {
        return Err(Error::LengthMismatch {
            expected: m.n(),
            found: v.len(),
        });
    }
    Ok(m.row_space().contains(&v.to_symplectic()))
}
