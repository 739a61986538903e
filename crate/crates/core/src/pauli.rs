//! Phase-free Pauli symbols and vectors.
//!
//! A symbol is stored by its symplectic pair `(x, z)`: `I=(0,0)`, `X=(1,0)`,
//! `Z=(0,1)`, `Y=(1,1)`. Products are componentwise XOR of the pairs and the
//! commutation form is the symplectic inner product, so no phase is ever
//! tracked.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::BitVec;

/// A single-qubit Pauli up to phase.
///
/// Ordering follows `I < X < Y < Z`, which is also the tie-breaking order used
/// by the hard decision of the decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Pauli {
    #[default]
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// The three non-identity symbols in tie-breaking order.
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    #[inline]
    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }

    #[inline]
    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    /// Phase-free product.
    #[inline]
    pub fn mul(self, other: Pauli) -> Pauli {
        Pauli::from_bits(self.x_bit() ^ other.x_bit(), self.z_bit() ^ other.z_bit())
    }

    /// `true` iff the two symbols anticommute.
    #[inline]
    pub fn anticommutes(self, other: Pauli) -> bool {
        (self.x_bit() & other.z_bit()) ^ (self.z_bit() & other.x_bit())
    }

    /// Index into `{X, Y, Z}` arrays; `None` for the identity.
    #[inline]
    pub fn slot(self) -> Option<usize> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(0),
            Pauli::Y => Some(1),
            Pauli::Z => Some(2),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A length-`n` string of Pauli symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliVector(Vec<Pauli>);

impl PauliVector {
    pub fn identity(n: usize) -> Self {
        PauliVector(vec![Pauli::I; n])
    }

    pub fn from_symbols(symbols: Vec<Pauli>) -> Self {
        PauliVector(symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Pauli] {
        &self.0
    }

    pub fn symbols_mut(&mut self) -> &mut [Pauli] {
        &mut self.0
    }

    pub fn get(&self, j: usize) -> Pauli {
        self.0[j]
    }

    pub fn set(&mut self, j: usize, p: Pauli) {
        self.0[j] = p;
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| !p.is_identity()).count()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|p| p.is_identity())
    }

    /// Componentwise phase-free product.
    pub fn product(&self, other: &PauliVector) -> Result<PauliVector> {
        check_len(self.len(), other.len())?;
        Ok(PauliVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a.mul(*b)).collect(),
        ))
    }

    /// In-place product `self := self · other`.
    pub fn mul_assign(&mut self, other: &PauliVector) -> Result<()> {
        check_len(self.len(), other.len())?;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = a.mul(*b);
        }
        Ok(())
    }

    /// The bilinear form `*`: 1 iff the operators anticommute.
    pub fn bilinear(&self, other: &PauliVector) -> Result<bool> {
        check_len(self.len(), other.len())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(false, |acc, (a, b)| acc ^ a.anticommutes(*b)))
    }

    /// Symplectic image `(x_1..x_n | z_1..z_n)`.
    pub fn to_symplectic(&self) -> BitVec {
        let n = self.len();
        let mut v = BitVec::zeros(2 * n);
        for (j, p) in self.0.iter().enumerate() {
            if p.x_bit() {
                v.set(j, true);
            }
            if p.z_bit() {
                v.set(n + j, true);
            }
        }
        v
    }

    pub fn from_symplectic(v: &BitVec) -> Result<PauliVector> {
        if v.len() % 2 != 0 {
            return Err(Error::usage("symplectic vector must have even length"));
        }
        let n = v.len() / 2;
        Ok(PauliVector(
            (0..n).map(|j| Pauli::from_bits(v.get(j), v.get(n + j))).collect(),
        ))
    }

    /// Concatenate round vectors into one.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a PauliVector>) -> PauliVector {
        PauliVector(parts.into_iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    /// Split into consecutive blocks of length `n`.
    pub fn split_blocks(&self, n: usize) -> Result<Vec<PauliVector>> {
        if n == 0 || self.len() % n != 0 {
            return Err(Error::usage(format!(
                "length {} is not a multiple of block size {}",
                self.len(),
                n
            )));
        }
        Ok(self.0.chunks(n).map(|c| PauliVector(c.to_vec())).collect())
    }
}

impl From<Vec<Pauli>> for PauliVector {
    fn from(v: Vec<Pauli>) -> Self {
        PauliVector(v)
    }
}

impl fmt::Display for PauliVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::parse(0, format!("invalid Pauli character {c:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliVector)
    }
}

/// An error candidate `(E, e)` over the mixed alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MixedVector {
    pub pauli: PauliVector,
    pub bits: Vec<bool>,
}

impl MixedVector {
    pub fn new(pauli: PauliVector, bits: Vec<bool>) -> Self {
        MixedVector { pauli, bits }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        MixedVector {
            pauli: PauliVector::identity(n),
            bits: vec![false; m],
        }
    }

    /// Combined weight of the Pauli part and the bit part.
    pub fn weight(&self) -> usize {
        self.pauli.weight() + self.bits.iter().filter(|b| **b).count()
    }

    /// `(E,e)*(F,f) = E*F + e·f mod 2`.
    pub fn bilinear(&self, other: &MixedVector) -> Result<bool> {
        check_len(self.bits.len(), other.bits.len())?;
        let dot = self
            .bits
            .iter()
            .zip(&other.bits)
            .fold(false, |acc, (a, b)| acc ^ (*a & *b));
        Ok(self.pauli.bilinear(&other.pauli)? ^ dot)
    }
}

impl fmt::Display for MixedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.pauli, format_bits(&self.bits))
    }
}

/// Render bits as a `0`/`1` string.
pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

/// Parse a `0`/`1` string.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::parse(0, format!("invalid bit character {c:?}"))),
        })
        .collect()
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}
