//! Phase-free Pauli strings.
//!
//! A string over `n` qubits is stored as two bit-vectors, the X part and the
//! Z part, so that products are word-wise XORs and commutation is a parity of
//! the symplectic form. Global phases are never tracked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter, phase discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub const ALL: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    /// `(x, z)` symplectic bits.
    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    #[inline]
    pub fn mul(self, other: PauliLetter) -> PauliLetter {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        PauliLetter::from_bits(ax ^ bx, az ^ bz)
    }

    #[inline]
    pub fn commutes(self, other: PauliLetter) -> bool {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        !((ax & bz) ^ (az & bx))
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' | '_' => Some(PauliLetter::I),
            'X' | 'x' => Some(PauliLetter::X),
            'Y' | 'y' => Some(PauliLetter::Y),
            'Z' | 'z' => Some(PauliLetter::Z),
            _ => None,
        }
    }
}

impl fmt::Display for PauliLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Number of X, Y and Z letters in a string.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightCounts {
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
}

impl WeightCounts {
    pub fn total(&self) -> usize {
        self.n_x + self.n_y + self.n_z
    }
}

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let words = n.div_ceil(WORD);
        Self {
            n,
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    pub fn from_letters(letters: &[PauliLetter]) -> Self {
        let mut s = Self::identity(letters.len());
        for (i, &l) in letters.iter().enumerate() {
            s.set(i, l);
        }
        s
    }

    /// String with `letter` on each listed site and identity elsewhere.
    pub fn from_sites(n: usize, sites: &[usize], letter: PauliLetter) -> Self {
        let mut s = Self::identity(n);
        for &i in sites {
            s.set(i, letter);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> PauliLetter {
        assert!(i < self.n, "site {i} out of range for length {}", self.n);
        let (w, b) = (i / WORD, i % WORD);
        PauliLetter::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    #[inline]
    pub fn set(&mut self, i: usize, letter: PauliLetter) {
        assert!(i < self.n, "site {i} out of range for length {}", self.n);
        let (w, b) = (i / WORD, i % WORD);
        let (lx, lz) = letter.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((lx as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((lz as u64) << b);
    }

    pub fn letters(&self) -> impl Iterator<Item = PauliLetter> + '_ {
        (0..self.n).map(move |i| self.get(i))
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Letter-wise product with the global phase dropped.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    /// In-place product. Panics on length mismatch.
    pub fn mul_assign_unchecked(&mut self, other: &Self) {
        assert_eq!(self.n, other.n, "pauli string length mismatch");
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub fn commutes_unchecked(&self, other: &Self) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        parity == 0
    }

    pub fn weight_counts(&self) -> WeightCounts {
        let mut c = WeightCounts::default();
        for (&x, &z) in self.x.iter().zip(&self.z) {
            c.n_x += (x & !z).count_ones() as usize;
            c.n_y += (x & z).count_ones() as usize;
            c.n_z += (z & !x).count_ones() as usize;
        }
        c
    }

    /// Sites carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.get(i) != PauliLetter::I).collect()
    }
}

/// Free-function forms of the three core operations.
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    a.multiply(b)
}

pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.commutes(b)
}

pub fn weight_counts(a: &PauliString) -> WeightCounts {
    a.weight_counts()
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(|c| PauliLetter::from_char(c).ok_or_else(|| Error::Parse(format!("invalid pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_letters(&letters))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
