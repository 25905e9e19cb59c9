use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const MEASURABLE: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidPauli(other)),
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

/// Tensor product of single-qubit Paulis. Letter `r` acts on register position `r`,
/// which is the most significant bit of the computational basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(vec![Pauli::I; n_qubits])
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn has_identity(&self) -> bool {
        self.letters.contains(&Pauli::I)
    }

    /// Every string over `alphabet` of length `n`, in lexicographic order of `alphabet`.
    pub fn enumerate(n: usize, alphabet: &[Pauli]) -> Vec<PauliString> {
        let mut out = vec![PauliString::new(Vec::with_capacity(n))];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    alphabet.iter().map(move |&p| {
                        let mut letters = prefix.letters.clone();
                        letters.push(p);
                        PauliString::new(letters)
                    })
                })
                .collect();
        }
        out
    }

    /// Whether the identity-free basis `basis` agrees with `self` at every non-identity letter.
    pub fn is_consistent_with(&self, basis: &PauliString) -> bool {
        self.len() == basis.len()
            && self
                .letters
                .iter()
                .zip(&basis.letters)
                .all(|(&s, &b)| s == Pauli::I || s == b)
    }

    /// Bit mask of the positions this string flips (X or Y), in basis-index convention.
    pub fn flip_mask(&self) -> usize {
        let n = self.len();
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| p.flips())
            .fold(0, |mask, (r, _)| mask | (1 << (n - 1 - r)))
    }

    /// Phase `φ` with `P|j⟩ = φ |j ⊕ flip_mask⟩`.
    pub fn phase<T: Real>(&self, index: usize) -> Complex<T> {
        let n = self.len();
        // phase = i^{#Y} * (-1)^{#(Y or Z) letters acting on a set bit}
        let mut n_y = 0usize;
        let mut negate = false;
        for (r, &p) in self.letters.iter().enumerate() {
            let bit = (index >> (n - 1 - r)) & 1 == 1;
            match p {
                Pauli::Y => {
                    n_y += 1;
                    negate ^= bit;
                }
                Pauli::Z => negate ^= bit,
                _ => {}
            }
        }
        let (re, im) = match n_y % 4 {
            0 => (T::one(), T::zero()),
            1 => (T::zero(), T::one()),
            2 => (-T::one(), T::zero()),
            _ => (T::zero(), -T::one()),
        };
        let c = Complex::new(re, im);
        if negate {
            -c
        } else {
            c
        }
    }

    /// Dense `2^M × 2^M` matrix.
    pub fn matrix<T: Real>(&self) -> DMatrix<Complex<T>> {
        let dim = 1usize << self.len();
        let mask = self.flip_mask();
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            m[(j ^ mask, j)] = self.phase(j);
        }
        m
    }

    /// Drop the letters at the given positions.
    pub fn without_positions(&self, drop: &[usize]) -> PauliString {
        PauliString::new(
            self.letters
                .iter()
                .enumerate()
                .filter(|(r, _)| !drop.contains(r))
                .map(|(_, &p)| p)
                .collect(),
        )
    }

    pub fn identity_positions(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == Pauli::I)
            .map(|(r, _)| r)
            .collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars().map(Pauli::from_char).collect::<Result<Vec<_>>>().map(PauliString::new)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
