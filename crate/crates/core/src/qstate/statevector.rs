use nalgebra::DMatrix;
use num_complex::Complex;

use super::{bit_at, validate_register_subset, DensityMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pure state of an `M`-qubit register, unit 2-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T: Real> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> Statevector<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        if (norm - T::one()).abs() > T::tol() {
            return Err(Error::NotNormalized(norm.as_f64()));
        }
        Ok(Self { n_qubits: dim.trailing_zeros() as usize, amplitudes })
    }

    /// `|bits⟩`; character `r` is register position `r`.
    pub fn basis_state(bits: &str) -> Result<Self> {
        let index = parse_bitstring(bits)?;
        let n_qubits = bits.len();
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// `|⟨ψ|φ⟩|²`; insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Reduced density matrix on `keep` (in the given order) without forming `|ψ⟩⟨ψ|`.
    pub fn reduced_density_matrix(&self, keep: &[usize]) -> Result<DensityMatrix<T>> {
        validate_register_subset(keep, self.n_qubits)?;
        let n = self.n_qubits;
        let k = keep.len();
        let env: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let kept_dim = 1usize << k;
        let env_dim = 1usize << env.len();
        let mut kept_bits = vec![0usize; kept_dim];
        for (a, slot) in kept_bits.iter_mut().enumerate() {
            for (pos, &q) in keep.iter().enumerate() {
                *slot |= bit_at(a, pos, k) << (n - 1 - q);
            }
        }
        let mut out = DMatrix::zeros(kept_dim, kept_dim);
        for e in 0..env_dim {
            let mut env_bits = 0usize;
            for (pos, &q) in env.iter().enumerate() {
                env_bits |= bit_at(e, pos, env.len()) << (n - 1 - q);
            }
            for a in 0..kept_dim {
                let amp_a = self.amplitudes[kept_bits[a] | env_bits];
                if amp_a.norm_sqr() == T::zero() {
                    continue;
                }
                for b in 0..kept_dim {
                    out[(a, b)] += amp_a * self.amplitudes[kept_bits[b] | env_bits].conj();
                }
            }
        }
        super::density::symmetrize(&mut out);
        DensityMatrix::new(out)
    }

    /// Expectation of `Σ_i Z_i`.
    pub fn total_magnetization(&self) -> T {
        let n = self.n_qubits;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let ones = j.count_ones() as usize;
                a.norm_sqr() * T::from_usize(n).unwrap()
                    - a.norm_sqr() * T::from_usize(2 * ones).unwrap()
            })
            .sum()
    }
}

/// Parses a `0`/`1` bitstring into a basis index (first character most significant).
pub fn parse_bitstring(bits: &str) -> Result<usize> {
    if bits.len() > usize::BITS as usize - 1 {
        return Err(Error::InvalidBitstring(bits.to_string()));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidBitstring(bits.to_string())),
    })
}

/// Formats a basis index as an `n`-character bitstring.
pub fn format_bitstring(index: usize, n: usize) -> String {
    (0..n).map(|r| if bit_at(index, r, n) == 1 { '1' } else { '0' }).collect()
}
