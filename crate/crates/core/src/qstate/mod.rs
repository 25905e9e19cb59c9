//! Dense linear algebra for small qubit registers.
//!
//! Register position 0 is the leftmost letter of a [`PauliString`], the
//! leftmost character of a bitstring, and the most significant bit of a
//! computational basis index.

mod density;
mod evolution;
mod pauli;
mod statevector;

pub use density::{entropy_bits, DensityMatrix};
pub use evolution::{evolve_statevector, Coupling, RegisterHamiltonian, TROTTER_TOLERANCE};
pub use pauli::{Pauli, PauliString};
pub use statevector::{format_bitstring, parse_bitstring, Statevector};

use crate::error::{Error, Result};

/// Bit of `index` at register position `pos` in an `n`-bit register.
#[inline]
pub(crate) fn bit_at(index: usize, pos: usize, n: usize) -> usize {
    (index >> (n - 1 - pos)) & 1
}

pub(crate) fn validate_register_subset(indices: &[usize], n_qubits: usize) -> Result<()> {
    for (i, &q) in indices.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        if indices[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}
