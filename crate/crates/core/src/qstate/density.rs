use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::{bit_at, validate_register_subset, PauliString, Statevector};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Unit-trace Hermitian operator on an `M`-qubit register.
///
/// Construction checks Hermiticity and trace to [`Real::tol`]; positivity is
/// not required (raw tomograms can have negative eigenvalues) and is recorded
/// in [`DensityMatrix::is_physical`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    n_qubits: usize,
    data: DMatrix<Complex<T>>,
    physical: bool,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(data: DMatrix<Complex<T>>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if !rows.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(rows));
        }
        let deviation = hermitian_deviation(&data);
        if deviation > T::tol() {
            return Err(Error::NotHermitian(deviation.as_f64()));
        }
        let trace = data.trace();
        if (trace.re - T::one()).abs() > T::tol() || trace.im.abs() > T::tol() {
            return Err(Error::TraceNotOne(trace.re.as_f64()));
        }
        let min_eig = hermitian_eigenvalues(&data)
            .into_iter()
            .fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
        Ok(Self {
            n_qubits: rows.trailing_zeros() as usize,
            data,
            physical: min_eig >= -T::tol(),
        })
    }

    pub fn from_statevector(psi: &Statevector<T>) -> Self {
        let amps = DVector::from_column_slice(psi.amplitudes());
        let data = &amps * amps.adjoint();
        Self { n_qubits: psi.n_qubits(), data, physical: true }
    }

    /// Computational basis projector `|bits⟩⟨bits|`.
    pub fn basis_state(bits: &str) -> Result<Self> {
        Ok(Self::from_statevector(&Statevector::basis_state(bits)?))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        let p = T::one() / T::from_usize(dim).unwrap();
        Self {
            n_qubits,
            data: DMatrix::from_diagonal_element(dim, dim, Complex::new(p, T::zero())),
            physical: true,
        }
    }

    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&d| Complex::new(d, T::zero())));
        Self::new(DMatrix::from_diagonal(&v))
    }

    /// `Σ_j w_j |v_j⟩⟨v_j|` for orthonormal columns `vectors`; unchecked beyond `new`.
    pub fn from_spectrum(weights: &[T], vectors: &DMatrix<Complex<T>>) -> Result<Self> {
        let dim = vectors.nrows();
        let mut data = DMatrix::zeros(dim, dim);
        for (j, &w) in weights.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            let v = vectors.column(j);
            data += (v * v.adjoint()) * Complex::new(w, T::zero());
        }
        symmetrize(&mut data);
        Self::new(data)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.data
    }

    pub fn element(&self, row: usize, col: usize) -> Complex<T> {
        self.data[(row, col)]
    }

    pub fn is_physical(&self) -> bool {
        self.physical
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut values = hermitian_eigenvalues(&self.data);
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values
    }

    /// Eigenvalues (ascending) with the matching orthonormal eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<T>, DMatrix<Complex<T>>) {
        let eig = SymmetricEigen::new(self.data.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    /// Von Neumann entropy in bits.
    ///
    /// Eigenvalues in `[-tol, 0)` count as zero; anything more negative is rejected.
    pub fn von_neumann_entropy(&self) -> Result<T> {
        entropy_bits(&self.eigenvalues())
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        validate_register_subset(keep, self.n_qubits)?;
        let n = self.n_qubits;
        let env: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let kept_dim = 1usize << k;
        let env_dim = 1usize << env.len();
        let full_index = |kept: usize, rest: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                idx |= bit_at(kept, pos, k) << (n - 1 - q);
            }
            for (pos, &q) in env.iter().enumerate() {
                idx |= bit_at(rest, pos, env.len()) << (n - 1 - q);
            }
            idx
        };
        let mut out = DMatrix::zeros(kept_dim, kept_dim);
        for e in 0..env_dim {
            let rows: Vec<usize> = (0..kept_dim).map(|a| full_index(a, e)).collect();
            for (a, &ra) in rows.iter().enumerate() {
                for (b, &rb) in rows.iter().enumerate() {
                    out[(a, b)] += self.data[(ra, rb)];
                }
            }
        }
        let mut rho = Self { n_qubits: k, data: out, physical: true };
        if !self.physical {
            rho.physical = rho.check_physical_slow();
        }
        Ok(rho)
    }

    /// `Tr(ρ P)`, real for Hermitian `ρ`.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<T> {
        if p.len() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: p.len() });
        }
        let mask = p.flip_mask();
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..self.dim() {
            acc += self.data[(j, j ^ mask)] * p.phase::<T>(j);
        }
        Ok(acc.re)
    }

    /// `ρ ⊗ σ`, with `self` on the leading register positions.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            data: self.data.kronecker(&other.data),
            physical: self.physical && other.physical,
        }
    }

    /// Reorders qubits so that new position `r` holds old qubit `order[r]`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<Self> {
        validate_register_subset(order, self.n_qubits)?;
        if order.len() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: order.len() });
        }
        let n = self.n_qubits;
        let map = |new_idx: usize| -> usize {
            order.iter().enumerate().fold(0, |acc, (r, &old)| acc | (bit_at(new_idx, r, n) << (n - 1 - old)))
        };
        let old_of: Vec<usize> = (0..self.dim()).map(map).collect();
        let data = DMatrix::from_fn(self.dim(), self.dim(), |a, b| self.data[(old_of[a], old_of[b])]);
        Ok(Self { n_qubits: n, data, physical: self.physical })
    }

    /// `w·ρ + (1-w)·σ`.
    pub fn mix(&self, other: &Self, weight: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let w = Complex::new(weight, T::zero());
        let wc = Complex::new(T::one() - weight, T::zero());
        Self::new(self.data.map(|x| x * w) + other.data.map(|x| x * wc))
    }

    pub fn frobenius_distance(&self, other: &Self) -> T {
        (&self.data - &other.data).norm()
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> T {
        let diff = &self.data - &other.data;
        hermitian_eigenvalues(&diff).into_iter().map(|x| x.abs()).sum::<T>() / T::lit(2.0)
    }

    fn check_physical_slow(&self) -> bool {
        self.eigenvalues().first().is_none_or(|&m| m >= -T::tol())
    }
}

/// Entropy in bits of a probability vector, with the eigenvalue clamping rule of [`DensityMatrix::von_neumann_entropy`].
pub fn entropy_bits<T: Real>(values: &[T]) -> Result<T> {
    let ln2 = T::ln_2();
    let mut s = T::zero();
    for &v in values {
        if v < -T::tol() {
            return Err(Error::Aphysical(v.as_f64()));
        }
        if v > T::zero() {
            s -= v * v.ln() / ln2;
        }
    }
    Ok(s)
}

pub(crate) fn hermitian_deviation<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm_sqr().sqrt());
        }
    }
    worst
}

pub(crate) fn hermitian_eigenvalues<T: Real>(m: &DMatrix<Complex<T>>) -> Vec<T> {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()
}

/// Replaces `m` by `(m + m†)/2`.
pub(crate) fn symmetrize<T: Real>(m: &mut DMatrix<Complex<T>>) {
    let half = Complex::new(T::lit(0.5), T::zero());
    let sym = (&*m + m.adjoint()) * half;
    *m = sym;
}
