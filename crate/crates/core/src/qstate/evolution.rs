//! Idle dynamics of a register under a local spin Hamiltonian.
//!
//! `H = Σ_i (ω_i/2) Z_i + Σ_⟨ij⟩ (J_ij/2)(X_i X_j + Y_i Y_j) + Σ_⟨ij⟩ ζ_ij Z_i Z_j`
//!
//! The diagonal part is applied exactly as a phase; the exchange terms are
//! applied edge by edge in a symmetric (second-order) product formula.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::{PauliString, Statevector};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-call bound on the operator-norm error of the product formula.
pub const TROTTER_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling<T> {
    pub a: usize,
    pub b: usize,
    pub strength: T,
}

/// Hamiltonian on a register of `n_qubits`, all coefficients in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterHamiltonian<T> {
    pub n_qubits: usize,
    pub onsite: Vec<T>,
    pub exchange: Vec<Coupling<T>>,
    pub zz: Vec<Coupling<T>>,
}

impl<T: Real> RegisterHamiltonian<T> {
    pub fn idle(n_qubits: usize) -> Self {
        Self { n_qubits, onsite: vec![T::zero(); n_qubits], exchange: Vec::new(), zz: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.onsite.len() != self.n_qubits {
            return Err(Error::InvalidHamiltonian(format!(
                "{} onsite frequencies for {} qubits",
                self.onsite.len(),
                self.n_qubits
            )));
        }
        if let Some(w) = self.onsite.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidHamiltonian(format!("non-finite onsite frequency {w}")));
        }
        for c in self.exchange.iter().chain(&self.zz) {
            if c.a == c.b {
                return Err(Error::InvalidHamiltonian(format!("self-coupling on qubit {}", c.a)));
            }
            if c.a >= self.n_qubits || c.b >= self.n_qubits {
                return Err(Error::QubitOutOfRange { index: c.a.max(c.b), n_qubits: self.n_qubits });
            }
            if !c.strength.is_finite() {
                return Err(Error::InvalidHamiltonian(format!(
                    "non-finite coupling {} on ({}, {})",
                    c.strength, c.a, c.b
                )));
            }
        }
        Ok(())
    }

    /// Diagonal energy of basis state `index`.
    fn diagonal_energy(&self, index: usize) -> T {
        let n = self.n_qubits;
        let z = |q: usize| if (index >> (n - 1 - q)) & 1 == 0 { T::one() } else { -T::one() };
        let half = T::lit(0.5);
        let onsite: T = self.onsite.iter().enumerate().map(|(q, &w)| w * half * z(q)).sum();
        let zz: T = self.zz.iter().map(|c| c.strength * z(c.a) * z(c.b)).sum();
        onsite + zz
    }

    /// Norm of the part of the diagonal Hamiltonian that fails to commute with edge `e`'s exchange.
    ///
    /// `(ω_a+ω_b)(Z_a+Z_b)/4` and `ζ_ab Z_a Z_b` commute with the exchange on
    /// `(a, b)`; what is left is the detuning and the other `ZZ` terms
    /// touching `a` or `b`.
    fn diagonal_leverage(&self, e: &Coupling<T>) -> T {
        let detuning = (self.onsite[e.a] - self.onsite[e.b]).abs() * T::lit(0.5);
        let zz: T = self
            .zz
            .iter()
            .filter(|f| {
                let same = (f.a == e.a && f.b == e.b) || (f.a == e.b && f.b == e.a);
                !same && (f.a == e.a || f.a == e.b || f.b == e.a || f.b == e.b)
            })
            .map(|f| f.strength.abs())
            .sum();
        detuning + zz
    }

    /// Constant `C` in the one-step error bound `C δ³` of the symmetric product formula.
    ///
    /// Nested-commutator bound for the second-order formula with terms
    /// ordered as `(diagonal, edge_1, …, edge_K)`:
    /// `Σ_γ ‖[R_γ,[R_γ,H_γ]]‖/12 + ‖[H_γ,[H_γ,R_γ]]‖/24`, with `R_γ` the sum
    /// of later terms. Each commutator is bounded using locality: exchange on
    /// an edge (norm `|J|`) only fails to commute with terms sharing a qubit.
    fn error_constant(&self) -> T {
        let two = T::lit(2.0);
        let j_total: T = self.exchange.iter().map(|c| c.strength.abs()).sum();
        let mut diag_inner = T::zero();
        let mut diag_outer = T::zero();
        for e in &self.exchange {
            let alpha = self.diagonal_leverage(e);
            let j = e.strength.abs();
            // ‖[A,B_e]‖ ≤ 2αJ, ‖[A,[A,B_e]]‖ ≤ 4α²J, ‖[B,[B,A]]‖ ≤ 2‖B‖·Σ 2αJ
            diag_inner += two * alpha * j;
            diag_outer += two * two * alpha * alpha * j;
        }
        let mut c = (two * j_total * diag_inner) / T::lit(12.0) + diag_outer / T::lit(24.0);
        for (k, e) in self.exchange.iter().enumerate() {
            let shares = |f: &Coupling<T>| f.a == e.a || f.a == e.b || f.b == e.a || f.b == e.b;
            let later: T = self.exchange[k + 1..].iter().filter(|f| shares(f)).map(|f| f.strength.abs()).sum();
            let j = e.strength.abs();
            let inner = two * later * j;
            c += two * j_total * inner / T::lit(12.0) + two * j * inner / T::lit(24.0);
        }
        c
    }

    /// Number of symmetric product-formula steps keeping the error below [`TROTTER_TOLERANCE`].
    ///
    /// With step `δ = t/n` the accumulated error is at most `C t³ / n²`.
    pub fn trotter_steps(&self, t: T) -> usize {
        if self.exchange.is_empty() {
            return 1;
        }
        let ct3 = self.error_constant().as_f64() * t.abs().as_f64().powi(3);
        let n = (ct3 / TROTTER_TOLERANCE).sqrt().ceil();
        (n as usize).max(1)
    }

    /// Dense matrix, for small registers and tests.
    pub fn matrix(&self) -> DMatrix<Complex<T>> {
        let n = self.n_qubits;
        let dim = 1usize << n;
        let mut h = DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                Complex::new(self.diagonal_energy(r), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        for c in &self.exchange {
            let half = Complex::new(c.strength * T::lit(0.5), T::zero());
            for letters in ["XX", "YY"] {
                let mut s = vec!['I'; n];
                s[c.a] = letters.as_bytes()[0] as char;
                s[c.b] = letters.as_bytes()[1] as char;
                let p: PauliString = s.into_iter().collect::<String>().parse().expect("valid letters");
                h += p.matrix::<T>() * half;
            }
        }
        h
    }
}

/// `exp(-iHt) ψ` by symmetric Trotter splitting.
pub fn evolve_statevector<T: Real>(
    psi: &Statevector<T>,
    hamiltonian: &RegisterHamiltonian<T>,
    t: T,
) -> Result<Statevector<T>> {
    hamiltonian.validate()?;
    if hamiltonian.n_qubits != psi.n_qubits() {
        return Err(Error::DimensionMismatch { expected: psi.n_qubits(), found: hamiltonian.n_qubits });
    }
    let mut out = psi.clone();
    let steps = hamiltonian.trotter_steps(t);
    let dt = t / T::from_usize(steps).unwrap();
    let half_dt = dt * T::lit(0.5);
    let n = hamiltonian.n_qubits;

    let phases = |tau: T| -> Vec<Complex<T>> {
        (0..psi.dim())
            .map(|j| {
                let theta = -hamiltonian.diagonal_energy(j) * tau;
                Complex::new(theta.cos(), theta.sin())
            })
            .collect()
    };
    let half_phase = phases(half_dt);
    let full_phase = phases(dt);
    let edges: Vec<(usize, usize, T, T)> = hamiltonian
        .exchange
        .iter()
        .map(|c| {
            let mask_a = 1usize << (n - 1 - c.a);
            let mask_b = 1usize << (n - 1 - c.b);
            let theta = c.strength * half_dt;
            (mask_a, mask_b, theta.cos(), theta.sin())
        })
        .collect();

    let amps = out.amplitudes_mut();
    apply_phase(amps, &half_phase);
    for step in 0..steps {
        for &edge in &edges {
            apply_exchange(amps, edge);
        }
        for &edge in edges.iter().rev() {
            apply_exchange(amps, edge);
        }
        if step + 1 == steps {
            apply_phase(amps, &half_phase);
        } else {
            apply_phase(amps, &full_phase);
        }
    }
    Ok(out)
}

fn apply_phase<T: Real>(amps: &mut [Complex<T>], phase: &[Complex<T>]) {
    for (a, p) in amps.iter_mut().zip(phase) {
        *a *= p;
    }
}

/// `exp(-iθ(|01⟩⟨10| + |10⟩⟨01|))` on the pair picked out by the two masks.
fn apply_exchange<T: Real>(amps: &mut [Complex<T>], (mask_a, mask_b, cos, sin): (usize, usize, T, T)) {
    let minus_i_sin = Complex::new(T::zero(), -sin);
    let c = Complex::new(cos, T::zero());
    for j in 0..amps.len() {
        // visit each |..0_a..1_b..⟩ once, paired with |..1_a..0_b..⟩
        if j & mask_a == 0 && j & mask_b != 0 {
            let k = j ^ mask_a ^ mask_b;
            let (x, y) = (amps[j], amps[k]);
            amps[j] = c * x + minus_i_sin * y;
            amps[k] = c * y + minus_i_sin * x;
        }
    }
}
