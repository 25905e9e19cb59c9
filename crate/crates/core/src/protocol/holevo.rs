use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qstate::DensityMatrix;
use crate::scalar::Real;

/// Message ensemble `{p_k, ρ_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet<T: Real> {
    entries: Vec<(T, DensityMatrix<T>)>,
}

impl<T: Real> Alphabet<T> {
    pub fn new(entries: Vec<(T, DensityMatrix<T>)>) -> Result<Self> {
        let Some((_, first)) = entries.first() else {
            return Err(Error::InvalidAlphabet("no messages".into()));
        };
        let dim = first.dim();
        if let Some((_, rho)) = entries.iter().find(|(_, rho)| rho.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: rho.dim() });
        }
        if let Some(&(p, _)) = entries.iter().find(|(p, _)| *p < T::zero() || !p.is_finite()) {
            return Err(Error::InvalidProbability(p.as_f64()));
        }
        let total: T = entries.iter().map(|(p, _)| *p).sum();
        if (total - T::one()).abs() > T::lit(1e-12).max(T::tol() * T::lit(1e-2)) {
            return Err(Error::InvalidAlphabet(format!("probabilities sum to {total}")));
        }
        Ok(Self { entries })
    }

    /// Two equiprobable messages.
    pub fn binary(rho0: DensityMatrix<T>, rho1: DensityMatrix<T>) -> Result<Self> {
        let half = T::lit(0.5);
        Self::new(vec![(half, rho0), (half, rho1)])
    }

    pub fn entries(&self) -> &[(T, DensityMatrix<T>)] {
        &self.entries
    }

    /// `Σ_k p_k ρ_k`.
    pub fn average_state(&self) -> Result<DensityMatrix<T>> {
        let dim = self.entries[0].1.dim();
        let mut sum = DMatrix::<Complex<T>>::zeros(dim, dim);
        for (p, rho) in &self.entries {
            sum += rho.matrix() * Complex::new(*p, T::zero());
        }
        DensityMatrix::new(sum)
    }
}

/// `χ = S(Σ p_k ρ_k) − Σ p_k S(ρ_k)`, in bits.
pub fn holevo<T: Real>(alphabet: &Alphabet<T>) -> Result<T> {
    let mut conditional = T::zero();
    for (p, rho) in alphabet.entries() {
        conditional += *p * rho.von_neumann_entropy()?;
    }
    Ok(alphabet.average_state()?.von_neumann_entropy()? - conditional)
}

/// Holevo quantities of the target alone and of the whole register.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaChi<T> {
    pub chi_s: T,
    pub chi_sq: T,
    /// `chi_sq − chi_s`.
    pub delta: T,
}

/// `Δχ = χ^{SQ} − χ^{S}` for the equiprobable pair `(ρ_0, ρ_1)`.
///
/// `χ^{S}` uses the reduced states of the qubit at `target_position`.
pub fn delta_chi<T: Real>(
    rho0: &DensityMatrix<T>,
    rho1: &DensityMatrix<T>,
    target_position: usize,
) -> Result<DeltaChi<T>> {
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch { expected: rho0.dim(), found: rho1.dim() });
    }
    let chi_sq = holevo(&Alphabet::binary(rho0.clone(), rho1.clone())?)?;
    let s0 = rho0.partial_trace(&[target_position])?;
    let s1 = rho1.partial_trace(&[target_position])?;
    let chi_s = holevo(&Alphabet::binary(s0, s1)?)?;
    Ok(DeltaChi { chi_s, chi_sq, delta: chi_sq - chi_s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::Statevector;

    fn plus() -> DensityMatrix<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = Statevector::new(vec![Complex::new(h, 0.0), Complex::new(h, 0.0)]).unwrap();
        DensityMatrix::from_statevector(&psi)
    }

    #[test]
    fn holevo_fixtures() {
        let zero = DensityMatrix::<f64>::basis_state("0").unwrap();
        let one = DensityMatrix::basis_state("1").unwrap();
        let chi = holevo(&Alphabet::binary(zero.clone(), one).unwrap()).unwrap();
        assert!((chi - 1.0).abs() < 1e-12);
        let chi = holevo(&Alphabet::binary(zero.clone(), zero.clone()).unwrap()).unwrap();
        assert!(chi.abs() < 1e-12);
        let chi = holevo(&Alphabet::binary(zero, plus()).unwrap()).unwrap();
        assert!((chi - 0.600_876_036_692_856_1).abs() < 1e-12, "{chi}");
    }

    #[test]
    fn alphabet_validation() {
        let zero = DensityMatrix::<f64>::basis_state("0").unwrap();
        let two = DensityMatrix::<f64>::basis_state("00").unwrap();
        assert!(Alphabet::new(vec![(0.6, zero.clone()), (0.6, zero.clone())]).is_err());
        assert!(Alphabet::new(vec![(-0.5, zero.clone()), (1.5, zero.clone())]).is_err());
        assert!(Alphabet::new(vec![(0.5, zero), (0.5, two)]).is_err());
        assert!(Alphabet::<f64>::new(Vec::new()).is_err());
    }

    #[test]
    fn localized_information() {
        let sigma = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        let r0 = DensityMatrix::<f64>::basis_state("0").unwrap().kron(&sigma);
        let r1 = DensityMatrix::basis_state("1").unwrap().kron(&sigma);
        let d = delta_chi(&r0, &r1, 0).unwrap();
        assert!((d.chi_s - 1.0).abs() < 1e-12);
        assert!((d.chi_sq - 1.0).abs() < 1e-12);
        assert!(d.delta.abs() < 1e-12);
    }

    #[test]
    fn complete_leakage() {
        let mixed = DensityMatrix::<f64>::maximally_mixed(1);
        let r0 = mixed.kron(&DensityMatrix::basis_state("0").unwrap());
        let r1 = mixed.kron(&DensityMatrix::basis_state("1").unwrap());
        let d = delta_chi(&r0, &r1, 0).unwrap();
        assert!(d.chi_s.abs() < 1e-12);
        assert!((d.chi_sq - 1.0).abs() < 1e-12);
        assert!((d.delta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let a = DensityMatrix::<f64>::basis_state("0").unwrap();
        let b = DensityMatrix::<f64>::basis_state("00").unwrap();
        assert!(matches!(delta_chi(&a, &b, 0), Err(Error::DimensionMismatch { .. })));
    }
}
