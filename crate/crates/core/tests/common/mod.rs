#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex;
use qidle::qstate::{DensityMatrix, Statevector};
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;

pub fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_statevector<R: Rng>(n_qubits: usize, rng: &mut R) -> Statevector<f64> {
    let mut amps: Vec<C64> = (0..1 << n_qubits).map(|_| gaussian(rng)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    Statevector::new(amps).unwrap()
}

/// `G G† / tr` for a Ginibre `G` with `rank` columns.
pub fn random_density<R: Rng>(n_qubits: usize, rank: usize, rng: &mut R) -> DensityMatrix<f64> {
    let dim = 1 << n_qubits;
    let g = DMatrix::from_fn(dim, rank, |_, _| gaussian(rng));
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * Complex::new(0.5, 0.0);
    DensityMatrix::new(rho).unwrap()
}

/// Random Hermitian traceless matrix with Frobenius norm `scale`.
pub fn random_traceless<R: Rng>(dim: usize, scale: f64, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let mut h = (&g + g.adjoint()) * Complex::new(0.5, 0.0);
    let shift = h.trace() / Complex::new(dim as f64, 0.0);
    for i in 0..dim {
        h[(i, i)] -= shift;
    }
    let norm = h.norm();
    h * Complex::new(scale / norm, 0.0)
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_spectrum(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}
