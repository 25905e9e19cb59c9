mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use qidle::qstate::{
    evolve_statevector, Coupling, DensityMatrix, Pauli, PauliString, RegisterHamiltonian, Statevector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force partial trace by explicit enumeration of basis labels.
fn partial_trace_oracle(rho: &DensityMatrix<f64>, keep: &[usize]) -> DMatrix<C64> {
    let n = rho.n_qubits();
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let k = keep.len();
    let mut out = DMatrix::zeros(1 << k, 1 << k);
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            let traced_equal = (0..n).filter(|q| !keep.contains(q)).all(|q| bit(i, q) == bit(j, q));
            if !traced_equal {
                continue;
            }
            let a = keep.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
            let b = keep.iter().fold(0, |acc, &q| (acc << 1) | bit(j, q));
            out[(a, b)] += rho.element(i, j);
        }
    }
    out
}

#[test]
fn partial_trace_matches_index_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let rho = random_density(3, 8, &mut rng);
        for keep in [vec![0, 2], vec![2, 0], vec![1], vec![0, 1, 2], vec![2, 1, 0]] {
            let got = rho.partial_trace(&keep).unwrap();
            assert!(max_abs_diff(got.matrix(), &partial_trace_oracle(&rho, &keep)) < 1e-12);
            assert!((got.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn partial_trace_composes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let rho = random_density(4, 3, &mut rng);
        // trace out qubit 1, then (old) qubit 3, which sits at position 2 afterwards
        let step = rho.partial_trace(&[0, 2, 3]).unwrap().partial_trace(&[0, 1]).unwrap();
        let direct = rho.partial_trace(&[0, 2]).unwrap();
        assert!(max_abs_diff(step.matrix(), direct.matrix()) <= 1e-12);
    }
}

#[test]
fn statevector_reduction_agrees_with_density_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let psi = random_statevector(4, &mut rng);
    let full = DensityMatrix::from_statevector(&psi);
    for keep in [vec![0], vec![3, 1], vec![2, 0, 1]] {
        let a = psi.reduced_density_matrix(&keep).unwrap();
        let b = full.partial_trace(&keep).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
    }
}

#[test]
fn entropy_is_concave() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let a = random_density(n, rng.random_range(1..=1 << n), &mut rng);
        let b = random_density(n, rng.random_range(1..=1 << n), &mut rng);
        let mid = a.mix(&b, 0.5).unwrap();
        let lhs = mid.von_neumann_entropy().unwrap();
        let rhs = 0.5 * a.von_neumann_entropy().unwrap() + 0.5 * b.von_neumann_entropy().unwrap();
        assert!(lhs >= rhs - 1e-9);
        assert!(lhs <= n as f64 + 1e-12);
    }
}

#[test]
fn pauli_reconstruction_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in 1..=3 {
        let rho = random_density(m, 1 << m, &mut rng);
        let strings = PauliString::enumerate(m, &Pauli::ALL);
        let mut acc = DMatrix::<C64>::zeros(1 << m, 1 << m);
        for p in &strings {
            let e = rho.pauli_expectation(p).unwrap();
            assert!(e.abs() <= 1.0 + 1e-12);
            acc += p.matrix::<f64>() * Complex::new(e / (1 << m) as f64, 0.0);
        }
        assert!(max_abs_diff(&acc, rho.matrix()) < 1e-10);
    }
}

/// Dense `exp(-iHt)ψ` through a Hermitian eigendecomposition.
fn exact_evolution(h: &RegisterHamiltonian<f64>, psi: &Statevector<f64>, t: f64) -> Statevector<f64> {
    let eig = h.matrix().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        v.nrows(),
        eig.eigenvalues.iter().map(|&e| Complex::new((-e * t).cos(), (-e * t).sin())),
    );
    let coeffs = v.adjoint() * DVector::from_column_slice(psi.amplitudes());
    let out = v * coeffs.component_mul(&phases);
    Statevector::new(out.iter().copied().collect()).unwrap()
}

fn random_hamiltonian(n: usize, rng: &mut ChaCha8Rng) -> RegisterHamiltonian<f64> {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|q| (q - 1, q)).collect();
    if n >= 4 {
        edges.push((0, n - 1));
        edges.push((1, n / 2 + 1));
    }
    let onsite = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let exchange = edges.iter().map(|&(a, b)| Coupling { a, b, strength: rng.random_range(-1.0..1.0) }).collect();
    let zz = edges.iter().map(|&(a, b)| Coupling { a, b, strength: rng.random_range(-0.3..0.3) }).collect();
    RegisterHamiltonian { n_qubits: n, onsite, exchange, zz }
}

#[test]
fn trotter_matches_exact_diagonalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [2, 4, 6, 8] {
        let h = random_hamiltonian(n, &mut rng);
        let psi = random_statevector(n, &mut rng);
        let t = 1.3;
        let approx = evolve_statevector(&psi, &h, t).unwrap();
        let exact = exact_evolution(&h, &psi, t);
        let f = approx.fidelity(&exact).unwrap();
        assert!(f >= 1.0 - 1e-6, "n={n}: fidelity {f}");
        assert!((approx.norm() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn trotter_in_physical_units() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let two_pi = std::f64::consts::TAU;
    let n = 6;
    let mut h = random_hamiltonian(n, &mut rng);
    h.onsite.iter_mut().for_each(|w| *w *= two_pi * 1e6);
    h.exchange.iter_mut().for_each(|c| c.strength *= two_pi * 1e5);
    h.zz.iter_mut().for_each(|c| c.strength *= two_pi * 1e4);
    let psi = Statevector::basis_state("100000").unwrap();
    let t = 800e-9;
    let f = evolve_statevector(&psi, &h, t).unwrap().fidelity(&exact_evolution(&h, &psi, t)).unwrap();
    assert!(f >= 1.0 - 1e-6, "{f}");
}

#[test]
fn magnetization_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in [3, 5, 7] {
        let h = random_hamiltonian(n, &mut rng);
        let psi = random_statevector(n, &mut rng);
        let out = evolve_statevector(&psi, &h, 2.0).unwrap();
        assert!((out.total_magnetization() - psi.total_magnetization()).abs() <= 1e-8);
    }
}

#[test]
fn single_precision_paths() {
    let rho = DensityMatrix::<f32>::from_diagonal(&[0.75, 0.25]).unwrap();
    assert!((rho.von_neumann_entropy().unwrap() - 0.811_278_1).abs() < 1e-5);
    let h = RegisterHamiltonian::<f32> {
        n_qubits: 2,
        onsite: vec![0.0, 0.0],
        exchange: vec![Coupling { a: 0, b: 1, strength: 1.0 }],
        zz: Vec::new(),
    };
    let psi = Statevector::<f32>::basis_state("10").unwrap();
    let out = evolve_statevector(&psi, &h, std::f32::consts::FRAC_PI_2).unwrap();
    assert!(out.fidelity(&Statevector::basis_state("01").unwrap()).unwrap() > 1.0 - 1e-5);
}
