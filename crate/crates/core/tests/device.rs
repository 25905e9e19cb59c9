mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use qidle::device::{
    flip_bits, outcome_distribution, outcome_distribution_mixed, sample_shots, CouplingGraph, SpamModel,
};
use qidle::qstate::{DensityMatrix, Pauli, PauliString};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `⟨ψ|⊗_r (I + (−1)^{b_r} P_r)/2|ψ⟩` from explicit Pauli matrices.
fn projector_probabilities(psi: &DVector<C64>, basis: &PauliString) -> Vec<f64> {
    let n = basis.len();
    (0..1usize << n)
        .map(|x| {
            let mut proj = DMatrix::<C64>::identity(1, 1);
            for (r, &letter) in basis.letters().iter().enumerate() {
                let sign = if (x >> (n - 1 - r)) & 1 == 1 { -1.0 } else { 1.0 };
                let p = PauliString::new(vec![letter]).matrix::<f64>();
                let local = (DMatrix::identity(2, 2) + p * Complex::new(sign, 0.0)) * Complex::new(0.5, 0.0);
                proj = proj.kronecker(&local);
            }
            (psi.adjoint() * proj * psi)[(0, 0)].re
        })
        .collect()
}

#[test]
fn born_distribution_matches_projectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for n in 1..=3 {
        let psi = random_statevector(n, &mut rng);
        let v = DVector::from_column_slice(psi.amplitudes());
        let rho = DensityMatrix::from_statevector(&psi);
        for basis in PauliString::enumerate(n, &[Pauli::X, Pauli::Y, Pauli::Z]) {
            let want = projector_probabilities(&v, &basis);
            let got = outcome_distribution(&psi, &basis, 0.0).unwrap();
            let mixed = outcome_distribution_mixed(&rho, &basis, 0.0).unwrap();
            for x in 0..want.len() {
                assert!((got[x] - want[x]).abs() < 1e-12);
                assert!((mixed[x] - want[x]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn readout_error_is_a_bit_flip_channel() {
    let psi = qidle::qstate::Statevector::<f64>::basis_state("01").unwrap();
    let d = outcome_distribution(&psi, &"ZZ".parse().unwrap(), 0.1).unwrap();
    let want = [0.1 * 0.9, 0.9 * 0.9, 0.1 * 0.1, 0.9 * 0.1];
    for (g, w) in d.iter().zip(want) {
        assert!((g - w).abs() < 1e-14);
    }
}

#[test]
fn shots_converge_to_born_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n_shots = 1_000_000u64;
    for basis in ["XY", "ZZ", "YZ"] {
        let psi = random_statevector(2, &mut rng);
        let basis: PauliString = basis.parse().unwrap();
        let born = outcome_distribution(&psi, &basis, 0.0).unwrap();
        let d = sample_shots(&psi, &basis, n_shots, &SpamModel::ideal(), &mut rng).unwrap();
        assert_eq!(d.n_shots(), n_shots);
        let dense = d.dense_counts();
        let tv: f64 = 0.5 * born.iter().zip(&dense).map(|(p, &c)| (p - c as f64 / n_shots as f64).abs()).sum::<f64>();
        assert!(tv <= 0.01, "{tv}");
        for (p, &c) in born.iter().zip(&dense) {
            let sigma = (n_shots as f64 * p * (1.0 - p)).sqrt().max(1.0);
            assert!((c as f64 - n_shots as f64 * p).abs() <= 5.0 * sigma);
        }
    }
}

#[test]
fn identical_seeds_give_identical_dictionaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let psi = random_statevector(3, &mut rng);
    let basis: PauliString = "XZY".parse().unwrap();
    let spam = SpamModel::new(0.0, 0.03).unwrap();
    let a = sample_shots(&psi, &basis, 5000, &spam, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let b = sample_shots(&psi, &basis, 5000, &spam, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn prep_flips_have_the_right_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let pattern = "0".repeat(50);
    let flips: usize = (0..2000)
        .map(|_| flip_bits(&pattern, 0.05, &mut rng).unwrap().bytes().filter(|&b| b == b'1').count())
        .sum();
    let rate = flips as f64 / 100_000.0;
    assert!((rate - 0.05).abs() < 0.003, "{rate}");
}

#[test]
fn falcon_degree_histogram() {
    let g = CouplingGraph::falcon27();
    let mut hist = [0usize; 4];
    (0..27).for_each(|q| hist[g.degree(q)] += 1);
    assert_eq!(hist, [0, 6, 13, 8]);
    assert_eq!((0..27).map(|q| g.degree(q)).sum::<usize>(), 2 * g.n_edges());
    assert_eq!(g.coordination_targets(3).len(), 8);
}

#[test]
fn unbounded_neighborhood_is_the_component() {
    let g = CouplingGraph::new(7, [(0, 1), (1, 2), (3, 4), (4, 5), (5, 3)]).unwrap();
    let (sub, relabel) = g.extract_neighborhood(4, usize::MAX).unwrap();
    assert_eq!(relabel.new_to_old[0], 4);
    let mut members = relabel.new_to_old.clone();
    members.sort_unstable();
    assert_eq!(members, vec![3, 4, 5]);
    assert_eq!(sub.n_edges(), 3);
    let (sub, relabel) = g.extract_neighborhood(6, usize::MAX).unwrap();
    assert_eq!((sub.n_qubits(), relabel.new_to_old), (1, vec![6]));
    let (full, _) = CouplingGraph::falcon27().extract_neighborhood(13, usize::MAX).unwrap();
    assert_eq!((full.n_qubits(), full.n_edges()), (27, 28));
}
