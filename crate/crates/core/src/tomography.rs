//! Full Pauli state tomography from shot dictionaries.
//!
//! All `3^M` identity-free bases are measured; every one of the `4^M` Pauli
//! expectations is then read off by pooling the bases that agree with it
//! outside its identity positions. Counts stay integral until the final
//! division, so expectations are exact rationals. The assembled estimate can
//! have negative eigenvalues and is mapped back onto the physical states by
//! the 2-norm projection in [`ml_rephysicalize`].

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::device::{outcome_distribution_mixed, sample_distribution, ShotDictionary, SpamModel};
use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, Pauli, PauliString};
use crate::scalar::Real;

/// Largest register tomographed unless configured otherwise (target plus three).
pub const DEFAULT_REGISTER_CAP: usize = 4;

/// The `3^M` measurement settings for a register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TomographyPlan {
    pub register: Vec<usize>,
    pub bases: Vec<PauliString>,
}

impl TomographyPlan {
    pub fn new(register: Vec<usize>) -> Self {
        let bases = PauliString::enumerate(register.len(), &Pauli::MEASURABLE);
        Self { register, bases }
    }

    pub fn n_qubits(&self) -> usize {
        self.register.len()
    }
}

/// Raw estimate `μ`, its rephysicalized projection `ρ`, and the eigenvalue map `μ_j ↦ ρ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tomogram<T: Real> {
    pub raw: DensityMatrix<T>,
    pub rephysicalized: DensityMatrix<T>,
    /// `(μ_j, ρ_j)` in ascending order of `μ_j`.
    pub eigen_shift_record: Vec<(T, T)>,
}

/// Pools the dictionaries consistent with `target` into one dictionary over its non-identity positions.
///
/// Every identity-free basis consistent with `target` must be present;
/// repeated bases are pooled as well.
pub fn marginalize(dicts: &[ShotDictionary], target: &PauliString) -> Result<ShotDictionary> {
    let m = target.len();
    if let Some(d) = dicts.iter().find(|d| d.basis().len() != m) {
        return Err(Error::DimensionMismatch { expected: m, found: d.basis().len() });
    }
    let drop = target.identity_positions();
    let needed = consistent_bases(target);
    let mut pooled: BTreeMap<String, u64> = BTreeMap::new();
    for basis in &needed {
        let mut found = false;
        for d in dicts.iter().filter(|d| d.basis() == basis) {
            found = true;
            for (bits, &count) in d.counts() {
                let kept: String = bits
                    .chars()
                    .enumerate()
                    .filter(|(r, _)| !drop.contains(r))
                    .map(|(_, c)| c)
                    .collect();
                *pooled.entry(kept).or_insert(0) += count;
            }
        }
        if !found {
            return Err(Error::MissingBasis(basis.to_string()));
        }
    }
    ShotDictionary::new(target.without_positions(&drop), pooled)
}

/// Identity-free bases agreeing with `target` at its non-identity letters.
pub fn consistent_bases(target: &PauliString) -> Vec<PauliString> {
    let mut out = vec![Vec::with_capacity(target.len())];
    for &letter in target.letters() {
        let options: &[Pauli] = if letter == Pauli::I { &Pauli::MEASURABLE } else { std::slice::from_ref(&letter) };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(PauliString::new).collect()
}

/// `Σ_x count(x)·(-1)^{|x|}`, the unnormalized parity sum.
pub fn signed_count(d: &ShotDictionary) -> i64 {
    d.counts()
        .iter()
        .map(|(bits, &c)| {
            let ones = bits.bytes().filter(|&b| b == b'1').count();
            if ones % 2 == 0 {
                c as i64
            } else {
                -(c as i64)
            }
        })
        .sum()
}

/// Expectation of the measured Pauli product, `Σ_x (count(x)/N_S)·(-1)^{|x|}`.
///
/// Generic over the number type so the same path yields exact rationals
/// (`Ratio<i64>`) or floats.
pub fn expectation_from_dictionary<S: Num + FromPrimitive>(d: &ShotDictionary) -> Result<S> {
    if d.n_shots() == 0 {
        return Err(Error::InvalidDictionary("dictionary has no shots".into()));
    }
    let num = S::from_i64(signed_count(d)).ok_or_else(|| Error::InvalidDictionary("count overflow".into()))?;
    let den = S::from_u64(d.n_shots()).ok_or_else(|| Error::InvalidDictionary("count overflow".into()))?;
    Ok(num / den)
}

/// Exact rational expectation.
pub fn expectation_ratio(d: &ShotDictionary) -> Result<Ratio<i64>> {
    expectation_from_dictionary(d)
}

/// `ρ = 2^{-M} Σ_b ⟨P_b⟩ P_b` over all `4^M` strings; may be aphysical.
pub fn assemble_density_matrix<T: Real>(
    expectations: &BTreeMap<PauliString, T>,
    n_qubits: usize,
) -> Result<DensityMatrix<T>> {
    let identity = PauliString::identity(n_qubits);
    let id_value = *expectations
        .get(&identity)
        .ok_or_else(|| Error::MissingExpectation(identity.to_string()))?;
    if (id_value - T::one()).abs() > T::tol() {
        return Err(Error::IdentityExpectation(id_value.as_f64()));
    }
    let dim = 1usize << n_qubits;
    let mut data = DMatrix::<Complex<T>>::zeros(dim, dim);
    for p in PauliString::enumerate(n_qubits, &Pauli::ALL) {
        let value = *expectations.get(&p).ok_or_else(|| Error::MissingExpectation(p.to_string()))?;
        if value == T::zero() {
            continue;
        }
        let mask = p.flip_mask();
        for j in 0..dim {
            data[(j ^ mask, j)] += p.phase::<T>(j) * value;
        }
    }
    let norm = Complex::new(T::one() / T::from_usize(dim).unwrap(), T::zero());
    data *= norm;
    // exact in theory; removes rounding asymmetry before validation
    let half = Complex::new(T::lit(0.5), T::zero());
    let data = (&data + data.adjoint()) * half;
    DensityMatrix::new(data)
}

/// Euclidean projection of `values` onto the probability simplex.
///
/// Sorts descending and finds the pivot: the largest `k` with
/// `u_k + (1 - Σ_{i≤k} u_i)/k > 0`. Entries past the pivot become zero and the
/// rest are shifted by the common constant `c = (1 - Σ_{i≤k} u_i)/k`.
pub fn project_to_simplex<T: Real>(values: &[T]) -> Vec<T> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = T::zero();
    let mut shift = T::zero();
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (T::one() - cumulative) / T::from_usize(k + 1).unwrap();
        if u + candidate > T::zero() {
            shift = candidate;
        } else {
            break;
        }
    }
    values.iter().map(|&v| (v + shift).max(T::zero())).collect()
}

/// Closest physical state to `mu` in 2-norm.
///
/// The minimizer shares `mu`'s eigenvectors, so only the spectrum is
/// projected. Within a degenerate eigenspace any orthonormal basis gives the
/// same result.
pub fn ml_rephysicalize<T: Real>(mu: &DensityMatrix<T>) -> Result<Tomogram<T>> {
    let (values, vectors) = mu.eigen();
    let projected = project_to_simplex(&values);
    let rephysicalized = DensityMatrix::from_spectrum(&projected, &vectors)?;
    Ok(Tomogram {
        raw: mu.clone(),
        rephysicalized,
        eigen_shift_record: values.into_iter().zip(projected).collect(),
    })
}

/// Everything a tomography run produces.
#[derive(Debug, Clone)]
pub struct TomographyRun<T: Real> {
    pub plan: TomographyPlan,
    pub tomogram: Tomogram<T>,
    /// One dictionary per basis of the plan; empty in exact mode.
    pub dictionaries: Vec<ShotDictionary>,
    pub expectations: BTreeMap<PauliString, T>,
}

/// Tomography of `state` (the register's joint state, in register order).
///
/// `n_shots = None` replaces sampling by the exact outcome distributions
/// (infinite-shot limit). Each basis gets its own generator derived from
/// `seed`, so bases are sampled in parallel and results do not depend on
/// scheduling.
pub fn tomograph<T: Real>(
    register: &[usize],
    state: &DensityMatrix<T>,
    n_shots: Option<u64>,
    spam: &SpamModel,
    seed: u64,
    register_cap: usize,
) -> Result<TomographyRun<T>> {
    let m = register.len();
    if m > register_cap {
        return Err(Error::RegisterTooLarge { requested: m, cap: register_cap });
    }
    if state.n_qubits() != m {
        return Err(Error::DimensionMismatch { expected: m, found: state.n_qubits() });
    }
    let plan = TomographyPlan::new(register.to_vec());
    let distributions = plan
        .bases
        .par_iter()
        .map(|basis| outcome_distribution_mixed(state, basis, spam.p_readout))
        .collect::<Result<Vec<_>>>()?;

    let (dictionaries, expectations) = match n_shots {
        Some(n) => {
            let dicts: Vec<ShotDictionary> = plan
                .bases
                .par_iter()
                .zip(&distributions)
                .enumerate()
                .map(|(i, (basis, dist))| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    sample_distribution(basis, dist, n, &mut rng)
                })
                .collect();
            let expectations = expectations_from_counts(&plan, &dicts)?;
            (dicts, expectations)
        }
        None => (Vec::new(), expectations_from_distributions(&plan, &distributions)),
    };
    let raw = assemble_density_matrix(&expectations, m)?;
    let tomogram = ml_rephysicalize(&raw)?;
    Ok(TomographyRun { plan, tomogram, dictionaries, expectations })
}

/// Tomography from externally measured dictionaries covering every basis of the register.
pub fn tomograph_from_counts<T: Real>(register: &[usize], dictionaries: Vec<ShotDictionary>) -> Result<TomographyRun<T>> {
    let m = register.len();
    if let Some(d) = dictionaries.iter().find(|d| d.basis().len() != m) {
        return Err(Error::DimensionMismatch { expected: m, found: d.basis().len() });
    }
    let plan = TomographyPlan::new(register.to_vec());
    let expectations = expectations_from_counts(&plan, &dictionaries)?;
    let raw = assemble_density_matrix(&expectations, m)?;
    let tomogram = ml_rephysicalize(&raw)?;
    Ok(TomographyRun { plan, tomogram, dictionaries, expectations })
}

/// All `4^M` expectations from one dictionary per basis, pooled in integer counts.
///
/// Equivalent to [`marginalize`] followed by [`expectation_from_dictionary`]
/// for each string, without materializing the marginal dictionaries.
pub fn expectations_from_counts<T: Real>(
    plan: &TomographyPlan,
    dicts: &[ShotDictionary],
) -> Result<BTreeMap<PauliString, T>> {
    let m = plan.n_qubits();
    let dense: BTreeMap<&PauliString, Vec<u64>> = dicts.iter().map(|d| (d.basis(), d.dense_counts())).collect();
    let mut out = BTreeMap::new();
    for target in PauliString::enumerate(m, &Pauli::ALL) {
        let parity_mask = non_identity_mask(&target);
        let mut signed: i64 = 0;
        let mut total: u64 = 0;
        for basis in consistent_bases(&target) {
            let counts = dense.get(&basis).ok_or_else(|| Error::MissingBasis(basis.to_string()))?;
            for (x, &c) in counts.iter().enumerate() {
                total += c;
                if (x & parity_mask).count_ones().is_multiple_of(2) {
                    signed += c as i64;
                } else {
                    signed -= c as i64;
                }
            }
        }
        if total == 0 {
            return Err(Error::InvalidDictionary(format!("no shots for {target}")));
        }
        out.insert(target, T::from_i64(signed).unwrap() / T::from_u64(total).unwrap());
    }
    Ok(out)
}

fn expectations_from_distributions<T: Real>(plan: &TomographyPlan, dists: &[Vec<f64>]) -> BTreeMap<PauliString, T> {
    let m = plan.n_qubits();
    let by_basis: BTreeMap<&PauliString, &Vec<f64>> = plan.bases.iter().zip(dists).collect();
    PauliString::enumerate(m, &Pauli::ALL)
        .into_iter()
        .map(|target| {
            // every consistent basis gives the same exact value; use I -> Z
            let basis = PauliString::new(
                target.letters().iter().map(|&p| if p == Pauli::I { Pauli::Z } else { p }).collect(),
            );
            let mask = non_identity_mask(&target);
            let value: f64 = by_basis[&basis]
                .iter()
                .enumerate()
                .map(|(x, &p)| if (x & mask).count_ones().is_multiple_of(2) { p } else { -p })
                .sum();
            let value = if target.is_identity() { 1.0 } else { value };
            (target, T::lit(value))
        })
        .collect()
}

fn non_identity_mask(target: &PauliString) -> usize {
    let m = target.len();
    target
        .letters()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != Pauli::I)
        .fold(0, |acc, (r, _)| acc | (1 << (m - 1 - r)))
}
