use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::SpamModel;
use crate::error::{Error, Result};
use crate::qstate::{format_bitstring, parse_bitstring, DensityMatrix, Pauli, PauliString, Statevector};
use crate::scalar::Real;

/// Counts of measured bitstrings for one identity-free Pauli basis.
///
/// Character `r` of every bitstring is the outcome of register position `r`;
/// bit `b` corresponds to eigenvalue `(-1)^b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDictionary", into = "RawDictionary")]
pub struct ShotDictionary {
    basis: PauliString,
    counts: BTreeMap<String, u64>,
    n_shots: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDictionary {
    basis: PauliString,
    counts: BTreeMap<String, u64>,
}

impl TryFrom<RawDictionary> for ShotDictionary {
    type Error = Error;

    fn try_from(raw: RawDictionary) -> Result<Self> {
        ShotDictionary::new(raw.basis, raw.counts)
    }
}

impl From<ShotDictionary> for RawDictionary {
    fn from(d: ShotDictionary) -> Self {
        RawDictionary { basis: d.basis, counts: d.counts }
    }
}

impl ShotDictionary {
    /// Zero counts are dropped; `n_shots` is the sum of the remaining counts.
    pub fn new(basis: PauliString, counts: BTreeMap<String, u64>) -> Result<Self> {
        if basis.has_identity() {
            return Err(Error::IdentityInBasis(basis.to_string()));
        }
        for bits in counts.keys() {
            if bits.len() != basis.len() || parse_bitstring(bits).is_err() {
                return Err(Error::InvalidDictionary(format!(
                    "bitstring {bits:?} does not match basis {basis}"
                )));
            }
        }
        let counts: BTreeMap<String, u64> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        let n_shots = counts.values().sum();
        Ok(Self { basis, counts, n_shots })
    }

    /// Dictionary from a list of individual shot outcomes.
    pub fn from_shots<'a>(basis: PauliString, shots: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for s in shots {
            *counts.entry(s.to_string()).or_insert(0) += 1;
        }
        Self::new(basis, counts)
    }

    pub(crate) fn from_dense(basis: PauliString, dense: &[u64]) -> Self {
        let n = basis.len();
        let counts = dense
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(x, &c)| (format_bitstring(x, n), c))
            .collect::<BTreeMap<_, _>>();
        let n_shots = counts.values().sum();
        Self { basis, counts, n_shots }
    }

    pub fn basis(&self) -> &PauliString {
        &self.basis
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn count(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn n_shots(&self) -> u64 {
        self.n_shots
    }

    /// Counts indexed by basis index.
    pub fn dense_counts(&self) -> Vec<u64> {
        let mut dense = vec![0u64; 1 << self.basis.len()];
        for (bits, &c) in &self.counts {
            dense[parse_bitstring(bits).expect("validated at construction")] += c;
        }
        dense
    }
}

/// Outcome distribution of measuring a pure register in `basis`, readout error included.
pub fn outcome_distribution<T: Real>(psi: &Statevector<T>, basis: &PauliString, p_readout: f64) -> Result<Vec<f64>> {
    check_basis(basis, psi.n_qubits())?;
    let mut amps = psi.amplitudes().to_vec();
    let n = psi.n_qubits();
    for (r, &letter) in basis.letters().iter().enumerate() {
        if let Some(u) = rotation::<T>(letter) {
            apply_single_qubit(&mut amps, r, n, &u);
        }
    }
    let born: Vec<f64> = amps.iter().map(|a| a.norm_sqr().as_f64()).collect();
    Ok(apply_readout_error(born, n, p_readout))
}

/// Outcome distribution of measuring a mixed register in `basis`, readout error included.
pub fn outcome_distribution_mixed<T: Real>(
    rho: &DensityMatrix<T>,
    basis: &PauliString,
    p_readout: f64,
) -> Result<Vec<f64>> {
    let n = rho.n_qubits();
    check_basis(basis, n)?;
    let mut u = DMatrix::<Complex<T>>::identity(1, 1);
    for &letter in basis.letters() {
        let g = rotation::<T>(letter).unwrap_or([
            [Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero())],
            [Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero())],
        ]);
        let g = DMatrix::from_fn(2, 2, |i, j| g[i][j]);
        u = u.kronecker(&g);
    }
    let rotated = &u * rho.matrix() * u.adjoint();
    let born: Vec<f64> = (0..rho.dim()).map(|x| rotated[(x, x)].re.as_f64().max(0.0)).collect();
    Ok(apply_readout_error(born, n, p_readout))
}

/// Draws `n_shots` outcomes from `distribution` as a multinomial sample.
pub fn sample_distribution<R: Rng + ?Sized>(
    basis: &PauliString,
    distribution: &[f64],
    n_shots: u64,
    rng: &mut R,
) -> ShotDictionary {
    let mut dense = vec![0u64; distribution.len()];
    let mut remaining = n_shots;
    let mut mass: f64 = distribution.iter().sum();
    for (x, &p) in distribution.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if x + 1 == distribution.len() {
            dense[x] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).expect("probability in [0, 1]").sample(rng);
        dense[x] = k;
        remaining -= k;
        mass -= p;
    }
    ShotDictionary::from_dense(basis.clone(), &dense)
}

/// Measures `psi` in `basis` for `n_shots` shots, flipping each readout bit with `spam.p_readout`.
pub fn sample_shots<T: Real, R: Rng + ?Sized>(
    psi: &Statevector<T>,
    basis: &PauliString,
    n_shots: u64,
    spam: &SpamModel,
    rng: &mut R,
) -> Result<ShotDictionary> {
    let dist = outcome_distribution(psi, basis, spam.p_readout)?;
    Ok(sample_distribution(basis, &dist, n_shots, rng))
}

/// As [`sample_shots`] for a mixed register state.
pub fn sample_shots_mixed<T: Real, R: Rng + ?Sized>(
    rho: &DensityMatrix<T>,
    basis: &PauliString,
    n_shots: u64,
    spam: &SpamModel,
    rng: &mut R,
) -> Result<ShotDictionary> {
    let dist = outcome_distribution_mixed(rho, basis, spam.p_readout)?;
    Ok(sample_distribution(basis, &dist, n_shots, rng))
}

fn check_basis(basis: &PauliString, n_qubits: usize) -> Result<()> {
    if basis.has_identity() {
        return Err(Error::IdentityInBasis(basis.to_string()));
    }
    if basis.len() != n_qubits {
        return Err(Error::DimensionMismatch { expected: n_qubits, found: basis.len() });
    }
    Ok(())
}

/// Rotation taking the `+1` eigenstate of `letter` to `|0⟩`: H for X, H·S† for Y.
fn rotation<T: Real>(letter: Pauli) -> Option<[[Complex<T>; 2]; 2]> {
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let z = T::zero();
    match letter {
        Pauli::X => Some([
            [Complex::new(h, z), Complex::new(h, z)],
            [Complex::new(h, z), Complex::new(-h, z)],
        ]),
        Pauli::Y => Some([
            [Complex::new(h, z), Complex::new(z, -h)],
            [Complex::new(h, z), Complex::new(z, h)],
        ]),
        Pauli::Z | Pauli::I => None,
    }
}

fn apply_single_qubit<T: Real>(amps: &mut [Complex<T>], pos: usize, n: usize, u: &[[Complex<T>; 2]; 2]) {
    let mask = 1usize << (n - 1 - pos);
    for j in 0..amps.len() {
        if j & mask == 0 {
            let k = j | mask;
            let (a0, a1) = (amps[j], amps[k]);
            amps[j] = u[0][0] * a0 + u[0][1] * a1;
            amps[k] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

/// Independent bit flips with probability `p` on every position.
fn apply_readout_error(mut dist: Vec<f64>, n: usize, p: f64) -> Vec<f64> {
    if p == 0.0 {
        return dist;
    }
    for pos in 0..n {
        let mask = 1usize << (n - 1 - pos);
        for j in 0..dist.len() {
            if j & mask == 0 {
                let k = j | mask;
                let (a, b) = (dist[j], dist[k]);
                dist[j] = (1.0 - p) * a + p * b;
                dist[k] = (1.0 - p) * b + p * a;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus() -> Statevector<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Statevector::new(vec![Complex::new(h, 0.0), Complex::new(h, 0.0)]).unwrap()
    }

    #[test]
    fn deterministic_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = Statevector::<f64>::basis_state("00").unwrap();
        let d = sample_shots(&psi, &"ZZ".parse().unwrap(), 1000, &SpamModel::ideal(), &mut rng).unwrap();
        assert_eq!(d.counts(), &BTreeMap::from([("00".to_string(), 1000)]));
        let d = sample_shots(&plus(), &"X".parse().unwrap(), 1000, &SpamModel::ideal(), &mut rng).unwrap();
        assert_eq!(d.counts(), &BTreeMap::from([("0".to_string(), 1000)]));
    }

    #[test]
    fn y_basis_convention() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus_i = Statevector::new(vec![Complex::new(h, 0.0), Complex::new(0.0, h)]).unwrap();
        let dist = outcome_distribution(&plus_i, &"Y".parse().unwrap(), 0.0).unwrap();
        assert!((dist[0] - 1.0).abs() < 1e-12);
        let rho = DensityMatrix::from_statevector(&plus_i);
        let dist = outcome_distribution_mixed(&rho, &"Y".parse().unwrap(), 0.0).unwrap();
        assert!((dist[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn readout_flip_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = Statevector::<f64>::basis_state("0").unwrap();
        let spam = SpamModel::new(0.0, 0.2).unwrap();
        let d = sample_shots(&psi, &"Z".parse().unwrap(), 100_000, &spam, &mut rng).unwrap();
        let frac = d.count("1") as f64 / 1e5;
        assert!((frac - 0.2).abs() < 0.01, "{frac}");
    }

    #[test]
    fn rejects_identity_and_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let psi = Statevector::<f64>::basis_state("00").unwrap();
        let spam = SpamModel::ideal();
        assert!(matches!(
            sample_shots(&psi, &"ZI".parse().unwrap(), 10, &spam, &mut rng),
            Err(Error::IdentityInBasis(_))
        ));
        assert!(matches!(
            sample_shots(&psi, &"Z".parse().unwrap(), 10, &spam, &mut rng),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dictionary_validation() {
        let basis: PauliString = "XY".parse().unwrap();
        assert!(ShotDictionary::new(basis.clone(), BTreeMap::from([("0".into(), 1)])).is_err());
        assert!(ShotDictionary::new(basis.clone(), BTreeMap::from([("0a".into(), 1)])).is_err());
        assert!(ShotDictionary::new("XI".parse().unwrap(), BTreeMap::new()).is_err());
        let d = ShotDictionary::from_shots(basis, ["01", "01", "11"]).unwrap();
        assert_eq!(d.n_shots(), 3);
        assert_eq!(d.dense_counts(), vec![0, 2, 0, 1]);
    }

    #[test]
    fn mixed_and_pure_distributions_agree() {
        let amps: Vec<Complex<f64>> = (0..8).map(|k| Complex::new(1.0 + k as f64, 0.5 * k as f64)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi = Statevector::new(amps.into_iter().map(|a| a / norm).collect()).unwrap();
        let rho = DensityMatrix::from_statevector(&psi);
        for basis in PauliString::enumerate(3, &Pauli::MEASURABLE) {
            let a = outcome_distribution(&psi, &basis, 0.05).unwrap();
            let b = outcome_distribution_mixed(&rho, &basis, 0.05).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
