//! Device model: coupling geometry, idle Hamiltonian, SPAM errors and
//! finite-shot Pauli-basis measurements.

mod graph;
mod measurement;

pub use graph::{CouplingGraph, Relabeling, FALCON27_EDGES};
pub use measurement::{
    outcome_distribution, outcome_distribution_mixed, sample_distribution, sample_shots, sample_shots_mixed,
    ShotDictionary,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{parse_bitstring, Coupling, RegisterHamiltonian, Statevector};
use crate::scalar::Real;

/// Idle Hamiltonian parameters on a coupling graph, in rad/s.
///
/// `exchange` and `zz` are indexed like [`CouplingGraph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec<T> {
    pub graph: CouplingGraph,
    pub onsite_freqs: Vec<T>,
    pub exchange: Vec<T>,
    pub zz_crosstalk: Option<Vec<T>>,
}

impl<T: Real> HamiltonianSpec<T> {
    pub fn new(
        graph: CouplingGraph,
        onsite_freqs: Vec<T>,
        exchange: Vec<T>,
        zz_crosstalk: Option<Vec<T>>,
    ) -> Result<Self> {
        let spec = Self { graph, onsite_freqs, exchange, zz_crosstalk };
        spec.validate()?;
        Ok(spec)
    }

    /// No dynamics at all.
    pub fn idle(graph: CouplingGraph) -> Self {
        let n = graph.n_qubits();
        let m = graph.n_edges();
        Self { graph, onsite_freqs: vec![T::zero(); n], exchange: vec![T::zero(); m], zz_crosstalk: None }
    }

    /// Same exchange `j` on every edge, no onsite terms.
    pub fn uniform_exchange(graph: CouplingGraph, j: T) -> Self {
        let mut spec = Self::idle(graph);
        spec.exchange.iter_mut().for_each(|x| *x = j);
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.n_qubits();
        let m = self.graph.n_edges();
        if self.onsite_freqs.len() != n {
            return Err(Error::InvalidHamiltonian(format!("{} onsite frequencies for {n} qubits", self.onsite_freqs.len())));
        }
        if self.exchange.len() != m {
            return Err(Error::InvalidHamiltonian(format!("{} exchange couplings for {m} edges", self.exchange.len())));
        }
        if let Some(zz) = &self.zz_crosstalk {
            if zz.len() != m {
                return Err(Error::InvalidHamiltonian(format!("{} zz couplings for {m} edges", zz.len())));
            }
        }
        let all = self
            .onsite_freqs
            .iter()
            .chain(&self.exchange)
            .chain(self.zz_crosstalk.iter().flatten());
        if let Some(x) = all.into_iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidHamiltonian(format!("non-finite parameter {x}")));
        }
        Ok(())
    }

    /// Hamiltonian of the induced subgraph on `relabel.new_to_old`, in new indices.
    pub fn restrict(&self, relabel: &Relabeling) -> RegisterHamiltonian<T> {
        let onsite = relabel.new_to_old.iter().map(|&old| self.onsite_freqs[old]).collect();
        let mut exchange = Vec::new();
        let mut zz = Vec::new();
        for (e, (a, b)) in self.graph.edges().enumerate() {
            let (Some(na), Some(nb)) = (relabel.new_index(a), relabel.new_index(b)) else {
                continue;
            };
            if self.exchange[e] != T::zero() {
                exchange.push(Coupling { a: na, b: nb, strength: self.exchange[e] });
            }
            if let Some(z) = &self.zz_crosstalk {
                if z[e] != T::zero() {
                    zz.push(Coupling { a: na, b: nb, strength: z[e] });
                }
            }
        }
        RegisterHamiltonian { n_qubits: relabel.new_to_old.len(), onsite, exchange, zz }
    }

    /// Hamiltonian on the whole graph.
    pub fn register_hamiltonian(&self) -> RegisterHamiltonian<T> {
        let identity = Relabeling {
            new_to_old: (0..self.graph.n_qubits()).collect(),
            old_to_new: (0..self.graph.n_qubits()).map(|q| (q, q)).collect(),
        };
        self.restrict(&identity)
    }
}

/// Independent per-qubit bit-flip probabilities for preparation and readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpamModel {
    pub p_prep: f64,
    pub p_readout: f64,
}

impl SpamModel {
    pub fn new(p_prep: f64, p_readout: f64) -> Result<Self> {
        for p in [p_prep, p_readout] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
        }
        Ok(Self { p_prep, p_readout })
    }

    pub fn ideal() -> Self {
        Self { p_prep: 0.0, p_readout: 0.0 }
    }
}

impl Default for SpamModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Flips each bit of `pattern` independently with probability `p`.
pub fn flip_bits<R: Rng + ?Sized>(pattern: &str, p: f64, rng: &mut R) -> Result<String> {
    parse_bitstring(pattern)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(pattern
        .chars()
        .map(|c| {
            let flip = p > 0.0 && rng.random::<f64>() < p;
            match (c, flip) {
                ('0', true) | ('1', false) => '1',
                _ => '0',
            }
        })
        .collect())
}

/// Computational-basis product state for `pattern`, after preparation flips.
pub fn prepare_state<T: Real, R: Rng + ?Sized>(pattern: &str, spam: &SpamModel, rng: &mut R) -> Result<Statevector<T>> {
    Statevector::basis_state(&flip_bits(pattern, spam.p_prep, rng)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prepare_without_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi: Statevector<f64> = prepare_state("010", &SpamModel::ideal(), &mut rng).unwrap();
        assert_eq!(psi, Statevector::basis_state("010").unwrap());
        let forced = SpamModel::new(1.0, 0.0).unwrap();
        let psi: Statevector<f64> = prepare_state("0", &forced, &mut rng).unwrap();
        assert_eq!(psi, Statevector::basis_state("1").unwrap());
    }

    #[test]
    fn prep_flip_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 100_000;
        let mut flips = [0usize; 3];
        for _ in 0..trials {
            let s = flip_bits("000", 0.1, &mut rng).unwrap();
            for (i, c) in s.chars().enumerate() {
                flips[i] += (c == '1') as usize;
            }
        }
        for f in flips {
            let frac = f as f64 / trials as f64;
            assert!((frac - 0.1).abs() < 0.005, "{frac}");
        }
    }

    #[test]
    fn spam_validation() {
        assert!(SpamModel::new(-0.1, 0.0).is_err());
        assert!(SpamModel::new(0.0, 1.5).is_err());
    }

    #[test]
    fn hamiltonian_restriction() {
        let g = CouplingGraph::falcon27();
        let mut spec = HamiltonianSpec::<f64>::uniform_exchange(g.clone(), 2.0);
        spec.onsite_freqs[12] = 5.0;
        let (_, relabel) = g.extract_neighborhood(12, 1).unwrap();
        let h = spec.restrict(&relabel);
        assert_eq!(h.n_qubits, 4);
        assert_eq!(h.exchange.len(), 3);
        assert_eq!(h.onsite[0], 5.0);
        assert!(h.exchange.iter().all(|c| c.a == 0 || c.b == 0));
    }

    #[test]
    fn hamiltonian_validation() {
        let g = CouplingGraph::path(3);
        assert!(HamiltonianSpec::<f64>::new(g.clone(), vec![0.0; 2], vec![0.0; 2], None).is_err());
        assert!(HamiltonianSpec::<f64>::new(g.clone(), vec![0.0; 3], vec![0.0; 2], Some(vec![0.0])).is_err());
        assert!(HamiltonianSpec::<f64>::new(g, vec![0.0, f64::NAN, 0.0], vec![0.0; 2], None).is_err());
    }
}
