use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::holevo::delta_chi;
use crate::device::{flip_bits, CouplingGraph, HamiltonianSpec, ShotDictionary, SpamModel};
use crate::error::{Error, Result};
use crate::qstate::{evolve_statevector, DensityMatrix, Statevector};
use crate::scalar::Real;
use crate::tomography::{tomograph, TomographyRun, DEFAULT_REGISTER_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComplementaryKind {
    /// Nearest neighbours of the target.
    #[serde(rename = "P", alias = "plaquette", alias = "Plaquette")]
    Plaquette,
    /// Qubits that are neither the target nor its neighbours.
    #[serde(rename = "R", alias = "random", alias = "Random")]
    Random,
}

impl ComplementaryKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Plaquette => "P",
            Self::Random => "R",
        }
    }
}

impl fmt::Display for ComplementaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ComplementaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "plaquette" | "Plaquette" => Ok(Self::Plaquette),
            "R" | "random" | "Random" => Ok(Self::Random),
            other => Err(Error::InvalidParameter(format!("unknown complementary set kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplementarySet {
    pub kind: ComplementaryKind,
    pub target: usize,
    /// Ascending.
    pub members: Vec<usize>,
}

impl ComplementarySet {
    /// Tomography register: the target first, then the members.
    pub fn register(&self) -> Vec<usize> {
        std::iter::once(self.target).chain(self.members.iter().copied()).collect()
    }
}

/// Chooses the complementary set `Q` for `target`.
///
/// Random sets are drawn uniformly without replacement from the qubits
/// outside the target's plaquette.
pub fn select_complementary<R: Rng + ?Sized>(
    graph: &CouplingGraph,
    target: usize,
    kind: ComplementaryKind,
    size: usize,
    rng: &mut R,
) -> Result<ComplementarySet> {
    if target >= graph.n_qubits() {
        return Err(Error::QubitOutOfRange { index: target, n_qubits: graph.n_qubits() });
    }
    let members = match kind {
        ComplementaryKind::Plaquette => {
            let nb = graph.neighbors(target);
            if nb.len() != size {
                return Err(Error::InfeasibleSet(format!(
                    "qubit {target} has {} neighbours, plaquette of {size} requested",
                    nb.len()
                )));
            }
            nb.to_vec()
        }
        ComplementaryKind::Random => {
            let eligible: Vec<usize> = (0..graph.n_qubits())
                .filter(|&q| q != target && !graph.are_adjacent(q, target))
                .collect();
            if eligible.len() < size {
                return Err(Error::InfeasibleSet(format!(
                    "{} eligible qubits for a random set of {size} around {target}",
                    eligible.len()
                )));
            }
            let mut picked: Vec<usize> = index::sample(rng, eligible.len(), size).into_iter().map(|i| eligible[i]).collect();
            picked.sort_unstable();
            picked
        }
    };
    Ok(ComplementarySet { kind, target, members })
}

/// Everything needed for one realization of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig<T: Real> {
    pub device_label: String,
    pub hamiltonian: HamiltonianSpec<T>,
    pub target: usize,
    pub kind: ComplementaryKind,
    /// `M − 1`.
    pub set_size: usize,
    /// Coordination number the target must have, if any.
    pub required_coordination: Option<usize>,
    /// Idle time in seconds.
    pub wait_time: T,
    /// `None` measures exact outcome probabilities instead of sampling shots.
    pub n_shots: Option<u64>,
    pub spam: SpamModel,
    pub neighborhood_radius: usize,
    /// The simulated neighbourhood shrinks until it fits.
    pub max_simulated_qubits: usize,
    /// Initial bits of the whole device; the target's bit is overwritten. All zeros if absent.
    pub environment: Option<String>,
    pub register_cap: usize,
}

impl<T: Real> ProtocolConfig<T> {
    /// Plaquette run on `target` with defaults for everything else.
    pub fn new(hamiltonian: HamiltonianSpec<T>, target: usize, wait_time: T) -> Self {
        let set_size = hamiltonian.graph.degree(target);
        Self {
            device_label: "device".into(),
            hamiltonian,
            target,
            kind: ComplementaryKind::Plaquette,
            set_size,
            required_coordination: None,
            wait_time,
            n_shots: None,
            spam: SpamModel::ideal(),
            neighborhood_radius: 2,
            max_simulated_qubits: 14,
            environment: None,
            register_cap: DEFAULT_REGISTER_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hamiltonian.validate()?;
        let g = &self.hamiltonian.graph;
        if self.target >= g.n_qubits() {
            return Err(Error::QubitOutOfRange { index: self.target, n_qubits: g.n_qubits() });
        }
        if let Some(n_c) = self.required_coordination {
            if g.degree(self.target) != n_c {
                return Err(Error::InvalidConfig(format!(
                    "target {} has coordination {}, {n_c} required",
                    self.target,
                    g.degree(self.target)
                )));
            }
        }
        if self.set_size + 1 > self.register_cap {
            return Err(Error::RegisterTooLarge { requested: self.set_size + 1, cap: self.register_cap });
        }
        if let Some(env) = &self.environment {
            if env.len() != g.n_qubits() || env.chars().any(|c| c != '0' && c != '1') {
                return Err(Error::InvalidBitstring(env.clone()));
            }
        }
        if !self.wait_time.is_finite() || self.wait_time < T::zero() {
            return Err(Error::InvalidConfig(format!("wait time {}", self.wait_time)));
        }
        if self.n_shots == Some(0) {
            return Err(Error::InvalidConfig("n_shots must be positive".into()));
        }
        if self.max_simulated_qubits == 0 {
            return Err(Error::InvalidConfig("max_simulated_qubits must be positive".into()));
        }
        Ok(())
    }
}

/// One protocol realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageSample {
    pub sample_index: usize,
    pub device_label: String,
    pub target: usize,
    pub set: ComplementarySet,
    /// `None` in exact-probability mode.
    pub n_shots: Option<u64>,
    pub chi_s: f64,
    pub chi_sq: f64,
    pub delta_chi: f64,
    /// Seconds.
    pub wait_time: f64,
    pub seed: u64,
}

impl LeakageSample {
    /// The protocol's final check: did measuring `Q` reveal extra information?
    pub fn leaks(&self) -> bool {
        self.delta_chi > 0.0
    }
}

/// A sample together with the two tomography runs behind it.
#[derive(Debug, Clone)]
pub struct SampleOutcome<T: Real> {
    pub sample: LeakageSample,
    /// Indexed by the target's initial bit.
    pub runs: [TomographyRun<T>; 2],
}

impl<T: Real> SampleOutcome<T> {
    pub fn dictionaries(&self, message: usize) -> &[ShotDictionary] {
        &self.runs[message].dictionaries
    }
}

/// Runs the protocol once: prepare, idle, tomograph, for both target bits, then compute `Δχ`.
pub fn run_leakage_sample<T: Real>(config: &ProtocolConfig<T>, seed: u64) -> Result<LeakageSample> {
    run_leakage_sample_detailed(config, seed).map(|o| o.sample)
}

pub fn run_leakage_sample_detailed<T: Real>(config: &ProtocolConfig<T>, seed: u64) -> Result<SampleOutcome<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = &config.hamiltonian.graph;
    let set = select_complementary(graph, config.target, config.kind, config.set_size, &mut rng)?;
    let register = set.register();

    let mut radius = config.neighborhood_radius;
    let (_, relabel) = loop {
        let (sub, relabel) = graph.extract_neighborhood(config.target, radius)?;
        if sub.n_qubits() <= config.max_simulated_qubits || radius == 0 {
            break (sub, relabel);
        }
        radius -= 1;
    };
    let local_h = config.hamiltonian.restrict(&relabel);
    let base: Vec<u8> = match &config.environment {
        Some(env) => env.bytes().collect(),
        None => vec![b'0'; graph.n_qubits()],
    };

    let mut prepared = Vec::with_capacity(2);
    for message in [b'0', b'1'] {
        let mut pattern = base.clone();
        pattern[config.target] = message;
        let pattern = String::from_utf8(pattern).expect("ascii bits");
        let flipped = flip_bits(&pattern, config.spam.p_prep, &mut rng)?;
        prepared.push((flipped, rng.random::<u64>()));
    }

    let mut runs = Vec::with_capacity(2);
    for (pattern, tomo_seed) in prepared {
        let bits = pattern.as_bytes();
        let local: String = relabel.new_to_old.iter().map(|&old| bits[old] as char).collect();
        let psi = Statevector::<T>::basis_state(&local)?;
        let psi = evolve_statevector(&psi, &local_h, config.wait_time)?;
        let rho = register_state(&psi, &register, &relabel.old_to_new, bits)?;
        runs.push(tomograph(&register, &rho, config.n_shots, &config.spam, tomo_seed, config.register_cap)?);
    }
    let runs: [TomographyRun<T>; 2] = runs.try_into().expect("two messages");

    let d = delta_chi(&runs[0].tomogram.rephysicalized, &runs[1].tomogram.rephysicalized, 0)?;
    let sample = LeakageSample {
        sample_index: 0,
        device_label: config.device_label.clone(),
        target: config.target,
        set,
        n_shots: config.n_shots,
        chi_s: d.chi_s.as_f64(),
        chi_sq: d.chi_sq.as_f64(),
        delta_chi: d.chi_sq.as_f64() - d.chi_s.as_f64(),
        wait_time: config.wait_time.as_f64(),
        seed,
    };
    Ok(SampleOutcome { sample, runs })
}

/// Joint state of `register` (device indices, in order): the simulated qubits
/// come from `psi`, the rest are unentangled basis states set by `bits`.
fn register_state<T: Real>(
    psi: &Statevector<T>,
    register: &[usize],
    old_to_new: &std::collections::BTreeMap<usize, usize>,
    bits: &[u8],
) -> Result<DensityMatrix<T>> {
    let inside: Vec<usize> = register.iter().copied().filter(|q| old_to_new.contains_key(q)).collect();
    let outside: Vec<usize> = register.iter().copied().filter(|q| !old_to_new.contains_key(q)).collect();
    let keep: Vec<usize> = inside.iter().map(|q| old_to_new[q]).collect();
    let mut rho = psi.reduced_density_matrix(&keep)?;
    if !outside.is_empty() {
        let ext: String = outside.iter().map(|&q| bits[q] as char).collect();
        rho = rho.kron(&DensityMatrix::basis_state(&ext)?);
    }
    let joint: Vec<usize> = inside.iter().chain(&outside).copied().collect();
    let order: Vec<usize> = register.iter().map(|q| joint.iter().position(|x| x == q).unwrap()).collect();
    rho.permute_qubits(&order)
}
