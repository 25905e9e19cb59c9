use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample::{run_leakage_sample_detailed, ComplementaryKind, LeakageSample, ProtocolConfig, SampleOutcome};
use crate::device::{CouplingGraph, HamiltonianSpec, SpamModel};
use crate::error::{Error, Result};
use crate::tomography::DEFAULT_REGISTER_CAP;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Closed interval for uniform draws; `low == high` is a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        let i = Self { low, high };
        i.validate()?;
        Ok(i)
    }

    pub fn fixed(value: f64) -> Self {
        Self { low: value, high: value }
    }

    pub fn symmetric(half_width: f64) -> Self {
        Self { low: -half_width, high: half_width }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.low.is_finite() || !self.high.is_finite() || self.low > self.high {
            return Err(Error::InvalidConfig(format!("bad interval [{}, {}]", self.low, self.high)));
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.low == self.high {
            self.low
        } else {
            rng.random_range(self.low..=self.high)
        }
    }
}

/// Distributions of the idle Hamiltonian parameters, all in rad/s.
///
/// `onsite`, `exchange` and `zz` are drawn once per device from the device
/// seed; `onsite_disorder` is added afresh for every sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDistribution {
    pub onsite: Interval,
    pub onsite_disorder: Interval,
    pub exchange: Interval,
    #[serde(default)]
    pub zz: Option<Interval>,
}

impl Default for HamiltonianDistribution {
    fn default() -> Self {
        Self {
            onsite: Interval::symmetric(TWO_PI * 200e3),
            onsite_disorder: Interval::symmetric(TWO_PI * 50e3),
            exchange: Interval { low: TWO_PI * 2e3, high: TWO_PI * 6e3 },
            zz: Some(Interval { low: 0.0, high: TWO_PI * 2e3 }),
        }
    }
}

impl HamiltonianDistribution {
    /// Every parameter zero.
    pub fn idle() -> Self {
        Self {
            onsite: Interval::fixed(0.0),
            onsite_disorder: Interval::fixed(0.0),
            exchange: Interval::fixed(0.0),
            zz: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.onsite.validate()?;
        self.onsite_disorder.validate()?;
        self.exchange.validate()?;
        if let Some(zz) = &self.zz {
            zz.validate()?;
        }
        Ok(())
    }
}

/// A simulated device: a label and the seed of its Hamiltonian parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceInstance {
    pub label: String,
    pub seed: u64,
}

/// A block of samples sharing kind and shot count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stratum {
    pub kind: ComplementaryKind,
    /// `None` for exact-probability mode.
    pub n_shots: Option<u64>,
    pub count: usize,
}

/// Sample counts per shot count, `(N_S, plaquette, random)`.
pub const DEFAULT_STRATUM_COUNTS: [(u64, usize, usize); 5] =
    [(4000, 609, 600), (8000, 507, 480), (16000, 324, 288), (32000, 252, 204), (64000, 157, 157)];

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub graph: CouplingGraph,
    pub devices: Vec<DeviceInstance>,
    pub hamiltonian: HamiltonianDistribution,
    pub spam: SpamModel,
    pub wait_time_ns: f64,
    pub neighborhood_radius: usize,
    pub max_simulated_qubits: usize,
    /// Targets are drawn from the qubits of this coordination number.
    pub target_coordination: usize,
    /// `M − 1`.
    pub set_size: usize,
    pub environment: Option<String>,
    pub register_cap: usize,
    pub strata: Vec<Stratum>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            graph: CouplingGraph::falcon27(),
            devices: ["device-a", "device-b", "device-c", "device-d"]
                .iter()
                .zip(1u64..)
                .map(|(label, seed)| DeviceInstance { label: label.to_string(), seed })
                .collect(),
            hamiltonian: HamiltonianDistribution::default(),
            spam: SpamModel { p_prep: 0.01, p_readout: 0.02 },
            wait_time_ns: 800.0,
            neighborhood_radius: 2,
            max_simulated_qubits: 14,
            target_coordination: 3,
            set_size: 3,
            environment: None,
            register_cap: DEFAULT_REGISTER_CAP,
            strata: default_strata(),
        }
    }
}

/// Plaquette and random strata with the default sample counts.
pub fn default_strata() -> Vec<Stratum> {
    DEFAULT_STRATUM_COUNTS
        .iter()
        .flat_map(|&(n, p, r)| {
            [
                Stratum { kind: ComplementaryKind::Plaquette, n_shots: Some(n), count: p },
                Stratum { kind: ComplementaryKind::Random, n_shots: Some(n), count: r },
            ]
        })
        .collect()
}

impl CampaignConfig {
    pub fn total_samples(&self) -> usize {
        self.strata.iter().map(|s| s.count).sum()
    }

    /// Stratum of the sample at global `index`.
    pub fn stratum_of(&self, index: usize) -> Option<&Stratum> {
        let mut start = 0;
        for s in &self.strata {
            if index < start + s.count {
                return Some(s);
            }
            start += s.count;
        }
        None
    }

    pub fn targets(&self) -> Vec<usize> {
        self.graph.coordination_targets(self.target_coordination)
    }

    pub fn validate(&self) -> Result<()> {
        self.hamiltonian.validate()?;
        SpamModel::new(self.spam.p_prep, self.spam.p_readout)?;
        if self.devices.is_empty() {
            return Err(Error::InvalidConfig("no devices".into()));
        }
        if !self.wait_time_ns.is_finite() || self.wait_time_ns < 0.0 {
            return Err(Error::InvalidConfig(format!("wait time {} ns", self.wait_time_ns)));
        }
        if self.total_samples() > 0 && self.targets().is_empty() {
            return Err(Error::InvalidConfig(format!("no qubit has coordination {}", self.target_coordination)));
        }
        if self.set_size + 1 > self.register_cap {
            return Err(Error::RegisterTooLarge { requested: self.set_size + 1, cap: self.register_cap });
        }
        for s in &self.strata {
            if s.n_shots == Some(0) {
                return Err(Error::InvalidConfig("shot counts must be positive".into()));
            }
            if s.kind == ComplementaryKind::Plaquette && s.count > 0 && self.set_size != self.target_coordination {
                return Err(Error::InvalidConfig(format!(
                    "plaquette of {} needs targets of coordination {}",
                    self.set_size, self.set_size
                )));
            }
        }
        if let Some(env) = &self.environment {
            if env.len() != self.graph.n_qubits() || env.chars().any(|c| c != '0' && c != '1') {
                return Err(Error::InvalidBitstring(env.clone()));
            }
        }
        Ok(())
    }

    /// Static Hamiltonian of one device, without per-sample disorder.
    pub fn device_hamiltonian(&self, device: &DeviceInstance) -> HamiltonianSpec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(device.seed);
        let d = &self.hamiltonian;
        let onsite = (0..self.graph.n_qubits()).map(|_| d.onsite.draw(&mut rng)).collect();
        let exchange = (0..self.graph.n_edges()).map(|_| d.exchange.draw(&mut rng)).collect();
        let zz = d.zz.map(|zz| (0..self.graph.n_edges()).map(|_| zz.draw(&mut rng)).collect());
        HamiltonianSpec { graph: self.graph.clone(), onsite_freqs: onsite, exchange, zz_crosstalk: zz }
    }
}

/// Seed of the sample at `index`, a pure function of the master seed and the index.
pub fn sample_seed(master_seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng.random()
}

/// Runs one campaign sample from its seed alone.
pub fn reproduce_sample(config: &CampaignConfig, index: usize, seed: u64) -> Result<SampleOutcome<f64>> {
    let devices: Vec<_> = config.devices.iter().map(|d| config.device_hamiltonian(d)).collect();
    run_indexed(config, &devices, &config.targets(), index, seed)
}

fn run_indexed(
    config: &CampaignConfig,
    devices: &[HamiltonianSpec<f64>],
    targets: &[usize],
    index: usize,
    seed: u64,
) -> Result<SampleOutcome<f64>> {
    let stratum = config
        .stratum_of(index)
        .ok_or_else(|| Error::InvalidParameter(format!("sample {index} beyond campaign")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let device = rng.random_range(0..devices.len());
    let target = targets[rng.random_range(0..targets.len())];
    let mut hamiltonian = devices[device].clone();
    for w in &mut hamiltonian.onsite_freqs {
        *w += config.hamiltonian.onsite_disorder.draw(&mut rng);
    }
    let protocol = ProtocolConfig {
        device_label: config.devices[device].label.clone(),
        hamiltonian,
        target,
        kind: stratum.kind,
        set_size: config.set_size,
        required_coordination: Some(config.target_coordination),
        wait_time: config.wait_time_ns * 1e-9,
        n_shots: stratum.n_shots,
        spam: config.spam,
        neighborhood_radius: config.neighborhood_radius,
        max_simulated_qubits: config.max_simulated_qubits,
        environment: config.environment.clone(),
        register_cap: config.register_cap,
    };
    let mut outcome = run_leakage_sample_detailed(&protocol, rng.random())?;
    outcome.sample.sample_index = index;
    outcome.sample.seed = seed;
    Ok(outcome)
}

/// Runs every sample of the campaign, in parallel, ordered by sample index.
pub fn run_campaign(config: &CampaignConfig, master_seed: u64) -> Result<Vec<LeakageSample>> {
    run_campaign_with(config, master_seed, |_| {})
}

/// As [`run_campaign`], handing each full outcome to `on_sample` as it completes.
pub fn run_campaign_with<F>(config: &CampaignConfig, master_seed: u64, on_sample: F) -> Result<Vec<LeakageSample>>
where
    F: Fn(&SampleOutcome<f64>) + Sync,
{
    config.validate()?;
    let devices: Vec<_> = config.devices.iter().map(|d| config.device_hamiltonian(d)).collect();
    for d in &devices {
        d.validate()?;
    }
    let targets = config.targets();
    (0..config.total_samples())
        .into_par_iter()
        .map(|index| {
            let outcome = run_indexed(config, &devices, &targets, index, sample_seed(master_seed, index))?;
            on_sample(&outcome);
            Ok(outcome.sample)
        })
        .collect()
}
