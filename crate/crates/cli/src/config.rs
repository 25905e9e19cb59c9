//! Experiment configuration files (TOML).

use qidle::device::{CouplingGraph, SpamModel};
use qidle::protocol::{
    CampaignConfig, ComplementaryKind, DeviceInstance, HamiltonianDistribution, Interval, Stratum, DEFAULT_STRATUM_COUNTS,
};
use qidle::stats::{Tail, DEFAULT_BAD_QUBIT_THRESHOLD, DEFAULT_FILTER_K};
use serde::{Deserialize, Serialize};

use crate::analyze::AnalysisParams;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default = "default_devices")]
    pub devices: Vec<DeviceInstance>,
    #[serde(default)]
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub spam: SpamConfig,
    #[serde(default = "default_wait")]
    pub wait_time_ns: f64,
    #[serde(default = "default_radius")]
    pub neighborhood_radius: usize,
    #[serde(default = "default_max_qubits")]
    pub max_simulated_qubits: usize,
    #[serde(default = "default_coordination")]
    pub target_coordination: usize,
    #[serde(default = "default_coordination")]
    pub set_size: usize,
    #[serde(default = "default_cap")]
    pub register_cap: usize,
    /// Initial bits of the whole device; all zeros if absent.
    #[serde(default)]
    pub environment: Option<String>,
    #[serde(default = "default_grid")]
    pub shot_grid: Vec<u64>,
    /// Per-kind counts aligned with `shot_grid`.
    #[serde(default)]
    pub samples_per_stratum: Option<StratumCounts>,
    /// Born probabilities instead of shots; needs a single-entry `shot_grid`.
    #[serde(default)]
    pub exact_mode: bool,
    #[serde(rename = "filter_K", default = "default_k")]
    pub filter_k: f64,
    #[serde(default = "default_threshold")]
    pub bad_qubit_threshold: f64,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
    #[serde(default)]
    pub bootstrap_seed: Option<u64>,
    #[serde(default)]
    pub welch_tail: Tail,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_true")]
    pub write_raw: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumCounts {
    #[serde(rename = "P", alias = "plaquette")]
    pub plaquette: Vec<usize>,
    #[serde(rename = "R", alias = "random")]
    pub random: Vec<usize>,
}

/// Either `builtin = "falcon27"` or an explicit `n_qubits` plus `edges`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub n_qubits: Option<usize>,
    #[serde(default)]
    pub edges: Option<Vec<[usize; 2]>>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self { builtin: Some("falcon27".into()), n_qubits: None, edges: None }
    }
}

/// Parameter intervals in rad/s; absent entries take the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    #[serde(default)]
    pub onsite: Option<Interval>,
    #[serde(default)]
    pub onsite_disorder: Option<Interval>,
    #[serde(default)]
    pub exchange: Option<Interval>,
    #[serde(default)]
    pub zz: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpamConfig {
    pub p_prep: f64,
    pub p_readout: f64,
}

impl Default for SpamConfig {
    fn default() -> Self {
        let d = CampaignConfig::default().spam;
        Self { p_prep: d.p_prep, p_readout: d.p_readout }
    }
}

fn default_devices() -> Vec<DeviceInstance> {
    CampaignConfig::default().devices
}
fn default_wait() -> f64 {
    800.0
}
fn default_radius() -> usize {
    2
}
fn default_max_qubits() -> usize {
    14
}
fn default_coordination() -> usize {
    3
}
fn default_cap() -> usize {
    qidle::tomography::DEFAULT_REGISTER_CAP
}
fn default_grid() -> Vec<u64> {
    DEFAULT_STRATUM_COUNTS.iter().map(|c| c.0).collect()
}
fn default_k() -> f64 {
    DEFAULT_FILTER_K
}
fn default_threshold() -> f64 {
    DEFAULT_BAD_QUBIT_THRESHOLD
}
fn default_n_boot() -> usize {
    1000
}
fn default_bins() -> usize {
    40
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.shot_grid.is_empty() {
            return bad("shot_grid is empty".into());
        }
        if self.shot_grid.contains(&0) {
            return bad("shot_grid entries must be positive".into());
        }
        let mut sorted = self.shot_grid.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.shot_grid.len() {
            return bad("shot_grid has repeated entries".into());
        }
        if self.exact_mode && self.shot_grid.len() != 1 {
            return bad("exact_mode needs a single-entry shot_grid".into());
        }
        if !(self.filter_k > 0.0) || !self.filter_k.is_finite() {
            return bad(format!("filter_K = {}", self.filter_k));
        }
        if !self.bad_qubit_threshold.is_finite() {
            return bad(format!("bad_qubit_threshold = {}", self.bad_qubit_threshold));
        }
        if self.n_boot < 100 {
            return bad(format!("n_boot = {}, at least 100 required", self.n_boot));
        }
        if self.histogram_bins == 0 {
            return bad("histogram_bins must be positive".into());
        }
        self.campaign().map(|_| ())
    }

    fn counts(&self) -> CliResult<(Vec<usize>, Vec<usize>)> {
        match &self.samples_per_stratum {
            Some(c) => {
                if c.plaquette.len() != self.shot_grid.len() || c.random.len() != self.shot_grid.len() {
                    return Err(CliError::Config(format!(
                        "samples_per_stratum needs {} entries per kind, one per shot_grid entry",
                        self.shot_grid.len()
                    )));
                }
                Ok((c.plaquette.clone(), c.random.clone()))
            }
            None if self.shot_grid == default_grid() => {
                Ok(DEFAULT_STRATUM_COUNTS.iter().map(|c| (c.1, c.2)).unzip())
            }
            None => Err(CliError::Config("samples_per_stratum is required for a custom shot_grid".into())),
        }
    }

    fn graph(&self) -> CliResult<CouplingGraph> {
        let g = &self.graph;
        match (&g.builtin, g.n_qubits, &g.edges) {
            (Some(name), None, None) if name == "falcon27" => Ok(CouplingGraph::falcon27()),
            (Some(name), None, None) => Err(CliError::Config(format!("unknown builtin graph {name:?}"))),
            (None, Some(n), Some(edges)) => {
                CouplingGraph::new(n, edges.iter().map(|e| (e[0], e[1]))).map_err(|e| CliError::Config(e.to_string()))
            }
            _ => Err(CliError::Config("graph needs either `builtin` or both `n_qubits` and `edges`".into())),
        }
    }

    pub fn campaign(&self) -> CliResult<CampaignConfig> {
        let (p, r) = self.counts()?;
        let defaults = HamiltonianDistribution::default();
        let h = &self.hamiltonian;
        let strata = self
            .shot_grid
            .iter()
            .zip(p.iter().zip(&r))
            .flat_map(|(&n, (&np, &nr))| {
                let n_shots = (!self.exact_mode).then_some(n);
                [
                    Stratum { kind: ComplementaryKind::Plaquette, n_shots, count: np },
                    Stratum { kind: ComplementaryKind::Random, n_shots, count: nr },
                ]
            })
            .collect();
        let campaign = CampaignConfig {
            graph: self.graph()?,
            devices: self.devices.clone(),
            hamiltonian: HamiltonianDistribution {
                onsite: h.onsite.unwrap_or(defaults.onsite),
                onsite_disorder: h.onsite_disorder.unwrap_or(defaults.onsite_disorder),
                exchange: h.exchange.unwrap_or(defaults.exchange),
                zz: h.zz.or(defaults.zz),
            },
            spam: SpamModel::new(self.spam.p_prep, self.spam.p_readout).map_err(|e| CliError::Config(e.to_string()))?,
            wait_time_ns: self.wait_time_ns,
            neighborhood_radius: self.neighborhood_radius,
            max_simulated_qubits: self.max_simulated_qubits,
            target_coordination: self.target_coordination,
            set_size: self.set_size,
            environment: self.environment.clone(),
            register_cap: self.register_cap,
            strata,
        };
        campaign.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(campaign)
    }

    pub fn analysis_params(&self) -> AnalysisParams {
        AnalysisParams {
            filter_k: self.filter_k,
            bad_qubit_threshold: self.bad_qubit_threshold,
            n_boot: self.n_boot,
            bootstrap_seed: self.bootstrap_seed.unwrap_or(self.master_seed),
            tail: self.welch_tail,
            histogram_bins: self.histogram_bins,
        }
    }
}
