//! The leakage protocol: Holevo quantities, `Δχ`, complementary sets, and
//! single-sample and campaign orchestration.

mod campaign;
mod holevo;
mod sample;

pub use campaign::{
    reproduce_sample, run_campaign, run_campaign_with, sample_seed, default_strata, CampaignConfig, DeviceInstance,
    HamiltonianDistribution, Interval, Stratum, DEFAULT_STRATUM_COUNTS,
};
pub use holevo::{delta_chi, holevo, Alphabet, DeltaChi};
pub use sample::{
    run_leakage_sample, run_leakage_sample_detailed, select_complementary, ComplementaryKind, ComplementarySet,
    LeakageSample, ProtocolConfig, SampleOutcome,
};
