//! `qidle run`: execute a campaign and write its archive.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use qidle::protocol::{run_campaign_with, SampleOutcome};

use crate::analyze::{analyze, write_analysis};
use crate::archive::{self, raw_file_name, RawRun, SampleRow, Staging, CONFIG_TOML, METADATA_JSON, RAW_DIR, SAMPLES_CSV};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub struct RunOptions {
    pub force: bool,
    pub progress: bool,
}

pub struct RunSummary {
    pub archive: PathBuf,
    pub n_samples: usize,
}

pub fn run_config_file(config_path: &Path, out: &Path, options: &RunOptions) -> CliResult<RunSummary> {
    let text = fs::read_to_string(config_path).map_err(CliError::io(config_path))?;
    run_config_text(&text, out, options)
}

/// The archive content depends only on `text`, apart from metadata.json.
pub fn run_config_text(text: &str, out: &Path, options: &RunOptions) -> CliResult<RunSummary> {
    let config = ExperimentConfig::from_toml(text)?;
    let campaign = config.campaign()?;
    let staging = Staging::new(out, options.force)?;
    let raw_dir = if config.write_raw { Some(staging.subdir(RAW_DIR)?) } else { None };

    let total = campaign.total_samples();
    let done = AtomicUsize::new(0);
    let write_error: Mutex<Option<CliError>> = Mutex::new(None);
    let started = Instant::now();
    let on_sample = |outcome: &SampleOutcome<f64>| {
        if let Some(dir) = &raw_dir {
            if let Err(e) = write_outcome(dir, outcome, config.wait_time_ns) {
                write_error.lock().expect("poisoned").get_or_insert(e);
            }
        }
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if options.progress && (n == total || n.is_multiple_of((total / 100).max(1))) {
            eprintln!("[{n}/{total}] {:.1}s", started.elapsed().as_secs_f64());
        }
    };
    let samples = run_campaign_with(&campaign, config.master_seed, on_sample)?;
    if let Some(e) = write_error.into_inner().expect("poisoned") {
        return Err(e);
    }

    let rows: Vec<SampleRow> = samples.iter().map(|s| SampleRow::from_sample(s, config.wait_time_ns)).collect();
    archive::write_samples(&staging.path().join(SAMPLES_CSV), &rows)?;
    let config_path = staging.path().join(CONFIG_TOML);
    fs::write(&config_path, text).map_err(CliError::io(&config_path))?;
    write_analysis(staging.path(), &analyze(&rows, &config.analysis_params()))?;
    archive::write_json(
        &staging.path().join(METADATA_JSON),
        &serde_json::json!({
            "command": "run",
            "created": chrono::Utc::now().to_rfc3339(),
            "elapsed_seconds": started.elapsed().as_secs_f64(),
            "threads": rayon::current_num_threads(),
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )?;
    let archive = staging.commit()?;
    Ok(RunSummary { archive, n_samples: rows.len() })
}

fn write_outcome(dir: &Path, outcome: &SampleOutcome<f64>, wait_time_ns: f64) -> CliResult<()> {
    let s = &outcome.sample;
    let Some(n_shots) = s.n_shots else {
        return Ok(());
    };
    for (message, run) in outcome.runs.iter().enumerate() {
        let raw = RawRun {
            register: s.set.register(),
            n_shots,
            dictionaries: run.dictionaries.clone(),
            sample_index: Some(s.sample_index),
            message: Some(message as u8),
            device_label: Some(s.device_label.clone()),
            kind: Some(s.set.kind),
            wait_time_ns: Some(wait_time_ns),
            seed: Some(s.seed),
        };
        archive::write_raw(&dir.join(raw_file_name(s.sample_index, message)), &raw)?;
    }
    Ok(())
}
