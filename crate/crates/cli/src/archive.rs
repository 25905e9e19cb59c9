//! On-disk layout of a results archive.
//!
//! ```text
//! samples.csv        one row per sample
//! raw/*.json.gz      shot dictionaries, one file per tomography run
//! report.json        analysis summary
//! fits.csv           extrapolation fits
//! histograms/*.csv   filtered Δχ histograms per stratum
//! config.toml        the configuration that produced the archive
//! metadata.json      timestamps and other run-dependent details
//! ```

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use qidle::device::ShotDictionary;
use qidle::protocol::{ComplementaryKind, LeakageSample};
use serde::{Deserialize, Serialize};
use tempfile::TempDir;

use crate::error::{CliError, CliResult};

pub const SAMPLES_CSV: &str = "samples.csv";
pub const REPORT_JSON: &str = "report.json";
pub const FITS_CSV: &str = "fits.csv";
pub const CONFIG_TOML: &str = "config.toml";
pub const METADATA_JSON: &str = "metadata.json";
pub const RAW_DIR: &str = "raw";
pub const HISTOGRAM_DIR: &str = "histograms";

/// One line of samples.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub sample_index: usize,
    pub device_label: String,
    pub target: usize,
    pub kind: ComplementaryKind,
    /// Complementary qubits joined by `;`.
    pub members: String,
    /// 0 in exact mode.
    pub n_shots: u64,
    pub wait_time_ns: f64,
    #[serde(rename = "chi_S")]
    pub chi_s: f64,
    #[serde(rename = "chi_SQ")]
    pub chi_sq: f64,
    pub delta_chi: f64,
    pub seed: u64,
}

impl SampleRow {
    pub fn from_sample(s: &LeakageSample, wait_time_ns: f64) -> Self {
        Self {
            sample_index: s.sample_index,
            device_label: s.device_label.clone(),
            target: s.target,
            kind: s.set.kind,
            members: join_members(&s.set.members),
            n_shots: s.n_shots.unwrap_or(0),
            wait_time_ns,
            chi_s: s.chi_s,
            chi_sq: s.chi_sq,
            delta_chi: s.delta_chi,
            seed: s.seed,
        }
    }
}

pub fn join_members(members: &[usize]) -> String {
    members.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(";")
}

/// Shot dictionaries of one tomography run, plus optional sample metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRun {
    pub register: Vec<usize>,
    pub n_shots: u64,
    pub dictionaries: Vec<ShotDictionary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_index: Option<usize>,
    /// Initial bit of the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ComplementaryKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wait_time_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RawRun {
    pub fn validate(&self) -> Result<(), String> {
        if self.register.is_empty() {
            return Err("empty register".into());
        }
        for d in &self.dictionaries {
            if d.basis().len() != self.register.len() {
                return Err(format!("basis {} does not match a register of {}", d.basis(), self.register.len()));
            }
            if d.n_shots() != self.n_shots {
                return Err(format!("basis {} has {} shots, n_shots is {}", d.basis(), d.n_shots(), self.n_shots));
            }
        }
        if let Some(m) = self.message {
            if m > 1 {
                return Err(format!("message {m} is not a bit"));
            }
        }
        Ok(())
    }
}

pub fn raw_file_name(sample_index: usize, message: usize) -> String {
    format!("s{sample_index:06}_m{message}.json.gz")
}

pub fn write_raw(path: &Path, run: &RawRun) -> CliResult<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut gz = GzEncoder::new(BufWriter::new(file), Compression::default());
    serde_json::to_writer(&mut gz, run).map_err(|e| CliError::format(path, e))?;
    gz.finish().and_then(|mut w| w.flush()).map_err(CliError::io(path))
}

/// Reads a `.json` or `.json.gz` dictionary file.
pub fn read_raw(path: &Path) -> CliResult<RawRun> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let mut text = String::new();
    let gz = path.extension().is_some_and(|e| e == "gz");
    if gz {
        GzDecoder::new(BufReader::new(file)).read_to_string(&mut text)
    } else {
        BufReader::new(file).read_to_string(&mut text)
    }
    .map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

pub fn write_samples(path: &Path, rows: &[SampleRow]) -> CliResult<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    if rows.is_empty() {
        w.write_record([
            "sample_index", "device_label", "target", "kind", "members", "n_shots", "wait_time_ns", "chi_S", "chi_SQ",
            "delta_chi", "seed",
        ])
        .map_err(|e| CliError::format(path, e))?;
    }
    for row in rows {
        w.serialize(row).map_err(|e| CliError::format(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn read_samples(path: &Path) -> CliResult<Vec<SampleRow>> {
    let file = File::open(path).map_err(CliError::io(path))?;
    csv::Reader::from_reader(BufReader::new(file))
        .deserialize()
        .collect::<Result<Vec<SampleRow>, _>>()
        .map_err(|e| CliError::format(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

/// Directory assembled next to its destination and renamed into place when complete.
pub struct Staging {
    dir: TempDir,
    dest: PathBuf,
}

impl Staging {
    pub fn new(dest: &Path, force: bool) -> CliResult<Self> {
        if dest.exists() && !force {
            return Err(CliError::Io {
                path: dest.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::AlreadyExists, "archive exists (use --force)"),
            });
        }
        let parent = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(CliError::io(&parent))?;
        let dir = tempfile::Builder::new().prefix(".qidle-staging-").tempdir_in(&parent).map_err(CliError::io(&parent))?;
        Ok(Self { dir, dest: dest.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn subdir(&self, name: &str) -> CliResult<PathBuf> {
        let p = self.dir.path().join(name);
        fs::create_dir_all(&p).map_err(CliError::io(&p))?;
        Ok(p)
    }

    pub fn commit(self) -> CliResult<PathBuf> {
        let staged = self.dir.keep();
        if self.dest.exists() {
            fs::remove_dir_all(&self.dest).map_err(CliError::io(&self.dest))?;
        }
        fs::rename(&staged, &self.dest).map_err(CliError::io(&self.dest))?;
        Ok(self.dest)
    }
}
