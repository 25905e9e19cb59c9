//! Tomography and `Δχ` from externally produced shot dictionaries.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use qidle::protocol::delta_chi;
use qidle::qstate::{Pauli, PauliString};
use qidle::tomography::{expectation_ratio, marginalize, tomograph_from_counts};
use serde::{Deserialize, Serialize};

use crate::analyze::{analyze, write_analysis, AnalysisParams};
use crate::archive::{self, join_members, RawRun, SampleRow, Staging, METADATA_JSON, SAMPLES_CSV};
use crate::error::{CliError, CliResult};

pub const VERIFICATION_LOG: &str = "verification.log";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Registers larger than this are not enumerated in the verification log.
const LOG_MAX_QUBITS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileError {
    pub file: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub ingested: Vec<String>,
    pub errors: Vec<FileError>,
    /// Valid files that could not be paired into a sample.
    pub unpaired: Vec<FileError>,
    pub warnings: Vec<String>,
    pub n_samples: usize,
}

fn is_dictionary_file(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    name.ends_with(".json") || name.ends_with(".json.gz")
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> CliResult<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(CliError::io(dir))?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, out)?;
        } else if is_dictionary_file(&p) {
            out.push(p);
        }
    }
    Ok(())
}

/// Exact marginal expectations of every string whose consistent bases were all measured.
pub fn verification_lines(name: &str, run: &RawRun) -> Vec<String> {
    let m = run.register.len();
    if m > LOG_MAX_QUBITS {
        return vec![format!("{name}\t{m}-qubit register, not enumerated")];
    }
    let present: BTreeSet<&PauliString> = run.dictionaries.iter().map(|d| d.basis()).collect();
    let mut lines = Vec::new();
    for target in PauliString::enumerate(m, &Pauli::ALL) {
        if target.is_identity() {
            continue;
        }
        if !qidle::tomography::consistent_bases(&target).iter().all(|b| present.contains(b)) {
            continue;
        }
        let Ok(marginal) = marginalize(&run.dictionaries, &target) else { continue };
        let Ok(value) = expectation_ratio(&marginal) else { continue };
        let counts: Vec<String> = marginal.counts().iter().map(|(b, c)| format!("{b}:{c}")).collect();
        lines.push(format!(
            "{name}\t{target}\t{value}\t{:.12}\t{}\t{}",
            *value.numer() as f64 / *value.denom() as f64,
            marginal.n_shots(),
            counts.join(" ")
        ));
    }
    lines
}

pub struct IngestSummary {
    pub archive: PathBuf,
    pub manifest: Manifest,
}

pub fn ingest(dir: &Path, out: &Path, force: bool) -> CliResult<IngestSummary> {
    if !dir.is_dir() {
        return Err(CliError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        });
    }
    let mut files = Vec::new();
    collect_files(dir, &mut files)?;
    let mut manifest = Manifest::default();
    if files.is_empty() {
        let w = format!("no dictionary files in {}", dir.display());
        eprintln!("warning: {w}");
        manifest.warnings.push(w);
    }

    let mut log = vec!["# file\tpauli\texact\tdecimal\tshots\tmarginal counts".to_string()];
    let mut runs: Vec<(String, RawRun)> = Vec::new();
    for path in &files {
        let name = path.strip_prefix(dir).unwrap_or(path).display().to_string();
        let parsed = archive::read_raw(path).and_then(|r| r.validate().map(|_| r).map_err(|e| CliError::format(path, e)));
        match parsed {
            Ok(run) => {
                log.extend(verification_lines(&name, &run));
                manifest.ingested.push(name.clone());
                runs.push((name, run));
            }
            Err(e) => {
                eprintln!("warning: skipping {e}");
                manifest.errors.push(FileError { file: name, error: e.to_string() });
            }
        }
    }

    let mut by_sample: BTreeMap<usize, Vec<(String, RawRun)>> = BTreeMap::new();
    for (name, run) in runs {
        match (run.sample_index, run.message) {
            (Some(i), Some(_)) => by_sample.entry(i).or_default().push((name, run)),
            _ => manifest
                .unpaired
                .push(FileError { file: name, error: "no sample_index/message metadata".into() }),
        }
    }
    let mut rows = Vec::new();
    for (index, group) in by_sample {
        let names: Vec<String> = group.iter().map(|(n, _)| n.clone()).collect();
        match sample_row(index, group) {
            Ok(row) => rows.push(row),
            Err(e) => {
                for file in names {
                    manifest.unpaired.push(FileError { file, error: e.clone() });
                }
            }
        }
    }
    manifest.n_samples = rows.len();

    let staging = Staging::new(out, force)?;
    archive::write_samples(&staging.path().join(SAMPLES_CSV), &rows)?;
    let log_path = staging.path().join(VERIFICATION_LOG);
    fs::write(&log_path, log.join("\n") + "\n").map_err(CliError::io(&log_path))?;
    write_analysis(staging.path(), &analyze(&rows, &AnalysisParams::default()))?;
    archive::write_json(&staging.path().join(MANIFEST_JSON), &manifest)?;
    archive::write_json(
        &staging.path().join(METADATA_JSON),
        &serde_json::json!({
            "command": "ingest",
            "source": dir.display().to_string(),
            "created": chrono::Utc::now().to_rfc3339(),
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )?;
    let archive = staging.commit()?;
    Ok(IngestSummary { archive, manifest })
}

fn sample_row(index: usize, group: Vec<(String, RawRun)>) -> Result<SampleRow, String> {
    let mut by_message: [Option<RawRun>; 2] = [None, None];
    for (_, run) in group {
        let m = run.message.expect("grouped on message") as usize;
        if by_message[m].replace(run).is_some() {
            return Err(format!("sample {index}: message {m} appears twice"));
        }
    }
    let [Some(r0), Some(r1)] = by_message else {
        return Err(format!("sample {index}: needs both messages 0 and 1"));
    };
    if r0.register != r1.register || r0.n_shots != r1.n_shots {
        return Err(format!("sample {index}: messages disagree on register or shot count"));
    }
    let kind = r0.kind.or(r1.kind).ok_or_else(|| format!("sample {index}: kind missing"))?;
    let t0 = tomograph_from_counts::<f64>(&r0.register, r0.dictionaries.clone()).map_err(|e| e.to_string())?;
    let t1 = tomograph_from_counts::<f64>(&r1.register, r1.dictionaries.clone()).map_err(|e| e.to_string())?;
    let d = delta_chi(&t0.tomogram.rephysicalized, &t1.tomogram.rephysicalized, 0).map_err(|e| e.to_string())?;
    let members = &r0.register[1..];
    Ok(SampleRow {
        sample_index: index,
        device_label: r0.device_label.clone().unwrap_or_else(|| "external".into()),
        target: r0.register[0],
        kind,
        members: join_members(members),
        n_shots: r0.n_shots,
        wait_time_ns: r0.wait_time_ns.unwrap_or(0.0),
        chi_s: d.chi_s,
        chi_sq: d.chi_sq,
        delta_chi: d.chi_sq - d.chi_s,
        seed: r0.seed.unwrap_or(0),
    })
}
