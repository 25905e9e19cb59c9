//! Statistics over samples.csv: box filtering, Welch tests and extrapolation fits.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use qidle::protocol::ComplementaryKind;
use qidle::stats::{
    bootstrap_fit, box_filter, fit_pure_scaling, histogram, summarize, welch_one_tailed_with, BinSpec, ShotPoint,
    Summary, Tail, WelchResult, DEFAULT_BAD_QUBIT_THRESHOLD, DEFAULT_FILTER_K,
};
use serde::{Deserialize, Serialize};

use crate::archive::{self, SampleRow, FITS_CSV, HISTOGRAM_DIR, REPORT_JSON};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    #[serde(rename = "filter_K")]
    pub filter_k: f64,
    pub bad_qubit_threshold: f64,
    pub n_boot: usize,
    pub bootstrap_seed: u64,
    pub tail: Tail,
    pub histogram_bins: usize,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            filter_k: DEFAULT_FILTER_K,
            bad_qubit_threshold: DEFAULT_BAD_QUBIT_THRESHOLD,
            n_boot: 1000,
            bootstrap_seed: 0,
            tail: Tail::Normal,
            histogram_bins: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fences {
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadQubit {
    pub device_label: String,
    pub target: usize,
    /// Samples at or above the threshold.
    pub flagged: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    pub kind: ComplementaryKind,
    /// 0 for exact mode.
    pub n_shots: u64,
    pub n_total: usize,
    pub n_kept: usize,
    pub n_outliers: usize,
    pub fences: Option<Fences>,
    /// Of the kept samples.
    pub summary: Option<Summary>,
    pub histogram: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelchReport {
    pub n_shots: u64,
    /// Alternative: plaquette mean above random mean.
    pub result: Option<WelchResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: ComplementaryKind,
    pub points: Vec<ShotPoint>,
    pub eta: Option<f64>,
    pub eta_stderr: Option<f64>,
    pub eta_shots: Option<f64>,
    pub eta_shots_stderr: Option<f64>,
    pub n_boot: usize,
    /// Coefficient of `mean = c/√N_S`.
    pub pure_scaling: Option<f64>,
    pub pure_scaling_weighted_r_squared: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(flatten)]
    pub params: AnalysisParams,
    pub n_samples: usize,
    pub strata: Vec<StratumReport>,
    pub welch: Vec<WelchReport>,
    pub fits: Vec<FitReport>,
    /// Plaquette samples with `Δχ` at or above the threshold, before filtering.
    pub bad_qubits: Vec<BadQubit>,
}

pub struct Analysis {
    pub report: Report,
    /// File name and bins, for histograms/.
    pub histograms: Vec<(String, Vec<(f64, usize)>)>,
}

fn histogram_name(kind: ComplementaryKind, n_shots: u64) -> String {
    format!("{kind}_{n_shots}.csv")
}

/// Everything is computed from the rows alone.
pub fn analyze(rows: &[SampleRow], params: &AnalysisParams) -> Analysis {
    let mut groups: BTreeMap<(u64, ComplementaryKind), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.n_shots, r.kind)).or_default().push(r.delta_chi);
    }

    let mut strata = Vec::new();
    let mut kept_by: BTreeMap<(u64, ComplementaryKind), Vec<f64>> = BTreeMap::new();
    let mut histograms = Vec::new();
    for (&(n_shots, kind), values) in &groups {
        let mut s = StratumReport {
            kind,
            n_shots,
            n_total: values.len(),
            n_kept: 0,
            n_outliers: 0,
            fences: None,
            summary: None,
            histogram: None,
            error: None,
        };
        match box_filter(values, params.filter_k) {
            Ok(out) => {
                s.n_kept = out.kept.len();
                s.n_outliers = out.outliers.len();
                s.fences = Some(Fences {
                    q1: out.spec.q1,
                    q3: out.spec.q3,
                    iqr: out.spec.iqr,
                    lower: out.spec.lower(),
                    upper: out.spec.upper(),
                });
                match summarize(&out.kept) {
                    Ok(summary) => s.summary = Some(summary),
                    Err(e) => s.error = Some(format!("after filtering: {e}")),
                }
                if let Ok(bins) = histogram(&out.kept, BinSpec::Count(params.histogram_bins)) {
                    let name = histogram_name(kind, n_shots);
                    s.histogram = Some(format!("{HISTOGRAM_DIR}/{name}"));
                    histograms.push((name, bins));
                }
                kept_by.insert((n_shots, kind), out.kept);
            }
            Err(e) => s.error = Some(e.to_string()),
        }
        strata.push(s);
    }

    let shot_counts: Vec<u64> = {
        let mut v: Vec<u64> = groups.keys().map(|k| k.0).collect();
        v.dedup();
        v
    };
    let welch = shot_counts
        .iter()
        .map(|&n| {
            let p = kept_by.get(&(n, ComplementaryKind::Plaquette));
            let r = kept_by.get(&(n, ComplementaryKind::Random));
            let (result, error) = match (p, r) {
                (Some(p), Some(r)) => match welch_one_tailed_with(p, r, params.tail) {
                    Ok(w) => (Some(w), None),
                    Err(e) => (None, Some(e.to_string())),
                },
                _ => (None, Some("needs filtered plaquette and random strata".to_string())),
            };
            WelchReport { n_shots: n, result, error }
        })
        .collect();

    let fits = [ComplementaryKind::Plaquette, ComplementaryKind::Random]
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let points: Vec<ShotPoint> = strata
                .iter()
                .filter(|s| s.kind == kind && s.n_shots > 0)
                .filter_map(|s| {
                    let sm = s.summary?;
                    (sm.sem > 0.0).then_some(ShotPoint { n_shots: s.n_shots as f64, mean: sm.mean, stderr: sm.sem })
                })
                .collect();
            let mut f = FitReport {
                kind,
                points: points.clone(),
                eta: None,
                eta_stderr: None,
                eta_shots: None,
                eta_shots_stderr: None,
                n_boot: params.n_boot,
                pure_scaling: None,
                pure_scaling_weighted_r_squared: None,
                error: None,
            };
            match bootstrap_fit(&points, params.n_boot, params.bootstrap_seed.wrapping_add(i as u64)) {
                Ok(b) => {
                    f.eta = Some(b.eta);
                    f.eta_stderr = Some(b.eta_stderr);
                    f.eta_shots = Some(b.eta_shots);
                    f.eta_shots_stderr = Some(b.eta_shots_stderr);
                }
                Err(e) => f.error = Some(e.to_string()),
            }
            if let Ok(s) = fit_pure_scaling(&points) {
                f.pure_scaling = Some(s.coefficient);
                f.pure_scaling_weighted_r_squared = Some(s.weighted_r_squared);
            }
            f
        })
        .collect();

    let mut tally: BTreeMap<(String, usize), (usize, usize)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.kind == ComplementaryKind::Plaquette) {
        let e = tally.entry((r.device_label.clone(), r.target)).or_default();
        e.1 += 1;
        if r.delta_chi >= params.bad_qubit_threshold {
            e.0 += 1;
        }
    }
    let bad_qubits = tally
        .into_iter()
        .filter(|(_, (flagged, _))| *flagged > 0)
        .map(|((device_label, target), (flagged, samples))| BadQubit { device_label, target, flagged, samples })
        .collect();

    Analysis {
        report: Report { params: *params, n_samples: rows.len(), strata, welch, fits, bad_qubits },
        histograms,
    }
}

/// Writes report.json, fits.csv and histograms/ into `dir`.
pub fn write_analysis(dir: &Path, analysis: &Analysis) -> CliResult<()> {
    archive::write_json(&dir.join(REPORT_JSON), &analysis.report)?;

    let fits_path = dir.join(FITS_CSV);
    let mut w = csv::Writer::from_path(&fits_path).map_err(|e| CliError::format(&fits_path, e))?;
    w.write_record(["kind", "eta", "eta_stderr", "eta_shots", "eta_shots_stderr", "n_boot"])
        .map_err(|e| CliError::format(&fits_path, e))?;
    for f in &analysis.report.fits {
        let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            f.kind.to_string(),
            cell(f.eta),
            cell(f.eta_stderr),
            cell(f.eta_shots),
            cell(f.eta_shots_stderr),
            f.n_boot.to_string(),
        ])
        .map_err(|e| CliError::format(&fits_path, e))?;
    }
    w.flush().map_err(CliError::io(&fits_path))?;

    let hist_dir = dir.join(HISTOGRAM_DIR);
    if hist_dir.exists() {
        fs::remove_dir_all(&hist_dir).map_err(CliError::io(&hist_dir))?;
    }
    fs::create_dir_all(&hist_dir).map_err(CliError::io(&hist_dir))?;
    for (name, bins) in &analysis.histograms {
        let path = hist_dir.join(name);
        let mut text = String::from("bin_lower,count\n");
        for (lower, count) in bins {
            text.push_str(&format!("{lower},{count}\n"));
        }
        fs::File::create(&path)
            .and_then(|mut f| f.write_all(text.as_bytes()))
            .map_err(CliError::io(&path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(kind: ComplementaryKind, n_shots: u64, values: &[f64]) -> Vec<SampleRow> {
        values
            .iter()
            .enumerate()
            .map(|(i, &d)| SampleRow {
                sample_index: i,
                device_label: "device-a".into(),
                target: i % 3,
                kind,
                members: "1;2;3".into(),
                n_shots,
                wait_time_ns: 800.0,
                chi_s: 1.0 - d,
                chi_sq: 1.0,
                delta_chi: d,
                seed: i as u64,
            })
            .collect()
    }

    #[test]
    fn strata_welch_and_thresholds() {
        let mut all = rows(ComplementaryKind::Plaquette, 4000, &[0.05, 0.06, 0.07, 0.08, 0.5]);
        all.extend(rows(ComplementaryKind::Random, 4000, &[0.01, 0.02, 0.03, 0.04]));
        all.extend(rows(ComplementaryKind::Random, 8000, &[0.01]));
        let a = analyze(&all, &AnalysisParams::default());
        let r = &a.report;
        assert_eq!(r.params.filter_k, 4.0);
        assert_eq!(r.strata.len(), 3);
        let p = &r.strata[0];
        assert_eq!((p.kind, p.n_total, p.n_outliers), (ComplementaryKind::Plaquette, 5, 1));
        assert!((p.summary.unwrap().mean - 0.065).abs() < 1e-12);
        assert!(r.strata[2].error.is_some());
        let w = r.welch[0].result.unwrap();
        assert!(w.statistic > 0.0 && w.p_value < 0.01);
        assert!(r.welch[1].error.is_some());
        assert!(r.fits.iter().all(|f| f.error.is_some()));
        assert_eq!(r.bad_qubits.len(), 1);
        assert_eq!(r.bad_qubits[0].flagged, 1);
        assert_eq!(a.histograms.len(), 2);
    }

    #[test]
    fn report_is_written() {
        let mut all = Vec::new();
        for (n, base) in [(1000u64, 0.04), (4000, 0.02), (16000, 0.01)] {
            let vals: Vec<f64> = (0..10).map(|i| base + 0.001 * i as f64).collect();
            all.extend(rows(ComplementaryKind::Plaquette, n, &vals));
            all.extend(rows(ComplementaryKind::Random, n, &vals));
        }
        let a = analyze(&all, &AnalysisParams { n_boot: 200, ..Default::default() });
        assert!(a.report.fits.iter().all(|f| f.eta.is_some()));
        let dir = tempfile::tempdir().unwrap();
        write_analysis(dir.path(), &a).unwrap();
        let fits = fs::read_to_string(dir.path().join(FITS_CSV)).unwrap();
        assert!(fits.starts_with("kind,eta,eta_stderr,eta_shots,eta_shots_stderr,n_boot\nP,"));
        let h = fs::read_to_string(dir.path().join("histograms/P_1000.csv")).unwrap();
        assert!(h.starts_with("bin_lower,count\n"));
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(REPORT_JSON)).unwrap()).unwrap();
        assert_eq!(json["filter_K"], 4.0);
        assert_eq!(json["bad_qubit_threshold"], 0.12);
        assert_eq!(json["tail"], "normal");
    }
}
