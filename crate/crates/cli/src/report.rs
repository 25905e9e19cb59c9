//! `qidle analyze` and `qidle report`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qidle::stats::Tail;

use crate::analyze::{analyze, write_analysis, AnalysisParams, Report};
use crate::archive::{self, CONFIG_TOML, REPORT_JSON, SAMPLES_CSV};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// Parameters stored with the archive, or the defaults for ingested archives.
pub fn archive_params(dir: &Path) -> CliResult<AnalysisParams> {
    let path = dir.join(CONFIG_TOML);
    if !path.exists() {
        return Ok(AnalysisParams::default());
    }
    let text = fs::read_to_string(&path).map_err(CliError::io(&path))?;
    Ok(ExperimentConfig::from_toml(&text)?.analysis_params())
}

/// Re-runs the analysis of `dir` in place.
pub fn analyze_archive(dir: &Path, filter_k: Option<f64>, tail: Option<Tail>) -> CliResult<Report> {
    let mut params = archive_params(dir)?;
    if let Some(k) = filter_k {
        if !(k > 0.0) || !k.is_finite() {
            return Err(CliError::Config(format!("filter K = {k}")));
        }
        params.filter_k = k;
    }
    if let Some(t) = tail {
        params.tail = t;
    }
    let rows = archive::read_samples(&dir.join(SAMPLES_CSV))?;
    let analysis = analyze(&rows, &params);
    write_analysis(dir, &analysis)?;
    Ok(analysis.report)
}

pub fn load_report(dir: &Path) -> CliResult<Report> {
    let path = dir.join(REPORT_JSON);
    let text = fs::read_to_string(&path).map_err(CliError::io(&path))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(&path, e))
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map(|v| format!("{v:.digits$}")).unwrap_or_else(|| "-".into())
}

fn shots_label(n_shots: u64) -> String {
    if n_shots == 0 {
        "exact".into()
    } else {
        n_shots.to_string()
    }
}

/// Plain-text summary of a report.
pub fn render(report: &Report) -> String {
    let p = &report.params;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} samples; K = {}, bad-qubit threshold = {}, tail = {:?}, bootstrap = {}",
        report.n_samples, p.filter_k, p.bad_qubit_threshold, p.tail, p.n_boot
    );
    let _ = writeln!(s, "\n{:>4} {:>7} {:>6} {:>6} {:>10} {:>10}  note", "kind", "N_S", "n", "kept", "mean", "sem");
    for st in &report.strata {
        let n_shots = shots_label(st.n_shots);
        let _ = writeln!(
            s,
            "{:>4} {:>7} {:>6} {:>6} {:>10} {:>10}  {}",
            st.kind.to_string(),
            n_shots,
            st.n_total,
            st.n_kept,
            opt(st.summary.map(|x| x.mean), 6),
            opt(st.summary.map(|x| x.sem), 6),
            st.error.as_deref().unwrap_or("")
        );
    }
    let _ = writeln!(s, "\nWelch (P > R):\n{:>7} {:>9} {:>9} {:>11}", "N_S", "z", "df", "p");
    for w in &report.welch {
        match &w.result {
            Some(r) => {
                let _ = writeln!(
                    s,
                    "{:>7} {:>9.4} {:>9.1} {:>11.4e}",
                    shots_label(w.n_shots),
                    r.statistic,
                    r.df,
                    r.p_value
                );
            }
            None => {
                let _ = writeln!(s, "{:>7}  {}", shots_label(w.n_shots), w.error.as_deref().unwrap_or(""));
            }
        }
    }
    let _ = writeln!(s, "\nFits, mean = eta + eta_shots/sqrt(N_S):");
    for f in &report.fits {
        match f.eta {
            Some(_) => {
                let _ = writeln!(
                    s,
                    "  {}: eta = {} ± {}, eta_shots = {} ± {}, pure c/sqrt(N_S) R² = {}",
                    f.kind,
                    opt(f.eta, 6),
                    opt(f.eta_stderr, 6),
                    opt(f.eta_shots, 4),
                    opt(f.eta_shots_stderr, 4),
                    opt(f.pure_scaling_weighted_r_squared, 4)
                );
            }
            None => {
                let _ = writeln!(s, "  {}: {}", f.kind, f.error.as_deref().unwrap_or(""));
            }
        }
    }
    if !report.bad_qubits.is_empty() {
        let _ = writeln!(s, "\nPlaquette samples at or above {}:", p.bad_qubit_threshold);
        for b in &report.bad_qubits {
            let _ = writeln!(s, "  {} qubit {}: {}/{}", b.device_label, b.target, b.flagged, b.samples);
        }
    }
    s
}
