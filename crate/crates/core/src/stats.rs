//! Post-processing of `Δχ` samples: outlier filtering, the one-tailed Welch
//! test, the shot-noise ansatz fit with parametric bootstrap errors, and
//! histograms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default box-filter tolerance `K`.
pub const DEFAULT_FILTER_K: f64 = 4.0;
/// Default `Δχ` above which a target is reported as a bad qubit.
pub const DEFAULT_BAD_QUBIT_THRESHOLD: f64 = 0.12;

/// Quantile by linear interpolation between order statistics at `(n−1)·q`.
///
/// `sorted` must be ascending and nonempty.
pub fn quantile_type7<T: Real>(sorted: &[T], q: T) -> T {
    let n = sorted.len();
    let h = T::from_usize(n - 1).unwrap() * q;
    let lo = h.floor();
    let i = lo.as_f64() as usize;
    if i + 1 >= n {
        return sorted[n - 1];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

fn sorted_copy<T: Real>(samples: &[T]) -> Vec<T> {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    v
}

/// Fences `[Q1 − K·IQR, Q3 + K·IQR]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec<T> {
    pub k: T,
    pub q1: T,
    pub q3: T,
    pub iqr: T,
}

impl<T: Real> FilterSpec<T> {
    pub fn from_samples(samples: &[T], k: T) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::TooFewSamples { needed: 4, got: samples.len() });
        }
        if !(k > T::zero()) {
            return Err(Error::InvalidParameter(format!("filter tolerance K = {k}")));
        }
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample {x}")));
        }
        let sorted = sorted_copy(samples);
        let q1 = quantile_type7(&sorted, T::lit(0.25));
        let q3 = quantile_type7(&sorted, T::lit(0.75));
        Ok(Self { k, q1, q3, iqr: q3 - q1 })
    }

    pub fn lower(&self) -> T {
        self.q1 - self.k * self.iqr
    }

    pub fn upper(&self) -> T {
        self.q3 + self.k * self.iqr
    }

    pub fn contains(&self, x: T) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    /// Splits `samples` into `(kept, outliers)`, preserving order.
    pub fn apply(&self, samples: &[T]) -> (Vec<T>, Vec<T>) {
        samples.iter().partition(|&&x| self.contains(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome<T> {
    pub kept: Vec<T>,
    pub outliers: Vec<T>,
    pub spec: FilterSpec<T>,
}

/// Box filter with fences computed from `samples` themselves.
pub fn box_filter<T: Real>(samples: &[T], k: T) -> Result<FilterOutcome<T>> {
    let spec = FilterSpec::from_samples(samples, k)?;
    let (kept, outliers) = spec.apply(samples);
    Ok(FilterOutcome { kept, outliers, spec })
}

/// Mean, sample standard deviation and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub sem: f64,
}

pub fn summarize<T: Real>(samples: &[T]) -> Result<Summary> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: samples.len() });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|x| x.as_f64()).sum::<f64>() / n;
    let var = samples.iter().map(|x| (x.as_f64() - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std_dev = var.sqrt();
    Ok(Summary { n: samples.len(), mean, std_dev, sem: std_dev / n.sqrt() })
}

/// Distribution used to turn the Welch statistic into a p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Standard normal.
    #[default]
    Normal,
    /// Student t with the Welch–Satterthwaite degrees of freedom.
    StudentT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub statistic: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// One-tailed, for the alternative `mean_a > mean_b`.
    pub p_value: f64,
    pub tail: Tail,
}

/// One-tailed Welch test of `H₀: mean_a ≤ mean_b`, normal tail.
pub fn welch_one_tailed<T: Real>(a: &[T], b: &[T]) -> Result<WelchResult> {
    welch_one_tailed_with(a, b, Tail::Normal)
}

pub fn welch_one_tailed_with<T: Real>(a: &[T], b: &[T], tail: Tail) -> Result<WelchResult> {
    let sa = summarize(a)?;
    let sb = summarize(b)?;
    welch_from_summaries(&sa, &sb, tail)
}

/// Welch test from group summaries alone.
pub fn welch_from_summaries(a: &Summary, b: &Summary, tail: Tail) -> Result<WelchResult> {
    let va = a.sem * a.sem;
    let vb = b.sem * b.sem;
    if va + vb == 0.0 {
        return Err(Error::Degenerate("both groups have zero variance".into()));
    }
    let statistic = (a.mean - b.mean) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.n as f64 - 1.0) + vb * vb / (b.n as f64 - 1.0));
    let p_value = match tail {
        Tail::Normal => Normal::standard().sf(statistic),
        Tail::StudentT => StudentsT::new(0.0, 1.0, df)
            .map_err(|e| Error::Degenerate(e.to_string()))?
            .sf(statistic),
    };
    Ok(WelchResult { statistic, df, p_value: p_value.clamp(0.0, 1.0), tail })
}

/// Mean `Δχ` at one shot count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotPoint {
    pub n_shots: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Parameters of `mean = η + η_shots/√N_S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzFit {
    pub eta: f64,
    pub eta_shots: f64,
}

fn check_points(points: &[ShotPoint]) -> Result<Vec<ShotPoint>> {
    for p in points {
        if !(p.n_shots > 0.0) || !p.mean.is_finite() || !(p.stderr > 0.0) || !p.stderr.is_finite() {
            return Err(Error::InvalidParameter(format!("bad fit point {p:?}")));
        }
    }
    let mut sorted = points.to_vec();
    // fixed summation order makes the fit independent of input order
    sorted.sort_by(|a, b| {
        (a.n_shots, a.mean, a.stderr).partial_cmp(&(b.n_shots, b.mean, b.stderr)).expect("finite")
    });
    let distinct = sorted.windows(2).filter(|w| w[0].n_shots != w[1].n_shots).count() + 1;
    if sorted.is_empty() || distinct < 2 {
        return Err(Error::Degenerate("fit needs at least two distinct shot counts".into()));
    }
    Ok(sorted)
}

fn solve_ansatz(points: &[ShotPoint], means: impl Iterator<Item = f64>) -> AnsatzFit {
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, y) in points.iter().zip(means) {
        let w = 1.0 / (p.stderr * p.stderr);
        let x = 1.0 / p.n_shots.sqrt();
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = s * sxx - sx * sx;
    let eta_shots = (s * sxy - sx * sy) / det;
    let eta = (sy - eta_shots * sx) / s;
    AnsatzFit { eta, eta_shots }
}

/// Weighted least squares in the basis `{1, 1/√N_S}`, weights `1/stderr²`.
pub fn fit_shot_ansatz(points: &[ShotPoint]) -> Result<AnsatzFit> {
    let sorted = check_points(points)?;
    Ok(solve_ansatz(&sorted, sorted.iter().map(|p| p.mean)))
}

/// Fit of the pure shot-noise law `mean = c/√N_S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub coefficient: f64,
    /// `1 − Σw(y−ŷ)² / Σw(y−ȳ_w)²`.
    pub weighted_r_squared: f64,
}

pub fn fit_pure_scaling(points: &[ShotPoint]) -> Result<ScalingFit> {
    let sorted = check_points(points)?;
    let (mut sw, mut swy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for p in &sorted {
        let w = 1.0 / (p.stderr * p.stderr);
        let x = 1.0 / p.n_shots.sqrt();
        sw += w;
        swy += w * p.mean;
        sxx += w * x * x;
        sxy += w * x * p.mean;
    }
    let c = sxy / sxx;
    let ybar = swy / sw;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for p in &sorted {
        let w = 1.0 / (p.stderr * p.stderr);
        ss_res += w * (p.mean - c / p.n_shots.sqrt()).powi(2);
        ss_tot += w * (p.mean - ybar).powi(2);
    }
    let weighted_r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(ScalingFit { coefficient: c, weighted_r_squared })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub eta: f64,
    pub eta_shots: f64,
    pub eta_stderr: f64,
    pub eta_shots_stderr: f64,
    pub n_boot: usize,
}

/// Ansatz fit with parametric bootstrap errors.
///
/// Each replica redraws every point's mean from `Normal(mean, stderr)` and
/// refits; the standard errors are the spreads of the replica estimates.
/// Replica `r` uses its own generator derived from `seed`.
pub fn bootstrap_fit(points: &[ShotPoint], n_boot: usize, seed: u64) -> Result<FitResult> {
    if n_boot < 100 {
        return Err(Error::InvalidParameter(format!("n_boot = {n_boot}, at least 100 required")));
    }
    let sorted = check_points(points)?;
    let central = solve_ansatz(&sorted, sorted.iter().map(|p| p.mean));
    let replicas: Vec<AnsatzFit> = (0..n_boot)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let draws: Vec<f64> = sorted
                .iter()
                .map(|p| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    p.mean + p.stderr * z
                })
                .collect();
            solve_ansatz(&sorted, draws.into_iter())
        })
        .collect();
    let spread = |f: fn(&AnsatzFit) -> f64| {
        let n = replicas.len() as f64;
        let mean = replicas.iter().map(f).sum::<f64>() / n;
        (replicas.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(FitResult {
        eta: central.eta,
        eta_shots: central.eta_shots,
        eta_stderr: spread(|r| r.eta),
        eta_shots_stderr: spread(|r| r.eta_shots),
        n_boot,
    })
}

/// How to lay out histogram bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinSpec {
    /// Fixed width; bins aligned to `origin` (default: a multiple of `width`).
    Width { width: f64, origin: Option<f64> },
    /// This many equal bins spanning the data range; the last bin includes the maximum.
    Count(usize),
}

/// Left-closed, right-open bins covering the data, as `(lower edge, count)`.
pub fn histogram<T: Real>(samples: &[T], bins: BinSpec) -> Result<Vec<(f64, usize)>> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let xs: Vec<f64> = samples.iter().map(|x| x.as_f64()).collect();
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite sample {x}")));
    }
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (origin, width, n_bins) = match bins {
        BinSpec::Width { width, origin } => {
            if !(width > 0.0) || !width.is_finite() {
                return Err(Error::InvalidParameter(format!("bin width {width}")));
            }
            let origin = origin.unwrap_or((min / width).floor() * width);
            if origin > min {
                return Err(Error::InvalidParameter(format!("origin {origin} above minimum {min}")));
            }
            let n = ((max - origin) / width).floor() as usize + 1;
            (origin, width, n)
        }
        BinSpec::Count(n) => {
            if n == 0 {
                return Err(Error::InvalidParameter("zero bins".into()));
            }
            let span = max - min;
            let width = if span > 0.0 { span / n as f64 } else { 1.0 };
            (min, width, n)
        }
    };
    let mut counts = vec![0usize; n_bins];
    for &x in &xs {
        let i = (((x - origin) / width).floor() as usize).min(n_bins - 1);
        counts[i] += 1;
    }
    Ok(counts.into_iter().enumerate().map(|(i, c)| (origin + i as f64 * width, c)).collect())
}
