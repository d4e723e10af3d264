//! Monte Carlo replication engine.
//!
//! Replication `i` simulates the configured process with seed
//! `derive_seed(base_seed, i)`, resolves every threshold on its own path and
//! evaluates every estimator there. Undefined estimates are left out of the
//! aggregates and counted in `n_failed`.
//!
//! Replications are grouped into fixed chunks of [`CHUNK`] consecutive
//! indices. Chunks run in parallel; their accumulators are merged in chunk
//! order, so the report does not depend on the worker count or on scheduling.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    blocks_confidence_interval, blocks_from_distribution, ClusterSizeDistribution, EstimatorConfig,
    Interval,
};
use crate::process::{derive_seed, simulate, true_params, ProcessKind, ProcessSpec, RNG_ALGORITHM};
use crate::upcross::{block_counts_raw, OrderStatistics, ThresholdSpec, TimeSeries};

/// Replications per work unit.
pub const CHUNK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessTemplate {
    #[serde(flatten)]
    pub kind: ProcessKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

impl ProcessTemplate {
    pub fn new(kind: ProcessKind, n: usize) -> Self {
        Self {
            kind,
            n,
            burn_in: None,
        }
    }

    pub fn spec(&self, seed: u64) -> ProcessSpec {
        let spec = ProcessSpec::new(self.kind, self.n, seed);
        match self.burn_in {
            Some(b) => spec.with_burn_in(b),
            None => spec,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub process: ProcessTemplate,
    pub replications: usize,
    pub estimators: Vec<EstimatorConfig>,
    pub thresholds: Vec<ThresholdSpec>,
    pub base_seed: u64,
    /// Overrides the known upcrossings index of the process, and is required
    /// for processes without one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_eta: Option<f64>,
    /// When set, blocks cells also summarise the asymptotic interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_level: Option<f64>,
}

impl McConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators configured".into()));
        }
        self.process.spec(0).validate()?;
        let n = self.process.n;
        for est in &self.estimators {
            est.validate()?;
            match *est {
                EstimatorConfig::Blocks { r }
                | EstimatorConfig::Disjoint { r }
                | EstimatorConfig::Sliding { r }
                    if r > n =>
                {
                    return Err(Error::InvalidConfig(format!(
                        "{est}: block length exceeds n = {n}"
                    )))
                }
                EstimatorConfig::Runs { k } if k >= n => {
                    return Err(Error::InvalidConfig(format!("{est}: needs n > k, n = {n}")))
                }
                _ => {}
            }
        }
        for t in &self.thresholds {
            if let ThresholdSpec::TopOrder(s) = *t {
                if s == 0 || s >= n {
                    return Err(Error::InvalidConfig(format!("{t}: needs 1 <= s < n = {n}")));
                }
            }
            t.validate()?;
        }
        if let Some(level) = self.ci_level {
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "ci_level {level} outside (0, 1)"
                )));
            }
        }
        if let Some(eta) = self.reference_eta {
            if !eta.is_finite() {
                return Err(Error::InvalidConfig("reference_eta must be finite".into()));
            }
        }
        Ok(())
    }

    /// The upcrossings index the errors are measured against.
    pub fn true_eta(&self) -> Result<f64> {
        self.reference_eta
            .or_else(|| true_params(&self.process.kind).eta)
            .ok_or_else(|| Error::UnknownTruth(self.process.kind.to_string()))
    }

    fn replication_series(&self, index: usize) -> Result<TimeSeries> {
        simulate(&self.process.spec(derive_seed(self.base_seed, index as u64)))
    }
}

/// Running moments with a deterministic merge (Chan et al.).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
    // squared error about the truth, Kahan-compensated
    sse: f64,
    sse_comp: f64,
}

impl Moments {
    fn push(&mut self, x: f64, truth: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
        self.add_sse((x - truth) * (x - truth));
    }

    fn add_sse(&mut self, v: f64) {
        let y = v - self.sse_comp;
        let t = self.sse + y;
        self.sse_comp = (t - self.sse) - y;
        self.sse = t;
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
        self.mean += delta * other.n as f64 / n as f64;
        self.n = n;
        self.add_sse(other.sse - other.sse_comp);
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CellAcc {
    values: Moments,
    failed: usize,
    threshold_sum: f64,
    ci_available: usize,
    ci_lo_sum: f64,
    ci_hi_sum: f64,
    ci_covered: usize,
}

impl CellAcc {
    fn merge(&mut self, other: &CellAcc) {
        self.values.merge(&other.values);
        self.failed += other.failed;
        self.threshold_sum += other.threshold_sum;
        self.ci_available += other.ci_available;
        self.ci_lo_sum += other.ci_lo_sum;
        self.ci_hi_sum += other.ci_hi_sum;
        self.ci_covered += other.ci_covered;
    }
}

/// Summary statistics of one estimator at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub bias: Option<f64>,
    pub var: Option<f64>,
    pub rmse: Option<f64>,
    pub mese: Option<f64>,
    pub n_failed: usize,
    pub n_used: usize,
}

impl Summary {
    fn from_moments(m: &Moments, failed: usize, truth: f64) -> Self {
        let used = m.n;
        let bias = (used > 0).then_some(m.mean - truth);
        let var = (used > 1).then(|| m.m2 / (used - 1) as f64);
        let rmse = (used > 0).then(|| (m.sse / used as f64).sqrt());
        let mese = match (bias, var) {
            (Some(b), Some(v)) if v > 0.0 => Some(b / v.sqrt()),
            _ => None,
        };
        Self {
            bias,
            var,
            rmse,
            mese,
            n_failed: failed,
            n_used: used,
        }
    }
}

/// Averages of the asymptotic interval over replications where it exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiSummary {
    pub level: f64,
    pub n_available: usize,
    pub mean_lo: Option<f64>,
    pub mean_hi: Option<f64>,
    /// Share of available intervals containing the true index.
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub estimator: EstimatorConfig,
    pub threshold: ThresholdSpec,
    pub threshold_value_mean: f64,
    #[serde(flatten)]
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<CiSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub library_version: String,
    pub rng_algorithm: String,
    pub config: McConfig,
    pub true_eta: f64,
    pub cells: Vec<McCell>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl McReport {
    pub fn cell(&self, estimator: EstimatorConfig, threshold: ThresholdSpec) -> Option<&McCell> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && c.threshold == threshold)
    }

    pub const CSV_HEADER: &'static str =
        "method,param,threshold_kind,threshold_value_mean,bias,var,rmse,mese,n_failed,n_used";

    /// One row per (estimator, threshold). `threshold_kind` carries the full
    /// threshold spec (`q:0.9`, `top:100`, `abs:1.5`); missing statistics
    /// read `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let s = &c.summary;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                c.estimator.method_name(),
                c.estimator
                    .param()
                    .map_or_else(String::new, |p| p.to_string()),
                c.threshold,
                c.threshold_value_mean,
                fmt_opt(s.bias),
                fmt_opt(s.var),
                fmt_opt(s.rmse),
                fmt_opt(s.mese),
                s.n_failed,
                s.n_used
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn evaluate_cell(
    est: &EstimatorConfig,
    series: &TimeSeries,
    u: f64,
    ci_level: Option<f64>,
) -> Result<(Option<f64>, Option<Option<Interval>>)> {
    let outcome = match (*est, ci_level) {
        (EstimatorConfig::Blocks { r }, Some(level)) => {
            let x = series.values();
            let counts = block_counts_raw(x, u, r, x.len() / r);
            let dist = ClusterSizeDistribution::from_block_counts(&counts);
            blocks_from_distribution(&dist, u, r).and_then(|e| {
                let iv = blocks_confidence_interval(&e, &dist, level)?;
                Ok((e.value, Some(iv)))
            })
        }
        _ => est.evaluate(series, u).map(|e| (e.value, None)),
    };
    match outcome {
        Ok((v, iv)) => Ok((Some(v), iv)),
        Err(e) if e.is_undefined_estimate() => Ok((None, None)),
        Err(e) => Err(e),
    }
}

fn run_chunk(cfg: &McConfig, truth: f64, range: std::ops::Range<usize>) -> Result<Vec<CellAcc>> {
    let n_thr = cfg.thresholds.len();
    let mut acc = vec![CellAcc::default(); cfg.estimators.len() * n_thr];
    for rep in range {
        let series = cfg.replication_series(rep)?;
        let order = OrderStatistics::new(&series);
        for (ti, t) in cfg.thresholds.iter().enumerate() {
            let u = order.resolve(t)?;
            for (ei, est) in cfg.estimators.iter().enumerate() {
                let cell = &mut acc[ei * n_thr + ti];
                cell.threshold_sum += u;
                let (value, iv) = evaluate_cell(est, &series, u, cfg.ci_level)?;
                match value {
                    Some(v) => cell.values.push(v, truth),
                    None => cell.failed += 1,
                }
                if let Some(Some(iv)) = iv {
                    cell.ci_available += 1;
                    cell.ci_lo_sum += iv.lo;
                    cell.ci_hi_sum += iv.hi;
                    if iv.contains(truth) {
                        cell.ci_covered += 1;
                    }
                }
            }
        }
    }
    Ok(acc)
}

fn chunks(replications: usize) -> Vec<std::ops::Range<usize>> {
    (0..replications)
        .step_by(CHUNK)
        .map(|start| start..(start + CHUNK).min(replications))
        .collect()
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs the study on the current rayon pool.
pub fn run_study(cfg: &McConfig) -> Result<McReport> {
    run_study_impl(cfg, None)
}

/// Runs the study on a dedicated pool of `workers` threads.
pub fn run_study_with_workers(cfg: &McConfig, workers: usize) -> Result<McReport> {
    run_study_impl(cfg, Some(workers))
}

fn run_study_impl(cfg: &McConfig, workers: Option<usize>) -> Result<McReport> {
    cfg.validate()?;
    if cfg.thresholds.is_empty() {
        return Err(Error::InvalidConfig("no thresholds configured".into()));
    }
    let truth = cfg.true_eta()?;
    let partials = in_pool(workers, || {
        chunks(cfg.replications)
            .into_par_iter()
            .map(|range| run_chunk(cfg, truth, range))
            .collect::<Result<Vec<_>>>()
    })??;
    let n_thr = cfg.thresholds.len();
    let mut total = vec![CellAcc::default(); cfg.estimators.len() * n_thr];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    let reps = cfg.replications as f64;
    let mut cells = Vec::with_capacity(total.len());
    for (ei, est) in cfg.estimators.iter().enumerate() {
        for (ti, t) in cfg.thresholds.iter().enumerate() {
            let acc = &total[ei * n_thr + ti];
            let ci = match (est, cfg.ci_level) {
                (EstimatorConfig::Blocks { .. }, Some(level)) => {
                    let avail = acc.ci_available;
                    let mean = |s: f64| (avail > 0).then(|| s / avail as f64);
                    Some(CiSummary {
                        level,
                        n_available: avail,
                        mean_lo: mean(acc.ci_lo_sum),
                        mean_hi: mean(acc.ci_hi_sum),
                        coverage: mean(acc.ci_covered as f64),
                    })
                }
                _ => None,
            };
            cells.push(McCell {
                estimator: *est,
                threshold: *t,
                threshold_value_mean: acc.threshold_sum / reps,
                summary: Summary::from_moments(&acc.values, acc.failed, truth),
                ci,
            });
        }
    }
    Ok(McReport {
        library_version: crate::VERSION.to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        config: cfg.clone(),
        true_eta: truth,
        cells,
    })
}

/// Mean and RMSE of one estimator along the top order statistics thresholds
/// `X_{n-s:n}`, `s = 1, 1 + stride, ...` up to `n - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub estimator: EstimatorConfig,
    pub true_eta: f64,
    pub s: Vec<usize>,
    pub mean: Vec<Option<f64>>,
    pub rmse: Vec<Option<f64>>,
    pub n_used: Vec<usize>,
}

impl SamplePath {
    pub const CSV_HEADER: &'static str = "method,param,s,mean,rmse,n_used";

    pub fn csv_rows(&self, out: &mut String) {
        let param = self
            .estimator
            .param()
            .map_or_else(String::new, |p| p.to_string());
        for i in 0..self.s.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.estimator.method_name(),
                param,
                self.s[i],
                fmt_opt(self.mean[i]),
                fmt_opt(self.rmse[i]),
                self.n_used[i]
            )
            .expect("writing to a String cannot fail");
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        self.csv_rows(&mut out);
        out
    }
}

pub fn path_grid(n: usize, stride: usize) -> Vec<usize> {
    (1..n).step_by(stride.max(1)).collect()
}

pub fn sample_path(
    cfg: &McConfig,
    estimator: &EstimatorConfig,
    stride: usize,
) -> Result<SamplePath> {
    sample_path_impl(cfg, estimator, stride, None)
}

pub fn sample_path_with_workers(
    cfg: &McConfig,
    estimator: &EstimatorConfig,
    stride: usize,
    workers: usize,
) -> Result<SamplePath> {
    sample_path_impl(cfg, estimator, stride, Some(workers))
}

fn sample_path_impl(
    cfg: &McConfig,
    estimator: &EstimatorConfig,
    stride: usize,
    workers: Option<usize>,
) -> Result<SamplePath> {
    if stride == 0 {
        return Err(Error::InvalidConfig("stride must be >= 1".into()));
    }
    let path_cfg = McConfig {
        estimators: vec![*estimator],
        thresholds: Vec::new(),
        ..cfg.clone()
    };
    path_cfg.validate()?;
    let truth = path_cfg.true_eta()?;
    let grid = path_grid(cfg.process.n, stride);
    let partials = in_pool(workers, || {
        chunks(cfg.replications)
            .into_par_iter()
            .map(|range| {
                let mut acc = vec![(Moments::default(), 0usize); grid.len()];
                for rep in range {
                    let series = path_cfg.replication_series(rep)?;
                    let order = OrderStatistics::new(&series);
                    for (slot, &s) in acc.iter_mut().zip(&grid) {
                        let u = order.resolve(&ThresholdSpec::TopOrder(s))?;
                        match evaluate_cell(estimator, &series, u, None)?.0 {
                            Some(v) => slot.0.push(v, truth),
                            None => slot.1 += 1,
                        }
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut total = vec![(Moments::default(), 0usize); grid.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.0.merge(&p.0);
            t.1 += p.1;
        }
    }
    let summaries: Vec<Summary> = total
        .iter()
        .map(|(m, f)| Summary::from_moments(m, *f, truth))
        .collect();
    Ok(SamplePath {
        estimator: *estimator,
        true_eta: truth,
        s: grid,
        mean: summaries
            .iter()
            .map(|s| s.bias.map(|b| b + truth))
            .collect(),
        rmse: summaries.iter().map(|s| s.rmse).collect(),
        n_used: summaries.iter().map(|s| s.n_used).collect(),
    })
}
