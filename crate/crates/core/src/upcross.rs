//! Counting primitives shared by every estimator.
//!
//! An upcrossing of the level `u` at (1-based) position `i` is the event
//! `X[i] <= u < X[i+1]`. Positions run over `1..=n-1`; the final index has no
//! successor and is never counted. Block computations use `k = n / r` disjoint
//! blocks and drop the trailing `n mod r` observations, but the pair
//! `(X[j], X[j+1])` for the last position of a block may reach into the next
//! block or into the dropped remainder.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered sample of finite observations, at least two long.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    name: Option<String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "need at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value {} at index {}",
                values[pos],
                pos + 1
            )));
        }
        Ok(Self { values, name: None })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Applies `f` elementwise. Fails if the result contains non-finite values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = TimeSeries::new(self.values.iter().map(|&v| f(v)).collect())?;
        out.name = self.name.clone();
        Ok(out)
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Declarative threshold choice, resolved against a sample.
///
/// Text form: `abs:U`, `q:P` or `top:S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ThresholdSpec {
    /// A fixed level `u`.
    Absolute(f64),
    /// The empirical quantile `X_{ceil(n p):n}`, `p` in `(0, 1)`.
    Quantile(f64),
    /// The `(s+1)`-th largest observation `X_{n-s:n}`, `s >= 1`.
    TopOrder(usize),
}

impl ThresholdSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ThresholdSpec::Absolute(_) => "abs",
            ThresholdSpec::Quantile(_) => "q",
            ThresholdSpec::TopOrder(_) => "top",
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            ThresholdSpec::Absolute(u) if !u.is_finite() => {
                Err(Error::InvalidThreshold(format!("level {u} is not finite")))
            }
            ThresholdSpec::Quantile(p) if !(p > 0.0 && p < 1.0) => Err(Error::InvalidThreshold(
                format!("quantile probability {p} outside (0, 1)"),
            )),
            ThresholdSpec::TopOrder(0) => Err(Error::InvalidThreshold(
                "top order index must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ThresholdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdSpec::Absolute(u) => write!(f, "abs:{u}"),
            ThresholdSpec::Quantile(p) => write!(f, "q:{p}"),
            ThresholdSpec::TopOrder(s) => write!(f, "top:{s}"),
        }
    }
}

impl FromStr for ThresholdSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s.trim().split_once(':').ok_or_else(|| {
            Error::InvalidThreshold(format!("expected abs:U, q:P or top:S, got {s:?}"))
        })?;
        let bad = |e: &dyn fmt::Display| Error::InvalidThreshold(format!("{s:?}: {e}"));
        let spec = match kind.trim() {
            "abs" => ThresholdSpec::Absolute(value.trim().parse().map_err(|e| bad(&e))?),
            "q" => ThresholdSpec::Quantile(value.trim().parse().map_err(|e| bad(&e))?),
            "top" => ThresholdSpec::TopOrder(value.trim().parse().map_err(|e| bad(&e))?),
            other => {
                return Err(Error::InvalidThreshold(format!(
                    "unknown threshold kind {other:?}"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for ThresholdSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ThresholdSpec> for String {
    fn from(spec: ThresholdSpec) -> String {
        spec.to_string()
    }
}

/// Ascending order statistics of a sample, for resolving many thresholds
/// against the same path with a single sort.
#[derive(Debug, Clone)]
pub struct OrderStatistics {
    sorted: Vec<f64>,
}

impl OrderStatistics {
    pub fn new(series: &TimeSeries) -> Self {
        let mut sorted = series.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `X_{j:n}` with `1 <= j <= n`.
    pub fn order_statistic(&self, j: usize) -> f64 {
        self.sorted[j - 1]
    }

    pub fn resolve(&self, spec: &ThresholdSpec) -> Result<f64> {
        spec.validate()?;
        let n = self.sorted.len();
        if n == 0 {
            return Err(Error::InvalidSeries("empty series".into()));
        }
        match *spec {
            ThresholdSpec::Absolute(u) => Ok(u),
            ThresholdSpec::TopOrder(s) => {
                if s >= n {
                    return Err(Error::InvalidThreshold(format!(
                        "top order index {s} must be below the sample size {n}"
                    )));
                }
                Ok(self.order_statistic(n - s))
            }
            ThresholdSpec::Quantile(p) => {
                // Guard against n*p landing a hair above an integer.
                let j = ((n as f64) * p - 1e-9).ceil().max(1.0) as usize;
                Ok(self.order_statistic(j.min(n)))
            }
        }
    }
}

/// Resolves a threshold spec to a level. Quantiles use the inverse empirical
/// CDF `X_{ceil(n p):n}`; `top:s` gives `X_{n-s:n}`.
pub fn resolve_threshold(series: &TimeSeries, spec: &ThresholdSpec) -> Result<f64> {
    OrderStatistics::new(series).resolve(spec)
}

/// Block length `r` and block count `k = n / r`, trailing remainder dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockScheme {
    block_length: usize,
    block_count: usize,
    sample_len: usize,
}

impl BlockScheme {
    pub fn new(block_length: usize, sample_len: usize) -> Result<Self> {
        if block_length < 2 {
            return Err(Error::InvalidBlocks(format!(
                "block length must be at least 2, got {block_length}"
            )));
        }
        let block_count = sample_len / block_length;
        if block_count == 0 {
            return Err(Error::InvalidBlocks(format!(
                "block length {block_length} exceeds the sample size {sample_len}"
            )));
        }
        Ok(Self {
            block_length,
            block_count,
            sample_len,
        })
    }

    pub fn for_series(block_length: usize, series: &TimeSeries) -> Result<Self> {
        Self::new(block_length, series.len())
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn sample_len(&self) -> usize {
        self.sample_len
    }

    /// Number of observations covered by the blocks, `k * r`.
    pub fn covered(&self) -> usize {
        self.block_length * self.block_count
    }

    fn check(&self, series: &TimeSeries) -> Result<()> {
        if self.sample_len != series.len() {
            return Err(Error::InvalidBlocks(format!(
                "scheme resolved for n = {}, series has n = {}",
                self.sample_len,
                series.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockMode {
    Disjoint,
    Sliding,
}

/// Upcrossing positions (1-based) of a resolved level.
#[derive(Debug, Clone, PartialEq)]
pub struct UpcrossingProfile {
    pub positions: Vec<usize>,
    pub threshold: f64,
}

impl UpcrossingProfile {
    pub fn total(&self) -> usize {
        self.positions.len()
    }
}

#[inline]
pub(crate) fn is_upcrossing(x: &[f64], j: usize, u: f64) -> bool {
    x[j] <= u && u < x[j + 1]
}

/// Prefix counts `c[j] = #upcrossings at 0-based pair indices < j`,
/// length `n`.
pub(crate) fn upcrossing_prefix(x: &[f64], u: f64) -> Vec<usize> {
    let mut prefix = Vec::with_capacity(x.len());
    prefix.push(0);
    let mut acc = 0;
    for w in x.windows(2) {
        if w[0] <= u && u < w[1] {
            acc += 1;
        }
        prefix.push(acc);
    }
    prefix
}

pub(crate) fn count_upcrossings(x: &[f64], u: f64) -> usize {
    x.windows(2).filter(|w| w[0] <= u && u < w[1]).count()
}

pub fn upcrossings(series: &TimeSeries, u: f64) -> UpcrossingProfile {
    let x = series.values();
    let positions = (0..x.len() - 1)
        .filter(|&j| is_upcrossing(x, j, u))
        .map(|j| j + 1)
        .collect();
    UpcrossingProfile {
        positions,
        threshold: u,
    }
}

pub(crate) fn block_counts_raw(x: &[f64], u: f64, r: usize, k: usize) -> Vec<usize> {
    let last = x.len() - 1;
    (0..k)
        .map(|i| {
            let lo = i * r;
            let hi = ((i + 1) * r).min(last);
            (lo..hi).filter(|&j| is_upcrossing(x, j, u)).count()
        })
        .collect()
}

/// Upcrossings in each of the `k` disjoint blocks.
pub fn block_upcrossing_counts(
    series: &TimeSeries,
    u: f64,
    blocks: &BlockScheme,
) -> Result<Vec<usize>> {
    blocks.check(series)?;
    Ok(block_counts_raw(
        series.values(),
        u,
        blocks.block_length(),
        blocks.block_count(),
    ))
}

pub(crate) fn disjoint_maxima_below_raw(x: &[f64], u: f64, r: usize, k: usize) -> f64 {
    let below = x[..k * r]
        .chunks_exact(r)
        .filter(|block| block.iter().all(|&v| v <= u))
        .count();
    below as f64 / k as f64
}

pub(crate) fn sliding_maxima_below_raw(x: &[f64], u: f64, r: usize) -> f64 {
    let windows = x.len() - r + 1;
    let mut run = 0usize;
    let mut below = 0usize;
    for (t, &v) in x.iter().enumerate() {
        run = if v <= u { run + 1 } else { 0 };
        if t + 1 >= r && run >= r {
            below += 1;
        }
    }
    below as f64 / windows as f64
}

/// Empirical distribution function of the block maximum at `u`, over
/// disjoint blocks or over all `n - r + 1` sliding windows.
pub fn block_maxima_below(
    series: &TimeSeries,
    u: f64,
    blocks: &BlockScheme,
    mode: BlockMode,
) -> Result<f64> {
    blocks.check(series)?;
    let x = series.values();
    Ok(match mode {
        BlockMode::Disjoint => {
            disjoint_maxima_below_raw(x, u, blocks.block_length(), blocks.block_count())
        }
        BlockMode::Sliding => sliding_maxima_below_raw(x, u, blocks.block_length()),
    })
}

/// Indices (1-based) with `X[i] >= u`.
pub fn exceedance_times(series: &TimeSeries, u: f64) -> Vec<usize> {
    series
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= u)
        .map(|(i, _)| i + 1)
        .collect()
}
