//! Estimators of the upcrossings index.
//!
//! - blocks: occupied blocks over total upcrossings in the `k` disjoint blocks,
//!   i.e. the reciprocal of the mean cluster size, with an asymptotic normal
//!   confidence interval;
//! - disjoint / sliding: `-log F(u) / mean block upcrossing count`, where `F`
//!   is the empirical distribution of disjoint or sliding block maxima;
//! - runs: upcrossings preceded by `k - 2` upcrossing-free positions over all
//!   upcrossings;
//! - extremal index: the Ferro-Segers intervals estimate of the extremal index
//!   scaled by exceedances per upcrossing.
//!
//! Undefined estimates are reported as typed errors, never NaN. The extremal
//! index route counts exceedances as `X >= u`; everything else uses the
//! upcrossing indicator `X[i] <= u < X[i+1]`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::upcross::{
    count_upcrossings, disjoint_maxima_below_raw, exceedance_times, sliding_maxima_below_raw,
    upcrossing_prefix, BlockMode, BlockScheme, TimeSeries,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Blocks,
    Disjoint,
    Sliding,
    Runs(usize),
    ExtremalIndex,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Blocks => f.write_str("blocks"),
            Method::Disjoint => f.write_str("dj"),
            Method::Sliding => f.write_str("sl"),
            Method::Runs(k) => write!(f, "runs(k={k})"),
            Method::ExtremalIndex => f.write_str("ei"),
        }
    }
}

/// A point estimate of the upcrossings index with the context it was computed in.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaEstimate {
    pub value: f64,
    pub method: Method,
    pub threshold: f64,
    pub block_length: Option<usize>,
    pub n_upcrossings: usize,
    pub std_error: Option<f64>,
    pub ci_level: Option<f64>,
    pub ci: Option<(f64, f64)>,
}

impl EtaEstimate {
    fn point(value: f64, method: Method, threshold: f64, n_upcrossings: usize) -> Self {
        Self {
            value,
            method,
            threshold,
            block_length: None,
            n_upcrossings,
            std_error: None,
            ci_level: None,
            ci: None,
        }
    }

    /// Set for raw extremal-index based estimates above 1, which are not clamped.
    pub fn exceeds_unit(&self) -> bool {
        self.value > 1.0
    }
}

/// Empirical distribution of the number of upcrossings per occupied block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSizeDistribution {
    counts: BTreeMap<usize, usize>,
    occupied_blocks: usize,
    total_blocks: usize,
}

impl ClusterSizeDistribution {
    pub fn from_block_counts(block_counts: &[usize]) -> Self {
        let mut counts = BTreeMap::new();
        for &c in block_counts.iter().filter(|&&c| c > 0) {
            *counts.entry(c).or_insert(0) += 1;
        }
        let occupied_blocks = counts.values().sum();
        Self {
            counts,
            occupied_blocks,
            total_blocks: block_counts.len(),
        }
    }

    /// Number of blocks with exactly `j` upcrossings, keyed by `j >= 1`.
    pub fn counts(&self) -> &BTreeMap<usize, usize> {
        &self.counts
    }

    pub fn occupied_blocks(&self) -> usize {
        self.occupied_blocks
    }

    pub fn total_blocks(&self) -> usize {
        self.total_blocks
    }

    pub fn is_empty(&self) -> bool {
        self.occupied_blocks == 0
    }

    pub fn total_upcrossings(&self) -> usize {
        self.counts.iter().map(|(j, c)| j * c).sum()
    }

    /// `sum_j j^2 * counts[j]`.
    pub fn sum_of_squares(&self) -> u128 {
        self.counts
            .iter()
            .map(|(&j, &c)| (j as u128) * (j as u128) * c as u128)
            .sum()
    }

    pub fn probability(&self, j: usize) -> f64 {
        if self.occupied_blocks == 0 {
            return 0.0;
        }
        self.counts.get(&j).copied().unwrap_or(0) as f64 / self.occupied_blocks as f64
    }

    /// `sum_j j * pi(j)`; `None` when no block is occupied.
    pub fn mean_size(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.total_upcrossings() as f64 / self.occupied_blocks as f64)
    }

    /// `sum_j j^2 * pi(j)`; `None` when no block is occupied.
    pub fn second_moment(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.sum_of_squares() as f64 / self.occupied_blocks as f64)
    }
}

pub fn cluster_size_distribution(
    series: &TimeSeries,
    u: f64,
    blocks: &BlockScheme,
) -> Result<ClusterSizeDistribution> {
    let counts = crate::upcross::block_upcrossing_counts(series, u, blocks)?;
    Ok(ClusterSizeDistribution::from_block_counts(&counts))
}

/// Blocks estimate from an already built cluster-size distribution.
pub fn blocks_from_distribution(
    dist: &ClusterSizeDistribution,
    u: f64,
    block_length: usize,
) -> Result<EtaEstimate> {
    let total = dist.total_upcrossings();
    if total == 0 {
        return Err(Error::NoUpcrossings);
    }
    let mut est = EtaEstimate::point(
        dist.occupied_blocks() as f64 / total as f64,
        Method::Blocks,
        u,
        total,
    );
    est.block_length = Some(block_length);
    Ok(est)
}

pub fn blocks_estimator(series: &TimeSeries, u: f64, blocks: &BlockScheme) -> Result<EtaEstimate> {
    let dist = cluster_size_distribution(series, u, blocks)?;
    blocks_from_distribution(&dist, u, blocks.block_length())
}

/// `sum_i N_i^2 / #occupied blocks`.
pub fn blocks_sigma2(dist: &ClusterSizeDistribution) -> Result<f64> {
    dist.second_moment().ok_or(Error::NoUpcrossings)
}

/// Symmetric asymptotic interval around a blocks estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub std_error: f64,
    pub level: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "confidence level {level} outside (0, 1)"
        )))
    }
}

/// Asymptotic normal interval for the blocks estimator,
/// `eta +- z * sqrt(eta ((eta sigma)^2 - 1) / T)`.
///
/// Returns `Ok(None)` when `sigma^2 <= 1 / eta^2`, which happens exactly when
/// every occupied block holds the same number of upcrossings. The condition is
/// evaluated in integer arithmetic. The interval is stated for deterministic
/// levels; at order-statistic thresholds it is an approximation.
pub fn blocks_confidence_interval(
    est: &EtaEstimate,
    dist: &ClusterSizeDistribution,
    level: f64,
) -> Result<Option<Interval>> {
    if est.method != Method::Blocks {
        return Err(Error::InvalidParameter(format!(
            "confidence interval requires a blocks estimate, got {}",
            est.method
        )));
    }
    check_level(level)?;
    let total = dist.total_upcrossings() as u128;
    if total == 0 {
        return Err(Error::NoUpcrossings);
    }
    // (eta * sigma)^2 = occupied * sum_sq / T^2
    let lhs = dist.occupied_blocks() as u128 * dist.sum_of_squares();
    let rhs = total * total;
    if lhs <= rhs {
        return Ok(None);
    }
    let excess = (lhs - rhs) as f64 / rhs as f64;
    let eta = est.value;
    let std_error = (eta * excess / total as f64).sqrt();
    let half = normal::two_sided_critical(level) * std_error;
    Ok(Some(Interval {
        lo: eta - half,
        hi: eta + half,
        std_error,
        level,
    }))
}

/// Blocks estimate with the confidence interval attached when it exists.
pub fn blocks_estimator_with_ci(
    series: &TimeSeries,
    u: f64,
    blocks: &BlockScheme,
    level: f64,
) -> Result<EtaEstimate> {
    check_level(level)?;
    let dist = cluster_size_distribution(series, u, blocks)?;
    let mut est = blocks_from_distribution(&dist, u, blocks.block_length())?;
    est.ci_level = Some(level);
    if let Some(iv) = blocks_confidence_interval(&est, &dist, level)? {
        est.std_error = Some(iv.std_error);
        est.ci = Some((iv.lo, iv.hi));
    }
    Ok(est)
}

/// `-log F(u) / ((1/k) sum_i N_i)` with `F` from disjoint or sliding block
/// maxima. The denominator always uses the disjoint block counts. Not clamped.
pub fn log_blocks_estimator(
    series: &TimeSeries,
    u: f64,
    blocks: &BlockScheme,
    mode: BlockMode,
) -> Result<EtaEstimate> {
    let counts = crate::upcross::block_upcrossing_counts(series, u, blocks)?;
    let x = series.values();
    let (r, k) = (blocks.block_length(), blocks.block_count());
    log_blocks_raw(x, u, r, k, &counts, mode)
}

fn log_blocks_raw(
    x: &[f64],
    u: f64,
    r: usize,
    k: usize,
    counts: &[usize],
    mode: BlockMode,
) -> Result<EtaEstimate> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::NoUpcrossings);
    }
    let f = match mode {
        BlockMode::Disjoint => disjoint_maxima_below_raw(x, u, r, k),
        BlockMode::Sliding => sliding_maxima_below_raw(x, u, r),
    };
    if f == 0.0 {
        return Err(Error::AllBlocksExceed);
    }
    let mean_count = total as f64 / k as f64;
    let method = match mode {
        BlockMode::Disjoint => Method::Disjoint,
        BlockMode::Sliding => Method::Sliding,
    };
    let mut est = EtaEstimate::point(0.0 - f.ln() / mean_count, method, u, total);
    est.block_length = Some(r);
    Ok(est)
}

/// Diagonal entry of the asymptotic covariance of the disjoint and sliding
/// log-blocks estimators, for `x = eta * nu` and
/// `c^2 = (sum_j j^2 pi(j) - eta^-2) / eta^-2`:
///
/// - disjoint: `(eta/nu) (e^x / x - 1/x + c^2 - 1)`
/// - sliding:  `(eta/nu) (2 (e^x - 1) / x^2 - 2/x + c^2 - 1)`
///
/// Both tend to `(eta/nu) c^2` as `x -> 0`; the sliding one never exceeds
/// the disjoint one.
pub fn log_blocks_asymptotic_variance(
    eta: f64,
    nu: f64,
    dist: &ClusterSizeDistribution,
    mode: BlockMode,
) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) || !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eta and nu must be positive, got eta = {eta}, nu = {nu}"
        )));
    }
    let second = dist.second_moment().ok_or(Error::NoUpcrossings)?;
    let c2 = second * eta * eta - 1.0;
    let x = eta * nu;
    // exp_m1 keeps the small-x regime accurate.
    let em1 = x.exp_m1();
    let bracket = match mode {
        BlockMode::Disjoint => em1 / x + c2 - 1.0,
        BlockMode::Sliding => sliding_term(x, em1) + c2 - 1.0,
    };
    Ok(eta / nu * bracket)
}

/// `2 (e^x - 1) / x^2 - 2 / x`, via its series for small `x`.
fn sliding_term(x: f64, em1: f64) -> f64 {
    if x < 1e-3 {
        1.0 + x / 3.0 + x * x / 12.0 + x * x * x / 60.0
    } else {
        2.0 * (em1 - x) / (x * x)
    }
}

/// Runs estimator: upcrossings at positions `p` with no upcrossing at
/// positions `p-k+1 ..= p-2`, counted for `p` in `k ..= n-1`, over the total
/// number of upcrossings.
pub fn runs_estimator(series: &TimeSeries, u: f64, k: usize) -> Result<EtaEstimate> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "runs k must be >= 3, got {k}"
        )));
    }
    let x = series.values();
    let n = x.len();
    if n <= k {
        return Err(Error::InvalidParameter(format!(
            "runs estimator needs n > k, got n = {n}, k = {k}"
        )));
    }
    let prefix = upcrossing_prefix(x, u);
    let total = prefix[n - 1];
    if total == 0 {
        return Err(Error::NoUpcrossings);
    }
    // Position a..=b (1-based) holds prefix[b] - prefix[a-1] upcrossings.
    let numerator = (1..=n - k)
        .filter(|&i| {
            let window = prefix[i + k - 3] - prefix[i - 1];
            let hit = prefix[i + k - 1] - prefix[i + k - 2];
            window == 0 && hit == 1
        })
        .count();
    Ok(EtaEstimate::point(
        numerator as f64 / total as f64,
        Method::Runs(k),
        u,
        total,
    ))
}

/// Ferro-Segers intervals estimate of the extremal index, capped at 1.
pub fn ferro_segers_theta(series: &TimeSeries, u: f64) -> Result<f64> {
    let times = exceedance_times(series, u);
    ferro_segers_from_times(&times)
}

pub(crate) fn ferro_segers_from_times(times: &[usize]) -> Result<f64> {
    let n_exc = times.len();
    if n_exc < 2 {
        return Err(Error::InsufficientExceedances(n_exc));
    }
    let gaps = times.windows(2).map(|w| (w[1] - w[0]) as u64);
    let (mut sum, mut sum_sq, mut max) = (0u64, 0u64, 0u64);
    let (mut sum_m1, mut sum_m1m2) = (0u64, 0u64);
    for t in gaps {
        sum += t;
        sum_sq += t * t;
        max = max.max(t);
        sum_m1 += t - 1;
        sum_m1m2 += (t - 1) * t.saturating_sub(2);
    }
    let m = (n_exc - 1) as f64;
    let theta = if max <= 2 {
        2.0 * (sum as f64).powi(2) / (m * sum_sq as f64)
    } else {
        if sum_m1m2 == 0 {
            return Err(Error::InsufficientVariability);
        }
        2.0 * (sum_m1 as f64).powi(2) / (m * sum_m1m2 as f64)
    };
    Ok(theta.min(1.0))
}

/// `theta_FS * #{X >= u} / #upcrossings`, reported raw.
pub fn ei_estimator(series: &TimeSeries, u: f64) -> Result<EtaEstimate> {
    let ups = count_upcrossings(series.values(), u);
    if ups == 0 {
        return Err(Error::NoUpcrossings);
    }
    let times = exceedance_times(series, u);
    let theta = ferro_segers_from_times(&times)?;
    Ok(EtaEstimate::point(
        theta * times.len() as f64 / ups as f64,
        Method::ExtremalIndex,
        u,
        ups,
    ))
}

/// An estimator with its tuning parameter, as named in study configs and on
/// the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "method")]
pub enum EstimatorConfig {
    #[serde(rename = "blocks")]
    Blocks { r: usize },
    #[serde(rename = "dj")]
    Disjoint { r: usize },
    #[serde(rename = "sl")]
    Sliding { r: usize },
    #[serde(rename = "runs")]
    Runs { k: usize },
    #[serde(rename = "ei")]
    ExtremalIndex,
}

impl EstimatorConfig {
    pub fn method_name(&self) -> &'static str {
        match self {
            EstimatorConfig::Blocks { .. } => "blocks",
            EstimatorConfig::Disjoint { .. } => "dj",
            EstimatorConfig::Sliding { .. } => "sl",
            EstimatorConfig::Runs { .. } => "runs",
            EstimatorConfig::ExtremalIndex => "ei",
        }
    }

    /// Block length or runs `k`.
    pub fn param(&self) -> Option<usize> {
        match *self {
            EstimatorConfig::Blocks { r }
            | EstimatorConfig::Disjoint { r }
            | EstimatorConfig::Sliding { r } => Some(r),
            EstimatorConfig::Runs { k } => Some(k),
            EstimatorConfig::ExtremalIndex => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EstimatorConfig::Blocks { r }
            | EstimatorConfig::Disjoint { r }
            | EstimatorConfig::Sliding { r }
                if r < 2 =>
            {
                Err(Error::InvalidBlocks(format!(
                    "block length must be >= 2, got {r}"
                )))
            }
            EstimatorConfig::Runs { k } if k < 3 => Err(Error::InvalidParameter(format!(
                "runs k must be >= 3, got {k}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, series: &TimeSeries, u: f64) -> Result<EtaEstimate> {
        match *self {
            EstimatorConfig::Blocks { r } => {
                blocks_estimator(series, u, &BlockScheme::for_series(r, series)?)
            }
            EstimatorConfig::Disjoint { r } => log_blocks_estimator(
                series,
                u,
                &BlockScheme::for_series(r, series)?,
                BlockMode::Disjoint,
            ),
            EstimatorConfig::Sliding { r } => log_blocks_estimator(
                series,
                u,
                &BlockScheme::for_series(r, series)?,
                BlockMode::Sliding,
            ),
            EstimatorConfig::Runs { k } => runs_estimator(series, u, k),
            EstimatorConfig::ExtremalIndex => ei_estimator(series, u),
        }
    }
}

impl fmt::Display for EstimatorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EstimatorConfig::Blocks { r } => write!(f, "blocks(r={r})"),
            EstimatorConfig::Disjoint { r } => write!(f, "dj(r={r})"),
            EstimatorConfig::Sliding { r } => write!(f, "sl(r={r})"),
            EstimatorConfig::Runs { k } => write!(f, "runs(k={k})"),
            EstimatorConfig::ExtremalIndex => f.write_str("ei"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn dist(counts: &[usize]) -> ClusterSizeDistribution {
        ClusterSizeDistribution::from_block_counts(counts)
    }

    #[test]
    fn blocks_small_examples() {
        let s = ts(&[0.1, 0.9, 0.2, 0.8, 0.1, 0.2, 0.3, 0.4]);
        let b = BlockScheme::for_series(4, &s).unwrap();
        let est = blocks_estimator(&s, 0.5, &b).unwrap();
        assert_eq!(est.value, 0.5);
        assert_eq!(est.n_upcrossings, 2);
        assert_eq!(est.block_length, Some(4));
        assert_eq!(
            blocks_from_distribution(&dist(&[1, 1, 1]), 0.0, 2)
                .unwrap()
                .value,
            1.0
        );
    }

    #[test]
    fn blocks_without_upcrossings_is_an_error() {
        let s = ts(&[0.1, 0.2, 0.3, 0.4]);
        let b = BlockScheme::for_series(2, &s).unwrap();
        assert_eq!(blocks_estimator(&s, 0.5, &b), Err(Error::NoUpcrossings));
    }

    #[test]
    fn distribution_examples() {
        let d = dist(&[2, 0]);
        assert_eq!(d.counts().get(&2), Some(&1));
        assert_eq!((d.occupied_blocks(), d.total_blocks()), (1, 2));
        let d = dist(&[1, 1]);
        assert_eq!(d.counts().get(&1), Some(&2));
        assert_eq!(d.occupied_blocks(), 2);
        assert!(dist(&[0, 0, 0]).is_empty());
        assert_eq!(dist(&[0, 0, 0]).mean_size(), None);
    }

    #[test]
    fn sigma2_examples() {
        assert_eq!(blocks_sigma2(&dist(&[2])).unwrap(), 4.0);
        assert_eq!(blocks_sigma2(&dist(&[1, 1])).unwrap(), 1.0);
        assert_eq!(blocks_sigma2(&dist(&[1, 0, 3])).unwrap(), 5.0);
        assert_eq!(blocks_sigma2(&dist(&[0])), Err(Error::NoUpcrossings));
    }

    #[test]
    fn ci_unavailable_on_equal_cluster_sizes() {
        for counts in [&[1usize, 1, 1][..], &[2, 0, 2]] {
            let d = dist(counts);
            let est = blocks_from_distribution(&d, 0.0, 5).unwrap();
            assert_eq!(blocks_confidence_interval(&est, &d, 0.95).unwrap(), None);
        }
    }

    #[test]
    fn ci_hand_computed() {
        // counts {1, 3}: eta = 1/2, sigma^2 = 5, (eta sigma)^2 - 1 = 1/4,
        // se = sqrt(0.5 * 0.25 / 4).
        let d = dist(&[1, 3, 0]);
        let est = blocks_from_distribution(&d, 0.0, 5).unwrap();
        let iv = blocks_confidence_interval(&est, &d, 0.95).unwrap().unwrap();
        let se = (0.5f64 * 0.25 / 4.0).sqrt();
        assert!((iv.std_error - se).abs() < 1e-15);
        assert!((iv.hi - iv.lo - 2.0 * 1.959_963_984_540_054 * se).abs() < 1e-8);
        assert!(iv.contains(0.5));
    }

    #[test]
    fn ci_rejects_bad_level_and_method() {
        let d = dist(&[1, 3]);
        let est = blocks_from_distribution(&d, 0.0, 5).unwrap();
        assert!(blocks_confidence_interval(&est, &d, 1.0).is_err());
        assert!(blocks_confidence_interval(&est, &d, 0.0).is_err());
        let mut other = est.clone();
        other.method = Method::Runs(3);
        assert!(blocks_confidence_interval(&other, &d, 0.95).is_err());
    }

    #[test]
    fn log_blocks_hand_example() {
        let s = ts(&[0.1, 0.9, 0.2, 0.3, 0.1, 0.2]);
        let b = BlockScheme::for_series(3, &s).unwrap();
        let est = log_blocks_estimator(&s, 0.5, &b, BlockMode::Disjoint).unwrap();
        assert!((est.value - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(est.method, Method::Disjoint);
    }

    #[test]
    fn log_blocks_degenerate_cases() {
        let s = ts(&[0.1, 0.9, 0.2, 0.3, 0.1, 0.2]);
        let b = BlockScheme::for_series(3, &s).unwrap();
        for mode in [BlockMode::Disjoint, BlockMode::Sliding] {
            assert_eq!(
                log_blocks_estimator(&s, 0.95, &b, mode),
                Err(Error::NoUpcrossings)
            );
        }
        let s = ts(&[0.1, 0.9, 0.1, 0.9]);
        let b = BlockScheme::for_series(2, &s).unwrap();
        assert_eq!(
            log_blocks_estimator(&s, 0.5, &b, BlockMode::Disjoint),
            Err(Error::AllBlocksExceed)
        );
    }

    #[test]
    fn log_blocks_zero_when_exceedance_only_outside_blocks() {
        // Blocks cover [0.1, 0.2]; the upcrossing at position 2 looks at X[3].
        let s = ts(&[0.1, 0.2, 0.9]);
        let b = BlockScheme::for_series(2, &s).unwrap();
        let est = log_blocks_estimator(&s, 0.5, &b, BlockMode::Disjoint).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.value.is_sign_positive());
    }

    #[test]
    fn asymptotic_variance_c2_zero() {
        let d = dist(&[2, 2, 0]);
        let eta = 0.5;
        let nu = 1.0;
        let c2 = d.second_moment().unwrap() * eta * eta - 1.0;
        assert_eq!(c2, 0.0);
        let x: f64 = eta * nu;
        let v11 = log_blocks_asymptotic_variance(eta, nu, &d, BlockMode::Disjoint).unwrap();
        assert!((v11 - eta / nu * (x.exp() / x - 1.0 / x - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_variance_rejects_bad_inputs() {
        let d = dist(&[1]);
        assert!(log_blocks_asymptotic_variance(0.0, 1.0, &d, BlockMode::Disjoint).is_err());
        assert!(log_blocks_asymptotic_variance(0.5, -1.0, &d, BlockMode::Sliding).is_err());
        assert!(log_blocks_asymptotic_variance(0.5, 1.0, &dist(&[0]), BlockMode::Sliding).is_err());
    }

    #[test]
    fn sliding_term_series_matches_closed_form() {
        for &x in &[1e-3f64, 2e-3, 1e-2] {
            let closed = 2.0 * (x.exp_m1() - x) / (x * x);
            assert!((sliding_term(x, x.exp_m1()) - closed).abs() < 1e-9);
        }
    }

    #[test]
    fn runs_hand_example() {
        let s = ts(&[0.9, 0.2, 0.8, 0.1, 0.2, 0.9, 0.1]);
        let est = runs_estimator(&s, 0.5, 3).unwrap();
        assert_eq!(est.value, 0.5);
        assert_eq!(est.n_upcrossings, 2);
    }

    #[test]
    fn runs_lone_upcrossing() {
        let s = ts(&[0.1, 0.1, 0.1, 0.1, 0.9, 0.1]);
        assert_eq!(runs_estimator(&s, 0.5, 3).unwrap().value, 1.0);
        assert_eq!(runs_estimator(&s, 0.5, 4).unwrap().value, 1.0);
    }

    #[test]
    fn runs_argument_checks() {
        let s = ts(&[0.1, 0.9, 0.1]);
        assert!(runs_estimator(&s, 0.5, 2).is_err());
        assert!(runs_estimator(&s, 0.5, 3).is_err());
        let s = ts(&[0.1, 0.2, 0.1, 0.2]);
        assert_eq!(runs_estimator(&s, 0.5, 3), Err(Error::NoUpcrossings));
    }

    #[test]
    fn ferro_segers_examples() {
        assert_eq!(ferro_segers_from_times(&[1, 3, 6]).unwrap(), 1.0);
        assert_eq!(ferro_segers_from_times(&[4, 5, 6, 7]).unwrap(), 1.0);
        // T = [1, 4]: 2 * 3^2 / (2 * 6) = 1.5, capped.
        // T = [1, 1, 5]: 2 * 4^2 / (3 * 12) = 8/9.
        assert_eq!(ferro_segers_from_times(&[1, 2, 6]).unwrap(), 1.0);
        assert!((ferro_segers_from_times(&[1, 2, 3, 8]).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        // T = [1, 2] takes the first branch: 2 * 3^2 / (2 * 5) = 1.8, capped.
        assert_eq!(ferro_segers_from_times(&[1, 2, 4]).unwrap(), 1.0);
        assert_eq!(
            ferro_segers_from_times(&[5]),
            Err(Error::InsufficientExceedances(1))
        );
    }

    #[test]
    fn ei_hand_example() {
        let s = ts(&[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let est = ei_estimator(&s, 0.5).unwrap();
        assert_eq!(est.value, 1.5);
        assert!(est.exceeds_unit());
        let alt = ts(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(ei_estimator(&alt, 0.5).unwrap().value, 1.0);
    }

    #[test]
    fn estimator_config_json() {
        let cfg: EstimatorConfig = serde_json::from_str(r#"{"method":"runs","k":4}"#).unwrap();
        assert_eq!(cfg, EstimatorConfig::Runs { k: 4 });
        let cfg: EstimatorConfig = serde_json::from_str(r#"{"method":"ei"}"#).unwrap();
        assert_eq!(cfg.param(), None);
        assert!(EstimatorConfig::Blocks { r: 1 }.validate().is_err());
        assert!(EstimatorConfig::Runs { k: 2 }.validate().is_err());
    }
}
