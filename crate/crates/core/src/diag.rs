//! Empirical check of the local dependence conditions behind the runs
//! estimators.
//!
//! `p^(k)(u, r)` is the share of upcrossings at some position `i` that are
//! followed by `k - 2` upcrossing-free positions `i+2 ..= i+k-1` and then by
//! at least one more upcrossing in `i+k ..= i+r-1`. Values near zero along
//! rising thresholds and block sizes support using the runs estimator with
//! that `k`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::upcross::{upcrossing_prefix, OrderStatistics, ThresholdSpec, TimeSeries};

/// Quantile axis used when none is given: 0.950, 0.955, ..., 0.995.
pub fn default_quantiles() -> Vec<f64> {
    (0..10).map(|i| (950 + 5 * i) as f64 / 1000.0).collect()
}

/// Block-size axis used when none is given: 5 ..= 20.
pub fn default_block_sizes() -> Vec<usize> {
    (5..=20).collect()
}

fn check_window(n: usize, r: usize, k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("k must be >= 3, got {k}")));
    }
    if r <= k {
        return Err(Error::InvalidParameter(format!(
            "invalid window: block size r = {r} must exceed k = {k}"
        )));
    }
    if n < r {
        return Err(Error::InvalidParameter(format!(
            "block size r = {r} exceeds the sample size {n}"
        )));
    }
    Ok(())
}

fn proportion_from_prefix(prefix: &[usize], r: usize, k: usize) -> Option<f64> {
    let n = prefix.len();
    let last = n - 1;
    let total = prefix[last];
    if total == 0 {
        return None;
    }
    // Upcrossings at positions a..=b, clipped to the last valid position.
    let count = |a: usize, b: usize| {
        let b = b.min(last);
        if b < a {
            0
        } else {
            prefix[b] - prefix[a - 1]
        }
    };
    let numerator = (1..=n - r + 1)
        .filter(|&i| {
            count(i, i) == 1 && count(i + 2, i + k - 1) == 0 && count(i + k, i + r - 1) > 0
        })
        .count();
    Some(numerator as f64 / total as f64)
}

/// `p^(k)(u, r)`, or `None` when the series has no upcrossing of `u`.
pub fn anti_dk_proportion(series: &TimeSeries, u: f64, r: usize, k: usize) -> Result<Option<f64>> {
    check_window(series.len(), r, k)?;
    let prefix = upcrossing_prefix(series.values(), u);
    Ok(proportion_from_prefix(&prefix, r, k))
}

/// Proportions over a quantile x block-size grid. Cells without upcrossings
/// stay `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagGrid {
    pub quantiles: Vec<f64>,
    pub block_sizes: Vec<usize>,
    pub k: usize,
    pub thresholds: Vec<f64>,
    /// `values[q][r]`, indexed like the two axes.
    pub values: Vec<Vec<Option<f64>>>,
}

impl DiagGrid {
    pub fn get(&self, quantile_idx: usize, block_idx: usize) -> Option<f64> {
        self.values[quantile_idx][block_idx]
    }

    /// Mean over defined cells, `None` if every cell is undefined.
    pub fn mean_defined(&self) -> Option<f64> {
        let defined: Vec<f64> = self.values.iter().flatten().flatten().copied().collect();
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
    }

    /// Long-form CSV with header `p,r,k,value`; undefined cells read `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,r,k,value\n");
        for (qi, p) in self.quantiles.iter().enumerate() {
            for (ri, r) in self.block_sizes.iter().enumerate() {
                match self.values[qi][ri] {
                    Some(v) => writeln!(out, "{p},{r},{},{v}", self.k),
                    None => writeln!(out, "{p},{r},{},NA", self.k),
                }
                .expect("writing to a String cannot fail");
            }
        }
        out
    }
}

pub fn diag_grid(
    series: &TimeSeries,
    quantiles: &[f64],
    block_sizes: &[usize],
    k: usize,
) -> Result<DiagGrid> {
    if quantiles.is_empty() || block_sizes.is_empty() {
        return Err(Error::InvalidParameter(
            "diagnostic grid axes must be nonempty".into(),
        ));
    }
    for &r in block_sizes {
        check_window(series.len(), r, k)?;
    }
    let order = OrderStatistics::new(series);
    let thresholds = quantiles
        .iter()
        .map(|&p| order.resolve(&ThresholdSpec::Quantile(p)))
        .collect::<Result<Vec<_>>>()?;
    let values = thresholds
        .par_iter()
        .map(|&u| {
            let prefix = upcrossing_prefix(series.values(), u);
            block_sizes
                .iter()
                .map(|&r| proportion_from_prefix(&prefix, r, k))
                .collect()
        })
        .collect();
    Ok(DiagGrid {
        quantiles: quantiles.to_vec(),
        block_sizes: block_sizes.to_vec(),
        k,
        thresholds,
        values,
    })
}
