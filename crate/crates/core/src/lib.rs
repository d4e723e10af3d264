//! Estimation of the upcrossings index of stationary sequences.
//!
//! The upcrossings index `eta` in `(0, 1]` is the reciprocal of the mean
//! number of upcrossings of a high level per cluster. This crate counts
//! upcrossings, implements the blocks, log-blocks (disjoint and sliding),
//! runs and extremal-index based estimators, simulates benchmark processes,
//! computes the dependence diagnostic behind the runs estimator and drives
//! reproducible Monte Carlo studies.
//!
//! ```
//! use upcross_core::{blocks_estimator, BlockScheme, TimeSeries};
//!
//! let x = TimeSeries::new(vec![0.1, 0.9, 0.1, 0.9, 0.1, 0.1, 0.1, 0.1]).unwrap();
//! let est = blocks_estimator(&x, 0.5, &BlockScheme::new(4, x.len()).unwrap()).unwrap();
//! assert_eq!(est.value, 0.5);
//! ```

pub mod diag;
pub mod error;
pub mod estimators;
pub mod io;
pub mod mc;
pub mod normal;
pub mod process;
pub mod upcross;

pub use diag::{anti_dk_proportion, diag_grid, DiagGrid};
pub use error::{Error, Result};
pub use estimators::{
    blocks_confidence_interval, blocks_estimator, blocks_estimator_with_ci, blocks_sigma2,
    cluster_size_distribution, ei_estimator, ferro_segers_theta, log_blocks_asymptotic_variance,
    log_blocks_estimator, runs_estimator, ClusterSizeDistribution, EstimatorConfig, EtaEstimate,
    Interval, Method,
};
pub use mc::{run_study, run_study_with_workers, sample_path, McConfig, McReport, SamplePath};
pub use process::{simulate, true_params, ProcessKind, ProcessSpec, TrueParams, RNG_ALGORITHM};
pub use upcross::{
    block_maxima_below, block_upcrossing_counts, exceedance_times, resolve_threshold, upcrossings,
    BlockMode, BlockScheme, OrderStatistics, ThresholdSpec, TimeSeries, UpcrossingProfile,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
