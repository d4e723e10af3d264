mod support;

use proptest::prelude::*;
use support::naive;
use upcross_core::{
    anti_dk_proportion, block_maxima_below, block_upcrossing_counts, blocks_estimator,
    blocks_sigma2, cluster_size_distribution, ei_estimator, exceedance_times, ferro_segers_theta,
    log_blocks_estimator, resolve_threshold, runs_estimator, upcrossings, BlockMode, BlockScheme,
    ThresholdSpec, TimeSeries,
};

fn series_and_level() -> impl Strategy<Value = (Vec<f64>, f64)> {
    let coarse = prop::collection::vec((0u8..8).prop_map(|v| v as f64 / 8.0), 2..200);
    let fine = prop::collection::vec(-3.0f64..3.0, 2..200);
    prop_oneof![coarse, fine].prop_flat_map(|x| {
        let n = x.len();
        let from_data = (0..n).prop_map({
            let x = x.clone();
            move |i| x[i]
        });
        let level = prop_oneof![from_data, -3.5f64..3.5];
        (Just(x), level)
    })
}

fn ok<T>(r: upcross_core::Result<T>) -> Option<T> {
    r.map_err(|e| assert!(e.is_undefined_estimate(), "unexpected error {e}"))
        .ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn counting_matches((x, u) in series_and_level(), r_raw in 2usize..40) {
        let s = TimeSeries::new(x.clone()).unwrap();
        prop_assert_eq!(upcrossings(&s, u).positions, naive::upcrossings(&x, u));
        prop_assert_eq!(exceedance_times(&s, u), naive::exceedances(&x, u));
        let r = r_raw.min(x.len());
        let b = BlockScheme::new(r, x.len()).unwrap();
        prop_assert_eq!(block_upcrossing_counts(&s, u, &b).unwrap(), naive::block_counts(&x, u, r));
        prop_assert_eq!(block_maxima_below(&s, u, &b, BlockMode::Disjoint).unwrap(), naive::disjoint_below(&x, u, r));
        prop_assert_eq!(block_maxima_below(&s, u, &b, BlockMode::Sliding).unwrap(), naive::sliding_below(&x, u, r));
    }

    #[test]
    fn thresholds_match((x, _) in series_and_level(), p in 0.001f64..0.999, s_raw in 1usize..200) {
        let s = TimeSeries::new(x.clone()).unwrap();
        prop_assert_eq!(resolve_threshold(&s, &ThresholdSpec::Quantile(p)).unwrap(), naive::quantile(&x, p));
        let top = 1 + s_raw % (x.len() - 1).max(1);
        if top < x.len() {
            prop_assert_eq!(resolve_threshold(&s, &ThresholdSpec::TopOrder(top)).unwrap(), naive::top(&x, top));
        }
    }

    #[test]
    fn estimators_match((x, u) in series_and_level(), r_raw in 2usize..40, k_raw in 3usize..9) {
        let s = TimeSeries::new(x.clone()).unwrap();
        let r = r_raw.min(x.len());
        let b = BlockScheme::new(r, x.len()).unwrap();
        prop_assert_eq!(ok(blocks_estimator(&s, u, &b)).map(|e| e.value), naive::blocks(&x, u, r));
        let sig = ok(cluster_size_distribution(&s, u, &b).and_then(|d| blocks_sigma2(&d)));
        prop_assert_eq!(sig, naive::sigma2(&x, u, r));
        prop_assert_eq!(
            ok(log_blocks_estimator(&s, u, &b, BlockMode::Disjoint)).map(|e| e.value),
            naive::log_blocks(&x, u, r, false)
        );
        prop_assert_eq!(
            ok(log_blocks_estimator(&s, u, &b, BlockMode::Sliding)).map(|e| e.value),
            naive::log_blocks(&x, u, r, true)
        );
        if x.len() > k_raw {
            prop_assert_eq!(ok(runs_estimator(&s, u, k_raw)).map(|e| e.value), naive::runs(&x, u, k_raw));
        }
        prop_assert_eq!(ok(ferro_segers_theta(&s, u)), naive::ferro_segers(&x, u));
        prop_assert_eq!(ok(ei_estimator(&s, u)).map(|e| e.value), naive::ei(&x, u));
        if r > k_raw {
            prop_assert_eq!(anti_dk_proportion(&s, u, r, k_raw).unwrap(), naive::anti_dk(&x, u, r, k_raw));
        }
    }
}
