use proptest::prelude::*;
use upcross_core::estimators::ClusterSizeDistribution;
use upcross_core::{
    blocks_estimator, blocks_sigma2, cluster_size_distribution, ei_estimator,
    log_blocks_asymptotic_variance, log_blocks_estimator, runs_estimator, upcrossings, BlockMode,
    BlockScheme, TimeSeries,
};

fn series() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec((0u8..6).prop_map(f64::from), 2..300),
        prop::collection::vec(-5.0f64..5.0, 2..300),
    ]
}

fn level(x: &[f64], pick: usize) -> f64 {
    x[pick % x.len()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn upcrossings_never_adjacent(x in series(), pick in any::<usize>()) {
        let u = level(&x, pick);
        let p = upcrossings(&TimeSeries::new(x.clone()).unwrap(), u).positions;
        prop_assert!(p.windows(2).all(|w| w[1] >= w[0] + 2));
        prop_assert!(p.len() <= x.len() / 2);
    }

    #[test]
    fn increasing_transform_invariance(x in series(), pick in any::<usize>(), r in 2usize..30, k in 3usize..8) {
        let u = level(&x, pick);
        let s = TimeSeries::new(x.clone()).unwrap();
        let t = s.map(|v| (v / 3.0).exp() * 2.0 + 1.0).unwrap();
        let tu = (u / 3.0).exp() * 2.0 + 1.0;
        prop_assert_eq!(upcrossings(&s, u).positions, upcrossings(&t, tu).positions);
        let r = r.min(x.len());
        let b = BlockScheme::new(r, x.len()).unwrap();
        let v = |a: upcross_core::Result<upcross_core::EtaEstimate>| a.ok().map(|e| e.value);
        prop_assert_eq!(v(blocks_estimator(&s, u, &b)), v(blocks_estimator(&t, tu, &b)));
        for mode in [BlockMode::Disjoint, BlockMode::Sliding] {
            prop_assert_eq!(v(log_blocks_estimator(&s, u, &b, mode)), v(log_blocks_estimator(&t, tu, &b, mode)));
        }
        if x.len() > k {
            prop_assert_eq!(v(runs_estimator(&s, u, k)), v(runs_estimator(&t, tu, k)));
        }
        prop_assert_eq!(v(ei_estimator(&s, u)), v(ei_estimator(&t, tu)));
    }

    #[test]
    fn block_counts_sum_to_covered_upcrossings(x in series(), pick in any::<usize>(), r in 2usize..30) {
        let u = level(&x, pick);
        let s = TimeSeries::new(x.clone()).unwrap();
        let r = r.min(x.len());
        let b = BlockScheme::new(r, x.len()).unwrap();
        let counts = upcross_core::block_upcrossing_counts(&s, u, &b).unwrap();
        let last = (b.block_count() * r).min(x.len() - 1);
        let covered = upcrossings(&s, u).positions.iter().filter(|&&p| p <= last).count();
        prop_assert_eq!(counts.iter().sum::<usize>(), covered);
    }

    #[test]
    fn blocks_range_and_duality(x in series(), pick in any::<usize>(), r in 2usize..30) {
        let u = level(&x, pick);
        let s = TimeSeries::new(x.clone()).unwrap();
        let r = r.min(x.len());
        let b = BlockScheme::new(r, x.len()).unwrap();
        let dist = cluster_size_distribution(&s, u, &b).unwrap();
        if let Ok(est) = blocks_estimator(&s, u, &b) {
            prop_assert!(est.value > 0.0 && est.value <= 1.0);
            let weighted: usize = dist.counts().iter().map(|(j, c)| j * c).sum();
            prop_assert_eq!((est.value * weighted as f64).round() as usize, dist.occupied_blocks());
            prop_assert!((est.value * weighted as f64 - dist.occupied_blocks() as f64).abs() < 1e-9);
            let sigma2 = blocks_sigma2(&dist).unwrap();
            prop_assert!(sigma2 >= dist.mean_size().unwrap());
        }
    }

    #[test]
    fn runs_in_unit_interval_and_monotone(x in series(), pick in any::<usize>()) {
        let u = level(&x, pick);
        let s = TimeSeries::new(x.clone()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 3..10 {
            if x.len() <= k {
                break;
            }
            if let Ok(e) = runs_estimator(&s, u, k) {
                prop_assert!((0.0..=1.0).contains(&e.value));
                prop_assert!(e.value <= prev);
                prev = e.value;
            }
        }
    }

    #[test]
    fn sliding_variance_below_disjoint(
        eta in 0.05f64..1.0,
        nu in 1e-4f64..20.0,
        counts in prop::collection::vec(0usize..6, 1..60),
    ) {
        let dist = ClusterSizeDistribution::from_block_counts(&counts);
        if dist.is_empty() {
            return Ok(());
        }
        let v11 = log_blocks_asymptotic_variance(eta, nu, &dist, BlockMode::Disjoint).unwrap();
        let v22 = log_blocks_asymptotic_variance(eta, nu, &dist, BlockMode::Sliding).unwrap();
        prop_assert!(v22 <= v11 * (1.0 + 1e-12) + 1e-12, "v22 {} > v11 {}", v22, v11);
    }
}
