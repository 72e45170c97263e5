//! Randomised invariants.

use idim::api::{run_estimator, EstimateReport, EstimatorConfig, Flag};
use idim::bench::{generate, DatasetSpec};
use idim::geometry::{eps_ball_count, graph_ball, knn_graph, knn_query, pairwise_distances, PointCloud};
use idim::harness::{hyperparam_select, ResultRow, ResultTable};
use idim::stats::{aggregate, Aggregation};
use idim::tangential::{
    lpca_estimate, max_obtuse_subset, threshold_dimension, EigSpectrum, Neighborhood, ThresholdMethod,
};
use idim::topology::{alpha_weight, knn_total_length, magnitude, mst_of_cloud};
use proptest::prelude::*;

fn cloud_strategy(nmin: usize, nmax: usize, dmax: usize) -> impl Strategy<Value = PointCloud> {
    (nmin..=nmax, 1..=dmax).prop_flat_map(|(n, d)| {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), n)
            .prop_map(|rows| PointCloud::from_rows(&rows).unwrap())
    })
}

const METHODS: [ThresholdMethod; 7] = [
    ThresholdMethod::FO,
    ThresholdMethod::FAN,
    ThresholdMethod::MaxGap,
    ThresholdMethod::RATIO,
    ThresholdMethod::ParticipationRatio,
    ThresholdMethod::KAISER,
    ThresholdMethod::BrokenStick,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn knn_matches_sorted_distance_rows(cloud in cloud_strategy(3, 30, 4), kf in 0.0f64..1.0) {
        let n = cloud.n();
        let k = 1 + ((n - 2) as f64 * kf) as usize;
        let idx = knn_query(&cloud, k).unwrap();
        let dm = pairwise_distances(&cloud);
        for p in 0..n {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != p).map(|j| dm.get(p, j)).collect();
            row.sort_by(f64::total_cmp);
            prop_assert!(idx.dists(p).windows(2).all(|w| w[0] <= w[1]));
            for rank in 1..=k {
                prop_assert_eq!(idx.r(p, rank), row[rank - 1]);
            }
            prop_assert!(eps_ball_count(&cloud, p, idx.r(p, k) + 1e-9) >= k);
        }
    }

    #[test]
    fn graph_ball_sizes_are_bounded(cloud in cloud_strategy(4, 40, 3), kf in 0.0f64..1.0) {
        let n = cloud.n();
        let k = 1 + ((n - 2) as f64 * kf).min(5.0) as usize;
        let g = knn_graph(&cloud, k).unwrap();
        for i in 0..n {
            prop_assert_eq!(graph_ball(&g, i, 1).len(), k + 1);
            let b2 = graph_ball(&g, i, 2).len();
            prop_assert!(k + 1 <= b2 && b2 <= k * (k + 1) + 1);
        }
    }

    #[test]
    fn thresholds_ignore_spectrum_scale(values in prop::collection::vec(0.0f64..5.0, 2..12), c in 0.01f64..100.0) {
        let s = EigSpectrum::new(values);
        prop_assume!(!s.is_zero());
        for m in &METHODS {
            prop_assert_eq!(threshold_dimension(&s, m).dim, threshold_dimension(&s.scaled(c), m).dim, "{}", m.name());
        }
    }

    #[test]
    fn lpca_locals_never_exceed_k_or_ambient(cloud in cloud_strategy(12, 40, 6), kf in 0.0f64..1.0, mi in 0usize..7) {
        let k = 2 + ((cloud.n() - 3) as f64 * kf).min(10.0) as usize;
        let r = lpca_estimate(&cloud, Neighborhood::Knn(k), &METHODS[mi], Aggregation::Mean).unwrap();
        let cap = (k.min(cloud.dim())) as f64;
        prop_assert!(r.locals.as_ref().unwrap().iter().all(|v| *v <= cap));
        prop_assert_eq!(r.has(Flag::Throttled), r.estimate >= k as f64 - 1.0);
    }

    #[test]
    fn obtuse_search_matches_brute_force(dirs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..9)) {
        let m = dirs.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut best = 0;
        for mask in 1u32..(1 << m) {
            let ids: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let ok = ids.iter().enumerate().all(|(a, &i)| ids[a + 1..].iter().all(|&j| dot(&dirs[i], &dirs[j]) < 0.0));
            if ok {
                best = best.max(ids.len());
            }
        }
        prop_assert_eq!(max_obtuse_subset(&dirs, true, 0, 0), best);
    }

    #[test]
    fn harmonic_mean_is_below_mean(values in prop::collection::vec(0.01f64..100.0, 1..50)) {
        let h = aggregate(&values, Aggregation::Hmean).unwrap();
        let m = aggregate(&values, Aggregation::Mean).unwrap();
        prop_assert!(h <= m * (1.0 + 1e-12));
    }

    #[test]
    fn scale_homogeneity_of_growth_statistics(cloud in cloud_strategy(3, 30, 3), c in 0.1f64..10.0, alpha in 0.25f64..2.0) {
        let scaled = cloud.map(|v| c * v);
        let e = alpha_weight(&mst_of_cloud(&cloud).unwrap(), alpha);
        let es = alpha_weight(&mst_of_cloud(&scaled).unwrap(), alpha);
        prop_assert!((es - c.powf(alpha) * e).abs() <= 1e-9 * es.abs().max(1.0));
        let l = knn_total_length(&cloud, 1).unwrap();
        let ls = knn_total_length(&scaled, 1).unwrap();
        prop_assert!((ls - c * l).abs() <= 1e-9 * ls.max(1.0));
    }

    #[test]
    fn magnitude_lies_between_one_and_n(cloud in cloud_strategy(2, 25, 3), t in 0.05f64..20.0) {
        prop_assume!(cloud.duplicate_count() == 0);
        if let Ok(m) = magnitude(&cloud, t) {
            prop_assert!(m >= 1.0 - 1e-9 && m <= cloud.n() as f64 + 1e-9, "{m}");
        }
    }

    #[test]
    fn report_json_round_trips(est in -100.0f64..100.0, diag in prop::collection::btree_map("[a-z_]{1,8}", -1e6f64..1e6, 0..5),
                               locals in prop::option::of(prop::collection::vec(0.0f64..50.0, 0..10)), flags in prop::collection::vec(0usize..6, 0..4)) {
        let all = [Flag::Throttled, Flag::Degenerate, Flag::SlopeHazard, Flag::Nonconvergent, Flag::Approximate, Flag::Duplicates];
        let mut r = EstimateReport::new(est);
        r.estimator = "mle".into();
        for (k, v) in &diag {
            r.diag(k, *v);
        }
        for f in flags {
            r.flag(all[f]);
        }
        if let Some(l) = locals {
            r = r.with_locals(l);
        }
        let back: EstimateReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn best_is_never_worse_than_either_median_rule(means in prop::collection::vec(0.0f64..20.0, 12), truths in prop::collection::vec(1.0f64..15.0, 3)) {
        let mut rows = Vec::new();
        for (di, d) in truths.iter().enumerate() {
            for h in 0..4 {
                rows.push(ResultRow::from_runs(&format!("ds{di}"), 100, "e", &format!("h={h}"), *d, &[Some(means[di * 4 + h])]));
            }
        }
        let table = ResultTable { rows };
        for r in hyperparam_select(&table, &table.truth()).unwrap() {
            let e = |m: f64| (m - r.d).abs();
            prop_assert!(e(r.best_mean) <= e(r.med_abs_mean) && e(r.best_mean) <= e(r.med_rel_mean));
        }
    }
}

fn generated_specs() -> Vec<DatasetSpec> {
    vec![
        DatasetSpec::sphere(3),
        DatasetSpec::SOn { n: 3 },
        DatasetSpec::Torus { big_r: 3.0, r: 0.5 },
        DatasetSpec::Paraboloid { b: 0.8, sign: -1.0 },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generators_are_pure_and_satisfy_their_equations(seed in any::<u64>(), n in 1usize..60, which in 0usize..4) {
        let spec = &generated_specs()[which];
        let a = generate(spec, n, seed).unwrap();
        prop_assert_eq!(&a, &generate(spec, n, seed).unwrap());
        prop_assert_eq!((a.n(), a.dim()), (n, spec.dims().1));
        for i in 0..n {
            let x = a.row(i);
            let residual = match *spec {
                DatasetSpec::Sphere { .. } => (x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs(),
                DatasetSpec::SOn { n: m } => {
                    let mut worst: f64 = 0.0;
                    for p in 0..m {
                        for q in 0..m {
                            let g: f64 = (0..m).map(|r| x[r * m + p] * x[r * m + q]).sum();
                            worst = worst.max((g - (p == q) as u8 as f64).abs());
                        }
                    }
                    worst
                }
                DatasetSpec::Torus { big_r, r } => {
                    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                    ((rho - big_r).powi(2) + x[2] * x[2] - r * r).abs()
                }
                DatasetSpec::Paraboloid { b, sign } => (2.0 * x[0] * x[0] + sign * x[1] * x[1] / (b * b) - x[2]).abs(),
                _ => unreachable!(),
            };
            prop_assert!(residual < 1e-10, "{residual}");
        }
    }

    #[test]
    fn local_estimators_ignore_rigid_motions_and_scale(seed in 0u64..1000, c in 0.2f64..5.0, which in 0usize..6) {
        let ids = ["mle", "tle", "twonn", "gride", "wodcap", "lpca"];
        let cfg = EstimatorConfig::new(ids[which]);
        let cloud = generate(&DatasetSpec::Sphere { d: 2, ambient: 3 }, 120, seed).unwrap();
        let base = run_estimator(&cloud, &cfg).unwrap().estimate;
        // rotation about the z axis plus a shift
        let (s, co) = (seed as f64).sin_cos();
        let moved = PointCloud::from_rows(
            &(0..cloud.n())
                .map(|i| {
                    let x = cloud.row(i);
                    vec![c * (co * x[0] - s * x[1]) + 3.0, c * (s * x[0] + co * x[1]) - 1.0, c * x[2] + 0.5]
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let other = run_estimator(&moved, &cfg).unwrap().estimate;
        prop_assert!((base - other).abs() <= 1e-9 * base.abs().max(1.0), "{} vs {}", base, other);
    }
}
