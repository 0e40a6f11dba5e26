//! Determinism, seeding, and self-consistency of the inference machinery,
//! plus the empirical tail of the weight sampler.

use std::collections::HashSet;

use nrsim_core::graphgen::{GraphKind, ModelKind, Normalizer};
use nrsim_core::inference::{
    derive_seed, ks_test, poisson_gof, rng_for_seed, run_replications, ReplicationConfig,
};
use nrsim_core::limits::frechet_cdf;
use nrsim_core::statistics::StatisticSpec;
use nrsim_core::weights::WeightModel;
use rand::Rng;

#[test]
fn seed_derivation_is_injective_over_a_million_replications() {
    let mut seen = HashSet::with_capacity(1 << 20);
    for rep in 0..1_000_000u64 {
        assert!(seen.insert(derive_seed(0xbada_55_u64, rep)), "collision at rep {rep}");
    }
}

#[test]
fn replications_identical_across_parallelism_degrees() {
    let cfg = ReplicationConfig::new(
        WeightModel::new(3.0, 0.25).unwrap(),
        ModelKind { kind: GraphKind::Enr, normalizer: Normalizer::WeightSum },
        2_000,
        vec![StatisticSpec::AllVertices, StatisticSpec::DistanceM(2)],
        vec![(1.0, f64::INFINITY), (1.0, 2.0)],
    );
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_replications(&cfg, 40, 99).unwrap());
    let parallel = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| run_replications(&cfg, 40, 99).unwrap());
    assert_eq!(serial, parallel);
}

#[test]
fn ks_test_is_invariant_under_the_probability_integral_transform() {
    let beta = 3.0;
    let mut rng = rng_for_seed(0x9717);
    let samples: Vec<f64> = (0..5_000)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>();
            (-(u.ln())).powf(-1.0 / beta)
        })
        .collect();
    let direct = ks_test(&samples, |x| frechet_cdf(x, beta), 0.05).unwrap();
    let transformed: Vec<f64> = samples.iter().map(|&x| frechet_cdf(x, beta)).collect();
    let uniform = ks_test(&transformed, |x| x.clamp(0.0, 1.0), 0.05).unwrap();
    assert!(
        (direct.statistic - uniform.statistic).abs() <= 1e-12,
        "D {} vs {}",
        direct.statistic,
        uniform.statistic
    );
}

#[test]
fn poisson_gof_mean_check_has_the_right_rejection_rate() {
    let level = 0.05;
    let lambda = 3.0;
    let sims = 1_000;
    let per_sim = 100;
    let mut rng = rng_for_seed(0x90f5);
    let mut rejections = 0;
    for _ in 0..sims {
        let counts: Vec<u64> = (0..per_sim)
            .map(|_| {
                let mut k = 0u64;
                let mut p: f64 = 1.0;
                let threshold = (-lambda as f64).exp();
                loop {
                    p *= rng.random::<f64>();
                    if p <= threshold {
                        break k;
                    }
                    k += 1;
                }
            })
            .collect();
        let gof = poisson_gof(&counts, lambda, level).unwrap();
        if gof.mean.reject {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / sims as f64;
    assert!(
        rate >= level / 2.0 && rate <= 2.0 * level,
        "rejection rate {rate} outside [{}, {}]",
        level / 2.0,
        2.0 * level
    );
}

#[test]
fn sampled_weights_exceed_q_n_at_the_nominal_rate() {
    let model = WeightModel::new(3.0, 0.25).unwrap();
    let n = 100_000;
    let mut rng = rng_for_seed(0x7a11);
    let weights = model.sample_weights(n, &mut rng);
    let qn = model.q_n(n).unwrap();
    let exceed = weights.iter().filter(|&w| w > qn).count() as f64 / n as f64;
    let nominal = 1.0 / n as f64;
    let slack = 3.0 / (n as f64).sqrt() + nominal;
    assert!(
        (exceed - nominal).abs() <= slack,
        "exceedance fraction {exceed} vs nominal {nominal}"
    );
}

#[test]
fn top_vertex_count_tracks_its_weight_at_moderate_size() {
    // Mean of S_n(v_top)/W_top over 100 replications at n = 1e4 sits within
    // 10% of the limit constant 2 for this model.
    let cfg = ReplicationConfig::new(
        WeightModel::new(3.0, 0.25).unwrap(),
        ModelKind { kind: GraphKind::Enr, normalizer: Normalizer::WeightSum },
        10_000,
        vec![StatisticSpec::AllVertices],
        vec![(1.0, f64::INFINITY)],
    );
    let results = run_replications(&cfg, 100, 42).unwrap();
    let ratios = nrsim_core::inference::top_ratio_sample(&results, 0);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!(
        (mean / 2.0 - 1.0).abs() <= 0.10,
        "mean S_top/W_top = {mean}, want within 10% of 2.0"
    );
}

#[test]
fn per_replication_errors_are_recorded_not_fatal() {
    // A tiny path cap forces the terminal-tree statistic to fail while the
    // other statistic in the same run still succeeds.
    let mut cfg = ReplicationConfig::new(
        WeightModel::new(3.0, 0.25).unwrap(),
        ModelKind { kind: GraphKind::Enr, normalizer: Normalizer::WeightSum },
        300,
        vec![
            StatisticSpec::AllVertices,
            StatisticSpec::TerminalTree(nrsim_core::statistics::RootedTree::single()),
        ],
        vec![(1.0, f64::INFINITY)],
    );
    cfg.path_cap = 1;
    let results = run_replications(&cfg, 5, 3).unwrap();
    for r in &results {
        assert!(r.outcomes[0].values.is_ok());
        let err = r.outcomes[1].values.as_ref().unwrap_err();
        assert!(err.contains("cap"), "unexpected error {err}");
    }
}
