//! Replicated experiments and the statistical tests used to compare them
//! against the limit laws.
//!
//! Replication `r` gets the deterministic seed `derive_seed(base_seed, r)`
//! and an independent ChaCha8 stream, so results are identical whatever the
//! execution order or parallelism degree. One replication samples weights,
//! generates the graph, partitions it, and evaluates every configured
//! statistic: the point process of rescaled per-component counts, its
//! maximum, its counts on the configured intervals, and the count at the
//! top-weight vertex.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

use crate::components::components;
use crate::graphgen::{generate, ModelKind};
use crate::limits::{build_xi_n, xi, LimitsError};
use crate::statistics::{count_statistic_capped, StatisticSpec, DEFAULT_PATH_CAP};
use crate::weights::{WeightError, WeightModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("Poisson rate must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("significance level must lie in (0,1), got {0}")]
    BadLevel(f64),
    #[error("replication count must be >= 1")]
    ZeroReplications,
    #[error("graph size must be >= 2 so that q(n) is defined, got {0}")]
    BadGraphSize(usize),
    #[error("at least one statistic spec is required")]
    EmptySpecs,
    #[error("interval must satisfy 0 < a < b, got a = {a}, b = {b}")]
    BadInterval { a: f64, b: f64 },
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Limits(#[from] LimitsError),
}

/// SplitMix64 finalizer (constants 0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9,
/// 0x94D049BB133111EB). A bijection on u64, so the derived seeds below are
/// collision-free in the replication index.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-replication seed; injective in `rep` for a fixed base.
pub fn derive_seed(base_seed: u64, rep: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(rep))
}

/// The deterministic generator used for every stream in this crate.
pub fn rng_for_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// What to simulate and what to record per replication.
#[derive(Debug, Clone)]
pub struct ReplicationConfig {
    pub model: WeightModel,
    pub graph: ModelKind,
    pub n: usize,
    pub specs: Vec<StatisticSpec>,
    /// Half-open intervals `(a, b]` whose point counts are recorded.
    pub intervals: Vec<(f64, f64)>,
    pub path_cap: usize,
}

impl ReplicationConfig {
    pub fn new(
        model: WeightModel,
        graph: ModelKind,
        n: usize,
        specs: Vec<StatisticSpec>,
        intervals: Vec<(f64, f64)>,
    ) -> Self {
        Self { model, graph, n, specs, intervals, path_cap: DEFAULT_PATH_CAP }
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        if self.n < 2 {
            return Err(InferenceError::BadGraphSize(self.n));
        }
        if self.specs.is_empty() {
            return Err(InferenceError::EmptySpecs);
        }
        for &(a, b) in &self.intervals {
            if !(a > 0.0 && a < b) {
                return Err(InferenceError::BadInterval { a, b });
            }
        }
        if !self.model.is_subcritical() {
            let first = self.model.moment(1)?;
            let second = self.model.moment(2)?;
            return Err(InferenceError::Limits(LimitsError::NotSubcritical {
                first,
                second,
            }));
        }
        Ok(())
    }
}

/// Per-spec outcome of one replication; an error string records failures
/// such as an exceeded path cap without aborting the run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecOutcome {
    pub spec: StatisticSpec,
    pub values: Result<SpecValues, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecValues {
    /// Largest rescaled point of the statistic's point process, if any.
    pub max_point: Option<f64>,
    /// Point counts on the configured intervals, in configuration order.
    pub interval_counts: Vec<u64>,
    /// Raw count at the top-weight vertex.
    pub s_top: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    /// The largest weight of the replication.
    pub w_top: f64,
    pub outcomes: Vec<SpecOutcome>,
}

/// Runs `reps` replications in parallel on the current rayon pool, merged by
/// replication index: the output is a pure function of `(cfg, base_seed)`.
pub fn run_replications(
    cfg: &ReplicationConfig,
    reps: usize,
    base_seed: u64,
) -> Result<Vec<ReplicationResult>, InferenceError> {
    if reps == 0 {
        return Err(InferenceError::ZeroReplications);
    }
    cfg.validate()?;
    let qn = cfg.model.q_n(cfg.n)?;
    let mut xis = Vec::with_capacity(cfg.specs.len());
    for spec in &cfg.specs {
        xis.push(xi(&cfg.model, spec)?.value);
    }
    let results: Vec<ReplicationResult> = (0..reps)
        .into_par_iter()
        .map(|rep| run_single(cfg, rep, base_seed, qn, &xis))
        .collect();
    Ok(results)
}

fn run_single(
    cfg: &ReplicationConfig,
    rep: usize,
    base_seed: u64,
    qn: f64,
    xis: &[f64],
) -> ReplicationResult {
    let seed = derive_seed(base_seed, rep as u64);
    let mut rng = rng_for_seed(seed);
    let weights = cfg.model.sample_weights(cfg.n, &mut rng);
    let graph = generate(&weights, cfg.graph, &mut rng);
    let view = components(&graph, &weights).expect("weights sized to the graph");
    let v_top = weights.top_vertex().expect("n >= 2");
    let w_top = weights.get(v_top);

    let outcomes = cfg
        .specs
        .iter()
        .zip(xis)
        .map(|(spec, &xi_value)| {
            let values = (|| {
                let points =
                    build_xi_n(&graph, &weights, &view, spec, xi_value, qn, cfg.path_cap)
                        .map_err(|e| e.to_string())?;
                let mut interval_counts = Vec::with_capacity(cfg.intervals.len());
                for &(a, b) in &cfg.intervals {
                    interval_counts
                        .push(points.interval_count(a, b).map_err(|e| e.to_string())?);
                }
                let s_top =
                    count_statistic_capped(&graph, &view, v_top, spec, cfg.path_cap)
                        .map_err(|e| e.to_string())?;
                Ok(SpecValues { max_point: points.max_point(), interval_counts, s_top })
            })();
            SpecOutcome { spec: spec.clone(), values }
        })
        .collect();

    ReplicationResult { rep, seed, n: cfg.n, w_top, outcomes }
}

/// Max-point sample for one spec, skipping errored or point-free replications.
pub fn max_point_sample(results: &[ReplicationResult], spec_index: usize) -> Vec<f64> {
    results
        .iter()
        .filter_map(|r| r.outcomes[spec_index].values.as_ref().ok())
        .filter_map(|v| v.max_point)
        .collect()
}

/// Interval-count sample for one spec and one configured interval.
pub fn interval_count_sample(
    results: &[ReplicationResult],
    spec_index: usize,
    interval_index: usize,
) -> Vec<u64> {
    results
        .iter()
        .filter_map(|r| r.outcomes[spec_index].values.as_ref().ok())
        .map(|v| v.interval_counts[interval_index])
        .collect()
}

/// `S_n(v_top) / W_top` sample for one spec (the ratio whose mean should
/// approach `xi`).
pub fn top_ratio_sample(results: &[ReplicationResult], spec_index: usize) -> Vec<f64> {
    results
        .iter()
        .filter_map(|r| {
            r.outcomes[spec_index]
                .values
                .as_ref()
                .ok()
                .map(|v| v.s_top as f64 / r.w_top)
        })
        .collect()
}

/// `W_(n) / q(n)` sample across replications.
pub fn rescaled_top_weight_sample(results: &[ReplicationResult], qn: f64) -> Vec<f64> {
    results.iter().map(|r| r.w_top / qn).collect()
}

/// Results CSV: one row per (replication, spec) with the interval counts as
/// one column per configured interval. Errored spec evaluations leave their
/// value fields empty.
pub fn write_results_csv<W: Write>(
    results: &[ReplicationResult],
    intervals: &[(f64, f64)],
    header_lines: &[String],
    out: &mut W,
) -> io::Result<()> {
    for line in header_lines {
        writeln!(out, "# {line}")?;
    }
    let count_cols: Vec<String> = intervals
        .iter()
        .map(|&(a, b)| format!("count_{}_{}", fmt_bound(a), fmt_bound(b)))
        .collect();
    writeln!(out, "rep,seed,n,spec,point_max,{},s_top,w_top", count_cols.join(","))?;
    for r in results {
        for outcome in &r.outcomes {
            write!(out, "{},{},{},{}", r.rep, r.seed, r.n, outcome.spec)?;
            match &outcome.values {
                Ok(v) => {
                    match v.max_point {
                        Some(p) => write!(out, ",{p}")?,
                        None => write!(out, ",")?,
                    }
                    for c in &v.interval_counts {
                        write!(out, ",{c}")?;
                    }
                    write!(out, ",{}", v.s_top)?;
                }
                Err(_) => {
                    for _ in 0..(2 + intervals.len()) {
                        write!(out, ",")?;
                    }
                }
            }
            writeln!(out, ",{}", r.w_top)?;
        }
    }
    Ok(())
}

fn fmt_bound(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Outcome of a single statistical check.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub reject: bool,
    pub sample_size: usize,
    pub level: f64,
}

/// One-sample Kolmogorov-Smirnov test against a fully specified CDF.
///
/// The statistic is the two-sided sup distance over the sorted sample; the
/// p-value uses the asymptotic Kolmogorov series
/// `2 sum_k (-1)^{k-1} exp(-2 k^2 N D^2)` truncated once terms drop below
/// 1e-12.
pub fn ks_test<F: Fn(f64) -> f64>(
    samples: &[f64],
    cdf: F,
    level: f64,
) -> Result<TestReport, InferenceError> {
    const MIN_SAMPLES: usize = 5;
    if samples.len() < MIN_SAMPLES {
        return Err(InferenceError::TooFewSamples { got: samples.len(), need: MIN_SAMPLES });
    }
    check_level(level)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples are finite"));
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let upper = ((i + 1) as f64 / n - f).abs();
        let lower = (i as f64 / n - f).abs();
        d = d.max(upper).max(lower);
    }
    let p = kolmogorov_pvalue(n.sqrt() * d);
    Ok(TestReport {
        statistic: d,
        p_value: Some(p),
        reject: p < level,
        sample_size: sorted.len(),
        level,
    })
}

/// Asymptotic tail probability `P(sqrt(N) D > t)` of the Kolmogorov
/// distribution, clamped to [0, 1].
pub fn kolmogorov_pvalue(t: f64) -> f64 {
    if t <= 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..10_000 {
        let term = (-2.0 * (k as f64) * (k as f64) * t * t).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Combined mean and dispersion reports of a Poisson goodness-of-fit check.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonGof {
    /// Two-sided z-test of the sample mean against `lambda`.
    pub mean: TestReport,
    /// Dispersion index `(R-1) s^2 / mean` against chi-square(R-1).
    pub dispersion: TestReport,
    pub lambda: f64,
    pub sample_mean: f64,
}

impl PoissonGof {
    pub fn reject(&self) -> bool {
        self.mean.reject || self.dispersion.reject
    }
}

/// Tests replication counts against a Poisson(`lambda`) law: the sample mean
/// must match `lambda` within normal error, and the dispersion index must be
/// consistent with unit variance-to-mean ratio (both two-sided at `level`).
pub fn poisson_gof(counts: &[u64], lambda: f64, level: f64) -> Result<PoissonGof, InferenceError> {
    const MIN_COUNTS: usize = 20;
    if counts.len() < MIN_COUNTS {
        return Err(InferenceError::TooFewSamples { got: counts.len(), need: MIN_COUNTS });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(InferenceError::BadLambda(lambda));
    }
    check_level(level)?;
    let r = counts.len() as f64;
    let mean: f64 = counts.iter().map(|&c| c as f64).sum::<f64>() / r;

    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let z = (mean - lambda) / (lambda / r).sqrt();
    let mean_p = 2.0 * (1.0 - normal.cdf(z.abs()));
    let mean_report = TestReport {
        statistic: z,
        p_value: Some(mean_p),
        reject: mean_p < level,
        sample_size: counts.len(),
        level,
    };

    let variance: f64 =
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (r - 1.0);
    // All-equal counts give dispersion 0: maximal under-dispersion.
    let dispersion = if mean > 0.0 { (r - 1.0) * variance / mean } else { 0.0 };
    let chi = ChiSquared::new(r - 1.0).expect("positive degrees of freedom");
    let cdf = chi.cdf(dispersion);
    let disp_p = (2.0 * cdf.min(1.0 - cdf)).clamp(0.0, 1.0);
    let dispersion_report = TestReport {
        statistic: dispersion,
        p_value: Some(disp_p),
        reject: disp_p < level,
        sample_size: counts.len(),
        level,
    };

    Ok(PoissonGof { mean: mean_report, dispersion: dispersion_report, lambda, sample_mean: mean })
}

fn check_level(level: f64) -> Result<(), InferenceError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(InferenceError::BadLevel(level));
    }
    Ok(())
}
