//! Experiment configuration: defaults, flat key=value config files, and the
//! flag overrides. Flags win over the file, the file wins over defaults.

use std::fmt::Write as _;
use std::path::PathBuf;

use nrsim_core::graphgen::{GraphKind, ModelKind, Normalizer};
use nrsim_core::statistics::StatisticSpec;
use nrsim_core::weights::WeightModel;

use crate::AppError;

/// Which divisor the experiment uses; resolved to a concrete
/// [`Normalizer`] once the model is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizerChoice {
    /// Realized total weight `L_n`.
    Ln,
    /// `n E[W]` with the analytic mean (the primed model variants).
    NMean,
}

impl NormalizerChoice {
    pub fn label(&self) -> &'static str {
        match self {
            NormalizerChoice::Ln => "ln",
            NormalizerChoice::NMean => "new",
        }
    }

    pub fn parse(s: &str) -> Result<Self, AppError> {
        match s.to_ascii_lowercase().as_str() {
            "ln" => Ok(NormalizerChoice::Ln),
            "new" | "n-ew" | "new'" => Ok(NormalizerChoice::NMean),
            _ => Err(AppError::usage(format!(
                "normalizer must be 'ln' or 'new', got {s:?}"
            ))),
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub beta: f64,
    pub t_min: f64,
    pub kind: GraphKind,
    pub normalizer: NormalizerChoice,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub specs: Vec<StatisticSpec>,
    pub intervals: Vec<(f64, f64)>,
    pub level: f64,
    pub path_cap: usize,
    pub out_csv: PathBuf,
    pub out_report: PathBuf,
    pub out_edges: PathBuf,
    pub out_weights: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            beta: 3.0,
            t_min: 0.25,
            kind: GraphKind::Enr,
            normalizer: NormalizerChoice::Ln,
            n: 10_000,
            reps: 200,
            seed: 1,
            specs: vec![StatisticSpec::AllVertices],
            intervals: vec![(1.0, f64::INFINITY), (1.0, 2.0)],
            level: 0.01,
            path_cap: nrsim_core::statistics::DEFAULT_PATH_CAP,
            out_csv: PathBuf::from("results.csv"),
            out_report: PathBuf::from("report.txt"),
            out_edges: PathBuf::from("graph.edges"),
            out_weights: PathBuf::from("graph.weights"),
        }
    }
}

/// Raw overrides collected from a config file or the command line.
#[derive(Debug, Default, Clone)]
pub struct ConfigOverrides {
    pub family: Option<String>,
    pub beta: Option<f64>,
    pub t_min: Option<f64>,
    pub kind: Option<String>,
    pub normalizer: Option<String>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub specs: Option<String>,
    pub intervals: Option<String>,
    pub level: Option<f64>,
    pub path_cap: Option<usize>,
    pub out_csv: Option<PathBuf>,
    pub out_report: Option<PathBuf>,
    pub out_edges: Option<PathBuf>,
    pub out_weights: Option<PathBuf>,
}

impl ConfigOverrides {
    /// Parses the flat key=value format (one pair per line, `#` comments).
    pub fn from_file_text(text: &str) -> Result<Self, AppError> {
        let mut o = ConfigOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                AppError::usage(format!(
                    "config line {}: expected key=value, got {raw:?}",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim().to_string();
            let parse_err = |what: &str| {
                AppError::usage(format!("config line {}: bad {what} {value:?}", lineno + 1))
            };
            match key {
                "family" => o.family = Some(value),
                "beta" => o.beta = Some(value.parse().map_err(|_| parse_err("beta"))?),
                "t_min" => o.t_min = Some(value.parse().map_err(|_| parse_err("t_min"))?),
                "kind" => o.kind = Some(value),
                "normalizer" => o.normalizer = Some(value),
                "n" => o.n = Some(value.parse().map_err(|_| parse_err("n"))?),
                "reps" => o.reps = Some(value.parse().map_err(|_| parse_err("reps"))?),
                "seed" => o.seed = Some(value.parse().map_err(|_| parse_err("seed"))?),
                "specs" => o.specs = Some(value),
                "intervals" => o.intervals = Some(value),
                "level" => o.level = Some(value.parse().map_err(|_| parse_err("level"))?),
                "path_cap" => {
                    o.path_cap = Some(value.parse().map_err(|_| parse_err("path_cap"))?)
                }
                "out_csv" => o.out_csv = Some(PathBuf::from(value)),
                "out_report" => o.out_report = Some(PathBuf::from(value)),
                "out_edges" => o.out_edges = Some(PathBuf::from(value)),
                "out_weights" => o.out_weights = Some(PathBuf::from(value)),
                _ => {
                    return Err(AppError::usage(format!(
                        "config line {}: unknown key {key:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    /// Lower-priority overrides filled in where `self` has no value.
    pub fn or(mut self, lower: ConfigOverrides) -> ConfigOverrides {
        self.family = self.family.or(lower.family);
        self.beta = self.beta.or(lower.beta);
        self.t_min = self.t_min.or(lower.t_min);
        self.kind = self.kind.or(lower.kind);
        self.normalizer = self.normalizer.or(lower.normalizer);
        self.n = self.n.or(lower.n);
        self.reps = self.reps.or(lower.reps);
        self.seed = self.seed.or(lower.seed);
        self.specs = self.specs.or(lower.specs);
        self.intervals = self.intervals.or(lower.intervals);
        self.level = self.level.or(lower.level);
        self.path_cap = self.path_cap.or(lower.path_cap);
        self.out_csv = self.out_csv.or(lower.out_csv);
        self.out_report = self.out_report.or(lower.out_report);
        self.out_edges = self.out_edges.or(lower.out_edges);
        self.out_weights = self.out_weights.or(lower.out_weights);
        self
    }

    pub fn resolve(self) -> Result<ExperimentConfig, AppError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(v) = self.family {
            if !v.eq_ignore_ascii_case("pareto") {
                return Err(AppError::usage(format!(
                    "family must be 'pareto', got {v:?}"
                )));
            }
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.t_min {
            cfg.t_min = v;
        }
        if let Some(v) = self.kind {
            cfg.kind = GraphKind::parse(&v)
                .map_err(|_| AppError::usage(format!("kind must be one of nr, enr, cl, grg; got {v:?}")))?;
        }
        if let Some(v) = self.normalizer {
            cfg.normalizer = NormalizerChoice::parse(&v)?;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.reps {
            cfg.reps = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.specs {
            cfg.specs = parse_specs(&v)?;
        }
        if let Some(v) = self.intervals {
            cfg.intervals = parse_intervals(&v)?;
        }
        if let Some(v) = self.level {
            cfg.level = v;
        }
        if let Some(v) = self.path_cap {
            cfg.path_cap = v;
        }
        if let Some(v) = self.out_csv {
            cfg.out_csv = v;
        }
        if let Some(v) = self.out_report {
            cfg.out_report = v;
        }
        if let Some(v) = self.out_edges {
            cfg.out_edges = v;
        }
        if let Some(v) = self.out_weights {
            cfg.out_weights = v;
        }
        Ok(cfg)
    }
}

pub fn parse_specs(text: &str) -> Result<Vec<StatisticSpec>, AppError> {
    let mut specs = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        specs.push(
            item.parse::<StatisticSpec>()
                .map_err(|e| AppError::usage(e.to_string()))?,
        );
    }
    if specs.is_empty() {
        return Err(AppError::usage("specs must name at least one statistic"));
    }
    Ok(specs)
}

pub fn parse_intervals(text: &str) -> Result<Vec<(f64, f64)>, AppError> {
    let mut intervals = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item.split_once(':').ok_or_else(|| {
            AppError::usage(format!("interval {item:?} must have the form a:b"))
        })?;
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|_| AppError::usage(format!("bad interval bound {a:?}")))?;
        let b = parse_bound(b.trim())?;
        if !(a > 0.0 && a < b) {
            return Err(AppError::usage(format!(
                "interval ({a}, {b}] must satisfy 0 < a < b"
            )));
        }
        intervals.push((a, b));
    }
    if intervals.is_empty() {
        return Err(AppError::usage("intervals must name at least one interval"));
    }
    Ok(intervals)
}

fn parse_bound(text: &str) -> Result<f64, AppError> {
    if text.eq_ignore_ascii_case("inf") || text == "∞" {
        return Ok(f64::INFINITY);
    }
    text.parse()
        .map_err(|_| AppError::usage(format!("bad interval bound {text:?}")))
}

fn fmt_bound(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}

impl ExperimentConfig {
    /// Validates domain constraints and builds the weight model. Error
    /// messages name the violated constraint.
    pub fn model(&self) -> Result<WeightModel, AppError> {
        WeightModel::new(self.beta, self.t_min).map_err(|e| AppError::usage(e.to_string()))
    }

    pub fn model_kind(&self) -> Result<ModelKind, AppError> {
        let normalizer = match self.normalizer {
            NormalizerChoice::Ln => Normalizer::WeightSum,
            NormalizerChoice::NMean => Normalizer::ExpectedWeightSum {
                mean_weight: self
                    .model()?
                    .moment(1)
                    .map_err(|e| AppError::usage(e.to_string()))?,
            },
        };
        Ok(ModelKind { kind: self.kind, normalizer })
    }

    pub fn validate_for_generation(&self) -> Result<(), AppError> {
        self.model()?;
        if self.n == 0 {
            return Err(AppError::usage("n must be >= 1"));
        }
        Ok(())
    }

    pub fn validate_for_verify(&self) -> Result<(), AppError> {
        self.model()?;
        if self.n < 2 {
            return Err(AppError::usage("n must be >= 2 so that q(n) is defined"));
        }
        if self.reps == 0 {
            return Err(AppError::usage("reps must be >= 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(AppError::usage("level must lie strictly inside (0,1)"));
        }
        if self.specs.is_empty() {
            return Err(AppError::usage("specs must name at least one statistic"));
        }
        Ok(())
    }

    /// The experiment-defining keys, echoed into every output file header.
    /// Execution details (thread count) and output paths are not part of the
    /// experiment and are omitted so that reruns produce identical bytes.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "family=pareto beta={} t_min={} kind={} normalizer={} n={} reps={} seed={}",
            self.beta,
            self.t_min,
            self.kind.label(),
            self.normalizer.label(),
            self.n,
            self.reps,
            self.seed
        );
        let specs: Vec<String> = self.specs.iter().map(|p| p.to_string()).collect();
        let intervals: Vec<String> = self
            .intervals
            .iter()
            .map(|&(a, b)| format!("{}:{}", fmt_bound(a), fmt_bound(b)))
            .collect();
        let _ = write!(
            s,
            " specs={} intervals={} level={} path_cap={}",
            specs.join(","),
            intervals.join(","),
            self.level,
            self.path_cap
        );
        s
    }
}
