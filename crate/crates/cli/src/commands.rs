//! Subcommand implementations.

use std::fmt::Write as _;

use nrsim_core::graphgen::generate as generate_graph;
use nrsim_core::inference::{
    derive_seed, interval_count_sample, ks_test, max_point_sample, poisson_gof,
    rescaled_top_weight_sample, rng_for_seed, run_replications, top_ratio_sample,
    write_results_csv, PoissonGof, ReplicationConfig, ReplicationResult, TestReport,
};
use nrsim_core::limits::{frechet_cdf, nu_beta, xi as xi_constant};
use nrsim_core::statistics::{
    automorphism_count, canonical_form, RootedTree, StatisticSpec,
};

use crate::config::ExperimentConfig;
use crate::{write_file, AppError, VERSION};

fn header_lines(cfg: &ExperimentConfig) -> Vec<String> {
    vec![format!("nrsim {VERSION}"), format!("config: {}", cfg.echo())]
}

/// `generate`: one graph, written as an edge list plus a weights file.
pub fn generate(cfg: &ExperimentConfig) -> Result<(), AppError> {
    cfg.validate_for_generation()?;
    let model = cfg.model()?;
    let model_kind = cfg.model_kind()?;
    let mut rng = rng_for_seed(derive_seed(cfg.seed, 0));
    let weights = model.sample_weights(cfg.n, &mut rng);
    let graph = generate_graph(&weights, model_kind, &mut rng);

    let mut edges = Vec::new();
    graph
        .write_edge_list(&model_kind.label(), &header_lines(cfg), &mut edges)
        .map_err(|e| AppError::runtime(e.to_string()))?;
    write_file(&cfg.out_edges, &edges)?;

    let mut wbuf = String::new();
    for line in header_lines(cfg) {
        let _ = writeln!(wbuf, "# {line}");
    }
    let _ = writeln!(wbuf, "# n={}", cfg.n);
    for w in weights.iter() {
        let _ = writeln!(wbuf, "{w}");
    }
    write_file(&cfg.out_weights, wbuf.as_bytes())?;

    println!(
        "wrote {} ({} vertices, {} edges) and {}",
        cfg.out_edges.display(),
        graph.n(),
        graph.edge_total(),
        cfg.out_weights.display()
    );
    Ok(())
}

/// `xi`: the limit constant with the moment values it uses, 12 significant
/// digits.
pub fn xi(cfg: &ExperimentConfig, spec_text: &str) -> Result<(), AppError> {
    let spec: StatisticSpec = spec_text
        .parse()
        .map_err(|e: nrsim_core::statistics::StatisticsError| AppError::usage(e.to_string()))?;
    let model = cfg.model()?;
    let constant =
        xi_constant(&model, &spec).map_err(|e| AppError::usage(e.to_string()))?;

    println!("spec = {spec}");
    println!("family = pareto");
    println!("beta = {}", cfg.beta);
    println!("t_min = {}", cfg.t_min);
    let first = model.moment(1).map_err(|e| AppError::usage(e.to_string()))?;
    let second = model.moment(2).map_err(|e| AppError::usage(e.to_string()))?;
    println!("E[W] = {first:.11e}");
    println!("E[W^2] = {second:.11e}");
    match &spec {
        StatisticSpec::AllVertices | StatisticSpec::DistanceM(_) => {}
        StatisticSpec::DegreeM(m) => {
            let damped = model
                .exp_moment(*m as u32)
                .map_err(|e| AppError::runtime(e.to_string()))?;
            println!("E[W^{m} e^-W] = {damped:.11e}");
        }
        StatisticSpec::TerminalTree(tree) => {
            println!("c(T) = {}", automorphism_count(tree));
            let mut orders: Vec<u32> = vec![tree.tree_degree(0) as u32 + 1];
            orders.extend((1..tree.vertex_count()).map(|i| tree.tree_degree(i) as u32));
            orders.sort_unstable();
            orders.dedup();
            for k in orders {
                let damped = model
                    .exp_moment(k)
                    .map_err(|e| AppError::runtime(e.to_string()))?;
                println!("E[W^{k} e^-W] = {damped:.11e}");
            }
        }
    }
    println!("xi = {:.11e}", constant.value);
    Ok(())
}

/// `tree`: canonical form, automorphism count, degree sequence.
pub fn tree(text: &str) -> Result<(), AppError> {
    let tree = RootedTree::parse(text).map_err(|e| AppError::usage(e.to_string()))?;
    println!("tree = {}", tree.to_parent_string(" "));
    println!("canonical = {}", canonical_form(&tree));
    println!("c = {}", automorphism_count(&tree));
    let degrees: Vec<String> =
        tree.degrees().iter().map(|d| d.to_string()).collect();
    println!("degrees = {}", degrees.join(" "));
    Ok(())
}

/// `moments`: raw and damped moments plus the subcritical margin.
pub fn moments(cfg: &ExperimentConfig, max_k: u32, max_exp: u32) -> Result<(), AppError> {
    // Allow non-subcritical parameters here: this command diagnoses them.
    let model = nrsim_core::weights::WeightModel::new_unchecked(cfg.beta, cfg.t_min)
        .map_err(|e| AppError::usage(e.to_string()))?;
    println!("beta = {}", cfg.beta);
    println!("t_min = {}", cfg.t_min);
    for k in 1..=max_k {
        match model.moment(k) {
            Ok(v) => println!("E[W^{k}] = {v:.11e}"),
            Err(_) => println!("E[W^{k}] = infinite (k >= beta)"),
        }
    }
    for m in 0..=max_exp {
        let v = model
            .exp_moment(m)
            .map_err(|e| AppError::runtime(e.to_string()))?;
        println!("E[W^{m} e^-W] = {v:.11e}");
    }
    let first = model.moment(1).map_err(|e| AppError::usage(e.to_string()))?;
    let second = model.moment(2).map_err(|e| AppError::usage(e.to_string()))?;
    println!("subcritical = {}", model.is_subcritical());
    println!("E[W] - E[W^2] = {:.11e}", first - second);
    if cfg.n >= 2 {
        let qn = model.q_n(cfg.n).map_err(|e| AppError::usage(e.to_string()))?;
        println!("q({}) = {qn:.11e}", cfg.n);
    }
    Ok(())
}

fn push_test_block(out: &mut String, title: &str, report: &TestReport) {
    let _ = writeln!(out, "[{title}]");
    let _ = writeln!(out, "n_samples={}", report.sample_size);
    let _ = writeln!(out, "statistic={}", report.statistic);
    match report.p_value {
        Some(p) => {
            let _ = writeln!(out, "p_value={p}");
        }
        None => {
            let _ = writeln!(out, "p_value=");
        }
    }
    let _ = writeln!(out, "level={}", report.level);
    let _ = writeln!(out, "reject={}", report.reject);
    let _ = writeln!(out);
}

fn push_gof_block(out: &mut String, title: &str, gof: &PoissonGof) {
    let _ = writeln!(out, "[{title}]");
    let _ = writeln!(out, "n_samples={}", gof.mean.sample_size);
    let _ = writeln!(out, "lambda={}", gof.lambda);
    let _ = writeln!(out, "sample_mean={}", gof.sample_mean);
    let _ = writeln!(out, "mean_z={}", gof.mean.statistic);
    let _ = writeln!(out, "mean_p={}", gof.mean.p_value.unwrap_or(f64::NAN));
    let _ = writeln!(out, "mean_reject={}", gof.mean.reject);
    let _ = writeln!(out, "dispersion={}", gof.dispersion.statistic);
    let _ = writeln!(
        out,
        "dispersion_p={}",
        gof.dispersion.p_value.unwrap_or(f64::NAN)
    );
    let _ = writeln!(out, "dispersion_reject={}", gof.dispersion.reject);
    let _ = writeln!(out, "level={}", gof.mean.level);
    let _ = writeln!(out, "reject={}", gof.reject());
    let _ = writeln!(out);
}

fn push_skipped_block(out: &mut String, title: &str, reason: &str) {
    let _ = writeln!(out, "[{title}]");
    let _ = writeln!(out, "skipped={reason}");
    let _ = writeln!(out, "reject=true");
    let _ = writeln!(out);
}

fn fmt_interval(a: f64, b: f64) -> String {
    let fmt = |x: f64| {
        if x.is_infinite() {
            "inf".to_string()
        } else {
            format!("{x}")
        }
    };
    format!("{}:{}", fmt(a), fmt(b))
}

/// `verify`: replications, results CSV, test report. Returns whether every
/// gating test accepted.
pub fn verify(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<bool, AppError> {
    cfg.validate_for_verify()?;
    let model = cfg.model()?;
    let model_kind = cfg.model_kind()?;
    let rep_cfg = ReplicationConfig {
        model,
        graph: model_kind,
        n: cfg.n,
        specs: cfg.specs.clone(),
        intervals: cfg.intervals.clone(),
        path_cap: cfg.path_cap,
    };

    let run = || run_replications(&rep_cfg, cfg.reps, cfg.seed);
    let results = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| AppError::runtime(e.to_string()))?
            .install(run),
        None => run(),
    }
    .map_err(|e| AppError::usage(e.to_string()))?;

    let mut csv = Vec::new();
    write_results_csv(&results, &cfg.intervals, &header_lines(cfg), &mut csv)
        .map_err(|e| AppError::runtime(e.to_string()))?;
    write_file(&cfg.out_csv, &csv)?;

    let (report_text, all_pass) = build_report(cfg, &model, &results)?;
    write_file(&cfg.out_report, report_text.as_bytes())?;
    print!("{report_text}");
    println!("results: {}", cfg.out_csv.display());
    println!("report:  {}", cfg.out_report.display());
    Ok(all_pass)
}

fn build_report(
    cfg: &ExperimentConfig,
    model: &nrsim_core::weights::WeightModel,
    results: &[ReplicationResult],
) -> Result<(String, bool), AppError> {
    let beta = cfg.beta;
    let qn = model.q_n(cfg.n).map_err(|e| AppError::usage(e.to_string()))?;
    let mut out = String::new();
    let _ = writeln!(out, "nrsim verify report (v{VERSION})");
    let _ = writeln!(out, "config: {}", cfg.echo());
    let _ = writeln!(out);

    let mut all_pass = true;

    for (spec_index, spec) in cfg.specs.iter().enumerate() {
        let errors = results
            .iter()
            .filter(|r| r.outcomes[spec_index].values.is_err())
            .count();
        if errors > 0 {
            let _ = writeln!(out, "[errors spec={spec}]");
            let _ = writeln!(out, "failed_replications={errors}");
            let first = results
                .iter()
                .find_map(|r| r.outcomes[spec_index].values.as_ref().err())
                .expect("at least one error");
            let _ = writeln!(out, "first_error={first}");
            let _ = writeln!(out);
        }

        // (i) Fréchet law of the rescaled maximum. A sample too small to
        // test (all replications errored, or every point process empty)
        // counts against the verdict rather than aborting the report.
        let maxima = max_point_sample(results, spec_index);
        match ks_test(&maxima, |x| frechet_cdf(x, beta), cfg.level) {
            Ok(ks) => {
                all_pass &= !ks.reject;
                push_test_block(&mut out, &format!("ks_max spec={spec}"), &ks);
            }
            Err(e) => {
                all_pass = false;
                push_skipped_block(&mut out, &format!("ks_max spec={spec}"), &e.to_string());
            }
        }

        // (ii) Poisson counts per configured interval.
        for (interval_index, &(a, b)) in cfg.intervals.iter().enumerate() {
            let counts = interval_count_sample(results, spec_index, interval_index);
            let lambda =
                nu_beta(a, b, beta).map_err(|e| AppError::usage(e.to_string()))?;
            let title = format!("poisson spec={spec} interval={}", fmt_interval(a, b));
            match poisson_gof(&counts, lambda, cfg.level) {
                Ok(gof) => {
                    all_pass &= !gof.reject();
                    push_gof_block(&mut out, &title, &gof);
                }
                Err(e) => {
                    all_pass = false;
                    push_skipped_block(&mut out, &title, &e.to_string());
                }
            }
        }

        // (iii) Mean of S_n at the top-weight vertex against W_top * xi
        // (diagnostic, not gating).
        let xi_value = xi_constant(model, spec)
            .map_err(|e| AppError::usage(e.to_string()))?
            .value;
        let ratios = top_ratio_sample(results, spec_index);
        let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
        let _ = writeln!(out, "[a1 spec={spec}]");
        let _ = writeln!(out, "n_samples={}", ratios.len());
        let _ = writeln!(out, "xi={xi_value}");
        let _ = writeln!(out, "ratio_mean={mean}");
        let _ = writeln!(out, "rel_dev={}", mean / xi_value - 1.0);
        let _ = writeln!(out);
    }

    // (iv) Control: the rescaled top weight against the same Fréchet law,
    // exercising only the sampler and the test machinery.
    let top_weights = rescaled_top_weight_sample(results, qn);
    match ks_test(&top_weights, |x| frechet_cdf(x, beta), cfg.level) {
        Ok(control) => {
            all_pass &= !control.reject;
            push_test_block(&mut out, "control_ks_top_weight", &control);
        }
        Err(e) => {
            all_pass = false;
            push_skipped_block(&mut out, "control_ks_top_weight", &e.to_string());
        }
    }

    let _ = writeln!(out, "verdict: {}", if all_pass { "PASS" } else { "REJECT" });
    Ok((out, all_pass))
}
