//! End-to-end tests of the command-line interface: exit codes, config
//! handling, determinism, and the file round trip back into the library.

use std::io::BufReader;
use std::process::{Command, Output};

use nrsim_core::components::components;
use nrsim_core::graphgen::{generate, MultiGraph};
use nrsim_core::inference::{derive_seed, rng_for_seed};
use nrsim_core::statistics::{count_statistic, StatisticSpec};
use nrsim_core::weights::{WeightModel, WeightVector};

fn nrsim(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nrsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn xi_prints_twelve_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrsim(
        &["xi", "--beta", "3", "--t-min", "0.25", "--spec", "all"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("xi = 2.00000000000e0"), "{text}");
    assert!(text.contains("E[W] = 3.75000000000e-1"), "{text}");

    let out = nrsim(
        &["xi", "--beta", "3", "--t-min", "0.25", "--spec", "dist:1"],
        dir.path(),
    );
    assert!(stdout(&out).contains("xi = 1.00000000000e0"));
}

#[test]
fn xi_rejects_non_subcritical_with_the_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrsim(
        &["xi", "--beta", "3", "--t-min", "0.5", "--spec", "all"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("E[W^2]") && err.contains(">="), "{err}");
}

#[test]
fn tree_command_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrsim(&["tree", "0 1 1"], dir.path());
    assert!(stdout(&out).contains("c = 2"));
    let out = nrsim(&["tree", "0 1"], dir.path());
    assert!(stdout(&out).contains("c = 1"));
    let out = nrsim(&["tree", "0 1 1 1"], dir.path());
    assert!(stdout(&out).contains("c = 6"));
    let out = nrsim(&["tree", "1 0 1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_is_deterministic_and_simple_kinds_have_no_loops() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generate", "--beta", "3", "--t-min", "0.25", "--n", "10", "--seed", "1",
        "--kind", "cl",
    ];
    assert!(nrsim(&args, dir.path()).status.success());
    let edges_a = std::fs::read(dir.path().join("graph.edges")).unwrap();
    let weights_a = std::fs::read(dir.path().join("graph.weights")).unwrap();
    assert!(nrsim(&args, dir.path()).status.success());
    assert_eq!(edges_a, std::fs::read(dir.path().join("graph.edges")).unwrap());
    assert_eq!(weights_a, std::fs::read(dir.path().join("graph.weights")).unwrap());

    // No loop lines in a simple-graph kind.
    let text = String::from_utf8(edges_a).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let mut it = line.split_whitespace();
        let u = it.next().unwrap();
        let v = it.next().unwrap();
        assert_ne!(u, v, "loop line {line:?}");
    }
    assert!(text.contains("# n=10 model=cl"));
}

#[test]
fn generate_rejects_zero_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrsim(
        &["generate", "--beta", "3", "--t-min", "0.25", "--n", "0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n must be >= 1"));
}

#[test]
fn generated_files_reproduce_the_in_memory_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generate", "--beta", "3", "--t-min", "0.25", "--n", "600", "--seed", "77",
        "--kind", "enr",
    ];
    assert!(nrsim(&args, dir.path()).status.success());

    // The same pipeline in memory.
    let model = WeightModel::new(3.0, 0.25).unwrap();
    let cfg = crate_model_kind();
    let mut rng = rng_for_seed(derive_seed(77, 0));
    let weights = model.sample_weights(600, &mut rng);
    let graph = generate(&weights, cfg, &mut rng);

    // Re-ingest the files.
    let file = std::fs::File::open(dir.path().join("graph.edges")).unwrap();
    let (read_graph, label) = MultiGraph::read_edge_list(BufReader::new(file)).unwrap();
    assert_eq!(label, "enr");
    assert_eq!(read_graph, graph);

    let text = std::fs::read_to_string(dir.path().join("graph.weights")).unwrap();
    let read_weights: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.trim().parse().unwrap())
        .collect();
    let read_weights = WeightVector::new(read_weights).unwrap();
    assert_eq!(read_weights, weights);

    // Identical component views and statistics on both routes.
    let view_mem = components(&graph, &weights).unwrap();
    let view_file = components(&read_graph, &read_weights).unwrap();
    assert_eq!(view_mem, view_file);
    for v in [0usize, 17, 599] {
        for spec in [StatisticSpec::AllVertices, StatisticSpec::DistanceM(2)] {
            assert_eq!(
                count_statistic(&graph, &view_mem, v, &spec).unwrap(),
                count_statistic(&read_graph, &view_file, v, &spec).unwrap()
            );
        }
    }
}

fn crate_model_kind() -> nrsim_core::graphgen::ModelKind {
    nrsim_core::graphgen::ModelKind {
        kind: nrsim_core::graphgen::GraphKind::Enr,
        normalizer: nrsim_core::graphgen::Normalizer::WeightSum,
    }
}

#[test]
fn xi_with_a_tree_spec_prints_the_automorphism_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrsim(
        &["xi", "--beta", "3", "--t-min", "0.25", "--spec", "tree:0.1.1"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("c(T) = 2"), "{text}");
    assert!(text.contains("E[W^3 e^-W]"), "{text}");
    assert!(text.contains("E[W^1 e^-W]"), "{text}");

    // The single-vertex tree gives the same constant as degree one.
    let tree_out = nrsim(
        &["xi", "--beta", "3", "--t-min", "0.25", "--spec", "tree:0"],
        dir.path(),
    );
    let deg_out = nrsim(
        &["xi", "--beta", "3", "--t-min", "0.25", "--spec", "deg:1"],
        dir.path(),
    );
    let get_xi = |text: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix("xi = ").map(str::to_string))
            .unwrap()
    };
    assert_eq!(get_xi(&stdout(&tree_out)), get_xi(&stdout(&deg_out)));
}

#[test]
fn moments_reports_supercritical_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = nrsim(&["moments", "--beta", "3", "--t-min", "0.6"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("subcritical = false"), "{text}");
    let out = nrsim(
        &["moments", "--beta", "3", "--t-min", "0.25", "--max-k", "3"],
        dir.path(),
    );
    assert!(stdout(&out).contains("E[W^3] = infinite"));
}

#[test]
fn verify_summarizes_replication_errors_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    // A path cap of 1 makes the terminal-tree statistic fail on every
    // replication with a non-trivial component; verify must finish, report
    // the failures, and reject.
    let out = nrsim(
        &[
            "verify", "--beta", "3", "--t-min", "0.25", "--n", "500", "--reps", "25",
            "--seed", "8", "--specs", "tree:0", "--path-cap", "1", "--threads", "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("[errors spec=tree:0]"), "{report}");
    assert!(report.contains("failed_replications=25"), "{report}");
    assert!(report.contains("skipped="), "{report}");
    assert!(report.contains("verdict: REJECT"), "{report}");
    // The CSV still has one row per replication with empty value fields.
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",tree:0,")).count(), 25);
}

#[test]
fn config_file_is_used_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.conf");
    std::fs::write(
        &config,
        "# experiment\nbeta=3.0\nt_min=0.25\nn=12\nseed=5\nkind=grg\n",
    )
    .unwrap();
    let out = nrsim(
        &["generate", "--config", "exp.conf", "--n", "15"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("graph.edges")).unwrap();
    // Flag n=15 wins over the file's n=12; kind comes from the file.
    assert!(text.contains("# n=15 model=grg"), "{text}");
}

#[test]
fn config_rejections_name_the_violated_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 4] = [
        (&["verify", "--reps", "0"], "reps must be >= 1"),
        (&["verify", "--level", "1.5"], "level"),
        (&["generate", "--kind", "zzz"], "kind"),
        (&["verify", "--beta", "1.5"], "beta"),
    ];
    for (args, needle) in cases {
        let out = nrsim(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(
            stderr(&out).contains(needle),
            "{args:?} -> {}",
            stderr(&out)
        );
    }
    // Unknown config key.
    let config = dir.path().join("bad.conf");
    std::fs::write(&config, "bogus=1\n").unwrap();
    let out = nrsim(&["verify", "--config", "bad.conf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown key"));
}

#[test]
fn verify_writes_report_and_exits_by_decision() {
    let dir = tempfile::tempdir().unwrap();
    // At this size the point-process tests reject (the interval counts sit
    // far above their limiting intensity), so the exit code is 1 and the
    // report carries every block.
    let out = nrsim(
        &[
            "verify", "--beta", "3", "--t-min", "0.25", "--n", "2000", "--reps", "60",
            "--seed", "3", "--level", "0.01", "--threads", "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    for block in [
        "[ks_max spec=all]",
        "[poisson spec=all interval=1:inf]",
        "[poisson spec=all interval=1:2]",
        "[a1 spec=all]",
        "[control_ks_top_weight]",
    ] {
        assert!(report.contains(block), "missing {block} in\n{report}");
    }
    assert!(report.contains("verdict: REJECT"));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv
        .lines()
        .any(|l| l.starts_with("rep,seed,n,spec,point_max,count_1_inf,count_1_2,s_top,w_top")));
    // The control check on the rescaled top weight accepts: the rejection
    // comes from the cluster statistics, not the harness.
    let control = report.split("[control_ks_top_weight]").nth(1).unwrap();
    assert!(control.contains("reject=false"), "{control}");
}
