//! End-to-end runs of the `bowtie` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use bowtie_core::canonical::fig1;
use bowtie_core::pagerank::{pagerank, PageRankConfig};
use tempfile::TempDir;

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bowtie"))
        .args(args)
        .env_remove("BOWTIE_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV: everything after the `#` line and the column line.
fn rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# bowtie "));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn report(text: &str) -> Vec<(String, String)> {
    rows(text).into_iter().map(|r| (r[0].clone(), r[1].clone())).collect()
}

fn value(rep: &[(String, String)], key: &str) -> f64 {
    rep.iter().find(|(k, _)| k == key).unwrap().1.parse().unwrap()
}

#[test]
fn sweep_has_one_row_per_grid_point() {
    let o = run(&["sweep", "--graph", &data("fig1.edges"), "--grid", "0:0.95:0.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "c,mass_IN,mass_SCC,mass_INSCC,mass_ESCC,mass_PUREOUT,mass_DN,mass_OTHER"
    );
    let r = rows(&text);
    assert_eq!(r.len(), 20);
    for row in &r {
        let m: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        // on fig1 the extended SCC and Pure OUT partition the nodes
        assert!((m[3] - m[1] - m[2]).abs() < 1e-15);
        assert!((m[4] + m[5] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn uniform_cstar_on_threeblock_lies_in_interval() {
    let o = run(&["cstar", "--mode", "uniform", "--graph", &data("threeblock.edges")]);
    assert!(o.status.success());
    let rep = report(&stdout(&o));
    let (c1, c, c2) = (value(&rep, "c1"), value(&rep, "c_star"), value(&rep, "c2"));
    assert!(c1 < c && c < c2, "{c1} {c} {c2}");
}

#[test]
fn full_damping_is_rejected() {
    let o = run(&["pagerank", "--graph", &data("fig1.edges"), "--damping", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("analytically"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        run(&["sweep", "--graph", &data("fig1.edges"), "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["sweep", "--graph", &data("fig1.edges"), "--grid", "0.5:0.2:0.1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["cstar", "--graph", &data("fig1.edges"), "--mode", "median"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["pagerank", "--graph", "/nonexistent/graph.edges"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn non_convergence_exits_two() {
    let o = run(&[
        "pagerank",
        "--graph",
        &data("fig1.edges"),
        "--damping",
        "0.85",
        "--max-iter",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_bowtie"))
        .args(["sweep", "--graph", &data("fig1.edges")])
        .env("BOWTIE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_bowtie"))
        .args(["sweep", "--graph", &data("fig1.edges")])
        .env("BOWTIE_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(o.stdout, run(&["sweep", "--graph", &data("fig1.edges")]).stdout);
}

#[test]
fn output_is_reproducible_apart_from_the_header() {
    let dir = TempDir::new().unwrap();
    let copy = dir.path().join("copy.edges");
    let original = fs::read_to_string(data("fig1.edges")).unwrap();
    fs::write(&copy, format!("# a different comment\n{original}")).unwrap();

    let a = stdout(&run(&["sweep", "--graph", &data("fig1.edges")]));
    let b = stdout(&run(&["sweep", "--graph", &data("fig1.edges")]));
    assert_eq!(a, b);
    let c = stdout(&run(&["sweep", "--graph", copy.to_str().unwrap()]));
    assert_ne!(a.lines().next(), c.lines().next());
    assert_eq!(
        a.lines().skip(1).collect::<Vec<_>>(),
        c.lines().skip(1).collect::<Vec<_>>()
    );
}

#[test]
fn scores_round_trip_exactly() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pr.csv");
    let o = run(&[
        "pagerank",
        "--graph",
        &data("fig1.edges"),
        "--damping",
        "0.85",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let expected = pagerank(&fig1(), &PageRankConfig::new(0.85)).unwrap().values;
    let got: Vec<f64> = rows(&fs::read_to_string(&out).unwrap())
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn data_files_hold_the_canonical_graphs() {
    let g = bowtie_core::load_edge_list(fs::read(data("fig1.edges")).unwrap().as_slice()).unwrap();
    assert_eq!(g, fig1());
    let g = bowtie_core::load_edge_list(fs::read(data("threeblock.edges")).unwrap().as_slice()).unwrap();
    assert_eq!(g, bowtie_core::canonical::threeblock());
}

#[test]
fn decompose_writes_nodes_and_summary() {
    let dir = TempDir::new().unwrap();
    let summary: PathBuf = dir.path().join("summary.csv");
    let o = run(&[
        "decompose",
        "--graph",
        &data("fig1.edges"),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let nodes = rows(&stdout(&o));
    assert_eq!(nodes.len(), 12);
    assert_eq!(nodes[0], ["0", "IN", "true", "false", "-1", "false"]);
    assert_eq!(nodes[8][4], "0");
    assert_eq!(nodes[11][4], "1");
    let rep = report(&fs::read_to_string(&summary).unwrap());
    assert_eq!(value(&rep, "total_nodes"), 12.0);
    assert_eq!(value(&rep, "escc"), 6.0);
    assert_eq!(value(&rep, "pure_out"), 6.0);
}

#[test]
fn limit_writes_block_table_and_vector() {
    let dir = TempDir::new().unwrap();
    let vector = dir.path().join("limit.csv");
    let o = run(&[
        "limit",
        "--graph",
        &data("fig1.edges"),
        "--vector-out",
        vector.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let blocks = rows(&stdout(&o));
    assert_eq!(blocks.len(), 2);
    let v: Vec<f64> = rows(&fs::read_to_string(&vector).unwrap())
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();
    assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn three_block_assumption_is_enforced() {
    let args = ["inscc-curve", "--graph", &data("fig1.edges"), "--grid", "0.5:0.6:0.1"];
    assert_eq!(run(&args).status.code(), Some(1));
    let mut forced = args.to_vec();
    forced.push("--force-dn-merge");
    let o = run(&forced);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(rows(&stdout(&o)).len(), 2);
}

#[test]
fn inscc_reports() {
    let o = run(&["inscc-curve", "--graph", &data("threeblock.edges")]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 100);
    for row in &r {
        let m: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        assert!((m[1] - m[2] - m[3]).abs() < 1e-10);
    }
    let o = run(&["inscc-derivatives", "--graph", &data("threeblock.edges")]);
    assert!(o.status.success());
    let rep = report(&stdout(&o));
    assert!((value(&rep, "p1") - 17.0 / 24.0).abs() < 1e-15);
    assert!(value(&rep, "slope_at_0") < 0.0);
    assert_eq!(value(&rep, "shape_violations"), 0.0);
}

#[test]
fn escc_bounds_columns() {
    let o = run(&["escc-bounds", "--graph", &data("threeblock.edges")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "c,mass,lower_bound,upper_bound,cond_i,cond_ii"
    );
    assert_eq!(rows(&text).len(), 19);
    let o = run(&[
        "escc-bounds",
        "--graph",
        &data("fig1.edges"),
        "--exclude-pureout-transients",
    ]);
    assert!(o.status.success());
}

#[test]
fn link_experiment_table() {
    let dir = TempDir::new().unwrap();
    let clicks = dir.path().join("clicks.csv");
    fs::write(&clicks, "node_id,clicks\n8,3\n1,10\n").unwrap();
    let base = [
        "link-experiment",
        "--graph",
        &data("fig1.edges"),
        "--source",
        "8",
        "--target",
        "1",
    ];
    let o = run(&base);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    let gaps: Vec<f64> = r
        .iter()
        .map(|row| row[5].parse::<f64>().unwrap() - row[6].parse::<f64>().unwrap())
        .collect();
    assert!(gaps[0] > 0.0 && gaps[0] < gaps[1] && gaps[1] < gaps[2]);

    let mut with = base.to_vec();
    with.extend(["--clicks", clicks.to_str().unwrap()]);
    let text = stdout(&run(&with));
    assert!(text.lines().nth(1).unwrap().ends_with(",source_click_rank"));
    assert!(rows(&text).iter().all(|row| row[7] == "2"));

    let mut bad = base.to_vec();
    bad[4] = "0";
    assert_eq!(run(&bad).status.code(), Some(1));
}
