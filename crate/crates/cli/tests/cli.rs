use std::path::{Path, PathBuf};
use std::process::Command;

use tvinesynth::cvine::CVineModel;
use tvinesynth::evaluation::SweepRecord;
use tvinesynth_cli::commands::{LevelAia, OrderFile, UtilityReport};
use tvinesynth_cli::io::{read_dataset, read_json, write_dataset};
use tvinesynth_cli::manifest::RunManifest;
use tvinesynth_cli::run_args;

const SMALL: &str = r#"
[aia]
n_iter = 2
size_raw_t = 150
size_syn_t = 150
n_synth = 2
bootstrap_size = 100

[mia]
n_iter = 2
size_raw_a = 80
n_shadows = 2
n_syn_a = 2
size_raw_t = 80
size_syn_t = 80
n_syn_t = 2

[forest]
n_trees = 10
"#;

fn run(args: &[&str]) {
    let mut argv = vec!["tvinesynth".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run_args(&argv).unwrap_or_else(|e| panic!("{args:?}: {e:#}"));
}

fn exit_status(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_tvinesynth"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Simulated data, an order for sensitive x6 and a small attack config.
fn workspace(n: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    run(&["simulate", "--n", n, "--seed", "3", "--out-dir", p(&root)]);
    run(&[
        "order",
        "--data",
        p(&root.join("train.csv")),
        "--sensitive",
        "x6",
        "--threshold",
        "0.15",
        "--out-dir",
        p(&root),
    ]);
    std::fs::write(root.join("small.toml"), SMALL).unwrap();
    (dir, root)
}

#[test]
fn simulate_writes_requested_rows_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&["simulate", "--n", "10", "--seed", "1", "--out-dir", p(&a)]);
    run(&["simulate", "--n", "10", "--seed", "1", "--out-dir", p(&b)]);
    let train = read_dataset(&a.join("train.csv"), "y").unwrap();
    assert_eq!(train.n_rows(), 10);
    assert_eq!(train.n_covariates(), 20);
    assert_eq!(read_dataset(&a.join("test.csv"), "y").unwrap().n_rows(), 3);
    for f in ["train.csv", "test.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let m: RunManifest = read_json(&a.join("manifest.json")).unwrap();
    assert_eq!(m.command, "simulate");
    assert_eq!(m.seed, 1);
    let n1000 = dir.path().join("c");
    run(&["simulate", "--out-dir", p(&n1000)]);
    assert_eq!(read_dataset(&n1000.join("train.csv"), "y").unwrap().n_rows(), 1000);
    assert_eq!(read_dataset(&n1000.join("test.csv"), "y").unwrap().n_rows(), 250);
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    run(&["simulate", "--n", "50", "--seed", "2", "--out-dir", p(dir.path())]);
    let a = read_dataset(&dir.path().join("train.csv"), "y").unwrap();
    let copy = dir.path().join("copy.csv");
    write_dataset(&copy, &a).unwrap();
    assert_eq!(read_dataset(&copy, "y").unwrap(), a);
}

#[test]
fn order_places_sensitive_first() {
    let (_d, root) = workspace("400");
    let order: OrderFile = read_json(&root.join("order.json")).unwrap();
    assert_eq!(order.order[0], "x6");
    assert_eq!(order.sensitive, vec!["x6"]);
    let k = order.associated.len();
    assert!(order.associated.iter().all(|n| ["x7", "x8", "x9", "x10"].contains(&n.as_str())));
    assert_eq!(order.order[1..=k], order.associated[..]);
    assert_eq!(order.safe_truncation_bound, 21 - 1 - k);
}

#[test]
fn fit_and_sample() {
    let (_d, root) = workspace("300");
    let (m1, m2) = (root.join("m1"), root.join("m2"));
    for dir in [&m1, &m2] {
        run(&[
            "fit",
            "--data",
            p(&root.join("train.csv")),
            "--order",
            p(&root.join("order.json")),
            "--t-max",
            "1",
            "--seed",
            "5",
            "--out-dir",
            p(dir),
        ]);
    }
    let text = std::fs::read_to_string(m1.join("model.json")).unwrap();
    assert_eq!(text, std::fs::read_to_string(m2.join("model.json")).unwrap());
    let model = CVineModel::from_json(&text).unwrap();
    assert_eq!(model.truncation_level(), 1);
    assert!(model.vine().trees()[1..].iter().flatten().all(|pc| pc.is_independence()));

    let s = root.join("s");
    run(&["sample", "--model", p(&m1.join("model.json")), "-n", "40", "--seed", "2", "--out-dir", p(&s)]);
    let syn = read_dataset(&s.join("synthetic.csv"), "y").unwrap();
    assert_eq!(syn.n_rows(), 40);
    assert_eq!(syn.names(), model.names().as_slice());
}

#[test]
fn attacks_write_reports() {
    let (_d, root) = workspace("300");
    let common = |out: &Path| -> Vec<String> {
        [
            "--data",
            p(&root.join("train.csv")),
            "--order",
            p(&root.join("order.json")),
            "--families",
            "gaussian",
            "--truncations",
            "1,20",
            "--sensitive",
            "x6",
            "--config",
            p(&root.join("small.toml")),
            "--outliers",
            "2",
            "--random",
            "1",
            "--out-dir",
            p(out),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    let aia_dir = root.join("aia");
    let mut args = vec!["attack".to_string(), "aia".to_string()];
    args.extend(common(&aia_dir));
    run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let levels: Vec<LevelAia> = read_json(&aia_dir.join("aia_report.json")).unwrap();
    assert_eq!(levels.iter().map(|l| l.truncation).collect::<Vec<_>>(), vec![1, 20]);
    assert_eq!(levels[0].report.mse.len(), 3);
    let csv = std::fs::read_to_string(aia_dir.join("aia.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);

    let mia_dir = root.join("mia");
    let mut args = vec!["attack".to_string(), "mia".to_string()];
    args.extend(common(&mia_dir));
    run(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let csv = std::fs::read_to_string(mia_dir.join("mia.csv")).unwrap();
    assert!(csv.starts_with("truncation,target,p_guess_in,p_guess_out,privacy_gain"));
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn single_level_sweep_matches_standalone_attack() {
    let (_d, root) = workspace("300");
    let sweep_dir = root.join("sweep");
    let (train, order, small, test) = (root.join("train.csv"), root.join("order.json"), root.join("small.toml"), root.join("test.csv"));
    let shared = [
        "--data",
        p(&train),
        "--order",
        p(&order),
        "--families",
        "gaussian",
        "--truncations",
        "12",
        "--sensitive",
        "x6",
        "--config",
        p(&small),
        "--seed",
        "9",
    ];
    let mut sweep_args = vec!["sweep", "--test", p(&test), "--n-rep", "2"];
    sweep_args.extend(shared);
    sweep_args.extend(["--out-dir", p(&sweep_dir)]);
    run(&sweep_args);
    let records: Vec<SweepRecord> = csv::Reader::from_path(sweep_dir.join("sweep.csv"))
        .unwrap()
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(records.len(), 1);
    let svg = std::fs::read_to_string(sweep_dir.join("sweep.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 1);
    assert!(svg.contains(">t=12<"));

    let aia_dir = root.join("aia");
    let mut attack_args = vec!["attack", "aia"];
    attack_args.extend(shared);
    attack_args.extend(["--out-dir", p(&aia_dir)]);
    run(&attack_args);
    let levels: Vec<LevelAia> = read_json(&aia_dir.join("aia_report.json")).unwrap();
    assert_eq!(levels[0].report.mab_median, records[0].privacy_median);
    assert_eq!(levels[0].report.mab_q25, records[0].privacy_q25);
}

#[test]
fn utility_and_fidelity_of_a_copy() {
    let (_d, root) = workspace("300");
    let train = root.join("train.csv");
    run(&[
        "utility",
        "--real",
        p(&train),
        "--test",
        p(&root.join("test.csv")),
        "--synthetic",
        p(&train),
        "--config",
        p(&root.join("small.toml")),
        "--out-dir",
        p(&root.join("u")),
    ]);
    let u: UtilityReport = read_json(&root.join("u/utility.json")).unwrap();
    assert_eq!(u.tstr, vec![u.trtr]);
    run(&["fidelity", "--real", p(&train), "--synthetic", p(&train), "--out-dir", p(&root.join("f"))]);
    let f: serde_json::Value = read_json(&root.join("f/fidelity.json")).unwrap();
    assert_eq!(f["authenticity"], 0.0);
}

#[test]
fn replay_reproduces_outputs() {
    let (_d, root) = workspace("200");
    let again = root.join("again");
    run(&["replay", "--manifest", p(&root.join("manifest.json")), "--out-dir", p(&again)]);
    assert_eq!(
        std::fs::read(root.join("order.json")).unwrap(),
        std::fs::read(again.join("order.json")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let (_d, root) = workspace("100");
    assert_eq!(exit_status(&["--help"]), 0);
    assert_eq!(exit_status(&["simulate", "--bogus"]), 2);
    assert_eq!(exit_status(&["simulate", "--test-fraction", "1.5", "--out-dir", p(&root)]), 2);
    let train = root.join("train.csv");
    assert_eq!(
        exit_status(&["order", "--data", p(&train), "--sensitive", "nope", "--out-dir", p(&root.join("o"))]),
        2
    );
    assert_eq!(
        exit_status(&["order", "--data", p(&root.join("missing.csv")), "--sensitive", "x1", "--out-dir", p(&root)]),
        3
    );
    std::fs::write(root.join("bad.csv"), "a,b,y\n1,2,0\n3,4,2\n").unwrap();
    assert_eq!(exit_status(&["order", "--data", p(&root.join("bad.csv")), "--sensitive", "a"]), 3);
    std::fs::write(root.join("bad_order.json"), r#"{"order":["x1"],"sensitive":[],"associated":[],"threshold":0.1,"association":"kendall","safe_truncation_bound":1}"#).unwrap();
    assert_eq!(
        exit_status(&["fit", "--data", p(&train), "--order", p(&root.join("bad_order.json")), "--out-dir", p(&root.join("m"))]),
        3
    );
    // a constant column breaks the fit's input contract
    let mut rows = String::from("a,b,y\n");
    for i in 0..40 {
        rows.push_str(&format!("1,{i},{}\n", i % 2));
    }
    std::fs::write(root.join("const.csv"), rows).unwrap();
    assert_eq!(exit_status(&["order", "--data", p(&root.join("const.csv")), "--sensitive", "b", "--out-dir", p(&root.join("c"))]), 3);
}
