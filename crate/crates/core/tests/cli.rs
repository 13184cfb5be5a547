use std::path::Path;
use std::process::{Command, Output};

use arl::cli::RunConfig;
use serde_json::Value;

const SMALL: &str = "\
synth.samples_per_class = 20
synth.feature_dims = 4, 4
synth.noise = 0.3, 2.0
model.hidden = 8
model.rep_dims = 6, 6
optim.epochs = 2
optim.batch_size = 16
run.output_dir = out
";

fn arl(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arl"))
        .args(args)
        .env("ARL_OUTPUT_ROOT", root)
        .output()
        .expect("spawn arl")
}

fn config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn train_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let o = arl(dir.path(), &["train", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    for f in ["config.effective", "summary.json", "seed-0/epochs.jsonl", "seed-0/steps.jsonl", "seed-0/model.ckpt", "seed-0/summary.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let epochs = std::fs::read_to_string(out.join("seed-0/epochs.jsonl")).unwrap();
    assert_eq!(epochs.lines().count(), 2);

    let text = std::fs::read_to_string(out.join("config.effective")).unwrap();
    assert_eq!(RunConfig::parse(&text, &[]).unwrap(), RunConfig::parse(SMALL, &[]).unwrap());
}

#[test]
fn overrides_reach_the_effective_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let o = arl(dir.path(), &["train", &cfg, "strategy.gamma=0", "run.seeds=3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = json(dir.path().join("out/summary.json"));
    assert_eq!(summary["strategy"]["gamma"], 0.0);
    assert_eq!(summary["seeds"], serde_json::json!([3]));
}

#[test]
fn train_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let read = |f: &str| std::fs::read(dir.path().join("out").join(f)).unwrap();
    assert_eq!(arl(dir.path(), &["train", &cfg]).status.code(), Some(0));
    let first = (read("seed-0/epochs.jsonl"), read("seed-0/model.ckpt"));
    assert_eq!(arl(dir.path(), &["train", &cfg]).status.code(), Some(0));
    assert_eq!(first, (read("seed-0/epochs.jsonl"), read("seed-0/model.ckpt")));
}

#[test]
fn bad_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{SMALL}csv.path = x.csv\ncsv.modality_dims = 4, 4\ncsv.num_classes = 4\n"));
    let o = arl(dir.path(), &["train", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("conflicting data sources"), "{}", stderr(&o));

    let missing = dir.path().join("nope.cfg");
    assert_eq!(arl(dir.path(), &["train", missing.to_str().unwrap()]).status.code(), Some(2));

    let cfg = config(dir.path(), "strategy.temperature = -1\nwhat.ever = 3\n");
    let o = arl(dir.path(), &["train", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("temperature must be > 0") && stderr(&o).contains("line 2: what.ever"), "{}", stderr(&o));

    assert_eq!(arl(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn divergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let o = arl(dir.path(), &["train", &cfg, "optim.lr=1e12"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn csv_source_trains_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (tr, te) = arl::data::generate_synthetic(&arl::data::SynthSpec {
        num_classes: 3,
        samples_per_class: 20,
        feature_dims: vec![3, 2],
        noise: vec![0.5, 1.0],
        separation: 1.0,
        seed: 0,
    })
    .unwrap();
    arl::data::write_csv(dir.path().join("train.csv"), &tr).unwrap();
    arl::data::write_csv(dir.path().join("test.csv"), &te).unwrap();
    let cfg = config(
        dir.path(),
        "csv.path = train.csv\ncsv.test_path = test.csv\ncsv.modality_dims = 3, 2\ncsv.num_classes = 3\n\
         model.hidden = 8\nmodel.rep_dims = 4, 4\noptim.epochs = 2\nrun.output_dir = csvrun\n",
    );
    let o = arl(dir.path(), &["train", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = json(dir.path().join("csvrun/seed-0/summary.json"));
    assert!(s["final_test"]["accuracy"].as_f64().unwrap() >= 0.0);
}

#[test]
fn theory_reports_closed_form_and_skips_degenerate_bias() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "theory.num_cases = 3\ntheory.cases = 1:4\ntheory.bias_cases = 0.5:-0.25, 0.3:0.3\n\
         theory.samples = 50000\nrun.output_dir = th\n",
    );
    let o = arl(dir.path(), &["theory", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(dir.path().join("th/theory.json"));
    let cases = r["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 4);
    let explicit = cases.iter().find(|c| c["variances"] == serde_json::json!([1.0, 4.0])).unwrap();
    assert!((explicit["closed_form"][0].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert!((explicit["closed_form"][1].as_f64().unwrap() - 0.2).abs() < 1e-12);
    let bias = r["bias_cases"].as_array().unwrap();
    assert_eq!(bias[0]["status"], "solved");
    assert_eq!(bias[0]["feasible"], true);
    assert_eq!(bias[1]["status"], "skipped");
}

#[test]
fn starved_theory_run_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    // 40 draws per case with a two-block error estimate: some case lands
    // outside its tolerance.
    let cfg = config(
        dir.path(),
        "theory.num_cases = 20\ntheory.samples = 40\ntheory.se_batches = 2\ntheory.seed = 0\nrun.output_dir = th\n",
    );
    let o = arl(dir.path(), &["theory", &cfg]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert_eq!(json(dir.path().join("th/theory.json"))["all_agree"], false);
}

const SWEEP: &str = "\
synth.samples_per_class = 15
synth.feature_dims = 3, 3
model.hidden = 6
model.rep_dims = 4, 4
optim.epochs = 2
run.seeds = 0, 1, 2
run.output_dir = sw
sweep.T = 1, 2, 4, 8
sweep.gamma = 0, 4
";

#[test]
fn sweep_writes_full_factorial_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SWEEP);
    let o = arl(dir.path(), &["sweep", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let results = std::fs::read_to_string(dir.path().join("sw/results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(
        lines.next().unwrap(),
        "T,gamma,seed,acc,macro_f1,final_d_ratio,final_q_ratio,status"
    );
    assert_eq!(lines.count(), 24);
    let summary = std::fs::read_to_string(dir.path().join("sw/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 9);

    assert_eq!(arl(dir.path(), &["sweep", &cfg]).status.code(), Some(0));
    assert_eq!(results, std::fs::read_to_string(dir.path().join("sw/results.csv")).unwrap());
}

#[test]
fn sweep_records_failed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("{SWEEP}sweep.optim.lr = 0.001, 1e300\n"));
    let o = arl(dir.path(), &["sweep", &cfg]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let results = std::fs::read_to_string(dir.path().join("sw/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 49);
    let failed = results.lines().filter(|l| !l.ends_with(",ok")).count() - 1;
    assert_eq!(failed, 24, "{results}");
}
