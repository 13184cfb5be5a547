use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{DataSource, RunConfig};
use super::{CliError, OutputRoot};
use crate::data::{generate_synthetic, load_csv, CsvSchema, Dataset, Split};
use crate::model::save_checkpoint;
use crate::theory::{
    bias_weight_solution, grid_search_weight_oracle, optimal_variance_weights, optimal_weight_standard_error,
    simulate_unbiased_ensemble, TheoryError,
};
use crate::train::{train, StrategyKind, TrainError, TrainOutcome};

fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::parse(&text, overrides).map_err(|error| CliError::Config {
        path: path.to_path_buf(),
        error,
    })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Loads `(train, test)` for a config. CSV paths are relative to the
/// config file's directory.
fn load_data(cfg: &RunConfig, base: &Path) -> Result<(Dataset, Dataset), CliError> {
    match &cfg.data {
        DataSource::Synth(spec) => Ok(generate_synthetic(spec)?),
        DataSource::Csv(c) => {
            let schema = CsvSchema {
                modality_dims: c.modality_dims.clone(),
                num_classes: c.num_classes,
            };
            let full = load_csv(base.join(&c.path), &schema)?;
            match &c.test_path {
                Some(t) => Ok((full, load_csv(base.join(t), &schema)?.with_split(Split::Test))),
                None => Ok(full.stratified_split()?),
            }
        }
    }
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub values: Vec<f64>,
}

impl MeanStd {
    fn of(values: Vec<f64>) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std, values }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub strategy: StrategyKind,
    pub epochs: usize,
    pub final_train: crate::train::Metrics,
    pub final_test: crate::train::Metrics,
    pub final_d_ratio: Option<f64>,
    pub final_q_ratio: Option<f64>,
    pub wall_clock_secs: f64,
    /// Relative to the output directory.
    pub checkpoint: PathBuf,
}

/// Cross-seed summary written to `summary.json`.
#[derive(Clone, Debug, Serialize)]
pub struct TrainSummary {
    pub strategy: StrategyKind,
    pub seeds: Vec<u64>,
    pub test_accuracy: MeanStd,
    pub test_macro_f1: MeanStd,
    pub train_accuracy: MeanStd,
    pub per_seed: Vec<SeedSummary>,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

fn seed_dir(seed: u64) -> String {
    format!("seed-{seed}")
}

/// Writes one run's JSONL reports, per-seed summary and checkpoint under
/// `dir`, returning the summary.
fn persist_run(dir: &Path, seed: u64, outcome: &TrainOutcome) -> Result<SeedSummary, CliError> {
    let report = &outcome.report;
    let mut epochs = Vec::new();
    report.write_epochs_jsonl(&mut epochs).expect("in-memory write");
    write(&dir.join("epochs.jsonl"), epochs)?;
    let mut steps = Vec::new();
    report.write_steps_jsonl(&mut steps).expect("in-memory write");
    write(&dir.join("steps.jsonl"), steps)?;
    let ckpt = dir.join("model.ckpt");
    save_checkpoint(&outcome.params, &ckpt)?;
    let last = report.epochs.last();
    let summary = SeedSummary {
        seed,
        strategy: report.strategy.clone(),
        epochs: report.epochs.len(),
        final_train: report.final_train.clone(),
        final_test: report.final_test.clone(),
        final_d_ratio: last.map(|e| e.d_ratio),
        final_q_ratio: last.map(|e| e.q_ratio),
        wall_clock_secs: report.wall_clock_secs,
        checkpoint: PathBuf::from(seed_dir(seed)).join("model.ckpt"),
    };
    write(&dir.join("summary.json"), to_json(&summary))?;
    Ok(summary)
}

/// `arl train`: one run per seed, per-seed reports and checkpoints, and a
/// cross-seed summary.
pub fn cmd_train(config_path: &Path, overrides: &[String], root: &OutputRoot) -> Result<TrainSummary, CliError> {
    let cfg = load_config(config_path, overrides)?;
    let out = root.resolve(&cfg.output_dir);
    write(&out.join("config.effective"), cfg.to_text())?;
    let (train_set, test_set) = load_data(&cfg, &config_dir(config_path))?;
    let model_cfg = cfg.model_config();
    let strategy = cfg.strategy_kind();

    let outcomes: Vec<(u64, Result<TrainOutcome, TrainError>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| (seed, train(&model_cfg, &train_set, &test_set, &strategy, &cfg.optimizer(seed))))
        .collect();
    let mut per_seed = Vec::with_capacity(outcomes.len());
    for (seed, outcome) in outcomes {
        let outcome = outcome.map_err(|source| CliError::Train { seed, source })?;
        per_seed.push(persist_run(&out.join(seed_dir(seed)), seed, &outcome)?);
    }

    let collect = |f: fn(&SeedSummary) -> f64| MeanStd::of(per_seed.iter().map(f).collect());
    let summary = TrainSummary {
        strategy,
        seeds: cfg.seeds.clone(),
        test_accuracy: collect(|s| s.final_test.accuracy),
        test_macro_f1: collect(|s| s.final_test.macro_f1),
        train_accuracy: collect(|s| s.final_train.accuracy),
        per_seed: per_seed.clone(),
        output_dir: out.clone(),
    };
    write(&out.join("summary.json"), to_json(&summary))?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryCaseReport {
    pub variances: [f64; 2],
    pub closed_form: Vec<f64>,
    pub oracle: Vec<f64>,
    pub oracle_mse: f64,
    pub delta_w0: f64,
    pub standard_error: f64,
    pub tolerance: f64,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum BiasCaseReport {
    Solved {
        biases: [f64; 2],
        weights: Vec<f64>,
        feasible: bool,
        combined_bias: f64,
    },
    Skipped {
        biases: [f64; 2],
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryReport {
    pub samples: usize,
    pub grid_step: f64,
    pub cases: Vec<TheoryCaseReport>,
    pub bias_cases: Vec<BiasCaseReport>,
    pub all_agree: bool,
    #[serde(skip)]
    pub report_path: PathBuf,
}

fn case_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn theory_case(v: (f64, f64), samples: usize, step: f64, batches: usize, seed: u64) -> Result<TheoryCaseReport, TheoryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = simulate_unbiased_ensemble(&[v.0, v.1], samples, &mut rng);
    let closed = optimal_variance_weights(&[v.0, v.1])?;
    let oracle = grid_search_weight_oracle(&sample, step)?;
    let se = optimal_weight_standard_error(&sample, batches)?;
    let delta = (closed.weights[0] - oracle.weights[0]).abs();
    let tolerance = step + 3.0 * se;
    Ok(TheoryCaseReport {
        variances: [v.0, v.1],
        closed_form: closed.weights,
        oracle: oracle.weights,
        oracle_mse: oracle.mse,
        delta_w0: delta,
        standard_error: se,
        tolerance,
        agree: delta <= tolerance,
    })
}

/// `arl theory`: closed-form inverse-variance weights against the
/// grid-search oracle, plus bias-cancelling solutions. Writes
/// `theory.json`; disagreement beyond tolerance is an error.
pub fn cmd_theory(config_path: &Path, overrides: &[String], root: &OutputRoot) -> Result<TheoryReport, CliError> {
    let cfg = load_config(config_path, overrides)?;
    let t = &cfg.theory;
    let out = root.resolve(&cfg.output_dir);
    write(&out.join("config.effective"), cfg.to_text())?;

    let mut rng = ChaCha8Rng::seed_from_u64(t.seed);
    let mut pairs: Vec<(f64, f64)> = (0..t.num_cases)
        .map(|_| {
            (
                rng.random_range(t.variance_min..=t.variance_max),
                rng.random_range(t.variance_min..=t.variance_max),
            )
        })
        .collect();
    pairs.extend(t.cases.iter().copied());
    let cases = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &v)| theory_case(v, t.samples, t.grid_step, t.se_batches, case_seed(t.seed, i)))
        .collect::<Result<Vec<_>, _>>()?;

    let bias_cases = t
        .bias_cases
        .iter()
        .map(|&(b0, b1)| match bias_weight_solution(b0, b1) {
            Ok(sol) => BiasCaseReport::Solved {
                biases: [b0, b1],
                combined_bias: sol.weights[0] * b0 + sol.weights[1] * b1,
                feasible: sol.feasible,
                weights: sol.weights,
            },
            Err(e) => BiasCaseReport::Skipped {
                biases: [b0, b1],
                reason: e.to_string(),
            },
        })
        .collect();

    let failing: Vec<String> = cases
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.agree)
        .map(|(i, c)| {
            format!(
                "case {i}: variances {:?}, |Δw0| = {:.5} > tolerance {:.5}",
                c.variances, c.delta_w0, c.tolerance
            )
        })
        .collect();
    let report = TheoryReport {
        samples: t.samples,
        grid_step: t.grid_step,
        all_agree: failing.is_empty(),
        cases,
        bias_cases,
        report_path: out.join("theory.json"),
    };
    write(&report.report_path, to_json(&report))?;
    if failing.is_empty() {
        Ok(report)
    } else {
        Err(CliError::TheoryDisagreement(failing))
    }
}

/// One sweep cell's outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// Value of each swept key, in axis order.
    pub axes: Vec<(String, String)>,
    pub temperature: f64,
    pub gamma: f64,
    pub seed: u64,
    pub result: Result<SweepMetrics, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepMetrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub final_d_ratio: f64,
    pub final_q_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
}

fn short_key(key: &str) -> &str {
    match key {
        "strategy.temperature" => "T",
        "strategy.gamma" => "gamma",
        k => k,
    }
}

fn cell_name(axes: &[(String, String)], seed: u64) -> String {
    let mut parts: Vec<String> = axes.iter().map(|(k, v)| format!("{}={v}", short_key(k))).collect();
    parts.push(format!("seed={seed}"));
    parts.join("_").replace(['/', ' '], "-")
}

fn run_cell(cfg: &RunConfig, base: &Path, seed: u64, dir: &Path) -> Result<SweepMetrics, (bool, String)> {
    let (tr, te) = load_data(cfg, base).map_err(|e| (false, e.to_string()))?;
    let outcome = train(&cfg.model_config(), &tr, &te, &cfg.strategy_kind(), &cfg.optimizer(seed))
        .map_err(|e| (matches!(e, TrainError::NonFinite { .. }), e.to_string()))?;
    let mut buf = Vec::new();
    outcome.report.write_epochs_jsonl(&mut buf).expect("in-memory write");
    write(&dir.join("epochs.jsonl"), buf).map_err(|e| (false, e.to_string()))?;
    let last = outcome.report.epochs.last();
    Ok(SweepMetrics {
        accuracy: outcome.report.final_test.accuracy,
        macro_f1: outcome.report.final_test.macro_f1,
        final_d_ratio: last.map_or(f64::NAN, |e| e.d_ratio),
        final_q_ratio: last.map_or(f64::NAN, |e| e.q_ratio),
    })
}

fn fmt_opt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        String::new()
    }
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

/// `arl sweep`: the full factorial over every `sweep.*` axis and seed.
/// Writes `results.csv` (one row per cell) and `summary.csv` (means over
/// seeds). Failed cells are recorded and the sweep continues.
pub fn cmd_sweep(config_path: &Path, overrides: &[String], root: &OutputRoot) -> Result<SweepOutcome, CliError> {
    let cfg = load_config(config_path, overrides)?;
    let out = root.resolve(&cfg.output_dir);
    let base = config_dir(config_path);
    write(&out.join("config.effective"), cfg.to_text())?;

    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in &cfg.sweep {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                axis.values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((axis.key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    let base_text = cfg.to_text();
    let mut cells = Vec::new();
    for combo in &combos {
        let ovr: Vec<String> = combo.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let cell_cfg = RunConfig::parse(&base_text, &ovr).map_err(|error| CliError::Config {
            path: config_path.to_path_buf(),
            error,
        })?;
        for &seed in &cfg.seeds {
            cells.push((combo.clone(), cell_cfg.clone(), seed));
        }
    }

    let results: Vec<Result<SweepMetrics, (bool, String)>> = cells
        .par_iter()
        .map(|(combo, c, seed)| run_cell(c, &base, *seed, &out.join("cells").join(cell_name(combo, *seed))))
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    let mut failed = Vec::new();
    let mut non_finite = false;
    for ((combo, c, seed), r) in cells.into_iter().zip(results) {
        let result = r.map_err(|(nan, msg)| {
            non_finite |= nan;
            failed.push(format!("{}: {msg}", cell_name(&combo, seed)));
            msg
        });
        rows.push(SweepRow {
            axes: combo,
            temperature: c.arl.temperature,
            gamma: c.arl.gamma,
            seed,
            result,
        });
    }

    let extra: Vec<String> = cfg
        .sweep
        .iter()
        .map(|a| a.key.clone())
        .filter(|k| k != "strategy.temperature" && k != "strategy.gamma")
        .collect();
    let extra_values = |row: &SweepRow| -> Vec<String> {
        extra
            .iter()
            .map(|k| row.axes.iter().find(|(ak, _)| ak == k).map(|(_, v)| v.clone()).unwrap_or_default())
            .collect()
    };

    let mut header: Vec<String> = vec!["T".into(), "gamma".into()];
    header.extend(extra.iter().cloned());
    header.extend(["seed", "acc", "macro_f1", "final_d_ratio", "final_q_ratio", "status"].map(String::from));
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let mut rec = vec![format!("{:?}", row.temperature), format!("{:?}", row.gamma)];
            rec.extend(extra_values(row));
            rec.push(row.seed.to_string());
            match &row.result {
                Ok(m) => {
                    rec.extend([m.accuracy, m.macro_f1, m.final_d_ratio, m.final_q_ratio].map(fmt_opt));
                    rec.push("ok".into());
                }
                Err(msg) => {
                    rec.extend(std::iter::repeat_n(String::new(), 4));
                    rec.push(format!("failed: {msg}"));
                }
            }
            rec
        })
        .collect();
    let results_path = out.join("results.csv");
    write(&results_path, csv_bytes(&header, &records))?;

    // Means over seeds, grouped by the non-seed columns in first-seen order.
    let mut groups: BTreeMap<usize, (Vec<String>, Vec<&SweepMetrics>, usize)> = BTreeMap::new();
    let mut index: Vec<Vec<String>> = Vec::new();
    for (row, rec) in rows.iter().zip(&records) {
        let key: Vec<String> = rec[..2 + extra.len()].to_vec();
        let g = match index.iter().position(|k| *k == key) {
            Some(g) => g,
            None => {
                index.push(key.clone());
                index.len() - 1
            }
        };
        let entry = groups.entry(g).or_insert_with(|| (key, Vec::new(), 0));
        entry.2 += 1;
        if let Ok(m) = &row.result {
            entry.1.push(m);
        }
    }
    let mut sheader: Vec<String> = header[..2 + extra.len()].to_vec();
    sheader.extend(
        ["seeds", "ok", "acc_mean", "acc_std", "macro_f1_mean", "final_d_ratio_mean", "final_q_ratio_mean"]
            .map(String::from),
    );
    let srecords: Vec<Vec<String>> = groups
        .into_values()
        .map(|(key, ms, total)| {
            let mut rec = key;
            rec.push(total.to_string());
            rec.push(ms.len().to_string());
            let stat = |f: fn(&SweepMetrics) -> f64| MeanStd::of(ms.iter().map(|m| f(m)).collect());
            if ms.is_empty() {
                rec.extend(std::iter::repeat_n(String::new(), 5));
            } else {
                let acc = stat(|m| m.accuracy);
                rec.push(fmt_opt(acc.mean));
                rec.push(fmt_opt(acc.std));
                rec.push(fmt_opt(stat(|m| m.macro_f1).mean));
                rec.push(fmt_opt(stat(|m| m.final_d_ratio).mean));
                rec.push(fmt_opt(stat(|m| m.final_q_ratio).mean));
            }
            rec
        })
        .collect();
    let summary_path = out.join("summary.csv");
    write(&summary_path, csv_bytes(&sheader, &srecords))?;

    if failed.is_empty() {
        Ok(SweepOutcome {
            rows,
            results_path,
            summary_path,
        })
    } else {
        Err(CliError::SweepCells { failed, non_finite })
    }
}
