//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero if any fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use arl::arl::{modulation_coefficients, ArlConfig};
use arl::model::{init_model, FusionKind, ModelConfig};
use arl::tensor::Matrix;
use arl::theory::{
    bias_variance_decompose, bias_weight_solution, grid_search_weight_oracle, optimal_variance_weights,
    optimal_weight_standard_error, simulate_regression_ensemble, simulate_unbiased_ensemble,
};
use arl::train::{train, StrategyKind, TrainOutcome};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gradient_correctness() -> Outcome {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_case = None;
    let mut checked = 0;
    let mut skipped = 0;
    for case in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + case);
        let fusion = if case % 2 == 0 { FusionKind::Concat } else { FusionKind::Gated };
        let k = if (case / 2) % 2 == 0 { 2 } else { 3 };
        let layers = rng.random_range(0..=2);
        let rep = rng.random_range(2..=5);
        let cfg = ModelConfig {
            input_dims: (0..k).map(|_| rng.random_range(2..=5)).collect(),
            hidden: (0..layers).map(|_| rng.random_range(3..=6)).collect(),
            rep_dims: (0..k)
                .map(|_| if fusion == FusionKind::Gated { rep } else { rng.random_range(2..=5) })
                .collect(),
            fusion,
            num_classes: rng.random_range(2..=4),
        };
        let params = init_model(&cfg, case).unwrap();
        let batch = rng.random_range(3..=6);
        let features: Vec<Matrix> = cfg
            .input_dims
            .iter()
            .map(|&d| Matrix::from_vec(batch, d, (0..batch * d).map(|_| rng.sample(StandardNormal)).collect()))
            .collect();
        let labels: Vec<usize> = (0..batch).map(|_| rng.random_range(0..cfg.num_classes)).collect();
        let report = check_arl_gradient(&params, &features, &labels, &ArlConfig::default());
        if report.max_rel_error > worst {
            worst = report.max_rel_error;
            worst_case = Some((case, params, features, labels, report.worst.unwrap()));
        }
        checked += report.checked;
        skipped += report.skipped;
    }
    let secs = started.elapsed().as_secs_f64();
    let mut detail = format!("max rel error {worst:.2e} over {checked} entries ({skipped} skipped at relu kinks), {secs:.1}s");
    if worst >= 1e-4 {
        if let Some((case, params, features, labels, entry)) = worst_case {
            let steps = [1e-3, 1e-4, 1e-5, 1e-6];
            let (a, numeric) = probe_entry(&params, &features, &labels, &ArlConfig::default(), entry, &steps);
            let errs: Vec<String> = steps
                .iter()
                .zip(&numeric)
                .map(|(h, n)| format!("eps {h:.0e}: {:.1e}", (a - n).abs() / a.abs().max(n.abs()).max(1e-8)))
                .collect();
            detail.push_str(&format!(
                "; worst: case {case} {}, analytic {a:.3e}, rel error by step [{}]",
                params.names()[entry.0],
                errs.join(", ")
            ));
        }
    }
    outcome(worst < 1e-4 && secs < 30.0, detail)
}

fn theory_oracle_agreement() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_margin = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for case in 0..20 {
        let v = [rng.random_range(0.25..=9.0), rng.random_range(0.25..=9.0)];
        let sample = simulate_unbiased_ensemble(&v, 100_000, &mut rng);
        let closed = optimal_variance_weights(&v).unwrap().weights[0];
        let oracle = grid_search_weight_oracle(&sample, 0.01).unwrap().weights[0];
        let se = optimal_weight_standard_error(&sample, 20).unwrap();
        let delta = (closed - oracle).abs();
        let tol = 0.01 + 3.0 * se;
        worst_margin = worst_margin.max(delta - tol);
        if delta > tol {
            failures.push(format!("case {case} {v:?}: |Δ|={delta:.4} > {tol:.4}"));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 60.0,
        format!(
            "20 ensembles, worst |Δw0| − tolerance = {worst_margin:.4}, {secs:.1}s{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn bias_feasibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mismatches = 0;
    let mut worst_bias: f64 = 0.0;
    let mut feasible = 0;
    for _ in 0..1000 {
        let b0: f64 = rng.random_range(-5.0..5.0);
        let b1: f64 = rng.random_range(-5.0..5.0);
        let sol = bias_weight_solution(b0, b1).unwrap();
        if sol.feasible != (b0 * b1 < 0.0) {
            mismatches += 1;
        }
        if sol.feasible {
            feasible += 1;
            worst_bias = worst_bias.max((sol.weights[0] * b0 + sol.weights[1] * b1).abs());
        }
    }
    outcome(
        mismatches == 0 && worst_bias < 1e-12,
        format!("{mismatches} flag mismatches, {feasible} feasible, max |combined bias| {worst_bias:.1e}"),
    )
}

fn decomposition_identity() -> Outcome {
    let mut within = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + trial);
        let biases = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let vars = [rng.random_range(0.25..4.0), rng.random_range(0.25..4.0)];
        let noise = rng.random_range(0.1..2.0);
        let w0: f64 = rng.random_range(0.0..1.0);
        let sample = simulate_regression_ensemble(0.7, &biases, &vars, noise, 20_000, &mut rng);
        let r = bias_variance_decompose(&sample, &[w0, 1.0 - w0]).unwrap();
        if (r.mse - r.decomposition().unwrap()).abs() < 3.0 * r.mse_standard_error {
            within += 1;
        }
    }
    outcome(within >= 95, format!("{within}/100 trials within 3·SE"))
}

fn modulation_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst_sum: f64 = 0.0;
    let mut out_of_range = 0;
    for i in 0..10_000 {
        let t = [1.0, 4.0, 8.0][i % 3];
        let k = if i % 5 == 4 { 3 } else { 2 };
        let mut q: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-3.0..3.0))).collect();
        let d: Vec<f64> = (0..k).map(|_| rng.random_range(1e-6..1.0)).collect();
        match i % 10 {
            0 => q = [vec![1e6, 1.0], vec![1.0; k - 2]].concat(),
            1 => q = [vec![1.0, 1e6], vec![1.0; k - 2]].concat(),
            _ => {}
        }
        let a = modulation_coefficients(&q, &d, t).unwrap();
        worst_sum = worst_sum.max((a.iter().sum::<f64>() - 1.0).abs());
        out_of_range += a.iter().filter(|&&x| !(x > 0.0 && x < 1.0)).count();
    }

    let (tr, te) = imbalanced_data(0);
    let run = train(
        &imbalanced_model(),
        &tr,
        &te,
        &StrategyKind::Arl(ArlConfig::default()),
        &optimizer(0, 30),
    )
    .unwrap();
    let lo = run
        .report
        .epochs
        .iter()
        .flat_map(|e| e.grad_ratio_min.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let hi = run
        .report
        .epochs
        .iter()
        .flat_map(|e| e.grad_ratio_max.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        worst_sum <= 1e-12 && out_of_range == 0 && lo > 1.0 && hi < 2.0,
        format!(
            "max |Σa − 1| {worst_sum:.1e}, {out_of_range} coefficients outside (0,1); \
             gradient-norm ratio range over training [{lo:.4}, {hi:.4}]"
        ),
    )
}

fn degenerate_equivalence() -> Outcome {
    let (tr, te) = imbalanced_data(3);
    let opt = optimizer(3, 3);
    let off = ArlConfig::disabled();
    let vanilla = train(&imbalanced_model(), &tr, &te, &StrategyKind::Vanilla, &opt).unwrap();
    let arl_off = train(&imbalanced_model(), &tr, &te, &StrategyKind::Arl(off), &opt).unwrap();
    let same_params = vanilla
        .params
        .tensors()
        .iter()
        .zip(arl_off.params.tensors())
        .all(|(a, b)| a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
    let same_reports = vanilla.report.epochs == arl_off.report.epochs && vanilla.report.steps == arl_off.report.steps;
    outcome(
        same_params && same_reports,
        format!("parameters bitwise equal: {same_params}; epoch and step records equal: {same_reports}"),
    )
}

struct RegimeRuns {
    vanilla: Vec<TrainOutcome>,
    balanced: Vec<TrainOutcome>,
    arl: Vec<TrainOutcome>,
    longest: Duration,
    arl_total: Duration,
}

fn regime_runs() -> RegimeRuns {
    let mut runs = RegimeRuns {
        vanilla: Vec::new(),
        balanced: Vec::new(),
        arl: Vec::new(),
        longest: Duration::ZERO,
        arl_total: Duration::ZERO,
    };
    let cfg = ArlConfig::default();
    for seed in 0..5 {
        let (tr, te) = imbalanced_data(seed);
        let opt = optimizer(seed, 30);
        for (strategy, slot) in [
            (StrategyKind::Vanilla, 0),
            (StrategyKind::Balanced(cfg.clone()), 1),
            (StrategyKind::Arl(cfg.clone()), 2),
        ] {
            let started = Instant::now();
            let out = train(&imbalanced_model(), &tr, &te, &strategy, &opt).unwrap();
            let took = started.elapsed();
            runs.longest = runs.longest.max(took);
            match slot {
                0 => runs.vanilla.push(out),
                1 => runs.balanced.push(out),
                _ => {
                    runs.arl_total += took;
                    runs.arl.push(out)
                }
            }
        }
    }
    runs
}

fn d_to_q_convergence(runs: &RegimeRuns) -> Outcome {
    let first: Vec<f64> = runs.arl.iter().map(|r| r.report.epochs[0].log_gap()).collect();
    let last: Vec<f64> = runs.arl.iter().map(|r| r.report.epochs.last().unwrap().log_gap()).collect();
    let (f, l) = (mean(&first), mean(&last));
    let secs = runs.arl_total.as_secs_f64();
    outcome(
        l < 0.5 * f && secs < 120.0,
        format!(
            "mean |ln(d/q)| epoch 1 = {f:.4}, epoch 30 = {l:.4} (ratio {:.3}, need < 0.5), {secs:.1}s",
            l / f
        ),
    )
}

fn strategy_ordering(runs: &RegimeRuns) -> Outcome {
    let acc = |rs: &[TrainOutcome]| 100.0 * mean(&rs.iter().map(|r| r.report.final_test.accuracy).collect::<Vec<_>>());
    let (v, b, a) = (acc(&runs.vanilla), acc(&runs.balanced), acc(&runs.arl));
    let secs = runs.longest.as_secs_f64();
    outcome(
        a >= v + 1.0 && a >= b - 0.5 && secs < 30.0,
        format!("test accuracy: ARL {a:.2}%, vanilla {v:.2}%, balanced {b:.2}%; longest run {secs:.1}s"),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "synth.feature_dims = 8, 8\nsynth.samples_per_class = 50\noptim.epochs = 4\nrun.seeds = 0, 1\nrun.output_dir = det\n",
    )
    .unwrap();
    let invoke = |root: &Path| {
        Command::new(env!("CARGO_BIN_EXE_arl"))
            .arg("train")
            .arg(&cfg)
            .env("ARL_OUTPUT_ROOT", root)
            .output()
            .unwrap()
            .status
            .code()
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let codes = (invoke(&a), invoke(&b));
    let mut compared = 0;
    let mut differing = Vec::new();
    for seed in ["seed-0", "seed-1"] {
        for file in ["epochs.jsonl", "steps.jsonl"] {
            let rel = Path::new("det").join(seed).join(file);
            let x = std::fs::read(a.join(&rel)).unwrap_or_default();
            let y = std::fs::read(b.join(&rel)).unwrap_or_default();
            compared += 1;
            if x.is_empty() || x != y {
                differing.push(rel.display().to_string());
            }
        }
    }
    outcome(
        codes == (Some(0), Some(0)) && differing.is_empty(),
        format!("exit codes {codes:?}; {compared} JSONL files compared, differing: {differing:?}"),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |n, name, o: Outcome| {
        println!("criterion {n} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    record(1, "gradient correctness", gradient_correctness());
    record(2, "theory oracle agreement", theory_oracle_agreement());
    record(3, "bias feasibility", bias_feasibility());
    record(4, "decomposition identity", decomposition_identity());
    record(5, "modulation contracts", modulation_contracts());
    record(6, "degenerate equivalence", degenerate_equivalence());
    let runs = regime_runs();
    record(7, "d-to-q convergence", d_to_q_convergence(&runs));
    record(8, "strategy ordering", strategy_ordering(&runs));
    record(9, "CLI determinism", cli_determinism());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" (criteria {failed:?})") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
