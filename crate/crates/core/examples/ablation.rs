//! Ablation over the three ARL components on the imbalanced synthetic
//! regime: vanilla, UR only, UR+AL, UR+AL+GR, and the balanced reference.
//!
//! `cargo run --release --example ablation [seeds]`

use arl::arl::ArlConfig;
use arl::data::{generate_synthetic, SynthSpec};
use arl::model::{FusionKind, ModelConfig};
use arl::train::{train, OptimizerConfig, StrategyKind};

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let model = ModelConfig {
        input_dims: vec![16, 16],
        hidden: vec![32],
        rep_dims: vec![16, 16],
        fusion: FusionKind::Concat,
        num_classes: 4,
    };
    let full = ArlConfig::default();
    let arms = [
        ("vanilla", StrategyKind::Vanilla),
        ("UR", StrategyKind::Arl(ArlConfig { use_al: false, use_gr: false, ..full.clone() })),
        ("UR+AL", StrategyKind::Arl(ArlConfig { use_gr: false, ..full.clone() })),
        ("UR+AL+GR", StrategyKind::Arl(full.clone())),
        ("balanced", StrategyKind::Balanced(full.clone())),
    ];
    println!("{:<10} {:>9} {:>9} {:>9} {:>9}", "arm", "test acc", "macro-F1", "d-ratio", "q-ratio");
    for (name, strategy) in &arms {
        let (mut acc, mut f1, mut d, mut q) = (0.0, 0.0, 0.0, 0.0);
        for seed in 0..seeds {
            let spec = SynthSpec {
                num_classes: 4,
                samples_per_class: 200,
                feature_dims: vec![16, 16],
                noise: vec![0.3, 2.0],
                separation: 1.0,
                seed,
            };
            let (train_set, test_set) = generate_synthetic(&spec).expect("valid spec");
            let opt = OptimizerConfig { seed, ..OptimizerConfig::default() };
            let out = train(&model, &train_set, &test_set, strategy, &opt).expect("training succeeds");
            let last = out.report.epochs.last().expect("at least one epoch");
            acc += out.report.final_test.accuracy;
            f1 += out.report.final_test.macro_f1;
            d += last.d_ratio;
            q += last.q_ratio;
        }
        let n = seeds as f64;
        println!("{name:<10} {:>9.4} {:>9.4} {:>9.3} {:>9.3}", acc / n, f1 / n, d / n, q / n);
    }
}
