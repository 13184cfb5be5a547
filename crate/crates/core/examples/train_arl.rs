//! Trains one seed with full ARL on the imbalanced regime and prints the
//! per-epoch trajectory of accuracy, ratios and applied gradient scales.
//!
//! `cargo run --release --example train_arl [epochs]`

use arl::arl::ArlConfig;
use arl::data::{generate_synthetic, SynthSpec};
use arl::model::{FusionKind, ModelConfig};
use arl::train::{train, OptimizerConfig, StrategyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let (train_set, test_set) = generate_synthetic(&SynthSpec {
        num_classes: 4,
        samples_per_class: 200,
        feature_dims: vec![16, 16],
        noise: vec![0.3, 2.0],
        separation: 1.0,
        seed: 0,
    })?;
    let model = ModelConfig {
        input_dims: vec![16, 16],
        hidden: vec![32],
        rep_dims: vec![16, 16],
        fusion: FusionKind::Concat,
        num_classes: 4,
    };
    let opt = OptimizerConfig {
        epochs,
        ..OptimizerConfig::default()
    };
    let out = train(&model, &train_set, &test_set, &StrategyKind::Arl(ArlConfig::default()), &opt)?;

    println!("{:>5} {:>8} {:>8} {:>8} {:>8}  scale range", "epoch", "test acc", "loss", "d ratio", "q ratio");
    for e in &out.report.epochs {
        let lo = e.grad_ratio_min.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = e.grad_ratio_max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{:>5} {:>8.4} {:>8.4} {:>8.3} {:>8.3}  [{lo:.3}, {hi:.3}]",
            e.epoch, e.test_accuracy, e.loss_total, e.d_ratio, e.q_ratio
        );
    }
    println!(
        "final test accuracy {:.4}, macro-F1 {:.4}",
        out.report.final_test.accuracy, out.report.final_test.macro_f1
    );
    Ok(())
}
