//! A small temperature by gamma grid run through the library, reduced to
//! mean test accuracy per cell. `arl sweep` does the same from a config
//! file and also writes per-cell logs.

use arl::arl::ArlConfig;
use arl::data::{generate_synthetic, SynthSpec};
use arl::model::{FusionKind, ModelConfig};
use arl::train::{train, OptimizerConfig, StrategyKind};
use rayon::prelude::*;

fn main() {
    let model = ModelConfig {
        input_dims: vec![16, 16],
        hidden: vec![32],
        rep_dims: vec![16, 16],
        fusion: FusionKind::Concat,
        num_classes: 4,
    };
    let seeds = [0u64, 1, 2];
    let cells: Vec<(f64, f64)> = [1.0, 4.0, 8.0].iter().flat_map(|&t| [0.0, 4.0].map(|g| (t, g))).collect();
    let results: Vec<Result<f64, String>> = cells
        .par_iter()
        .map(|&(temperature, gamma)| {
            let mut acc = 0.0;
            for &seed in &seeds {
                let (tr, te) = generate_synthetic(&SynthSpec {
                    num_classes: 4,
                    samples_per_class: 200,
                    feature_dims: vec![16, 16],
                    noise: vec![0.3, 2.0],
                    separation: 1.0,
                    seed,
                })
                .map_err(|e| e.to_string())?;
                let strategy = StrategyKind::Arl(ArlConfig {
                    temperature,
                    gamma,
                    ..ArlConfig::default()
                });
                let opt = OptimizerConfig {
                    epochs: 15,
                    seed,
                    ..OptimizerConfig::default()
                };
                let out = train(&model, &tr, &te, &strategy, &opt).map_err(|e| e.to_string())?;
                acc += out.report.final_test.accuracy;
            }
            Ok(acc / seeds.len() as f64)
        })
        .collect();

    println!("{:>4} {:>6} {:>9}", "T", "gamma", "mean acc");
    for ((t, g), r) in cells.iter().zip(results) {
        match r {
            Ok(acc) => println!("{t:>4} {g:>6} {acc:>9.4}"),
            Err(e) => println!("{t:>4} {g:>6} failed: {e}"),
        }
    }
}
