//! Checks reverse-mode gradients of the full training objective against
//! central differences, for both fusion modes.
//!
//! `cargo run --release --example gradient_check`

use arl::arl::{ArlConfig, ArlObjective, Target};
use arl::data::{generate_synthetic, SynthSpec};
use arl::model::{forward_with_leaves, init_model, FusionKind, ModelConfig, ParamLeaves};
use arl::tensor::{finite_difference_check, Matrix};
use arl::train::TrainError;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (train, _) = generate_synthetic(&SynthSpec {
        num_classes: 3,
        samples_per_class: 10,
        feature_dims: vec![4, 3],
        noise: vec![0.5, 1.5],
        separation: 2.0,
        seed: 0,
    })?;
    let batch = train.batch(&[0, 5, 9, 13, 21]);

    for fusion in [FusionKind::Concat, FusionKind::Gated] {
        let mc = ModelConfig {
            input_dims: vec![4, 3],
            hidden: vec![8],
            rep_dims: vec![6, 6],
            fusion,
            num_classes: 3,
        };
        let params = init_model(&mc, 7)?;
        let flat: Vec<Matrix> = params.tensors().into_iter().cloned().collect();
        for use_ur in [false, true] {
            let cfg = ArlConfig { use_ur, ..ArlConfig::default() };
            let report = finite_difference_check::<_, TrainError>(
                |g, leaves| {
                    let pass = forward_with_leaves(g, &mc, ParamLeaves::from_flat(&mc, leaves), &batch.features)?;
                    let mut obj = ArlObjective::new(cfg.clone(), Target::Variance)?;
                    Ok(obj.loss(g, pass.fused_logits, &pass.unimodal_logits, &batch.labels)?.0)
                },
                &flat,
                1e-5,
            )?;
            println!(
                "{:<6} unimodal terms {:<3}  entries {:>4}  skipped {:>2}  max rel error {:.2e}",
                fusion.to_string(),
                if use_ur { "on" } else { "off" },
                report.checked,
                report.skipped,
                report.max_rel_error
            );
        }
    }
    Ok(())
}
