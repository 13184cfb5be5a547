//! Shows that a unimodal head sees only its own modality: the other
//! representation is zero-masked, so its encoder gets no gradient.

use arl::data::{generate_synthetic, SynthSpec};
use arl::model::{forward_multimodal, init_model, FusionKind, ModelConfig};
use arl::tensor::Graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (train, _) = generate_synthetic(&SynthSpec {
        num_classes: 3,
        samples_per_class: 10,
        feature_dims: vec![4, 4],
        noise: vec![0.5, 1.5],
        separation: 2.0,
        seed: 1,
    })?;
    let batch = train.batch(&[0, 1, 2, 3, 4, 5]);
    for fusion in [FusionKind::Concat, FusionKind::Gated] {
        let mc = ModelConfig {
            input_dims: vec![4, 4],
            hidden: vec![8],
            rep_dims: vec![5, 5],
            fusion,
            num_classes: 3,
        };
        let params = init_model(&mc, 3)?;
        for k in 0..2 {
            let mut g = Graph::new();
            let pass = forward_multimodal(&mut g, &params, &batch)?;
            let loss = g.softmax_cross_entropy(pass.unimodal_logits[k], &batch.labels)?;
            g.backward(loss)?;
            let norms: Vec<f64> = pass
                .params
                .encoders
                .iter()
                .map(|layers| layers.iter().map(|&(w, b)| g.grad(w).norm() + g.grad(b).norm()).sum())
                .collect();
            println!("{:<6} head {k}: encoder gradient norms {:.3e} {:.3e}", fusion.to_string(), norms[0], norms[1]);
        }
    }
    Ok(())
}
