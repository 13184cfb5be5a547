mod common;

use arl::arl::ArlConfig;
use arl::data::Batch;
use arl::model::{forward_multimodal, init_model, FusionKind};
use arl::tensor::{finite_difference_check, Graph, Matrix, TensorError};
use proptest::prelude::*;

use common::*;

fn small_batch(k: usize, rows: usize, seed: u64) -> (Vec<Matrix>, Vec<usize>) {
    let (train, _) = tiny_data(seed, vec![0.5; k]);
    let idx: Vec<usize> = (0..rows).collect();
    let b = train.batch(&idx);
    (b.features, b.labels)
}

#[test]
fn full_objective_gradient_matches_differences_for_each_fusion_and_k() {
    for fusion in [FusionKind::Concat, FusionKind::Gated] {
        for k in [2, 3] {
            let params = init_model(&tiny_model(k, fusion), 7).unwrap();
            let (features, labels) = small_batch(k, 5, 1);
            // Unimodal terms off keeps the loss O(1) so every entry is
            // above the difference quotient's rounding floor.
            let cfg = ArlConfig {
                use_ur: false,
                ..ArlConfig::default()
            };
            let report = check_arl_gradient(&params, &features, &labels, &cfg);
            assert!(report.checked > 0);
            assert!(report.max_rel_error < 1e-4, "{fusion} K={k}: {report:?}");
        }
    }
}

#[test]
fn hook_scale_multiplies_only_the_fusion_path_gradient() {
    let params = init_model(&tiny_model(2, FusionKind::Concat), 3).unwrap();
    let (features, labels) = small_batch(2, 6, 2);
    let batch = Batch {
        features,
        labels: labels.clone(),
        indices: (0..6).collect(),
    };
    let grads_at = |scale: f64| {
        let mut g = Graph::new();
        let pass = forward_multimodal(&mut g, &params, &batch).unwrap();
        let loss = g.softmax_cross_entropy(pass.fused_logits, &labels).unwrap();
        g.set_grad_scale(pass.hooks[0], scale).unwrap();
        g.backward(loss).unwrap();
        let enc0 = g.grad(pass.params.encoders[0][0].0).clone();
        let enc1 = g.grad(pass.params.encoders[1][0].0).clone();
        let head = g.grad(pass.params.classifier.0).clone();
        (enc0, enc1, head)
    };
    let (e0, e1, h) = grads_at(1.0);
    let (s0, s1, sh) = grads_at(1.5);
    for (a, b) in e0.as_slice().iter().zip(s0.as_slice()) {
        assert!((b - 1.5 * a).abs() <= 1e-12 * a.abs().max(1.0));
    }
    assert_eq!(e1, s1);
    assert_eq!(h, sh);
}

#[test]
fn hook_flow_reports_applied_scale() {
    let mut g = Graph::new();
    let x = g.leaf(Matrix::from_rows(&[[1.0, -2.0], [0.5, 3.0]]));
    let h = g.grad_scale(x, 1.25).unwrap();
    let y = g.sum(h).unwrap();
    g.backward(y).unwrap();
    let (up, down) = g.hook_flow(h).unwrap();
    assert!((down / up - 1.25).abs() < 1e-15);
}

#[test]
fn negative_hook_scale_is_rejected() {
    let mut g = Graph::new();
    let x = g.leaf(Matrix::scalar(1.0));
    assert!(matches!(g.grad_scale(x, -0.1), Err(TensorError::InvalidScale(_))));
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.5f64..1.5, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A smooth composite of every differentiable primitive.
    #[test]
    fn smooth_composites_pass_gradient_check(
        x in matrix(3, 4),
        w in matrix(4, 3),
        b in matrix(1, 3),
        v in matrix(3, 2),
        labels in prop::collection::vec(0usize..5, 3),
    ) {
        let report = finite_difference_check::<_, TensorError>(
            |g, p| {
                let h = g.matmul(p[0], p[1])?;
                let h = g.add_bias(h, p[2])?;
                let s = g.sigmoid(h)?;
                let sm = g.row_softmax(h)?;
                let gated = g.hadamard(s, sm)?;
                let c = g.column(sm, 0)?;
                let mixed = g.hadamard(gated, c)?;
                let joined = g.concat(&[mixed, p[3]])?;
                let scaled = g.scale(joined, 0.7)?;
                g.softmax_cross_entropy(scaled, &labels)
            },
            &[x, w, b, v],
            1e-5,
        ).unwrap();
        prop_assert!(report.max_rel_error < 1e-4, "{:?}", report);
    }

    #[test]
    fn every_node_is_created_after_its_inputs(x in matrix(2, 3), w in matrix(3, 3)) {
        let mut g = Graph::new();
        let a = g.leaf(x);
        let b = g.leaf(w);
        let m = g.matmul(a, b).unwrap();
        let r = g.relu(m).unwrap();
        let z = g.zero_mask(r).unwrap();
        let s = g.add(r, z).unwrap();
        let loss = g.sum(s).unwrap();
        for t in [m, r, z, s, loss] {
            prop_assert!(g.inputs(t).iter().all(|i| i.index() < t.index()));
            prop_assert!(!g.is_leaf(t));
        }
        prop_assert!(g.is_leaf(a) && g.inputs(a).is_empty());
    }

    #[test]
    fn cross_entropy_is_shift_invariant_and_finite(
        logits in matrix(4, 3),
        shift in -1e6f64..1e6,
        labels in prop::collection::vec(0usize..3, 4),
    ) {
        let mut g = Graph::new();
        let a = g.leaf(logits.clone());
        let b = g.leaf(logits.map(|v| v + shift));
        let la = g.softmax_cross_entropy(a, &labels).unwrap();
        let lb = g.softmax_cross_entropy(b, &labels).unwrap();
        let (va, vb) = (g.value(la).get(0, 0), g.value(lb).get(0, 0));
        prop_assert!(vb.is_finite());
        // Shifting by s rounds each logit to the spacing of s.
        prop_assert!((va - vb).abs() <= 1e-14 * (1.0 + shift.abs()), "{} vs {}", va, vb);
    }
}
