use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::model::{predict_logits, ModelError, ModelParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: Vec<f64>,
}

fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > row[best] { i } else { best })
}

/// Accuracy and F1 from hard predictions. Classes that never occur in
/// either `predicted` or `labels` score F1 = 0 and still count toward the
/// macro average.
pub fn classification_metrics(predicted: &[usize], labels: &[usize], num_classes: usize) -> Metrics {
    assert_eq!(predicted.len(), labels.len());
    let mut tp = vec![0usize; num_classes];
    let mut fp = vec![0usize; num_classes];
    let mut fneg = vec![0usize; num_classes];
    let mut correct = 0;
    for (&p, &y) in predicted.iter().zip(labels) {
        if p == y {
            tp[p] += 1;
            correct += 1;
        } else {
            fp[p] += 1;
            fneg[y] += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let per_class_f1: Vec<f64> = (0..num_classes)
        .map(|c| {
            let precision = ratio(tp[c], tp[c] + fp[c]);
            let recall = ratio(tp[c], tp[c] + fneg[c]);
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .collect();
    Metrics {
        accuracy: ratio(correct, labels.len()),
        macro_f1: per_class_f1.iter().sum::<f64>() / num_classes as f64,
        per_class_f1,
    }
}

/// Scores the fused prediction (argmax of multimodal logits) on a dataset.
pub fn evaluate(params: &ModelParams, dataset: &Dataset) -> Result<Metrics, ModelError> {
    let (logits, _) = predict_logits(params, dataset.features())?;
    let predicted: Vec<usize> = (0..logits.rows()).map(|r| argmax(logits.row(r))).collect();
    Ok(classification_metrics(&predicted, dataset.labels(), params.config.num_classes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let m = classification_metrics(&[0, 1, 2, 1], &[0, 1, 2, 1], 3);
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn constant_prediction_on_balanced_binary() {
        let m = classification_metrics(&[0, 0, 0, 0], &[0, 1, 0, 1], 2);
        assert_eq!(m.accuracy, 0.5);
        assert!((m.per_class_f1[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.per_class_f1[1], 0.0);
        assert!((m.macro_f1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn absent_class_counts_as_zero() {
        let m = classification_metrics(&[0, 1], &[0, 1], 3);
        assert!((m.macro_f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_sample_accuracy_is_binary() {
        assert_eq!(classification_metrics(&[1], &[1], 2).accuracy, 1.0);
        assert_eq!(classification_metrics(&[0], &[1], 2).accuracy, 0.0);
    }

    #[test]
    fn argmax_prefers_first_maximum() {
        assert_eq!(argmax(&[0.1, 0.5, 0.5]), 1);
        assert_eq!(argmax(&[2.0, 2.0]), 0);
    }
}
