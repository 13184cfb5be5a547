use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, Split};
use crate::tensor::Matrix;

/// Gaussian class-cluster generator settings.
///
/// Modality `k` of a class-`c` sample is `μ_{c,k} + σ_k · N(0, I)`, where
/// `μ_{c,k}` is a random unit vector scaled by `separation`. Dialing `σ_k`
/// controls how informative each modality is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub samples_per_class: usize,
    /// One entry per modality.
    pub feature_dims: Vec<usize>,
    /// Noise scale per modality, all `> 0`.
    pub noise: Vec<f64>,
    pub separation: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn num_modalities(&self) -> usize {
        self.feature_dims.len()
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let mut problems = Vec::new();
        if self.feature_dims.is_empty() {
            problems.push("at least one modality is required".to_string());
        }
        if self.noise.len() != self.feature_dims.len() {
            problems.push(format!(
                "{} noise scales for {} modalities",
                self.noise.len(),
                self.feature_dims.len()
            ));
        }
        if self.num_classes == 0 {
            problems.push("num_classes must be >= 1".into());
        }
        if self.samples_per_class == 0 {
            problems.push("samples_per_class must be >= 1".into());
        }
        if let Some(k) = self.feature_dims.iter().position(|&d| d == 0) {
            problems.push(format!("modality {k} has feature dim 0"));
        }
        if let Some(k) = self.noise.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            problems.push(format!("modality {k} noise must be > 0"));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            problems.push("separation must be finite and >= 0".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(DataError::InvalidSpec(problems.join("; ")))
        }
    }
}

/// Generates `(train, test)` with a stratified 80/20 split per class.
///
/// Each class contributes `n − ⌊n/5⌋` training rows and `⌊n/5⌋` test rows.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<(Dataset, Dataset), DataError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k_mod = spec.num_modalities();

    let mut centers: Vec<Vec<Vec<f64>>> = Vec::with_capacity(spec.num_classes);
    for _ in 0..spec.num_classes {
        let mut per_mod = Vec::with_capacity(k_mod);
        for &dim in &spec.feature_dims {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x *= spec.separation / norm);
            }
            per_mod.push(v);
        }
        centers.push(per_mod);
    }

    let n = spec.samples_per_class;
    let n_test = n / 5;
    let n_train = n - n_test;
    let mut train: Vec<Vec<f64>> = vec![Vec::new(); k_mod];
    let mut test: Vec<Vec<f64>> = vec![Vec::new(); k_mod];
    let mut train_labels = Vec::with_capacity(n_train * spec.num_classes);
    let mut test_labels = Vec::with_capacity(n_test * spec.num_classes);

    for (c, class_centers) in centers.iter().enumerate() {
        for i in 0..n {
            let to_train = i < n_train;
            for k in 0..k_mod {
                let sink = if to_train { &mut train[k] } else { &mut test[k] };
                for &mu in &class_centers[k] {
                    let z: f64 = rng.sample(StandardNormal);
                    sink.push(mu + spec.noise[k] * z);
                }
            }
            if to_train {
                train_labels.push(c);
            } else {
                test_labels.push(c);
            }
        }
    }

    let build = |cols: Vec<Vec<f64>>, labels: Vec<usize>, split| {
        let rows = labels.len();
        let features = cols
            .into_iter()
            .zip(&spec.feature_dims)
            .map(|(data, &d)| Matrix::from_vec(rows, d, data))
            .collect();
        Dataset::new(features, labels, spec.num_classes, split)
    };
    Ok((
        build(train, train_labels, Split::Train)?,
        build(test, test_labels, Split::Test)?,
    ))
}
