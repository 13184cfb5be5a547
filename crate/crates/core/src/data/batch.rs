use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;
use crate::tensor::Matrix;

/// A mini-batch: per-modality feature rows, labels, and the source row
/// indices in the parent dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub features: Vec<Matrix>,
    pub labels: Vec<usize>,
    pub indices: Vec<usize>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Seeded permutation of all rows cut into consecutive chunks of
/// `batch_size`; the last chunk may be short.
pub fn batches(dataset: &Dataset, batch_size: usize, epoch_seed: u64) -> Vec<Batch> {
    assert!(batch_size >= 1, "batch_size must be at least 1");
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(epoch_seed);
    order.shuffle(&mut rng);
    order.chunks(batch_size).map(|idx| dataset.batch(idx)).collect()
}
