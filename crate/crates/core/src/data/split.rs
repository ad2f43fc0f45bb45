//! Seed-deterministic train/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};

/// Shuffle-then-cut split. The first `floor(n * train_fraction)` shuffled
/// points form the training set; the rest the test set. Disjoint, exhaustive,
/// and bit-identical under the same seed.
pub fn split(
    ds: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::contract(format!(
            "train_fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    let n = ds.len();
    let train_n = (n as f64 * train_fraction).floor() as usize;
    if train_n == 0 || train_n == n {
        return Err(Error::contract(format!(
            "split of {n} points at fraction {train_fraction} leaves an empty side"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let gather = |idx: &[usize]| -> Result<LabeledDataset> {
        let mut inputs = Vec::with_capacity(idx.len() * ds.ambient_dim());
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            inputs.extend_from_slice(ds.input(i));
            labels.push(ds.label(i));
        }
        LabeledDataset::new(
            inputs,
            labels,
            ds.ambient_dim(),
            ds.class_count(),
            ds.manifold_tag(),
        )
    };

    Ok((gather(&order[..train_n])?, gather(&order[train_n..])?))
}
