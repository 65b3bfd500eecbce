use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Fold index (0..k) for each label. Each class is shuffled and dealt
/// round-robin, continuing where the previous class stopped, so every fold
/// holds within one of its proportional share of each class.
pub fn stratified_folds(y: &[bool], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    let mut folds = vec![0usize; y.len()];
    let mut rng = stream_rng(seed, Stream::Folds, 0);
    let mut offset = 0usize;
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.len() < k {
            return Err(Error::ClassTooSmall {
                class: if class { "advanced" } else { "elementary" }.into(),
                count: idx.len(),
                k,
            });
        }
        idx.shuffle(&mut rng);
        for (j, i) in idx.into_iter().enumerate() {
            folds[i] = (offset + j) % k;
        }
        offset += y.iter().filter(|&&v| v == class).count();
    }
    Ok(folds)
}
