//! Reproducible random streams.
//!
//! Every random decision is drawn from a ChaCha20 stream whose 256-bit key is
//! built from `(master_seed, domain, repeat, fold)` and whose 64-bit stream id
//! is the learner index. Results therefore depend only on that key, never on
//! how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Name recorded in model files.
pub const RNG_ALGORITHM: &str = "chacha20";

const DOMAIN_LEARNERS: u64 = 0x6c65_6172_6e65_7273;
const DOMAIN_FOLDS: u64 = 0x666f_6c64_7300_0000;
const DOMAIN_DATA: u64 = 0x6461_7461_0000_0000;
const DOMAIN_PAIRS: u64 = 0x7061_6972_7300_0000;

/// Hierarchical position of a training job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedKey {
    pub master: u64,
    pub repeat: u64,
    pub fold: u64,
}

impl SeedKey {
    /// Key for a model trained outside cross-validation.
    pub fn root(master: u64) -> Self {
        Self {
            master,
            repeat: u64::MAX,
            fold: u64::MAX,
        }
    }

    pub fn fold(master: u64, repeat: usize, fold: usize) -> Self {
        Self {
            master,
            repeat: repeat as u64,
            fold: fold as u64,
        }
    }

    fn stream(&self, domain: u64, id: u64) -> ChaCha20Rng {
        let mut seed = [0u8; 32];
        seed[0..8].copy_from_slice(&self.master.to_le_bytes());
        seed[8..16].copy_from_slice(&domain.to_le_bytes());
        seed[16..24].copy_from_slice(&self.repeat.to_le_bytes());
        seed[24..32].copy_from_slice(&self.fold.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(seed);
        rng.set_stream(id);
        rng
    }

    /// Stream that drives learner `index`.
    pub fn learner(&self, index: usize) -> ChaCha20Rng {
        self.stream(DOMAIN_LEARNERS, index as u64)
    }

    pub(crate) fn pairs(&self) -> ChaCha20Rng {
        self.stream(DOMAIN_PAIRS, 0)
    }
}

/// Stream used to shuffle samples into folds for one repeat.
pub fn fold_stream(master: u64, repeat: usize) -> ChaCha20Rng {
    SeedKey {
        master,
        repeat: repeat as u64,
        fold: u64::MAX,
    }
    .stream(DOMAIN_FOLDS, 0)
}

/// Stream used by the synthetic data generators.
pub fn data_stream(seed: u64) -> ChaCha20Rng {
    SeedKey::root(seed).stream(DOMAIN_DATA, 0)
}

/// Uniform integer in `0..n`, drawn through `u64` so streams match across platforms.
pub fn below<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.random_range(0..n as u64) as usize
}

/// `k` distinct indices from `0..n` in draw order (partial Fisher-Yates).
pub fn sample_without_replacement<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot draw {k} of {n} without replacement");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(rng, n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

pub fn shuffle<R: Rng + ?Sized, X>(rng: &mut R, items: &mut [X]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i + 1);
        items.swap(i, j);
    }
}
