//! Seed derivation for reproducible, independent random streams.
//!
//! Every stream is keyed by `(root, label, index)` and seeded from the
//! SHA-256 digest of that key, so derivation is a pure function of the key
//! and never depends on the order in which streams are requested.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// A random stream. Owned by exactly one consumer at a time.
pub type Stream = ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree {
    root: u64,
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    fn digest(&self, tag: u8, label: &str, index: u64) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update([tag]);
        h.update(self.root.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        h.update(index.to_le_bytes());
        let out = h.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&out);
        seed
    }

    /// Stream for the key `(label, index)` under this root.
    pub fn stream(&self, label: &str, index: u64) -> Stream {
        Stream::from_seed(self.digest(0, label, index))
    }

    /// A child tree whose root is derived from `(label, index)`. Streams of a
    /// child never coincide with streams of its parent.
    pub fn subtree(&self, label: &str, index: u64) -> SeedTree {
        let d = self.digest(1, label, index);
        let mut b = [0u8; 8];
        b.copy_from_slice(&d[..8]);
        SeedTree::new(u64::from_le_bytes(b))
    }
}
