use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Generator handed to the synthesizers.
pub type StreamRng = ChaCha12Rng;

/// Deterministic source of independent random substreams.
///
/// A substream is identified by `(frame id, stage label)`; the position
/// inside it is the draw index. The seed of each substream is a SHA-256 of
/// the master seed and both labels, so substreams never depend on the order
/// in which workers ask for them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    master_seed: u64,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        RngStream { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn substream(&self, frame_id: &str, stage: &str) -> StreamRng {
        let mut hasher = Sha256::new();
        hasher.update(b"noisesynth/v1");
        hasher.update(self.master_seed.to_le_bytes());
        hasher.update((frame_id.len() as u64).to_le_bytes());
        hasher.update(frame_id.as_bytes());
        hasher.update((stage.len() as u64).to_le_bytes());
        hasher.update(stage.as_bytes());
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&hasher.finalize());
        StreamRng::from_seed(seed)
    }

    /// The `index`-th 64-bit draw of a substream, without consuming the
    /// preceding ones.
    pub fn draw_u64(&self, frame_id: &str, stage: &str, index: u64) -> u64 {
        let mut rng = self.substream(frame_id, stage);
        rng.set_word_pos(u128::from(index) * 2);
        rng.next_u64()
    }
}
