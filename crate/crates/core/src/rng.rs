//! Seeded coin flips for backward walks.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Recorded in reports so a walk can be regenerated bit for bit.
pub const COIN_ALGORITHM: &str =
    "ChaCha8Rng::seed_from_u64(seed); one bit per step, least significant first from next_u64()";

/// A stream of fair bits: each `next_u64` word is spent one bit at a time.
#[derive(Clone, Debug)]
pub struct CoinFlips {
    rng: ChaCha8Rng,
    word: u64,
    remaining: u32,
}

impl CoinFlips {
    pub fn new(seed: u64) -> Self {
        CoinFlips {
            rng: ChaCha8Rng::seed_from_u64(seed),
            word: 0,
            remaining: 0,
        }
    }

    pub fn next_bit(&mut self) -> bool {
        if self.remaining == 0 {
            self.word = self.rng.next_u64();
            self.remaining = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.remaining -= 1;
        bit
    }
}
