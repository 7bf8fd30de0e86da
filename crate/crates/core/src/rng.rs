//! Deterministic random streams.
//!
//! Every consumer of randomness (clause blocks, the feedback block, the
//! example shuffler, tuning) owns a private [`RngStream`] derived from the
//! master seed and a stream index. A stream is a SplitMix64 counter
//! generator, so draw `k` can be computed directly without producing the
//! draws before it.
//!
//! Literal-level draws are keyed: a feedback event takes one value from the
//! stream as a key, and the uniform for literal position `p` is
//! [`keyed_unit`]`(key, p)`. The sparse engine evaluates only the positions it
//! touches, and a draw never depends on the size of the literal universe.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream index of the per-epoch example shuffle.
pub const SHUFFLE_STREAM: u64 = 0xD157;
/// Stream index of the feedback block.
pub const FEEDBACK_STREAM: u64 = 0xFEED;
/// Stream index used by hyperparameter search to sample trial configs.
pub const SEARCH_STREAM: u64 = 0x5EA2C4;
/// Stream index used to draw the holdout split in search.
pub const HOLDOUT_STREAM: u64 = 0x401D;

/// SplitMix64 output finalizer.
#[inline]
pub fn splitmix64_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream-splitting hash: finalizer of `seed ^ rotl(index + 1, 32)`.
#[inline]
pub fn mix64(seed: u64, index: u64) -> u64 {
    splitmix64_finalize(seed ^ index.wrapping_add(1).rotate_left(32))
}

pub fn derive_stream(seed: u64, index: u64) -> RngStream {
    RngStream::new(mix64(seed, index))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    stream_seed: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(stream_seed: u64) -> Self {
        Self {
            stream_seed,
            counter: 0,
        }
    }

    pub fn stream_seed(&self) -> u64 {
        self.stream_seed
    }

    /// Number of draws consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// The draw at absolute position `pos`, without advancing.
    #[inline]
    pub fn peek_at(&self, pos: u64) -> u64 {
        splitmix64_finalize(
            self.stream_seed
                .wrapping_add(pos.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = self.peek_at(self.counter);
        self.counter = self.counter.wrapping_add(1);
        v
    }

    /// Advance past `n` draws without computing them.
    #[inline]
    pub fn skip(&mut self, n: u64) {
        self.counter = self.counter.wrapping_add(n);
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform integer in `[0, n)`. Lemire's multiply-shift with rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Fisher-Yates shuffle, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Uniform in `[0, 1)` for position `pos` under an event key.
#[inline]
pub fn keyed_unit(key: u64, pos: u64) -> f64 {
    to_unit(mix64(key, pos))
}

/// Map a raw draw onto `[0, 1)`.
#[inline]
pub fn to_unit(raw: u64) -> f64 {
    (raw >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
