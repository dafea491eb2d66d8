//! Seed derivation and random streams.
//!
//! Every replicate draws from its own ChaCha8 stream seeded by
//! [`split_seed`]`(master, ℓ, r)`, so adding degrees or replicates never
//! changes existing ones. Monte Carlo integrals are cut into fixed-size
//! chunks, each on its own ChaCha stream id, so any parallel schedule that
//! reduces chunks in index order gives the same bits.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use rand_chacha::ChaCha8Rng as Stream;

/// Samples per Monte Carlo chunk.
pub const CHUNK: u64 = 1 << 16;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r` at degree `ell` under `master`.
pub fn split_seed(master: u64, ell: u32, r: u64) -> u64 {
    let a = splitmix64(master ^ 0x6A09_E667_F3BC_C908);
    let b = splitmix64(a ^ u64::from(ell));
    splitmix64(b ^ r.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `chunk` under `seed`.
pub fn chunk_stream(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

#[inline]
pub fn normal<R: RngCore>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Number of chunks and the size of chunk `k` for `n` samples.
pub fn chunks(n: u64) -> u64 {
    n.div_ceil(CHUNK)
}

pub fn chunk_len(n: u64, k: u64) -> u64 {
    CHUNK.min(n - k * CHUNK)
}

/// Streaming mean and variance, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += d * nb / n as f64;
        self.m2 += other.m2 + d * d * na * nb / n as f64;
        self.n = n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}
