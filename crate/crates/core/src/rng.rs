//! Counter-based sampling streams and deterministic reductions.
//!
//! Samples are grouped into fixed-size chunks; chunk `c` of a run seeded
//! with `seed` always draws from ChaCha stream `c`, so the sample sequence
//! does not depend on how chunks are scheduled across threads. Partial sums
//! are combined in chunk order by pairwise summation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// Generator for chunk `chunk` of the run keyed by `seed`.
pub fn stream(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Mixes a sub-key into a seed so unrelated draws do not share streams.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    rng.random::<f64>()
}

/// Uniform direction on the unit sphere in `R^N`.
pub fn unit_vector<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    loop {
        let mut v = [0.0; N];
        for x in v.iter_mut() {
            *x = normal(rng);
        }
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-300 {
            for x in v.iter_mut() {
                *x /= r;
            }
            return v;
        }
    }
}

/// Uniform point in the open unit ball of `R^N`.
pub fn in_unit_ball<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    let mut v = unit_vector::<N>(rng);
    let r = uniform(rng).powf(1.0 / N as f64);
    for x in v.iter_mut() {
        *x *= r;
    }
    v
}

/// Pairwise (cascade) summation; the grouping depends only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Accumulated first and second moments of a batch of weighted samples.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    /// Combines chunk moments in slice order with pairwise sums.
    pub fn combine(parts: &[Moments]) -> Moments {
        let sums: Vec<f64> = parts.iter().map(|m| m.sum).collect();
        let sqs: Vec<f64> = parts.iter().map(|m| m.sum_sq).collect();
        Moments {
            n: parts.iter().map(|m| m.n).sum(),
            sum: pairwise_sum(&sums),
            sum_sq: pairwise_sum(&sqs),
        }
    }
}

/// Runs `body` over `n` samples split into chunks, each with its own stream,
/// and returns the per-chunk results in chunk order.
pub fn par_chunks<T, F>(seed: u64, n: usize, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            body(&mut rng, len)
        })
        .collect()
}
