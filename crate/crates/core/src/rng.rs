//! Counter-based random streams.
//!
//! Each Monte-Carlo sample owns an independent ChaCha8 stream selected by
//! its index, so sample `i` sees the same numbers no matter which worker
//! draws it or in which order the samples are evaluated.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc_inv;

/// Keyed family of per-sample streams.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: [u8; 32],
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: ChaCha8Rng::seed_from_u64(seed).get_seed() }
    }

    /// The stream reserved for sample `index`.
    pub fn stream(&self, index: u64) -> SampleStream {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        SampleStream { rng }
    }
}

pub struct SampleStream {
    rng: ChaCha8Rng,
}

impl SampleStream {
    /// Uniform variate in the open interval (0, 1).
    pub fn next_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    /// Standard normal variate by inversion of the uniform stream.
    pub fn next_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.next_uniform())
    }

    pub fn fill_normals(&mut self, out: &mut [f64]) {
        for o in out {
            *o = self.next_normal();
        }
    }

    pub fn gaussian_vector(&mut self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        self.fill_normals(&mut v);
        v
    }
}

/// Standard normal quantile function.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Evaluates `f(i)` for `i in 0..n`, in parallel, preserving index order.
/// `threads` pins the worker count; the output never depends on it.
pub fn map_indexed<T, F>(n: usize, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let run = || (0..n as u64).into_par_iter().map(&f).collect::<Vec<T>>();
    match threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

/// Pairwise summation with a fixed split pattern.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
