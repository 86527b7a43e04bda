//! Monte Carlo plumbing with per-path random streams.
//!
//! Path `i` of a run with seed `s` always draws from ChaCha8 seeded with `s`
//! on stream `i`, and per-path results are reduced sequentially in path
//! order. Estimates are therefore identical for any worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;

pub type PathRng = ChaCha8Rng;

/// Fewest paths any Monte Carlo entry point accepts.
pub const MIN_PATHS: usize = 100;

pub fn path_rng(seed: u64, path: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Independent seed for the `index`-th sub-experiment of a run.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1) << 32);
    rng.next_u64()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(paths)`.
    pub std_error: f64,
    pub paths: usize,
    pub seed: u64,
}

impl MCEstimate {
    pub fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        MCEstimate {
            mean,
            std_error: (var / n as f64).sqrt(),
            paths: n,
            seed,
        }
    }

    /// `|mean - target| <= k * std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

pub fn check_paths(paths: usize) -> Result<()> {
    if paths < MIN_PATHS {
        return Err(Error::InvalidOption(format!(
            "paths must be at least {MIN_PATHS}, got {paths}"
        )));
    }
    Ok(())
}

/// Runs `f` once per path and estimates the mean of each of the `width`
/// statistics it writes. `init` builds per-worker scratch space.
pub fn estimate_many<S, I, F>(
    paths: usize,
    seed: u64,
    width: usize,
    init: I,
    f: F,
) -> Vec<MCEstimate>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut PathRng, &mut [f64]) + Sync + Send,
{
    let per_path = par::map_indexed_with(paths, init, |state, i| {
        let mut rng = path_rng(seed, i as u64);
        let mut stats = vec![0.0; width];
        f(state, &mut rng, &mut stats);
        stats
    });
    let mut column = vec![0.0; paths];
    (0..width)
        .map(|j| {
            for (c, row) in column.iter_mut().zip(&per_path) {
                *c = row[j];
            }
            MCEstimate::from_samples(&column, seed)
        })
        .collect()
}

/// Single-statistic form of [`estimate_many`].
pub fn estimate<S, I, F>(paths: usize, seed: u64, init: I, f: F) -> MCEstimate
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut PathRng) -> f64 + Sync + Send,
{
    let samples = par::map_indexed_with(paths, init, |state, i| {
        let mut rng = path_rng(seed, i as u64);
        f(state, &mut rng)
    });
    MCEstimate::from_samples(&samples, seed)
}
