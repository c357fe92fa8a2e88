//! Expectations over uniform multinomial counts `z ∼ Mult(n, d)`: exact
//! enumeration of compositions and seeded Monte Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GsbmError, Result};
use crate::numeric::{composition_count, for_each_composition, multinomial_log_weight, CompensatedSum, SignedLogSum};

/// Samples per Monte Carlo chunk; chunk `c` draws from stream `c` of the seed.
pub const MC_CHUNK: usize = 4096;
/// Default cap on the number of compositions enumerated.
pub const DEFAULT_ENUM_BUDGET: f64 = 1e7;

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Draws `z ∼ Mult(n, d)` with uniform bins into `out` by conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, out: &mut [u64]) {
    let d = out.len();
    let mut remaining = n;
    for (i, slot) in out.iter_mut().enumerate() {
        if i + 1 == d {
            *slot = remaining;
            break;
        }
        let x = if remaining == 0 {
            0
        } else {
            Binomial::new(remaining, 1.0 / (d - i) as f64)
                .expect("valid binomial")
                .sample(rng)
        };
        *slot = x;
        remaining -= x;
    }
}

/// Pearson statistic `(d/n) Σ (z_i − n/d)²`, computed as `(d Σ z_i² − n²)/n`.
pub fn pearson_statistic(z: &[u64]) -> f64 {
    let n: u64 = z.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let d = z.len() as u128;
    let sq: u128 = z.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let num = d * sq - (n as u128) * (n as u128);
    num as f64 / n as f64
}

/// Squared Euclidean norm of `z − (n/d)·1`.
pub fn centered_norm_sq(z: &[u64]) -> f64 {
    let n: u64 = z.iter().sum();
    let d = z.len() as f64;
    pearson_statistic(z) * n as f64 / d
}

/// Checks the composition count against the budget.
pub fn check_enum_budget(n: u64, d: usize, budget: f64) -> Result<f64> {
    let count = composition_count(n, d);
    if count > budget {
        return Err(GsbmError::BudgetExceeded {
            what: format!("compositions of {n} into {d} parts"),
            needed: count,
            budget,
        });
    }
    Ok(count)
}

/// Exact `E f(z)` by enumerating all compositions with multinomial log-weights.
/// The first coordinate is split across threads; partial sums are reduced in
/// a fixed order.
pub fn exact_expectation<F>(n: u64, d: usize, budget: f64, f: F) -> Result<f64>
where
    F: Fn(&[u64]) -> f64 + Sync,
{
    check_enum_budget(n, d, budget)?;
    if d == 1 {
        return Ok(f(&[n]));
    }
    let partials: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|first| {
            let mut acc = SignedLogSum::new();
            let mut z = vec![0u64; d];
            z[0] = first;
            for_each_composition(n - first, d - 1, |rest| {
                z[1..].copy_from_slice(rest);
                acc.add_weighted(multinomial_log_weight(&z), f(&z));
            });
            acc.value()
        })
        .collect();
    Ok(partials.into_iter().collect::<CompensatedSum>().value())
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Seeded Monte Carlo estimate of `E f(z)`. Chunk `c` of [`MC_CHUNK`] draws
/// uses `ChaCha8Rng` keyed by `seed` on stream `c`, so results do not depend
/// on the thread count.
pub fn mc_expectation<F>(n: u64, d: usize, samples: usize, seed: u64, f: F) -> McEstimate
where
    F: Fn(&[u64]) -> f64 + Sync,
{
    mc_chunked(samples, seed, |rng| {
        let mut z = vec![0u64; d];
        sample_multinomial(rng, n, &mut z);
        f(&z)
    })
}

/// Generic chunked Monte Carlo driver over a per-draw closure.
pub fn mc_chunked<F>(samples: usize, seed: u64, draw: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(draw(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.count > 1.0 {
        total.m2 / (total.count - 1.0)
    } else {
        0.0
    };
    McEstimate {
        mean: total.mean,
        stderr: (var / total.count.max(1.0)).sqrt(),
        samples,
    }
}
