//! Inverse-CDF Monte Carlo sampling of event counts.
//!
//! Draws are sharded into fixed-size blocks; each block runs its own
//! ChaCha12 stream seeded by a splitmix64-derived sub-seed, so the merged
//! sample vector is byte-identical no matter how many workers take part
//! (and identical to the sequential fallback).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::poisson::{pmf_table, DistributionTable, PmfParams};
use crate::precision::PrecReal;

/// Identifier of the sampling algorithm, embedded in CLI metadata.
pub const RNG_ALGORITHM: &str = "chacha12+splitmix64-shards";
/// Draws per shard; fixed so the shard layout depends only on `count`.
pub const SHARD_SIZE: usize = 8192;
/// A table must certify at least this much mass before sampling from it.
pub const MAX_SAMPLING_TAIL: f64 = 1e-8;

/// One reproducible sampling run.
#[derive(Debug, Clone)]
pub struct SampleRun {
    pub params: PmfParams,
    pub count: usize,
    pub seed: u64,
    pub samples: Vec<u32>,
    pub table: DistributionTable,
}

fn splitmix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58476D1CE4E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn shard_seed(seed: u64, shard: usize) -> u64 {
    splitmix64(seed.wrapping_add((shard as u64 + 1).wrapping_mul(0x9E3779B97F4A7C15)))
}

fn draw_shard(cum: &[f64], n_max: u32, seed: u64, quota: usize) -> Vec<u32> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..quota)
        .map(|_| {
            let u: f64 = rng.gen();
            // first index whose cumulative mass exceeds u; residual tail
            // mass lands on n_max
            let idx = cum.partition_point(|&c| c <= u);
            (idx as u32).min(n_max)
        })
        .collect()
}

/// Draws `count` samples from P_μ(n,t) truncated at `n_max`.
pub fn sample_counts(
    params: &PmfParams,
    count: usize,
    seed: u64,
    n_max: u32,
    digits: u32,
) -> Result<SampleRun> {
    let table = pmf_table(params, n_max, digits)?;
    sample_from_table(table, count, seed, false)
}

pub fn sample_counts_seq(
    params: &PmfParams,
    count: usize,
    seed: u64,
    n_max: u32,
    digits: u32,
) -> Result<SampleRun> {
    let table = pmf_table(params, n_max, digits)?;
    sample_from_table(table, count, seed, true)
}

#[cfg(feature = "parallel")]
pub fn sample_counts_par(
    params: &PmfParams,
    count: usize,
    seed: u64,
    n_max: u32,
    digits: u32,
) -> Result<SampleRun> {
    let table = pmf_table(params, n_max, digits)?;
    sample_from_table(table, count, seed, false)
}

/// Sampling against an existing table (reused by the CLI to avoid a second
/// table build).
pub fn sample_from_table(
    table: DistributionTable,
    count: usize,
    seed: u64,
    force_sequential: bool,
) -> Result<SampleRun> {
    if count == 0 {
        return Err(Error::Domain("count must be at least 1".into()));
    }
    if table.tail_bound > MAX_SAMPLING_TAIL {
        return Err(Error::Capacity(format!(
            "table tail bound {:.3e} exceeds {MAX_SAMPLING_TAIL:.0e}; enlarge n_max",
            table.tail_bound
        )));
    }
    let cum = table.cumulative_f64();
    let n_max = table.n_max();
    let shards = count.div_ceil(SHARD_SIZE);
    let quota = |i: usize| (count - i * SHARD_SIZE).min(SHARD_SIZE);

    let blocks: Vec<Vec<u32>> = run_shards(shards, force_sequential, |i| {
        draw_shard(&cum, n_max, shard_seed(seed, i), quota(i))
    });
    let mut samples = Vec::with_capacity(count);
    for b in blocks {
        samples.extend_from_slice(&b);
    }
    Ok(SampleRun {
        params: table.params,
        count,
        seed,
        samples,
        table,
    })
}

#[cfg(feature = "parallel")]
fn run_shards<T: Send>(
    shards: usize,
    force_sequential: bool,
    f: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    use rayon::prelude::*;
    if force_sequential {
        (0..shards).map(f).collect()
    } else {
        (0..shards).into_par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_shards<T: Send>(
    shards: usize,
    _force_sequential: bool,
    f: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    (0..shards).map(f).collect()
}

/// Raw moments (1/count)·Σ samples^m for m = 0…m_max, exact integer
/// accumulation before the final division.
pub fn empirical_moments(run: &SampleRun, m_max: u32) -> Result<Vec<PrecReal>> {
    if m_max > 6 {
        return Err(Error::Domain(format!(
            "empirical moments are capped at m = 6, got {m_max}"
        )));
    }
    let digits = run.table.masses[0].precision();
    let count = PrecReal::from_f64_exact(run.count as f64, digits)?;
    let mut out = Vec::with_capacity(m_max as usize + 1);
    for m in 0..=m_max {
        if m == 0 {
            out.push(PrecReal::from_f64_exact(1.0, digits)?);
            continue;
        }
        let mut acc: u128 = 0;
        for &s in &run.samples {
            acc += (s as u128).pow(m);
        }
        let sum = PrecReal::from_bigint(&num_bigint::BigInt::from(acc), digits)?;
        out.push(sum.div(&count)?);
    }
    Ok(out)
}

/// Standard error of the m-th empirical raw moment, estimated from the
/// sample itself: sqrt((m̂_{2m} - m̂_m²)/count).
pub fn moment_standard_error(moments: &[PrecReal], m: u32, count: usize) -> f64 {
    let m1 = moments[m as usize].to_f64();
    let m2 = moments[2 * m as usize].to_f64();
    ((m2 - m1 * m1).max(0.0) / count as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::MuParam;

    fn params(mu: f64, nu: f64, t: f64) -> PmfParams {
        PmfParams::new(MuParam::new(mu).unwrap(), nu, t).unwrap()
    }

    #[test]
    fn degenerate_law_yields_all_zeros() {
        let run = sample_counts(&params(0.5, 1.0, 0.0), 10, 1, 3, 30).unwrap();
        assert!(run.samples.iter().all(|&s| s == 0));
        let moments = empirical_moments(&run, 3).unwrap();
        assert_eq!(moments[0].to_f64(), 1.0);
        for m in &moments[1..] {
            assert_eq!(m.to_f64(), 0.0);
        }
    }

    #[test]
    fn identical_inputs_reproduce_identical_samples() {
        let p = params(1.0, 1.0, 1.0);
        let a = sample_counts(&p, 20_000, 42, 30, 30).unwrap();
        let b = sample_counts(&p, 20_000, 42, 30, 30).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = sample_counts(&p, 20_000, 43, 30, 30).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn sequential_and_parallel_paths_agree() {
        let p = params(1.0, 1.0, 1.0);
        let seq = sample_counts_seq(&p, 30_000, 7, 30, 30).unwrap();
        let routed = sample_counts(&p, 30_000, 7, 30, 30).unwrap();
        assert_eq!(seq.samples, routed.samples);
    }

    #[test]
    fn poisson_one_mean_within_four_sigma() {
        let p = params(1.0, 1.0, 1.0);
        let count = 100_000;
        let run = sample_counts(&p, count, 42, 30, 30).unwrap();
        let mean: f64 =
            run.samples.iter().map(|&s| s as f64).sum::<f64>() / count as f64;
        // Poisson(1): mean 1, sigma 1
        assert!(
            (mean - 1.0).abs() < 4.0 / (count as f64).sqrt(),
            "mean = {mean}"
        );
        assert!(run.samples.iter().all(|&s| s <= 30));
    }

    #[test]
    fn heavy_tail_demands_larger_table() {
        // x = 5 with n_max = 5 leaves far too much tail mass
        let p = params(0.5, 1.0, 25.0);
        match sample_counts(&p, 10, 1, 5, 30) {
            Err(Error::Capacity(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn moment_cap_and_zero_count() {
        let p = params(1.0, 1.0, 1.0);
        let run = sample_counts(&p, 100, 1, 30, 30).unwrap();
        assert!(empirical_moments(&run, 7).is_err());
        assert!(sample_counts(&p, 0, 1, 30, 30).is_err());
    }
}
