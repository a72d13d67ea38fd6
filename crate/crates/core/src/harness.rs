//! Replication-parallel Monte Carlo.
//!
//! Replication `r` always draws from stream `r` of the master seed and results
//! come back in replication order, so every summary is independent of the
//! number of worker threads.

use crate::error::{Error, Result};
use crate::estimate::{fit, EstimateConfig};
use crate::model::{Process, TfbmParams};
use crate::simulate::{replication_rng, CirculantSampler, NegativeEigenvaluePolicy};
use crate::testkit::{decide, tau0_for, test_statistic, TestConfig};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "TFBM_WORKERS";

/// Worker count: explicit value, else `TFBM_WORKERS`, else all cores.
pub fn worker_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f(r, rng_r)` for `r = 0..reps`, in parallel, results in order of `r`.
pub fn replicate<T, F>(reps: usize, seed: u64, workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    let run = || {
        (0..reps as u64)
            .into_par_iter()
            .map(|r| f(r, &mut replication_rng(seed, r)))
            .collect()
    };
    let w = worker_count(workers);
    match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

/// Mean, standard deviation, skewness and excess kurtosis of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// `None` for a single observation.
    pub std: Option<f64>,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

impl Moments {
    pub fn of(x: &[f64]) -> Self {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        if x.len() < 2 {
            return Self { mean, std: None, skewness: None, kurtosis: None };
        }
        let c = |p: i32| x.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n;
        let (m2, m3, m4) = (c(2), c(3), c(4));
        let std = (m2 * n / (n - 1.0)).sqrt();
        let (skewness, kurtosis) =
            if m2 > 0.0 { (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0)) } else { (None, None) };
        Self { mean, std: Some(std), skewness, kurtosis }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimateSummary {
    pub truth: TfbmParams,
    pub n: usize,
    pub n_psi: usize,
    pub bias_correct: bool,
    pub reps: usize,
    pub hurst: Moments,
    pub lambda: Moments,
    pub sigma2: Moments,
    /// Replications whose simplex search hit the iteration limit.
    pub not_converged: usize,
}

/// Simulates `reps` tfBm paths and fits each.
pub fn mc_estimate(
    truth: &TfbmParams,
    n: usize,
    reps: usize,
    seed: u64,
    config: &EstimateConfig,
    workers: Option<usize>,
) -> Result<McEstimateSummary> {
    if reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    let process: Process = (*truth).into();
    let sampler = CirculantSampler::new(&process, n, NegativeEigenvaluePolicy::Error)?;
    let fits = replicate(reps, seed, workers, |_, rng| fit(&sampler.path(rng), config));
    let fits: Vec<_> = fits.into_iter().collect::<Result<_>>()?;
    let col = |f: fn(&TfbmParams) -> f64| fits.iter().map(|r| f(&r.theta_hat)).collect::<Vec<_>>();
    Ok(McEstimateSummary {
        truth: *truth,
        n,
        n_psi: config.n_psi,
        bias_correct: config.bias_correct,
        reps,
        hurst: Moments::of(&col(|t| t.hurst)),
        lambda: Moments::of(&col(|t| t.lambda)),
        sigma2: Moments::of(&col(|t| t.sigma2)),
        not_converged: fits.iter().filter(|r| !r.converged).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McPowerSummary {
    pub model: Process,
    pub n: usize,
    pub reps: usize,
    pub rejections: usize,
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub std_error: f64,
    pub mean_t_n: f64,
}

/// Rejection rate of the fBm test on `reps` paths of `model`.
pub fn mc_power(
    model: &Process,
    n: usize,
    reps: usize,
    seed: u64,
    config: &TestConfig,
    workers: Option<usize>,
) -> Result<McPowerSummary> {
    if reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    let sampler = CirculantSampler::new(model, n, NegativeEigenvaluePolicy::Error)?;
    let stats = replicate(reps, seed, workers, |_, rng| test_statistic(&sampler.path(rng), config));
    let stats: Vec<_> = stats.into_iter().collect::<Result<_>>()?;
    // τ₀ lookups may calibrate, which is itself parallel, so they stay out of
    // the section above.
    let results: Vec<_> = stats
        .iter()
        .map(|s| decide(s, tau0_for(s.h_small, n, config)?, config.alpha))
        .collect::<Result<_>>()?;
    let rejections = results.iter().filter(|r| r.reject).count();
    let rate = rejections as f64 / reps as f64;
    Ok(McPowerSummary {
        model: *model,
        n,
        reps,
        rejections,
        rate,
        std_error: (rate * (1.0 - rate) / reps as f64).sqrt(),
        mean_t_n: results.iter().map(|r| r.t_n).sum::<f64>() / reps as f64,
    })
}
