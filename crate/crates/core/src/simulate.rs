//! Exact sampling of tfGn / fGn by circulant embedding.
//!
//! The `n × n` Toeplitz covariance of the increments is embedded in a
//! circulant of size `2(n - 1)`, whose eigenvalues come from one FFT of its
//! first row. A sample is then one complex FFT of scaled white noise.

use crate::error::{Error, Result};
use crate::model::Process;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// What to do with negative circulant eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativeEigenvaluePolicy {
    /// Refuse to sample (the embedding would not be exact).
    #[default]
    Error,
    /// Set negative eigenvalues to zero.
    Clip,
}

/// Everything needed to draw one reproducible path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub seed: u64,
    pub model: Process,
    #[serde(default)]
    pub negative_eigenvalue_policy: NegativeEigenvaluePolicy,
}

/// Eigenvalues below `-EIGEN_TOL * max` count as negative.
pub const EIGEN_TOL: f64 = 1e-9;

/// Random stream for replication `r` of an experiment with master seed `seed`.
///
/// Streams of one seed are disjoint ChaCha streams, so replications can be
/// generated in any order or in parallel.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Eigenvalues of the circulant with first row `[γ(0), …, γ(n-1), γ(n-2), …, γ(1)]`.
///
/// Returns `2(n - 1)` values. Negative eigenvalues are an error or are clipped,
/// according to `policy`.
pub fn circulant_eigenvalues(acvf: &[f64], policy: NegativeEigenvaluePolicy) -> Result<Vec<f64>> {
    let n = acvf.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("circulant embedding needs n >= 2, got {n}")));
    }
    let m = 2 * (n - 1);
    let mut row: Vec<Complex64> = Vec::with_capacity(m);
    row.extend(acvf.iter().map(|&g| Complex64::new(g, 0.0)));
    row.extend(acvf[1..n - 1].iter().rev().map(|&g| Complex64::new(g, 0.0)));
    FftPlanner::new().plan_fft_forward(m).process(&mut row);

    let max = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    debug_assert!(
        row.iter().all(|c| c.im.abs() <= 1e-9 * max.max(f64::MIN_POSITIVE)),
        "circulant is not symmetric"
    );

    let mut eig: Vec<f64> = row.into_iter().map(|c| c.re).collect();
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -EIGEN_TOL * max {
        match policy {
            NegativeEigenvaluePolicy::Error => {
                return Err(Error::EmbeddingNotNonnegative { min, max });
            }
            NegativeEigenvaluePolicy::Clip => {}
        }
    }
    for e in &mut eig {
        if *e < 0.0 {
            *e = 0.0;
        }
    }
    Ok(eig)
}

/// A prepared sampler for one model and length; reusable across replications.
#[derive(Clone)]
pub struct CirculantSampler {
    n: usize,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler").field("n", &self.n).finish()
    }
}

impl CirculantSampler {
    pub fn new(model: &Process, n: usize, policy: NegativeEigenvaluePolicy) -> Result<Self> {
        let acvf: Vec<f64> = (0..n as i64).map(|h| model.acvf(h)).collect();
        Self::from_acvf(&acvf, policy)
    }

    pub fn from_acvf(acvf: &[f64], policy: NegativeEigenvaluePolicy) -> Result<Self> {
        let eig = circulant_eigenvalues(acvf, policy)?;
        let m = eig.len() as f64;
        let scale = eig.iter().map(|&e| (e / m).sqrt()).collect();
        let fft = FftPlanner::new().plan_fft_forward(eig.len());
        Ok(Self { n: acvf.len(), scale, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// One draw of the stationary increments `X(0), …, X(n-1)`.
    pub fn increments<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .scale
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.n);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// One draw of the path `B(1), …, B(n)`, the running sums of the increments.
    pub fn path<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        cumulative_sum(&self.increments(rng))
    }
}

/// `B(k) = X(0) + … + X(k-1)` for `k = 1..=n`.
pub fn cumulative_sum(x: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    x.iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect()
}

/// Stationary increments for `config`, using stream 0 of its seed.
pub fn sample_increments(config: &SimulationConfig) -> Result<Vec<f64>> {
    let sampler = CirculantSampler::new(&config.model, config.n, config.negative_eigenvalue_policy)?;
    Ok(sampler.increments(&mut replication_rng(config.seed, 0)))
}

/// Path `B(1..=n)` for `config`; its first differences are [`sample_increments`].
pub fn sample_path(config: &SimulationConfig) -> Result<Vec<f64>> {
    Ok(cumulative_sum(&sample_increments(config)?))
}
