//! Test of fBm against tfBm alternatives.
//!
//! `T_n = Ĥ(2^{j1}, 2^{j2}) − H̃(2^{j3}, 2^{j4})`: a two-octave fBm fit at fine
//! scales minus a log-regression slope at coarse scales. Under fBm both
//! estimate `H`. Under tfBm the coarse spectrum flattens, `H̃` drifts to `−½`
//! and `T_n` becomes large.

use crate::error::{domain, Error, Result};
use crate::harness::replicate;
use crate::model::FbmParams;
use crate::simulate::{CirculantSampler, NegativeEigenvaluePolicy};
use crate::spectrum::{bias_term, QuadratureConfig, SpectrumModel};
use crate::wavelet::{make_family, max_octave, wavelet_variance, WaveletVariance};
use argmin::core::{CostFunction, Executor};
use argmin::solver::brent::BrentRoot;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// `τ₀` used when calibration is switched off.
pub const DEFAULT_TAU0: f64 = 0.09;
/// Search interval for the fine-scale Hurst estimate.
pub const HURST_RANGE: (f64, f64) = (0.001, 0.999);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub enabled: bool,
    pub reps: usize,
    pub seed: u64,
    /// Spacing of the `H` grid the plug-in estimate is rounded to.
    pub h_step: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { enabled: true, reps: 1000, seed: 0x7466_626d, h_step: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub j1: u32,
    pub j2: u32,
    /// `None` means `log₂ n − 7`.
    pub j3: Option<u32>,
    /// `None` means `log₂ n − 3`.
    pub j4: Option<u32>,
    pub n_psi: usize,
    pub alpha: f64,
    pub bias_correct: bool,
    /// Fixed `τ₀`; skips calibration.
    pub tau0: Option<f64>,
    pub calibration: CalibrationConfig,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            j1: 1,
            j2: 2,
            j3: None,
            j4: None,
            n_psi: 2,
            alpha: 0.05,
            bias_correct: true,
            tau0: None,
            calibration: CalibrationConfig::default(),
        }
    }
}

/// The four octaves of the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestOctaves {
    pub j1: u32,
    pub j2: u32,
    pub j3: u32,
    pub j4: u32,
}

/// `(j3, j4) = (log₂ n − 7, log₂ n − 3)`.
pub fn default_large_octaves(n: usize) -> Result<(u32, u32)> {
    if n < 256 {
        return Err(Error::InsufficientData(format!("the octave rule needs n >= 256, got {n}")));
    }
    let l = n.ilog2();
    Ok((l - 7, l - 3))
}

impl TestConfig {
    pub fn octaves(&self, n: usize) -> Result<TestOctaves> {
        let (d3, d4) = match (self.j3, self.j4) {
            (Some(a), Some(b)) => (a, b),
            _ => default_large_octaves(n)?,
        };
        let o = TestOctaves { j1: self.j1, j2: self.j2, j3: self.j3.unwrap_or(d3), j4: self.j4.unwrap_or(d4) };
        if self.n_psi < 2 {
            return domain("the test needs at least two vanishing moments");
        }
        if !(o.j1 >= 1 && o.j1 < o.j2 && o.j2 < o.j3 && o.j3 < o.j4) {
            return domain(format!("octaves must satisfy 1 <= j1 < j2 < j3 < j4, got {o:?}"));
        }
        let avail = max_octave(n, &make_family(self.n_psi)?);
        if o.j4 > avail {
            return Err(Error::InsufficientOctaves { needed: o.j4 as usize, available: avail as usize });
        }
        Ok(o)
    }
}

/// Dyadic scaling factor `a(n) = 2⌊n^μ⌋`, rounded to the nearest power of two (in log scale).
pub fn scaling_factor(n: usize, mu: f64) -> Result<u64> {
    if !(mu > 0.0 && mu < 1.0) || n < 2 {
        return domain("scaling factor needs n >= 2 and 0 < μ < 1");
    }
    let a = 2.0 * (n as f64).powf(mu).floor();
    Ok(1u64 << a.log2().round() as u32)
}

/// OLS slope weights over `j3..=j4`: `Σϖ_j = 0`, `Σ jϖ_j = 1`.
pub fn logreg_weights(j3: u32, j4: u32) -> Result<Vec<f64>> {
    if j4 <= j3 {
        return domain("log-regression needs j4 > j3");
    }
    let js: Vec<f64> = (j3..=j4).map(f64::from).collect();
    let mean = js.iter().sum::<f64>() / js.len() as f64;
    let ss: f64 = js.iter().map(|j| (j - mean).powi(2)).sum();
    Ok(js.iter().map(|j| (j - mean) / ss).collect())
}

/// `H̃ = (Σ ϖ_j log₂ W(2^j) − 1)/2` over `j3..=j4`.
pub fn wavelet_logreg_h(wv: &WaveletVariance, j3: u32, j4: u32) -> Result<f64> {
    let w = logreg_weights(j3, j4)?;
    let mut slope = 0.0;
    for (j, w) in (j3..=j4).zip(&w) {
        slope += w * wv.log2(j)?;
    }
    Ok((slope - 1.0) / 2.0)
}

/// [`wavelet_logreg_h`] on `log₂ W(2^j) − B(j)`, removing the small-`n_j` bias of
/// the log of a sample variance.
pub fn wavelet_logreg_h_corrected(wv: &WaveletVariance, j3: u32, j4: u32) -> Result<f64> {
    let w = logreg_weights(j3, j4)?;
    let mut slope = 0.0;
    for (j, w) in (j3..=j4).zip(&w) {
        let n_j = wv.get(j).ok_or(Error::MissingOctave(j))?.n_j;
        slope += w * (wv.log2(j)? - bias_term(n_j)?);
    }
    Ok((slope - 1.0) / 2.0)
}

/// Fine-scale fBm fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MEstimate {
    pub hurst: f64,
    pub sigma2: f64,
    /// The log-spectrum slope fell outside what fBm with `H` in range can produce;
    /// `hurst` is then the nearest end of the range.
    pub boundary: bool,
}

struct SlopeGap<'a> {
    model: &'a SpectrumModel,
    octaves: [u32; 2],
    target: f64,
}

impl SlopeGap<'_> {
    fn unit_log2(&self, hurst: f64) -> Result<[f64; 2]> {
        let s = self.model.kernel_integrals(hurst, 0.0, &self.octaves)?;
        Ok([s[0].log2(), s[1].log2()])
    }
}

impl CostFunction for SlopeGap<'_> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, h: &f64) -> std::result::Result<f64, argmin::core::Error> {
        let s = self.unit_log2(*h)?;
        Ok(s[1] - s[0] - self.target)
    }
}

/// Two-octave fBm M-estimate: matches `η̃_{j2} − η̃_{j1}` to the sample log-slope
/// and profiles `σ²`.
pub fn fbm_m_estimate(
    wv: &WaveletVariance,
    j1: u32,
    j2: u32,
    n_psi: usize,
    bias_correct: bool,
) -> Result<MEstimate> {
    if j1 >= j2 {
        return domain("the M-estimate needs j1 < j2");
    }
    let y = [wv.log2(j1)?, wv.log2(j2)?];
    let b = if bias_correct {
        let n1 = wv.get(j1).ok_or(Error::MissingOctave(j1))?.n_j;
        let n2 = wv.get(j2).ok_or(Error::MissingOctave(j2))?.n_j;
        [bias_term(n1)?, bias_term(n2)?]
    } else {
        [0.0, 0.0]
    };
    let model = SpectrumModel::new(make_family(n_psi)?, QuadratureConfig::default());
    let gap = SlopeGap { model: &model, octaves: [j1, j2], target: (y[1] - b[1]) - (y[0] - b[0]) };

    let (lo, hi) = HURST_RANGE;
    let (g_lo, g_hi) = (eval_gap(&gap, lo)?, eval_gap(&gap, hi)?);
    let (hurst, boundary) = if g_lo >= 0.0 {
        (lo, g_lo > 0.0)
    } else if g_hi <= 0.0 {
        (hi, g_hi < 0.0)
    } else {
        let solver = BrentRoot::new(lo, hi, 1e-12);
        let res = Executor::new(gap, solver)
            .configure(|s| s.param(0.5).max_iters(200))
            .run()
            .map_err(|e| Error::Numerical(e.to_string()))?;
        let h = res.state.best_param.ok_or_else(|| Error::Numerical("root search failed".into()))?;
        return finish(&model, [j1, j2], y, b, h, false);
    };
    finish(&model, [j1, j2], y, b, hurst, boundary)
}

fn eval_gap(gap: &SlopeGap<'_>, h: f64) -> Result<f64> {
    let s = gap.unit_log2(h)?;
    Ok(s[1] - s[0] - gap.target)
}

fn finish(
    model: &SpectrumModel,
    octaves: [u32; 2],
    y: [f64; 2],
    b: [f64; 2],
    hurst: f64,
    boundary: bool,
) -> Result<MEstimate> {
    let c = crate::spectrum::fbm_constant(hurst);
    let s = model.kernel_integrals(hurst, 0.0, &octaves)?;
    let log2s2 = (0..2).map(|i| y[i] - b[i] - (s[i] / (c * c)).log2()).sum::<f64>() / 2.0;
    Ok(MEstimate { hurst, sigma2: 2f64.powf(log2s2), boundary })
}

/// `T_n` and its two components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub t_n: f64,
    pub h_small: f64,
    pub sigma2_small: f64,
    pub boundary: bool,
    pub h_large: f64,
    pub octaves: TestOctaves,
}

/// `T_n` from precomputed wavelet variances.
pub fn test_statistic_from_variance(
    wv: &WaveletVariance,
    octaves: TestOctaves,
    config: &TestConfig,
) -> Result<TestStatistic> {
    let m = fbm_m_estimate(wv, octaves.j1, octaves.j2, config.n_psi, config.bias_correct)?;
    let h_large = if config.bias_correct {
        wavelet_logreg_h_corrected(wv, octaves.j3, octaves.j4)?
    } else {
        wavelet_logreg_h(wv, octaves.j3, octaves.j4)?
    };
    Ok(TestStatistic {
        t_n: m.hurst - h_large,
        h_small: m.hurst,
        sigma2_small: m.sigma2,
        boundary: m.boundary,
        h_large,
        octaves,
    })
}

/// `T_n` for a path `B(1..=n)`.
pub fn test_statistic(series: &[f64], config: &TestConfig) -> Result<TestStatistic> {
    let octaves = config.octaves(series.len())?;
    let wv = wavelet_variance(series, &make_family(config.n_psi)?, Some(octaves.j4))?;
    test_statistic_from_variance(&wv, octaves, config)
}

/// Null standard deviation of `T_n`: the Monte Carlo standard deviation of `T_n`
/// over `reps` fBm(`H`) paths of length `n`.
pub fn calibrate_tau0(hurst: f64, n: usize, reps: usize, seed: u64, config: &TestConfig) -> Result<f64> {
    if reps < 200 {
        return domain(format!("calibration needs at least 200 replications, got {reps}"));
    }
    let octaves = config.octaves(n)?;
    let model = FbmParams::new(hurst, 1.0)?.into();
    let sampler = CirculantSampler::new(&model, n, NegativeEigenvaluePolicy::Error)?;
    let fam = make_family(config.n_psi)?;
    let stats = replicate(reps, seed, None, |_, rng| -> Result<f64> {
        let path = sampler.path(rng);
        let wv = wavelet_variance(&path, &fam, Some(octaves.j4))?;
        Ok(test_statistic_from_variance(&wv, octaves, config)?.t_n)
    });
    let t: Vec<f64> = stats.into_iter().collect::<Result<_>>()?;
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    let var = t.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t.len() - 1) as f64;
    Ok(var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Tau0Key {
    h_grid: i64,
    n: usize,
    n_psi: usize,
    octaves: TestOctaves,
    reps: usize,
    seed: u64,
    bias_correct: bool,
}

/// `τ₀` at the grid point nearest `hurst`, calibrated once per process and key.
///
/// The replication seed is derived from the key, so the value does not depend
/// on which series triggered the calibration. Calibration runs its own parallel
/// section; Monte Carlo drivers should call this outside theirs (see
/// [`crate::harness::mc_power`]).
pub fn tau0_lookup(hurst: f64, n: usize, config: &TestConfig) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<Tau0Key, f64>>> = OnceLock::new();
    let cal = &config.calibration;
    let step = cal.h_step;
    let max_index = ((1.0 - step) / step).round() as i64;
    let h_grid = ((hurst / step).round() as i64).clamp(1, max_index);
    let key = Tau0Key {
        h_grid,
        n,
        n_psi: config.n_psi,
        octaves: config.octaves(n)?,
        reps: cal.reps,
        seed: cal.seed,
        bias_correct: config.bias_correct,
    };
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&t) = cache.lock().expect("tau0 cache poisoned").get(&key) {
        return Ok(t);
    }
    let seed = cal.seed ^ (h_grid as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (n as u64).rotate_left(32);
    let tau0 = calibrate_tau0(h_grid as f64 * step, n, cal.reps, seed, config)?;
    cache.lock().expect("tau0 cache poisoned").insert(key, tau0);
    Ok(tau0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub t_n: f64,
    pub tau0_used: f64,
    pub p_value: f64,
    pub reject: bool,
    pub h_hat_small: f64,
    pub h_tilde_large: f64,
    pub boundary: bool,
    pub octaves: TestOctaves,
}

/// One-sided decision: reject fBm when `T_n > z_α τ₀`, `p = 1 − Φ(T_n/τ₀)`.
pub fn decide(stat: &TestStatistic, tau0: f64, alpha: f64) -> Result<TestResult> {
    if !(tau0 > 0.0) || !(alpha > 0.0 && alpha < 1.0) {
        return domain("need τ₀ > 0 and 0 < α < 1");
    }
    let z = Normal::standard();
    let p_value = z.sf(stat.t_n / tau0);
    Ok(TestResult {
        t_n: stat.t_n,
        tau0_used: tau0,
        p_value,
        reject: stat.t_n > z.inverse_cdf(1.0 - alpha) * tau0,
        h_hat_small: stat.h_small,
        h_tilde_large: stat.h_large,
        boundary: stat.boundary,
        octaves: stat.octaves,
    })
}

/// `τ₀` for a series of length `n` with fine-scale estimate `h_small`.
pub fn tau0_for(h_small: f64, n: usize, config: &TestConfig) -> Result<f64> {
    match config.tau0 {
        Some(t) => Ok(t),
        None if config.calibration.enabled => tau0_lookup(h_small, n, config),
        None => Ok(DEFAULT_TAU0),
    }
}

/// Runs the test on a path `B(1..=n)`.
pub fn run_test(series: &[f64], config: &TestConfig) -> Result<TestResult> {
    let stat = test_statistic(series, config)?;
    let tau0 = tau0_for(stat.h_small, series.len(), config)?;
    decide(&stat, tau0, config.alpha)
}
