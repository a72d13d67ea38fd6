//! Weighted nonlinear log-regression of sample wavelet variances on the
//! tfBm wavelet spectrum.
//!
//! ```text
//! f_n(θ) = Σ_j w_j (log₂ W(2^j) − η_j(θ))²,   η_j(θ) = log₂ E d²(2^j, 0) + B(j)
//! ```
//!
//! `σ²` enters `η_j` as the additive term `log₂ σ²`, so it is profiled out in
//! closed form and the simplex search runs over `(H, λ)` only.

use crate::error::{domain, Error, Result};
use crate::model::TfbmParams;
use crate::spectrum::{bias_term, QuadratureConfig, SpectrumModel};
use crate::wavelet::{make_family, max_octave, wavelet_variance, WaveletVariance};
use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Estimator settings. `octaves = None` means `1..=min(j_max, 12)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub octaves: Option<Vec<u32>>,
    pub n_psi: usize,
    pub bias_correct: bool,
    /// `None` means `w_j = 2^{-(j-1)/2}`.
    pub weights: Option<Vec<f64>>,
    pub hurst_bounds: (f64, f64),
    pub lambda_bounds: (f64, f64),
    pub initial: (f64, f64),
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: u64,
    pub quad: QuadratureConfig,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            octaves: None,
            n_psi: 2,
            bias_correct: true,
            weights: None,
            hurst_bounds: (0.0, 1.0),
            lambda_bounds: (1e-6, 5.0),
            initial: (0.5, 0.03),
            f_tol: 1e-10,
            x_tol: 1e-8,
            max_iter: 2000,
            quad: QuadratureConfig::default(),
        }
    }
}

/// Largest octave used by default.
pub const MAX_DEFAULT_OCTAVE: u32 = 12;

impl EstimateConfig {
    /// Octaves for a series of length `n`.
    pub fn octaves_for(&self, n: usize) -> Result<Vec<u32>> {
        if let Some(o) = &self.octaves {
            return Ok(o.clone());
        }
        let fam = make_family(self.n_psi)?;
        let jm = max_octave(n, &fam).min(MAX_DEFAULT_OCTAVE);
        if jm < 3 {
            return Err(Error::InsufficientOctaves { needed: 3, available: jm as usize });
        }
        Ok((1..=jm).collect())
    }

    /// Weight of octave `j` (position `i` in the octave list).
    fn weight(&self, i: usize, j: u32) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 2f64.powf(-(j as f64 - 1.0) / 2.0),
        }
    }
}

/// Outcome of [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub theta_hat: TfbmParams,
    pub objective_value: f64,
    pub converged: bool,
    pub iterations: u64,
    pub octaves: Vec<u32>,
    /// `log₂ W(2^j) − η_j(θ̂)`.
    pub residuals: Vec<f64>,
}

/// The regression problem for one set of sample wavelet variances.
#[derive(Debug, Clone)]
pub struct Regression {
    model: SpectrumModel,
    octaves: Vec<u32>,
    log2w: Vec<f64>,
    bias: Vec<f64>,
    weights: Vec<f64>,
}

impl Regression {
    pub fn new(wv: &WaveletVariance, config: &EstimateConfig) -> Result<Self> {
        let octaves = match &config.octaves {
            Some(o) => o.clone(),
            None => {
                let avail = wv.octaves();
                avail.into_iter().filter(|&j| j <= MAX_DEFAULT_OCTAVE).collect()
            }
        };
        if octaves.len() < 3 {
            return Err(Error::InsufficientOctaves { needed: 3, available: octaves.len() });
        }
        if let Some(w) = &config.weights {
            if w.len() != octaves.len() {
                return domain("one weight per octave is needed");
            }
        }
        let mut log2w = Vec::with_capacity(octaves.len());
        let mut bias = Vec::with_capacity(octaves.len());
        let mut weights = Vec::with_capacity(octaves.len());
        for (i, &j) in octaves.iter().enumerate() {
            log2w.push(wv.log2(j)?);
            let n_j = wv.get(j).ok_or(Error::MissingOctave(j))?.n_j;
            bias.push(if config.bias_correct { bias_term(n_j)? } else { 0.0 });
            weights.push(config.weight(i, j));
        }
        let model = SpectrumModel::new(make_family(config.n_psi)?, config.quad);
        Ok(Self { model, octaves, log2w, bias, weights })
    }

    pub fn octaves(&self) -> &[u32] {
        &self.octaves
    }

    /// `log₂` of the unit-`σ²` spectrum, `log₂ I_j(H, λ)`.
    fn unit_log2(&self, hurst: f64, lambda: f64) -> Result<Vec<f64>> {
        let unit = TfbmParams::new(hurst, lambda, 1.0)?;
        let s = self.model.tfbm_spectra(&unit, &self.octaves)?;
        Ok(s.iter().map(|v| v.log2()).collect())
    }

    /// `(log₂ σ̂², f_n)` at `(H, λ)` with `σ²` profiled.
    pub fn profile(&self, hurst: f64, lambda: f64) -> Result<(f64, f64)> {
        let base = self.unit_log2(hurst, lambda)?;
        let offsets: Vec<f64> =
            self.log2w.iter().zip(&self.bias).zip(&base).map(|((y, b), s)| y - b - s).collect();
        let wsum: f64 = self.weights.iter().sum();
        let log2s2 = self.weights.iter().zip(&offsets).map(|(w, o)| w * o).sum::<f64>() / wsum;
        let f = self.weights.iter().zip(&offsets).map(|(w, o)| w * (o - log2s2).powi(2)).sum();
        Ok((log2s2, f))
    }

    /// `f_n(θ)` at a full parameter vector.
    pub fn objective(&self, theta: &TfbmParams) -> Result<f64> {
        Ok(self.residuals(theta)?.iter().zip(&self.weights).map(|(r, w)| w * r * r).sum())
    }

    /// `log₂ W(2^j) − η_j(θ)`.
    pub fn residuals(&self, theta: &TfbmParams) -> Result<Vec<f64>> {
        let base = self.unit_log2(theta.hurst, theta.lambda)?;
        let l = theta.sigma2.log2();
        Ok(self.log2w.iter().zip(&self.bias).zip(&base).map(|((y, b), s)| y - b - s - l).collect())
    }
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Maps unconstrained `u ∈ ℝ²` to the open box: logit for `H`, logit of the
/// rescaled `ln λ` for `λ`.
#[derive(Debug, Clone, Copy)]
struct BoxMap {
    h: (f64, f64),
    log_l: (f64, f64),
}

impl BoxMap {
    fn new(config: &EstimateConfig) -> Result<Self> {
        let (h0, h1) = config.hurst_bounds;
        let (l0, l1) = config.lambda_bounds;
        if !(h0 < h1 && l0 > 0.0 && l0 < l1) {
            return domain("empty search box");
        }
        Ok(Self { h: (h0, h1), log_l: (l0.ln(), l1.ln()) })
    }

    fn to_theta(self, u: &[f64]) -> (f64, f64) {
        let h = self.h.0 + (self.h.1 - self.h.0) * logistic(u[0]);
        let l = (self.log_l.0 + (self.log_l.1 - self.log_l.0) * logistic(u[1])).exp();
        (h, l)
    }

    fn to_u(self, hurst: f64, lambda: f64) -> Vec<f64> {
        vec![
            logit((hurst - self.h.0) / (self.h.1 - self.h.0)),
            logit((lambda.ln() - self.log_l.0) / (self.log_l.1 - self.log_l.0)),
        ]
    }
}

struct Profiled<'a> {
    reg: &'a Regression,
    map: BoxMap,
}

impl CostFunction for Profiled<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let (h, l) = self.map.to_theta(u);
        // Points the spectrum cannot evaluate (H rounding to 0) are simply bad.
        Ok(match self.reg.profile(h, l) {
            Ok((_, f)) if f.is_finite() => f,
            _ => f64::MAX,
        })
    }
}

fn simplex(u: &[f64], step: f64) -> Vec<Vec<f64>> {
    vec![u.to_vec(), vec![u[0] + step, u[1]], vec![u[0], u[1] + step]]
}

/// Simplex search from `start`; returns (best u, best f, iterations, converged).
fn nelder_mead(
    problem: Profiled<'_>,
    start: &[f64],
    step: f64,
    config: &EstimateConfig,
) -> Result<(Vec<f64>, f64, u64, bool)> {
    let solver = NelderMead::new(simplex(start, step))
        .with_sd_tolerance(config.f_tol * 1e-2)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let res = Executor::new(problem, solver)
        .configure(|s| s.max_iters(config.max_iter))
        .run()
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let st = res.state();
    let best = st.get_best_param().cloned().unwrap_or_else(|| start.to_vec());
    let converged = matches!(
        st.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::SolverConverged)
    );
    Ok((best, st.get_best_cost(), st.get_iter(), converged))
}

/// Minimises the profiled objective over the open box.
pub fn fit_regression(reg: &Regression, config: &EstimateConfig) -> Result<EstimateResult> {
    let map = BoxMap::new(config)?;
    let (h0, l0) = config.initial;
    let mut u = map.to_u(h0, l0);
    let mut iterations = 0;
    let mut converged = false;
    let mut best_f = f64::INFINITY;
    // Restart from the best point with a shrinking simplex until it stops moving.
    for step in [0.5, 0.1, 0.02] {
        let (nu, f, it, conv) = nelder_mead(Profiled { reg, map }, &u, step, config)?;
        iterations += it;
        let moved = nu.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if f <= best_f {
            best_f = f;
            u = nu;
        }
        converged = conv;
        if conv && moved < config.x_tol.sqrt() && step < 0.5 {
            break;
        }
    }
    let (hurst, lambda) = map.to_theta(&u);
    let (log2s2, f) = reg.profile(hurst, lambda)?;
    let theta_hat = TfbmParams::new(hurst, lambda, 2f64.powf(log2s2))?;
    Ok(EstimateResult {
        residuals: reg.residuals(&theta_hat)?,
        theta_hat,
        objective_value: f,
        converged,
        iterations,
        octaves: reg.octaves().to_vec(),
    })
}

/// Fits θ to a table of sample wavelet variances.
pub fn fit_wavelet_variance(wv: &WaveletVariance, config: &EstimateConfig) -> Result<EstimateResult> {
    fit_regression(&Regression::new(wv, config)?, config)
}

/// Fits θ to a path `B(1..=n)`.
pub fn fit(series: &[f64], config: &EstimateConfig) -> Result<EstimateResult> {
    let fam = make_family(config.n_psi)?;
    let octaves = config.octaves_for(series.len())?;
    let j_max = *octaves.iter().max().expect("octave list is non-empty");
    let wv = wavelet_variance(series, &fam, Some(j_max))?;
    fit_wavelet_variance(&wv, config)
}

/// `f_n(θ)` for sample wavelet variances `wv`.
pub fn objective(theta: &TfbmParams, wv: &WaveletVariance, config: &EstimateConfig) -> Result<f64> {
    Regression::new(wv, config)?.objective(theta)
}

/// `σ̂²(H, λ)`, the closed-form minimiser of `f_n` over `σ²`.
pub fn profile_sigma2(
    hurst: f64,
    lambda: f64,
    wv: &WaveletVariance,
    config: &EstimateConfig,
) -> Result<f64> {
    Ok(2f64.powf(Regression::new(wv, config)?.profile(hurst, lambda)?.0))
}

/// `Σ_j w_j ∇E d² ∇E d²ᵀ / (E d²)²` in the coordinates `(H, λ, σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityGram {
    pub matrix: [[f64; 3]; 3],
    pub determinant: f64,
    pub condition_number: f64,
    /// The rank-one summands, one per octave.
    pub terms: Vec<[[f64; 3]; 3]>,
}

/// Finite-difference identifiability matrix at `theta`.
pub fn identifiability_gram(
    theta: &TfbmParams,
    octaves: &[u32],
    config: &EstimateConfig,
) -> Result<IdentifiabilityGram> {
    if theta.is_fbm() {
        return domain("identifiability is assessed for λ > 0");
    }
    let model = SpectrumModel::new(make_family(config.n_psi)?, config.quad);
    let base = [theta.hurst, theta.lambda, theta.sigma2];
    let at = |v: [f64; 3]| model.tfbm_spectra(&TfbmParams::new(v[0], v[1], v[2])?, octaves);
    let s0 = at(base)?;
    let mut grads = vec![[0.0; 3]; octaves.len()];
    for i in 0..3 {
        let h = 1e-5 * base[i].abs();
        let (mut up, mut dn) = (base, base);
        up[i] += h;
        dn[i] -= h;
        let (su, sd) = (at(up)?, at(dn)?);
        for (k, g) in grads.iter_mut().enumerate() {
            g[i] = (su[k] - sd[k]) / (2.0 * h) / s0[k];
        }
    }
    let mut total = Matrix3::zeros();
    let mut terms = Vec::with_capacity(octaves.len());
    for (k, (&j, g)) in octaves.iter().zip(&grads).enumerate() {
        let w = config.weight(k, j);
        let t = Matrix3::from_fn(|r, c| w * g[r] * g[c]);
        total += t;
        terms.push(to_array(&t));
    }
    let eig = SymmetricEigen::new(total).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e.abs()), hi.max(e.abs())));
    Ok(IdentifiabilityGram {
        matrix: to_array(&total),
        determinant: total.determinant(),
        condition_number: hi / lo,
        terms,
    })
}

fn to_array(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 3]; 3];
    for (r, row) in a.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = m[(r, c)];
        }
    }
    a
}
