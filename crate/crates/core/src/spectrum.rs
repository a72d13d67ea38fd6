//! Wavelet spectra `E d²(2^j, 0)` of tfBm and fBm observed in discrete time.
//!
//! ```text
//! E d²(2^j, 0) = σ²Γ²(H+½)/(2π) ∫_{-π}^{π} |𝓗_j(x)|² Σ_ℓ (λ² + (x + 2πℓ)²)^{-(H+½)} dx
//! ```
//!
//! for tfBm, and `σ²/C²(H) ∫ |𝓗_j(x)|² Σ_ℓ |x + 2πℓ|^{-(2H+1)} dx` for fBm.
//!
//! Two quadratures are provided. [`QuadratureRule::Midpoint`] is the plain
//! midpoint rule on a uniform mesh. [`QuadratureRule::Graded`] (the default)
//! is a product rule on dyadically graded panels: the oscillatory factor
//! `|𝓗_j|²` is integrated once against Lagrange polynomials, so each new
//! `(H, λ)` costs one kernel evaluation per node. It resolves the peak of the
//! kernel at `x = 0` for any `λ`, and the integrable singularity of the fBm kernel.

use crate::error::{domain, Error, Result};
use crate::model::{FbmParams, TfbmParams};
use crate::quadrature::{barycentric_weights, gauss_legendre, lagrange_basis, Chebyshev};
use crate::special::{digamma, gamma};
use crate::wavelet::{equivalent_filter, transfer_power_at, transfer_power_of, WaveletFamily};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

const TWO_PI: f64 = 2.0 * PI;
/// Terms summed directly before the Euler–Maclaurin correction takes over.
const EM_OFFSET: usize = 20;

/// How `∫_{-π}^{π}` is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    /// Product rule on dyadic panels `[π 2^{-k-1}, π 2^{-k}]`.
    Graded,
    /// Midpoint rule with `max(2^{max(10, j+3)}, 2·nextpow2(len h_j))` cells.
    Midpoint,
}

/// Correction for the aliases `|ℓ| > L` dropped from the kernel sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailCorrection {
    None,
    /// The constant `2∫_L^∞ (λ² + (2πℓ)²)^{-(H+½)} dℓ`, the same for every `x`.
    Constant,
    /// Euler–Maclaurin summation of the dropped terms at each `x`.
    EulerMaclaurin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rule: QuadratureRule,
    /// Aliases `|ℓ| <= L` are summed explicitly.
    pub alias_truncation: usize,
    pub tail: TailCorrection,
    /// Midpoint rule only: multiplies the number of cells.
    pub mesh_multiplier: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::Graded,
            alias_truncation: 10,
            tail: TailCorrection::EulerMaclaurin,
            mesh_multiplier: 1,
        }
    }
}

impl QuadratureConfig {
    /// Uniform midpoint mesh, `L = 10` and a constant alias tail.
    pub fn midpoint() -> Self {
        Self {
            rule: QuadratureRule::Midpoint,
            alias_truncation: 10,
            tail: TailCorrection::Constant,
            mesh_multiplier: 1,
        }
    }

    /// Cells of the midpoint mesh on `[-π, π)` at octave `j` for a filter of `len` taps.
    pub fn midpoint_cells(&self, j: u32, len: usize) -> usize {
        let rule = 1usize << (j + 3).max(10);
        rule.max(2 * len.next_power_of_two()) * self.mesh_multiplier.max(1)
    }
}

/// `∫_{y0}^∞ (λ² + y²)^{-a} dy` for `a > ½`, `y0 > 0`.
fn tail_integral(a: f64, lam: f64, y0: f64) -> f64 {
    if lam <= 0.5 * y0 {
        return binomial_tail(a, lam, y0);
    }
    // Smooth part by Gauss–Legendre, then the series from 2λ on.
    let (x, w) = gauss_legendre(32);
    let (lo, hi) = (y0, 2.0 * lam);
    let half = 0.5 * (hi - lo);
    let smooth: f64 = x
        .iter()
        .zip(&w)
        .map(|(t, w)| {
            let y = lo + half * (t + 1.0);
            w * (lam * lam + y * y).powf(-a)
        })
        .sum::<f64>()
        * half;
    smooth + binomial_tail(a, lam, hi)
}

/// Term-wise integration of `y^{-2a}(1 + λ²/y²)^{-a}`; needs `λ <= y0/2`.
fn binomial_tail(a: f64, lam: f64, y0: f64) -> f64 {
    let r = (lam / y0).powi(2);
    let mut coef = 1.0;
    let mut rk = 1.0;
    let mut sum = 0.0;
    for k in 0..200 {
        let kf = k as f64;
        let term = coef * rk / (2.0 * a + 2.0 * kf - 1.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        coef *= -(a + kf) / (kf + 1.0);
        rk *= r;
    }
    sum * y0.powf(1.0 - 2.0 * a)
}

/// The aliased kernel `Σ_ℓ (λ² + (x + 2πℓ)²)^{-a}` with `a = H + ½`.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    a: f64,
    lam: f64,
}

impl Kernel {
    fn g(&self, y: f64) -> f64 {
        (self.lam * self.lam + y * y).powf(-self.a)
    }

    /// `Σ_{ℓ ≥ m} g(c + 2πℓ)`: a few terms directly, then Euler–Maclaurin.
    fn em_tail(&self, c: f64, m: usize) -> f64 {
        let start = m + EM_OFFSET;
        let direct: f64 = (m..start).rev().map(|l| self.g(c + TWO_PI * l as f64)).sum();
        direct + self.em_from(c, start)
    }

    fn em_from(&self, c: f64, m: usize) -> f64 {
        let a = self.a;
        let y = c + TWO_PI * m as f64;
        let r = self.lam * self.lam + y * y;
        let g = r.powf(-a);
        let g1 = -2.0 * a * y * g / r;
        let g3 = (12.0 * a * (a + 1.0) * y - 8.0 * a * (a + 1.0) * (a + 2.0) * y.powi(3) / r) * g
            / (r * r);
        tail_integral(a, self.lam, y) / TWO_PI + 0.5 * g - TWO_PI * g1 / 12.0
            + TWO_PI.powi(3) * g3 / 720.0
    }

    fn tail(&self, x: f64, l: usize, mode: TailCorrection) -> f64 {
        match mode {
            TailCorrection::None => 0.0,
            TailCorrection::Constant => tail_integral(self.a, self.lam, TWO_PI * l as f64) / PI,
            TailCorrection::EulerMaclaurin => self.em_tail(x, l + 1) + self.em_tail(-x, l + 1),
        }
    }

    /// Aliases `1 <= |ℓ| <= L` plus the tail; smooth on `[-π, π]`.
    fn aliases(&self, x: f64, l: usize, mode: TailCorrection) -> f64 {
        let mut s = self.tail(x, l, mode);
        for k in (1..=l).rev() {
            let shift = TWO_PI * k as f64;
            s += self.g(x + shift) + self.g(x - shift);
        }
        s
    }

    fn full(&self, x: f64, l: usize, mode: TailCorrection) -> f64 {
        self.g(x) + self.aliases(x, l, mode)
    }
}

// Graded product rule: PANELS dyadic panels with ORDER Gauss nodes each,
// plus the leading-order behaviour on [0, π 2^{-PANELS}].
const PANELS: usize = 60;
const ORDER: usize = 16;
const INNER_ORDER: usize = 16;
const CHEB_POINTS: usize = 24;

struct GradedNodes {
    x: Vec<f64>,
    t: Vec<f64>,
    bary: Vec<f64>,
}

fn graded_nodes() -> &'static GradedNodes {
    static NODES: OnceLock<GradedNodes> = OnceLock::new();
    NODES.get_or_init(|| {
        let (t, _) = gauss_legendre(ORDER);
        let bary = barycentric_weights(&t);
        let mut x = Vec::with_capacity(PANELS * ORDER);
        for k in 0..PANELS {
            let (a, b) = panel(k);
            x.extend(t.iter().map(|&ti| a + 0.5 * (b - a) * (ti + 1.0)));
        }
        GradedNodes { x, t, bary }
    })
}

fn panel(k: usize) -> (f64, f64) {
    let b = PI * 2f64.powi(-(k as i32));
    (0.5 * b, b)
}

/// Product weights `∫_{panel} |𝓗_j|² ℓ_i` and the constant `c_j` of
/// `|𝓗_j(x)|² ≈ c_j x^{2N}` near the origin.
struct OctaveWeights {
    weights: Vec<f64>,
    c0: f64,
}

type WeightCache = Mutex<HashMap<(usize, u32), Arc<OctaveWeights>>>;

fn octave_weights(family: &WaveletFamily, j: u32) -> Arc<OctaveWeights> {
    static CACHE: OnceLock<WeightCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (family.n_psi(), j);
    if let Some(w) = cache.lock().expect("weight cache poisoned").get(&key) {
        return Arc::clone(w);
    }
    let w = Arc::new(build_octave_weights(family, j));
    cache.lock().expect("weight cache poisoned").entry(key).or_insert(w).clone()
}

fn build_octave_weights(family: &WaveletFamily, j: u32) -> OctaveWeights {
    let nodes = graded_nodes();
    let (gx, gw) = gauss_legendre(INNER_ORDER);
    let support = ((1u64 << j) - 1) as f64 * family.support_length() as f64 + 1.0;
    let mut weights = vec![0.0; PANELS * ORDER];
    let mut basis = vec![0.0; ORDER];
    for k in 0..PANELS {
        let (a, b) = panel(k);
        // Sub-panels no wider than half the shortest period of |𝓗_j|².
        let m = ((b - a) * support / PI).ceil().max(1.0) as usize;
        let h = (b - a) / m as f64;
        let out = &mut weights[k * ORDER..(k + 1) * ORDER];
        for s in 0..m {
            let lo = a + s as f64 * h;
            for (t, w) in gx.iter().zip(&gw) {
                let x = lo + 0.5 * h * (t + 1.0);
                let p = transfer_power_at(j, family, x) * w * 0.5 * h;
                lagrange_basis(&nodes.t, &nodes.bary, 2.0 * (x - a) / (b - a) - 1.0, &mut basis);
                for (o, l) in out.iter_mut().zip(&basis) {
                    *o += p * l;
                }
            }
        }
    }
    let n = family.n_psi() as i32;
    let binom: f64 = (0..n - 1).map(|i| (2 * n - 1 - i) as f64 / (i + 1) as f64).product();
    let c0 = 2f64.powi(j as i32) * 2f64.powi(2 * n * (j as i32 - 2)) * binom;
    OctaveWeights { weights, c0 }
}

type PowerCache = Mutex<HashMap<(usize, u32, usize), Arc<Vec<f64>>>>;

fn midpoint_power(family: &WaveletFamily, j: u32, cells: usize) -> Result<Arc<Vec<f64>>> {
    static CACHE: OnceLock<PowerCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (family.n_psi(), j, cells);
    if let Some(p) = cache.lock().expect("power cache poisoned").get(&key) {
        return Ok(Arc::clone(p));
    }
    let taps = equivalent_filter(j, family)?.taps;
    let p = Arc::new(transfer_power_of(&taps, cells)?);
    Ok(cache.lock().expect("power cache poisoned").entry(key).or_insert(p).clone())
}

/// Evaluates wavelet spectra for one filter bank and quadrature configuration.
#[derive(Debug, Clone)]
pub struct SpectrumModel {
    family: WaveletFamily,
    quad: QuadratureConfig,
}

impl SpectrumModel {
    pub fn new(family: WaveletFamily, quad: QuadratureConfig) -> Self {
        Self { family, quad }
    }

    pub fn family(&self) -> &WaveletFamily {
        &self.family
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    /// `∫_{-π}^{π} |𝓗_j(x)|² Σ_ℓ (λ² + (x + 2πℓ)²)^{-(H+½)} dx` for each octave.
    ///
    /// `λ = 0` gives the fBm kernel `|x + 2πℓ|^{-(2H+1)}`, which needs `H < N_ψ`.
    pub fn kernel_integrals(&self, hurst: f64, lambda: f64, octaves: &[u32]) -> Result<Vec<f64>> {
        if !(hurst > 0.0 && hurst.is_finite()) || !(lambda >= 0.0 && lambda.is_finite()) {
            return domain(format!("kernel needs H > 0 and λ >= 0, got ({hurst}, {lambda})"));
        }
        if lambda == 0.0 && hurst >= self.family.n_psi() as f64 {
            return domain("the fBm kernel is not integrable against this wavelet");
        }
        if let Some(&j) = octaves.iter().find(|&&j| j == 0 || j > 40) {
            return domain(format!("octave {j} outside 1..=40"));
        }
        if self.quad.alias_truncation == 0 {
            return domain("alias truncation must be at least 1");
        }
        let kernel = Kernel { a: hurst + 0.5, lam: lambda };
        match self.quad.rule {
            QuadratureRule::Graded => Ok(self.graded(kernel, octaves)),
            QuadratureRule::Midpoint => {
                octaves.iter().map(|&j| self.midpoint(kernel, j)).collect()
            }
        }
    }

    fn graded(&self, kernel: Kernel, octaves: &[u32]) -> Vec<f64> {
        let nodes = graded_nodes();
        let (l, mode) = (self.quad.alias_truncation, self.quad.tail);
        let aliases = Chebyshev::fit(0.0, PI, CHEB_POINTS, |x| kernel.aliases(x, l, mode));
        let f: Vec<f64> = nodes.x.iter().map(|&x| kernel.g(x) + aliases.eval(x)).collect();

        let delta = PI * 2f64.powi(-(PANELS as i32));
        let two_n = 2.0 * self.family.n_psi() as f64;
        let a0 = aliases.eval(0.0);
        let near_zero = if kernel.lam > 0.0 {
            (kernel.g(0.0) + a0) * delta.powf(two_n + 1.0) / (two_n + 1.0)
        } else {
            let p = two_n - 2.0 * kernel.a + 1.0;
            delta.powf(p) / p + a0 * delta.powf(two_n + 1.0) / (two_n + 1.0)
        };

        octaves
            .iter()
            .map(|&j| {
                let w = octave_weights(&self.family, j);
                let body: f64 = w.weights.iter().zip(&f).map(|(w, f)| w * f).sum();
                2.0 * (body + w.c0 * near_zero)
            })
            .collect()
    }

    fn midpoint(&self, kernel: Kernel, j: u32) -> Result<f64> {
        let len = ((1usize << j) - 1) * self.family.support_length() + 1;
        let cells = self.quad.midpoint_cells(j, len);
        let power = midpoint_power(&self.family, j, cells)?;
        let h = TWO_PI / cells as f64;
        let (l, mode) = (self.quad.alias_truncation, self.quad.tail);
        // Kernel values are symmetric about 0; the mesh is too.
        let sum: f64 = power
            .iter()
            .enumerate()
            .map(|(k, p)| p * kernel.full(-PI + (k as f64 + 0.5) * h, l, mode))
            .sum();
        Ok(sum * h)
    }

    /// `E d²(2^j, 0)` of tfBm for each octave. `λ = 0` is delegated to [`Self::fbm_spectra`].
    pub fn tfbm_spectra(&self, params: &TfbmParams, octaves: &[u32]) -> Result<Vec<f64>> {
        if params.is_fbm() {
            return self.fbm_spectra(&params.fbm(), octaves);
        }
        let pref = params.sigma2 * gamma(params.hurst + 0.5).powi(2) / TWO_PI;
        let mut v = self.kernel_integrals(params.hurst, params.lambda, octaves)?;
        v.iter_mut().for_each(|x| *x *= pref);
        Ok(v)
    }

    /// `E d²(2^j, 0)` of fBm for each octave.
    pub fn fbm_spectra(&self, params: &FbmParams, octaves: &[u32]) -> Result<Vec<f64>> {
        let c = fbm_constant(params.hurst);
        let pref = params.sigma2 / (c * c);
        let mut v = self.kernel_integrals(params.hurst, 0.0, octaves)?;
        v.iter_mut().for_each(|x| *x *= pref);
        Ok(v)
    }

    /// Regression targets `η_j = log₂ E d²(2^j, 0) + B(j)` (bias term optional).
    pub fn eta(
        &self,
        params: &TfbmParams,
        octaves: &[u32],
        counts: &[usize],
        bias_correct: bool,
    ) -> Result<Vec<f64>> {
        let s = self.tfbm_spectra(params, octaves)?;
        with_bias(s, counts, bias_correct)
    }

    /// fBm regression targets `η̃_j`.
    pub fn eta_fbm(
        &self,
        params: &FbmParams,
        octaves: &[u32],
        counts: &[usize],
        bias_correct: bool,
    ) -> Result<Vec<f64>> {
        let s = self.fbm_spectra(params, octaves)?;
        with_bias(s, counts, bias_correct)
    }
}

fn with_bias(spectra: Vec<f64>, counts: &[usize], bias_correct: bool) -> Result<Vec<f64>> {
    if bias_correct && counts.len() != spectra.len() {
        return domain("one coefficient count per octave is needed for the bias term");
    }
    spectra
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(s.log2() + if bias_correct { bias_term(counts[i])? } else { 0.0 }))
        .collect()
}

/// `E d²(2^j, 0)` of tfBm at a single octave.
pub fn tfbm_wavelet_spectrum(
    j: u32,
    params: &TfbmParams,
    family: &WaveletFamily,
    quad: &QuadratureConfig,
) -> Result<f64> {
    if params.is_fbm() {
        return domain("the tfBm spectrum needs λ > 0; use fbm_wavelet_spectrum");
    }
    Ok(SpectrumModel::new(family.clone(), *quad).tfbm_spectra(params, &[j])?[0])
}

/// `E d²(2^j, 0)` of fBm at a single octave.
pub fn fbm_wavelet_spectrum(
    j: u32,
    params: &FbmParams,
    family: &WaveletFamily,
    quad: &QuadratureConfig,
) -> Result<f64> {
    Ok(SpectrumModel::new(family.clone(), *quad).fbm_spectra(params, &[j])?[0])
}

/// Harmonizable spectral density `g(x) = Γ²(H+½)σ² / (2π (λ² + x²)^{H+½})`.
pub fn g_density(x: f64, params: &TfbmParams) -> Result<f64> {
    if params.is_fbm() {
        return domain("g needs λ > 0");
    }
    let a = params.hurst + 0.5;
    Ok(gamma(a).powi(2) * params.sigma2 / TWO_PI * (params.lambda.powi(2) + x * x).powf(-a))
}

/// Large-octave limit `Σ_ℓ σ²Γ²(H+½) (λ² + (2πℓ)²)^{-(H+½)}`, summed over
/// `|ℓ| <= l` plus the chosen tail correction.
pub fn tfbm_spectrum_limit(params: &TfbmParams, l: usize, tail: TailCorrection) -> Result<f64> {
    if params.is_fbm() {
        return domain("the limit is finite only for λ > 0");
    }
    let kernel = Kernel { a: params.hurst + 0.5, lam: params.lambda };
    Ok(params.sigma2 * gamma(params.hurst + 0.5).powi(2) * kernel.full(0.0, l, tail))
}

/// `C(H) = √(π / (H Γ(2H) sin(πH)))`, the fBm normalising constant.
pub fn fbm_constant(hurst: f64) -> f64 {
    (PI / (hurst * gamma(2.0 * hurst) * (PI * hurst).sin())).sqrt()
}

/// Bias of `log₂` of a mean of `n_j` squared Gaussians: `Ψ(n_j/2)/ln 2 - log₂(n_j/2)`.
pub fn bias_term(n_j: usize) -> Result<f64> {
    if n_j == 0 {
        return Err(Error::InsufficientData("bias term needs n_j >= 1".into()));
    }
    let half = n_j as f64 / 2.0;
    Ok(digamma(half)? / LN_2 - half.log2())
}

/// `|ψ̂(x)|² = ½|V(x/2)|² Π_{p=2}^{depth} ½|U(x/2^p)|²`.
pub fn psi_hat_power(x: f64, family: &WaveletFamily, depth: u32) -> f64 {
    let mut p = 0.5 * family.highpass_power(0.5 * x);
    let mut y = 0.25 * x;
    for _ in 2..=depth {
        p *= 0.5 * family.lowpass_power(y);
        y *= 0.5;
    }
    p
}

/// Depth of the infinite product used for `ψ̂`.
pub const PSI_HAT_DEPTH: u32 = 25;

/// Continuous-time wavelet spectrum
/// `σ²Γ²(H+½)/(2π) ∫_ℝ (λ² + (x/2^j)²)^{-(H+½)} |ψ̂(x)|² dx`.
pub fn continuous_tfbm_spectrum(j: u32, params: &TfbmParams, family: &WaveletFamily) -> Result<f64> {
    if params.is_fbm() {
        return domain("the continuous tfBm spectrum needs λ > 0");
    }
    let a = params.hurst + 0.5;
    let scale = 2f64.powi(-(j as i32));
    let lam2 = params.lambda * params.lambda;
    let f = |x: f64| {
        let u = x * scale;
        (lam2 + u * u).powf(-a) * psi_hat_power(x, family, PSI_HAT_DEPTH)
    };
    let (gx, gw) = gauss_legendre(20);
    let gauss = |lo: f64, hi: f64| -> f64 {
        let h = 0.5 * (hi - lo);
        gx.iter().zip(&gw).map(|(t, w)| w * f(lo + h * (t + 1.0))).sum::<f64>() * h
    };
    // Dyadic panels towards the origin, where |ψ̂|² vanishes like x^{2N}.
    let mut total: f64 = (0..60)
        .map(|k| {
            let hi = TWO_PI * 2f64.powi(-k);
            gauss(0.5 * hi, hi)
        })
        .sum();
    // Blocks [2π 2^b, 2π 2^{b+1}] with panels of width at most π/N_ψ.
    let width = PI / family.n_psi() as f64;
    let mut prev = f64::NAN;
    for b in 0..40 {
        let lo = TWO_PI * 2f64.powi(b);
        let hi = 2.0 * lo;
        let m = ((hi - lo) / width).ceil() as usize;
        let h = (hi - lo) / m as f64;
        let block: f64 = (0..m).map(|i| gauss(lo + i as f64 * h, lo + (i + 1) as f64 * h)).sum();
        total += block;
        if b >= 3 && block < 1e-10 * total {
            // The envelope decays geometrically from block to block.
            let r = block / prev;
            if r > 0.0 && r < 0.9 {
                total += block * r / (1.0 - r);
            }
            break;
        }
        prev = block;
    }
    Ok(2.0 * params.sigma2 * gamma(a).powi(2) / TWO_PI * total)
}

/// A table of spectrum values over octaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub model: SpectrumKind,
    pub octaves: Vec<u32>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    Tfbm,
    Fbm,
    ContinuousTfbm,
}

impl std::fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpectrumKind::Tfbm => "tfbm",
            SpectrumKind::Fbm => "fbm",
            SpectrumKind::ContinuousTfbm => "continuous-tfbm",
        })
    }
}
