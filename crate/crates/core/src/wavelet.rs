//! Orthogonal wavelet filter banks, the Mallat pyramid, and wavelet variances.
//!
//! Conventions: detail and approximation coefficients are full-overlap
//! ("valid") correlations followed by decimation,
//!
//! ```text
//! a_{j+1}[k] = Σ_m u[m] a_j[2k + m],    d_{j+1}[k] = Σ_m v[m] a_j[2k + m],
//! ```
//!
//! starting from `a_0` = the observed series. Octave `j` details are therefore
//! `d_j[k] = Σ_m h_j[m] x[2^j k + m]` for the equivalent filter `h_j`.

use crate::error::{Error, Result};
use crate::symlets::SYMLETS;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A least-asymmetric Daubechies filter bank with `n_psi` vanishing moments.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFamily {
    n_psi: usize,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

/// Builds the filter bank with `n_psi` vanishing moments (`1..=10`; 1 is Haar).
pub fn make_family(n_psi: usize) -> Result<WaveletFamily> {
    WaveletFamily::new(n_psi)
}

impl WaveletFamily {
    pub fn new(n_psi: usize) -> Result<Self> {
        if !(1..=SYMLETS.len()).contains(&n_psi) {
            return Err(Error::UnsupportedVanishingMoments(n_psi));
        }
        let lowpass = SYMLETS[n_psi - 1].to_vec();
        let len = lowpass.len();
        // Quadrature mirror: v_k = (-1)^k u_{L-1-k}.
        let highpass = (0..len)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * lowpass[len - 1 - k])
            .collect();
        Ok(Self { n_psi, lowpass, highpass })
    }

    pub fn n_psi(&self) -> usize {
        self.n_psi
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    /// Number of filter taps, `2 N_ψ`.
    pub fn taps(&self) -> usize {
        self.lowpass.len()
    }

    /// Support length `T` of the scaling function, `2 N_ψ - 1`.
    pub fn support_length(&self) -> usize {
        self.taps() - 1
    }

    /// `|U(x)|²` for the lowpass transfer function `U(x) = Σ u_k e^{ikx}`.
    ///
    /// Evaluated from the closed form `2 cos^{2N}(x/2) P(sin²(x/2))` with
    /// `P(y) = Σ_{k<N} C(N-1+k, k) y^k`, which stays accurate where the tap
    /// sum would cancel.
    pub fn lowpass_power(&self, x: f64) -> f64 {
        let (s, c) = (0.5 * x).sin_cos();
        2.0 * (c * c).powi(self.n_psi as i32) * self.daubechies_p(s * s)
    }

    /// `|V(x)|² = 2 - |U(x)|²`, in the closed form `2 sin^{2N}(x/2) P(cos²(x/2))`.
    pub fn highpass_power(&self, x: f64) -> f64 {
        let (s, c) = (0.5 * x).sin_cos();
        2.0 * (s * s).powi(self.n_psi as i32) * self.daubechies_p(c * c)
    }

    fn daubechies_p(&self, y: f64) -> f64 {
        let n = self.n_psi;
        let mut coef = 1.0;
        let mut sum = 0.0;
        let mut yk = 1.0;
        for k in 0..n {
            if k > 0 {
                coef *= (n - 1 + k) as f64 / k as f64;
                yk *= y;
            }
            sum += coef * yk;
        }
        sum
    }
}

/// Number of border-free detail coefficients at octave `j`,
/// `⌊2^{-j}(n + 1 - T) - T⌋` with `T` the scaling-function support length.
/// Negative values mean the octave is unavailable.
pub fn border_free_count(n: usize, j: u32, family: &WaveletFamily) -> i64 {
    let t = family.support_length() as f64;
    ((n as f64 + 1.0 - t) / 2f64.powi(j as i32) - t).floor() as i64
}

/// Largest octave with at least two border-free coefficients (0 if none).
pub fn max_octave(n: usize, family: &WaveletFamily) -> u32 {
    let mut j = 0;
    while border_free_count(n, j + 1, family) >= 2 {
        j += 1;
    }
    j
}

/// Detail and approximation coefficients for octaves `1..=j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidOutput {
    n: usize,
    details: Vec<Vec<f64>>,
    approximations: Vec<Vec<f64>>,
}

impl PyramidOutput {
    /// Length of the analysed series.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j_max(&self) -> u32 {
        self.details.len() as u32
    }

    /// Border-free details `d(2^j, ·)` at octave `j` (`1..=j_max`).
    pub fn details(&self, j: u32) -> &[f64] {
        &self.details[j as usize - 1]
    }

    /// Approximations at octave `j` (`0..=j_max`), untrimmed. Octave 0 is the input.
    pub fn approximations(&self, j: u32) -> &[f64] {
        &self.approximations[j as usize]
    }
}

fn analysis_step(a: &[f64], filter: &[f64]) -> Vec<f64> {
    let l = filter.len();
    if a.len() < l {
        return Vec::new();
    }
    let out = (a.len() - l) / 2 + 1;
    (0..out)
        .map(|k| filter.iter().zip(&a[2 * k..2 * k + l]).map(|(f, x)| f * x).sum())
        .collect()
}

/// Runs the pyramid on `series` down to octave `j_max`, keeping the
/// border-free details of each octave.
pub fn pyramid(series: &[f64], family: &WaveletFamily, j_max: u32) -> Result<PyramidOutput> {
    let n = series.len();
    if j_max == 0 {
        return Err(Error::Domain("pyramid needs j_max >= 1".into()));
    }
    let nj = border_free_count(n, j_max, family);
    if nj < 2 {
        return Err(Error::InsufficientData(format!(
            "a series of length {n} has {nj} border-free coefficients at octave {j_max} (need 2)"
        )));
    }
    let mut approximations = Vec::with_capacity(j_max as usize + 1);
    let mut details = Vec::with_capacity(j_max as usize);
    approximations.push(series.to_vec());
    for j in 1..=j_max {
        let prev = &approximations[j as usize - 1];
        let mut d = analysis_step(prev, family.highpass());
        let a = analysis_step(prev, family.lowpass());
        d.truncate(border_free_count(n, j, family) as usize);
        details.push(d);
        approximations.push(a);
    }
    Ok(PyramidOutput { n, details, approximations })
}

/// Composite impulse response of octave `j`: `d_j[k] = Σ_m taps[m] x[2^j k + m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentFilter {
    pub j: u32,
    pub taps: Vec<f64>,
}

fn upsampled_convolve(a: &[f64], filter: &[f64], stride: usize) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + stride * (filter.len() - 1)];
    for (m, &f) in filter.iter().enumerate() {
        for (q, &x) in a.iter().enumerate() {
            out[q + stride * m] += f * x;
        }
    }
    out
}

/// Equivalent filter of octave `j`, composed from the `j` pyramid stages.
/// It has `(2^j - 1)(taps - 1) + 1` coefficients.
pub fn equivalent_filter(j: u32, family: &WaveletFamily) -> Result<EquivalentFilter> {
    if j == 0 {
        return Err(Error::Domain("octaves start at 1".into()));
    }
    let mut low = vec![1.0];
    for i in 0..j - 1 {
        low = upsampled_convolve(&low, family.lowpass(), 1 << i);
    }
    let taps = upsampled_convolve(&low, family.highpass(), 1 << (j - 1));
    Ok(EquivalentFilter { j, taps })
}

/// `|𝓗_j(x)|²` from the product of the two-channel responses,
/// `Π_{i<j-1} |U(2^i x)|² · |V(2^{j-1} x)|²`.
pub fn transfer_power_at(j: u32, family: &WaveletFamily, x: f64) -> f64 {
    let mut p = family.highpass_power(2f64.powi(j as i32 - 1) * x);
    for i in 0..j.saturating_sub(1) {
        p *= family.lowpass_power(2f64.powi(i as i32) * x);
    }
    p
}

/// Midpoints `-π + (k + ½) 2π/m` of the uniform mesh with `m` cells on `[-π, π)`.
pub fn midpoint_mesh(m: usize) -> Vec<f64> {
    let h = 2.0 * PI / m as f64;
    (0..m).map(|k| -PI + (k as f64 + 0.5) * h).collect()
}

/// `|𝓗_j(x)|²` on [`midpoint_mesh`]`(mesh)` by a zero-padded FFT of the taps.
///
/// `mesh` must be a power of two no smaller than the filter length.
pub fn transfer_power(j: u32, family: &WaveletFamily, mesh: usize) -> Result<Vec<f64>> {
    let filter = equivalent_filter(j, family)?;
    transfer_power_of(&filter.taps, mesh)
}

pub(crate) fn transfer_power_of(taps: &[f64], mesh: usize) -> Result<Vec<f64>> {
    if !mesh.is_power_of_two() || mesh < taps.len() {
        return Err(Error::MeshTooCoarse { mesh, support: taps.len() });
    }
    // H(x_k) = Σ_ℓ h_ℓ e^{i x_k ℓ} with x_k = 2π(k + ½)/m - π.
    let shift = PI / mesh as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); mesh];
    for (l, &h) in taps.iter().enumerate() {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        buf[l] = Complex64::from_polar(sign * h, shift * l as f64);
    }
    FftPlanner::new().plan_fft_inverse(mesh).process(&mut buf);
    Ok(buf.into_iter().map(|c| c.norm_sqr()).collect())
}

/// The sample wavelet variance `W(2^j)` of one octave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OctaveVariance {
    pub j: u32,
    pub n_j: usize,
    pub variance: f64,
}

/// Sample wavelet variances over consecutive or arbitrary octaves.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WaveletVariance {
    pub entries: Vec<OctaveVariance>,
}

impl WaveletVariance {
    pub fn new(mut entries: Vec<OctaveVariance>) -> Self {
        entries.sort_by_key(|e| e.j);
        Self { entries }
    }

    pub fn get(&self, j: u32) -> Option<&OctaveVariance> {
        self.entries.iter().find(|e| e.j == j)
    }

    /// `log₂ W(2^j)`, failing for missing or degenerate octaves.
    pub fn log2(&self, j: u32) -> Result<f64> {
        let e = self.get(j).ok_or(Error::MissingOctave(j))?;
        if !(e.variance > 0.0 && e.variance.is_finite()) {
            return Err(Error::DegenerateVariance(j));
        }
        Ok(e.variance.log2())
    }

    pub fn octaves(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.j).collect()
    }

    /// Multiplies every variance by `c` (the effect of scaling the series by `√c`).
    pub fn scaled(&self, c: f64) -> Self {
        let entries =
            self.entries.iter().map(|e| OctaveVariance { variance: e.variance * c, ..*e }).collect();
        Self { entries }
    }
}

/// Details below this fraction of the largest input value are rounding noise.
const ROUNDOFF_FLOOR: f64 = 1e-12;

/// `W(2^j) = n_j^{-1} Σ_k d²(2^j, k)` for every octave of `pyr`.
///
/// An octave whose coefficients are all rounding noise (a constant or, for
/// `N_ψ >= 2`, linear input) gets `W = 0` exactly.
pub fn sample_wavelet_variance(pyr: &PyramidOutput) -> Result<WaveletVariance> {
    let scale = pyr.approximations(0).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut entries = Vec::with_capacity(pyr.j_max() as usize);
    for j in 1..=pyr.j_max() {
        let d = pyr.details(j);
        if d.is_empty() {
            return Err(Error::InsufficientData(format!("octave {j} has no coefficients")));
        }
        let noise = d.iter().all(|x| x.abs() <= ROUNDOFF_FLOOR * scale);
        let variance =
            if noise { 0.0 } else { d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64 };
        entries.push(OctaveVariance { j, n_j: d.len(), variance });
    }
    Ok(WaveletVariance { entries })
}

/// Pyramid plus variances for all octaves up to `j_max` (default: every available octave).
pub fn wavelet_variance(
    series: &[f64],
    family: &WaveletFamily,
    j_max: Option<u32>,
) -> Result<WaveletVariance> {
    let j_max = match j_max {
        Some(j) => j,
        None => max_octave(series.len(), family),
    };
    sample_wavelet_variance(&pyramid(series, family, j_max)?)
}
