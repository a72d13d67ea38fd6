//! Tempered fractional Brownian motion and its increments.
//!
//! For `λ > 0` the process has `Var B(t) = σ² C_t² |t|^{2H}` with
//!
//! ```text
//! C_t² = 2Γ(2H) / (2λ|t|)^{2H} - 2Γ(H+½)/√π · K_H(λ|t|) / (2λ|t|)^H
//! ```
//!
//! and covariance `½σ²[C_t²|t|^{2H} + C_s²|s|^{2H} - C_{t-s}²|t-s|^{2H}]`.
//! Setting `λ = 0` selects ordinary fractional Brownian motion.

use crate::error::{domain, Result};
use crate::special::{bessel_k_scaled, gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters `θ = (H, λ, σ²)` of a tempered fractional Brownian motion.
///
/// `lambda == 0` is allowed and means ordinary fBm (then `H` must lie in `(0, 1)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfbmParams {
    pub hurst: f64,
    pub lambda: f64,
    pub sigma2: f64,
}

/// Parameters of fractional Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbmParams {
    pub hurst: f64,
    pub sigma2: f64,
}

impl TfbmParams {
    pub fn new(hurst: f64, lambda: f64, sigma2: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst.is_finite()) {
            return domain(format!("H must be positive and finite, got {hurst}"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return domain(format!("lambda must be non-negative and finite, got {lambda}"));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return domain(format!("sigma2 must be positive and finite, got {sigma2}"));
        }
        if lambda == 0.0 && hurst >= 1.0 {
            return domain(format!("fBm (lambda = 0) needs H in (0, 1), got {hurst}"));
        }
        Ok(Self { hurst, lambda, sigma2 })
    }

    /// True when the tempering is switched off.
    pub fn is_fbm(&self) -> bool {
        self.lambda == 0.0
    }

    /// The fBm with the same `H` and `σ²`.
    pub fn fbm(&self) -> FbmParams {
        FbmParams { hurst: self.hurst, sigma2: self.sigma2 }
    }
}

impl FbmParams {
    pub fn new(hurst: f64, sigma2: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return domain(format!("fBm needs H in (0, 1), got {hurst}"));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return domain(format!("sigma2 must be positive and finite, got {sigma2}"));
        }
        Ok(Self { hurst, sigma2 })
    }
}

/// Either flavour of the process, for code that handles both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Process {
    Tfbm(TfbmParams),
    Fbm(FbmParams),
}

impl Process {
    /// Autocovariance of the unit-spaced increments at lag `h`.
    pub fn acvf(&self, h: i64) -> f64 {
        match self {
            Process::Tfbm(p) => tfgn_acvf(h, p),
            Process::Fbm(p) => fbm_acvf(h, p),
        }
    }

    pub fn cov(&self, s: f64, t: f64) -> f64 {
        match self {
            Process::Tfbm(p) => tfbm_cov(s, t, p),
            Process::Fbm(p) => fbm_cov(s, t, p),
        }
    }

    pub fn hurst(&self) -> f64 {
        match self {
            Process::Tfbm(p) => p.hurst,
            Process::Fbm(p) => p.hurst,
        }
    }
}

impl From<TfbmParams> for Process {
    fn from(p: TfbmParams) -> Self {
        if p.is_fbm() {
            Process::Fbm(p.fbm())
        } else {
            Process::Tfbm(p)
        }
    }
}

impl From<FbmParams> for Process {
    fn from(p: FbmParams) -> Self {
        Process::Fbm(p)
    }
}

/// Below this value of `λ|t|` the power series is used for `C_t²`.
const SERIES_CUTOFF: f64 = 1.0;

/// `C_t²` evaluated by its power series in `z = λ|t|`.
///
/// Avoids the cancellation between the two terms of the closed form at small
/// `z`. Valid for `H` in `(0, 1)` away from the endpoints.
fn ct_squared_series(z: f64, h: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut t1 = 1.0 / gamma(1.0 + h);
    let mut s1 = t1;
    let mut t2 = q / gamma(2.0 - h);
    let mut s2 = t2;
    for k in 1..200 {
        let k = k as f64;
        t1 *= q / (k * (k + h));
        t2 *= q / ((k + 1.0) * (k + 1.0 - h));
        s1 += t1;
        s2 += t2;
        if t1 <= 1e-17 * s1 && t2.abs() <= 1e-17 * s2.abs() {
            break;
        }
    }
    let pref = gamma(h + 0.5) * PI.sqrt() / (PI * h).sin();
    pref * ((-2.0 * h * 2f64.ln()).exp() * s1 - (-2.0 * h * z.ln()).exp() * s2)
}

fn use_series(z: f64, h: f64) -> bool {
    z < SERIES_CUTOFF && h > 0.02 && h < 0.98
}

/// `|t|^H K_H(λ|t|)` divided by `exp(-λ|t|)`.
fn phi_scaled(t: f64, h: f64, lambda: f64) -> f64 {
    let t = t.abs();
    t.powf(h) * bessel_k_scaled(h, lambda * t).expect("positive argument")
}

/// `C_t² |t|^{2H}`, i.e. `Var B(t) / σ²`; zero at `t = 0`.
pub fn scaled_variance(t: f64, p: &TfbmParams) -> f64 {
    let t = t.abs();
    if t == 0.0 {
        return 0.0;
    }
    let h = p.hurst;
    if p.is_fbm() {
        return t.powf(2.0 * h);
    }
    let z = p.lambda * t;
    if use_series(z, h) {
        return ct_squared_series(z, h) * t.powf(2.0 * h);
    }
    let two_l = 2.0 * p.lambda;
    let c0 = 2.0 * gamma(2.0 * h) * two_l.powf(-2.0 * h);
    let kappa = 2.0 * gamma(h + 0.5) / PI.sqrt() * two_l.powf(-h);
    let k = bessel_k_scaled(h, z).expect("positive argument");
    // |t|^H K_H(z) in log space so that large z underflows cleanly to zero.
    let second = kappa * (h * t.ln() + k.ln() - z).exp();
    c0 - second
}

/// The tempering factor `C_t²`. Needs `λ > 0` and `t != 0`.
pub fn ct_squared(t: f64, p: &TfbmParams) -> Result<f64> {
    if t == 0.0 || !t.is_finite() {
        return domain(format!("C_t^2 needs finite t != 0, got {t}"));
    }
    if p.is_fbm() {
        return domain("C_t^2 needs lambda > 0");
    }
    let z = p.lambda * t.abs();
    if use_series(z, p.hurst) {
        return Ok(ct_squared_series(z, p.hurst));
    }
    Ok(scaled_variance(t, p) / t.abs().powf(2.0 * p.hurst))
}

/// Covariance `Cov(B(s), B(t))` of tfBm; falls back to fBm when `λ = 0`.
pub fn tfbm_cov(s: f64, t: f64, p: &TfbmParams) -> f64 {
    0.5 * p.sigma2 * (scaled_variance(t, p) + scaled_variance(s, p) - scaled_variance(t - s, p))
}

/// Covariance of fBm, `½σ²(|t|^{2H} + |s|^{2H} - |t-s|^{2H})`.
pub fn fbm_cov(s: f64, t: f64, p: &FbmParams) -> f64 {
    let e = 2.0 * p.hurst;
    0.5 * p.sigma2 * (t.abs().powf(e) + s.abs().powf(e) - (t - s).abs().powf(e))
}

/// Autocovariance of tempered fractional Gaussian noise (unit-spaced increments of tfBm).
pub fn tfgn_acvf(h: i64, p: &TfbmParams) -> f64 {
    if p.is_fbm() {
        return fbm_acvf(h, &p.fbm());
    }
    let h = h.unsigned_abs() as f64;
    if h == 0.0 {
        return p.sigma2 * scaled_variance(1.0, p);
    }
    let hh = p.hurst;
    let lam = p.lambda;
    if lam * (h - 1.0) < SERIES_CUTOFF || (h == 1.0) {
        let f = |t: f64| scaled_variance(t, p);
        return 0.5 * p.sigma2 * (f(h + 1.0) + f(h - 1.0) - 2.0 * f(h));
    }
    // Second difference of |t|^H K_H(λt), with the common factor e^{-λh} pulled out.
    let kappa = 2.0 * gamma(hh + 0.5) / PI.sqrt() * (2.0 * lam).powf(-hh);
    let diff = 2.0 * phi_scaled(h, hh, lam)
        - phi_scaled(h + 1.0, hh, lam) * (-lam).exp()
        - phi_scaled(h - 1.0, hh, lam) * lam.exp();
    0.5 * p.sigma2 * kappa * diff * (-lam * h).exp()
}

/// Leading term of the tfGn autocovariance at large lags,
/// `-σ²Γ(H+½)(e^{-λ}+e^{λ}-2)/(2λ)^{H+½} · h^{H-½} e^{-λh}`.
///
/// The sign is negative: the increments of tfBm have zero spectral mass at the
/// origin, so their autocovariances sum to zero and the tail lies below zero.
/// The first correction is of relative order `1/h` (about 2% at `h = 50` for
/// `H = λ = 0.3`).
pub fn tfgn_acvf_asymptote(h: f64, p: &TfbmParams) -> Result<f64> {
    if p.is_fbm() {
        return domain("the tempered asymptote needs lambda > 0");
    }
    if !(h > 0.0) {
        return domain(format!("the asymptote needs h > 0, got {h}"));
    }
    let (hh, lam) = (p.hurst, p.lambda);
    let c = p.sigma2 * gamma(hh + 0.5) * (2.0 * lam.cosh() - 2.0) * (2.0 * lam).powf(-hh - 0.5);
    Ok(-c * ((hh - 0.5) * h.ln() - lam * h).exp())
}

/// Autocovariance of fractional Gaussian noise.
pub fn fbm_acvf(h: i64, p: &FbmParams) -> f64 {
    let h = h.unsigned_abs() as f64;
    let e = 2.0 * p.hurst;
    if h < 64.0 {
        return 0.5 * p.sigma2 * ((h + 1.0).powf(e) + (h - 1.0).abs().powf(e) - 2.0 * h.powf(e));
    }
    // σ² h^{2H} Σ_{k≥1} binom(2H, 2k) h^{-2k}, free of cancellation at large lags.
    let x = 1.0 / (h * h);
    let mut coef = e * (e - 1.0) / 2.0;
    let mut term = coef * x;
    let mut sum = term;
    for k in 2..40 {
        let k = k as f64;
        coef *= (e - 2.0 * k + 2.0) * (e - 2.0 * k + 1.0) / ((2.0 * k - 1.0) * (2.0 * k));
        term = coef * x.powi(k as i32);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    p.sigma2 * h.powf(e) * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tf(h: f64, l: f64, s: f64) -> TfbmParams {
        TfbmParams::new(h, l, s).unwrap()
    }

    #[test]
    fn ct_squared_reference_values() {
        // 50-digit values of the closed form.
        let cases = [
            (1.0, 0.5, 1.0, 0.632_120_558_828_557_678_4),
            (1.0, 0.3, 0.5, 1.695_597_710_586_430_730),
            (2.0, 0.8, 0.1, 0.575_151_699_287_984_844_1),
            (0.3 / 0.35, 0.35, 0.35, 1.424_901_670_884_554_305),
            (1e-4 / 0.8, 0.8, 0.8, 0.940_007_637_528_987_043_3),
            (0.9, 0.15, 1.0, 4.313_275_201_793_076_994),
            (1.0, 0.03, 0.5, 30.543_667_783_594_063_04),
        ];
        for (t, h, l, want) in cases {
            let got = ct_squared(t, &tf(h, l, 1.0)).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "t={t} H={h} λ={l}: {got} vs {want}");
        }
    }

    #[test]
    fn series_and_closed_form_agree_where_both_are_accurate() {
        for &h in &[0.1, 0.35, 0.5, 0.65, 0.9] {
            for &z in &[0.2, 0.5, 0.99] {
                let s = ct_squared_series(z, h);
                let p = tf(h, z, 1.0);
                let two_l: f64 = 2.0 * z;
                let closed = 2.0 * gamma(2.0 * h) * two_l.powf(-2.0 * h)
                    - 2.0 * gamma(h + 0.5) / PI.sqrt() * crate::special::bessel_k(h, z).unwrap()
                        * two_l.powf(-h);
                assert!(((s - closed) / closed).abs() < 1e-12, "H={h} z={z}");
                assert!((ct_squared(1.0, &p).unwrap() - closed).abs() < 1e-12 * closed);
            }
        }
    }

    #[test]
    fn half_hurst_is_exponential() {
        // H = 1/2: C_t² t = (1 - e^{-λt}) / λ.
        for &(t, l) in &[(1e-6, 1.0), (0.5, 0.1), (3.0, 2.0), (200.0, 0.3)] {
            let v = scaled_variance(t, &tf(0.5, l, 1.0));
            let want = -(-l * t).exp_m1() / l;
            assert!(((v - want) / want).abs() < 1e-13, "t={t} λ={l}");
        }
    }

    #[test]
    fn acvf_paths_agree() {
        // The Bessel-difference branch and the variance-difference branch overlap
        // for moderate z.
        let p = tf(0.35, 0.5, 2.0);
        for h in 3..12 {
            let f = |t: f64| scaled_variance(t, &p);
            let hf = h as f64;
            let direct = 0.5 * p.sigma2 * (f(hf + 1.0) + f(hf - 1.0) - 2.0 * f(hf));
            let got = tfgn_acvf(h, &p);
            assert!((got - direct).abs() < 1e-12 * direct.abs().max(1e-3), "h={h}");
        }
    }

    #[test]
    fn acvf_is_even_and_matches_covariance() {
        let p = tf(0.65, 0.1, 1.5);
        for h in 0..30 {
            assert_eq!(tfgn_acvf(h, &p), tfgn_acvf(-h, &p));
            let k = 7.0;
            let hf = h as f64;
            let c = tfbm_cov(k + hf + 1.0, k + 1.0, &p) - tfbm_cov(k + hf + 1.0, k, &p)
                - tfbm_cov(k + hf, k + 1.0, &p)
                + tfbm_cov(k + hf, k, &p);
            assert!((c - tfgn_acvf(h, &p)).abs() < 1e-10, "h={h}");
        }
    }

    #[test]
    fn acvf_decays_to_asymptote() {
        let p = tf(0.3, 0.3, 1.0);
        // Ratio 1.0054104 at h = 200 from a 50-digit evaluation of the covariance.
        let r = tfgn_acvf(200, &p) / tfgn_acvf_asymptote(200.0, &p).unwrap();
        assert!((r - 1.005_410_442).abs() < 1e-6, "{r}");
        assert!(tfgn_acvf(200, &p) < 0.0);
        // Far lags underflow gracefully.
        assert_eq!(tfgn_acvf(100_000, &p), 0.0);
    }

    #[test]
    fn fbm_acvf_series_matches_direct() {
        for &h in &[0.15, 0.5, 0.85] {
            let p = FbmParams::new(h, 1.0).unwrap();
            for lag in [64i64, 100, 1000] {
                let x = lag as f64;
                let e = 2.0 * h;
                let direct = 0.5 * ((x + 1.0).powf(e) + (x - 1.0).powf(e) - 2.0 * x.powf(e));
                let got = fbm_acvf(lag, &p);
                // The direct form loses about x² ulps to cancellation.
                assert!((got - direct).abs() < 1e-15 * x * x, "H={h} lag={lag}");
            }
            if h == 0.5 {
                assert!(fbm_acvf(1000, &p).abs() < 1e-20);
            }
        }
    }

    #[test]
    fn lambda_zero_delegates() {
        let p = tf(0.7, 0.0, 2.0);
        assert_eq!(tfbm_cov(3.0, 5.0, &p), fbm_cov(3.0, 5.0, &p.fbm()));
        assert_eq!(tfgn_acvf(4, &p), fbm_acvf(4, &p.fbm()));
        assert!(ct_squared(1.0, &p).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(TfbmParams::new(0.0, 0.1, 1.0).is_err());
        assert!(TfbmParams::new(0.5, -0.1, 1.0).is_err());
        assert!(TfbmParams::new(0.5, 0.1, 0.0).is_err());
        assert!(TfbmParams::new(1.5, 0.0, 1.0).is_err());
        assert!(TfbmParams::new(1.5, 0.1, 1.0).is_ok());
        assert!(FbmParams::new(1.2, 1.0).is_err());
    }
}
