//! Special functions used by the covariance and the bias correction.
//!
//! The gamma function comes from `statrs`. The modified Bessel function of the
//! second kind and the digamma function are implemented here because the crates
//! available either lack real orders or lose accuracy near the origin.

use crate::error::{domain, Error, Result};
use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Taylor coefficients of `1/Γ(z)` about zero, starting at `z^1`.
const RGAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_860_6,
    -0.655_878_071_520_253_881_1,
    -0.042_002_635_034_095_235_53,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_75,
    -0.009_621_971_527_876_973_562,
    0.007_218_943_246_663_099_542,
    -0.001_165_167_591_859_065_112,
    -0.000_215_241_674_114_950_972_8,
    0.000_128_050_282_388_116_186_2,
    -0.000_020_134_854_780_788_238_66,
    -0.000_001_250_493_482_142_670_657,
    0.000_001_133_027_231_981_695_882,
    -2.056_338_416_977_607_103e-7,
    6.116_095_104_481_415_818e-9,
    5.002_007_644_469_222_930e-9,
    -1.181_274_570_487_020_145e-9,
    1.043_426_711_691_100_510e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783e-14,
    -5.348_122_539_423_017_982e-15,
    1.226_778_628_238_260_790e-15,
    -1.181_259_301_697_458_770e-16,
];

/// Returns `(gam1, gam2)` for `|mu| <= 1/2`, where
/// `gam1 = (1/Γ(1-mu) - 1/Γ(1+mu)) / (2 mu)` and
/// `gam2 = (1/Γ(1-mu) + 1/Γ(1+mu)) / 2`.
fn temme_gammas(mu: f64) -> (f64, f64) {
    let m2 = mu * mu;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    // Horner over even and odd coefficient subsequences.
    for k in (0..RGAMMA.len() / 2).rev() {
        g2 = g2 * m2 + RGAMMA[2 * k];
        g1 = g1 * m2 + RGAMMA[2 * k + 1];
    }
    (-g1, g2)
}

/// `K_nu(x) * exp(x)` and `K_{nu+1}(x) * exp(x)` for `|mu| <= 1/2`.
fn bessel_k_pair_scaled(mu: f64, x: f64) -> Result<(f64, f64)> {
    if x <= 2.0 {
        // Temme's series.
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2) = temme_gammas(mu);
        let gampl = gam2 - mu * gam1;
        let gammi = gam2 + mu * gam1;
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu * mu);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical("Bessel K series did not converge".into()));
        }
        let scale = x.exp();
        Ok((sum * scale, sum1 * (2.0 / x) * scale))
    } else {
        // Steed's continued fraction.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu * mu;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical("Bessel K continued fraction did not converge".into()));
        }
        h *= a1;
        let k_mu = (PI / (2.0 * x)).sqrt() / s;
        let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
        Ok((k_mu, k_mu1))
    }
}

/// Exponentially scaled modified Bessel function `exp(x) K_nu(x)`.
///
/// Real order `nu` (the function is even in `nu`) and `x > 0`. Returns
/// `+inf` when the value overflows, which only happens for tiny `x`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("bessel_k requires finite x > 0, got {x}"));
    }
    if !nu.is_finite() {
        return domain(format!("bessel_k requires a finite order, got {nu}"));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k0, mut k1) = bessel_k_pair_scaled(mu, x)?;
    let xi2 = 2.0 / x;
    for i in 1..=(nl as u64) {
        let next = (mu + i as f64) * xi2 * k1 + k0;
        k0 = k1;
        k1 = next;
        if !k0.is_finite() {
            return Ok(f64::INFINITY);
        }
    }
    Ok(if k0.is_nan() { f64::INFINITY } else { k0 })
}

/// Modified Bessel function of the second kind `K_nu(x)` for real `nu` and `x > 0`.
///
/// Underflows to zero for large `x`; use [`bessel_k_scaled`] when the
/// exponential factor is handled by the caller.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let s = bessel_k_scaled(nu, x)?;
    if s.is_infinite() {
        return Ok(s);
    }
    Ok(s * (-x).exp())
}

/// Digamma function `ψ(z)` for `z > 0`.
pub fn digamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("digamma requires finite z > 0, got {z}"));
    }
    let mut z = z;
    let mut acc = 0.0;
    while z < 10.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let r = 1.0 / (z * z);
    // Bernoulli terms B_{2k} / (2k z^{2k}) for k = 1..7.
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0
                        - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    Ok(acc + z.ln() - 0.5 / z - series)
}
