#![allow(dead_code)]

use tfbm::model::TfbmParams;

pub const HURST_GRID: [f64; 5] = [0.15, 0.35, 0.5, 0.65, 0.85];
pub const LAMBDA_GRID: [f64; 4] = [0.001, 0.01, 0.1, 1.0];

/// Every (H, λ) pair of the test grid with σ² = 1.
pub fn theta_grid() -> Vec<TfbmParams> {
    HURST_GRID
        .iter()
        .flat_map(|&h| LAMBDA_GRID.iter().map(move |&l| TfbmParams::new(h, l, 1.0).unwrap()))
        .collect()
}

pub fn tf(h: f64, l: f64, s2: f64) -> TfbmParams {
    TfbmParams::new(h, l, s2).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}
