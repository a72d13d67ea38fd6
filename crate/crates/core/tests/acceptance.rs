//! End-to-end acceptance checks. Prints one PASS/FAIL line per check and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};
use tfbm::estimate::{fit_wavelet_variance, EstimateConfig};
use tfbm::harness::{mc_estimate, mc_power, McEstimateSummary};
use tfbm::model::{fbm_cov, tfbm_cov, tfgn_acvf, tfgn_acvf_asymptote, FbmParams, Process, TfbmParams};
use tfbm::simulate::{circulant_eigenvalues, sample_increments, NegativeEigenvaluePolicy, SimulationConfig};
use tfbm::spectrum::{
    fbm_wavelet_spectrum, tfbm_spectrum_limit, tfbm_wavelet_spectrum, QuadratureConfig, SpectrumModel,
    TailCorrection,
};
use tfbm::testkit::{calibrate_tau0, TestConfig};
use tfbm::wavelet::{
    border_free_count, equivalent_filter, transfer_power, transfer_power_at, OctaveVariance,
    WaveletFamily, WaveletVariance,
};

fn tf(h: f64, l: f64, s2: f64) -> TfbmParams {
    TfbmParams::new(h, l, s2).unwrap()
}

fn fam(n: usize) -> WaveletFamily {
    WaveletFamily::new(n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn double_sum(j: u32, family: &WaveletFamily, cov: impl Fn(f64, f64) -> f64) -> f64 {
    let h = equivalent_filter(j, family).unwrap().taps;
    let t0 = 2f64.powi(j as i32) * h.len().div_ceil(1 << j) as f64;
    let mut total = 0.0;
    for (m, a) in h.iter().enumerate() {
        for (mp, b) in h.iter().enumerate() {
            total += a * b * cov(t0 - m as f64, t0 - mp as f64);
        }
    }
    total
}

fn spectral_time_domain_equivalence() -> Outcome {
    let start = Instant::now();
    let quad = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for p in [tf(0.15, 0.3, 1.0), tf(0.65, 0.1, 1.0), tf(0.85, 1.0, 10.0)] {
        let f = FbmParams::new(p.hurst, p.sigma2).unwrap();
        for n_psi in [1, 2] {
            let family = fam(n_psi);
            for j in 1..=6 {
                let s = tfbm_wavelet_spectrum(j, &p, &family, &quad).unwrap();
                worst = worst.max(rel(s, double_sum(j, &family, |a, b| tfbm_cov(a, b, &p))));
                let s = fbm_wavelet_spectrum(j, &f, &family, &quad).unwrap();
                worst = worst.max(rel(s, double_sum(j, &family, |a, b| fbm_cov(a, b, &f))));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-4 && t < Duration::from_secs(120),
        format!("max relative gap {worst:.2e} (< 1e-4), {:.1}s (< 120s)", t.as_secs_f64()),
    )
}

fn exact_spectrum_recovery() -> Outcome {
    let start = Instant::now();
    let fam2 = fam(2);
    let model = SpectrumModel::new(fam2.clone(), QuadratureConfig::default());
    let octaves: Vec<u32> = (1..=12).collect();
    let n = 1 << 16;
    let counts: Vec<usize> = octaves.iter().map(|&j| border_free_count(n, j, &fam2) as usize).collect();
    let mut worst = 0.0f64;
    for theta in [tf(0.15, 0.01, 1.0), tf(0.35, 0.1, 1.0), tf(0.65, 0.1, 1.0), tf(0.85, 1.0, 1.0), tf(0.5, 0.5, 3.0)] {
        let eta = model.eta(&theta, &octaves, &counts, true).unwrap();
        let wv = WaveletVariance::new(
            (0..12).map(|i| OctaveVariance { j: octaves[i], n_j: counts[i], variance: 2f64.powf(eta[i]) }).collect(),
        );
        let t = fit_wavelet_variance(&wv, &EstimateConfig::default()).unwrap().theta_hat;
        for (a, b) in [(t.hurst, theta.hurst), (t.lambda, theta.lambda), (t.sigma2, theta.sigma2)] {
            worst = worst.max((a - b).abs());
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-3 && t < Duration::from_secs(60),
        format!("max componentwise error {worst:.2e} (< 1e-3), {:.1}s (< 60s)", t.as_secs_f64()),
    )
}

fn table_cell(bias_correct: bool) -> McEstimateSummary {
    let cfg = EstimateConfig { bias_correct, ..Default::default() };
    mc_estimate(&tf(0.35, 0.1, 1.0), 1 << 12, 500, 20_240_001, &cfg, None).unwrap()
}

fn table_cell_reproduction(corrected: &McEstimateSummary, elapsed: Duration) -> Outcome {
    let (mh, ml) = (corrected.hurst.mean, corrected.lambda.mean);
    let (sh, sl) = (corrected.hurst.std.unwrap(), corrected.lambda.std.unwrap());
    let checks = [
        (mh - 0.3501).abs() <= 0.005,
        (ml - 0.1002).abs() <= 0.010,
        (sh / 0.0070 - 1.0).abs() <= 0.35,
        (sl / 0.0128 - 1.0).abs() <= 0.35,
    ];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "mean Ĥ {mh:.4} (.3501 ± .005) {}, mean λ̂ {ml:.4} (.1002 ± .010) {}, std Ĥ {sh:.4} (.0070 ± 35%) {}, std λ̂ {sl:.4} (.0128 ± 35%) {}, {:.0}s",
            ok(checks[0]),
            ok(checks[1]),
            ok(checks[2]),
            ok(checks[3]),
            elapsed.as_secs_f64()
        ),
    )
}

fn ok(c: bool) -> &'static str {
    if c {
        "ok"
    } else {
        "out"
    }
}

fn bias_correction_effect(corrected: &McEstimateSummary) -> Outcome {
    let raw = table_cell(false);
    let d = raw.lambda.mean - corrected.lambda.mean;
    outcome(
        d > 0.003,
        format!("mean λ̂ uncorrected {:.4} − corrected {:.4} = {d:.4} (> 0.003)", raw.lambda.mean, corrected.lambda.mean),
    )
}

fn power_reproduction() -> Outcome {
    let start = Instant::now();
    let cfg = TestConfig::default();
    let cells = [(0.85, 0.1, 10, 0.9434, 0.04), (0.15, 0.1, 11, 0.9370, 0.04), (0.85, 0.0001, 10, 0.05, 0.03)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, &(h, l, log_n, want, tol)) in cells.iter().enumerate() {
        let s = mc_power(&tf(h, l, 1.0).into(), 1 << log_n, 500, 20_240_010 + i as u64, &cfg, None).unwrap();
        let good = (s.rate - want).abs() <= tol;
        pass &= good;
        parts.push(format!("(H={h}, λ={l}, n=2^{log_n}) {:.4} ({want} ± {tol}) {}", s.rate, ok(good)));
    }
    parts.push(format!("{:.0}s", start.elapsed().as_secs_f64()));
    outcome(pass, parts.join(", "))
}

fn large_octave_limit() -> Outcome {
    let p = tf(0.5, 0.5, 1.0);
    let s = tfbm_wavelet_spectrum(14, &p, &fam(2), &QuadratureConfig::default()).unwrap();
    let r = s / tfbm_spectrum_limit(&p, 10, TailCorrection::EulerMaclaurin).unwrap();
    outcome((0.99..=1.01).contains(&r), format!("spectrum(14)/limit = {r:.5} ([0.99, 1.01])"))
}

fn power_law_regime() -> Outcome {
    let model = SpectrumModel::new(fam(2), QuadratureConfig::default());
    let s = model.tfbm_spectra(&tf(0.8, 0.001, 1.0), &[3, 4, 5, 6]).unwrap();
    let inc: Vec<f64> = s.windows(2).map(|w| w[1].log2() - w[0].log2()).collect();
    let pass = inc.iter().all(|d| (d - 2.6).abs() <= 0.1);
    outcome(pass, format!("log₂ increments {inc:.4?} (2.6 ± 0.1)"))
}

fn filter_invariants() -> Outcome {
    let (mut norm, mut dc, mut mass) = (0.0f64, 0.0f64, 0.0f64);
    for n_psi in 1..=4 {
        let f = fam(n_psi);
        for j in 1..=12 {
            let h = equivalent_filter(j, &f).unwrap().taps;
            norm = norm.max((h.iter().map(|x| x * x).sum::<f64>() - 1.0).abs());
            dc = dc.max(h.iter().sum::<f64>().abs()).max(transfer_power_at(j, &f, 0.0).sqrt());
            let mesh = (2 * h.len()).next_power_of_two();
            let p = transfer_power(j, &f, mesh).unwrap();
            mass = mass.max((p.iter().sum::<f64>() / mesh as f64 - 1.0).abs());
        }
    }
    outcome(
        norm < 1e-8 && dc < 1e-8 && mass < 1e-8,
        format!("|Σh² − 1| {norm:.1e}, |𝓗(0)| {dc:.1e}, |Parseval − 1| {mass:.1e} (all < 1e-8)"),
    )
}

fn simulation_exactness() -> Outcome {
    let p = tf(0.35, 0.1, 1.0);
    let n = 1 << 16;
    let cfg = SimulationConfig { n, seed: 20_240_009, model: Process::Tfbm(p), negative_eigenvalue_policy: NegativeEigenvaluePolicy::Error };
    let x = sample_increments(&cfg).unwrap();
    let gamma: Vec<f64> = (0..400).map(|h| tfgn_acvf(h, &p)).collect();
    let g = |k: i64| gamma[k.unsigned_abs() as usize];
    let mut worst_z = 0.0f64;
    for h in 0..=20i64 {
        let est: f64 = (0..n - h as usize).map(|t| x[t] * x[t + h as usize]).sum::<f64>() / n as f64;
        let var: f64 = (-300..=300i64).map(|k| g(k).powi(2) + g(k + h) * g(k - h)).sum::<f64>() / n as f64;
        worst_z = worst_z.max(((est - g(h)) / var.sqrt()).abs());
    }
    let mut min_eig = f64::INFINITY;
    for h in [0.15, 0.35, 0.5, 0.65, 0.85] {
        for l in [0.001, 0.01, 0.1, 1.0] {
            let acvf: Vec<f64> = (0..4096).map(|k| tfgn_acvf(k, &tf(h, l, 1.0))).collect();
            match circulant_eigenvalues(&acvf, NegativeEigenvaluePolicy::Error) {
                Ok(e) => {
                    let max = e.iter().cloned().fold(0.0, f64::max);
                    min_eig = min_eig.min(e.iter().cloned().fold(f64::INFINITY, f64::min) / max);
                }
                Err(_) => min_eig = f64::NEG_INFINITY,
            }
        }
    }
    outcome(
        worst_z < 4.0 && min_eig >= -tfbm::simulate::EIGEN_TOL,
        format!("max |z| over lags 0..20 = {worst_z:.2} (< 4), min eigenvalue/max on grid {min_eig:.2e} (>= 0)"),
    )
}

fn semi_long_range_asymptote() -> Outcome {
    let p = tf(0.3, 0.3, 1.0);
    let r = tfgn_acvf(50, &p) / tfgn_acvf_asymptote(50.0, &p).unwrap();
    outcome((0.98..=1.02).contains(&r), format!("γ(50)/asymptote = {r:.5} ([0.98, 1.02])"))
}

fn tau0_calibration() -> Outcome {
    let cfg = TestConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for h in [0.3, 0.5, 0.7] {
        let t = calibrate_tau0(h, 1 << 12, 1000, 20_240_011, &cfg).unwrap();
        let good = (0.07..=0.11).contains(&t);
        pass &= good;
        parts.push(format!("H={h}: {t:.4} {}", ok(good)));
    }
    outcome(pass, format!("{} ([0.07, 0.11])", parts.join(", ")))
}

fn root_n_rate() -> Outcome {
    let start = Instant::now();
    let cfg = EstimateConfig::default();
    let logs: Vec<(f64, f64)> = [12, 14, 16]
        .iter()
        .map(|&k| {
            let s = mc_estimate(&tf(0.35, 0.1, 1.0), 1 << k, 500, 20_240_012, &cfg, None).unwrap();
            (k as f64, s.hurst.std.unwrap().log2())
        })
        .collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let stds: Vec<String> = logs.iter().map(|p| format!("{:.4}", 2f64.powf(p.1))).collect();
    outcome(
        (slope + 0.5).abs() <= 0.1,
        format!("std Ĥ at n = 2^12, 2^14, 2^16: {}; slope {slope:.3} (−0.5 ± 0.1), {:.0}s", stds.join(", "), start.elapsed().as_secs_f64()),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let o = f();
        println!("{} [{id:>2}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };
    run(1, "spectral/time-domain equivalence", &mut spectral_time_domain_equivalence);
    run(2, "exact-spectrum recovery", &mut exact_spectrum_recovery);
    let start = Instant::now();
    let corrected = table_cell(true);
    let elapsed = start.elapsed();
    run(3, "estimator cell (0.35, 0.1, 1), n = 2^12", &mut || table_cell_reproduction(&corrected, elapsed));
    run(4, "bias-correction effect on λ̂", &mut || bias_correction_effect(&corrected));
    run(5, "test power and size", &mut power_reproduction);
    run(6, "large-octave limit", &mut large_octave_limit);
    run(7, "power-law regime", &mut power_law_regime);
    run(8, "filter invariants", &mut filter_invariants);
    run(9, "simulation exactness", &mut simulation_exactness);
    run(10, "semi-long-range asymptote", &mut semi_long_range_asymptote);
    run(11, "τ₀ calibration", &mut tau0_calibration);
    run(12, "√n rate of Ĥ", &mut root_n_rate);
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} of {} passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
