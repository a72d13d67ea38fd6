mod common;

use common::{rel, tf};
use proptest::prelude::*;
use tfbm::estimate::{
    fit, fit_wavelet_variance, identifiability_gram, objective, profile_sigma2, EstimateConfig,
};
use tfbm::harness::mc_estimate;
use tfbm::model::{Process, TfbmParams};
use tfbm::simulate::{sample_path, SimulationConfig};
use tfbm::spectrum::{QuadratureConfig, SpectrumModel};
use tfbm::wavelet::{border_free_count, OctaveVariance, WaveletFamily, WaveletVariance};
use tfbm::Error;

/// `W(2^j) = 2^{η_j(θ)}` for `j = 1..=12`, with the coefficient counts of a length-`n` series.
fn exact_table(theta: &TfbmParams, n: usize, bias: bool) -> WaveletVariance {
    let fam = WaveletFamily::new(2).unwrap();
    let octaves: Vec<u32> = (1..=12).collect();
    let counts: Vec<usize> = octaves.iter().map(|&j| border_free_count(n, j, &fam) as usize).collect();
    let eta = SpectrumModel::new(fam, QuadratureConfig::default())
        .eta(theta, &octaves, &counts, bias)
        .unwrap();
    WaveletVariance::new(
        (0..12)
            .map(|i| OctaveVariance { j: octaves[i], n_j: counts[i], variance: 2f64.powf(eta[i]) })
            .collect(),
    )
}

#[test]
fn exact_spectrum_is_recovered() {
    let cfg = EstimateConfig::default();
    for theta in [tf(0.15, 0.01, 1.0), tf(0.35, 0.1, 1.0), tf(0.65, 0.1, 1.0), tf(0.85, 1.0, 1.0), tf(0.5, 0.5, 3.0)] {
        let r = fit_wavelet_variance(&exact_table(&theta, 1 << 16, true), &cfg).unwrap();
        let t = r.theta_hat;
        assert!(r.converged, "{theta:?}");
        assert!((t.hurst - theta.hurst).abs() < 1e-3, "{theta:?}: {t:?}");
        assert!((t.lambda - theta.lambda).abs() < 1e-3, "{theta:?}: {t:?}");
        assert!((t.sigma2 - theta.sigma2).abs() < 1e-3, "{theta:?}: {t:?}");
        assert!(r.residuals.iter().all(|e| e.abs() < 1e-4));
    }
}

#[test]
fn objective_at_truth_and_off_truth() {
    let cfg = EstimateConfig { bias_correct: false, ..Default::default() };
    let wv = exact_table(&tf(0.35, 0.1, 1.0), 1 << 16, false);
    assert!(objective(&tf(0.35, 0.1, 1.0), &wv, &cfg).unwrap() < 1e-20);
    assert!((profile_sigma2(0.35, 0.1, &wv, &cfg).unwrap() - 1.0).abs() < 1e-10);
    // Σ w_j (η_j(0.35, .1, 1) − η_j(0.4, .1, 1))² with spectra from the variogram form.
    let f = objective(&tf(0.4, 0.1, 1.0), &wv, &cfg).unwrap();
    assert!(rel(f, 0.137_824_014_901_196_47) < 1e-8, "{f}");
}

#[test]
fn identifiability_gram_determinant() {
    let cfg = EstimateConfig::default();
    let oct: Vec<u32> = (1..=6).collect();
    let g = identifiability_gram(&tf(0.5, 0.5, 1.0), &oct, &cfg).unwrap();
    // Central differences with step halving, extrapolated.
    assert!(rel(g.determinant, 7.021_254_04) < 1e-6, "{}", g.determinant);
    for r in 0..3 {
        for c in 0..3 {
            assert!((g.matrix[r][c] - g.matrix[c][r]).abs() < 1e-12 * g.matrix[r][r].abs().max(1.0));
        }
    }
    let oct: Vec<u32> = (1..=7).collect();
    assert!(identifiability_gram(&tf(0.75, 0.01, 1.0), &oct, &cfg).unwrap().determinant > 0.0);
}

#[test]
fn constant_series_is_a_structured_error() {
    let r = fit(&vec![2.5; 4096], &EstimateConfig::default());
    assert!(matches!(r, Err(Error::DegenerateVariance(_))), "{r:?}");
    let r = fit(&vec![0.1; 16], &EstimateConfig::default());
    assert!(r.is_err());
}

#[test]
fn scaling_the_series_scales_sigma2_only() {
    let p = tf(0.35, 0.1, 1.0);
    let cfg = SimulationConfig { n: 1 << 12, seed: 3, model: Process::Tfbm(p), negative_eigenvalue_policy: Default::default() };
    let x = sample_path(&cfg).unwrap();
    let c = 7.0;
    let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
    let ec = EstimateConfig::default();
    let a = fit(&x, &ec).unwrap().theta_hat;
    let b = fit(&cx, &ec).unwrap().theta_hat;
    assert!((b.sigma2 / (c * c * a.sigma2) - 1.0).abs() < 1e-5, "{a:?} {b:?}");
    assert!((a.hurst - b.hurst).abs() < 1e-6 && (a.lambda - b.lambda).abs() < 1e-6 * a.lambda.max(1.0));
}

/// Mean within four Monte Carlo standard errors of the reference value.
fn check_mean(what: &str, mean: f64, std: f64, reps: usize, want: f64) {
    let se = std / (reps as f64).sqrt();
    assert!((mean - want).abs() < 4.0 * se, "{what}: {mean} vs {want} (se {se})");
}

#[test]
fn monte_carlo_means_match_reference_cells() {
    let cfg = EstimateConfig::default();
    let reps = 500;
    for (h, l, want_h, want_l) in [(0.65, 0.1, 0.6500, 0.1003), (0.15, 0.01, 0.1503, 0.0102), (0.85, 1.0, 0.8505, 1.000)] {
        let s = mc_estimate(&tf(h, l, 1.0), 1 << 12, reps, 41, &cfg, None).unwrap();
        check_mean("H", s.hurst.mean, s.hurst.std.unwrap(), reps, want_h);
        check_mean("λ", s.lambda.mean, s.lambda.std.unwrap(), reps, want_l);
        assert_eq!(s.not_converged, 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_is_finite_on_the_box(h in 0.01f64..0.99, l in 1e-5f64..4.99, s2 in 0.01f64..100.0) {
        let wv = exact_table(&tf(0.35, 0.1, 1.0), 1 << 16, true);
        let f = objective(&tf(h, l, s2), &wv, &EstimateConfig::default()).unwrap();
        prop_assert!(f.is_finite() && f >= 0.0);
    }

    #[test]
    fn table_scaling_leaves_shape_unchanged(c in 0.01f64..100.0) {
        let wv = exact_table(&tf(0.6, 0.2, 1.0), 1 << 16, true);
        let cfg = EstimateConfig::default();
        let a = profile_sigma2(0.6, 0.2, &wv, &cfg).unwrap();
        let b = profile_sigma2(0.6, 0.2, &wv.scaled(c), &cfg).unwrap();
        prop_assert!((b / (c * a) - 1.0).abs() < 1e-12);
    }
}
