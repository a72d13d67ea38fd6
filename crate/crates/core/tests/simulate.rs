mod common;

use common::{tf, theta_grid};
use tfbm::model::{ct_squared, tfgn_acvf, FbmParams, Process};
use tfbm::simulate::{
    circulant_eigenvalues, replication_rng, sample_increments, sample_path, CirculantSampler,
    NegativeEigenvaluePolicy, SimulationConfig, EIGEN_TOL,
};

const STRICT: NegativeEigenvaluePolicy = NegativeEigenvaluePolicy::Error;

fn config(model: Process, n: usize, seed: u64) -> SimulationConfig {
    SimulationConfig { n, seed, model, negative_eigenvalue_policy: STRICT }
}

fn min_ratio(eig: &[f64]) -> f64 {
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    eig.iter().cloned().fold(f64::MAX, f64::min) / max
}

#[test]
fn embeddings_are_nonnegative_on_the_grid() {
    for p in theta_grid() {
        let acvf: Vec<f64> = (0..4096).map(|h| tfgn_acvf(h, &p)).collect();
        let eig = circulant_eigenvalues(&acvf, STRICT).unwrap();
        assert_eq!(eig.len(), 2 * 4095);
        assert!(min_ratio(&eig) >= -EIGEN_TOL, "{p:?}");
    }
    let f = FbmParams::new(0.85, 1.0).unwrap();
    let acvf: Vec<f64> = (0..1024).map(|h| tfbm::model::fbm_acvf(h, &f)).collect();
    assert!(circulant_eigenvalues(&acvf, STRICT).unwrap().iter().all(|&e| e >= 0.0));
}

#[test]
fn small_embedding_minimum_eigenvalue() {
    let p = tf(0.65, 0.1, 1.0);
    let acvf: Vec<f64> = (0..64).map(|h| tfgn_acvf(h, &p)).collect();
    let eig = circulant_eigenvalues(&acvf, STRICT).unwrap();
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    // FFT of the embedded row, built from an independent Bessel evaluation.
    assert!((min - 0.004_028_883_411_210_771).abs() < 1e-12, "{min}");
}

#[test]
fn sample_autocovariance_matches_model() {
    let p = tf(0.35, 0.1, 1.0);
    let n = 1 << 16;
    let x = sample_increments(&config(Process::Tfbm(p), n, 2024)).unwrap();
    let gamma: Vec<f64> = (0..400).map(|h| tfgn_acvf(h, &p)).collect();
    let g = |k: i64| gamma[k.unsigned_abs() as usize];
    for h in 0..=20i64 {
        let est: f64 = (0..n - h as usize).map(|t| x[t] * x[t + h as usize]).sum::<f64>() / n as f64;
        // Bartlett's variance of the lag-h sample autocovariance.
        let var: f64 = (-300..=300i64).map(|k| g(k).powi(2) + g(k + h) * g(k - h)).sum::<f64>() / n as f64;
        let z = (est - g(h)) / var.sqrt();
        assert!(z.abs() < 4.0, "lag {h}: {est} vs {} (z = {z})", g(h));
    }
}

#[test]
fn brownian_increments_are_uncorrelated() {
    let n = 1024;
    let x = sample_increments(&config(FbmParams::new(0.5, 1.0).unwrap().into(), n, 5)).unwrap();
    let m = x.iter().sum::<f64>() / n as f64;
    let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    let c1: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    assert!((c1 / c0).abs() < 4.0 / (n as f64).sqrt(), "{}", c1 / c0);
}

#[test]
fn variance_at_time_one() {
    let p = tf(0.65, 0.1, 2.0);
    let sampler = CirculantSampler::new(&Process::Tfbm(p), 64, STRICT).unwrap();
    let reps = 5000;
    let b1: Vec<f64> = (0..reps).map(|r| sampler.path(&mut replication_rng(9, r))[0]).collect();
    let var = b1.iter().map(|v| v * v).sum::<f64>() / reps as f64;
    let want = p.sigma2 * ct_squared(1.0, &p).unwrap();
    let se = want * (2.0 / reps as f64).sqrt();
    assert!((var - want).abs() < 3.0 * se, "{var} vs {want} ± {se}");
}

#[test]
fn tempered_path_variance_saturates() {
    let n = 1 << 14;
    let sampler = CirculantSampler::new(&Process::Tfbm(tf(0.85, 1.0, 1.0)), n, STRICT).unwrap();
    let reps = 4000;
    let (mut full, mut half) = (0.0, 0.0);
    for r in 0..reps {
        let b = sampler.path(&mut replication_rng(31, r));
        full += b[n - 1].powi(2);
        half += b[n / 2 - 1].powi(2);
    }
    let ratio = full / half;
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
}

#[test]
fn empirical_covariance_matches_toeplitz() {
    let n = 256;
    let reps = 20_000u64;
    let mut worst = 0.0f64;
    let (mut entries, mut exceed) = (0usize, 0usize);
    for p in theta_grid() {
        let gamma: Vec<f64> = (0..n as i64).map(|h| tfgn_acvf(h, &p)).collect();
        let sampler = CirculantSampler::from_acvf(&gamma, STRICT).unwrap();
        let mut acc = vec![0.0; n * n];
        for r in 0..reps {
            let x = sampler.increments(&mut replication_rng(77, r));
            for i in 0..n {
                let xi = x[i];
                for (a, xj) in acc[i * n..i * n + i + 1].iter_mut().zip(&x) {
                    *a += xi * xj;
                }
            }
        }
        for i in 0..n {
            for j in 0..=i {
                let est = acc[i * n + j] / reps as f64;
                let want = gamma[i - j];
                let se = ((gamma[0] * gamma[0] + want * want) / reps as f64).sqrt();
                let z = ((est - want) / se).abs();
                worst = worst.max(z);
                entries += 1;
                exceed += (z > 4.0) as usize;
            }
        }
    }
    // About 6e-5 of Gaussian z-scores exceed 4; allow for the correlation between entries.
    let rate = exceed as f64 / entries as f64;
    assert!(rate < 5e-4, "{exceed} of {entries} entries beyond 4 SE");
    assert!(worst < 6.5, "largest z-score {worst}");
}

#[test]
fn replication_streams_are_independent() {
    let n = 1 << 14;
    let white: Process = FbmParams::new(0.5, 1.0).unwrap().into();
    let sampler = CirculantSampler::new(&white, n, STRICT).unwrap();
    let streams: Vec<Vec<f64>> = (0..6).map(|r| sampler.increments(&mut replication_rng(123, r))).collect();
    let bound = 4.0 / (n as f64).sqrt();
    for a in 0..streams.len() {
        for b in a + 1..streams.len() {
            let (x, y) = (&streams[a], &streams[b]);
            let dot: f64 = x.iter().zip(y).map(|(u, v)| u * v).sum();
            let nx: f64 = x.iter().map(|u| u * u).sum();
            let ny: f64 = y.iter().map(|v| v * v).sum();
            let rho = dot / (nx * ny).sqrt();
            assert!(rho.abs() <= bound, "streams {a}, {b}: {rho}");
        }
    }
}

#[test]
fn path_is_the_running_sum_and_reproducible() {
    let cfg = config(Process::Tfbm(tf(0.35, 0.1, 1.0)), 4096, 7);
    let x = sample_increments(&cfg).unwrap();
    let b = sample_path(&cfg).unwrap();
    assert_eq!(b, sample_path(&cfg).unwrap());
    assert_eq!(b.len(), 4096);
    assert_eq!(b[0], x[0]);
    for k in 1..b.len() {
        assert!((b[k] - b[k - 1] - x[k]).abs() < 1e-10);
    }
}
