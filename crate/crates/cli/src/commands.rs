use crate::manifest::{write_sidecar, Recorder, RunManifest};
use crate::series::{format_f64 as f, read_series, write_series};
use crate::{
    AnalyzeArgs, CalibrateArgs, EstimateArgs, Failure, FitArgs, McEstimateArgs, McPowerArgs, ModelArgs,
    ModelKind, RuleArg, SimulateArgs, SpectrumArgs, TestArgs, TestOptions, WavespecArgs,
};
use serde_json::json;
use std::io::Write;
use std::path::Path;
use tfbm::estimate::{fit as fit_series, EstimateConfig, EstimateResult};
use tfbm::harness;
use tfbm::model::{FbmParams, Process, TfbmParams};
use tfbm::simulate::{sample_increments, sample_path, NegativeEigenvaluePolicy, SimulationConfig};
use tfbm::spectrum::{continuous_tfbm_spectrum, QuadratureConfig, SpectrumKind, SpectrumModel};
use tfbm::testkit::{self, CalibrationConfig, TestConfig, TestResult};
use tfbm::wavelet::{make_family, wavelet_variance};

type Out = Result<(), Failure>;

/// Parameters of the synthetic stand-in for the river-flow series.
const REPLICA: (f64, f64, f64) = (0.329, 0.121, 24.825);

fn quadrature(rule: RuleArg) -> QuadratureConfig {
    match rule {
        RuleArg::Graded => QuadratureConfig::default(),
        RuleArg::Midpoint => QuadratureConfig::midpoint(),
    }
}

fn process(m: &ModelArgs) -> Result<Process, Failure> {
    Ok(match m.model {
        ModelKind::Tfbm => TfbmParams::new(m.hurst, m.lambda, m.sigma2)?.into(),
        ModelKind::Fbm => FbmParams::new(m.hurst, m.sigma2)?.into(),
    })
}

impl EstimateArgs {
    fn config(&self) -> EstimateConfig {
        EstimateConfig {
            octaves: self.octaves.clone(),
            n_psi: self.n_psi,
            bias_correct: !self.no_bias_correct,
            quad: quadrature(self.quadrature),
            ..EstimateConfig::default()
        }
    }
}

impl TestOptions {
    fn config(&self) -> TestConfig {
        TestConfig {
            j1: self.j1,
            j2: self.j2,
            j3: self.j3.0,
            j4: self.j4.0,
            n_psi: self.n_psi,
            alpha: self.alpha,
            bias_correct: !self.no_bias_correct,
            tau0: self.tau0,
            calibration: CalibrationConfig {
                enabled: !self.no_calibration,
                reps: self.calibration_reps,
                seed: self.calibration_seed,
                ..CalibrationConfig::default()
            },
        }
    }
}

/// Writes `body` to `out` (plus its manifest) or to stdout.
fn emit(out: Option<&Path>, body: &[u8], manifest: RunManifest) -> Out {
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
            write_sidecar(path, &manifest)?;
        }
        None => std::io::stdout().lock().write_all(body)?,
    }
    Ok(())
}

fn table(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, Failure> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header)?;
    for r in rows {
        wtr.write_record(r)?;
    }
    wtr.into_inner().map_err(|e| Failure::Io(e.into_error()))
}

fn json_body(v: &serde_json::Value) -> Result<Vec<u8>, Failure> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), f)
}

pub fn simulate(a: &SimulateArgs, workers: usize) -> Out {
    let rec = Recorder::start("simulate");
    let config = SimulationConfig {
        n: a.n,
        seed: a.seed,
        model: process(&a.model)?,
        negative_eigenvalue_policy: if a.clip {
            NegativeEigenvaluePolicy::Clip
        } else {
            NegativeEigenvaluePolicy::Error
        },
    };
    let x = if a.increments { sample_increments(&config)? } else { sample_path(&config)? };
    let mut body = Vec::new();
    write_series(&mut body, &x, !a.no_header)?;
    emit(a.out.as_deref(), &body, rec.finish(a, Some(a.seed), None, workers)?)
}

pub fn spectrum(a: &SpectrumArgs, workers: usize) -> Out {
    let rec = Recorder::start("spectrum");
    if a.j_min == 0 || a.j_min > a.j_max {
        return Err(Failure::Usage(format!("bad octave range {}..={}", a.j_min, a.j_max)));
    }
    let family = make_family(a.n_psi)?;
    let model = SpectrumModel::new(family.clone(), quadrature(a.quadrature));
    let octaves: Vec<u32> = (a.j_min..=a.j_max).collect();
    let (kind, values) = match process(&a.model)? {
        Process::Tfbm(p) => (SpectrumKind::Tfbm, model.tfbm_spectra(&p, &octaves)?),
        Process::Fbm(p) => (SpectrumKind::Fbm, model.fbm_spectra(&p, &octaves)?),
    };
    let mut rows: Vec<Vec<String>> =
        octaves.iter().zip(&values).map(|(j, v)| vec![j.to_string(), f(v.log2()), kind.to_string()]).collect();
    if a.continuous {
        let Process::Tfbm(p) = process(&a.model)? else {
            return Err(Failure::Usage("--continuous needs a tempered model (lambda > 0)".into()));
        };
        for &j in &octaves {
            let v = continuous_tfbm_spectrum(j, &p, &family)?;
            rows.push(vec![j.to_string(), f(v.log2()), SpectrumKind::ContinuousTfbm.to_string()]);
        }
    }
    let body = table(&["j", "log2_spectrum", "model"], &rows)?;
    emit(a.out.as_deref(), &body, rec.finish(a, None, None, workers)?)
}

pub fn wavespec(a: &WavespecArgs, workers: usize) -> Out {
    let rec = Recorder::start("wavespec");
    let x = read_series(&a.input)?;
    let wv = wavelet_variance(&x, &make_family(a.n_psi)?, a.j_max)?;
    let rows: Vec<_> = wv
        .entries
        .iter()
        .map(|e| vec![e.j.to_string(), e.n_j.to_string(), f(e.variance), f(e.variance.log2())])
        .collect();
    let body = table(&["j", "n_j", "W", "log2W"], &rows)?;
    emit(a.out.as_deref(), &body, rec.finish(a, None, None, workers)?)
}

fn fit_json(r: &EstimateResult) -> serde_json::Value {
    json!({
        "H": r.theta_hat.hurst,
        "lambda": r.theta_hat.lambda,
        "sigma2": r.theta_hat.sigma2,
        "objective": r.objective_value,
        "converged": r.converged,
        "iterations": r.iterations,
        "octaves": r.octaves,
    })
}

fn test_json(r: &TestResult) -> serde_json::Value {
    json!({
        "T_n": r.t_n,
        "tau0": r.tau0_used,
        "p_value": r.p_value,
        "reject": r.reject,
        "H_small": r.h_hat_small,
        "H_large": r.h_tilde_large,
        "boundary": r.boundary,
        "octaves": r.octaves,
    })
}

pub fn fit(a: &FitArgs, workers: usize) -> Out {
    let rec = Recorder::start("fit");
    let x = read_series(&a.input)?;
    let r = fit_series(&x, &a.estimate.config())?;
    let body = json_body(&fit_json(&r))?;
    emit(a.out.as_deref(), &body, rec.finish(a, None, None, workers)?)
}

pub fn test(a: &TestArgs, workers: usize) -> Out {
    let rec = Recorder::start("test");
    let x = read_series(&a.input)?;
    let config = a.test.config();
    let r = testkit::run_test(&x, &config)?;
    let body = json_body(&test_json(&r))?;
    emit(a.out.as_deref(), &body, rec.finish(a, Some(config.calibration.seed), None, workers)?)
}

pub fn analyze(a: &AnalyzeArgs, workers: usize) -> Out {
    let rec = Recorder::start("analyze");
    let (x, source) = match &a.input {
        Some(path) => (read_series(path)?, json!({ "kind": "file", "path": path })),
        None => {
            let (h, l, s2) = REPLICA;
            let theta = TfbmParams::new(h, l, s2)?;
            let config = SimulationConfig {
                n: a.replica_n,
                seed: a.seed,
                model: theta.into(),
                negative_eigenvalue_policy: NegativeEigenvaluePolicy::Error,
            };
            let note = "simulated tfBm standing in for a river-flow series; not measured data";
            let src = json!({ "kind": "synthetic-replica", "note": note, "theta": theta, "n": a.replica_n, "seed": a.seed });
            (sample_path(&config)?, src)
        }
    };
    let est = a.estimate.config();
    let fitted = fit_series(&x, &est)?;
    let tcfg = a.test.config();
    let stat = testkit::test_statistic(&x, &tcfg)?;
    let tested = testkit::decide(&stat, testkit::tau0_for(stat.h_small, x.len(), &tcfg)?, tcfg.alpha)?;

    // Sample spectrum against the fitted tfBm and the fBm implied by the two
    // finest octaves.
    let wv = wavelet_variance(&x, &make_family(est.n_psi)?, None)?;
    let octaves = wv.octaves();
    let counts: Vec<usize> = wv.entries.iter().map(|e| e.n_j).collect();
    let tf_model = SpectrumModel::new(make_family(est.n_psi)?, est.quad);
    let eta_tfbm = tf_model.eta(&fitted.theta_hat, &octaves, &counts, est.bias_correct)?;
    let fbm_model = SpectrumModel::new(make_family(tcfg.n_psi)?, QuadratureConfig::default());
    let fbm = FbmParams::new(stat.h_small, stat.sigma2_small)?;
    let eta_fbm = fbm_model.eta_fbm(&fbm, &octaves, &counts, tcfg.bias_correct)?;
    let rows: Vec<_> = wv
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![e.j.to_string(), e.n_j.to_string(), f(e.variance.log2()), f(eta_fbm[i]), f(eta_tfbm[i])]
        })
        .collect();
    let plot = table(&["j", "n_j", "log2W", "eta_fbm", "eta_tfbm"], &rows)?;
    let seed = a.input.is_none().then_some(a.seed);
    emit(Some(&a.plot), &plot, rec.finish(a, seed, None, workers)?)?;

    let report = json!({
        "source": source,
        "n": x.len(),
        "fit": fit_json(&fitted),
        "test": test_json(&tested),
        "plot_csv": a.plot,
    });
    emit(a.out.as_deref(), &json_body(&report)?, rec.finish(a, seed, None, workers)?)
}

fn cells<A: Copy, B: Copy, C: Copy>(a: &[A], b: &[B], c: &[C]) -> Vec<(A, B, C)> {
    a.iter().flat_map(|&x| b.iter().flat_map(move |&y| c.iter().map(move |&z| (x, y, z)))).collect()
}

pub fn mc_estimate(a: &McEstimateArgs, workers: usize) -> Out {
    let rec = Recorder::start("mc-estimate");
    let config = a.estimate.config();
    let mut rows = Vec::new();
    for (h, l, s2) in cells(&a.hurst, &a.lambda, &a.sigma2) {
        let truth = TfbmParams::new(h, l, s2)?;
        for &n in &a.n {
            let s = harness::mc_estimate(&truth, n, a.reps, a.seed, &config, Some(workers))?;
            let m = [&s.hurst, &s.lambda, &s.sigma2];
            let mut row = vec![f(h), f(l), f(s2), n.to_string(), s.n_psi.to_string()];
            row.extend([s.bias_correct.to_string(), s.reps.to_string()]);
            row.extend(m.iter().map(|x| f(x.mean)));
            row.extend(m.iter().map(|x| na(x.std)));
            row.extend(m.iter().map(|x| na(x.skewness)));
            row.extend(m.iter().map(|x| na(x.kurtosis)));
            row.push(s.not_converged.to_string());
            rows.push(row);
        }
    }
    let header = [
        "H", "lambda", "sigma2", "n", "n_psi", "bias_correct", "reps", "mean_H", "mean_lambda",
        "mean_sigma2", "std_H", "std_lambda", "std_sigma2", "skew_H", "skew_lambda", "skew_sigma2",
        "kurt_H", "kurt_lambda", "kurt_sigma2", "not_converged",
    ];
    let body = table(&header, &rows)?;
    emit(a.out.as_deref(), &body, rec.finish(a, Some(a.seed), Some(a.reps), workers)?)
}

pub fn mc_power(a: &McPowerArgs, workers: usize) -> Out {
    let rec = Recorder::start("mc-power");
    let config = a.test.config();
    let lambdas = if a.model == ModelKind::Fbm { vec![0.0] } else { a.lambda.clone() };
    let mut rows = Vec::new();
    for (h, l, n) in cells(&a.hurst, &lambdas, &a.n) {
        let model = process(&ModelArgs { model: a.model, hurst: h, lambda: l, sigma2: a.sigma2 })?;
        let s = harness::mc_power(&model, n, a.reps, a.seed, &config, Some(workers))?;
        let name = match model {
            Process::Tfbm(_) => "tfbm",
            Process::Fbm(_) => "fbm",
        };
        rows.push(vec![
            name.to_string(),
            f(h),
            f(l),
            n.to_string(),
            a.reps.to_string(),
            f(config.alpha),
            s.rejections.to_string(),
            f(s.rate),
            f(s.std_error),
            f(s.mean_t_n),
        ]);
    }
    let header =
        ["model", "H", "lambda", "n", "reps", "alpha", "rejections", "rate", "std_error", "mean_T_n"];
    let body = table(&header, &rows)?;
    emit(a.out.as_deref(), &body, rec.finish(a, Some(a.seed), Some(a.reps), workers)?)
}

pub fn calibrate_tau0(a: &CalibrateArgs, workers: usize) -> Out {
    let rec = Recorder::start("calibrate-tau0");
    let config = a.test.config();
    let mut rows = Vec::new();
    for &h in &a.hurst {
        let tau0 = testkit::calibrate_tau0(h, a.n, a.reps, a.seed, &config)?;
        rows.push(vec![f(h), a.n.to_string(), config.n_psi.to_string(), a.reps.to_string(), a.seed.to_string(), f(tau0)]);
    }
    let body = table(&["H", "n", "n_psi", "reps", "seed", "tau0"], &rows)?;
    emit(a.out.as_deref(), &body, rec.finish(a, Some(a.seed), Some(a.reps), workers)?)
}
