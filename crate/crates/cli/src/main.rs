use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod manifest;
mod series;

use series::SeriesError;

#[derive(Debug, Parser)]
#[command(name = "tfbm", version, about = "Tempered fractional Brownian motion toolkit")]
struct Cli {
    /// Worker threads for Monte Carlo runs (defaults to all cores).
    #[arg(long, global = true, env = tfbm::harness::WORKERS_ENV)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw one exact sample path.
    Simulate(SimulateArgs),
    /// Theoretical log₂ wavelet spectrum over octaves.
    Spectrum(SpectrumArgs),
    /// Sample wavelet variances of a series.
    Wavespec(WavespecArgs),
    /// Fit (H, λ, σ²) to a series.
    Fit(FitArgs),
    /// Test fBm against tempered fBm.
    Test(TestArgs),
    /// Fit, test and emit fitted-vs-sample spectrum plot data.
    Analyze(AnalyzeArgs),
    /// Monte Carlo moments of the estimator.
    McEstimate(McEstimateArgs),
    /// Monte Carlo rejection rate of the test.
    McPower(McPowerArgs),
    /// Monte Carlo null scale τ₀ of the test statistic.
    CalibrateTau0(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tfbm,
    Fbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Graded,
    Midpoint,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "tfbm")]
    pub model: ModelKind,
    /// Hurst parameter.
    #[arg(long = "H", visible_alias = "hurst")]
    pub hurst: f64,
    /// Tempering parameter (ignored for fbm).
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the increments instead of the path.
    #[arg(long)]
    pub increments: bool,
    /// Clip negative embedding eigenvalues instead of failing.
    #[arg(long)]
    pub clip: bool,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 2)]
    pub n_psi: usize,
    #[arg(long, default_value_t = 1)]
    pub j_min: u32,
    #[arg(long, default_value_t = 12)]
    pub j_max: u32,
    /// Also emit the continuous-time spectrum.
    #[arg(long)]
    pub continuous: bool,
    #[arg(long, value_enum, default_value = "graded")]
    pub quadrature: RuleArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct WavespecArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub n_psi: usize,
    /// Largest octave (defaults to the largest with border-free coefficients).
    #[arg(long)]
    pub j_max: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct EstimateArgs {
    #[arg(long, default_value_t = 2)]
    pub n_psi: usize,
    /// Regress on raw log₂ W without the bias term.
    #[arg(long)]
    pub no_bias_correct: bool,
    /// Explicit octave list, e.g. `1,2,3,4,5,6`.
    #[arg(long, value_delimiter = ',')]
    pub octaves: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value = "graded")]
    pub quadrature: RuleArg,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub estimate: EstimateArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct TestOptions {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Fixed τ₀ (skips calibration).
    #[arg(long)]
    pub tau0: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub j1: u32,
    #[arg(long, default_value_t = 2)]
    pub j2: u32,
    /// Octave or `auto` (log₂ n − 7).
    #[arg(long, default_value = "auto")]
    pub j3: Octave,
    /// Octave or `auto` (log₂ n − 3).
    #[arg(long, default_value = "auto")]
    pub j4: Octave,
    #[arg(id = "test_n_psi", long = "test-n-psi", default_value_t = 2)]
    pub n_psi: usize,
    #[arg(id = "test_no_bias_correct", long = "test-no-bias-correct")]
    pub no_bias_correct: bool,
    /// Use the constant fallback τ₀ instead of calibrating.
    #[arg(long)]
    pub no_calibration: bool,
    #[arg(long, default_value_t = 1000)]
    pub calibration_reps: usize,
    #[arg(long, default_value_t = tfbm::testkit::CalibrationConfig::default().seed)]
    pub calibration_seed: u64,
}

/// An octave, or `None` for the default rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(transparent)]
pub struct Octave(pub Option<u32>);

impl std::str::FromStr for Octave {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Octave(None));
        }
        s.parse().map(|j| Octave(Some(j))).map_err(|_| format!("expected an octave or `auto`, got {s:?}"))
    }
}

#[derive(Debug, Args, serde::Serialize)]
pub struct TestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub test: TestOptions,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct AnalyzeArgs {
    /// Series to analyse.
    #[arg(long, required_unless_present = "synthetic_replica", conflicts_with = "synthetic_replica")]
    pub input: Option<PathBuf>,
    /// Analyse a simulated tfBm with θ = (0.329, 0.121, 24.825) instead of measured data.
    #[arg(long)]
    pub synthetic_replica: bool,
    #[arg(long, default_value_t = 46080)]
    pub replica_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub estimate: EstimateArgs,
    #[command(flatten)]
    pub test: TestOptions,
    /// Plot data: j, n_j, log2W, eta_fbm, eta_tfbm.
    #[arg(long, default_value = "spectrum_plot.csv")]
    pub plot: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct McEstimateArgs {
    #[arg(long = "H", visible_alias = "hurst", value_delimiter = ',', required = true)]
    pub hurst: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub sigma2: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub estimate: EstimateArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct McPowerArgs {
    #[arg(long, value_enum, default_value = "tfbm")]
    pub model: ModelKind,
    #[arg(long = "H", visible_alias = "hurst", value_delimiter = ',', required = true)]
    pub hurst: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub test: TestOptions,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct CalibrateArgs {
    #[arg(long = "H", visible_alias = "hurst", value_delimiter = ',', required = true)]
    pub hurst: Vec<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = tfbm::testkit::CalibrationConfig::default().seed)]
    pub seed: u64,
    #[command(flatten)]
    pub test: TestOptions,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything that ends a run with a non-zero status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Library(#[from] tfbm::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use tfbm::Error as E;
        match self {
            Failure::Library(
                E::EmbeddingNotNonnegative { .. }
                | E::DegenerateVariance(_)
                | E::MeshTooCoarse { .. }
                | E::Numerical(_),
            ) => 3,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        // The library reads the worker count from the environment in nested
        // calibration runs; nothing else is running yet.
        std::env::set_var(tfbm::harness::WORKERS_ENV, w.to_string());
    }
    let workers = tfbm::harness::worker_count(cli.workers);
    let res = match &cli.command {
        Command::Simulate(a) => commands::simulate(a, workers),
        Command::Spectrum(a) => commands::spectrum(a, workers),
        Command::Wavespec(a) => commands::wavespec(a, workers),
        Command::Fit(a) => commands::fit(a, workers),
        Command::Test(a) => commands::test(a, workers),
        Command::Analyze(a) => commands::analyze(a, workers),
        Command::McEstimate(a) => commands::mc_estimate(a, workers),
        Command::McPower(a) => commands::mc_power(a, workers),
        Command::CalibrateTau0(a) => commands::calibrate_tau0(a, workers),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
