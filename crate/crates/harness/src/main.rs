use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gapcs_harness::{execute, plot, ExperimentKind, ExperimentSpec, HarnessError};

#[derive(Parser)]
#[command(name = "gapcs", version, about = "GAP/AIT compressive-sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error-vs-iteration traces for GAP and AIT.
    Convergence(Common),
    /// Final error as a function of m*.
    MstarSweep(Common),
    /// Final error as a function of K (with m* = K).
    KSweep(Common),
    /// Noise recovered from the last GAP step.
    NoiseEst(Common),
    /// Optimal contraction rates over a (δ, e_max, m*) grid plus a certificate.
    TheoryGrid(Common),
    /// Patch-DCT image reconstruction.
    Image(Common),
    /// Render SVG charts from experiment CSVs.
    Plot {
        /// Directory holding the CSVs.
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        /// Directory for the SVGs (defaults to the input directory).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// key=value file applied before the flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    mstar: Option<String>,
    /// Step size; repeat or comma-separate for several.
    #[arg(long)]
    alpha: Vec<String>,
    /// SNR of the noisy condition in dB, or `none`.
    #[arg(long)]
    snr_db: Option<String>,
    /// gaussian | binary
    #[arg(long)]
    matrix: Option<String>,
    /// List (`1,2,5`) or range (`0..20`).
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    /// Swept values for the sweep experiments.
    #[arg(long)]
    values: Option<String>,
    /// Noise standard deviations for noise-est.
    #[arg(long)]
    stds: Option<String>,
    #[arg(long)]
    grid_points: Option<String>,
    #[arg(long)]
    delta_samples: Option<String>,
    /// Binary PGM input for the image experiment.
    #[arg(long, value_name = "PATH")]
    image: Option<String>,
    /// Side of the synthetic scene used when no image is given.
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    #[arg(long)]
    patch: Option<String>,
    #[arg(long)]
    stride: Option<String>,
}

impl Common {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let single = [
            ("m", &self.m),
            ("n", &self.n),
            ("k", &self.k),
            ("mstar", &self.mstar),
            ("snr-db", &self.snr_db),
            ("matrix", &self.matrix),
            ("seeds", &self.seeds),
            ("out", &self.out),
            ("workers", &self.workers),
            ("max-iters", &self.max_iters),
            ("values", &self.values),
            ("stds", &self.stds),
            ("grid-points", &self.grid_points),
            ("delta-samples", &self.delta_samples),
            ("image", &self.image),
            ("size", &self.size),
            ("rate", &self.rate),
            ("patch", &self.patch),
            ("stride", &self.stride),
        ];
        for (key, value) in single {
            if let Some(v) = value {
                out.push((key, v.clone()));
            }
        }
        if !self.alpha.is_empty() {
            out.push(("alpha", self.alpha.join(",")));
        }
        out
    }

    fn spec(&self, kind: ExperimentKind) -> Result<ExperimentSpec, HarnessError> {
        let mut spec = ExperimentSpec::defaults(kind);
        if let Some(path) = &self.config {
            spec.apply_config_file(path)?;
        }
        let pairs = self.pairs();
        spec.apply(pairs.iter().map(|(k, v)| (*k, v.as_str())))?;
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    let (kind, common) = match cli.command {
        Command::Plot { input, out } => {
            let out = out.unwrap_or_else(|| input.clone());
            for path in plot::render_plots(&input, &out)? {
                println!("{}", path.display());
            }
            return Ok(true);
        }
        Command::Convergence(c) => (ExperimentKind::Convergence, c),
        Command::MstarSweep(c) => (ExperimentKind::MStarSweep, c),
        Command::KSweep(c) => (ExperimentKind::KSweep, c),
        Command::NoiseEst(c) => (ExperimentKind::NoiseEstimation, c),
        Command::TheoryGrid(c) => (ExperimentKind::TheoryGrid, c),
        Command::Image(c) => (ExperimentKind::Image, c),
    };
    let spec = common.spec(kind)?;
    let outcome = execute(&spec)?;
    for path in &outcome.files {
        println!("{}", path.display());
    }
    for failure in &outcome.failures {
        eprintln!("FAIL {failure}");
    }
    Ok(outcome.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gapcs: {e}");
            ExitCode::from(2)
        }
    }
}
