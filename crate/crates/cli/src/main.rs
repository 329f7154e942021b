//! `stadion`: choose the number of clusters from stability paths.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stadion::{ErrorCategory, StadionError};

mod commands;
mod config;

use config::{Overrides, RunConfig, Settings};

#[derive(Parser, Debug)]
#[command(
    name = "stadion",
    version,
    about = "Stability-difference selection of the number of clusters",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select K and write the report, path table and plots.
    Select(RunArgs),
    /// Compute stability paths only.
    Paths(RunArgs),
    /// Run every method on a directory of labelled CSV files.
    Benchmark(RunArgs),
    /// Write a synthetic labelled fixture as CSV (label in the last column).
    Gen(GenArgs),
    /// List configuration keys with their defaults.
    Keys,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// key=value file with [section] headers; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    labels_col: Option<usize>,
    #[arg(long)]
    delimiter: Option<String>,
    #[arg(long, value_name = "BOOL")]
    header: Option<bool>,
    /// kmeans or ward.
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    /// standard or extended.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    kmax: Option<usize>,
    /// Perturbations per noise level.
    #[arg(long)]
    d: Option<usize>,
    /// Sub-cluster counts, a..b or a comma list.
    #[arg(long)]
    omega: Option<String>,
    /// uniform, gaussian or bootstrap.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    grid_m: Option<usize>,
    /// auto or a positive number.
    #[arg(long)]
    eps_max: Option<String>,
    #[arg(long)]
    measure: Option<String>,
    /// max or mean.
    #[arg(long)]
    agg: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma list of csv, svg, json.
    #[arg(long)]
    emit: Option<String>,
    /// Comma list of benchmark methods, or all.
    #[arg(long)]
    methods: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        let mut o: Overrides = Vec::new();
        let mut put = |key: &'static str, v: Option<String>| {
            if let Some(v) = v {
                o.push((key, v));
            }
        };
        let s = |v: &Option<String>| v.clone();
        let n = |v: Option<usize>| v.map(|x| x.to_string());
        let p = |v: &Option<PathBuf>| v.as_ref().map(|x| x.display().to_string());
        put("data.path", p(&self.data));
        put("data.labels_col", n(self.labels_col));
        put("data.delimiter", s(&self.delimiter));
        put("data.header", self.header.map(|b| b.to_string()));
        put("clusterer.algorithm", s(&self.algorithm));
        put("clusterer.runs", n(self.runs));
        put("stability.variant", s(&self.variant));
        put("stability.kmax", n(self.kmax));
        put("stability.d", n(self.d));
        put("stability.omega", s(&self.omega));
        put("stability.noise", s(&self.noise));
        put("stability.measure", s(&self.measure));
        put("stability.agg", s(&self.agg));
        put("grid.m", n(self.grid_m));
        put("grid.eps_max", s(&self.eps_max));
        put("run.seed", self.seed.map(|x| x.to_string()));
        put("run.threads", n(self.threads));
        put("output.out", p(&self.out));
        put("output.emit", s(&self.emit));
        put("benchmark.methods", s(&self.methods));
        o
    }

    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut settings = Settings::defaults();
        if let Some(path) = &self.config {
            settings.merge_file(path)?;
        }
        settings.merge(self.overrides());
        RunConfig::resolve(&settings)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Fixture {
    ThreeBlobs,
    Letters,
    UniformCube,
    SingleGaussian,
    Golfball,
    Correlated,
    Corner,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    fixture: Fixture,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Dimension for uniform-cube and single-gaussian.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

/// A failed run: the stage that failed, its exit code and a message.
#[derive(Debug)]
pub struct Failure {
    pub stage: &'static str,
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            stage: "config",
            code: 2,
            message: message.into(),
        }
    }

    pub fn at(stage: &'static str) -> impl Fn(StadionError) -> Self {
        move |e| Self {
            stage,
            code: match e.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::Runtime => 4,
            },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Select(a) => a.resolve().and_then(|c| commands::select(&c)),
        Command::Paths(a) => a.resolve().and_then(|c| commands::paths(&c)),
        Command::Benchmark(a) => a.resolve().and_then(|c| commands::benchmark(&c)),
        Command::Gen(a) => commands::gen(a),
        Command::Keys => {
            for (key, default, doc) in config::KEYS {
                println!("{key} = {}\t# {doc}", default.unwrap_or(""));
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("stadion: {} failed: {}", f.stage, f.message);
            ExitCode::from(f.code)
        }
    }
}
