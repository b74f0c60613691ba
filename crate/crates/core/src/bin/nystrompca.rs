use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nystrompca::experiments::{run_experiment, Bandwidth, Command, ExperimentConfig, KernelChoice, KernelFamily};
use nystrompca::VarianceMode;

/// Kernel PCA with the Nyström method: experiment runner.
#[derive(Parser)]
#[command(name = "nystrompca", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Variance captured by subset, Nyström, full kernel and linear PCA.
    Methods(Common),
    /// Confidence bound against the realized excess reconstruction error.
    Bound(Common),
    /// Nyström kernel PCR and kernel ridge regression.
    Regression(Common),
}

#[derive(Args)]
struct Common {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// The file has no header; columns are named column_0, column_1, ...
    #[arg(long)]
    no_header: bool,
    /// Field separator: a single character, or "tab".
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    /// Target column, excluded from the features.
    #[arg(long)]
    target: Option<String>,
    /// JSON file mapping ordinal columns to their ordered categories.
    #[arg(long)]
    ordinal_map: Option<PathBuf>,
    #[arg(long, default_value = "rbf")]
    kernel: KernelFamily,
    /// Bandwidth for rbf and cauchy kernels.
    #[arg(long, conflicts_with = "median_sigma")]
    sigma: Option<f64>,
    /// Use the median pairwise distance within the Nyström subset as bandwidth.
    #[arg(long)]
    median_sigma: bool,
    /// Polynomial offset R.
    #[arg(long, default_value_t = 1.0)]
    offset: f64,
    /// Polynomial degree.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Normalize the kernel to k(x,y)/sqrt(k(x,x)k(y,y)).
    #[arg(long)]
    normalize: bool,
    /// Nyström subset size.
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Regression PCA dimension.
    #[arg(long, default_value_t = 90)]
    d: usize,
    /// Largest dimension reported by methods and bound.
    #[arg(long, default_value_t = 10)]
    max_d: usize,
    /// Ridge parameter.
    #[arg(long, default_value_t = 1e-11)]
    gamma: f64,
    #[arg(long, default_value_t = 0.9)]
    confidence: f64,
    /// Number of subset draws in the bound experiment.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Use only the first L rows.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long, default_value = "exact")]
    variance_mode: VarianceMode,
    /// Skip full kernel PCA in the methods comparison (avoids the n x n matrix).
    #[arg(long)]
    no_kernel_pca: bool,
    /// Comma-separated subset sizes for the regression grid.
    #[arg(long, value_delimiter = ',')]
    m_grid: Vec<usize>,
    /// Comma-separated PCA dimensions for the regression grid.
    #[arg(long, value_delimiter = ',')]
    d_grid: Vec<usize>,
    /// Comma-separated ridge parameters for the regression grid.
    #[arg(long, value_delimiter = ',')]
    gamma_grid: Vec<f64>,
    #[arg(long, default_value = "results")]
    output: PathBuf,
}

impl Common {
    fn into_config(self, command: Command) -> ExperimentConfig {
        let bandwidth = if self.median_sigma { Bandwidth::Median } else { Bandwidth::Fixed(self.sigma.unwrap_or(1.0)) };
        let mut c = ExperimentConfig::new(command, self.data, self.output);
        c.has_header = !self.no_header;
        c.delimiter = self.delimiter;
        c.target = self.target;
        c.ordinal_map = self.ordinal_map;
        c.kernel = KernelChoice { family: self.kernel, bandwidth, offset: self.offset, degree: self.degree, normalize: self.normalize };
        c.m = self.m;
        c.d = self.d;
        c.max_d = self.max_d;
        c.gamma = self.gamma;
        c.confidence = self.confidence;
        c.samples = self.samples;
        c.seed = self.seed;
        c.limit = self.limit;
        c.variance_mode = self.variance_mode;
        c.kernel_pca_reference = !self.no_kernel_pca;
        c.m_grid = self.m_grid;
        c.d_grid = self.d_grid;
        c.gamma_grid = self.gamma_grid;
        c
    }
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single ASCII character or 'tab', got '{s}'")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let config = match cli.command {
        Cmd::Methods(c) => c.into_config(Command::Methods),
        Cmd::Bound(c) => c.into_config(Command::Bound),
        Cmd::Regression(c) => c.into_config(Command::Regression),
    };
    match run_experiment(&config) {
        Ok(summary) => {
            // Ignore write errors such as a closed pipe; the files are already written.
            let mut out = std::io::stdout().lock();
            let _ = write!(out, "{}", summary.message);
            for f in &summary.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
