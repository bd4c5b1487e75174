//! `tenfold`: partition censuses, dependence audits, limit densities, and
//! Monte Carlo comparisons of symmetry-class spectra with their limit laws.
//!
//! Exit status: 0 when every verdict passes, 1 when a verdict fails, 2 on
//! errors (a JSON failure record is printed and written to the output
//! directory).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tenfold::dependence::StructureName;
use tenfold::harness::{
    check_deps, compare, density, enumerate, parse_law, sample, ExperimentConfig, HarnessError, OutputDir, RunHeader,
    DEFAULT_AUDIT_LADDER,
};

#[derive(Parser)]
#[command(name = "tenfold", version, about = "Spectra of random matrices from the ten symmetry classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record the current time in output headers
    #[arg(long)]
    timestamp: bool,
}

#[derive(Args)]
struct Overrides {
    /// Experiment configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated ascending size ladder
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut config = ExperimentConfig::from_path(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(sizes) = &self.sizes {
            config.sizes = sizes.clone();
        }
        if let Some(r) = self.replicates {
            config.replicates = r;
        }
        if let Some(k) = self.kmax {
            config.kmax = k;
        }
        if let Some(b) = self.bins {
            config.bins = b;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Grid {
    Square,
    Rectangular,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Count partitions, noncrossing partitions and pairings, and check the
    /// join lemmas, for sizes up to k
    Enumerate {
        #[arg(long, short)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Compare mean spectral moments with the limit law
    Compare {
        #[command(flatten)]
        overrides: Overrides,
        /// Also require the KS distance at the largest size to be small
        #[arg(long)]
        ks: bool,
        /// Judge the largest size directly instead of extrapolating in 1/n
        #[arg(long)]
        no_extrapolate: bool,
        /// Run even when the dependence structure fails its audit
        #[arg(long)]
        allow_noncompliant: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Audit a dependence structure against the admissibility conditions
    CheckDeps {
        /// Structure, e.g. `wigner_standard`, `tile(4)`, `row_constant`
        #[arg(long)]
        structure: String,
        #[arg(long, value_enum, default_value = "both")]
        grid: Grid,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate a limit density
    Density {
        /// semicircle, mp, chiral or chiral_squared
        #[arg(long)]
        law: String,
        #[arg(long)]
        kappa: Option<f64>,
        /// Number of grid points
        #[arg(long, default_value_t = 401)]
        points: usize,
        /// Range as `lo,hi`
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        range: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Draw one matrix at the largest configured size and write it with its
    /// spectrum
    Sample {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Enumerate { .. } => "enumerate",
            Command::Compare { .. } => "compare",
            Command::CheckDeps { .. } => "check-deps",
            Command::Density { .. } => "density",
            Command::Sample { .. } => "sample",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Enumerate { common, .. }
            | Command::Compare { common, .. }
            | Command::CheckDeps { common, .. }
            | Command::Density { common, .. }
            | Command::Sample { common, .. } => common,
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.common().out.clone().unwrap_or_else(|| Path::new("out").join(self.name()))
    }
}

fn open(command: &Command, config: &impl serde::Serialize, seed: Option<u64>) -> Result<OutputDir, HarnessError> {
    let mut header = RunHeader::new(command.name(), config, seed)?;
    if command.common().timestamp {
        header = header.with_timestamp();
    }
    OutputDir::create(command.out_dir(), header)
}

fn print(lines: &[String]) {
    for line in lines {
        println!("{line}");
    }
}

/// Runs the command; `Ok(true)` when every verdict passes.
fn run(command: &Command) -> Result<bool, HarnessError> {
    match command {
        Command::Enumerate { k, .. } => {
            let report = enumerate(*k)?;
            let out = open(command, &serde_json::json!({ "k": k }), None)?;
            report.write(&out)?;
            print(&report.summary());
            Ok(report.passed)
        }
        Command::Compare { overrides, ks, no_extrapolate, allow_noncompliant, .. } => {
            let mut config = overrides.resolve()?;
            config.ks |= *ks;
            config.extrapolate &= !*no_extrapolate;
            config.allow_noncompliant |= *allow_noncompliant;
            let out = open(command, &config, Some(config.seed))?;
            let report = match compare(&config) {
                Ok(r) => r,
                Err(e) => {
                    out.write_json("failure.json", &e.to_record())?;
                    return Err(e);
                }
            };
            report.write(&out)?;
            print(&report.summary());
            Ok(report.passed)
        }
        Command::CheckDeps { structure, grid, sizes, .. } => {
            let family = StructureName::parse_compact(structure)?;
            let sizes = sizes.clone().unwrap_or_else(|| DEFAULT_AUDIT_LADDER.to_vec());
            let square = match grid {
                Grid::Square => Some(true),
                Grid::Rectangular => Some(false),
                Grid::Both => None,
            };
            let audits = check_deps(family, square, &sizes)?;
            let config = serde_json::json!({ "structure": family.to_string(), "sizes": sizes, "grids": audits.iter().map(|a| if a.square { "square" } else { "rectangular" }).collect::<Vec<_>>() });
            let out = open(command, &config, None)?;
            let mut passed = true;
            for audit in &audits {
                let dir = OutputDir::create(
                    out.path(if audit.square { "square" } else { "rectangular" }),
                    out.header().clone(),
                )?;
                audit.write(&dir)?;
                print!("{}", audit.table());
                passed &= audit.verdict.is_pass();
            }
            out.write_json("check_deps.json", &audits)?;
            Ok(passed)
        }
        Command::Density { law, kappa, points, range, .. } => {
            let law = parse_law(law, *kappa)?;
            let range = match range.as_deref() {
                None => None,
                Some(&[lo, hi]) => Some((lo, hi)),
                Some(other) => return Err(HarnessError::Config(format!("--range needs lo,hi, got {other:?}"))),
            };
            let report = density(law, range, *points)?;
            let config = serde_json::json!({ "law": law, "points": points, "range": report.range });
            let out = open(command, &config, None)?;
            report.write(&out)?;
            print(&report.summary());
            Ok(true)
        }
        Command::Sample { overrides, replicate, .. } => {
            let config = overrides.resolve()?;
            let report = sample(&config, *replicate)?;
            let out =
                open(command, &serde_json::json!({ "config": config, "replicate": replicate }), Some(config.seed))?;
            report.write(&out)?;
            println!(
                "{} n={} replicate {}: dim {}, member {:?}, eigenvalues in [{:.4}, {:.4}]",
                report.target,
                report.n,
                report.replicate,
                report.dim,
                report.member,
                report.eigenvalues.first().copied().unwrap_or(f64::NAN),
                report.eigenvalues.last().copied().unwrap_or(f64::NAN)
            );
            Ok(report.member != Some(false))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            println!("{}", e.to_record());
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
