//! Command-line front end: design generation, diagnostics, constraint
//! checking, and curve emission.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use clhs::{
    clhs as clhs_generate, csrs, io, lhs, oracle, report, srs, verify_lhs, ConstraintError,
    CsrsError, DesignSpec, RngState, SampleMatrix,
};

const DEFAULT_MAX_RETRIES: u32 = 1000;

#[derive(Parser)]
#[command(name = "clhs", version, about = "Latin hypercube designs under inequality constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sample matrix from a design-spec file.
    Generate {
        /// Design-spec JSON file.
        #[arg(long)]
        spec: PathBuf,
        /// Number of experiments (rows).
        #[arg(long)]
        n: usize,
        /// RNG seed; identical seeds give byte-identical output.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Method::Clhs)]
        method: Method,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Redraw budget per constrained column (overrides CLHS_MAX_RETRIES).
        #[arg(long)]
        max_retries: Option<u32>,
    },
    /// Report constraint intensity, correlations, and marginal quality.
    Diagnose {
        #[arg(long)]
        spec: PathBuf,
        /// Sample file written by `generate` (CSV or JSON).
        #[arg(long)]
        samples: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify constraints and stratification; exit 0 only if all hold.
    Check {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        /// Cross-check link feasibility by permutation enumeration (n <= 8).
        #[arg(long, hide = true)]
        oracle: bool,
    },
    /// Evaluate sample rows as piecewise-linear curves over variable levels.
    Curves {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        /// Comma-separated query levels, e.g. 20,100,560,1100.
        #[arg(long)]
        levels: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Srs,
    Lhs,
    Csrs,
    Clhs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Exit codes: 1 validation/constraint failure, 2 retry exhaustion, 3 I/O.
enum CliError {
    Validation(String),
    RetryExhausted(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::RetryExhausted(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::RetryExhausted(m) | CliError::Io(m) => m,
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<DesignSpec, CliError> {
    let text = read_file(path)?;
    io::parse_design_spec(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_samples(path: &Path) -> Result<SampleMatrix, CliError> {
    let text = read_file(path)?;
    let (m, _seed) = io::read_samples_auto(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(m)
}

fn retry_budget(flag: Option<u32>) -> u32 {
    flag.or_else(|| {
        std::env::var("CLHS_MAX_RETRIES").ok().and_then(|v| v.parse().ok())
    })
    .unwrap_or(DEFAULT_MAX_RETRIES)
}

fn generate(
    spec_path: &Path,
    n: usize,
    seed: u64,
    method: Method,
    out: &Path,
    format: Format,
    max_retries: Option<u32>,
) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let rng = RngState::new(seed);
    let matrix = match method {
        Method::Srs => srs(&spec, n, &rng).map_err(|e| CliError::Validation(e.to_string()))?,
        Method::Lhs => lhs(&spec, n, &rng).map_err(|e| CliError::Validation(e.to_string()))?,
        Method::Csrs => csrs::csrs(&spec, n, &rng).map_err(|e| match e {
            CsrsError::EmptyTruncation { .. } => CliError::Validation(e.to_string()),
            other => CliError::Validation(other.to_string()),
        })?,
        Method::Clhs => {
            clhs_generate(&spec, n, &rng, retry_budget(max_retries)).map_err(|e| match e {
                ConstraintError::RetriesExhausted { .. } => {
                    CliError::RetryExhausted(e.to_string())
                }
                other => CliError::Validation(other.to_string()),
            })?
        }
    };
    let sample_format = match format {
        Format::Csv => io::SampleFormat::Csv,
        Format::Json => io::SampleFormat::Json { seed },
    };
    write_file(out, &io::write_samples(&matrix, sample_format))?;
    eprintln!("wrote {} rows x {} columns to {}", matrix.n(), matrix.p(), out.display());
    Ok(())
}

fn diagnose(spec_path: &Path, samples_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let m = load_samples(samples_path)?;
    let rep = report(&m, &spec).map_err(|e| CliError::Validation(e.to_string()))?;
    let json = serde_json::to_string_pretty(&rep)
        .map_err(|e| CliError::Io(format!("report serialization: {e}")))?;
    match out {
        Some(path) => write_file(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn check(spec_path: &Path, samples_path: &Path, use_oracle: bool) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let m = load_samples(samples_path)?;
    if m.p() != spec.variables().len() {
        return Err(CliError::Validation(format!(
            "sample has {} columns, design describes {}",
            m.p(),
            spec.variables().len()
        )));
    }

    let mut all_ok = true;
    for link in spec.links() {
        let (l, r) = (link.left_index(), link.right_index());
        let violations = (0..m.n())
            .filter(|&i| !link.relation().row_ok(m.value(i, l), m.value(i, r)))
            .count();
        let ok = violations == 0;
        all_ok &= ok;
        println!(
            "link {} {} {}: {}",
            spec.variables()[l].name(),
            link.relation().symbol(),
            spec.variables()[r].name(),
            if ok { "ok".to_string() } else { format!("{violations} rows violate") }
        );
    }
    let verdicts =
        verify_lhs(&m, &spec).map_err(|e| CliError::Validation(e.to_string()))?;
    for (v, ok) in spec.variables().iter().zip(&verdicts) {
        all_ok &= ok;
        println!("column {}: {}", v.name(), if *ok { "stratified" } else { "NOT stratified" });
    }

    if use_oracle {
        for link in spec.links() {
            let (l, r) = (link.left_index(), link.right_index());
            let exists =
                oracle::brute_force_exists(m.column(l), m.column(r), link.relation())
                    .map_err(|e| CliError::Validation(e.to_string()))?;
            println!(
                "oracle link {} {} {}: satisfying permutation {}",
                spec.variables()[l].name(),
                link.relation().symbol(),
                spec.variables()[r].name(),
                if exists { "exists" } else { "does NOT exist" }
            );
            all_ok &= exists;
        }
    }

    if all_ok {
        Ok(())
    } else {
        Err(CliError::Validation("check failed".to_string()))
    }
}

fn curves(
    spec_path: &Path,
    samples_path: &Path,
    levels: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let spec = load_spec(spec_path)?;
    let m = load_samples(samples_path)?;
    let queries: Vec<f64> = levels
        .split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| {
                CliError::Validation(format!("--levels: {s:?} is not a number"))
            })
        })
        .collect::<Result<_, _>>()?;
    let table = io::curve_table(&m, &spec, &queries)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let csv = io::write_curve_csv(&table);
    match out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { spec, n, seed, method, out, format, max_retries } => {
            generate(&spec, n, seed, method, &out, format, max_retries)
        }
        Command::Diagnose { spec, samples, out } => {
            diagnose(&spec, &samples, out.as_deref())
        }
        Command::Check { spec, samples, oracle } => check(&spec, &samples, oracle),
        Command::Curves { spec, samples, levels, out } => {
            curves(&spec, &samples, &levels, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
