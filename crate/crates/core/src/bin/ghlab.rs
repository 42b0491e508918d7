use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ghlab::cli::{self, Command, Format, Overrides, ProblemFile};
use ghlab::GhError;

#[derive(Parser)]
#[command(
    name = "ghlab",
    version,
    about = "Global hypoellipticity checks for sums of squares on T^n x G"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Symbol minima, exponent fit and verdict for a system of fields.
    CheckSystem(Opts),
    /// Ellipticity, system check and inequality probe for an operator.
    AnalyzeOperator(Opts),
    /// Diophantine conditions and their equivalence for constant fields.
    Diophantine(Opts),
    /// Singular solution built from the failure witnesses.
    Counterexample(Opts),
    /// Energy identity, Poincare, graph norm and spectral sanity checks.
    Inequalities(Opts),
}

#[derive(clap::Args)]
struct Opts {
    /// Problem file (TOML).
    #[arg(long)]
    spec: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Fmt,
    /// Overrides `analysis.lambda_max`, as a rational string.
    #[arg(long)]
    lambda_max: Option<String>,
    /// Overrides `analysis.radius`.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy)]
enum Fmt {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (cmd, opts) = match args.command {
        Cmd::CheckSystem(o) => (Command::CheckSystem, o),
        Cmd::AnalyzeOperator(o) => (Command::AnalyzeOperator, o),
        Cmd::Diophantine(o) => (Command::Diophantine, o),
        Cmd::Counterexample(o) => (Command::Counterexample, o),
        Cmd::Inequalities(o) => (Command::Inequalities, o),
    };
    match execute(cmd, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ghlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cmd: Command, o: &Opts) -> Result<(), GhError> {
    if let Ok(t) = std::env::var("GHLAB_THREADS") {
        let n: usize = t.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            GhError::Spec(format!(
                "GHLAB_THREADS must be a positive integer, got {t:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| GhError::Numeric(e.to_string()))?;
    }
    let start = Instant::now();
    let pf = ProblemFile::parse(&o.spec)?;
    let ov = Overrides {
        lambda_max: o.lambda_max.clone(),
        radius: o.radius,
    };
    let report = cli::run(cmd, &pf, &ov)?;
    let format = match o.format {
        Fmt::Json => Format::Json,
        Fmt::Csv => Format::Csv,
    };
    let text = cli::render(&report, format)?;
    // A failing system also gets its singular solution next to the report.
    let failed = cmd == Command::CheckSystem
        && matches!(
            report.result["gh"]["verdict"].as_str(),
            Some("fail-zero-symbol" | "fail-superpolynomial")
        );
    let extra = match (&o.out, failed) {
        (Some(p), true) => {
            let ce = cli::render(&cli::run(Command::Counterexample, &pf, &ov)?, Format::Json)?;
            Some((counterexample_path(p), ce))
        }
        _ => None,
    };
    match &o.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    if let Some((p, ce)) = extra {
        write(&p, &ce)?;
    }
    eprintln!(
        "ghlab {}: {:.3} s",
        cmd.name(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn counterexample_path(p: &Path) -> PathBuf {
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    p.with_file_name(format!("{stem}.counterexample.json"))
}

fn write(p: &Path, text: &str) -> Result<(), GhError> {
    std::fs::write(p, text).map_err(|e| GhError::Spec(format!("cannot write {}: {e}", p.display())))
}
