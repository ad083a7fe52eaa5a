//! `mchgap`: finite-gap mCH solutions from a JSON run config.
//!
//! ```text
//! mchgap validate run.json
//! mchgap periods  run.json [--out periods.json]
//! mchgap sample   run.json [--out samples.csv] [--format csv|json] [--coords x]
//! mchgap verify   run.json [--level quick|full] [--report report.json]
//! ```
//!
//! Exit status: 0 success, 1 gate or point failure, 2 usage or config error.
//! The cache directory can be overridden with `MCHGAP_CACHE_DIR`.

mod cache;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mchgap::curve::{ArcKind, CurveModel};
use mchgap::pipeline::PipelineError;
use mchgap::solution::{Grid, DENOMINATOR_FLOOR};
use mchgap::verification::{self, Level, VerificationReport};

use cache::{to_json, write_atomic, PeriodsDocument, DOCUMENT_VERSION};
use config::Loaded;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Pipeline(PipelineError),
    /// A gate or point failure; the message has already been reported.
    Failed(String),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Pipeline(_) | CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Pipeline(e) => write!(f, "pipeline failure: {e}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mchgap",
    version,
    about = "Theta-function solutions of the modified Camassa-Holm equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Coords {
    Y,
    X,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a config, then print the genus and the cuts.
    Validate { config: PathBuf },
    /// Compute (or load from cache) the periods and write them with the
    /// period, theta and divisor gates.
    Periods {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the solution on a (y, t) grid.
    Sample {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// `x` also writes the (x, u) pairs sorted by x per t-slice.
        #[arg(long, value_enum, default_value = "y")]
        coords: Coords,
        #[arg(long, allow_hyphen_values = true)]
        y0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y1: Option<f64>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        t0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t1: Option<f64>,
        #[arg(long)]
        nt: Option<usize>,
    },
    /// Run the verification gates and write the JSON report.
    Verify {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn output_path(loaded: &Loaded, flag: Option<PathBuf>, configured: &Option<PathBuf>, fallback: &str) -> PathBuf {
    match flag {
        Some(p) => p,
        None => match configured {
            Some(p) => loaded.resolve(p),
            None => loaded.base.join(fallback),
        },
    }
}

fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let loaded = config::load(path)?;
    let model = CurveModel::new(loaded.params.clone());
    println!("genus {}, {} cuts, OK", model.genus, model.cut_count());
    for arc in &model.arcs {
        let kind = match arc.kind {
            ArcKind::ImaginarySegment => "segment",
            ArcKind::CircleArc => "arc",
        };
        println!(
            "  Γ{:<2} {kind:7} {:+.6}{:+.6}i -> {:+.6}{:+.6}i",
            arc.index, arc.start.re, arc.start.im, arc.end.re, arc.end.im
        );
    }
    Ok(())
}

fn print_failures(report: &VerificationReport) {
    for c in report.checks.iter().filter(|c| c.hard && !c.pass) {
        eprintln!(
            "FAIL {}/{}: observed {:e}, tolerance {:e}",
            c.section, c.name, c.observed, c.tolerance
        );
    }
    for e in &report.errors {
        eprintln!("ERROR {e}");
    }
}

fn cmd_periods(path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let loaded = config::load(path)?;
    let cfg = &loaded.config;
    let out = output_path(&loaded, out, &cfg.output.periods, "periods.json");
    let fingerprint = cfg.fingerprint();
    let genus = loaded.params.genus();
    let doc = match cache::prepare(&loaded) {
        Ok((prep, _)) => {
            let (checks, errors) = verification::verify_static(&prep, &cfg.tolerances, false);
            let report = VerificationReport::assemble(Level::Quick, &fingerprint, genus, checks, errors);
            PeriodsDocument {
                format_version: DOCUMENT_VERSION,
                cache_key: cfg.cache_key(),
                genus,
                precomputed: Some(prep.precomputed()),
                error: None,
                verification: Some(report),
            }
        }
        Err(CliError::Pipeline(e)) => PeriodsDocument {
            format_version: DOCUMENT_VERSION,
            cache_key: cfg.cache_key(),
            genus,
            precomputed: None,
            error: Some(e.to_string()),
            verification: None,
        },
        Err(e) => return Err(e),
    };
    write_atomic(&out, &to_json(&doc))?;
    println!("wrote {}", out.display());
    if let Some(e) = &doc.error {
        return Err(CliError::Failed(format!("pipeline failure: {e}")));
    }
    let report = doc.verification.as_ref().unwrap();
    if !report.overall {
        print_failures(report);
        return Err(CliError::Failed("period gates failed".into()));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    path: &Path,
    out: Option<PathBuf>,
    format: Format,
    coords: Coords,
    overrides: [Option<f64>; 4],
    counts: [Option<usize>; 2],
) -> Result<(), CliError> {
    let mut loaded = config::load(path)?;
    {
        let g = &mut loaded.config.grid;
        let [y0, y1, t0, t1] = overrides;
        g.y0 = y0.unwrap_or(g.y0);
        g.y1 = y1.unwrap_or(g.y1);
        g.t0 = t0.unwrap_or(g.t0);
        g.t1 = t1.unwrap_or(g.t1);
        g.ny = counts[0].unwrap_or(g.ny);
        g.nt = counts[1].unwrap_or(g.nt);
    }
    loaded.config.check_bounds()?;
    let grid: Grid = loaded.config.grid;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let out = output_path(&loaded, out, &loaded.config.output.samples, &format!("samples.{ext}"));
    let (prep, _) = cache::prepare(&loaded)?;
    let rows = prep.with_context(|ctx| {
        let (margin, y, t) = ctx.prescan(&grid);
        if margin < DENOMINATOR_FLOOR {
            return Err(CliError::Failed(format!(
                "denominator pre-scan: theta denominator {margin:e} near (y, t) = ({y}, {t})"
            )));
        }
        Ok(grid
            .points()
            .into_iter()
            .zip(ctx.sample_grid(&grid))
            .collect::<Vec<output::Row>>())
    })??;
    let body = match format {
        Format::Csv => output::csv(&rows).into_bytes(),
        Format::Json => output::json(&rows),
    };
    write_atomic(&out, &body)?;
    println!("wrote {} ({} rows)", out.display(), rows.len());
    if coords == Coords::X {
        let pairs = output::x_pairs(&rows);
        let stem = out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let xu = out.with_file_name(format!("{stem}.xu.{ext}"));
        let body = match format {
            Format::Csv => output::x_pairs_csv(&pairs).into_bytes(),
            Format::Json => to_json(&pairs),
        };
        write_atomic(&xu, &body)?;
        println!("wrote {}", xu.display());
    }
    let failed = rows.iter().filter(|(_, r)| r.is_err()).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} points failed", rows.len())));
    }
    Ok(())
}

fn cmd_verify(path: &Path, level: LevelArg, report_path: Option<PathBuf>) -> Result<(), CliError> {
    let loaded = config::load(path)?;
    let cfg = &loaded.config;
    let out = output_path(&loaded, report_path, &cfg.output.report, "report.json");
    let level = match level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let fingerprint = cfg.fingerprint();
    let report = match cache::prepare(&loaded) {
        Ok((prep, _)) => verification::verify(&prep, level, &cfg.tolerances, &cfg.grid, &fingerprint),
        Err(CliError::Pipeline(e)) => VerificationReport::assemble(
            level,
            &fingerprint,
            loaded.params.genus(),
            vec![],
            vec![format!("pipeline: {e}")],
        ),
        Err(e) => return Err(e),
    };
    write_atomic(&out, &to_json(&report))?;
    let hard = report.checks.iter().filter(|c| c.hard).count();
    let passed = report.checks.iter().filter(|c| c.hard && c.pass).count();
    println!(
        "{passed}/{hard} hard checks passed; overall {}",
        if report.overall { "PASS" } else { "FAIL" }
    );
    println!("wrote {}", out.display());
    if !report.overall {
        print_failures(&report);
        return Err(CliError::Failed("verification failed".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config } => cmd_validate(&config),
        Command::Periods { config, out } => cmd_periods(&config, out),
        Command::Sample {
            config,
            out,
            format,
            coords,
            y0,
            y1,
            ny,
            t0,
            t1,
            nt,
        } => cmd_sample(&config, out, format, coords, [y0, y1, t0, t1], [ny, nt]),
        Command::Verify { config, level, report } => cmd_verify(&config, level, report),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
