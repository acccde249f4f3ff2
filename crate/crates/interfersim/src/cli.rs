//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use interfersim_core::dsl::{parse_bytes, Parsed};
use interfersim_core::experiment::{linspace, sample, Condition, ExperimentGraph, SweepConfig, ThetaParam};
use interfersim_core::CONVENTION;

use crate::output::{self, format_number, RunMeta};
use crate::parallel::{sweep_parallel, thread_limit};

/// Exit status for validation and diagnostic errors.
pub const EXIT_INVALID: i32 = 1;
/// Exit status for usage errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "interfersim", version, about = "Exact few-fermion interferometer simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Param {
    Theta1,
    Theta2,
}

impl From<Param> for ThetaParam {
    fn from(p: Param) -> Self {
        match p {
            Param::Theta1 => ThetaParam::Theta1,
            Param::Theta2 => ThetaParam::Theta2,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the exact outcome distribution, or sampled counts with --shots.
    Run {
        file: PathBuf,
        /// Number of samples; 0 prints exact probabilities.
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write to this file instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Sweep one phase shifter over a uniform grid.
    Sweep {
        file: PathBuf,
        #[arg(long, value_enum)]
        param: Param,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        steps: u32,
        /// Post-selection, e.g. `C`, `C&D&minus`, `C,!E`. Implies that every
        /// particle was absorbed by some detector.
        #[arg(long)]
        condition: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the total-variation distance between the collapse and unitary
    /// measurement models.
    Compare { file: PathBuf },
    /// Validate a file and print diagnostics.
    Check { file: PathBuf },
}

enum Failure {
    Usage(String),
    Invalid(Vec<String>),
}

impl From<interfersim_core::Error> for Failure {
    fn from(e: interfersim_core::Error) -> Self {
        Failure::Invalid(vec![format!("error: {e}")])
    }
}

/// Runs the command line in-process and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Invalid(lines)) => {
            for l in lines {
                let _ = writeln!(stderr, "{l}");
            }
            EXIT_INVALID
        }
    }
}

fn display_name(path: &Path) -> String {
    path.display().to_string()
}

fn load(path: &Path, stderr: &mut dyn Write) -> Result<Parsed, Failure> {
    let name = display_name(path);
    let bytes = std::fs::read(path).map_err(|e| Failure::Invalid(vec![format!("{name}: error: cannot read file: {e}")]))?;
    match parse_bytes(&bytes, &name) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                let _ = writeln!(stderr, "{w}");
            }
            Ok(parsed)
        }
        Err(diags) => Err(Failure::Invalid(diags.iter().map(ToString::to_string).collect())),
    }
}

fn emit(text: &str, target: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match target {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Invalid(vec![format!("{}: error: cannot write file: {e}", path.display())])),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Invalid(vec![format!("error: cannot write output: {e}")])),
    }
}

fn run_meta(graph: &ExperimentGraph) -> RunMeta {
    RunMeta { graph_hash: graph.content_hash(), convention: CONVENTION.into(), version: env!("CARGO_PKG_VERSION").into() }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Run { file, shots, seed, format, output } => {
            let graph = load(&file, stderr)?.graph;
            let dist = graph.run()?;
            let text = match (shots, format) {
                (0, Format::Csv) => output::distribution_csv(&dist),
                (0, Format::Json) => output::distribution_json(&dist, &run_meta(&graph)),
                (n, Format::Csv) => output::counts_csv(&sample(&dist, n, seed)?),
                (n, Format::Json) => output::counts_json(&sample(&dist, n, seed)?, &run_meta(&graph), n, seed),
            };
            emit(&text, output.as_deref(), stdout)
        }
        Command::Sweep { file, param, from, to, steps, condition, format, output } => {
            if !from.is_finite() || !to.is_finite() {
                return Err(Failure::Usage("--from and --to must be finite".into()));
            }
            let condition =
                condition.map(|c| Condition::parse(&c).map_err(|e| Failure::Usage(format!("--condition: {e}")))).transpose()?;
            let threads = thread_limit().map_err(Failure::Usage)?;
            let graph = load(&file, stderr)?.graph;
            let config = SweepConfig { parameter: param.into(), grid: linspace(from, to, steps as usize), condition };
            let table = sweep_parallel(&graph, &config, threads)?;
            let text = match format {
                Format::Csv => output::table_csv(&table),
                Format::Json => output::table_json(&table),
            };
            emit(&text, output.as_deref(), stdout)
        }
        Command::Compare { file } => {
            let graph = load(&file, stderr)?.graph;
            let tv = graph.compare_models()?;
            emit(&format!("{}\n", format_number(tv)), None, stdout)
        }
        Command::Check { file } => {
            let parsed = load(&file, stderr)?;
            let g = &parsed.graph;
            let summary = format!(
                "{}: ok ({} modes, {} sources, {} elements, {} detectors, {} non-absorbing detectors)\n",
                display_name(&file),
                g.space.modes().len(),
                g.sources.len(),
                g.elements.len(),
                g.detectors.len(),
                g.ndetectors.len()
            );
            emit(&summary, None, stdout)
        }
    }
}
