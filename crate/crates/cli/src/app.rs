//! Argument parsing, thread setup, file output and verification.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use crate::commands::{self, Command, NamedTable};
use crate::config::{Format, Settings};
use crate::error::CliError;
use crate::table::ParsedTable;

/// Relative tolerance for `verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-6;
pub const THREADS_ENV: &str = "NEONTRAP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "neontrap", version, about = "Electron-on-neon trap simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path; multi-table commands append `_<table>` to the stem.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads (overrides NEONTRAP_THREADS and the config).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Perpendicular potential profiles, one table per thickness.
    PotentialZ,
    /// Ground-state energy, mean height and gap over thickness and field.
    GroundSweep,
    /// Lateral potential and radial spectrum for pillar geometries.
    Lateral,
    /// Excitation energy against field, with the harmonic-model fit.
    FieldSweep,
    /// Growth estimates.
    Growth,
    /// Re-run the command that produced TABLE and compare.
    Verify { table: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn load_settings(cli: &Cli) -> Result<Settings, CliError> {
    match &cli.config {
        Some(path) => Settings::load(path),
        None => Settings::from_toml(""),
    }
}

/// Worker count: flag, then environment, then config, then all cores.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>, config: Option<usize>) -> Result<usize, CliError> {
    let from_env = env
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("{THREADS_ENV}: expected a positive integer, got '{s}'")))
        })
        .transpose()?;
    let n = flag
        .or(from_env)
        .or(config)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(CliError::Config("thread count must be at least 1".into()));
    }
    Ok(n)
}

fn run_in_pool(command: Command, settings: &Settings, threads: usize) -> Result<Vec<NamedTable>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    pool.install(|| commands::run(command, settings))
}

/// Path for one table given the output stem.
pub fn table_path(stem: &Path, suffix: Option<&str>, format: Format) -> PathBuf {
    let mut name = stem
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if let Some(s) = suffix {
        name.push('_');
        name.push_str(s);
    }
    name.push('.');
    name.push_str(format.extension());
    stem.with_file_name(name)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs a computing subcommand and writes its tables. Returns the paths written.
pub fn produce(cli: &Cli, command: Command) -> Result<Vec<PathBuf>, CliError> {
    let settings = load_settings(cli)?;
    let threads = resolve_threads(
        cli.threads,
        std::env::var(THREADS_ENV).ok().as_deref(),
        settings.threads,
    )?;
    let format = cli.format.map(Format::from).unwrap_or(settings.format);
    let out = cli
        .out
        .clone()
        .or_else(|| settings.output_path.clone())
        .unwrap_or_else(|| PathBuf::from(format!("neontrap_{}", command.name().replace('-', "_"))));
    let stem = out.with_extension("");

    let start = Instant::now();
    let tables = run_in_pool(command, &settings, threads)?;
    info!(
        "{} finished in {:.3} s on {threads} threads",
        command.name(),
        start.elapsed().as_secs_f64()
    );

    let single = tables.len() == 1;
    let mut written = Vec::new();
    for named in &tables {
        let suffix = if single { None } else { named.suffix.as_deref() };
        let path = table_path(&stem, suffix, format);
        write(&path, &named.table.render(format)?)?;
        written.push(path);
    }
    let echo = stem.with_file_name(format!(
        "{}.config.toml",
        stem.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    ));
    write(&echo, settings.echo().as_bytes())?;
    written.push(echo);
    Ok(written)
}

/// Re-runs the command recorded in `table` and compares within [`VERIFY_TOLERANCE`].
pub fn verify(cli: &Cli, table: &Path) -> Result<(), CliError> {
    let format = match table.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    };
    let bytes = std::fs::read(table).map_err(|e| CliError::Io(format!("{}: {e}", table.display())))?;
    let stored = ParsedTable::parse(&bytes, format)?;
    let meta = |key: &str| {
        stored
            .metadata
            .get(key)
            .cloned()
            .ok_or_else(|| CliError::Mismatch(format!("stored table lacks '{key}' metadata")))
    };
    let command_name = meta("command")?;
    let command = Command::from_name(&command_name)
        .ok_or_else(|| CliError::Mismatch(format!("unknown command '{command_name}'")))?;
    let label = meta("table")?;
    let settings = load_settings(cli)?;
    let hash = settings.hash();
    if meta("config_hash")? != hash {
        return Err(CliError::Mismatch(format!(
            "config hash {} does not match the stored {}",
            hash,
            meta("config_hash")?
        )));
    }
    let threads = resolve_threads(
        cli.threads,
        std::env::var(THREADS_ENV).ok().as_deref(),
        settings.threads,
    )?;
    let fresh = run_in_pool(command, &settings, threads)?
        .into_iter()
        .find(|t| t.label(command) == label)
        .ok_or_else(|| CliError::Mismatch(format!("command {command_name} produces no table '{label}'")))?;
    let fresh = ParsedTable::parse(&fresh.table.render(format)?, format)?;
    match stored.compare(&fresh, VERIFY_TOLERANCE) {
        None => Ok(()),
        Some(diff) => Err(CliError::Mismatch(diff)),
    }
}

/// Entry point shared by the binary. Returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = match &cli.command {
        Cmd::PotentialZ => produce(&cli, Command::PotentialZ).map(report),
        Cmd::GroundSweep => produce(&cli, Command::GroundSweep).map(report),
        Cmd::Lateral => produce(&cli, Command::Lateral).map(report),
        Cmd::FieldSweep => produce(&cli, Command::FieldSweep).map(report),
        Cmd::Growth => produce(&cli, Command::Growth).map(report),
        Cmd::Verify { table } => verify(&cli, table).map(|()| println!("verified {}", table.display())),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("neontrap: {e}");
            e.exit_code()
        }
    }
}

fn report(paths: Vec<PathBuf>) {
    for p in paths {
        println!("{}", p.display());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_priority() {
        assert_eq!(resolve_threads(Some(2), Some("3"), Some(4)).unwrap(), 2);
        assert_eq!(resolve_threads(None, Some("3"), Some(4)).unwrap(), 3);
        assert_eq!(resolve_threads(None, None, Some(4)).unwrap(), 4);
        assert!(resolve_threads(None, None, None).unwrap() >= 1);
        assert!(resolve_threads(None, Some("many"), None).is_err());
        assert!(resolve_threads(Some(0), None, None).is_err());
    }

    #[test]
    fn table_paths() {
        let stem = Path::new("out/run");
        assert_eq!(table_path(stem, None, Format::Csv), PathBuf::from("out/run.csv"));
        assert_eq!(
            table_path(stem, Some("fit"), Format::Json),
            PathBuf::from("out/run_fit.json")
        );
    }
}
