use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, CommandOutput};
use crate::config::{self, CommandName, LoadedConfig};
use crate::error::CliError;
use crate::output::{sha256_hex, timestamp, to_json, OutputDir, RunManifest, TaskStatus};
use crate::sweep;

pub const DEFAULT_OUT_DIR: &str = "cavsqueeze-out";

#[derive(Debug, Parser)]
#[command(name = "cavsqueeze", version, about = "Cavity squeezing by atomic ensembles: regime checks, effective model, dynamics, input-output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regime table, matching-condition residual and coherence report.
    Validate(Common),
    /// Effective parametric coupling, squeeze parameter and scaling.
    Effective(Common),
    /// Full ladder dynamics against the ideal squeeze operator.
    Simulate(Common),
    /// Output squeezing of the driven, damped parametric cavity.
    Inout(Common),
    /// Runs another command over a grid of parameter values.
    Sweep(Common),
}

#[derive(Debug, Clone, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output.directory, then ./cavsqueeze-out).
    #[arg(long, env = "CAVSQUEEZE_OUT")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides sites.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Gate failures become errors (exit 2).
    #[arg(long)]
    strict: bool,
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit()
        }
    }
}

fn load(common: &Common) -> Result<LoadedConfig, CliError> {
    let mut loaded = config::load(&common.config)?;
    if let Some(seed) = common.seed {
        let v = i64::try_from(seed).map_err(|_| CliError::Config(format!("--seed {seed} does not fit a TOML integer")))?;
        config::set_path(&mut loaded.raw, "sites.seed", toml::Value::Integer(v))?;
        loaded.config = config::parse_table(&loaded.raw)?;
    }
    Ok(loaded)
}

fn out_dir(common: &Common, loaded: &LoadedConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| loaded.config.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn manifest(command: &str, loaded: &LoadedConfig, threads: usize, common: &Common) -> RunManifest {
    RunManifest {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config_sha256: sha256_hex(&loaded.bytes),
        timestamp: timestamp(),
        threads,
        seed: common.seed.or(loaded.config.sites.seed),
        effective: None,
        tasks: Vec::new(),
        warnings: Vec::new(),
        files: Vec::new(),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (name, common) = match &cli.command {
        Command::Validate(c) => (Some(CommandName::Validate), c),
        Command::Effective(c) => (Some(CommandName::Effective), c),
        Command::Simulate(c) => (Some(CommandName::Simulate), c),
        Command::Inout(c) => (Some(CommandName::Inout), c),
        Command::Sweep(c) => (None, c),
    };
    let loaded = load(common)?;
    match name {
        Some(cmd) => run_single(cmd, common, &loaded),
        None => run_sweep(common, &loaded),
    }
}

fn write_outputs(dir: &mut OutputDir, stem: &str, csv: Option<String>, json: Option<String>) -> Result<(), CliError> {
    if let Some(c) = csv {
        dir.write(&format!("{stem}.csv"), &c)?;
    }
    if let Some(j) = json {
        dir.write(&format!("{stem}.json"), &j)?;
    }
    Ok(())
}

fn run_single(cmd: CommandName, common: &Common, loaded: &LoadedConfig) -> Result<ExitCode, CliError> {
    let threads = common.threads.unwrap_or(1).max(1);
    let mut man = manifest(cmd.as_str(), loaded, threads, common);
    let dir_path = out_dir(common, loaded);
    let result = commands::run(cmd, &loaded.config);
    let out: CommandOutput = match result {
        Ok(o) => o,
        Err(e @ CliError::Config(_)) => return Err(e),
        Err(e) => {
            // Record the failure before exiting.
            let dir = OutputDir::create(&dir_path)?;
            man.tasks.push(TaskStatus { task: cmd.as_str().into(), status: format!("failed: {e}") });
            dir.finish(man)?;
            return Err(e);
        }
    };
    if let Some(b) = &out.banner {
        eprintln!("{b}");
    }
    print!("{}", out.text);
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let gates_fatal = match cmd {
        CommandName::Validate => !loaded.config.gates.warn_only || common.strict,
        _ => common.strict,
    };
    for g in &out.gate_failures {
        eprintln!("{}: {g}", if gates_fatal { "gate failed" } else { "warning" });
    }
    let (csv, json) = loaded.config.formats();
    let mut dir = OutputDir::create(&dir_path)?;
    write_outputs(&mut dir, cmd.as_str(), csv.then(|| out.table.to_csv()), json.then(|| out.json.clone()))?;
    let failed = gates_fatal && !out.gate_failures.is_empty();
    man.effective = out.effective.clone();
    man.warnings = out.gate_failures.iter().chain(&out.warnings).cloned().collect();
    man.tasks.push(TaskStatus { task: cmd.as_str().into(), status: if failed { "gate-failed" } else { "ok" }.into() });
    dir.finish(man)?;
    if failed {
        return Err(CliError::Validation(format!("{} gate(s) failed", out.gate_failures.len())));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(common: &Common, loaded: &LoadedConfig) -> Result<ExitCode, CliError> {
    let threads = common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let outcome = sweep::run(loaded, threads, common.strict)?;
    print!("{}", sweep::summary(&outcome.report));
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let mut man = manifest("sweep", loaded, threads, common);
    let (csv, json) = loaded.config.formats();
    let mut dir = OutputDir::create(&out_dir(common, loaded))?;
    write_outputs(&mut dir, "sweep", csv.then(|| outcome.table.to_csv()), json.then(|| to_json(&outcome.report)).transpose()?)?;
    man.tasks = outcome.tasks;
    man.warnings = outcome.warnings;
    dir.finish(man)?;
    Ok(ExitCode::SUCCESS)
}
