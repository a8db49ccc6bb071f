use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oplab_cli::config::{CheckKind, CheckSpec};
use oplab_cli::report::sanitize;
use oplab_cli::scenarios::BUILTINS;
use oplab_cli::{emit_report, resolve_target, run_all, threads_from_env, Format, Overrides, RunReport, ScenarioConfig};
use oplab_core::lower_bounds::PipelineMode;

/// Numerical laboratory for positive operator semigroups.
///
/// Exit status: 0 when every check passes, 1 when some check fails or is
/// inconclusive, 2 on usage, configuration or I/O errors.
#[derive(Parser)]
#[command(name = "oplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run builtin scenarios (or `all`) and config files.
    Run {
        #[arg(required = true)]
        targets: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// List the builtin scenarios.
    List,
    /// Print the config of a builtin scenario or file as JSON.
    Show { target: String },
    /// Asymptotic domination of one semigroup's orbit by another's.
    CheckDomination {
        target: String,
        /// Dominated semigroup; defaults to the first one in the config.
        #[arg(long)]
        f: Option<String>,
        /// Dominating semigroup; defaults to the second one in the config.
        #[arg(long)]
        g: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Lower-bound certificate and the convergence pipeline built on it.
    CheckLowerBound {
        target: String,
        /// Semigroup to certify; defaults to the first one in the config.
        #[arg(long = "semigroup")]
        semigroup: Option<String>,
        #[arg(long, value_enum, default_value = "universal")]
        mode: Mode,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// End of the observation window.
    #[arg(long)]
    horizon: Option<f64>,
    /// Tolerance for checks that do not set their own.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report files; reports are written only when given.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mode {
    Individual,
    Universal,
    UniversalMean,
}

impl From<Mode> for PipelineMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Individual => PipelineMode::Individual,
            Mode::Universal => PipelineMode::Universal,
            Mode::UniversalMean => PipelineMode::UniversalMean,
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::List => {
            for b in &BUILTINS {
                println!("{:<36} {}", b.name, b.summary);
            }
            Ok(true)
        }
        Command::Show { target } => {
            let cfg = resolve_target(&target).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&cfg).map_err(|e| e.to_string())?);
            Ok(true)
        }
        Command::Run { targets, common } => {
            let mut configs = Vec::new();
            for t in &targets {
                if t == "all" {
                    configs.extend(BUILTINS.iter().map(|b| b.config()));
                } else {
                    configs.push(resolve_target(t).map_err(|e| e.to_string())?);
                }
            }
            execute(configs, &common, "")
        }
        Command::CheckDomination { target, f, g, common } => {
            let mut cfg = resolve_target(&target).map_err(|e| e.to_string())?;
            let names: Vec<String> = cfg.semigroups.keys().cloned().collect();
            let f = f.or_else(|| names.first().cloned()).ok_or("config defines no semigroups")?;
            let g = g
                .or_else(|| names.get(1).cloned())
                .ok_or("config defines one semigroup; name the other with --g")?;
            cfg.checks = vec![CheckSpec::new(CheckKind::Domination).on(&f).against(&g)];
            execute(vec![cfg], &common, ".domination")
        }
        Command::CheckLowerBound { target, semigroup, mode, common } => {
            let mut cfg = resolve_target(&target).map_err(|e| e.to_string())?;
            let s = semigroup
                .or_else(|| cfg.semigroups.keys().next().cloned())
                .ok_or("config defines no semigroups")?;
            cfg.checks = vec![CheckSpec::new(CheckKind::Pipeline).on(&s).mode(mode.into())];
            execute(vec![cfg], &common, ".lower-bound")
        }
    }
}

fn execute(configs: Vec<ScenarioConfig>, common: &Common, suffix: &str) -> Result<bool, String> {
    let overrides = Overrides {
        horizon: common.horizon,
        tol: common.tol,
        seed: common.seed,
    };
    let configs: Vec<ScenarioConfig> = configs.into_iter().map(|c| overrides.apply(c)).collect();
    let threads = threads_from_env()?;
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    let mut all_pass = true;
    let mut first_error = None;
    for (cfg, res) in configs.iter().zip(run_all(&configs, threads)) {
        match res {
            Ok(report) => {
                all_pass &= report.passed;
                print_summary(&report);
                if let Some(dir) = &common.out {
                    write(&report, dir, suffix, common.format)?;
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", cfg.name);
                first_error.get_or_insert(format!("scenario {:?} could not run", cfg.name));
            }
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(all_pass),
    }
}

fn write(report: &RunReport, dir: &Path, suffix: &str, format: Format) -> Result<(), String> {
    let ext = match format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let path = dir.join(format!("{}{suffix}.{ext}", sanitize(&report.scenario)));
    let files = emit_report(report, format, &path).map_err(|e| e.to_string())?;
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn print_summary(report: &RunReport) {
    println!(
        "{} [{}] {}",
        report.scenario,
        &report.input_digest[..12],
        if report.passed { "PASS" } else { "FAIL" }
    );
    for c in &report.checks {
        println!("  {:<13} {:<40} {}", c.verdict.as_str(), c.name, c.diagnostic);
    }
}
