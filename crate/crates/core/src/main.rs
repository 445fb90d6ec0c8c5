use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lrdboot::experiment::{
    emit_estimate, emit_report, parse_config, preset, presets, run_estimator, run_scenario, ExperimentConfig,
};
use lrdboot::{ConfigError, Error, Result};

#[derive(Parser)]
#[command(name = "lrdboot", version, about = "Block bootstrap experiments for long-memory subordinated Gaussian series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo scenario and write its report.
    Run(RunArgs),
    /// List the built-in scenarios.
    Presets {
        /// Print the full config of one preset as JSON.
        #[arg(long)]
        show: Option<String>,
    },
    /// Estimate |J_m| only.
    EstimateJm(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config document.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Allow writing into a non-empty output directory.
    #[arg(long)]
    overwrite: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn load(args: &RunArgs) -> Result<ExperimentConfig> {
    if let Some(name) = &args.preset {
        return preset(name)
            .ok_or_else(|| ConfigError::new("<preset>", format!("unknown preset {name:?}")).into());
    }
    let path = args.config.as_deref().expect("clap enforces --config or --preset");
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(parse_config(&text)?)
}

fn out_dir(args: &RunArgs, config: &ExperimentConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("lrdboot-out"))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(ConfigError::new("--threads", "must be >= 1").into());
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(args: RunArgs) -> Result<()> {
    let config = load(&args)?;
    let dir = out_dir(&args, &config);
    check_target(&dir, args.overwrite)?;
    let report = with_threads(args.threads, || run_scenario(&config))?;
    for s in &report.sizes {
        println!(
            "n={} l={} p={} median sup|Jhat-|J_m||={:.4}",
            s.n, s.l, s.p, s.jm_deviation.median
        );
    }
    print_files(&emit_report(&report, &dir, args.overwrite)?);
    Ok(())
}

fn estimate(args: RunArgs) -> Result<()> {
    let config = load(&args)?;
    let dir = out_dir(&args, &config);
    check_target(&dir, args.overwrite)?;
    let report = with_threads(args.threads, || run_estimator(&config))?;
    for e in &report.entries {
        println!("n={} l={} A={} sup deviation={:.4}", e.meta.n, e.meta.l, e.meta.replicates, e.sup_deviation);
    }
    print_files(&emit_estimate(&report, &dir, args.overwrite)?);
    Ok(())
}

/// Fails before any computation if the output would be refused later.
fn check_target(dir: &Path, overwrite: bool) -> Result<()> {
    if overwrite || !dir.exists() {
        return Ok(());
    }
    let mut entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    if entries.next().is_some() {
        return Err(Error::OutputExists(dir.to_path_buf()));
    }
    Ok(())
}

fn list_presets(show: Option<String>) -> Result<()> {
    match show {
        Some(name) => {
            let config = preset(&name).ok_or_else(|| ConfigError::new("<preset>", format!("unknown preset {name:?}")))?;
            println!("{}", config.to_json());
        }
        None => {
            for p in presets() {
                println!("{:<12} {}", p.name, p.summary);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::EstimateJm(args) => estimate(args),
        Command::Presets { show } => list_presets(show),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
