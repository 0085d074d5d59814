use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fsi_harness::config::defaults_toml;
use fsi_harness::{exit, init_threads, parse_config, run, HarnessError, RunConfig, RunMode, RunOptions};

#[derive(Parser)]
#[command(name = "fsi-lab", version, about = "Coupled fluid-wave solver runs and numerical inequality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config; defaults apply to everything it leaves out.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapArg {
    Lambda,
    Pi,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Picard iteration and write norms, iterations and a checkpoint.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Picard map (overrides `mode`).
        #[arg(long, value_enum)]
        mode: Option<MapArg>,
        /// Recompute norms.csv from a saved checkpoint instead of solving.
        #[arg(long)]
        from_checkpoint: Option<PathBuf>,
        /// Run even if the initial data fails a compatibility condition.
        #[arg(long)]
        override_compat: bool,
    },
    /// Trace, symbol and hidden-regularity suites.
    VerifyLemmas(Common),
    /// Compatibility residuals of the configured initial data.
    CheckCompat(Common),
    /// Contraction factors of one Picard step over shrinking windows.
    ContractionStudy(Common),
    /// Manufactured-solution orders and L² decay of the Lamé solver.
    Mms(Common),
    /// Print the default config.
    PrintDefaults,
}

fn load(common: &Common, mode: RunMode) -> Result<RunConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    cfg.mode = mode;
    if let Some(o) = &common.output {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32, HarnessError> {
    let (cfg, opts) = match cli.command {
        Command::PrintDefaults => {
            print!("{}", defaults_toml());
            return Ok(exit::OK);
        }
        Command::Simulate { common, mode, from_checkpoint, override_compat } => {
            let base = match &common.config {
                Some(p) => parse_config(p)?.mode,
                None => RunConfig::default().mode,
            };
            let mode = match mode {
                Some(MapArg::Lambda) => RunMode::Lambda,
                Some(MapArg::Pi) => RunMode::Pi,
                None if base.picard().is_some() => base,
                None => return Err(HarnessError::Config("simulate needs mode = \"lambda\" or \"pi\" (or --mode)".into())),
            };
            let mut cfg = load(&common, mode)?;
            cfg.data.override_compat |= override_compat;
            (cfg, RunOptions { from_checkpoint })
        }
        Command::VerifyLemmas(c) => (load(&c, RunMode::Lemmas)?, RunOptions::default()),
        Command::CheckCompat(c) => (load(&c, RunMode::Compat)?, RunOptions::default()),
        Command::ContractionStudy(c) => (load(&c, RunMode::Contraction)?, RunOptions::default()),
        Command::Mms(c) => (load(&c, RunMode::Mms)?, RunOptions::default()),
    };
    init_threads()?;
    let summary = run(&cfg, &opts)?;
    eprintln!("wrote {} to {}", summary.artifacts.join(", "), cfg.output_dir.display());
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for c in &summary.failed_checks {
        eprintln!("check failed: {c}");
    }
    if let Some(e) = &summary.error {
        eprintln!("error [{}]: {}", e.code, e.message);
    }
    Ok(summary.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
