use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinchain_cli::{config_base, experiments, output_dir, report, sweep, CliError, CliResult, ExperimentConfig, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "spinchain", version, about = "Pulse-level spin chain simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a gate circuit to a pulse schedule.
    Compile {
        circuit: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for `schedule.txt`; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria and print one row per criterion.
    Report {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        filter: Option<String>,
    },
    /// Run a cartesian sweep over the config's `[sweep]` fields.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

const DEFAULT_COMPILE_CONFIG: &str = "[chain]\npattern = \"ABC\"\nj = 1.0\n[experiment]\nname = \"circuit\"\n";

fn out_for(flag: Option<&Path>, cfg: &ExperimentConfig, config: &Path) -> PathBuf {
    output_dir(flag, std::env::var(OUT_DIR_ENV).ok().as_deref(), cfg, &config_base(config))
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_for(out.as_deref(), &cfg, &config);
            let res = experiments::run(&cfg, &config_base(&config), &dir)?;
            for f in &res.files {
                println!("{}", res.dir.join(f).display());
            }
            Ok(())
        }
        Command::Compile { circuit, config, out } => {
            let cfg = match &config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::from_toml(DEFAULT_COMPILE_CONFIG)?,
            };
            let text = experiments::compile_circuit(&circuit, &cfg)?.to_text();
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| CliError::simulation(format!("{}: {e}", dir.display())))?;
                    let path = dir.join("schedule.txt");
                    std::fs::write(&path, text).map_err(|e| CliError::simulation(format!("{}: {e}", path.display())))?;
                    println!("{}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Report { config, filter } => {
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            let rows = report::run(cfg.as_ref(), filter.as_deref())?;
            print!("{}", report::render(&rows));
            match rows.iter().filter(|r| !r.passed).count() {
                0 => Ok(()),
                n => Err(CliError::Acceptance(n)),
            }
        }
        Command::Sweep { config, out, jobs } => {
            if jobs == 0 {
                return Err(CliError::config("--jobs must be at least 1"));
            }
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_for(out.as_deref(), &cfg, &config);
            let points = sweep::run(&cfg, &config_base(&config), &dir, jobs)?;
            println!("{} points written to {}", points.len(), dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinchain: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
