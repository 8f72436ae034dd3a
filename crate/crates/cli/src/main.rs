use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zeromode::{commands, exit, RunConfig, RunError};

/// Construct and classify zero-energy states of −Δ + V.
#[derive(Debug, Parser)]
#[command(name = "zeromode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose, solve and classify the configured potential.
    Classify(Common),
    /// Lorentz quasinorms of the potential, the kernel |x|^{2-n} or the state.
    Norms(Common),
    /// Run the inequality sweeps and write per-sample CSVs.
    Verify(Common),
    /// Multipole coefficient tables and κ_B.
    Expand(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: radial3, dipole3 or radial5.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 0 lets rayon decide.
    #[arg(long, value_name = "N", env = "ZEROMODE_THREADS", default_value_t = 0)]
    threads: usize,
    /// Seed for every random sweep (overrides `seed`).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, RunError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::parse(&text)?
            }
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => return Err(RunError::Config("one of --config or --preset is required".into())),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, commands::Runner) = match &cli.command {
        Command::Classify(c) => (c, commands::classify),
        Command::Norms(c) => (c, commands::norms),
        Command::Verify(c) => (c, commands::verify),
        Command::Expand(c) => (c, commands::expand),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(common.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(exit::FAILURE as u8);
        }
    };
    let result = common.load().and_then(|cfg| pool.install(|| run(&cfg)));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
