use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flock_core::scenario::{
    parse_config_with_overrides, run_comparison, run_replay, run_scenario, ScenarioConfig, ScenarioError,
};
use flock_core::unicycle::ReplayConfig;
use flock_core::VERSION;

const EXIT_CONFIG: u8 = 1;
const EXIT_FAULT: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "flock",
    about = "Position-based flocking simulator",
    disable_version_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trajectory, metrics and summary files.
    Run {
        /// Configuration file; flags override its keys.
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run all three control laws on each seed from identical initial states.
    Compare {
        config: Option<PathBuf>,
        /// Comma-separated seeds, or a half-open range such as `0..10`.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Seeds,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Replay the nine-robot differential-drive experiment.
    #[command(name = "replay-experiment")]
    ReplayExperiment {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "replay")]
        out: PathBuf,
        /// Heading-error gain (1/s).
        #[arg(long = "k_omega", default_value_t = 2.0)]
        k_omega: f64,
    },
    /// Print the version.
    Version,
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("range start: {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("range end: {e}"))?;
        if a >= b {
            return Err(format!("empty range {a}..{b}"));
        }
        return Ok(Seeds((a..b).collect()));
    }
    s.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("seed `{p}`: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Seeds)
}

/// One flag per configuration key; a flag beats the file.
#[derive(Args)]
struct Overrides {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "t_end")]
    t_end: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    vmax: Option<String>,
    #[arg(long)]
    umax: Option<String>,
    #[arg(long = "box")]
    box_size: Option<String>,
    #[arg(long = "v_init_max")]
    v_init_max: Option<String>,
    #[arg(long)]
    decimation: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, String)> {
        [
            ("model", &self.model),
            ("n", &self.n),
            ("dim", &self.dim),
            ("seed", &self.seed),
            ("t_end", &self.t_end),
            ("dt", &self.dt),
            ("radius", &self.radius),
            ("delta", &self.delta),
            ("k", &self.k),
            ("vmax", &self.vmax),
            ("umax", &self.umax),
            ("box", &self.box_size),
            ("v_init_max", &self.v_init_max),
            ("decimation", &self.decimation),
            ("out", &self.out),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect()
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Io(_) => EXIT_IO,
            ScenarioError::Config(_) | ScenarioError::Setup(_) | ScenarioError::Threads(_) => EXIT_CONFIG,
        };
        Failure::new(code, e.to_string())
    }
}

fn load_config(path: Option<&Path>, pairs: Vec<(String, String)>) -> Result<ScenarioConfig, Failure> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config_with_overrides(&text, &pairs).map_err(|e| {
        let prefix = path.map(|p| format!("{}: ", p.display())).unwrap_or_default();
        Failure::new(EXIT_CONFIG, format!("{prefix}{e}"))
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Version => {
            println!("flock {VERSION}");
            Ok(())
        }
        Command::Run { config, overrides } => {
            let config = load_config(config.as_deref(), overrides.pairs())?;
            let outcome = run_scenario(&config)?;
            let s = &outcome.summary;
            println!("wrote {}", outcome.trajectory.display());
            println!("wrote {}", outcome.metrics_path.display());
            println!("wrote {}", outcome.summary_path.display());
            match &s.fault {
                Some(f) => Err(Failure::new(EXIT_FAULT, format!("simulation fault: {f}"))),
                None => {
                    let g = s.final_gamma.map_or("NA".into(), |g| format!("{g:.4}"));
                    println!("final gamma {g}, max cohesion radius {:.3} m", s.max_cohesion_radius);
                    Ok(())
                }
            }
        }
        Command::Compare {
            config,
            seeds,
            overrides,
        } => {
            // Compare supplies its own seeds; the configured one is unused.
            let mut pairs = overrides.pairs();
            pairs.push(("seed".into(), seeds.0[0].to_string()));
            let config = load_config(config.as_deref(), pairs)?;
            let report = run_comparison(&config, &seeds.0)?;
            let paths = report
                .write(&config.out)
                .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
            print!("{report}");
            println!("wrote {} files under {}", paths.len(), config.out.display());
            let faults: Vec<String> = report
                .cells
                .iter()
                .filter_map(|c| c.fault.as_ref().map(|f| format!("seed {} {}: {f}", c.seed, c.variant)))
                .collect();
            if faults.is_empty() {
                Ok(())
            } else {
                Err(Failure::new(EXIT_FAULT, faults.join("\n")))
            }
        }
        Command::ReplayExperiment { seed, out, k_omega } => {
            let config = ReplayConfig {
                k_omega,
                ..ReplayConfig::nine_robots(seed)
            };
            let outcome = run_replay(&config, &out)?;
            println!("wrote {}", outcome.trajectory.display());
            println!("wrote {}", outcome.metrics_path.display());
            println!("wrote {}", outcome.summary_path.display());
            if let Some(f) = &outcome.summary.fault {
                return Err(Failure::new(EXIT_FAULT, format!("simulation fault: {f}")));
            }
            let replay = outcome.replay.as_ref().expect("no fault");
            let g = replay.final_gamma().map_or("NA".into(), |g| format!("{g:.4}"));
            println!("final gamma {g}, wall violations {}", replay.wall_violations.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
