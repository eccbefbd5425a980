//! Command-line front end: run experiments from a JSON config, validate trace
//! files, sweep over seeds, and expose the reference oracles.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use salab::config::{parse_config, ConfigError, RunConfig};
use salab::kernels::{NormalSampler, Uniform01};
use salab::oracles;
use salab::runner::{run_to_dir, RunError};
use salab::{rng, Trace};

#[derive(Parser)]
#[command(name = "sa-lab", about = "Stochastic approximation laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trace.csv + summary.json.
    Run(RunArgs),
    /// Validate the bookkeeping of a stored trace file.
    Check { trace: PathBuf },
    /// Run the same config across a seed range.
    Sweep(SweepArgs),
    /// Reference estimators, independent of the SA engine.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Half-open seed range, e.g. `0..100`.
    #[arg(long)]
    seeds: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Monte Carlo quantile of a scalar distribution.
    McQuantile {
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Dist::Normal)]
        dist: Dist,
    },
    /// Geometric median of points read from a JSON array of arrays.
    Weiszfeld {
        samples: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Lloyd fixed point for points read from a JSON array of arrays.
    Lloyd {
        samples: PathBuf,
        #[arg(long)]
        codes: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Normal,
    Uniform,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                CliError::Run(RunError::Config(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Run(RunError::Config(e))
    }
}

fn load_config(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(parse_config(&text)?)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = load_config(&args.config)?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            let out_dir = args
                .out
                .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
            let (out, trace_path, summary_path) = run_to_dir(&cfg, &out_dir)?;
            println!(
                "wrote {} ({} rows) and {}",
                trace_path.display(),
                out.trace.len(),
                summary_path.display()
            );
            println!(
                "final theta {:?}  truncations {}",
                out.summary.final_theta, out.summary.truncation_count
            );
            Ok(())
        }
        Command::Check { trace } => {
            let text = fs::read_to_string(&trace)?;
            let parsed = Trace::from_csv(&text).map_err(CliError::Other)?;
            parsed.validate().map_err(CliError::Other)?;
            println!("ok: {} rows", parsed.len());
            Ok(())
        }
        Command::Sweep(args) => {
            let cfg = load_config(&args.config)?;
            let (lo, hi) = parse_seed_range(&args.seeds)?;
            let base = args.out.unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
            let mut summaries = Vec::new();
            for seed in lo..hi {
                let mut c = cfg.clone();
                c.seed = seed;
                let dir = base.join(format!("seed-{seed}"));
                let (out, _, _) = run_to_dir(&c, &dir)?;
                println!(
                    "seed {seed}: tail {:?}  truncations {}",
                    out.summary.tail_mean, out.summary.truncation_count
                );
                summaries.push(out.summary);
            }
            let agg = serde_json::to_string_pretty(&summaries).expect("summaries serialize");
            fs::create_dir_all(&base)?;
            fs::write(base.join("sweep.json"), format!("{agg}\n"))?;
            Ok(())
        }
        Command::Oracle { which } => run_oracle(which),
    }
}

fn parse_seed_range(s: &str) -> Result<(u64, u64), CliError> {
    let bad = || CliError::Other(format!("bad seed range `{s}`, expected LO..HI"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if hi <= lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn read_points(path: &PathBuf) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Other(format!("{}: expected a JSON array of arrays: {e}", path.display())))
}

fn run_oracle(which: OracleCommand) -> Result<(), CliError> {
    match which {
        OracleCommand::McQuantile { q, n, seed, dist } => {
            let mut rng = rng::stream(seed, "oracle");
            let v = match dist {
                Dist::Normal => oracles::mc_quantile(
                    &NormalSampler { mean: 0.0, sd: 1.0 },
                    |x: &f64| *x,
                    q,
                    n,
                    &mut rng,
                ),
                Dist::Uniform => oracles::mc_quantile(&Uniform01, |x: &f64| *x, q, n, &mut rng),
            };
            println!("{}", serde_json::to_string(&v).unwrap());
            Ok(())
        }
        OracleCommand::Weiszfeld { samples, tol } => {
            let pts = read_points(&samples)?;
            let m = oracles::weiszfeld(&pts, tol, 10_000)
                .map_err(|e| CliError::Other(e.to_string()))?;
            println!("{}", serde_json::to_string(&m).unwrap());
            Ok(())
        }
        OracleCommand::Lloyd {
            samples,
            codes,
            iters,
            seed,
        } => {
            let pts = read_points(&samples)?;
            let mut rng = rng::stream(seed, "oracle");
            let dict = oracles::lloyd(&pts, codes, iters, &mut rng)
                .map_err(|e| CliError::Other(e.to_string()))?;
            println!("{}", serde_json::to_string(&dict.points).unwrap());
            Ok(())
        }
    }
}
