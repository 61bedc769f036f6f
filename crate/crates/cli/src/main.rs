use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use smooth_trade::adversary::{Adversary, AdversarySpec};
use smooth_trade::harness::{
    record_to_csv, record_to_json, run_episode, run_mat, sweep, sweep_to_csv, sweep_to_json,
    to_json_string, write_output, MatConfig, OutputFormat, RunConfig, WORKERS_ENV,
};
use smooth_trade::verify::{verify, Suite};

#[derive(Parser)]
#[command(
    name = "smooth-trade",
    version,
    about = "Repeated bilateral trade simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its trajectory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `.json` writes JSON, anything else CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean regret over seeds at several horizons, with a log-log fit.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated horizons.
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
        /// Seeds `0..n` per horizon.
        #[arg(long)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
    /// Run a self-check suite; exits nonzero if any check fails.
    Verify {
        /// core, adversaries, estimator, mat or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Best fixed price of an adversary.
    Oracle {
        #[arg(long)]
        adversary: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        resolution: usize,
    },
    /// Run a batch of 2K-action episodes.
    Mat {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, seed, out } => {
            let cfg = RunConfig::from_json(&read(&config)?)?;
            let record = run_episode(&cfg, seed)?;
            let text = match OutputFormat::from_path(&out) {
                OutputFormat::Json => record_to_json(&record)?,
                OutputFormat::Csv => record_to_csv(&record),
            };
            write_output(&out, &text)?;
            println!(
                "T={} seed={} payoff={:.6} oracle={:.6} regret={:.6}",
                record.horizon, seed, record.cum_payoff, record.oracle_value, record.regret
            );
        }
        Command::Sweep {
            config,
            horizons,
            seeds,
            out,
            workers,
        } => {
            let cfg = RunConfig::from_json(&read(&config)?)?;
            let seeds: Vec<u64> = (0..seeds).collect();
            let result = sweep(&cfg, &horizons, &seeds, workers)?;
            let text = match OutputFormat::from_path(&out) {
                OutputFormat::Json => sweep_to_json(&result)?,
                OutputFormat::Csv => sweep_to_csv(&result),
            };
            write_output(&out, &text)?;
            for p in &result.points {
                println!(
                    "T={} mean_regret={:.4} stderr={:.4} n={}",
                    p.horizon, p.mean_regret, p.stderr, p.n_seeds
                );
            }
            match result.fit {
                Some(fit) => println!("slope={:.4} intercept={:.4}", fit.slope, fit.intercept),
                None => println!("regret ≤ stderr at every horizon; no slope fitted"),
            }
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let report = verify(suite)?;
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Oracle {
            adversary,
            resolution,
        } => {
            let spec: AdversarySpec = serde_json::from_str(&read(&adversary)?)
                .with_context(|| format!("parsing {}", adversary.display()))?;
            let adv = Adversary::new(spec)?;
            let (price, value) = adv.best_fixed_price(resolution)?;
            let (smooth, sup) = adv.check_smoothness();
            println!("best_price={price:.16e}");
            println!("value={value:.16e}");
            println!("sigma={} sup_density={sup:.6} smooth={smooth}", adv.sigma());
        }
        Command::Mat {
            config,
            out,
            workers,
        } => {
            let cfg = MatConfig::from_json(&read(&config)?)?;
            let report = run_mat(&cfg, workers)?;
            if let Some(out) = out {
                if OutputFormat::from_path(&out) != OutputFormat::Json {
                    bail!("mat output must be a .json path");
                }
                write_output(&out, &to_json_string(&report)?)?;
            }
            println!(
                "K={} T={} policy={} episodes={} mean_regret={:.6} stderr={:.6}",
                report.big_k,
                report.horizon,
                report.policy,
                report.episodes.len(),
                report.mean_regret,
                report.stderr
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
