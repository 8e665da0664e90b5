use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use timeblock_bench::attractor::{attractor, attractor_csv, rank_correlation, AttractorOptions};
use timeblock_bench::config::CONFIG_HELP;
use timeblock_bench::experiment::{generate, run, spread, spread_csv, verify, write_tails};
use timeblock_bench::{Failure, RunConfig};
use timeblock_core::ansatz::Base;
use timeblock_core::ising::{generate_sk, SkInstance};
use timeblock_core::sim::NoiseModel;

/// Time-Block QAOA/QAMPA experiment runner.
///
/// Exit codes: 0 success, 1 runtime or verification failure, 2 config error,
/// 3 ground energy unavailable.
#[derive(Parser)]
#[command(name = "timeblock", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write SK instance files `sk_n<N>_i<IDX>.json`, with exact spectra up to n = 26.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Instance i uses generator seed `seed + i`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "instances")]
        out: PathBuf,
    },
    /// Run every (instance, k, p) study of a config; writes JSONL logs and summary.csv.
    #[command(after_long_help = CONFIG_HELP)]
    Run { config: PathBuf },
    /// Renormalized tail curves (tails_k{k}.csv) over depth fractions in [1, 2].
    Tails { config: PathBuf },
    /// Ordering-versus-angle spread table (spread.csv) from a random-search run.
    Spread { config: PathBuf },
    /// Recompute summary.csv from the JSONL logs and compare.
    Verify { config: PathBuf },
    /// r0-versus-best-AR table over bitflip masks.
    Attractor {
        /// Instance file; otherwise one is generated from --n and --instance-seed.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        instance_seed: u64,
        #[arg(long, default_value = "qampa", value_parser = parse_base)]
        base: Base,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        p: usize,
        #[arg(long, default_value_t = 11)]
        masks: usize,
        #[arg(long, default_value_t = 20)]
        angle_sets: usize,
        #[arg(long, default_value_t = 10)]
        orderings: usize,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long, default_value_t = 0.03)]
        amp_damping: f64,
        #[arg(long, default_value_t = 0.0)]
        depolarizing: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "attractor.csv")]
        out: PathBuf,
    },
}

fn parse_base(s: &str) -> Result<Base, String> {
    match s.to_ascii_lowercase().as_str() {
        "qaoa" => Ok(Base::Qaoa),
        "qampa" => Ok(Base::Qampa),
        other => Err(format!("unknown base `{other}` (expected qaoa or qampa)")),
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Generate { n, count, seed, out } => {
            let files = generate(n, count, seed, &out)?;
            println!("wrote {} instance files to {}", files.len(), out.display());
        }
        Command::Run { config } => {
            let config = RunConfig::load(&config)?;
            let rows = run(&config)?;
            println!("{} studies; summary at {}", rows.len(), config.study_dir().join("summary.csv").display());
        }
        Command::Tails { config } => {
            let config = RunConfig::load(&config)?;
            for path in write_tails(&config)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Spread { config } => {
            let config = RunConfig::load(&config)?;
            let path = config.study_dir().join("spread.csv");
            std::fs::create_dir_all(config.study_dir())?;
            std::fs::write(&path, spread_csv(&spread(&config)?))?;
            println!("wrote {}", path.display());
        }
        Command::Verify { config } => {
            let config = RunConfig::load(&config)?;
            println!("summary matches logs ({} rows)", verify(&config)?);
        }
        Command::Attractor {
            instance,
            n,
            instance_seed,
            base,
            k,
            p,
            masks,
            angle_sets,
            orderings,
            shots,
            amp_damping,
            depolarizing,
            seed,
            out,
        } => {
            let instance = match instance {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Failure::Config(format!("instance: cannot read {}: {e}", path.display())))?;
                    SkInstance::from_json(&text).map_err(|e| Failure::Config(format!("instance: {e}")))?.0
                }
                None => generate_sk(n, instance_seed).map_err(|e| Failure::Config(format!("n: {e}")))?,
            };
            let noise = NoiseModel { amp_damping_per_2q: amp_damping, depolarizing_per_2q: depolarizing, ..NoiseModel::noiseless() };
            noise.validate().map_err(|e| Failure::Config(format!("noise: {e}")))?;
            let options = AttractorOptions { base, k, p, masks, angle_sets, orderings, shots, noise, seed };
            let rows = attractor(&instance, &options)?;
            std::fs::write(&out, attractor_csv(&rows))?;
            match rank_correlation(&rows) {
                Some(rho) => println!("wrote {} (spearman r0 vs best AR = {rho:.4})", out.display()),
                None => println!("wrote {}", out.display()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("error: cannot configure {workers} workers: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
