//! `hybridsum`: run experiments from a JSON config, or the verification
//! suite.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
//! 3 a theorem hypothesis fails (pass `--force` to run anyway).

mod commands;
mod store;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use hybridsum::config::RunConfig;
use hybridsum::verify::{all_checks, run_checks, Fault, VerifyOptions};

use commands::Failure;
use store::{config_hash, remove_all, write_atomic, write_outputs, Cache, Manifest};

#[derive(Parser)]
#[command(name = "hybridsum", version, about = "Short hybrid character sums on plane curves over F_p")]
struct Cli {
    /// Run even when a decidable hypothesis of the selected theorem fails.
    #[arg(long, global = true)]
    force: bool,
    /// Truncate windows at p - 1 instead of wrapping around.
    #[arg(long, global = true)]
    no_wrap: bool,
    /// Recompute even when a cached result exists.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Overrides the config's out_dir.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Cache directory; defaults to <out_dir>/.cache.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Curve points with y in J (points.csv).
    Points { config: PathBuf },
    /// S_n and u_n for every n in I (sums.csv).
    Sums { config: PathBuf },
    /// Moments M_1..M_kmax (moments.json).
    Moments { config: PathBuf },
    /// KS distances and histogram of u_n (distribution.json, histogram.csv).
    Distribution { config: PathBuf },
    /// |S| against the complete-sum bound (bounds.csv).
    Bounds { config: PathBuf },
    /// Matching shift tuples in [1, H]^(2j) (tuples.json).
    Tuples {
        config: PathBuf,
        #[arg(long, default_value_t = 2)]
        j: u32,
    },
    /// Runs the property suite and acceptance criteria.
    Verify {
        /// Only checks whose name contains this text.
        #[arg(long)]
        filter: Option<String>,
        /// Deliberately corrupt state to confirm the suite notices.
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    CorruptLogTable,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Verify { filter, fault } => return verify(filter.as_deref(), *fault),
        Command::Points { config } => run(&cli, "points", config),
        Command::Sums { config } => run(&cli, "sums", config),
        Command::Moments { config } => run(&cli, "moments", config),
        Command::Distribution { config } => run(&cli, "distribution", config),
        Command::Bounds { config } => run(&cli, "bounds", config),
        Command::Tuples { config, j } => run(&cli, &format!("tuples-j{j}"), config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("invalid configuration: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Hypothesis(m)) => {
            eprintln!("hypothesis check failed: {m} (use --force to run anyway)");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("HYBRIDSUM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("HYBRIDSUM_THREADS: {v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: &Cli, command: &str, config_path: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Failure::Validation(format!("{}: {e}", config_path.display())))?;
    let mut cfg: RunConfig = RunConfig::from_json(&text)
        .map_err(|e| Failure::Validation(e.to_string()))?
        .0;
    if cli.no_wrap {
        cfg.wrap = false;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.display().to_string();
    }
    let resolved = cfg.resolve().map_err(|e| Failure::Validation(e.to_string()))?;
    let out_dir = PathBuf::from(&cfg.out_dir);

    let theorem = matches!(command, "sums" | "moments" | "distribution");
    let hypotheses = if theorem {
        Some(commands::check_theorem(&resolved, cli.force)?)
    } else {
        None
    };

    // the output directory is not part of the result
    let mut keyed = cfg.clone();
    keyed.out_dir = String::new();
    let hash = config_hash(command, &keyed.canonical_json());
    let cache = Cache::new(cli.cache_dir.clone().unwrap_or_else(|| out_dir.join(".cache")));
    let cached = if cli.no_cache { None } else { cache.get(&hash) };
    let was_cached = cached.is_some();
    let outputs = match cached {
        Some(o) => o,
        None => {
            let o = match command {
                "points" => commands::points(&resolved)?,
                "sums" => commands::sums(&resolved, hypotheses.unwrap_or_default())?,
                "moments" => commands::moments_cmd(&resolved, hypotheses.unwrap_or_default())?,
                "distribution" => commands::distribution(&resolved, hypotheses.unwrap_or_default())?,
                "bounds" => commands::bounds(&resolved)?,
                t => {
                    let j = t.trim_start_matches("tuples-j").parse().unwrap_or(2);
                    commands::tuples(&resolved, j)?
                }
            };
            cache.put(&hash, &o)?;
            o
        }
    };

    let written = write_outputs(&out_dir, &outputs)?;
    let manifest = Manifest {
        command,
        config_hash: &hash,
        hybridsum_version: hybridsum::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        cached: was_cached,
        wall_time_secs: start.elapsed().as_secs_f64(),
        files: outputs.files.keys().map(String::as_str).collect(),
    };
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Other(e.into()))? + "\n";
    if let Err(e) = write_atomic(&out_dir.join("manifest.json"), body.as_bytes()) {
        remove_all(&written);
        return Err(e.into());
    }
    print!("{}", outputs.stdout);
    Ok(())
}

fn verify(filter: Option<&str>, fault: Option<FaultArg>) -> ExitCode {
    let opts = VerifyOptions {
        fault: fault.map(|FaultArg::CorruptLogTable| Fault::CorruptLogTable),
    };
    let results = run_checks(&all_checks(), filter, &opts);
    if results.is_empty() {
        eprintln!("no checks match the filter");
        return ExitCode::from(2);
    }
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut regressions = 0;
    for r in &results {
        let status = match (r.passed, r.known_unattainable()) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL*",
            (false, None) => "FAIL",
        };
        println!("{status:<5} {:<width$} {:>7.2}s  {}", r.name, r.seconds, r.detail);
        if let Some(why) = r.known_unattainable() {
            println!("      {:<width$}           known unattainable: {why}", "");
        }
        regressions += r.is_regression() as usize;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!(
        "{passed}/{} passed, {} known unattainable, {regressions} unexpected failures",
        results.len(),
        results.iter().filter(|r| r.known_unattainable().is_some()).count()
    );
    if regressions == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
