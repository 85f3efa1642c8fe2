use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use cuspwave::config::{parse_config, RunConfig};
use cuspwave::experiments::{run_experiment, ExperimentReport, Verdict, CATALOG, SUITE};

#[derive(Parser)]
#[command(name = "cuspwave", version, about = "Run dispersive-estimate experiments on cusp surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment (or `suite`) named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: Option<u64>,
        /// Print the resolved config and parameters without computing.
        #[arg(long)]
        dry_run: bool,
    },
    /// List the experiments and the acceptance suite.
    List,
}

fn list() {
    println!("experiments:");
    for (name, about) in CATALOG {
        println!("  {name:<28} {about}");
    }
    println!("suite (experiment = suite):");
    for e in SUITE {
        println!("  [{:>2}] {:<28} {}", e.criterion, e.label, e.experiment);
    }
}

fn load(path: &PathBuf, out: Option<PathBuf>, seed: Option<u64>, jobs: Option<u64>) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cfg = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(o) = out {
        cfg.out_dir = o.to_string_lossy().into_owned();
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(j) = jobs {
        cfg.jobs = j as usize;
    }
    Ok(cfg)
}

fn dry_run(cfg: &RunConfig) -> Result<(), String> {
    print!("{}", cfg.to_text());
    if cfg.is_suite() {
        for e in SUITE {
            let p = e.params(Some(cfg.seed)).map_err(|e| e.to_string())?;
            println!("# {} = {}", e.label, p);
        }
    } else {
        let p = cfg.resolved_params(&cfg.experiment).map_err(|e| e.to_string())?;
        println!("# parameters = {p}");
    }
    Ok(())
}

fn finish(report: &ExperimentReport, dir: &std::path::Path, started: Instant) -> Result<Verdict, String> {
    report.write(dir).map_err(|e| format!("writing {}: {e}", report.name))?;
    println!("{} ({:.1} s)", report.summary(), started.elapsed().as_secs_f64());
    Ok(report.verdict)
}

fn execute(cfg: &RunConfig) -> Result<Vec<Verdict>, String> {
    let dir = PathBuf::from(&cfg.out_dir);
    let mut verdicts = vec![];
    if cfg.is_suite() {
        for e in SUITE {
            let started = Instant::now();
            let report = e.run(Some(cfg.seed), cfg.jobs).map_err(|err| format!("{}: {err}", e.label))?;
            verdicts.push(finish(&report, &dir, started)?);
        }
    } else {
        let started = Instant::now();
        let params = cfg.resolved_params(&cfg.experiment).map_err(|e| e.to_string())?;
        let report = run_experiment(&cfg.experiment, &params, cfg.jobs).map_err(|e| format!("{}: {e}", cfg.experiment))?;
        verdicts.push(finish(&report, &dir, started)?);
    }
    Ok(verdicts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Run { config, out, seed, jobs, dry_run: dry } => {
            let cfg = match load(&config, out, seed, jobs) {
                Ok(c) => c,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(1);
                }
            };
            let result = if dry { dry_run(&cfg).map(|_| vec![]) } else { execute(&cfg) };
            match result {
                Ok(verdicts) => ExitCode::from(Verdict::exit_code(&verdicts) as u8),
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
