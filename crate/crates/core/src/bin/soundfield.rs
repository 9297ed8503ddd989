use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use soundfield::cli::{cmd_inspect, cmd_run, cmd_simulate, cmd_sweep, ExperimentConfig, Method};
use soundfield::Result;

#[derive(Parser)]
#[command(name = "soundfield", version, about = "Sound field reproduction experiments")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON); the built-in `paper` preset when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    mics: Option<usize>,
    #[arg(long, global = true)]
    method: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write simulated free-field impulse responses as a dataset.
    Simulate,
    /// Run one method and write report, error map, snapshots and filters.
    Run,
    /// Sweep microphone counts and methods.
    Sweep,
    /// Summarise a config file, dataset, run or sweep directory.
    Inspect { path: PathBuf },
}

fn load(args: &Args) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::paper(),
    };
    if let Some(m) = args.mics {
        cfg.mics = m;
    }
    if let Some(m) = &args.method {
        cfg.method = Method::parse(m)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = (|| -> Result<()> {
        match &args.command {
            Command::Inspect { path } => print!("{}", cmd_inspect(path)?),
            Command::Simulate => {
                let cfg = load(&args)?;
                let dir = cmd_simulate(&cfg, &cfg.output_dir)?;
                println!("dataset written to {}", dir.display());
            }
            Command::Run => {
                let cfg = load(&args)?;
                let out = cmd_run(&cfg, &cfg.output_dir)?;
                println!(
                    "{} with {} mics: SDR {:.2} dB ({})",
                    out.report.method,
                    out.report.mic_count,
                    out.report.sdr_db,
                    cfg.output_dir.display()
                );
            }
            Command::Sweep => {
                let cfg = load(&args)?;
                println!("mic_count,method,sdr_db");
                for row in cmd_sweep(&cfg, &cfg.output_dir)? {
                    println!("{},{},{:.3}", row.mic_count, row.method, row.sdr_db);
                }
            }
        }
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
