//! SDR of pressure matching and weighted mode matching against the number of
//! microphones. Pass a gain (e.g. `-- 10`) to scale the free-field transfers.

use soundfield::cli::{Experiment, ExperimentConfig, Job, Method, TransferSpec};

fn main() -> soundfield::Result<()> {
    let gain: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1.0);
    let mut cfg = ExperimentConfig::paper();
    cfg.transfers = TransferSpec::AnalyticPointSource { gain };
    let exp = Experiment::prepare(&cfg)?;
    let counts = [9, 16, 25, 36];
    let jobs: Vec<Job> = counts
        .iter()
        .flat_map(|&m| [Job::new(m, Method::Pm), Job::new(m, Method::Wmm)])
        .collect();
    let out = exp.run_jobs(&jobs)?;
    println!("gain {gain}\nmics     PM dB    WMM dB");
    for (i, m) in counts.iter().enumerate() {
        println!(
            "{m:>4}  {:>8.3}  {:>8.3}",
            out[2 * i].report.sdr_db,
            out[2 * i + 1].report.sdr_db
        );
    }
    Ok(())
}
