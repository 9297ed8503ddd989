//! Full time-domain run: per-bin weighted mode matching, FIR filter design
//! and SDR over the evaluation grid.

use soundfield::cli::{Experiment, ExperimentConfig, Job, Method};

fn main() -> soundfield::Result<()> {
    let mut cfg = ExperimentConfig::paper();
    cfg.params.fft_length = 2048;
    let exp = Experiment::prepare(&cfg)?;
    println!(
        "{} loudspeakers, {} evaluation points, {} active bins",
        exp.speakers.len(),
        exp.grid.len(),
        exp.freq.active_bins().len()
    );
    for method in [Method::Pm, Method::Wmm] {
        let out = exp.run_jobs(&[Job::new(16, method)])?.pop().expect("one job");
        let peak = out.filters.taps.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        println!(
            "{:>3}: SDR {:.3} dB, filter length {}, peak tap {peak:.3e}",
            method.name(),
            out.report.sdr_db,
            out.filters.filter_length()
        );
    }
    Ok(())
}
