//! Writes simulated impulse responses in the dataset format, reads them back
//! and runs pressure matching on the measured transfers.

use soundfield::cli::{cmd_inspect, cmd_run, cmd_simulate, ExperimentConfig, Method, TransferSpec};

fn main() -> soundfield::Result<()> {
    let root = std::env::temp_dir().join("soundfield-dataset-example");
    let data = root.join("dataset");
    let mut cfg = ExperimentConfig::paper();
    cfg.params.fft_length = 1024;
    cmd_simulate(&cfg, &data)?;
    print!("{}", cmd_inspect(&data)?);

    cfg.transfers = TransferSpec::Dataset { path: data };
    cfg.method = Method::Pm;
    let run = root.join("run");
    let out = cmd_run(&cfg, &run)?;
    println!("pm on the dataset: SDR {:.3} dB", out.report.sdr_db);
    print!("{}", cmd_inspect(&run)?);
    Ok(())
}
