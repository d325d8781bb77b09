//! A small Monte-Carlo sweep, printed as CSV. The `mlift-decode sweep`
//! binary runs the same code with command-line options.
//!
//! Run: cargo run --release --example sweep

use mlift::harness::{
    csv_string, parse_decoders, parse_snr_list, run_sweep, ExperimentConfig, MetricsRow,
};
use mlift::Constellation;

pub fn config() -> mlift::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(2, 2, Constellation::by_name("qpsk")?);
    cfg.snr_list = parse_snr_list("0:5:10")?;
    cfg.decoders = parse_decoders("mlift-full,mlift-reduced,ml,zf")?;
    cfg.trials = 40;
    cfg.seed = 2024;
    cfg.validate()?;
    Ok(cfg)
}

pub fn run_example() -> mlift::Result<Vec<MetricsRow>> {
    let rows = run_sweep(&config()?)?;
    print!("{}", csv_string(&rows));
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> mlift::Result<()> {
    run_example().map(|_| ())
}
