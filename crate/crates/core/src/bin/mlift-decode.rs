use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use mlift::harness::{parse_decoders, parse_snr_list, run_sweep, write_csv, ExperimentConfig};
use mlift::Constellation;

#[derive(Parser)]
#[command(
    name = "mlift-decode",
    version,
    about = "Matrix-lifting SDP decoding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over SNR points and decoders, written as CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Complex transmit antennas.
    #[arg(long, default_value_t = 4)]
    tx: usize,
    /// Complex receive antennas.
    #[arg(long, default_value_t = 4)]
    rx: usize,
    /// bpsk, qpsk, 16qam, 64qam, ...
    #[arg(long = "mod", default_value = "16qam")]
    modulation: String,
    /// `start:step:stop` in dB, or a comma-separated list.
    #[arg(long, default_value = "0:2:20")]
    snr: String,
    /// Noise-free channel; the SNR list is ignored.
    #[arg(long)]
    noiseless: bool,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Comma-separated subset of mlift-full, mlift-equiv, mlift-reduced, ml, zf.
    #[arg(long, default_value = "mlift-reduced,ml,zf")]
    decoders: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Randomised rounding samples per decision.
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    #[arg(long)]
    out: PathBuf,
    /// Write every built relaxation to this directory in SDPA sparse format.
    #[arg(long)]
    dump_sdpa: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Report mean solve time (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

fn config(a: SweepArgs) -> mlift::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(a.tx, a.rx, Constellation::by_name(&a.modulation)?);
    cfg.snr_list = parse_snr_list(&a.snr)?;
    cfg.noiseless = a.noiseless;
    cfg.trials = a.trials;
    cfg.decoders = parse_decoders(&a.decoders)?;
    cfg.seed = a.seed;
    cfg.rounds = a.rounds;
    cfg.workers = a.workers;
    cfg.dump_sdpa = a.dump_sdpa;
    cfg.timing = a.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let Command::Sweep(args) = cli.command;
    let out = args.out.clone();
    let cfg = match config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let rows = match run_sweep(&cfg).and_then(|rows| write_csv(&rows, &out).map(|_| rows)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let failures: u64 = rows.iter().map(|r| r.failures).sum();
    if failures > 0 {
        eprintln!(
            "{failures} decoding failures, see the `failures` column of {}",
            out.display()
        );
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
