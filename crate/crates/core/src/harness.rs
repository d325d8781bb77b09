//! Seeded Monte-Carlo sweeps over SNR and decoders, and CSV output.
//!
//! Every trial draws its instance from a seed derived from
//! `(seed, snr index, trial)` only, and all decoders see the same instance.
//! Trials run on a rayon pool and are aggregated in trial order, so the
//! output does not depend on the number of workers.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formulation::{build, build_objective_data, Formulation};
use crate::model::{
    ml_oracle, sample_instance, zf_baseline, Constellation, MimoInstance, NoiseLevel,
    DEFAULT_ENUMERATION_CAP,
};
use crate::recovery::{decode_lifted, DecodeOptions};
use crate::sdp::{sdpa, SolverConfig};

pub const CSV_HEADER: &str = "snr_db,decoder,trials,symbol_errors,bit_errors,ser,ber,avg_solver_iters,avg_solve_ms,avg_relax_gap,failures";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Mlift(Formulation),
    Ml,
    Zf,
}

impl DecoderKind {
    pub fn id(&self) -> &'static str {
        match self {
            DecoderKind::Mlift(f) => f.id(),
            DecoderKind::Ml => "ml",
            DecoderKind::Zf => "zf",
        }
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ml" => Ok(DecoderKind::Ml),
            "zf" => Ok(DecoderKind::Zf),
            other => other
                .parse::<Formulation>()
                .map(DecoderKind::Mlift)
                .map_err(|_| Error::InvalidParameter(format!("unknown decoder `{other}`"))),
        }
    }
}

pub fn parse_decoders(s: &str) -> Result<Vec<DecoderKind>> {
    let mut out: Vec<DecoderKind> = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let d: DecoderKind = part.parse()?;
        if !out.contains(&d) {
            out.push(d);
        }
    }
    Ok(out)
}

/// `a:step:b` (inclusive) or a comma-separated list.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("bad SNR list `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (
                num(a).ok_or_else(bad)?,
                num(step).ok_or_else(bad)?,
                num(b).ok_or_else(bad)?,
            );
            if step <= 0.0 || b < a {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * step).collect())
        }
        [_] => {
            let v: Option<Vec<f64>> = s.split(',').map(num).collect();
            v.filter(|v| !v.is_empty()).ok_or_else(bad)
        }
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Complex transmit antennas.
    pub tx: usize,
    /// Complex receive antennas.
    pub rx: usize,
    pub modulation: Constellation,
    pub snr_list: Vec<f64>,
    /// Ignore `snr_list` and run one noiseless point.
    pub noiseless: bool,
    pub trials: usize,
    pub decoders: Vec<DecoderKind>,
    pub seed: u64,
    pub rounds: usize,
    pub workers: usize,
    pub dump_sdpa: Option<PathBuf>,
    /// Fill `avg_solve_ms`; wall-clock times make the output
    /// non-reproducible.
    pub timing: bool,
    pub solver: SolverConfig,
    pub ml_cap: u128,
}

impl ExperimentConfig {
    pub fn new(tx: usize, rx: usize, modulation: Constellation) -> Self {
        Self {
            tx,
            rx,
            modulation,
            snr_list: vec![10.0],
            noiseless: false,
            trials: 100,
            decoders: vec![
                DecoderKind::Mlift(Formulation::Reduced),
                DecoderKind::Ml,
                DecoderKind::Zf,
            ],
            seed: 42,
            rounds: 100,
            workers: 1,
            dump_sdpa: None,
            timing: false,
            solver: SolverConfig::from_env(),
            ml_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.tx == 0 || self.rx == 0 {
            return bad("antenna counts must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.snr_list.is_empty() && !self.noiseless {
            return bad("SNR list is empty");
        }
        if self.decoders.is_empty() {
            return bad("no decoders selected");
        }
        if self.decoders.contains(&DecoderKind::Ml) {
            let n = 2 * self.tx as u32;
            let candidates = (self.modulation.len() as u128)
                .checked_pow(n)
                .unwrap_or(u128::MAX);
            if candidates > self.ml_cap {
                return Err(Error::EnumerationCap {
                    candidates,
                    cap: self.ml_cap,
                });
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<NoiseLevel> {
        if self.noiseless {
            vec![NoiseLevel::Noiseless]
        } else {
            self.snr_list
                .iter()
                .map(|&d| NoiseLevel::SnrDb(d))
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub snr_db: f64,
    pub decoder: String,
    /// Trials that produced a decision (attempts minus failures).
    pub trials: u64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    /// Per real-dimension symbol.
    pub ser: f64,
    pub ber: f64,
    pub avg_solver_iters: Option<f64>,
    pub avg_solve_ms: Option<f64>,
    /// Slowest single solve; not part of the CSV.
    pub max_solve_ms: Option<f64>,
    /// Mean of ML minimum minus relaxation optimum, when ML also ran.
    pub avg_relax_gap: Option<f64>,
    pub failures: u64,
}

#[derive(Debug, Clone, Default)]
struct Outcome {
    failed: bool,
    symbol_errors: u64,
    bit_errors: u64,
    iters: Option<usize>,
    solve_ms: Option<f64>,
    relax_gap: Option<f64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one stream of one trial; `salt` separates the instance stream
/// from per-decoder streams.
pub fn trial_seed(seed: u64, snr_index: usize, trial: usize, salt: u64) -> u64 {
    [snr_index as u64, trial as u64, salt]
        .iter()
        .fold(splitmix64(seed), |h, &v| splitmix64(h ^ v))
}

/// The instance of one trial, as drawn by [`run_sweep`].
pub fn trial_instance(
    cfg: &ExperimentConfig,
    snr_index: usize,
    trial: usize,
) -> Result<MimoInstance> {
    let noise = cfg.points()[snr_index];
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, snr_index, trial, 0));
    sample_instance(&mut rng, &cfg.modulation, cfg.tx, cfg.rx, noise)
}

fn count_errors(
    x_hat: &nalgebra::DVector<f64>,
    inst: &MimoInstance,
    c: &Constellation,
) -> (u64, u64) {
    let mut sym = 0;
    let mut bits = 0;
    for (a, b) in x_hat.iter().zip(inst.x_true.iter()) {
        let ia = c.nearest_index(*a);
        let ib = c.nearest_index(*b);
        if ia != ib {
            sym += 1;
            bits += u64::from((c.gray_label(ia) ^ c.gray_label(ib)).count_ones());
        }
    }
    (sym, bits)
}

fn run_trial(cfg: &ExperimentConfig, snr_index: usize, trial: usize) -> Result<Vec<Outcome>> {
    let c = &cfg.modulation;
    let inst = trial_instance(cfg, snr_index, trial)?;
    let ml_min = if cfg.decoders.contains(&DecoderKind::Ml) {
        Some(ml_oracle(&inst, c, cfg.ml_cap)?)
    } else {
        None
    };
    let od = build_objective_data(&inst, c);
    let mut out = Vec::with_capacity(cfg.decoders.len());
    for (d_idx, d) in cfg.decoders.iter().enumerate() {
        let o = match d {
            DecoderKind::Ml => {
                let ml = ml_min.as_ref().expect("ML ran above");
                let (s, b) = count_errors(&ml.x_hat, &inst, c);
                Outcome {
                    symbol_errors: s,
                    bit_errors: b,
                    ..Outcome::default()
                }
            }
            DecoderKind::Zf => match zf_baseline(&inst, c) {
                Ok(x) => {
                    let (s, b) = count_errors(&x, &inst, c);
                    Outcome {
                        symbol_errors: s,
                        bit_errors: b,
                        ..Outcome::default()
                    }
                }
                Err(Error::RankDeficient) => Outcome {
                    failed: true,
                    ..Outcome::default()
                },
                Err(e) => return Err(e),
            },
            DecoderKind::Mlift(f) => {
                let lifted = build(*f, &od)?;
                if let Some(dir) = &cfg.dump_sdpa {
                    let name = format!("snr{snr_index:03}_trial{trial:06}_{}.dat-s", f.id());
                    sdpa::write_file(&lifted.problem, dir.join(name))?;
                }
                let opts = DecodeOptions {
                    formulation: Some(*f),
                    rounds: cfg.rounds,
                    solver: cfg.solver.clone(),
                    ml_oracle: false,
                    ml_cap: cfg.ml_cap,
                };
                let salt = 1 + d_idx as u64;
                let mut rng =
                    ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, snr_index, trial, salt));
                match decode_lifted(&inst, c, &od, &lifted, &opts, &mut rng) {
                    Ok(r) => {
                        let (s, b) = count_errors(&r.x_hat, &inst, c);
                        Outcome {
                            failed: false,
                            symbol_errors: s,
                            bit_errors: b,
                            iters: Some(r.iterations),
                            solve_ms: Some(r.solve_time.as_secs_f64() * 1e3),
                            relax_gap: ml_min
                                .as_ref()
                                .map(|ml| ml.distance_sq - od.offset - r.relaxed_obj),
                        }
                    }
                    Err(Error::SolverFailed { .. }) => Outcome {
                        failed: true,
                        ..Outcome::default()
                    },
                    Err(e) => return Err(e),
                }
            }
        };
        out.push(o);
    }
    Ok(out)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Run every (SNR, trial) and aggregate one row per (SNR, decoder).
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    if let Some(dir) = &cfg.dump_sdpa {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let n_real = 2 * cfg.tx;
    let bits = u64::from(cfg.modulation.bits_per_symbol());
    let mut rows = Vec::new();
    for (snr_index, noise) in cfg.points().into_iter().enumerate() {
        let outcomes: Vec<Vec<Outcome>> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, snr_index, t))
                .collect::<Result<_>>()
        })?;
        for (d_idx, d) in cfg.decoders.iter().enumerate() {
            let ok: Vec<&Outcome> = outcomes
                .iter()
                .map(|o| &o[d_idx])
                .filter(|o| !o.failed)
                .collect();
            let trials = ok.len() as u64;
            let symbol_errors: u64 = ok.iter().map(|o| o.symbol_errors).sum();
            let bit_errors: u64 = ok.iter().map(|o| o.bit_errors).sum();
            let symbols = trials * n_real as u64;
            let ratio = |e: u64, total: u64| {
                if total == 0 {
                    0.0
                } else {
                    e as f64 / total as f64
                }
            };
            rows.push(MetricsRow {
                snr_db: noise.snr_db(),
                decoder: d.id().to_string(),
                trials,
                symbol_errors,
                bit_errors,
                ser: ratio(symbol_errors, symbols),
                ber: ratio(bit_errors, symbols * bits),
                avg_solver_iters: mean(ok.iter().filter_map(|o| o.iters.map(|v| v as f64))),
                avg_solve_ms: if cfg.timing {
                    mean(ok.iter().filter_map(|o| o.solve_ms))
                } else {
                    None
                },
                max_solve_ms: if cfg.timing {
                    ok.iter().filter_map(|o| o.solve_ms).reduce(f64::max)
                } else {
                    None
                },
                avg_relax_gap: mean(ok.iter().filter_map(|o| o.relax_gap)),
                failures: cfg.trials as u64 - trials,
            });
        }
    }
    Ok(rows)
}

/// Locale-independent decimal with at most 10 significant digits.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{v:.9e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

pub fn csv_string(rows: &[MetricsRow]) -> String {
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            format_number(r.snr_db),
            r.decoder,
            r.trials,
            r.symbol_errors,
            r.bit_errors,
            format_number(r.ser),
            format_number(r.ber),
            opt(r.avg_solver_iters),
            opt(r.avg_solve_ms),
            opt(r.avg_relax_gap),
            r.failures
        );
    }
    out
}

pub fn emit_csv<W: Write>(rows: &[MetricsRow], mut w: W) -> std::io::Result<()> {
    w.write_all(csv_string(rows).as_bytes())
}

pub fn write_csv(rows: &[MetricsRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, csv_string(rows)).map_err(|e| Error::io(path, e))
}
