//! Exhaustive maximum-likelihood search against zero-forcing on 2x2 16-QAM.
//!
//! Run: cargo run --release --example ml_vs_zf

use mlift::model::{ml_oracle, sample_instance, zf_baseline, DEFAULT_ENUMERATION_CAP};
use mlift::{Constellation, NoiseLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Symbol errors of (ML, ZF) over `trials` instances at `snr_db`.
pub fn count_errors(snr_db: f64, trials: usize, seed: u64) -> mlift::Result<(usize, usize)> {
    let c = Constellation::by_name("16qam")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ml, mut zf) = (0, 0);
    for _ in 0..trials {
        let inst = sample_instance(&mut rng, &c, 2, 2, NoiseLevel::SnrDb(snr_db))?;
        let m = ml_oracle(&inst, &c, DEFAULT_ENUMERATION_CAP)?;
        let z = zf_baseline(&inst, &c)?;
        let wrong =
            |x: &nalgebra::DVector<f64>| (x - &inst.x_true).iter().filter(|v| **v != 0.0).count();
        ml += wrong(&m.x_hat);
        zf += wrong(&z);
    }
    Ok((ml, zf))
}

pub fn run_example() -> mlift::Result<Vec<(f64, usize, usize)>> {
    let trials = 200;
    println!(
        "snr_db  ml_errors  zf_errors  (of {} real symbols)",
        4 * trials
    );
    let mut out = Vec::new();
    for snr in [5.0, 10.0, 15.0] {
        let (ml, zf) = count_errors(snr, trials, 1)?;
        println!("{snr:6}  {ml:9}  {zf:9}");
        out.push((snr, ml, zf));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> mlift::Result<()> {
    run_example().map(|_| ())
}
