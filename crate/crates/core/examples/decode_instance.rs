//! Decode one 4x4 16-QAM received vector with the reduced lifting and
//! compare against exhaustive search.
//!
//! Run: cargo run --release --example decode_instance

use mlift::model::sample_instance;
use mlift::{decode, Constellation, DecodeOptions, DecodeResult, MimoInstance, NoiseLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> mlift::Result<(MimoInstance, DecodeResult)> {
    let c = Constellation::by_name("16qam")?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = sample_instance(&mut rng, &c, 4, 4, NoiseLevel::SnrDb(20.0))?;
    let opts = DecodeOptions {
        ml_oracle: true,
        ..DecodeOptions::default()
    };
    let r = decode(&inst, &c, &opts, &mut rng)?;
    println!(
        "{} solved in {} iterations ({:?})",
        r.formulation, r.iterations, r.status
    );
    println!("relaxed U~ = {:.3}", r.u_tilde);
    println!("relaxation bound  {:.6}", r.relaxed_obj);
    println!("rounded objective {:.6}", r.rounded_obj);
    if let Some(gap) = r.ml_gap {
        println!("ML minimum        {:.6}", r.relaxed_obj + gap);
    }
    println!("x_true = {}", inst.x_true.transpose());
    println!("x_hat  = {}", r.x_hat.transpose());
    for d in &r.diagnostics {
        println!("note: {d}");
    }
    Ok((inst, r))
}

#[allow(dead_code)]
fn main() -> mlift::Result<()> {
    run_example().map(|_| ())
}
