//! Write a decoding relaxation in SDPA sparse format, read it back and
//! solve both copies.
//!
//! Run: cargo run --example sdpa_roundtrip

use mlift::formulation::{build, build_objective_data};
use mlift::model::sample_instance;
use mlift::sdp::{sdpa, solve, SolverConfig};
use mlift::{Constellation, Formulation, NoiseLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Objective values of the original and the re-read problem.
pub fn run_example() -> mlift::Result<(f64, f64)> {
    let c = Constellation::by_name("qpsk")?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let inst = sample_instance(&mut rng, &c, 2, 2, NoiseLevel::SnrDb(6.0))?;
    let lifted = build(Formulation::Full, &build_objective_data(&inst, &c))?;

    let path = std::env::temp_dir().join(format!("mlift-roundtrip-{}.dat-s", std::process::id()));
    sdpa::write_file(&lifted.problem, &path)?;
    let text = std::fs::read_to_string(&path).map_err(|e| mlift::Error::io(&path, e))?;
    println!("{} ({} lines):", path.display(), text.lines().count());
    for line in text.lines().take(8) {
        println!("  {line}");
    }
    let back = sdpa::read_file(&path)?;
    let _ = std::fs::remove_file(&path);
    assert_eq!(back, lifted.problem);

    let cfg = SolverConfig::default();
    let a = solve(&lifted.problem, &cfg);
    let b = solve(&back, &cfg);
    println!(
        "original {:.9}  re-read {:.9}",
        a.primal_obj + lifted.problem.offset,
        b.primal_obj + back.offset
    );
    Ok((
        a.primal_obj + lifted.problem.offset,
        b.primal_obj + back.offset,
    ))
}

#[allow(dead_code)]
fn main() -> mlift::Result<()> {
    run_example().map(|_| ())
}
