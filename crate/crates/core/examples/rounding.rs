//! Nearest-assignment rounding against randomized rounding on a relaxed
//! solution of a noisy 2x2 instance. Instances are drawn until the
//! relaxation is not tight, so that `U~` has fractional rows.
//!
//! Run: cargo run --example rounding

use mlift::formulation::{build, build_objective_data, objective_value};
use mlift::model::{ml_oracle, sample_instance, DEFAULT_ENUMERATION_CAP};
use mlift::recovery::{randomized_rounding, round_nearest};
use mlift::sdp::{solve, SolverConfig};
use mlift::{Constellation, Formulation, NoiseLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct RoundingSummary {
    pub relaxed: f64,
    pub nearest: f64,
    pub randomized: f64,
    pub ml: f64,
}

pub fn run_example() -> mlift::Result<RoundingSummary> {
    let c = Constellation::by_name("16qam")?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (inst, od, lifted, sol, u) = loop {
        let inst = sample_instance(&mut rng, &c, 2, 2, NoiseLevel::SnrDb(3.0))?;
        let od = build_objective_data(&inst, &c);
        let lifted = build(Formulation::Reduced, &od)?;
        let sol = solve(&lifted.problem, &SolverConfig::default());
        let u = lifted.relaxed_u(&sol.w);
        if u.row_iter().any(|r| r.max() < 0.9) {
            break (inst, od, lifted, sol, u);
        }
    };
    println!("U~ = {u:.3}");

    let near = round_nearest(&u);
    let rand = randomized_rounding(&u, &od, 200, &mut rng);
    let ml = ml_oracle(&inst, &c, DEFAULT_ENUMERATION_CAP)?;
    let s = RoundingSummary {
        relaxed: sol.dual_obj + lifted.problem.offset,
        nearest: objective_value(&near.to_matrix(), &od),
        randomized: objective_value(&rand.to_matrix(), &od),
        ml: ml.distance_sq - od.offset,
    };
    println!("relaxation {:.6}", s.relaxed);
    println!("nearest    {:.6} {:?}", s.nearest, near.indices());
    println!("randomized {:.6} {:?}", s.randomized, rand.indices());
    println!("ML         {:.6}", s.ml);
    Ok(s)
}

#[allow(dead_code)]
fn main() -> mlift::Result<()> {
    run_example().map(|_| ())
}
