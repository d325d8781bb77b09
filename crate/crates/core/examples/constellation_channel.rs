//! Realify a complex 2x2 channel carrying 16-QAM and show the `x = U s`
//! encoding of the transmitted vector.
//!
//! Run: cargo run --example constellation_channel

use mlift::model::{assignment_of, encode, sample_instance};
use mlift::{Constellation, MimoInstance, NoiseLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> mlift::Result<(Constellation, MimoInstance)> {
    let c = Constellation::by_name("16qam")?;
    println!("{} real alphabet {:?}", c.name(), c.points());
    for (i, p) in c.points().iter().enumerate() {
        println!("  s[{i}] = {p:+} gray {:02b}", c.gray_label(i));
    }
    println!(
        "average complex symbol energy {}",
        c.avg_complex_symbol_energy()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inst = sample_instance(&mut rng, &c, 2, 2, NoiseLevel::SnrDb(15.0))?;
    println!("real model: H is {}x{}", inst.h.nrows(), inst.h.ncols());
    println!("x_true = {}", inst.x_true.transpose());

    let u = assignment_of(&inst.x_true, &c).expect("transmitted symbols are in the alphabet");
    println!("column of every row of U: {:?}", u.indices());
    assert_eq!(encode(&u, &c)?, inst.x_true);
    println!(
        "||y - H x_true||^2 = {:.4}",
        inst.residual_norm_sq(&inst.x_true)
    );
    Ok((c, inst))
}

#[allow(dead_code)]
fn main() -> mlift::Result<()> {
    run_example().map(|_| ())
}
