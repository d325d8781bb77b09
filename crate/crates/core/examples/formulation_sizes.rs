//! Matrix side and variable counts of each lifting against vector lifting.
//!
//! Run: cargo run --example formulation_sizes

use mlift::formulation::{select_formulation, vector_lifting_variable_count};
use mlift::Formulation;

pub struct SizeRow {
    pub n: usize,
    pub k: usize,
    pub sides: Vec<(Formulation, usize)>,
    pub matrix_lifting: usize,
    pub vector_lifting: usize,
}

pub fn run_example() -> Vec<SizeRow> {
    let mut rows = Vec::new();
    println!(" N  K  full  equiv  reduced  (2N+K)^2  (NK+1)^2  selected");
    for (n, k) in [(2, 4), (4, 4), (8, 4), (8, 8), (16, 4), (8, 16)] {
        let sides: Vec<(Formulation, usize)> = Formulation::ALL
            .iter()
            .map(|f| (*f, f.side(n, k)))
            .collect();
        let row = SizeRow {
            n,
            k,
            matrix_lifting: Formulation::Full.variable_count(n, k),
            vector_lifting: vector_lifting_variable_count(n, k),
            sides,
        };
        println!(
            "{:2} {:2} {:5} {:6} {:8} {:9} {:9}  {}",
            n,
            k,
            row.sides[0].1,
            row.sides[1].1,
            row.sides[2].1,
            row.matrix_lifting,
            row.vector_lifting,
            select_formulation(n, k)
        );
        rows.push(row);
    }
    let r = rows
        .iter()
        .find(|r| r.n == 8 && r.k == 4)
        .expect("row present");
    println!(
        "N=8, K=4: {} matrix-lifting entries vs {} for vector lifting",
        r.matrix_lifting, r.vector_lifting
    );
    rows
}

#[allow(dead_code)]
fn main() {
    run_example();
}
