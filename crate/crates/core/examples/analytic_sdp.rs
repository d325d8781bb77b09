//! Two SDPs with closed-form optima, solved from scratch.
//!
//! * `max <ee^T, X>  s.t.  diag X = e` has optimum `n^2` at `X = ee^T`.
//! * `min trace X  s.t.  X_11 = 1` has optimum 1.
//!
//! Run: cargo run --example analytic_sdp

use mlift::sdp::{solve, Constraint, SdpProblem, SdpSolution, SolverConfig};

pub fn all_ones(n: usize) -> SdpProblem {
    let mut p = SdpProblem::new(n, 0).with_label(format!("all-ones-{n}"));
    for j in 0..n {
        for i in 0..=j {
            p.cost_psd.add(i, j, -1.0);
        }
        p.constraints.push(Constraint::new(1.0).psd(j, j, 1.0));
    }
    p
}

pub fn pinned_corner(n: usize) -> SdpProblem {
    let mut p = SdpProblem::new(n, 0).with_label(format!("pinned-corner-{n}"));
    for i in 0..n {
        p.cost_psd.add(i, i, 1.0);
    }
    p.constraints.push(Constraint::new(1.0).psd(0, 0, 1.0));
    p
}

/// `(problem, expected optimum, solution)` for each case.
pub fn run_example() -> Vec<(SdpProblem, f64, SdpSolution)> {
    let cfg = SolverConfig::default();
    let cases = vec![
        (all_ones(3), -9.0),
        (all_ones(5), -25.0),
        (pinned_corner(4), 1.0),
    ];
    let mut out = Vec::new();
    for (p, expected) in cases {
        let sol = solve(&p, &cfg);
        println!(
            "{:16} {:?} after {:2} iterations: primal {:+.10} dual {:+.10} (expected {expected:+})",
            p.label, sol.status, sol.iterations, sol.primal_obj, sol.dual_obj
        );
        out.push((p, expected, sol));
    }
    out
}

#[allow(dead_code)]
fn main() {
    run_example();
}
