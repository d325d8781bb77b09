//! Interior-point solver on decoding relaxations: external reference
//! value, presolve neutrality and per-iterate properties.

use std::path::PathBuf;

use mlift::formulation::{build, build_objective_data};
use mlift::model::sample_instance;
use mlift::sdp::{presolve, sdpa, solve, SdpProblem, SolverConfig, SolverStatus};
use mlift::{Constellation, Formulation, NoiseLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn tight() -> SolverConfig {
    SolverConfig {
        tol_gap: 1e-10,
        tol_feas: 1e-10,
        ..SolverConfig::default()
    }
}

fn decoding_problems(count: u64) -> Vec<SdpProblem> {
    let c = Constellation::by_name("16qam").unwrap();
    let mut out = Vec::new();
    for seed in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = sample_instance(
            &mut rng,
            &c,
            2,
            2,
            NoiseLevel::SnrDb([5.0, 10.0, 15.0][seed as usize % 3]),
        )
        .unwrap();
        let od = build_objective_data(&inst, &c);
        for f in [Formulation::Full, Formulation::Reduced] {
            out.push(build(f, &od).unwrap().problem);
        }
    }
    out
}

#[test]
fn matches_a_third_party_solver_on_the_dumped_file() {
    let p = sdpa::read_file(fixture("full_n4_k4.dat-s")).unwrap();
    let text = std::fs::read_to_string(fixture("full_n4_k4.clarabel")).unwrap();
    let reference: f64 = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .find_map(|l| l.trim().parse().ok())
        .unwrap();
    let sol = solve(&p, &tight());
    assert_eq!(sol.status, SolverStatus::Optimal);
    assert!((sol.primal_obj + p.offset - reference).abs() <= 1e-6);
    assert!((sol.dual_obj + p.offset - reference).abs() <= 1e-6);
}

#[test]
fn dumped_fixture_reproduces_the_builder_output() {
    let c = Constellation::by_name("16qam").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let inst = sample_instance(&mut rng, &c, 2, 2, NoiseLevel::SnrDb(10.0)).unwrap();
    let built = build(Formulation::Full, &build_objective_data(&inst, &c)).unwrap();
    let text = std::fs::read_to_string(fixture("full_n4_k4.dat-s")).unwrap();
    assert_eq!(sdpa::to_string(&built.problem), text);
}

#[test]
fn presolve_leaves_the_full_relaxation_optimum_unchanged() {
    for p in decoding_problems(3).into_iter().step_by(2) {
        let with = solve(&p, &tight());
        let without = solve(
            &p,
            &SolverConfig {
                presolve: false,
                ..tight()
            },
        );
        assert!(with.is_optimal() && without.is_optimal());
        let pre = presolve(&p);
        assert!(!pre.fully_eliminated());
        assert!(
            (with.primal_obj - without.primal_obj).abs() <= 1e-8 * (1.0 + with.primal_obj.abs())
        );
    }
}

#[test]
fn decoding_relaxations_solve_within_the_iteration_budget() {
    let cfg = SolverConfig::default();
    for p in decoding_problems(20) {
        let sol = solve(&p, &cfg);
        assert_eq!(sol.status, SolverStatus::Optimal, "{}", p.label);
        assert!(sol.residuals.primal <= cfg.tol_feas);
        assert!(sol.residuals.dual <= cfg.tol_feas);
        assert!(sol.residuals.gap <= cfg.tol_gap);
        assert!(mlift::linalg::min_eigenvalue(&sol.w) >= -1e-8 * (1.0 + sol.w.norm()));
        assert!(sol.lp.iter().all(|v| *v >= -1e-9));
    }
}

#[test]
fn gap_drops_over_every_five_iterations() {
    for p in decoding_problems(10) {
        let h = solve(&p, &SolverConfig::default()).history;
        // The starting point has y = 0 and a traceless cost, so its gap is 0.
        assert_eq!(h[0].residuals.gap, 0.0);
        for t in 1..h.len().saturating_sub(5) {
            assert!(
                h[t + 5].residuals.gap < h[t].residuals.gap,
                "{} at {t}",
                p.label
            );
        }
    }
}

#[test]
fn weak_duality_at_feasible_iterates() {
    for p in decoding_problems(10) {
        for h in solve(&p, &tight()).history {
            assert!(h.complementarity >= 0.0);
            if h.residuals.primal <= 1e-9 && h.residuals.dual <= 1e-9 {
                let scale = 1.0 + h.primal_obj.abs() + h.dual_obj.abs();
                assert!(h.dual_obj <= h.primal_obj + 1e-9 * scale);
            }
        }
    }
}

#[test]
fn scaling_the_cost_scales_only_the_objective() {
    for p in decoding_problems(2).into_iter().step_by(2) {
        let a = solve(&p, &tight());
        let b = solve(&p.scaled_cost(2.5), &tight());
        assert!((b.primal_obj - 2.5 * a.primal_obj).abs() <= 1e-6 * (1.0 + b.primal_obj.abs()));
        assert!((&a.w - &b.w).amax() <= 1e-6 * (1.0 + a.w.amax()));
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let p = &decoding_problems(1)[1];
    let a = solve(p, &SolverConfig::default());
    let b = solve(p, &SolverConfig::default());
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.primal_obj.to_bits(), b.primal_obj.to_bits());
    assert_eq!(a.w, b.w);
}
