use mlift::formulation::{build_objective_data, objective_value};
use mlift::model::{assignment_of, encode, AssignmentMatrix};
use mlift::recovery::{randomized_rounding, round_nearest};
use mlift::sdp::{sdpa, Constraint, SdpProblem};
use mlift::{Constellation, MimoInstance};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3f64,
        (-300i32..300, -9.99..9.99f64).prop_map(|(e, m)| m * 10f64.powi(e)),
        Just(0.1 + 0.2),
        Just(-0.0),
    ]
}

prop_compose! {
    fn sdp_problem()(side in 1usize..5, lp in 0usize..3, rows in 0usize..6)
        (entries in prop::collection::vec((0..side, 0..side, finite()), 0..10),
         cons in prop::collection::vec(
             (finite(), prop::collection::vec((0..side, 0..side, finite()), 1..4),
              prop::collection::vec((0..lp.max(1), finite()), 0..3)),
             rows),
         cost_lp in prop::collection::vec(finite(), lp),
         offset in finite(),
         side in Just(side), lp in Just(lp))
        -> SdpProblem
    {
        let mut p = SdpProblem::new(side, lp).with_label("prop");
        p.offset = offset;
        for (r, c, v) in entries {
            p.cost_psd.add(r, c, v);
        }
        p.cost_lp = cost_lp;
        for (rhs, psd, lps) in cons {
            let mut c = Constraint::new(rhs);
            for (r, col, v) in psd {
                c = c.psd(r, col, v);
            }
            if lp > 0 {
                for (j, v) in lps {
                    c = c.lp(j, v);
                }
            }
            p.constraints.push(c);
        }
        p
    }
}

prop_compose! {
    fn row_stochastic(max_n: usize, max_k: usize)(n in 1..=max_n, k in 2..=max_k)
        (raw in prop::collection::vec(0.0..1.0f64, n * k), n in Just(n), k in Just(k))
        -> DMatrix<f64>
    {
        let mut u = DMatrix::from_row_slice(n, k, &raw);
        for mut r in u.row_iter_mut() {
            let s = r.sum();
            if s > 0.0 { r /= s } else { r.fill(1.0 / k as f64) }
        }
        u
    }
}

fn best_by_enumeration(u: &DMatrix<f64>) -> f64 {
    AssignmentMatrix::enumerate(u.nrows(), u.ncols())
        .map(|a| u.component_mul(&a.to_matrix()).sum())
        .fold(f64::NEG_INFINITY, f64::max)
}

proptest! {
    #[test]
    fn sdpa_text_round_trips(p in sdp_problem()) {
        let text = sdpa::to_string(&p);
        let q = sdpa::parse(&text).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(sdpa::to_string(&q), text);
    }

    #[test]
    fn row_argmax_attains_the_enumerated_maximum(u in row_stochastic(3, 4)) {
        let a = round_nearest(&u);
        prop_assert_eq!(u.component_mul(&a.to_matrix()).sum(), best_by_enumeration(&u));
    }

    #[test]
    fn argmax_ignores_positive_scaling(u in row_stochastic(4, 5), lambda in 1e-3..1e3f64) {
        prop_assert_eq!(round_nearest(&(&u * lambda)), round_nearest(&u));
    }

    #[test]
    fn randomized_rounding_never_loses_to_nearest(
        u in row_stochastic(3, 4),
        seed in any::<u64>(),
        rounds in 0usize..40,
    ) {
        let c = Constellation::from_points(
            (0..u.ncols()).map(|i| 2.0 * i as f64 - (u.ncols() - 1) as f64).collect(),
            mlift::model::ConstellationKind::Qam,
        ).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = u.nrows();
        let h = DMatrix::from_fn(n + 1, n, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { 3.0 } else { 0.0 });
        let x = DVector::from_element(n, c.points()[0]);
        let y = DVector::from_fn(n + 1, |i, _| i as f64 * 0.5 - 1.0);
        let inst = MimoInstance::new(h, x, y).unwrap();
        let od = build_objective_data(&inst, &c);
        let r = randomized_rounding(&u, &od, rounds, &mut rng);
        let near = round_nearest(&u);
        prop_assert!(objective_value(&r.to_matrix(), &od) <= objective_value(&near.to_matrix(), &od));
    }

    #[test]
    fn encoding_inverts_on_the_alphabet(idx in prop::collection::vec(0usize..4, 1..7)) {
        let c = Constellation::by_name("16qam").unwrap();
        let a = AssignmentMatrix::from_indices(4, idx).unwrap();
        let x = encode(&a, &c).unwrap();
        prop_assert_eq!(assignment_of(&x, &c), Some(a));
    }
}
