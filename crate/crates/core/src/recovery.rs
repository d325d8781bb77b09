//! From a relaxed solution back to a hard decision.
//!
//! Minimising `||U~ - U||_F^2` over binary `U` with unit row sums equals
//! maximising `trace(U~ U^T)`, which separates by rows: the nearest
//! assignment takes the argmax of every row.

use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::formulation::{
    build, build_objective_data, objective_value, select_formulation, Formulation, LiftedProblem,
    ObjectiveData,
};
use crate::model::{
    encode, ml_oracle, AssignmentMatrix, Constellation, MimoInstance, DEFAULT_ENUMERATION_CAP,
};
use crate::sdp::{solve, SolverConfig, SolverStatus};

/// Entries below `-CLIP_TOL` or row sums off by more than it are reported.
pub const CLIP_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    /// `N x K`, rows summing to one.
    pub u_tilde: DMatrix<f64>,
    pub source: Formulation,
    /// Relaxation optimum in the units of [`objective_value`].
    pub sdp_obj: f64,
}

impl RelaxedSolution {
    /// Human-readable notes on entries outside `[0, 1]` or rows not summing
    /// to one.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut notes = Vec::new();
        for (i, row) in self.u_tilde.row_iter().enumerate() {
            let lo = row.min();
            let hi = row.max();
            if lo < -CLIP_TOL || hi > 1.0 + CLIP_TOL {
                notes.push(format!("row {i} has entries in [{lo:.3e}, {hi:.3e}]"));
            }
            let sum = row.sum();
            if (sum - 1.0).abs() > CLIP_TOL {
                notes.push(format!("row {i} sums to {sum:.9}"));
            }
        }
        notes
    }
}

fn row_argmax(row: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (j, v) in row.enumerate() {
        if v > best_v {
            best = j;
            best_v = v;
        }
    }
    best
}

/// Nearest assignment: argmax of every row, lowest column on ties.
pub fn round_nearest(u_tilde: &DMatrix<f64>) -> AssignmentMatrix {
    let k = u_tilde.ncols();
    let cols = u_tilde
        .row_iter()
        .map(|r| row_argmax(r.iter().copied()))
        .collect();
    AssignmentMatrix::from_indices(k, cols).expect("argmax is always in range")
}

/// Best of the nearest assignment and `rounds` samples drawn row by row
/// from the clipped, renormalised rows of `U~`.
pub fn randomized_rounding<R: Rng + ?Sized>(
    u_tilde: &DMatrix<f64>,
    od: &ObjectiveData,
    rounds: usize,
    rng: &mut R,
) -> AssignmentMatrix {
    let nearest = round_nearest(u_tilde);
    if rounds == 0 {
        return nearest;
    }
    let k = u_tilde.ncols();
    // rows with no positive mass keep their argmax
    let rows: Vec<Option<WeightedIndex<f64>>> = u_tilde
        .row_iter()
        .map(|r| WeightedIndex::new(r.iter().map(|v| v.max(0.0))).ok())
        .collect();
    let mut best_obj = objective_value(&nearest.to_matrix(), od);
    let mut best = nearest;
    for _ in 0..rounds {
        let cols: Vec<usize> = rows
            .iter()
            .zip(best.indices())
            .map(|(dist, &fallback)| dist.as_ref().map_or(fallback, |d| d.sample(rng)))
            .collect();
        let cand = AssignmentMatrix::from_indices(k, cols).expect("sampled index is in range");
        let obj = objective_value(&cand.to_matrix(), od);
        if obj < best_obj {
            best_obj = obj;
            best = cand;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct DecodeOptions {
    /// `None` applies [`select_formulation`].
    pub formulation: Option<Formulation>,
    /// Randomised rounding samples; `0` rounds to the nearest assignment.
    pub rounds: usize,
    pub solver: SolverConfig,
    /// Also run the exhaustive search and report the gap.
    pub ml_oracle: bool,
    pub ml_cap: u128,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            formulation: Some(Formulation::Reduced),
            rounds: 100,
            solver: SolverConfig::from_env(),
            ml_oracle: false,
            ml_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecodeResult {
    pub u_final: AssignmentMatrix,
    pub x_hat: DVector<f64>,
    pub u_tilde: DMatrix<f64>,
    /// Relaxation optimum (dual value plus offset), in the units of
    /// [`objective_value`].
    pub relaxed_obj: f64,
    /// `objective_value(u_final)`.
    pub rounded_obj: f64,
    /// ML minimum minus `relaxed_obj`, when the oracle ran.
    pub ml_gap: Option<f64>,
    pub formulation: Formulation,
    pub status: SolverStatus,
    pub iterations: usize,
    pub solve_time: Duration,
    pub diagnostics: Vec<String>,
}

/// Build, solve and round.
pub fn decode<R: Rng + ?Sized>(
    inst: &MimoInstance,
    c: &Constellation,
    opts: &DecodeOptions,
    rng: &mut R,
) -> Result<DecodeResult> {
    let od = build_objective_data(inst, c);
    let f = opts
        .formulation
        .unwrap_or_else(|| select_formulation(od.n(), od.k()));
    let lifted = build(f, &od)?;
    decode_lifted(inst, c, &od, &lifted, opts, rng)
}

/// [`decode`] for an already built relaxation.
pub fn decode_lifted<R: Rng + ?Sized>(
    inst: &MimoInstance,
    c: &Constellation,
    od: &ObjectiveData,
    lifted: &LiftedProblem,
    opts: &DecodeOptions,
    rng: &mut R,
) -> Result<DecodeResult> {
    let sol = solve(&lifted.problem, &opts.solver);
    let rs = RelaxedSolution {
        u_tilde: lifted.relaxed_u(&sol.w),
        source: lifted.formulation(),
        // the dual value is a lower bound whenever the dual is feasible
        sdp_obj: sol.dual_obj + lifted.problem.offset,
    };
    let mut diagnostics = rs.diagnostics();
    let u_final = randomized_rounding(&rs.u_tilde, od, opts.rounds, rng);
    let rounded_obj = objective_value(&u_final.to_matrix(), od);
    let ml_gap = if opts.ml_oracle {
        let ml = ml_oracle(inst, c, opts.ml_cap)?;
        Some(ml.distance_sq - od.offset - rs.sdp_obj)
    } else {
        None
    };
    if sol.status != SolverStatus::Optimal {
        diagnostics.push(format!(
            "solver stopped with {:?}; decision rounded from the last iterate",
            sol.status
        ));
    }
    let result = DecodeResult {
        x_hat: encode(&u_final, c)?,
        u_final,
        u_tilde: rs.u_tilde,
        relaxed_obj: rs.sdp_obj,
        rounded_obj,
        ml_gap,
        formulation: rs.source,
        status: sol.status,
        iterations: sol.iterations,
        solve_time: sol.solve_time,
        diagnostics,
    };
    if sol.status != SolverStatus::Optimal {
        return Err(Error::SolverFailed {
            status: sol.status,
            fallback: Box::new(result),
        });
    }
    Ok(result)
}
