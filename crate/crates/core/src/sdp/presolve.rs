//! Removal of linearly dependent equality rows.
//!
//! Rows are orthogonalised in order (modified Gram-Schmidt with one
//! re-orthogonalisation pass) in the `svec` space, where the Euclidean
//! inner product equals the trace inner product. A row whose residual
//! falls below `tol` times its own norm is dropped, and its expression in
//! terms of the surviving rows is recorded.

use std::f64::consts::SQRT_2;

use super::problem::SdpProblem;

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RemovedRow {
    /// Index into the original constraint list.
    pub index: usize,
    /// `row = sum coeff * kept_row`, indices into the original list.
    pub combination: Vec<(usize, f64)>,
    /// `rhs - sum coeff * kept_rhs`; nonzero means the system is
    /// inconsistent.
    pub rhs_mismatch: f64,
}

#[derive(Debug, Clone)]
pub struct Presolved {
    pub problem: SdpProblem,
    /// Original indices of the surviving rows, in order.
    pub kept: Vec<usize>,
    pub removed: Vec<RemovedRow>,
    pub original_len: usize,
}

impl Presolved {
    /// Every row was eliminated although some existed.
    pub fn fully_eliminated(&self) -> bool {
        self.original_len > 0 && self.kept.is_empty()
    }

    pub fn inconsistent(&self, tol: f64) -> bool {
        self.removed.iter().any(|r| r.rhs_mismatch.abs() > tol)
    }

    /// Scatter duals of the reduced problem back to the original rows;
    /// removed rows get a zero multiplier.
    pub fn expand_duals(&self, y: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.original_len];
        for (&orig, &v) in self.kept.iter().zip(y) {
            full[orig] = v;
        }
        full
    }
}

fn svec_len(d: usize, m: usize) -> usize {
    d * (d + 1) / 2 + m
}

fn row_vector(p: &SdpProblem, i: usize) -> Vec<f64> {
    let d = p.psd_side;
    let mut v = vec![0.0; svec_len(d, p.lp_len)];
    let c = &p.constraints[i];
    for (r, col, val) in c.psd.iter() {
        // column-major upper triangle
        let idx = col * (col + 1) / 2 + r;
        v[idx] = if r == col { val } else { SQRT_2 * val };
    }
    let base = d * (d + 1) / 2;
    for &(j, a) in &c.lp {
        v[base + j] = a;
    }
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn presolve(p: &SdpProblem) -> Presolved {
    presolve_with_tol(p, DEFAULT_RANK_TOL)
}

pub fn presolve_with_tol(p: &SdpProblem, tol: f64) -> Presolved {
    let m = p.constraints.len();
    // orthonormal basis, each with its coefficients over the kept rows
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut basis_coeff: Vec<Vec<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    let mut removed = Vec::new();

    for i in 0..m {
        let row = row_vector(p, i);
        let norm0 = dot(&row, &row).sqrt();
        let mut res = row.clone();
        // coefficients of the projection over basis vectors
        let mut proj = vec![0.0; basis.len()];
        for _pass in 0..2 {
            for (j, q) in basis.iter().enumerate() {
                let h = dot(q, &res);
                proj[j] += h;
                res.iter_mut().zip(q).for_each(|(r, qv)| *r -= h * qv);
            }
        }
        let rnorm = dot(&res, &res).sqrt();
        // projection expressed over kept rows
        let mut comb = vec![0.0; kept.len()];
        for (j, &h) in proj.iter().enumerate() {
            for (c, &b) in comb.iter_mut().zip(&basis_coeff[j]) {
                *c += h * b;
            }
        }
        if rnorm <= tol * norm0.max(f64::MIN_POSITIVE) {
            let combo_rhs: f64 = comb
                .iter()
                .zip(&kept)
                .map(|(c, &k)| c * p.constraints[k].rhs)
                .sum();
            removed.push(RemovedRow {
                index: i,
                combination: kept
                    .iter()
                    .zip(&comb)
                    .filter(|(_, c)| c.abs() > tol)
                    .map(|(&k, &c)| (k, c))
                    .collect(),
                rhs_mismatch: p.constraints[i].rhs - combo_rhs,
            });
            continue;
        }
        // new basis vector q = (row - sum comb_k row_k) / rnorm
        let mut coeff: Vec<f64> = comb.iter().map(|c| -c / rnorm).collect();
        coeff.push(1.0 / rnorm);
        for b in basis_coeff.iter_mut() {
            b.push(0.0);
        }
        res.iter_mut().for_each(|r| *r /= rnorm);
        basis.push(res);
        basis_coeff.push(coeff);
        kept.push(i);
    }

    let mut problem = p.clone();
    problem.constraints = kept.iter().map(|&i| p.constraints[i].clone()).collect();
    Presolved {
        problem,
        kept,
        removed,
        original_len: m,
    }
}
