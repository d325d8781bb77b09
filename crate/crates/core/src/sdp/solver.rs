//! Infeasible-start primal-dual path-following method with
//! Nesterov-Todd scaling and a Mehrotra predictor-corrector.
//!
//! Primal: `min <C,X> + c^T x  s.t.  A(X) + a(x) = b,  X PSD, x >= 0`
//! Dual:   `max b^T y  s.t.  C - A^T y = S PSD,  c - a^T y = z >= 0`
//!
//! The NT scaling matrix `G` satisfies `G^{-1} X G^{-T} = G^T S G = diag(lambda)`,
//! so `W = G G^T` maps `S` to `X` (`W S W = X`). In the scaled variables
//! `dX~ = G^{-1} dX G^{-T}` the Newton step is the least-squares system
//!
//! ```text
//! A~ dX~ = r_p,   dX~ = v + A~^T dy,   A~_i = G^T A_i G
//! ```
//!
//! whose normal matrix is the Schur complement
//! `M_ij = <A_i, W A_j W> + a_i^T diag(x/z) a_j`. It is solved through a QR
//! factorization of `A~^T` rather than a Cholesky factor of `M`: the
//! relaxations here are primal degenerate, `M` becomes too ill-conditioned
//! near the optimum, and forming `dX = P - W dS W` cancels. When `A~^T` is
//! numerically rank deficient the regularised normal matrix `M + delta I`
//! is factored instead.

use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use super::presolve::presolve;
use super::problem::SdpProblem;
use crate::linalg;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Fraction-to-boundary factor.
    pub step_fraction: f64,
    /// Write one tab-separated line per iteration to stderr.
    pub log_iterations: bool,
    pub presolve: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_gap: 1e-7,
            tol_feas: 1e-7,
            max_iter: 100,
            step_fraction: 0.98,
            log_iterations: false,
            presolve: true,
        }
    }
}

impl SolverConfig {
    /// Default configuration, with iteration logging switched on when the
    /// `MLIFT_LOG` environment variable is `iter`.
    pub fn from_env() -> Self {
        let log_iterations = std::env::var("MLIFT_LOG").is_ok_and(|v| v == "iter");
        Self {
            log_iterations,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    MaxIter,
    NumericalFailure,
    InfeasibleSuspected,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// `max_i |<A_i,W> + a_i^T x - b_i| / (1 + ||b||)`
    pub primal: f64,
    /// `max |C - A^T y - S|, |c - a^T y - z|` over `1 + ||(C, c)||`
    pub dual: f64,
    /// `|p - d| / (1 + |p| + |d|)`
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub iter: usize,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub residuals: Residuals,
    /// `<X,S> + x^T z`, nonnegative at every interior iterate.
    pub complementarity: f64,
    pub mu: f64,
    pub sigma: f64,
    pub alpha_primal: f64,
    pub alpha_dual: f64,
}

impl IterationLog {
    pub fn tsv_header() -> &'static str {
        "iter\tprimal_obj\tdual_obj\tgap\tprimal_res\tdual_res\tmu\tsigma\talpha_p\talpha_d"
    }

    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{:.10e}\t{:.10e}\t{:.3e}\t{:.3e}\t{:.3e}\t{:.3e}\t{:.3}\t{:.4}\t{:.4}",
            self.iter,
            self.primal_obj,
            self.dual_obj,
            self.residuals.gap,
            self.residuals.primal,
            self.residuals.dual,
            self.mu,
            self.sigma,
            self.alpha_primal,
            self.alpha_dual
        )
    }
}

/// Primal and dual point to be scored by [`residuals`].
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub w: &'a DMatrix<f64>,
    pub lp: &'a [f64],
    pub y: &'a [f64],
    pub dual_psd: &'a DMatrix<f64>,
    pub dual_lp: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub w: DMatrix<f64>,
    pub lp: Vec<f64>,
    /// One multiplier per constraint of the problem passed to [`solve`].
    pub y: Vec<f64>,
    pub dual_psd: DMatrix<f64>,
    pub dual_lp: Vec<f64>,
    /// `<C,W> + c^T x`, without the problem offset.
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub status: SolverStatus,
    pub iterations: usize,
    pub residuals: Residuals,
    pub history: Vec<IterationLog>,
    pub solve_time: Duration,
    /// Rows dropped by presolve.
    pub removed_rows: usize,
}

impl SdpSolution {
    pub fn candidate(&self) -> Candidate<'_> {
        Candidate {
            w: &self.w,
            lp: &self.lp,
            y: &self.y,
            dual_psd: &self.dual_psd,
            dual_lp: &self.dual_lp,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolverStatus::Optimal
    }
}

pub fn primal_residual_vector(p: &SdpProblem, w: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    p.constraints.iter().map(|c| c.eval(w, x) - c.rhs).collect()
}

fn cost_norm(p: &SdpProblem) -> f64 {
    (p.cost_psd.norm_sq() + p.cost_lp.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

fn rhs_norm(p: &SdpProblem) -> f64 {
    p.constraints
        .iter()
        .map(|c| c.rhs * c.rhs)
        .sum::<f64>()
        .sqrt()
}

pub fn residuals(p: &SdpProblem, cand: &Candidate<'_>) -> Residuals {
    let pres = primal_residual_vector(p, cand.w, cand.lp)
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let (aty, aty_lp) = p.adjoint(cand.y);
    let mut rd = p.cost_psd.to_dense(p.psd_side);
    rd -= aty;
    rd -= cand.dual_psd;
    let mut dres = linalg::max_abs(&rd);
    for ((c, a), z) in p.cost_lp.iter().zip(&aty_lp).zip(cand.dual_lp) {
        dres = dres.max((c - a - z).abs());
    }
    let pobj = p.objective(cand.w, cand.lp);
    let dobj: f64 = p.rhs().iter().zip(cand.y).map(|(b, y)| b * y).sum();
    Residuals {
        primal: pres / (1.0 + rhs_norm(p)),
        dual: dres / (1.0 + cost_norm(p)),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
    }
}

const STATIC_REG: f64 = 1e-12;
const RETRY_REG: f64 = 1e-8;
const DIVERGENCE: f64 = 1e10;
const BACKTRACK_STEPS: usize = 30;

/// Solve `p`. Presolve (when enabled) runs first; returned duals always
/// refer to the rows of `p`.
pub fn solve(p: &SdpProblem, cfg: &SolverConfig) -> SdpSolution {
    let start = Instant::now();
    let mut sol = if cfg.presolve {
        let pre = presolve(p);
        let mut s = Ipm::new(&pre.problem, cfg).run();
        s.y = pre.expand_duals(&s.y);
        s.removed_rows = pre.removed.len();
        s
    } else {
        Ipm::new(p, cfg).run()
    };
    sol.residuals = residuals(p, &sol.candidate());
    sol.dual_obj = p.rhs().iter().zip(&sol.y).map(|(b, y)| b * y).sum();
    sol.solve_time = start.elapsed();
    sol
}

/// Shrink `alpha` until `x + alpha * dx` has a Cholesky factor.
fn backtrack(x: &DMatrix<f64>, dx: &DMatrix<f64>, alpha: f64) -> Option<f64> {
    let mut a = alpha;
    for _ in 0..BACKTRACK_STEPS {
        if linalg::cholesky(&(x + dx * a)).is_some() {
            return Some(a);
        }
        a *= 0.8;
    }
    None
}

struct Direction {
    dx: DMatrix<f64>,
    dxl: Vec<f64>,
    dy: DVector<f64>,
    ds: DMatrix<f64>,
    dz: Vec<f64>,
}

struct NewtonSystem {
    /// `svec(G^T A_i G)` in column `i`, LP part below.
    at: DMatrix<f64>,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    dl: Vec<f64>,
    ns: usize,
    /// `r` factors the regularised normal matrix; `q` is unused.
    reg: bool,
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn svec_into<S>(m: &DMatrix<f64>, out: &mut nalgebra::Matrix<f64, nalgebra::Dyn, nalgebra::U1, S>)
where
    S: nalgebra::StorageMut<f64, nalgebra::Dyn, nalgebra::U1>,
{
    let mut k = 0;
    for j in 0..m.ncols() {
        for i in 0..=j {
            out[k] = if i == j {
                m[(i, j)]
            } else {
                SQRT_2 * m[(i, j)]
            };
            k += 1;
        }
    }
}

fn svec_inverse<S>(
    v: &nalgebra::Matrix<f64, nalgebra::Dyn, nalgebra::U1, S>,
    d: usize,
) -> DMatrix<f64>
where
    S: nalgebra::Storage<f64, nalgebra::Dyn, nalgebra::U1>,
{
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for j in 0..d {
        for i in 0..=j {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                m[(i, j)] = v[k] / SQRT_2;
                m[(j, i)] = v[k] / SQRT_2;
            }
            k += 1;
        }
    }
    m
}

struct Scaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    lambda: DVector<f64>,
}

struct Ipm<'a> {
    p: &'a SdpProblem,
    cfg: &'a SolverConfig,
    /// Both triangles of every constraint matrix.
    a_full: Vec<Vec<(usize, usize, f64)>>,
    cost: DMatrix<f64>,
    b: DVector<f64>,
    nu: f64,
    x: DMatrix<f64>,
    xl: Vec<f64>,
    y: DVector<f64>,
    s: DMatrix<f64>,
    z: Vec<f64>,
}

impl<'a> Ipm<'a> {
    fn new(p: &'a SdpProblem, cfg: &'a SolverConfig) -> Self {
        let d = p.psd_side;
        let ml = p.lp_len;
        let cost = p.cost_psd.to_dense(d);
        let cmax = p
            .cost_lp
            .iter()
            .fold(linalg::max_abs(&cost), |m, v| m.max(v.abs()));
        // Primal scale from (A, b) only and dual scale from the cost only, so
        // that scaling the cost scales (y, S) and leaves the primal path alone.
        let row_scale = p
            .constraints
            .iter()
            .map(|c| {
                let norm = (c.psd.norm_sq() + c.lp.iter().map(|(_, v)| v * v).sum::<f64>()).sqrt();
                (1.0 + c.rhs.abs()) / (1.0 + norm)
            })
            .fold(0.0_f64, f64::max);
        let tau_p = (10.0 * d.max(1) as f64 * row_scale).max(1.0);
        let tau_d = if cmax > 0.0 { cmax } else { 1.0 };
        Self {
            p,
            cfg,
            a_full: p.constraints.iter().map(|c| c.psd.full_entries()).collect(),
            cost,
            b: DVector::from_vec(p.rhs()),
            nu: (d + ml) as f64,
            x: DMatrix::identity(d, d) * tau_p,
            xl: vec![tau_p; ml],
            y: DVector::zeros(p.constraints.len()),
            s: DMatrix::identity(d, d) * tau_d,
            z: vec![tau_d; ml],
        }
    }

    fn apply(&self, w: &DMatrix<f64>, xl: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.p.apply(w, xl))
    }

    fn finish(&self, status: SolverStatus, history: Vec<IterationLog>) -> SdpSolution {
        let primal_obj = self.p.objective(&self.x, &self.xl);
        let dual_obj = self.b.dot(&self.y);
        let sol = SdpSolution {
            w: self.x.clone(),
            lp: self.xl.clone(),
            y: self.y.as_slice().to_vec(),
            dual_psd: self.s.clone(),
            dual_lp: self.z.clone(),
            primal_obj,
            dual_obj,
            status,
            iterations: history.len().saturating_sub(1),
            residuals: Residuals::default(),
            history,
            solve_time: Duration::ZERO,
            removed_rows: 0,
        };
        SdpSolution {
            residuals: residuals(self.p, &sol.candidate()),
            ..sol
        }
    }

    fn scaling(&self) -> Option<Scaling> {
        let lx = linalg::cholesky(&self.x)?.l();
        let ls = linalg::cholesky(&self.s)?.l();
        let svd = (ls.transpose() * &lx).svd(true, true);
        let v = svd.v_t.as_ref()?.transpose();
        let lambda = svd.singular_values.clone();
        if lambda.iter().any(|&l| !l.is_finite() || l <= 0.0) {
            return None;
        }
        let inv_sqrt = DMatrix::from_diagonal(&lambda.map(|l| 1.0 / l.sqrt()));
        let sqrt = DMatrix::from_diagonal(&lambda.map(f64::sqrt));
        let g = &lx * &v * inv_sqrt;
        // G^{-1} = Sigma^{1/2} V^T L_x^{-1}
        let lx_inv = lx
            .clone()
            .solve_lower_triangular(&DMatrix::identity(lx.nrows(), lx.nrows()))?;
        let g_inv = sqrt * v.transpose() * lx_inv;
        Some(Scaling { g, g_inv, lambda })
    }

    /// `svec(G^T A_i G)` for every row, stacked with the LP part scaled by
    /// `sqrt(x / z)`, factored by QR.
    fn newton_system(&self, sc: &Scaling) -> Option<NewtonSystem> {
        let d = self.x.nrows();
        let ns = d * (d + 1) / 2;
        let m = self.a_full.len();
        let dl: Vec<f64> = self
            .xl
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x / z).sqrt())
            .collect();
        let mut at = DMatrix::zeros(ns + dl.len(), m);
        let gt = sc.g.transpose();
        for (i, ai) in self.a_full.iter().enumerate() {
            let mut bm = DMatrix::zeros(d, d);
            for &(k, l, v) in ai {
                // G^T e_k e_l^T G
                bm.ger(v, &gt.column(k), &gt.column(l), 1.0);
            }
            svec_into(&bm, &mut at.column_mut(i).rows_mut(0, ns));
            for &(j, v) in &self.p.constraints[i].lp {
                at[(ns + j, i)] = v * dl[j];
            }
        }
        let qr = at.clone().qr();
        let r = qr.r();
        let rmax = r.diagonal().amax();
        let singular = at.nrows() < m
            || rmax.is_nan()
            || rmax <= 0.0
            || r.diagonal()
                .iter()
                .any(|v| v.is_nan() || v.abs() <= 1e3 * f64::EPSILON * rmax);
        if !singular {
            return Some(NewtonSystem {
                q: qr.q(),
                r,
                at,
                dl,
                ns,
                reg: false,
            });
        }
        // regularised: R^T R = A~ A~^T + delta I
        let mscale = at
            .column_iter()
            .map(|c| c.norm_squared())
            .fold(0.0, f64::max);
        for delta in [STATIC_REG, RETRY_REG] {
            let mut stacked = DMatrix::zeros(at.nrows() + m, m);
            stacked.rows_mut(0, at.nrows()).copy_from(&at);
            stacked
                .rows_mut(at.nrows(), m)
                .fill_diagonal((delta * mscale.max(1.0)).sqrt());
            let r = stacked.qr().r();
            let rmax = r.diagonal().amax();
            if r.diagonal()
                .iter()
                .all(|v| v.abs() > 1e3 * f64::EPSILON * rmax)
            {
                return Some(NewtonSystem {
                    q: DMatrix::zeros(0, 0),
                    r,
                    at,
                    dl,
                    ns,
                    reg: true,
                });
            }
        }
        None
    }

    /// Solve the Newton system for a complementarity target `h` (scaled
    /// space) and LP target `rl`.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        sc: &Scaling,
        sys: &NewtonSystem,
        rp: &DVector<f64>,
        rd: &DMatrix<f64>,
        rdl: &[f64],
        h: &DMatrix<f64>,
        rl: &[f64],
    ) -> Option<Direction> {
        let ns = sys.ns;
        let ml = self.xl.len();
        // v = h - G^T Rd G, the scaled primal step before the dual update
        let mut vm = h - sc.g.transpose() * rd * &sc.g;
        linalg::symmetrize(&mut vm);
        let mut v = DVector::zeros(ns + ml);
        svec_into(&vm, &mut v.rows_mut(0, ns));
        for j in 0..ml {
            v[ns + j] = rl[j] / (self.xl[j] * self.z[j]).sqrt() - sys.dl[j] * rdl[j];
        }
        let (dxv, dy) = if sys.reg {
            let rhs = rp - sys.at.tr_mul(&v);
            let t = sys.r.tr_solve_upper_triangular(&rhs)?;
            let dy = sys.r.solve_upper_triangular(&t)?;
            (&v + &sys.at * &dy, dy)
        } else {
            // A~ dX~ = rp with dX~ = v + A~^T dy
            let t = sys.r.tr_solve_upper_triangular(rp)? - sys.q.tr_mul(&v);
            let dy = sys.r.solve_upper_triangular(&t)?;
            (&v + &sys.q * t, dy)
        };
        let dxt = svec_inverse(&dxv.rows(0, ns), self.x.nrows());
        let mut dx = &sc.g * dxt * sc.g.transpose();
        linalg::symmetrize(&mut dx);
        let dxl: Vec<f64> = (0..ml).map(|j| sys.dl[j] * dxv[ns + j]).collect();
        let (aty, aty_lp) = self.p.adjoint(dy.as_slice());
        let ds = rd - aty;
        let dz: Vec<f64> = rdl.iter().zip(&aty_lp).map(|(r, a)| r - a).collect();
        Some(Direction {
            dx,
            dxl,
            dy,
            ds,
            dz,
        })
    }

    fn step_lengths(&self, dir: &Direction, lx: &DMatrix<f64>, ls: &DMatrix<f64>) -> (f64, f64) {
        let ap =
            linalg::psd_step_limit(lx, &dir.dx).min(linalg::nonneg_step_limit(&self.xl, &dir.dxl));
        let ad =
            linalg::psd_step_limit(ls, &dir.ds).min(linalg::nonneg_step_limit(&self.z, &dir.dz));
        (ap, ad)
    }

    fn run(mut self) -> SdpSolution {
        let ml = self.xl.len();
        let mut history: Vec<IterationLog> = Vec::new();
        let mut sigma = f64::NAN;
        let (mut alpha_p, mut alpha_d) = (f64::NAN, f64::NAN);
        let bscale = 1.0 + self.b.amax();
        let cscale = 1.0 + linalg::max_abs(&self.cost);
        if self.cfg.log_iterations {
            let _ = writeln!(std::io::stderr(), "{}", IterationLog::tsv_header());
        }

        for iter in 0..=self.cfg.max_iter {
            let rp = &self.b - self.apply(&self.x, &self.xl);
            let (aty, aty_lp) = self.p.adjoint(self.y.as_slice());
            let rd = &self.cost - aty - &self.s;
            let rdl: Vec<f64> = (0..ml)
                .map(|j| self.p.cost_lp[j] - aty_lp[j] - self.z[j])
                .collect();
            let comp = linalg::inner(&self.x, &self.s)
                + self.xl.iter().zip(&self.z).map(|(a, b)| a * b).sum::<f64>();
            let mu = comp / self.nu;
            let cand = Candidate {
                w: &self.x,
                lp: &self.xl,
                y: self.y.as_slice(),
                dual_psd: &self.s,
                dual_lp: &self.z,
            };
            let res = residuals(self.p, &cand);
            let entry = IterationLog {
                iter,
                primal_obj: self.p.objective(&self.x, &self.xl),
                dual_obj: self.b.dot(&self.y),
                residuals: res,
                complementarity: comp,
                mu,
                sigma,
                alpha_primal: alpha_p,
                alpha_dual: alpha_d,
            };
            if self.cfg.log_iterations {
                let _ = writeln!(std::io::stderr(), "{}", entry.to_tsv());
            }
            history.push(entry);

            if res.primal <= self.cfg.tol_feas
                && res.dual <= self.cfg.tol_feas
                && res.gap <= self.cfg.tol_gap
            {
                return self.finish(SolverStatus::Optimal, history);
            }
            let xmax = linalg::max_abs(&self.x).max(self.xl.iter().fold(0.0, |m, v| m.max(*v)));
            if xmax > DIVERGENCE * bscale || self.y.amax() > DIVERGENCE * cscale {
                return self.finish(SolverStatus::InfeasibleSuspected, history);
            }
            if iter == self.cfg.max_iter {
                break;
            }

            let Some(sc) = self.scaling() else {
                return self.finish(SolverStatus::NumericalFailure, history);
            };
            let Some(sys) = self.newton_system(&sc) else {
                return self.finish(SolverStatus::NumericalFailure, history);
            };
            let (Some(cx), Some(cs)) = (linalg::cholesky(&self.x), linalg::cholesky(&self.s))
            else {
                return self.finish(SolverStatus::NumericalFailure, history);
            };
            let (lx, ls) = (cx.l(), cs.l());

            // predictor
            let h_aff = DMatrix::from_diagonal(&(-&sc.lambda));
            let rl_aff: Vec<f64> = self.xl.iter().zip(&self.z).map(|(x, z)| -x * z).collect();
            let Some(aff) = self.direction(&sc, &sys, &rp, &rd, &rdl, &h_aff, &rl_aff) else {
                return self.finish(SolverStatus::NumericalFailure, history);
            };
            let (ap_max, ad_max) = self.step_lengths(&aff, &lx, &ls);
            let ap = ap_max.min(1.0);
            let ad = ad_max.min(1.0);
            let x_aff = &self.x + &aff.dx * ap;
            let s_aff = &self.s + &aff.ds * ad;
            let mut comp_aff = linalg::inner(&x_aff, &s_aff);
            for j in 0..ml {
                comp_aff += (self.xl[j] + ap * aff.dxl[j]) * (self.z[j] + ad * aff.dz[j]);
            }
            let mu_aff = (comp_aff / self.nu).max(0.0);
            sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

            // corrector: target sigma*mu*I - lambda^2 - (dX~ o dS~)
            let dxt = &sc.g_inv * &aff.dx * sc.g_inv.transpose();
            let dst = sc.g.transpose() * &aff.ds * &sc.g;
            let cross = (&dxt * &dst + &dst * &dxt) * 0.5;
            let d = sc.lambda.len();
            let h = DMatrix::from_fn(d, d, |i, j| {
                let mut r = -cross[(i, j)];
                if i == j {
                    r += sigma * mu - sc.lambda[i] * sc.lambda[i];
                }
                2.0 * r / (sc.lambda[i] + sc.lambda[j])
            });
            let rl: Vec<f64> = (0..ml)
                .map(|j| sigma * mu - self.xl[j] * self.z[j] - aff.dxl[j] * aff.dz[j])
                .collect();
            let Some(dir) = self.direction(&sc, &sys, &rp, &rd, &rdl, &h, &rl) else {
                return self.finish(SolverStatus::NumericalFailure, history);
            };
            let (ap_max, ad_max) = self.step_lengths(&dir, &lx, &ls);
            let (Some(ap), Some(ad)) = (
                backtrack(&self.x, &dir.dx, (self.cfg.step_fraction * ap_max).min(1.0)),
                backtrack(&self.s, &dir.ds, (self.cfg.step_fraction * ad_max).min(1.0)),
            ) else {
                return self.finish(SolverStatus::NumericalFailure, history);
            };
            alpha_p = ap;
            alpha_d = ad;

            self.x += &dir.dx * alpha_p;
            linalg::symmetrize(&mut self.x);
            for j in 0..ml {
                self.xl[j] += alpha_p * dir.dxl[j];
                self.z[j] += alpha_d * dir.dz[j];
            }
            self.y += &dir.dy * alpha_d;
            self.s += &dir.ds * alpha_d;
            linalg::symmetrize(&mut self.s);
        }
        self.finish(SolverStatus::MaxIter, history)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::problem::Constraint;

    /// `min <-ee^T, X>  s.t.  diag X = e`.
    fn all_ones(n: usize) -> SdpProblem {
        let mut p = SdpProblem::new(n, 0).with_label("all-ones");
        for j in 0..n {
            for i in 0..=j {
                p.cost_psd.add(i, j, -1.0);
            }
            p.constraints.push(Constraint::new(1.0).psd(j, j, 1.0));
        }
        p
    }

    /// `min trace X  s.t.  X_11 = 1`.
    fn pinned_corner(n: usize) -> SdpProblem {
        let mut p = SdpProblem::new(n, 0);
        for i in 0..n {
            p.cost_psd.add(i, i, 1.0);
        }
        p.constraints.push(Constraint::new(1.0).psd(0, 0, 1.0));
        p
    }

    /// Small LP-coupled problem: `min <C,X> + x1  s.t.  X_11 + X_22 = 2,
    /// X_12 - x1 = -0.5`, so `x1 >= 0` binds.
    fn mixed() -> SdpProblem {
        let mut p = SdpProblem::new(2, 1);
        p.cost_psd.add(0, 0, 1.0);
        p.cost_psd.add(0, 1, 0.3);
        p.cost_psd.add(1, 1, 2.0);
        p.cost_lp[0] = 1.0;
        p.constraints
            .push(Constraint::new(2.0).psd(0, 0, 1.0).psd(1, 1, 1.0));
        p.constraints
            .push(Constraint::new(-0.5).psd(0, 1, 0.5).lp(0, -1.0));
        p
    }

    #[test]
    fn all_ones_reaches_n_squared() {
        for n in [3, 5] {
            let sol = solve(&all_ones(n), &SolverConfig::default());
            assert_eq!(sol.status, SolverStatus::Optimal);
            assert!(sol.iterations <= 30, "{} iterations", sol.iterations);
            assert!((sol.primal_obj + (n * n) as f64).abs() <= 1e-7 * (1.0 + 2.0 * (n * n) as f64));
            assert!(sol.residuals.gap <= 1e-7);
            let target = DMatrix::from_element(n, n, 1.0);
            assert!((&sol.w - target).amax() <= 1e-5);
        }
    }

    #[test]
    fn pinned_corner_reaches_one() {
        let sol = solve(&pinned_corner(4), &SolverConfig::default());
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!(sol.iterations <= 30);
        assert!((sol.primal_obj - 1.0).abs() <= 1e-6);
        assert!((sol.w[(0, 0)] - 1.0).abs() <= 1e-7);
        assert!(sol.w[(1, 1)].abs() <= 1e-6);
    }

    #[test]
    fn lp_block_is_honoured() {
        let sol = solve(&mixed(), &SolverConfig::default());
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert!(sol.lp[0] >= -1e-9);
        assert!(linalg::min_eigenvalue(&sol.w) >= -1e-8 * (1.0 + sol.w.norm()));
        let res = primal_residual_vector(&mixed(), &sol.w, &sol.lp);
        assert!(res.iter().all(|r| r.abs() <= 1e-7));
    }

    #[test]
    fn optimal_solutions_meet_the_status_contract() {
        for p in [all_ones(4), pinned_corner(3), mixed()] {
            let cfg = SolverConfig::default();
            let sol = solve(&p, &cfg);
            assert_eq!(sol.status, SolverStatus::Optimal);
            assert!(linalg::min_eigenvalue(&sol.w) >= -1e-8 * (1.0 + sol.w.norm()));
            assert!(sol.lp.iter().all(|v| *v >= -1e-9));
            assert!(sol.residuals.gap <= cfg.tol_gap);
            assert!(sol.residuals.primal <= cfg.tol_feas);
            assert!(sol.residuals.dual <= cfg.tol_feas);
        }
    }

    #[test]
    fn residuals_at_the_analytic_optimum() {
        let p = all_ones(3);
        let w = DMatrix::from_element(3, 3, 1.0);
        // S = -ee^T + Diag(3): PSD with S e = 0
        let y = vec![-3.0; 3];
        let s = DMatrix::from_element(3, 3, -1.0) + DMatrix::identity(3, 3) * 3.0;
        let cand = Candidate {
            w: &w,
            lp: &[],
            y: &y,
            dual_psd: &s,
            dual_lp: &[],
        };
        let r = residuals(&p, &cand);
        assert!(r.primal <= 1e-9 && r.dual <= 1e-9 && r.gap <= 1e-9);

        let mut bumped = w.clone();
        bumped[(1, 1)] += 1e-3;
        let v = primal_residual_vector(&p, &bumped, &[]);
        assert!((v[1] - 1e-3).abs() <= 1e-15);
        assert_eq!(v[0], 0.0);
        let cand = Candidate { w: &bumped, ..cand };
        assert!((residuals(&p, &cand).primal - 1e-3 / (1.0 + 3f64.sqrt())).abs() <= 1e-15);

        let zero = DMatrix::zeros(3, 3);
        let cand = Candidate { w: &zero, ..cand };
        assert!((residuals(&p, &cand).primal - 1.0 / (1.0 + 3f64.sqrt())).abs() <= 1e-15);
    }

    #[test]
    fn duplicate_rows_do_not_change_the_optimum() {
        let mut p = all_ones(3);
        p.constraints.push(Constraint::new(1.0).psd(2, 2, 1.0));
        let sol = solve(&p, &SolverConfig::default());
        assert_eq!(sol.status, SolverStatus::Optimal);
        assert_eq!(sol.removed_rows, 1);
        assert_eq!(sol.y.len(), 4);
        assert!((sol.primal_obj + 9.0).abs() <= 1e-6);
    }

    #[test]
    fn complementarity_is_nonnegative_and_weak_duality_holds_when_feasible() {
        for p in [all_ones(5), pinned_corner(3), mixed()] {
            let sol = solve(&p, &SolverConfig::default());
            for h in &sol.history {
                assert!(h.complementarity >= 0.0);
                if h.residuals.primal <= 1e-9 && h.residuals.dual <= 1e-9 {
                    let scale = 1.0 + h.primal_obj.abs() + h.dual_obj.abs();
                    assert!(h.dual_obj <= h.primal_obj + 1e-9 * scale);
                }
            }
            // p - d = <X,S> + x^T z + <Rd,X> + rdl^T x - y^T rp
            let rp: Vec<f64> = primal_residual_vector(&p, &sol.w, &sol.lp);
            let (aty, aty_lp) = p.adjoint(&sol.y);
            let rd = p.cost_psd.to_dense(p.psd_side) - aty - &sol.dual_psd;
            let mut rhs = linalg::inner(&sol.w, &sol.dual_psd) + linalg::inner(&rd, &sol.w);
            for (j, (x, z)) in sol.lp.iter().zip(&sol.dual_lp).enumerate() {
                let rdl = p.cost_lp[j] - aty_lp[j] - z;
                rhs += x * z + rdl * x;
            }
            rhs += sol.y.iter().zip(&rp).map(|(y, r)| y * r).sum::<f64>();
            assert!((sol.primal_obj - sol.dual_obj - rhs).abs() <= 1e-9);
        }
    }

    #[test]
    fn cost_scaling_scales_the_objective_only() {
        let cfg = SolverConfig {
            tol_gap: 1e-10,
            tol_feas: 1e-10,
            ..SolverConfig::default()
        };
        for p in [pinned_corner(3), mixed()] {
            let a = solve(&p, &cfg);
            let b = solve(&p.scaled_cost(3.5), &cfg);
            assert_eq!(b.status, SolverStatus::Optimal);
            assert!((&a.w - &b.w).amax() <= 1e-6);
            assert!((b.primal_obj - 3.5 * a.primal_obj).abs() <= 1e-6 * (1.0 + b.primal_obj.abs()));
        }
    }

    #[test]
    fn repeated_solves_are_bit_identical() {
        let a = solve(&mixed(), &SolverConfig::default());
        let b = solve(&mixed(), &SolverConfig::default());
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.primal_obj.to_bits(), b.primal_obj.to_bits());
        assert_eq!(a.w, b.w);
    }

    #[test]
    fn gap_shrinks_over_five_iterations() {
        for p in [all_ones(3), all_ones(5), pinned_corner(3), mixed()] {
            let h = solve(&p, &SolverConfig::default()).history;
            for t in 0..h.len().saturating_sub(5) {
                assert!(h[t + 5].residuals.gap < h[t].residuals.gap || h[t].residuals.gap == 0.0);
            }
        }
    }

    #[test]
    fn unbounded_problem_is_flagged() {
        // min -X_12 with only X_11 pinned
        let mut p = SdpProblem::new(2, 0);
        p.cost_psd.add(0, 1, -1.0);
        p.constraints.push(Constraint::new(1.0).psd(0, 0, 1.0));
        let sol = solve(&p, &SolverConfig::default());
        assert_ne!(sol.status, SolverStatus::Optimal);
    }

    #[test]
    fn iteration_log_lines_are_tab_separated() {
        let sol = solve(&pinned_corner(2), &SolverConfig::default());
        let cols = IterationLog::tsv_header().split('\t').count();
        for h in &sol.history {
            assert_eq!(h.to_tsv().split('\t').count(), cols);
        }
    }
}
