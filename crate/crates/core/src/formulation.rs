//! Matrix-lifting relaxations of the ML decoding problem
//!
//! ```text
//! min trace(S U^T Q U + 2 C U)   over binary U with unit row sums,
//! Q = H^T H,  S = s s^T,  C = -s y^T H
//! ```
//!
//! Three relaxations are built, all as one PSD block `W` plus a
//! nonnegative block:
//!
//! * [`Formulation::Full`]: `W = [[I_K, U^T, V^T], [U, X, Y], [V, Y, Z]]`,
//!   side `2N + K`, with `V = U S`, `Z = (sum s_k^2) Y`.
//! * [`Formulation::Equivalent`]: roles of `Q` and `S` exchanged,
//!   `W = [[I_N, U, V], [U^T, X, Y], [V^T, Y, Z]]`, side `2K + N`, `V = Q U`.
//! * [`Formulation::Reduced`]: the row-sum equality eliminated through
//!   `U = F + Û G`, side `(K - 1) + 2N`, with a constant objective offset.
//!
//! Every equality is kept explicit (no substitution), so each row of the
//! generated program maps back to one relation of the relaxation.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Constellation, MimoInstance};
use crate::sdp::{Constraint, SdpProblem, SparseSym};

/// Data of the trace-form objective for one received vector.
#[derive(Debug, Clone)]
pub struct ObjectiveData {
    /// `H^T H`, `N x N`.
    pub q: DMatrix<f64>,
    /// `s s^T`, `K x K`.
    pub s_outer: DMatrix<f64>,
    /// `-s y^T H`, `K x N`.
    pub c: DMatrix<f64>,
    pub s_sq_sum: f64,
    /// `y^T y`; adding it to the trace objective gives `||y - H U s||^2`.
    pub offset: f64,
    pub s: DVector<f64>,
}

impl ObjectiveData {
    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }
}

pub fn build_objective_data(inst: &MimoInstance, c: &Constellation) -> ObjectiveData {
    let s = c.points_vector();
    let h = &inst.h;
    ObjectiveData {
        q: h.transpose() * h,
        s_outer: &s * s.transpose(),
        c: -(&s * (inst.y_hat.transpose() * h)),
        s_sq_sum: c.sum_of_squares(),
        offset: inst.y_hat.norm_squared(),
        s,
    }
}

/// `trace(S U^T Q U + 2 C U)` for any real `N x K` matrix.
pub fn objective_value(u: &DMatrix<f64>, od: &ObjectiveData) -> f64 {
    let quad = (&od.s_outer * u.transpose() * &od.q * u).trace();
    quad + 2.0 * (&od.c * u).trace()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    /// Full matrix lifting, side `2N + K`.
    Full,
    /// Role-exchanged lifting, side `2K + N`.
    Equivalent,
    /// Projected lifting over `N x (K-1)`, side `(K-1) + 2N`.
    Reduced,
}

impl Formulation {
    pub const ALL: [Formulation; 3] = [
        Formulation::Full,
        Formulation::Equivalent,
        Formulation::Reduced,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Formulation::Full => "mlift-full",
            Formulation::Equivalent => "mlift-equiv",
            Formulation::Reduced => "mlift-reduced",
        }
    }

    /// Side length of the PSD variable.
    pub fn side(&self, n: usize, k: usize) -> usize {
        match self {
            Formulation::Full => 2 * n + k,
            Formulation::Equivalent => 2 * k + n,
            Formulation::Reduced => (k - 1) + 2 * n,
        }
    }

    /// Number of entries of the PSD variable.
    pub fn variable_count(&self, n: usize, k: usize) -> usize {
        self.side(n, k).pow(2)
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formulation::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown formulation `{s}`")))
    }
}

/// Entry count `(NK + 1)^2` of the vector-lifting variable.
pub fn vector_lifting_variable_count(n: usize, k: usize) -> usize {
    (n * k + 1).pow(2)
}

/// The size rule: the full-lifting family (in its reduced form) when
/// `N <= K`, the role-exchanged form otherwise.
pub fn select_formulation(n: usize, k: usize) -> Formulation {
    if n <= k {
        Formulation::Reduced
    } else {
        Formulation::Equivalent
    }
}

/// `G = [I_{K-1} | -e]` and `F = (E_{NxK} - E_{Nx(K-1)} G) / K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    pub g: DMatrix<f64>,
    pub f: DMatrix<f64>,
}

impl ProjectionPair {
    /// `F + Û G`.
    pub fn reconstruct(&self, u_hat: &DMatrix<f64>) -> DMatrix<f64> {
        &self.f + u_hat * &self.g
    }
}

pub fn make_projection(n: usize, k: usize) -> Result<ProjectionPair> {
    if k < 2 {
        return Err(Error::TooFewPoints(k));
    }
    let g = DMatrix::from_fn(k - 1, k, |i, j| {
        if j == k - 1 {
            -1.0
        } else if i == j {
            1.0
        } else {
            0.0
        }
    });
    let f =
        (DMatrix::from_element(n, k, 1.0) - DMatrix::from_element(n, k - 1, 1.0) * &g) / k as f64;
    Ok(ProjectionPair { g, f })
}

/// Block positions inside `W` for one formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftedLayout {
    pub formulation: Formulation,
    pub n: usize,
    pub k: usize,
    /// Side of the pinned identity block.
    pub id_size: usize,
    /// Side of the `X`, `Y`, `Z` blocks.
    pub inner: usize,
    pub side: usize,
}

impl LiftedLayout {
    pub fn new(formulation: Formulation, n: usize, k: usize) -> Self {
        let (id_size, inner) = match formulation {
            Formulation::Full => (k, n),
            Formulation::Equivalent => (n, k),
            Formulation::Reduced => (k - 1, n),
        };
        Self {
            formulation,
            n,
            k,
            id_size,
            inner,
            side: id_size + 2 * inner,
        }
    }

    /// Shape of the assignment-like block (`U` or `Û`).
    pub fn u_shape(&self) -> (usize, usize) {
        match self.formulation {
            Formulation::Reduced => (self.n, self.k - 1),
            _ => (self.n, self.k),
        }
    }

    /// Position of `U_ij` (or `Û_ij`).
    pub fn u(&self, i: usize, j: usize) -> (usize, usize) {
        match self.formulation {
            Formulation::Equivalent => (i, self.id_size + j),
            _ => (self.id_size + i, j),
        }
    }

    pub fn v(&self, i: usize, j: usize) -> (usize, usize) {
        match self.formulation {
            Formulation::Equivalent => (i, self.id_size + self.inner + j),
            _ => (self.id_size + self.inner + i, j),
        }
    }

    pub fn x(&self, a: usize, b: usize) -> (usize, usize) {
        (self.id_size + a, self.id_size + b)
    }

    /// `Y_ab` as stored in the upper off-diagonal block.
    pub fn y(&self, a: usize, b: usize) -> (usize, usize) {
        (self.id_size + a, self.id_size + self.inner + b)
    }

    pub fn z(&self, a: usize, b: usize) -> (usize, usize) {
        (self.id_size + self.inner + a, self.id_size + self.inner + b)
    }

    pub fn extract_u(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        let (r, c) = self.u_shape();
        DMatrix::from_fn(r, c, |i, j| {
            let (a, b) = self.u(i, j);
            w[(a, b)]
        })
    }
}

/// A built relaxation together with what is needed to interpret it.
#[derive(Debug, Clone)]
pub struct LiftedProblem {
    pub problem: SdpProblem,
    pub layout: LiftedLayout,
    /// Row counts per constraint family, in build order.
    pub counts: Vec<(&'static str, usize)>,
    /// `S` (full), `Q` (role-exchanged) or `G S G^T` (reduced): the matrix
    /// with `V = U * mixing` or `V = mixing * U`.
    pub mixing: DMatrix<f64>,
    pub projection: Option<ProjectionPair>,
}

impl LiftedProblem {
    pub fn formulation(&self) -> Formulation {
        self.layout.formulation
    }

    pub fn total_constraints(&self) -> usize {
        self.counts.iter().map(|c| c.1).sum()
    }

    pub fn count(&self, family: &str) -> usize {
        self.counts
            .iter()
            .find(|c| c.0 == family)
            .map_or(0, |c| c.1)
    }

    /// The relaxed `N x K` assignment carried by a solved `W`.
    pub fn relaxed_u(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        let block = self.layout.extract_u(w);
        match &self.projection {
            Some(pp) => pp.reconstruct(&block),
            None => block,
        }
    }

    /// Exact rank-structured lift `B B^T` of an `N x K` matrix with unit
    /// row sums, with the matching nonnegative slacks.
    pub fn lift(&self, u: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
        let l = &self.layout;
        match l.formulation {
            Formulation::Reduced => {
                let u_hat = u.columns(0, l.k - 1).into_owned();
                self.lift_block(&u_hat)
            }
            _ => self.lift_block(u),
        }
    }

    /// Lift of the free block (`U`, or `Û` for the reduced form).
    pub fn lift_block(&self, u: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
        let l = &self.layout;
        let b = match l.formulation {
            Formulation::Equivalent => {
                let v = &self.mixing * u;
                stack(&[DMatrix::identity(l.n, l.n), u.transpose(), v.transpose()])
            }
            _ => {
                let v = u * &self.mixing;
                stack(&[DMatrix::identity(l.id_size, l.id_size), u.clone(), v])
            }
        };
        let w = &b * b.transpose();
        let mut lp: Vec<f64> = u.transpose().iter().copied().collect();
        if l.formulation == Formulation::Reduced {
            lp.extend((0..l.n).map(|i| 1.0 - u.row(i).sum()));
        }
        (w, lp)
    }
}

fn stack(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks[0].ncols();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Accumulates rows in families and records their counts.
struct Builder {
    problem: SdpProblem,
    counts: Vec<(&'static str, usize)>,
}

/// Coefficient on the single entry `W_rc` (`<A, W>` counts an off-diagonal
/// symmetric pair twice, hence the half).
fn on_entry(a: &mut SparseSym, (r, c): (usize, usize), coef: f64) {
    if r == c {
        a.add(r, c, coef);
    } else {
        a.add(r, c, 0.5 * coef);
    }
}

struct Row {
    psd: SparseSym,
    lp: Vec<(usize, f64)>,
    rhs: f64,
}

impl Row {
    fn new(rhs: f64) -> Self {
        Self {
            psd: SparseSym::new(),
            lp: Vec::new(),
            rhs,
        }
    }

    fn w(mut self, pos: (usize, usize), coef: f64) -> Self {
        on_entry(&mut self.psd, pos, coef);
        self
    }

    fn slack(mut self, j: usize, coef: f64) -> Self {
        self.lp.push((j, coef));
        self
    }
}

impl Builder {
    fn new(side: usize, lp_len: usize) -> Self {
        Self {
            problem: SdpProblem::new(side, lp_len),
            counts: Vec::new(),
        }
    }

    fn family(&mut self, name: &'static str, rows: impl IntoIterator<Item = Row>) {
        let before = self.problem.constraints.len();
        for row in rows {
            let mut c = Constraint::new(row.rhs);
            c.psd = row.psd;
            for (j, v) in row.lp {
                c = c.lp(j, v);
            }
            self.problem.constraints.push(c);
        }
        let added = self.problem.constraints.len() - before;
        self.counts.push((name, added));
    }

    fn pin_identity(&mut self, size: usize) {
        let rows = (0..size).flat_map(|j| {
            (0..=j).map(move |i| Row::new(if i == j { 1.0 } else { 0.0 }).w((i, j), 1.0))
        });
        self.family("identity", rows);
    }

    fn cost(&mut self, pos: (usize, usize), coef: f64) {
        on_entry(&mut self.problem.cost_psd, pos, coef);
    }
}

/// Symmetric-`Y` ties and `Z = factor * Y` for the lower-right blocks of the
/// full and reduced forms.
fn y_sym_and_z_link(b: &mut Builder, l: LiftedLayout, factor: f64) {
    let n = l.inner;
    let sym = (0..n)
        .flat_map(|j| (0..j).map(move |i| Row::new(0.0).w(l.y(i, j), 1.0).w(l.y(j, i), -1.0)));
    b.family("y_sym", sym);
    let link = (0..n)
        .flat_map(|j| (0..=j).map(move |i| Row::new(0.0).w(l.z(i, j), 1.0).w(l.y(i, j), -factor)));
    b.family("z_link", link);
}

/// Full matrix lifting over `W` of side `2N + K`.
pub fn build_matrix_lifting(od: &ObjectiveData) -> LiftedProblem {
    let (n, k) = (od.n(), od.k());
    let l = LiftedLayout::new(Formulation::Full, n, k);
    let mut b = Builder::new(l.side, n * k);
    let s = &od.s_outer;

    b.pin_identity(k);
    b.family(
        "row_sum",
        (0..n).map(|i| (0..k).fold(Row::new(1.0), |r, j| r.w(l.u(i, j), 1.0))),
    );
    b.family(
        "u_nonneg",
        (0..n).flat_map(|i| {
            (0..k).map(move |j| Row::new(0.0).w(l.u(i, j), 1.0).slack(i * k + j, -1.0))
        }),
    );
    b.family(
        "v_link",
        (0..n).flat_map(|i| {
            (0..k).map(move |j| {
                (0..k).fold(Row::new(0.0).w(l.v(i, j), 1.0), |r, m| {
                    r.w(l.u(i, m), -s[(m, j)])
                })
            })
        }),
    );
    b.family("x_diag", (0..n).map(|i| Row::new(1.0).w(l.x(i, i), 1.0)));
    b.family(
        "y_diag",
        (0..n).map(|i| {
            (0..k).fold(Row::new(0.0).w(l.y(i, i), 1.0), |r, m| {
                r.w(l.u(i, m), -s[(m, m)])
            })
        }),
    );
    y_sym_and_z_link(&mut b, l, od.s_sq_sum);

    // trace(L W) = 2 trace(C U) + trace(Q Y)
    for a in 0..k {
        for i in 0..n {
            b.cost(l.u(i, a), 2.0 * od.c[(a, i)]);
        }
    }
    for i in 0..n {
        for j in 0..n {
            b.cost(l.y(i, j), od.q[(i, j)]);
        }
    }

    b.problem.label = Formulation::Full.id().to_string();
    LiftedProblem {
        problem: b.problem,
        layout: l,
        counts: b.counts,
        mixing: od.s_outer.clone(),
        projection: None,
    }
}

/// Role-exchanged lifting over `W` of side `2K + N`.
///
/// Note that, unlike the other two forms, nothing here pins the diagonal of
/// `Y`; for any fractional `U` the objective can be driven to `-inf` along
/// `Y -> Y - tA, Z -> Z + t^2 A` with `A = Diag(U^T e) - U^T U`. The solver
/// reports this as [`crate::sdp::SolverStatus::InfeasibleSuspected`].
pub fn build_equivalent(od: &ObjectiveData) -> LiftedProblem {
    let (n, k) = (od.n(), od.k());
    let l = LiftedLayout::new(Formulation::Equivalent, n, k);
    let mut b = Builder::new(l.side, n * k);
    let q = &od.q;
    let e = DVector::from_element(n, 1.0);
    let qe = q * &e;
    let q2 = q * q;
    let q2e = &q2 * &e;

    b.pin_identity(n);
    b.family(
        "row_sum",
        (0..n).map(|i| (0..k).fold(Row::new(1.0), |r, j| r.w(l.u(i, j), 1.0))),
    );
    b.family(
        "u_nonneg",
        (0..n).flat_map(|i| {
            (0..k).map(move |j| Row::new(0.0).w(l.u(i, j), 1.0).slack(i * k + j, -1.0))
        }),
    );
    b.family(
        "v_link",
        (0..n).flat_map(|i| {
            (0..k).map(move |j| {
                (0..n).fold(Row::new(0.0).w(l.v(i, j), 1.0), |r, m| {
                    r.w(l.u(m, j), -q[(i, m)])
                })
            })
        }),
    );
    b.family(
        "x_diag",
        (0..k).map(|a| (0..n).fold(Row::new(0.0).w(l.x(a, a), 1.0), |r, i| r.w(l.u(i, a), -1.0))),
    );
    b.family(
        "x_offdiag",
        (0..k).flat_map(|bb| (0..bb).map(move |a| Row::new(0.0).w(l.x(a, bb), 1.0))),
    );
    let rowsum = |target: &DVector<f64>,
                  block: fn(&LiftedLayout, usize, usize) -> (usize, usize)| {
        (0..k)
            .map(|a| {
                let r = (0..k).fold(Row::new(0.0), |r, c| r.w(block(&l, a, c), 1.0));
                (0..n).fold(r, |r, i| r.w(l.u(i, a), -target[i]))
            })
            .collect::<Vec<_>>()
    };
    let total = |value: f64, block: fn(&LiftedLayout, usize, usize) -> (usize, usize)| {
        let r = (0..k).flat_map(|a| (0..k).map(move |c| (a, c)));
        vec![r.fold(Row::new(value), |row, (a, c)| row.w(block(&l, a, c), 1.0))]
    };
    b.family("y_rowsum", rowsum(&qe, LiftedLayout::y));
    b.family("y_total", total(q.sum(), LiftedLayout::y));
    b.family("z_rowsum", rowsum(&q2e, LiftedLayout::z));
    b.family("z_total", total(q2.sum(), LiftedLayout::z));
    let sym = (0..k)
        .flat_map(|c| (0..c).map(move |a| Row::new(0.0).w(l.y(a, c), 1.0).w(l.y(c, a), -1.0)));
    b.family("y_sym", sym);

    // trace(L W) = 2 trace(C U) + trace(S Y)
    for a in 0..k {
        for i in 0..n {
            b.cost(l.u(i, a), 2.0 * od.c[(a, i)]);
        }
        for c in 0..k {
            b.cost(l.y(a, c), od.s_outer[(a, c)]);
        }
    }

    b.problem.label = Formulation::Equivalent.id().to_string();
    LiftedProblem {
        problem: b.problem,
        layout: l,
        counts: b.counts,
        mixing: od.q.clone(),
        projection: None,
    }
}

/// Projected lifting over `Û` (`N x (K-1)`), side `(K-1) + 2N`.
///
/// The constant `trace(2 C F + S F^T Q F)` is stored in the problem offset.
pub fn build_reduced(od: &ObjectiveData, pp: &ProjectionPair) -> Result<LiftedProblem> {
    let (n, k) = (od.n(), od.k());
    if k < 2 {
        return Err(Error::TooFewPoints(k));
    }
    if pp.g.shape() != (k - 1, k) || pp.f.shape() != (n, k) {
        return Err(Error::dim(
            "projection pair does not match the objective data",
        ));
    }
    let km = k - 1;
    let l = LiftedLayout::new(Formulation::Reduced, n, k);
    let mut b = Builder::new(l.side, n * km + n);
    let gs = &pp.g * &od.s;
    let gsg = &gs * gs.transpose();
    let factor = gs.norm_squared();

    b.pin_identity(km);
    b.family(
        "row_sum_le",
        (0..n).map(|i| {
            (0..km).fold(Row::new(1.0).slack(n * km + i, 1.0), |r, j| {
                r.w(l.u(i, j), 1.0)
            })
        }),
    );
    b.family(
        "u_nonneg",
        (0..n).flat_map(|i| {
            (0..km).map(move |j| Row::new(0.0).w(l.u(i, j), 1.0).slack(i * km + j, -1.0))
        }),
    );
    let gsg_ref = &gsg;
    b.family(
        "v_link",
        (0..n).flat_map(|i| {
            (0..km).map(move |j| {
                (0..km).fold(Row::new(0.0).w(l.v(i, j), 1.0), |r, m| {
                    r.w(l.u(i, m), -gsg_ref[(m, j)])
                })
            })
        }),
    );
    b.family(
        "x_diag",
        (0..n).map(|i| (0..km).fold(Row::new(0.0).w(l.x(i, i), 1.0), |r, j| r.w(l.u(i, j), -1.0))),
    );
    b.family(
        "y_diag",
        (0..n).map(|i| {
            (0..km).fold(Row::new(0.0).w(l.y(i, i), 1.0), |r, m| {
                r.w(l.u(i, m), -gsg[(m, m)])
            })
        }),
    );
    y_sym_and_z_link(&mut b, l, factor);

    // trace(L̂ W) = 2 trace(M Û) + trace(Q Ŷ),  M = G S F^T Q + G C
    let m = &pp.g * &od.s_outer * pp.f.transpose() * &od.q + &pp.g * &od.c;
    for a in 0..km {
        for i in 0..n {
            b.cost(l.u(i, a), 2.0 * m[(a, i)]);
        }
    }
    for i in 0..n {
        for j in 0..n {
            b.cost(l.y(i, j), od.q[(i, j)]);
        }
    }
    b.problem.offset =
        (2.0 * &od.c * &pp.f).trace() + (&od.s_outer * pp.f.transpose() * &od.q * &pp.f).trace();
    b.problem.label = Formulation::Reduced.id().to_string();
    Ok(LiftedProblem {
        problem: b.problem,
        layout: l,
        counts: b.counts,
        mixing: gsg,
        projection: Some(pp.clone()),
    })
}

/// Build the requested relaxation.
pub fn build(f: Formulation, od: &ObjectiveData) -> Result<LiftedProblem> {
    match f {
        Formulation::Full => Ok(build_matrix_lifting(od)),
        Formulation::Equivalent => Ok(build_equivalent(od)),
        Formulation::Reduced => build_reduced(od, &make_projection(od.n(), od.k())?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{encode, sample_instance, AssignmentMatrix, NoiseLevel};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> (MimoInstance, Constellation) {
        let c = Constellation::by_name("bpsk").unwrap();
        let inst = MimoInstance::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![1.0, -1.0]),
            DVector::from_vec(vec![1.0, -1.0]),
        )
        .unwrap();
        (inst, c)
    }

    #[test]
    fn objective_data_on_identity_channel() {
        let (inst, c) = toy();
        let od = build_objective_data(&inst, &c);
        assert_eq!(od.q, DMatrix::identity(2, 2));
        let pm = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(od.s_outer, pm);
        assert_eq!(od.c, pm);
        assert_eq!(od.s_sq_sum, 2.0);
        assert_eq!(od.offset, 2.0);
    }

    #[test]
    fn sixteen_qam_z_factor_and_rank_one_square() {
        let c = Constellation::by_name("16qam").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inst = sample_instance(&mut rng, &c, 2, 2, NoiseLevel::SnrDb(10.0)).unwrap();
        let od = build_objective_data(&inst, &c);
        assert_eq!(od.s_sq_sum, 20.0);
        let sq = &od.s_outer * &od.s_outer;
        let scaled = &od.s_outer * od.s_sq_sum;
        assert!((sq - scaled).amax() <= 1e-12);
    }

    #[test]
    fn objective_value_hand_example() {
        let (inst, c) = toy();
        let od = build_objective_data(&inst, &c);
        let u = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_relative_eq!(objective_value(&u, &od), -2.0, epsilon = 1e-12);
        // residual is zero, so the value is -||y||^2
        assert_relative_eq!(objective_value(&u, &od), -inst.y_hat.norm_squared());
    }

    #[test]
    fn projection_small_cases() {
        let p2 = make_projection(3, 2).unwrap();
        assert_eq!(p2.g, DMatrix::from_row_slice(1, 2, &[1.0, -1.0]));
        for i in 0..3 {
            assert_eq!(
                p2.f.row(i).iter().copied().collect::<Vec<_>>(),
                vec![0.0, 1.0]
            );
        }
        let u = p2.reconstruct(&DMatrix::from_element(3, 1, 0.3));
        assert_relative_eq!(u[(0, 0)], 0.3);
        assert_relative_eq!(u[(0, 1)], 0.7);

        let p3 = make_projection(2, 3).unwrap();
        assert_eq!(
            p3.g,
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, -1.0, 0.0, 1.0, -1.0])
        );
        for i in 0..2 {
            assert_eq!(
                p3.f.row(i).iter().copied().collect::<Vec<_>>(),
                vec![0.0, 0.0, 1.0]
            );
        }
        assert!(make_projection(2, 1).is_err());
    }

    #[test]
    fn reduced_z_factor() {
        let c = Constellation::by_name("bpsk").unwrap();
        let pp = make_projection(1, 2).unwrap();
        let gs = &pp.g * c.points_vector();
        assert_eq!(gs.as_slice(), &[-2.0]);
        assert_eq!((&gs * gs.transpose())[(0, 0)], 4.0);

        let c16 = Constellation::by_name("16qam").unwrap();
        let pp = make_projection(1, 4).unwrap();
        assert_eq!((&pp.g * c16.points_vector()).norm_squared(), 56.0);
    }

    #[test]
    fn selection_rule() {
        assert_eq!(select_formulation(8, 4), Formulation::Equivalent);
        assert_eq!(select_formulation(4, 4), Formulation::Reduced);
        assert_eq!(select_formulation(4, 8), Formulation::Reduced);
        assert_eq!(Formulation::Full.side(8, 4), 20);
        assert_eq!(Formulation::Equivalent.side(8, 4), 16);
        assert_eq!(Formulation::Full.side(4, 8), 16);
    }

    #[test]
    fn formulation_ids_round_trip() {
        for f in Formulation::ALL {
            assert_eq!(f.id().parse::<Formulation>().unwrap(), f);
        }
        assert!("mlift".parse::<Formulation>().is_err());
    }

    #[test]
    fn lifts_satisfy_every_row_and_match_the_objective() {
        let c = Constellation::by_name("16qam").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = sample_instance(&mut rng, &c, 1, 2, NoiseLevel::SnrDb(5.0)).unwrap();
        let od = build_objective_data(&inst, &c);
        for f in Formulation::ALL {
            let lp = build(f, &od).unwrap();
            assert_eq!(lp.problem.psd_side, f.side(2, 4));
            lp.problem.validate().unwrap();
            for u in AssignmentMatrix::enumerate(2, 4) {
                let um = u.to_matrix();
                let (w, slack) = lp.lift(&um);
                let worst = crate::sdp::primal_residual_vector(&lp.problem, &w, &slack)
                    .iter()
                    .fold(0.0_f64, |m, v| m.max(v.abs()));
                assert!(worst < 1e-9, "{f}: {worst}");
                assert!(slack.iter().all(|v| *v >= 0.0));
                assert!(crate::linalg::min_eigenvalue(&w) > -1e-9);
                let lifted = lp.problem.objective(&w, &slack) + lp.problem.offset;
                assert_relative_eq!(lifted, objective_value(&um, &od), epsilon = 1e-9);
                let x = encode(&u, &c).unwrap();
                assert_relative_eq!(
                    lifted + od.offset,
                    inst.residual_norm_sq(&x),
                    epsilon = 1e-9
                );
            }
        }
    }
}
