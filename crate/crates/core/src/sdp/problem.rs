use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Sparse symmetric matrix stored by its upper triangle (`row <= col`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    entries: BTreeMap<(usize, usize), f64>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accumulate `value` into the symmetric pair `(r, c)` / `(c, r)`.
    pub fn add(&mut self, r: usize, c: usize, value: f64) {
        if value == 0.0 {
            return;
        }
        let key = if r <= c { (r, c) } else { (c, r) };
        let slot = self.entries.entry(key).or_insert(0.0);
        *slot += value;
        if *slot == 0.0 {
            self.entries.remove(&key);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let key = if r <= c { (r, c) } else { (c, r) };
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    /// Upper-triangle entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().map(|&(_, c)| c).max()
    }

    /// Both triangles, as `(row, col, value)`.
    pub fn full_entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for (r, c, v) in self.iter() {
            out.push((r, c, v));
            if r != c {
                out.push((c, r, v));
            }
        }
        out
    }

    /// Trace inner product with a (symmetric) dense matrix.
    pub fn dot(&self, x: &DMatrix<f64>) -> f64 {
        self.iter()
            .map(|(r, c, v)| {
                if r == c {
                    v * x[(r, r)]
                } else {
                    v * (x[(r, c)] + x[(c, r)])
                }
            })
            .sum()
    }

    /// `m += alpha * self`.
    pub fn add_to(&self, alpha: f64, m: &mut DMatrix<f64>) {
        for (r, c, v) in self.iter() {
            m[(r, c)] += alpha * v;
            if r != c {
                m[(c, r)] += alpha * v;
            }
        }
    }

    pub fn to_dense(&self, dim: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        self.add_to(1.0, &mut m);
        m
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut s = Self::new();
        for c in 0..m.ncols() {
            for r in 0..=c {
                let v = if r == c {
                    m[(r, c)]
                } else {
                    0.5 * (m[(r, c)] + m[(c, r)])
                };
                s.add(r, c, v);
            }
        }
        s
    }

    /// Squared Frobenius norm of the full symmetric matrix.
    pub fn norm_sq(&self) -> f64 {
        self.iter()
            .map(|(r, c, v)| if r == c { v * v } else { 2.0 * v * v })
            .sum()
    }
}

/// One equality row `<A, W> + a^T x = rhs`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraint {
    pub psd: SparseSym,
    /// Sorted `(index, coefficient)` pairs into the nonnegative block.
    pub lp: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(rhs: f64) -> Self {
        Self {
            rhs,
            ..Default::default()
        }
    }

    pub fn psd(mut self, r: usize, c: usize, v: f64) -> Self {
        self.psd.add(r, c, v);
        self
    }

    /// Accumulate `v` on LP entry `index`; entries that reach zero are dropped.
    pub fn lp(mut self, index: usize, v: f64) -> Self {
        if v == 0.0 {
            return self;
        }
        match self.lp.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => {
                self.lp[pos].1 += v;
                if self.lp[pos].1 == 0.0 {
                    self.lp.remove(pos);
                }
            }
            Err(pos) => self.lp.insert(pos, (index, v)),
        }
        self
    }

    pub fn eval(&self, w: &DMatrix<f64>, x: &[f64]) -> f64 {
        self.psd.dot(w) + self.lp.iter().map(|&(i, a)| a * x[i]).sum::<f64>()
    }
}

/// Conic program in standard equality form:
///
/// ```text
/// min  <C, W> + c^T x + offset
/// s.t. <A_i, W> + a_i^T x = b_i
///      W PSD (side d),  x >= 0 (length m)
/// ```
///
/// `offset` is never folded into the cost; it is carried so that objective
/// values of different formulations can be compared.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub psd_side: usize,
    pub lp_len: usize,
    pub cost_psd: SparseSym,
    pub cost_lp: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub label: String,
    pub offset: f64,
}

impl SdpProblem {
    pub fn new(psd_side: usize, lp_len: usize) -> Self {
        Self {
            psd_side,
            lp_len,
            cost_psd: SparseSym::new(),
            cost_lp: vec![0.0; lp_len],
            constraints: Vec::new(),
            label: String::new(),
            offset: 0.0,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.rhs).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cost_lp.len() != self.lp_len {
            return Err(Error::dim("LP cost length differs from LP block size"));
        }
        let in_range = |s: &SparseSym| s.max_index().is_none_or(|m| m < self.psd_side);
        if !in_range(&self.cost_psd) {
            return Err(Error::dim("cost entry outside the PSD block"));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !in_range(&c.psd) || c.lp.iter().any(|&(j, _)| j >= self.lp_len) {
                return Err(Error::dim(format!(
                    "constraint {i} indexes outside its block"
                )));
            }
            if !c.rhs.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "constraint {i} has a non-finite right-hand side"
                )));
            }
        }
        Ok(())
    }

    pub fn objective(&self, w: &DMatrix<f64>, x: &[f64]) -> f64 {
        self.cost_psd.dot(w) + self.cost_lp.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// `A(W, x)`: the constraint left-hand sides.
    pub fn apply(&self, w: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.eval(w, x)).collect()
    }

    /// `A^T y`, split into its PSD and LP parts.
    pub fn adjoint(&self, y: &[f64]) -> (DMatrix<f64>, Vec<f64>) {
        let mut m = DMatrix::zeros(self.psd_side, self.psd_side);
        let mut v = vec![0.0; self.lp_len];
        for (c, &yi) in self.constraints.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            c.psd.add_to(yi, &mut m);
            for &(j, a) in &c.lp {
                v[j] += yi * a;
            }
        }
        (m, v)
    }

    /// Same problem with the cost scaled by `lambda`.
    pub fn scaled_cost(&self, lambda: f64) -> Self {
        let mut p = self.clone();
        let mut cost = SparseSym::new();
        for (r, c, v) in self.cost_psd.iter() {
            cost.add(r, c, lambda * v);
        }
        p.cost_psd = cost;
        p.cost_lp.iter_mut().for_each(|v| *v *= lambda);
        p
    }
}
