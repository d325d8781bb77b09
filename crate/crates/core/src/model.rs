//! Constellations, the real-valued channel model and the reference
//! detectors.
//!
//! A complex `tx x rx` system is always handled in its real form: the
//! transmitted vector has `N = 2 tx` entries, each drawn from the
//! per-dimension alphabet `s_1 < ... < s_K`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Default upper bound on `K^N` for exhaustive ML search.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstellationKind {
    /// Square QAM seen as a PAM alphabet per real dimension.
    Qam,
    /// Antipodal signalling per real dimension.
    Psk,
}

/// Per-real-dimension symbol alphabet.
///
/// Points are kept at their integer grid values (no energy normalisation);
/// the SNR convention in [`sample_instance`] accounts for the energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<f64>,
    kind: ConstellationKind,
    name: String,
}

impl Constellation {
    pub fn from_points(points: Vec<f64>, kind: ConstellationKind) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints(points.len()));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedPoints);
        }
        let name = points
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",");
        Ok(Self { points, kind, name })
    }

    /// Look up a modulation by id (`bpsk`, `4qam`, `16qam`, `64qam`, ...)
    /// or parse an explicit comma-separated point list.
    pub fn by_name(name: &str) -> Result<Self> {
        let trimmed = name.trim();
        if trimmed.contains(',') {
            let points = trimmed
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Error::UnknownModulation(name.to_string()))?;
            return Self::from_points(points, ConstellationKind::Qam);
        }
        let id: String = trimmed
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_ascii_lowercase();
        let (points, kind) = match id.as_str() {
            "bpsk" => (vec![-1.0, 1.0], ConstellationKind::Psk),
            "qpsk" => (vec![-1.0, 1.0], ConstellationKind::Qam),
            _ => {
                let order: u64 = id
                    .strip_suffix("qam")
                    .and_then(|m| m.parse().ok())
                    .ok_or_else(|| Error::UnknownModulation(name.to_string()))?;
                let side = (order as f64).sqrt().round() as u64;
                if side < 2 || side * side != order {
                    return Err(Error::UnknownModulation(name.to_string()));
                }
                (pam_grid(side as usize), ConstellationKind::Qam)
            }
        };
        let mut c = Self::from_points(points, kind)?;
        c.name = id;
        Ok(c)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn points_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.points)
    }

    /// Number of points per real dimension (`K`).
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Average energy of one complex symbol, both real dimensions drawn
    /// uniformly from the alphabet.
    pub fn avg_complex_symbol_energy(&self) -> f64 {
        2.0 * self.sum_of_squares() / self.len() as f64
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.points.iter().map(|p| p * p).sum()
    }

    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.points.iter().position(|&p| p == value)
    }

    /// Index of the closest point; ties go to the lower index.
    pub fn nearest_index(&self, value: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, &p) in self.points.iter().enumerate() {
            let d = (value - p).abs();
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    pub fn bits_per_symbol(&self) -> u32 {
        usize::BITS - (self.len() - 1).leading_zeros()
    }

    /// Gray label of the point with the given index.
    pub fn gray_label(&self, index: usize) -> u32 {
        (index ^ (index >> 1)) as u32
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::by_name(s)
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn pam_grid(side: usize) -> Vec<f64> {
    (0..side)
        .map(|i| (2 * i) as f64 - (side - 1) as f64)
        .collect()
}

/// Binary `N x K` matrix with exactly one 1 per row, stored as the
/// selected column of each row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssignmentMatrix {
    k: usize,
    cols: Vec<usize>,
}

impl AssignmentMatrix {
    pub fn from_indices(k: usize, cols: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::TooFewPoints(0));
        }
        if let Some(row) = cols.iter().position(|&c| c >= k) {
            return Err(Error::RowSum { row });
        }
        Ok(Self { k, cols })
    }

    /// Validate a dense matrix as a member of the assignment set.
    pub fn from_matrix(u: &DMatrix<f64>) -> Result<Self> {
        let mut cols = Vec::with_capacity(u.nrows());
        for i in 0..u.nrows() {
            let row = u.row(i);
            if row.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::RowSum { row: i });
            }
            let ones: Vec<usize> = (0..u.ncols()).filter(|&j| row[j] == 1.0).collect();
            if ones.len() != 1 {
                return Err(Error::RowSum { row: i });
            }
            cols.push(ones[0]);
        }
        Self::from_indices(u.ncols(), cols)
    }

    pub fn n(&self) -> usize {
        self.cols.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn indices(&self) -> &[usize] {
        &self.cols
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(self.n(), self.k);
        for (i, &j) in self.cols.iter().enumerate() {
            u[(i, j)] = 1.0;
        }
        u
    }

    /// Iterate over all `K^N` members in lexicographic order of the index
    /// vector.
    pub fn enumerate(n: usize, k: usize) -> impl Iterator<Item = AssignmentMatrix> {
        let total = (k as u128).pow(n as u32);
        (0..total).map(move |mut code| {
            let mut cols = vec![0; n];
            for slot in cols.iter_mut().rev() {
                *slot = (code % k as u128) as usize;
                code /= k as u128;
            }
            AssignmentMatrix { k, cols }
        })
    }
}

/// `x = U s`.
pub fn encode(u: &AssignmentMatrix, c: &Constellation) -> Result<DVector<f64>> {
    if u.k() != c.len() {
        return Err(Error::dim(format!(
            "assignment has {} columns, constellation has {} points",
            u.k(),
            c.len()
        )));
    }
    Ok(DVector::from_iterator(
        u.n(),
        u.indices().iter().map(|&j| c.points()[j]),
    ))
}

/// Map a real vector with entries in the alphabet back to its assignment.
pub fn assignment_of(x: &DVector<f64>, c: &Constellation) -> Option<AssignmentMatrix> {
    let cols = x
        .iter()
        .map(|&v| c.index_of(v))
        .collect::<Option<Vec<_>>>()?;
    Some(AssignmentMatrix { k: c.len(), cols })
}

pub fn realify_vector(v: &DVector<Complex64>) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// Real decomposition `[[Re, -Im], [Im, Re]]` of a complex channel together
/// with the stacked received vector `[Re; Im]`.
pub fn complex_to_real(
    hc: &DMatrix<Complex64>,
    yc: &DVector<Complex64>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if hc.nrows() != yc.len() {
        return Err(Error::dim(format!(
            "channel has {} rows but received vector has {} entries",
            hc.nrows(),
            yc.len()
        )));
    }
    let (r, t) = hc.shape();
    let h = DMatrix::from_fn(2 * r, 2 * t, |i, j| {
        let z = hc[(i % r, j % t)];
        match (i < r, j < t) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    Ok((h, realify_vector(yc)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    Noiseless,
    SnrDb(f64),
}

impl NoiseLevel {
    /// Noise variance per real dimension for unit-variance complex channel
    /// taps: `tx * Es / (2 * 10^(snr/10))`.
    pub fn noise_var(&self, tx: usize, c: &Constellation) -> f64 {
        match *self {
            NoiseLevel::Noiseless => 0.0,
            NoiseLevel::SnrDb(db) => {
                tx as f64 * c.avg_complex_symbol_energy() / (2.0 * 10f64.powf(db / 10.0))
            }
        }
    }

    pub fn snr_db(&self) -> f64 {
        match *self {
            NoiseLevel::Noiseless => f64::INFINITY,
            NoiseLevel::SnrDb(db) => db,
        }
    }
}

/// One realified decoding problem.
#[derive(Debug, Clone)]
pub struct MimoInstance {
    /// `Nr x N` real channel.
    pub h: DMatrix<f64>,
    pub x_true: DVector<f64>,
    pub y_hat: DVector<f64>,
    /// Per real dimension.
    pub noise_var: f64,
    pub noise: NoiseLevel,
}

impl MimoInstance {
    pub fn new(h: DMatrix<f64>, x_true: DVector<f64>, y_hat: DVector<f64>) -> Result<Self> {
        if h.ncols() != x_true.len() || h.nrows() != y_hat.len() {
            return Err(Error::dim(format!(
                "channel {}x{}, x has {}, y has {}",
                h.nrows(),
                h.ncols(),
                x_true.len(),
                y_hat.len()
            )));
        }
        Ok(Self {
            h,
            x_true,
            y_hat,
            noise_var: 0.0,
            noise: NoiseLevel::Noiseless,
        })
    }

    /// Number of real transmit dimensions (`N`).
    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    pub fn residual_norm_sq(&self, x: &DVector<f64>) -> f64 {
        (&self.y_hat - &self.h * x).norm_squared()
    }
}

/// Draw an i.i.d. Rayleigh channel, uniform symbols and AWGN, and return
/// the realified instance.
pub fn sample_instance<R: Rng + ?Sized>(
    rng: &mut R,
    c: &Constellation,
    tx: usize,
    rx: usize,
    noise: NoiseLevel,
) -> Result<MimoInstance> {
    if tx == 0 || rx == 0 {
        return Err(Error::InvalidParameter(
            "antenna counts must be at least 1".into(),
        ));
    }
    if let NoiseLevel::SnrDb(db) = noise {
        if !db.is_finite() {
            return Err(Error::InvalidParameter(format!("snr_db = {db}")));
        }
    }
    let tap = std::f64::consts::FRAC_1_SQRT_2;
    let gauss = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };

    let mut hc = DMatrix::from_element(rx, tx, Complex64::new(0.0, 0.0));
    for i in 0..rx {
        for j in 0..tx {
            hc[(i, j)] = Complex64::new(tap * gauss(rng), tap * gauss(rng));
        }
    }
    let k = c.len();
    let xc = DVector::from_fn(tx, |_, _| {
        let re = c.points()[rng.random_range(0..k)];
        let im = c.points()[rng.random_range(0..k)];
        Complex64::new(re, im)
    });
    let noise_var = noise.noise_var(tx, c);
    let sigma = noise_var.sqrt();
    let mut yc = &hc * &xc;
    if noise_var > 0.0 {
        for v in yc.iter_mut() {
            *v += Complex64::new(sigma * gauss(rng), sigma * gauss(rng));
        }
    }
    let (h, y_hat) = complex_to_real(&hc, &yc)?;
    Ok(MimoInstance {
        h,
        x_true: realify_vector(&xc),
        y_hat,
        noise_var,
        noise,
    })
}

#[derive(Debug, Clone)]
pub struct MlDecision {
    pub x_hat: DVector<f64>,
    pub assignment: AssignmentMatrix,
    /// `min ||y - H x||^2`.
    pub distance_sq: f64,
}

/// Exhaustive maximum-likelihood search. Ties resolve to the
/// lexicographically smallest index vector.
pub fn ml_oracle(inst: &MimoInstance, c: &Constellation, cap: u128) -> Result<MlDecision> {
    let n = inst.n();
    let k = c.len();
    let candidates = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if candidates > cap {
        return Err(Error::EnumerationCap { candidates, cap });
    }
    let cols: Vec<DVector<f64>> = (0..n).map(|j| inst.h.column(j).into_owned()).collect();

    // Depth-first search; `residuals[d]` is y minus the contribution of the
    // first d symbols, so every leaf is evaluated from a fresh parent.
    let mut residuals = vec![inst.y_hat.clone(); n + 1];
    let mut idx = vec![0usize; n];
    let mut best_idx = vec![0usize; n];
    let mut best = f64::INFINITY;
    let mut depth = 0usize;
    if n == 0 {
        return Ok(MlDecision {
            x_hat: DVector::zeros(0),
            assignment: AssignmentMatrix { k, cols: vec![] },
            distance_sq: inst.y_hat.norm_squared(),
        });
    }
    loop {
        let next = &residuals[depth] - &cols[depth] * c.points()[idx[depth]];
        residuals[depth + 1] = next;
        if depth + 1 == n {
            let d = residuals[n].norm_squared();
            if d < best {
                best = d;
                best_idx.copy_from_slice(&idx);
            }
            // advance odometer
            loop {
                idx[depth] += 1;
                if idx[depth] < k {
                    break;
                }
                idx[depth] = 0;
                if depth == 0 {
                    let assignment = AssignmentMatrix { k, cols: best_idx };
                    let x_hat = encode(&assignment, c)?;
                    return Ok(MlDecision {
                        x_hat,
                        assignment,
                        distance_sq: best,
                    });
                }
                depth -= 1;
            }
        } else {
            depth += 1;
        }
    }
}

/// Zero-forcing: least-squares equalisation followed by per-entry slicing.
pub fn zf_baseline(inst: &MimoInstance, c: &Constellation) -> Result<DVector<f64>> {
    let h = &inst.h;
    if h.nrows() < h.ncols() {
        return Err(Error::RankDeficient);
    }
    let qr = h.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if r.diagonal()
        .iter()
        .any(|v| v.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE))
    {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * &inst.y_hat;
    let z = r.solve_upper_triangular(&qty).ok_or(Error::RankDeficient)?;
    Ok(z.map(|v| c.points()[c.nearest_index(v)]))
}
