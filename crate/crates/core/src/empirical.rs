//! Sample-level estimators: moments, the unbiased `Φ_k` factor, simplex
//! volumes with their Monte Carlo average, and the energy distance.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::divergence::GaussianSummary;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derived_rng, StreamRng};
use crate::scalar::Real;
use crate::spectral::{symmetric_eigen, SymMatrix};

/// `n × d` data matrix, rows are observations. Requires `n ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    data: Matrix<T>,
}

impl<T: Real> Sample<T> {
    pub fn new(data: Matrix<T>) -> Result<Self> {
        if data.rows() < 2 {
            return Err(Error::TooFewObservations { n: data.rows() });
        }
        if data.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::TooFewObservations { n: 0 });
        }
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.data.rows()
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.data.row(i)
    }

    pub fn data(&self) -> &Matrix<T> {
        &self.data
    }

    /// Rows at `indices`, in that order (repetitions allowed).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let d = self.dim();
        let mut buf = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            buf.extend_from_slice(self.row(i));
        }
        Self::new(Matrix::from_row_major(indices.len(), d, buf)?)
    }

    /// Stacks `self` on top of `other`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let mut buf = self.data.as_slice().to_vec();
        buf.extend_from_slice(other.data.as_slice());
        Self::new(Matrix::from_row_major(self.n() + other.n(), self.dim(), buf)?)
    }
}

/// Sample mean and covariance with divisor `n − 1`.
pub fn sample_moments<T: Real>(x: &Sample<T>) -> Result<GaussianSummary<T>> {
    let idx: Vec<usize> = (0..x.n()).collect();
    sample_moments_of_rows(x, &idx)
}

/// Moments of the rows of `x` listed in `rows` (repetitions allowed).
pub fn sample_moments_of_rows<T: Real>(x: &Sample<T>, rows: &[usize]) -> Result<GaussianSummary<T>> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::TooFewObservations { n });
    }
    let d = x.dim();
    let nf = T::from_usize_lossy(n);
    let mut mean = vec![T::zero(); d];
    for &r in rows {
        for (m, &v) in mean.iter_mut().zip(x.row(r)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= nf;
    }
    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![T::zero(); d];
    for &r in rows {
        for ((c, &v), &m) in centered.iter_mut().zip(x.row(r)).zip(&mean) {
            *c = v - m;
        }
        for i in 0..d {
            let ci = centered[i];
            for j in i..d {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    let div = nf - T::one();
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / div;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    GaussianSummary::from_parts(mean, SymMatrix::symmetrized(cov))
}

/// `(n−k−1)!(n−1)^k/(n−1)!`, the factor turning the plug-in `Φ_k(Σ̂)` into
/// its unbiased estimator. Evaluated as a sum of logarithms.
pub fn unbiased_phi_k_factor<T: Real>(n: usize, k: usize) -> Result<T> {
    if n < k + 2 {
        return Err(Error::SampleTooSmall { n, k });
    }
    let ln_n1 = ((n - 1) as f64).ln();
    let log: f64 = (n - k..n).map(|j| ln_n1 - (j as f64).ln()).sum();
    Ok(T::lit(log.exp()))
}

/// Squared volume of the simplex spanned by the rows of `points`
/// (`k + 1` vertices in `R^d`): `det(G)/(k!)²` with `G` the Gram matrix of
/// the edges from the first vertex.
pub fn simplex_squared_volume<T: Real>(points: &Matrix<T>) -> Result<T> {
    let d = points.cols();
    let Some(k) = points.rows().checked_sub(1) else {
        return Err(Error::EmptyInput);
    };
    if k > d {
        return Err(Error::DimensionMismatch { expected: d, found: k });
    }
    let x0 = points.row(0);
    let edges: Vec<Vec<T>> = (1..=k)
        .map(|i| points.row(i).iter().zip(x0).map(|(&a, &b)| a - b).collect())
        .collect();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = crate::matrix::dot(&edges[i], &edges[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let mut fact = T::one();
    for i in 2..=k {
        fact *= T::from_usize_lossy(i);
    }
    Ok(gram_determinant(g) / (fact * fact))
}

/// Determinant of a PSD Gram matrix by diagonally pivoted `LDLᵀ`; pivots
/// that fall to round-off level make the determinant 0.
fn gram_determinant<T: Real>(mut g: Matrix<T>) -> T {
    let k = g.rows();
    let scale = (0..k).map(|i| g[(i, i)]).fold(T::zero(), T::max);
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) * scale;
    let mut alive: Vec<usize> = (0..k).collect();
    let mut det = T::one();
    while !alive.is_empty() {
        let (pos, &p) = alive
            .iter()
            .enumerate()
            .max_by(|a, b| {
                g[(*a.1, *a.1)]
                    .partial_cmp(&g[(*b.1, *b.1)])
                    .expect("finite Gram matrix")
            })
            .expect("nonempty");
        let pivot = g[(p, p)];
        if pivot <= tol {
            return T::zero();
        }
        det *= pivot;
        alive.swap_remove(pos);
        for &i in &alive {
            let f = g[(i, p)] / pivot;
            for &j in &alive {
                let v = g[(i, j)] - f * g[(p, j)];
                g[(i, j)] = v;
            }
        }
    }
    det
}

/// Source of i.i.d. points in `R^d`.
pub trait PointSampler<T>: Sync {
    fn dim(&self) -> usize;

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]);
}

/// `N(mean, cov)` via `x = mean + U diag(√λ₊) z`.
#[derive(Debug, Clone)]
pub struct GaussianSampler<T> {
    mean: Vec<T>,
    factor: Matrix<T>,
}

impl<T: Real> GaussianSampler<T> {
    pub fn new(g: &GaussianSummary<T>) -> Result<Self> {
        let spec = symmetric_eigen(g.cov())?;
        let roots: Vec<T> = spec.eigenvalues().iter().map(|&l| l.max(T::zero()).sqrt()).collect();
        let factor = spec.eigenvectors().matmul(&Matrix::from_diagonal(&roots));
        Ok(Self {
            mean: g.mean().to_vec(),
            factor,
        })
    }
}

impl<T: Real> PointSampler<T> for GaussianSampler<T> {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        let z: Vec<T> = (0..self.mean.len())
            .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.mean[i] + crate::matrix::dot(self.factor.row(i), &z);
        }
    }
}

/// Dirac mass at a point.
#[derive(Debug, Clone)]
pub struct PointMass<T>(pub Vec<T>);

impl<T: Real> PointSampler<T> for PointMass<T> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn sample<R: Rng + ?Sized>(&self, _rng: &mut R, out: &mut [T]) {
        out.copy_from_slice(&self.0);
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

const MC_CHUNK: usize = 4096;

/// Average squared volume of `trials` random `k`-simplices with i.i.d.
/// vertices from `sampler`.
///
/// A single seed is drawn from `rng`; each chunk of trials then uses its own
/// derived stream, so the estimate does not depend on the thread count.
pub fn mc_simplicial_dispersion<T: Real, S: PointSampler<T>, R: RngCore + ?Sized>(
    sampler: &S,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let d = sampler.dim();
    if k > d {
        return Err(Error::DimensionMismatch { expected: d, found: k });
    }
    let master = rng.next_u64();
    let chunks = trials.div_ceil(MC_CHUNK);
    let partial: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r: StreamRng = derived_rng(master, "mc-simplex", 0, c as u64);
            let count = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut pts = Matrix::zeros(k + 1, d);
            let mut buf = vec![T::zero(); d];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for i in 0..=k {
                    sampler.sample(&mut r, &mut buf);
                    for (j, &v) in buf.iter().enumerate() {
                        pts[(i, j)] = v;
                    }
                }
                let v = simplex_squared_volume(&pts)?.as_f64();
                s += v;
                s2 += v * v;
            }
            Ok((s, s2))
        })
        .collect();
    let (mut s, mut s2) = (0.0, 0.0);
    for p in partial {
        let (a, b) = p?;
        s += a;
        s2 += b;
    }
    let n = trials as f64;
    let mean = s / n;
    let var = if trials > 1 {
        ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
    })
}

/// Generalized energy distance with exponent `δ ∈ (0, 2]`, as the
/// V-statistic plug-in
/// `(2/nm)ΣΣ‖x−y‖^δ − (1/n²)ΣΣ‖x−x'‖^δ − (1/m²)ΣΣ‖y−y'‖^δ`.
pub fn energy_distance<T: Real>(x: &Sample<T>, y: &Sample<T>, delta: T) -> Result<T> {
    if !(delta > T::zero() && delta <= T::lit(2.0)) {
        return Err(Error::BadExponent(delta.as_f64()));
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let kernel = |a: &[T], b: &[T]| -> T {
        let sq: T = a.iter().zip(b).map(|(&u, &v)| (u - v) * (u - v)).sum();
        if delta == T::lit(2.0) {
            sq
        } else {
            sq.powf(delta * T::lit(0.5))
        }
    };
    let within = |s: &Sample<T>| -> T {
        let mut acc = T::zero();
        for i in 0..s.n() {
            for j in i + 1..s.n() {
                acc += kernel(s.row(i), s.row(j));
            }
        }
        let n = T::from_usize_lossy(s.n());
        T::lit(2.0) * acc / (n * n)
    };
    let mut cross = T::zero();
    for i in 0..x.n() {
        for j in 0..y.n() {
            cross += kernel(x.row(i), y.row(j));
        }
    }
    let cross = T::lit(2.0) * cross / (T::from_usize_lossy(x.n()) * T::from_usize_lossy(y.n()));
    let v = cross - within(x) - within(y);
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) * (T::one() + cross.abs());
    if v >= T::zero() {
        Ok(v)
    } else if v >= -tol {
        Ok(T::zero())
    } else {
        Err(Error::NumericalInconsistency {
            value: v.as_f64(),
            tolerance: tol.as_f64(),
        })
    }
}
