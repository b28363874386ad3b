//! Symmetric-matrix kernel: eigendecomposition, elementary symmetric
//! polynomials of a spectrum, characteristic-polynomial coefficients and
//! fractional matrix powers.

use num_traits::Num;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 60;

/// Finite symmetric `d×d` matrix.
///
/// Construction symmetrizes the input as `(M + Mᵀ)/2`, so the stored matrix
/// is exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    inner: Matrix<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn new(m: Matrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::symmetrized(m))
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            inner: Matrix::identity(d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            inner: Matrix::zeros(d, d),
        }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        Self {
            inner: Matrix::from_diagonal(diag),
        }
    }

    /// Symmetrizes without validation; for results of symmetric algebra.
    pub(crate) fn symmetrized(mut m: Matrix<T>) -> Self {
        let half = T::lit(0.5);
        let d = m.rows();
        for i in 0..d {
            for j in (i + 1)..d {
                let v = (m[(i, j)] + m[(j, i)]) * half;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { inner: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.inner[(i, j)]
    }

    pub fn trace(&self) -> T {
        self.inner.trace()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            inner: self.inner.scale(s),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            inner: self.inner.add(&rhs.inner),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            inner: self.inner.sub(&rhs.inner),
        }
    }

    /// `M + s·v vᵀ`.
    pub fn add_outer(&self, v: &[T], s: T) -> Self {
        assert_eq!(v.len(), self.dim());
        let mut m = self.inner.clone();
        for i in 0..v.len() {
            for j in 0..v.len() {
                m[(i, j)] += s * v[i] * v[j];
            }
        }
        Self { inner: m }
    }

    /// `A M Aᵀ` for square `A`; the result is re-symmetrized.
    pub fn congruence(&self, a: &Matrix<T>) -> Self {
        Self::symmetrized(a.matmul(&self.inner).matmul(&a.transpose()))
    }

    pub fn quadratic_form(&self, v: &[T]) -> T {
        self.inner.quadratic_form(v)
    }

    pub fn max_abs(&self) -> T {
        self.inner.max_abs()
    }
}

/// Eigenvalues sorted in descending order together with the matching
/// orthonormal eigenvectors (stored as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    eigenvalues: Vec<T>,
    eigenvectors: Matrix<T>,
    source_scale: T,
}

impl<T: Real> Spectrum<T> {
    /// Assembles a spectrum from parts; eigenvalues are re-sorted descending.
    ///
    /// Orthonormality of `eigenvectors` is the caller's responsibility.
    pub fn from_parts(eigenvalues: Vec<T>, eigenvectors: Matrix<T>) -> Result<Self> {
        let d = eigenvalues.len();
        if eigenvectors.rows() != d || eigenvectors.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: eigenvectors.cols(),
            });
        }
        let (eigenvalues, eigenvectors) = sort_descending(eigenvalues, Some(eigenvectors));
        let source_scale = max_abs(&eigenvalues);
        Ok(Self {
            eigenvalues,
            eigenvectors: eigenvectors.expect("vectors kept"),
            source_scale,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix<T> {
        &self.eigenvectors
    }

    /// Largest absolute eigenvalue.
    pub fn source_scale(&self) -> T {
        self.source_scale
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    /// Numerical-rank threshold `d·ε·max(|λ|_max, 1)`.
    pub fn rank_tolerance(&self) -> T {
        rank_tolerance(&self.eigenvalues)
    }

    /// Number of eigenvalues strictly above [`Self::rank_tolerance`].
    pub fn numerical_rank(&self) -> usize {
        numerical_rank(&self.eigenvalues)
    }

    /// `U diag(f(λ)) Uᵀ`.
    pub fn apply(&self, f: impl Fn(T) -> T) -> SymMatrix<T> {
        let fl: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.synthesize(&fl)
    }

    /// `U diag(w) Uᵀ` for per-eigenvector weights `w`.
    pub fn synthesize(&self, fl: &[T]) -> SymMatrix<T> {
        assert_eq!(fl.len(), self.dim());
        let d = self.dim();
        let u = &self.eigenvectors;
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let mut acc = T::zero();
                for (l, &w) in fl.iter().enumerate() {
                    acc += u[(i, l)] * w * u[(j, l)];
                }
                m[(i, j)] = acc;
                m[(j, i)] = acc;
            }
        }
        SymMatrix { inner: m }
    }

    pub fn reconstruct(&self) -> SymMatrix<T> {
        self.apply(|l| l)
    }

    /// `tr(U diag(f(λ)) Uᵀ · B)` without forming the product.
    pub fn trace_weighted(&self, weights: &[T], b: &SymMatrix<T>) -> T {
        let u = &self.eigenvectors;
        let bm = b.matrix();
        let mut acc = T::zero();
        for (l, &w) in weights.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            let col = u.column(l);
            acc += w * bm.quadratic_form(&col);
        }
        acc
    }
}

pub(crate) fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

pub fn rank_tolerance<T: Real>(eigenvalues: &[T]) -> T {
    T::from_usize_lossy(eigenvalues.len()) * T::epsilon() * max_abs(eigenvalues).max(T::one())
}

pub fn numerical_rank<T: Real>(eigenvalues: &[T]) -> usize {
    let tol = rank_tolerance(eigenvalues);
    eigenvalues.iter().filter(|&&l| l > tol).count()
}

/// Eigendecomposition of a symmetric matrix: Householder reduction to
/// tridiagonal form, then implicit QL iterations.
pub fn symmetric_eigen<T: Real>(m: &SymMatrix<T>) -> Result<Spectrum<T>> {
    let (vals, vecs) = tridiagonal_ql(m, true)?;
    Spectrum::from_parts(vals, vecs.expect("vectors requested"))
}

/// Eigenvalues only, sorted descending.
pub fn symmetric_eigenvalues<T: Real>(m: &SymMatrix<T>) -> Result<Vec<T>> {
    let (vals, _) = tridiagonal_ql(m, false)?;
    Ok(sort_descending(vals, None).0)
}

/// Eigendecomposition by cyclic Jacobi rotations. Slower than
/// [`symmetric_eigen`] but with high relative accuracy for small
/// eigenvalues of well-scaled matrices.
pub fn symmetric_eigen_jacobi<T: Real>(m: &SymMatrix<T>) -> Result<Spectrum<T>> {
    let (vals, vecs) = jacobi(m, true)?;
    Spectrum::from_parts(vals, vecs.expect("vectors requested"))
}

fn tridiagonal_ql<T: Real>(m: &SymMatrix<T>, want_vectors: bool) -> Result<(Vec<T>, Option<Matrix<T>>)> {
    let n = m.dim();
    let mut v = m.matrix().clone();
    if n <= 1 {
        let vals = (0..n).map(|i| v[(i, i)]).collect();
        return Ok((vals, want_vectors.then(|| Matrix::identity(n))));
    }
    let (mut d, mut e) = householder_tridiagonal(&mut v, want_vectors);
    let mut vecs = want_vectors.then_some(v);
    implicit_ql(&mut d, &mut e, vecs.as_mut(), m)?;
    Ok((d, vecs))
}

/// Reduces `v` in place; returns the diagonal and subdiagonal (`e[0] = 0`).
/// With `accumulate`, `v` ends up holding the orthogonal transformation.
fn householder_tridiagonal<T: Real>(v: &mut Matrix<T>, accumulate: bool) -> (Vec<T>, Vec<T>) {
    let n = v.rows();
    let mut d: Vec<T> = (0..n).map(|j| v[(n - 1, j)]).collect();
    let mut e = vec![T::zero(); n];
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
                v[(j, i)] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let val = v[(k, j)] - (f * e[k] + g * d[k]);
                    v[(k, j)] = val;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    if !accumulate {
        // The reduced diagonal sits on the diagonal of `v`.
        let diag = (0..n).map(|j| v[(j, j)]).collect();
        e[0] = T::zero();
        return (diag, e);
    }
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let val = v[(k, j)] - g * d[k];
                    v[(k, j)] = val;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = T::zero();
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
    (d, e)
}

const MAX_QL_ITERATIONS: usize = 60;

fn implicit_ql<T: Real>(d: &mut [T], e: &mut [T], mut v: Option<&mut Matrix<T>>, source: &SymMatrix<T>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    let off = e.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
                    let frob = source
                        .matrix()
                        .as_slice()
                        .iter()
                        .fold(T::zero(), |a, &x| a + x * x)
                        .sqrt();
                    let dmax = d.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
                    let dmin = d.iter().fold(T::infinity(), |a, &x| a.min(x.abs()));
                    return Err(Error::EigenNoConvergence {
                        sweeps: iter,
                        off_diagonal: off.as_f64(),
                        frobenius: frob.as_f64(),
                        diagonal_ratio: (dmax / dmin).as_f64(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let h = v[(k, i + 1)];
                            v[(k, i + 1)] = s * v[(k, i)] + c * h;
                            v[(k, i)] = c * v[(k, i)] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

fn jacobi<T: Real>(m: &SymMatrix<T>, want_vectors: bool) -> Result<(Vec<T>, Option<Matrix<T>>)> {
    let d = m.dim();
    let mut a = m.matrix().clone();
    let mut v = want_vectors.then(|| Matrix::<T>::identity(d));
    if d <= 1 {
        return Ok(((0..d).map(|i| a[(i, i)]).collect(), v));
    }
    let hundred = T::lit(100.0);
    let half = T::lit(0.5);
    for sweep in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[(p, q)].abs();
            }
        }
        if off == T::zero() {
            let vals = (0..d).map(|i| a[(i, i)]).collect();
            return Ok((vals, v));
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let g = hundred * apq.abs();
                // Off-diagonal entries negligible against both diagonal
                // entries are dropped once the first sweeps have run.
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = half * h / apq;
                    let t = T::one() / (theta.abs() + (T::one() + theta * theta).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let tau = s / (T::one() + c);
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for r in 0..d {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let np = arp - s * (arq + arp * tau);
                    let nq = arq + s * (arp - arq * tau);
                    a[(r, p)] = np;
                    a[(p, r)] = np;
                    a[(r, q)] = nq;
                    a[(q, r)] = nq;
                }
                if let Some(v) = v.as_mut() {
                    for r in 0..d {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = vrp - s * (vrq + vrp * tau);
                        v[(r, q)] = vrq + s * (vrp - vrq * tau);
                    }
                }
            }
        }
    }
    let mut off = T::zero();
    let mut diag_min = T::infinity();
    let mut diag_max = T::zero();
    for p in 0..d {
        diag_min = diag_min.min(a[(p, p)].abs());
        diag_max = diag_max.max(a[(p, p)].abs());
        for q in (p + 1)..d {
            off += a[(p, q)] * a[(p, q)];
        }
    }
    let frob = m
        .matrix()
        .as_slice()
        .iter()
        .fold(T::zero(), |acc, &x| acc + x * x)
        .sqrt();
    Err(Error::EigenNoConvergence {
        sweeps: MAX_SWEEPS,
        off_diagonal: (off + off).sqrt().as_f64(),
        frobenius: frob.as_f64(),
        diagonal_ratio: (diag_max / diag_min).as_f64(),
    })
}

fn sort_descending<T: Real>(vals: Vec<T>, vecs: Option<Matrix<T>>) -> (Vec<T>, Option<Matrix<T>>) {
    let d = vals.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).expect("finite eigenvalues"));
    let sorted: Vec<T> = order.iter().map(|&i| vals[i]).collect();
    let vecs = vecs.map(|v| {
        let mut out = Matrix::zeros(d, d);
        for (new, &old) in order.iter().enumerate() {
            for r in 0..d {
                out[(r, new)] = v[(r, old)];
            }
        }
        out
    });
    (sorted, vecs)
}

/// Coefficients `(e_0, …, e_d)` of `∏(1 + λ_i t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElemSymCoeffs<T> {
    values: Vec<T>,
}

impl<T: Copy> ElemSymCoeffs<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `e_k`; `None` when `k` exceeds the number of eigenvalues.
    pub fn get(&self, k: usize) -> Option<T> {
        self.values.get(k).copied()
    }

    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }
}

/// Elementary symmetric polynomials of `eigs` by the one-pass product
/// recurrence. Works for any numeric type, including exact rationals.
pub fn elementary_symmetric<T: Num + Copy>(eigs: &[T]) -> ElemSymCoeffs<T> {
    let mut e = vec![T::zero(); eigs.len() + 1];
    e[0] = T::one();
    for (i, &l) in eigs.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] = e[j] + l * e[j - 1];
        }
    }
    ElemSymCoeffs { values: e }
}

/// Coefficients `(c_1, …, c_{d+1})` of `det(λI − M) = Σ c_j λ^{d+1−j}`.
pub fn charpoly_coeffs<T: Real>(spec: &Spectrum<T>) -> Vec<T> {
    elementary_symmetric(spec.eigenvalues())
        .values()
        .iter()
        .enumerate()
        .map(|(j, &e)| if j % 2 == 0 { e } else { -e })
        .collect()
}

/// Treatment of small eigenvalues when a matrix power needs a positive spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenFloor<T> {
    /// Fail when an eigenvalue is at or below the numerical-rank tolerance.
    Reject,
    /// Replace eigenvalues below the given floor by the floor.
    Clamp(T),
}

impl<T: Real> EigenFloor<T> {
    /// `Clamp(1e-12 · max(λ_max, 1))`.
    pub fn default_clamp(spec: &Spectrum<T>) -> Self {
        EigenFloor::Clamp(T::lit(1e-12) * spec.max_eigenvalue().max(T::one()))
    }

    /// Applies the policy to a spectrum, returning the (possibly clamped)
    /// eigenvalues to feed into a negative or fractional power.
    pub fn apply(&self, eigenvalues: &[T]) -> Result<Vec<T>> {
        match *self {
            EigenFloor::Reject => {
                let tol = rank_tolerance(eigenvalues);
                match eigenvalues.iter().copied().find(|&l| l <= tol) {
                    Some(l) => Err(Error::NegativeEigenvalueBelowFloor {
                        eigenvalue: l.as_f64(),
                        floor: tol.as_f64(),
                    }),
                    None => Ok(eigenvalues.to_vec()),
                }
            }
            EigenFloor::Clamp(floor) => Ok(eigenvalues.iter().map(|&l| l.max(floor)).collect()),
        }
    }
}

/// `M^q` through the spectrum. Non-negative integer powers skip the floor
/// policy; every other exponent requires a spectrum that passes it.
pub fn fractional_power<T: Real>(spec: &Spectrum<T>, q: T, floor: EigenFloor<T>) -> Result<SymMatrix<T>> {
    if !q.is_finite() {
        return Err(Error::invalid(format!("matrix power exponent {q} is not finite")));
    }
    if q >= T::zero() && q.fract() == T::zero() {
        let n = q
            .to_i32()
            .ok_or_else(|| Error::invalid("matrix power exponent too large"))?;
        return Ok(spec.apply(|l| l.powi(n)));
    }
    let floored = floor.apply(spec.eigenvalues())?;
    let powered: Vec<T> = floored.iter().map(|&l| l.powf(q)).collect();
    Ok(spec.synthesize(&powered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_close, random_orthogonal, random_psd_rank, random_spd, seeded};
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn eig(rows: &[[f64; 3]]) -> Spectrum<f64> {
        symmetric_eigen(&SymMatrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn eigen_of_identity_and_diagonal() {
        let s = symmetric_eigen(&SymMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 1.0, 1.0]);
        let s = eig(&[[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(s.eigenvalues(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn eigen_of_two_by_two() {
        let m = SymMatrix::from_rows(&[[2.0, -1.0], [-1.0, 2.0]]).unwrap();
        let s = symmetric_eigen(&m).unwrap();
        assert_close(s.eigenvalues()[0], 3.0, 1e-14);
        assert_close(s.eigenvalues()[1], 1.0, 1e-14);
        let vals = symmetric_eigenvalues(&m).unwrap();
        assert_close(vals[0], 3.0, 1e-14);
    }

    #[test]
    fn constructor_symmetrizes_and_rejects_nonfinite() {
        let m = SymMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(
            SymMatrix::from_rows(&[[1.0, f64::NAN], [0.0, 1.0]]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn zero_and_one_dimensional() {
        let s = symmetric_eigen(&SymMatrix::<f64>::zeros(2)).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 0.0]);
        let s = symmetric_eigen(&SymMatrix::from_rows(&[[5.0]]).unwrap()).unwrap();
        assert_eq!(s.eigenvalues(), &[5.0]);
    }

    #[test]
    fn elementary_symmetric_examples() {
        assert_eq!(elementary_symmetric(&[1.0, 1.0, 1.0]).values(), &[1.0, 3.0, 3.0, 1.0]);
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0]).values(), &[1.0, 6.0, 11.0, 6.0]);
        assert_eq!(elementary_symmetric(&[1.0, 1.0, 0.0]).values(), &[1.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn elementary_symmetric_exact_rationals() {
        let r = |n, d| Ratio::new(n, d);
        let e = elementary_symmetric(&[r(1, 2), r(1, 3), r(2, 1)]);
        // (1 + t/2)(1 + t/3)(1 + 2t)
        assert_eq!(e.values(), &[r(1, 1), r(17, 6), r(11, 6), r(1, 3)]);
    }

    #[test]
    fn charpoly_examples() {
        let s = symmetric_eigen(&SymMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(charpoly_coeffs(&s), vec![1.0, -2.0, 1.0]);
        let s = eig(&[[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]);
        assert_eq!(charpoly_coeffs(&s), vec![1.0, -6.0, 11.0, -6.0]);
        let s = symmetric_eigen(&SymMatrix::<f64>::zeros(2)).unwrap();
        assert_eq!(charpoly_coeffs(&s), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn fractional_power_examples() {
        let s = symmetric_eigen(&SymMatrix::<f64>::identity(3)).unwrap();
        let inv = fractional_power(&s, -1.0, EigenFloor::Reject).unwrap();
        assert_eq!(inv, SymMatrix::identity(3));

        let s = symmetric_eigen(&SymMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        let r = fractional_power(&s, 0.5, EigenFloor::Reject).unwrap();
        assert_close(r.get(0, 0), 2.0, 1e-15);
        assert_close(r.get(1, 1), 3.0, 1e-15);
        assert_eq!(r.get(0, 1), 0.0);
        let r = fractional_power(&s, -0.5, EigenFloor::Reject).unwrap();
        assert_close(r.get(0, 0), 0.5, 1e-15);
        assert_close(r.get(1, 1), 1.0 / 3.0, 1e-15);
    }

    #[test]
    fn floor_policy() {
        let s = symmetric_eigen(&SymMatrix::from_diagonal(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            fractional_power(&s, -1.0, EigenFloor::Reject),
            Err(Error::NegativeEigenvalueBelowFloor { .. })
        ));
        // integer powers bypass the floor
        let sq = fractional_power(&s, 2.0, EigenFloor::Reject).unwrap();
        assert_eq!(sq.get(1, 1), 0.0);
        let clamped = fractional_power(&s, -1.0, EigenFloor::default_clamp(&s)).unwrap();
        assert_close(clamped.get(1, 1), 1e12, 1e-12);
    }

    #[test]
    fn rank_counts_tiny_eigenvalues_as_zero() {
        let s = symmetric_eigen(&SymMatrix::from_diagonal(&[1.0, 1e-17, 0.5])).unwrap();
        assert_eq!(s.numerical_rank(), 2);
    }

    /// Brute-force e_k: sum over all k-subsets.
    fn brute_elementary(eigs: &[f64], k: usize) -> f64 {
        let d = eigs.len();
        (0u32..(1 << d))
            .filter(|mask| mask.count_ones() as usize == k)
            .map(|mask| {
                (0..d)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| eigs[i])
                    .product::<f64>()
            })
            .sum()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    proptest! {
        #[test]
        fn elementary_matches_subset_enumeration(eigs in proptest::collection::vec(0.01f64..5.0, 1..=10)) {
            let e = elementary_symmetric(&eigs);
            prop_assert_eq!(e.get(0), Some(1.0));
            for k in 1..=eigs.len() {
                let b = brute_elementary(&eigs, k);
                prop_assert!(rel(e.get(k).unwrap(), b) <= 1e-10, "k={} {} vs {}", k, e.get(k).unwrap(), b);
            }
            let sum: f64 = eigs.iter().sum();
            let prod: f64 = eigs.iter().product();
            prop_assert!(rel(e.get(1).unwrap(), sum) <= 1e-10);
            prop_assert!(rel(e.get(eigs.len()).unwrap(), prod) <= 1e-8);
        }

        #[test]
        fn power_additivity(seed in any::<u64>(), d in 1usize..=8, a in -1.5f64..1.5, b in -1.5f64..1.5) {
            let m = random_spd(d, &mut seeded(seed));
            let s = symmetric_eigen(&m).unwrap();
            let ma = fractional_power(&s, a, EigenFloor::Reject).unwrap();
            let mb = fractional_power(&s, b, EigenFloor::Reject).unwrap();
            let mab = fractional_power(&s, a + b, EigenFloor::Reject).unwrap();
            let prod = ma.matrix().matmul(mb.matrix());
            let scale = mab.max_abs();
            let err = prod.sub(mab.matrix()).max_abs();
            prop_assert!(err <= 1e-8 * scale, "err {} scale {}", err, scale);
        }

        #[test]
        fn spectrum_invariants(seed in any::<u64>(), d in 1usize..=8) {
            let mut rng = seeded(seed);
            let q = random_orthogonal(d, &mut rng);
            let diag: Vec<f64> = (0..d).map(|i| (i as f64) - 3.0 + 0.37).collect();
            let m = SymMatrix::from_diagonal(&diag).congruence(&q);
            let s = symmetric_eigen(&m).unwrap();
            let recon = s.reconstruct().sub(&m).max_abs();
            prop_assert!(recon <= 1e-9 * s.source_scale().max(1.0));
            let u = s.eigenvectors();
            let mut utu = u.transpose().matmul(u);
            utu.add_identity(-1.0);
            prop_assert!(utu.max_abs() <= 1e-10);
            for w in s.eigenvalues().windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }

        #[test]
        fn eigenvalues_invariant_under_conjugation(seed in any::<u64>(), d in 1usize..=8) {
            let mut rng = seeded(seed);
            let m = random_spd(d, &mut rng);
            let q = random_orthogonal(d, &mut rng);
            let a = symmetric_eigenvalues(&m).unwrap();
            let b = symmetric_eigenvalues(&m.congruence(&q)).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(rel(*y, *x) <= 1e-9);
            }
        }

        #[test]
        fn charpoly_vanishes_at_eigenvalues(seed in any::<u64>(), d in 1usize..=8) {
            let m = random_spd(d, &mut seeded(seed));
            let s = symmetric_eigen(&m).unwrap();
            let c = charpoly_coeffs(&s);
            let bound = 1e-7 * s.source_scale().max(1.0).powi(d as i32);
            for &l in s.eigenvalues() {
                let v = c.iter().fold(0.0, |acc, &cj| acc * l + cj);
                prop_assert!(v.abs() <= bound, "p({}) = {}", l, v);
            }
        }
    }

    #[test]
    fn ql_and_jacobi_agree() {
        let mut rng = seeded(21);
        let cases = [
            SymMatrix::zeros(4),
            SymMatrix::identity(5),
            SymMatrix::from_diagonal(&[3.0, 1e-3, 1e-3, 1e-3, 2.0]),
            random_psd_rank(6, 2, &mut rng),
            random_spd(9, &mut rng),
            random_spd(20, &mut rng),
        ];
        for m in &cases {
            let a = symmetric_eigen(m).unwrap();
            let b = symmetric_eigen_jacobi(m).unwrap();
            let values_only = symmetric_eigenvalues(m).unwrap();
            for ((x, y), z) in a.eigenvalues().iter().zip(b.eigenvalues()).zip(&values_only) {
                assert!((x - y).abs() <= 1e-12 * a.source_scale().max(1.0), "{x} vs {y}");
                assert!((x - z).abs() <= 1e-12 * a.source_scale().max(1.0), "{x} vs {z}");
            }
            let r = a.reconstruct();
            for (u, v) in r.matrix().as_slice().iter().zip(m.matrix().as_slice()) {
                assert!((u - v).abs() <= 1e-12 * a.source_scale().max(1.0));
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let m = SymMatrix::<f32>::from_rows(&[[2.0, -1.0], [-1.0, 2.0]]).unwrap();
        let s = symmetric_eigen(&m).unwrap();
        assert!((s.eigenvalues()[0] - 3.0).abs() < 1e-5);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-5);
    }
}
