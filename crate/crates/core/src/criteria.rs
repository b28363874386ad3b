//! Kiefer's φ_p design criteria and the simplicial functionals Φ_k,
//! with the gradients used by the Jeffreys–Bregman divergences.
//!
//! `Φ_k(M) = ((k+1)/k!) e_k(λ(M))` is the expected squared volume of a
//! random `k`-simplex whose vertices are i.i.d. with covariance `M`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::spectral::{charpoly_coeffs, elementary_symmetric, EigenFloor, Spectrum, SymMatrix};

/// Exponent of a φ_p criterion, on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriterionP<T> {
    NegInfinity,
    Finite(T),
    PosInfinity,
}

impl<T: Real> CriterionP<T> {
    pub fn new(p: T) -> Result<Self> {
        if p.is_nan() {
            return Err(Error::invalid("p is NaN"));
        }
        Ok(if p == T::infinity() {
            CriterionP::PosInfinity
        } else if p == T::neg_infinity() {
            CriterionP::NegInfinity
        } else {
            CriterionP::Finite(p)
        })
    }
}

/// Order `k ∈ {1, …, d}` of a simplicial functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CriterionK(usize);

impl CriterionK {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::invalid(format!("k = {k} outside 1..={d}")));
        }
        Ok(Self(k))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

fn check_psd<T: Real>(spec: &Spectrum<T>) -> Result<()> {
    let tol = spec.rank_tolerance();
    let min = spec.min_eigenvalue();
    if min < -tol {
        return Err(Error::NotPsd {
            eigenvalue: min.as_f64(),
            tolerance: tol.as_f64(),
        });
    }
    Ok(())
}

/// Kiefer's φ_p criterion.
///
/// `p = ±∞` give `λ_max`/`λ_min`, `p = 0` gives `det^{1/d}`, other values
/// give `[(1/d) tr(M^p)]^{1/p}`. For `p ≤ 0` a numerically singular matrix
/// scores 0; for `p > 0` eigenvalues at or below the rank tolerance are
/// left out of the trace.
pub fn phi_p<T: Real>(spec: &Spectrum<T>, p: CriterionP<T>) -> Result<T> {
    check_psd(spec)?;
    let d = spec.dim();
    let singular = spec.numerical_rank() < d;
    Ok(match p {
        CriterionP::PosInfinity => spec.max_eigenvalue().max(T::zero()),
        CriterionP::NegInfinity if singular => T::zero(),
        CriterionP::NegInfinity => spec.min_eigenvalue(),
        CriterionP::Finite(p) if p <= T::zero() && singular => T::zero(),
        CriterionP::Finite(p) => log_phi_p_finite(spec.eigenvalues(), p).exp(),
    })
}

/// `log φ_p` for finite `p`; `-∞` when the criterion is zero.
pub fn log_phi_p<T: Real>(spec: &Spectrum<T>, p: T) -> Result<T> {
    check_psd(spec)?;
    if !p.is_finite() {
        return Err(Error::invalid("log φ_p needs a finite p"));
    }
    if p <= T::zero() && spec.numerical_rank() < spec.dim() {
        return Ok(T::neg_infinity());
    }
    Ok(log_phi_p_finite(spec.eigenvalues(), p))
}

/// `log φ_p` from eigenvalues already known to satisfy the rank rule.
pub(crate) fn log_phi_p_finite<T: Real>(eigs: &[T], p: T) -> T {
    let d = T::from_usize_lossy(eigs.len());
    if p == T::zero() {
        return eigs.iter().map(|&l| l.ln()).sum::<T>() / d;
    }
    let tol = crate::spectral::rank_tolerance(eigs);
    // Scale out λ_max so that λ^p cannot overflow for large |p|.
    let s = crate::spectral::max_abs(eigs).max(T::min_positive_value());
    let sum: T = eigs
        .iter()
        .filter(|&&l| p < T::zero() || l > tol)
        .map(|&l| (l / s).powf(p))
        .sum();
    s.ln() + (sum / d).ln() / p
}

fn simplicial_constant<T: Real>(k: usize) -> T {
    // (k+1)/k!
    let mut fact = T::one();
    for i in 2..=k {
        fact *= T::from_usize_lossy(i);
    }
    T::from_usize_lossy(k + 1) / fact
}

fn check_k<T: Real>(spec: &Spectrum<T>, k: CriterionK) -> Result<usize> {
    let k = k.get();
    if k > spec.dim() {
        return Err(Error::invalid(format!("k = {k} exceeds dimension {}", spec.dim())));
    }
    Ok(k)
}

/// Simplicial functional `Φ_k(M) = ((k+1)/k!) e_k(λ(M))`.
///
/// Returns exactly 0 when the numerical rank of `M` is below `k`.
pub fn simplicial_phi<T: Real>(spec: &Spectrum<T>, k: CriterionK) -> Result<T> {
    check_psd(spec)?;
    let k = check_k(spec, k)?;
    if spec.numerical_rank() < k {
        return Ok(T::zero());
    }
    let e = elementary_symmetric(spec.eigenvalues());
    Ok(simplicial_constant::<T>(k) * e.get(k).expect("k <= d"))
}

/// `log Φ_k(M)`; `-∞` when the numerical rank is below `k`.
pub fn log_simplicial_phi<T: Real>(spec: &Spectrum<T>, k: CriterionK) -> Result<T> {
    check_psd(spec)?;
    let k = check_k(spec, k)?;
    if spec.numerical_rank() < k {
        return Ok(T::neg_infinity());
    }
    Ok(log_elementary_scaled(spec.eigenvalues(), k) + simplicial_constant::<T>(k).ln())
}

/// `log e_k(λ)` with `λ_max` scaled out, so large spectra do not overflow.
pub(crate) fn log_elementary_scaled<T: Real>(eigs: &[T], k: usize) -> T {
    let s = crate::spectral::max_abs(eigs).max(T::min_positive_value());
    let scaled: Vec<T> = eigs.iter().map(|&l| l / s).collect();
    let e = elementary_symmetric(&scaled);
    T::from_usize_lossy(k) * s.ln() + e.get(k).expect("k <= d").ln()
}

/// All `log e_k`, `k = 0..=d`, from one recurrence on the scaled spectrum.
pub(crate) fn log_elementary_all<T: Real>(eigs: &[T]) -> Vec<T> {
    let s = crate::spectral::max_abs(eigs).max(T::min_positive_value());
    let scaled: Vec<T> = eigs.iter().map(|&l| l / s).collect();
    let ls = s.ln();
    elementary_symmetric(&scaled)
        .values()
        .iter()
        .enumerate()
        .map(|(k, &e)| T::from_usize_lossy(k) * ls + e.ln())
        .collect()
}

/// Gradient of `Φ_k` at `M`, by Horner's scheme in `M` on the
/// characteristic-polynomial coefficients:
/// `(−1)^{k−1} ((k+1)/k!) (M^{k−1} + c_2 M^{k−2} + ⋯ + c_k I)`.
pub fn grad_simplicial_phi<T: Real>(m: &SymMatrix<T>, spec: &Spectrum<T>, k: CriterionK) -> Result<SymMatrix<T>> {
    check_psd(spec)?;
    let k = check_k(spec, k)?;
    if m.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: m.dim(),
        });
    }
    let c = charpoly_coeffs(spec);
    let d = m.dim();
    let mut acc = Matrix::<T>::identity(d);
    for cj in c.iter().take(k).skip(1) {
        acc = acc.matmul(m.matrix());
        acc.add_identity(*cj);
    }
    let sign = if (k - 1) % 2 == 0 { T::one() } else { -T::one() };
    Ok(SymMatrix::symmetrized(acc.scale(sign * simplicial_constant::<T>(k))))
}

/// `e_{k}` of the spectrum with eigenvalue `i` removed, for every `i` and
/// every `k = 0..d−1`: row `i` holds the coefficients for `λ \ λ_i`.
pub fn leave_one_out_elementary<T: Real>(eigs: &[T]) -> Vec<Vec<T>> {
    (0..eigs.len())
        .map(|i| {
            let rest: Vec<T> = eigs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &l)| l)
                .collect();
            elementary_symmetric(&rest).values().to_vec()
        })
        .collect()
}

/// Eigenvalues of `∇Φ_k(M)/Φ_k(M)` in the eigenbasis of `M`:
/// `e_{k−1}(λ \ λ_i) / e_k(λ)`.
pub(crate) fn normalized_simplicial_gradient_weights<T: Real>(eigs: &[T], loo: &[Vec<T>], k: usize) -> Vec<T> {
    let ek = elementary_symmetric(eigs).get(k).expect("k <= d");
    loo.iter().map(|row| row[k - 1] / ek).collect()
}

/// `∇φ_p(M)/φ_p(M) = M^{p−1} / tr(M^p)`, with `tr(M^0) = d`.
pub fn grad_phi_p_normalized<T: Real>(spec: &Spectrum<T>, p: T, floor: EigenFloor<T>) -> Result<SymMatrix<T>> {
    if !p.is_finite() {
        return Err(Error::invalid("normalized φ_p gradient needs a finite p"));
    }
    let (weights, _) = normalized_phi_p_weights(spec.eigenvalues(), p, floor)?;
    Ok(spec.synthesize(&weights))
}

/// Eigenvalues of `M^{p−1}/tr(M^p)` plus the trace `tr(M^p)`.
pub(crate) fn normalized_phi_p_weights<T: Real>(eigs: &[T], p: T, floor: EigenFloor<T>) -> Result<(Vec<T>, T)> {
    let q = p - T::one();
    let lam = if q >= T::zero() && q.fract() == T::zero() {
        eigs.to_vec()
    } else {
        floor.apply(eigs)?
    };
    let trace = if p == T::zero() {
        T::from_usize_lossy(eigs.len())
    } else {
        lam.iter().map(|&l| l.powf(p)).sum()
    };
    let weights = lam
        .iter()
        .map(|&l| {
            if q.fract() == T::zero() {
                l.powi(q.to_i32().unwrap_or(0)) / trace
            } else {
                l.powf(q) / trace
            }
        })
        .collect();
    Ok((weights, trace))
}
