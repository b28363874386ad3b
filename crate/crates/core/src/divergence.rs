//! Closed-form divergences between Gaussian summaries `(mean, covariance)`.
//!
//! Two routes compute the same quantities:
//!
//! * the free functions ([`kl_symmetrized`], [`jb_log_simplicial`], …)
//!   follow the matrix formulas directly, with gradients built by Horner
//!   schemes and inverses by spectral powers;
//! * [`PairSpectra`] caches the eigendecompositions of a pair once and then
//!   evaluates any family and parameter from the spectra. The resampling
//!   pipeline uses it to sweep whole parameter grids per pair.

use std::cell::OnceCell;

use serde::{Deserialize, Serialize};

use crate::criteria::{
    grad_phi_p_normalized, grad_simplicial_phi, leave_one_out_elementary, log_elementary_all, log_phi_p,
    log_phi_p_finite, log_simplicial_phi, normalized_phi_p_weights, normalized_simplicial_gradient_weights,
    simplicial_phi, CriterionK,
};
use crate::empirical::unbiased_phi_k_factor;
use crate::error::{Argument, Error, Result};
use crate::matrix::dot;
use crate::scalar::Real;
use crate::spectral::{
    fractional_power, numerical_rank, rank_tolerance, symmetric_eigen, symmetric_eigenvalues, EigenFloor, Spectrum,
    SymMatrix,
};

/// Mean vector and covariance matrix of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary<T> {
    mean: Vec<T>,
    cov: SymMatrix<T>,
}

impl<T: Real> GaussianSummary<T> {
    /// Validates dimensions, finiteness and numerical positive semidefiniteness.
    pub fn new(mean: Vec<T>, cov: SymMatrix<T>) -> Result<Self> {
        let g = Self::from_parts(mean, cov)?;
        let eigs = symmetric_eigenvalues(&g.cov)?;
        let tol = rank_tolerance(&eigs);
        if let Some(&min) = eigs.last() {
            if min < -tol {
                return Err(Error::NotPsd {
                    eigenvalue: min.as_f64(),
                    tolerance: tol.as_f64(),
                });
            }
        }
        Ok(g)
    }

    /// Like [`Self::new`] without the eigenvalue check, for covariances that
    /// are PSD by construction.
    pub(crate) fn from_parts(mean: Vec<T>, cov: SymMatrix<T>) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: cov.dim(),
                found: mean.len(),
            });
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { mean, cov })
    }

    pub fn standard(d: usize) -> Self {
        Self {
            mean: vec![T::zero(); d],
            cov: SymMatrix::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn cov(&self) -> &SymMatrix<T> {
        &self.cov
    }
}

/// Divergence family without its parameter; used for selection grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Kl,
    Js,
    Bhattacharyya,
    #[serde(rename = "logphi-p-jb")]
    LogPhiPJb,
    #[serde(rename = "logphi-p-br")]
    LogPhiPBr,
    #[serde(rename = "logsimplicial-jb")]
    LogSimplicialJb,
    #[serde(rename = "logsimplicial-br")]
    LogSimplicialBr,
    Energy,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Kl,
        Family::Js,
        Family::Bhattacharyya,
        Family::LogPhiPJb,
        Family::LogPhiPBr,
        Family::LogSimplicialJb,
        Family::LogSimplicialBr,
        Family::Energy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Kl => "kl",
            Family::Js => "js",
            Family::Bhattacharyya => "bhattacharyya",
            Family::LogPhiPJb => "logphi-p-jb",
            Family::LogPhiPBr => "logphi-p-br",
            Family::LogSimplicialJb => "logsimplicial-jb",
            Family::LogSimplicialBr => "logsimplicial-br",
            Family::Energy => "energy",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Name of the parameter, if the family has one.
    pub fn parameter_name(self) -> Option<&'static str> {
        match self {
            Family::LogPhiPJb | Family::LogPhiPBr => Some("p"),
            Family::LogSimplicialJb | Family::LogSimplicialBr => Some("k"),
            Family::Energy => Some("delta"),
            _ => None,
        }
    }

    /// Attaches a parameter value. `k` must be a positive integer.
    pub fn with_param(self, value: Option<f64>) -> Result<DistanceSpec> {
        let need = |v: Option<f64>| {
            v.ok_or_else(|| {
                Error::invalid(format!(
                    "family `{}` needs parameter {}",
                    self.name(),
                    self.parameter_name().unwrap_or("?")
                ))
            })
        };
        let as_k = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(format!("k = {v} is not a positive integer")))
            }
        };
        Ok(match self {
            Family::Kl => DistanceSpec::Kl,
            Family::Js => DistanceSpec::Js,
            Family::Bhattacharyya => DistanceSpec::Bhattacharyya,
            Family::LogPhiPJb => DistanceSpec::LogPhiPJb { p: need(value)? },
            Family::LogPhiPBr => DistanceSpec::LogPhiPBr { p: need(value)? },
            Family::LogSimplicialJb => DistanceSpec::LogSimplicialJb { k: as_k(need(value)?)? },
            Family::LogSimplicialBr => DistanceSpec::LogSimplicialBr { k: as_k(need(value)?)? },
            Family::Energy => DistanceSpec::Energy { delta: need(value)? },
        })
    }
}

/// A divergence family together with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DistanceSpec {
    Kl,
    Js,
    Bhattacharyya,
    #[serde(rename = "logphi-p-jb")]
    LogPhiPJb {
        p: f64,
    },
    #[serde(rename = "logphi-p-br")]
    LogPhiPBr {
        p: f64,
    },
    #[serde(rename = "logsimplicial-jb")]
    LogSimplicialJb {
        k: usize,
    },
    #[serde(rename = "logsimplicial-br")]
    LogSimplicialBr {
        k: usize,
    },
    Energy {
        delta: f64,
    },
}

impl DistanceSpec {
    pub fn family(&self) -> Family {
        match self {
            DistanceSpec::Kl => Family::Kl,
            DistanceSpec::Js => Family::Js,
            DistanceSpec::Bhattacharyya => Family::Bhattacharyya,
            DistanceSpec::LogPhiPJb { .. } => Family::LogPhiPJb,
            DistanceSpec::LogPhiPBr { .. } => Family::LogPhiPBr,
            DistanceSpec::LogSimplicialJb { .. } => Family::LogSimplicialJb,
            DistanceSpec::LogSimplicialBr { .. } => Family::LogSimplicialBr,
            DistanceSpec::Energy { .. } => Family::Energy,
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            DistanceSpec::LogPhiPJb { p } | DistanceSpec::LogPhiPBr { p } => Some(p),
            DistanceSpec::LogSimplicialJb { k } | DistanceSpec::LogSimplicialBr { k } => Some(k as f64),
            DistanceSpec::Energy { delta } => Some(delta),
            _ => None,
        }
    }

    /// Short human-readable label, e.g. `logsimplicial-jb(k=3)`.
    pub fn label(&self) -> String {
        match (self.family().parameter_name(), self.param()) {
            (Some(n), Some(v)) => format!("{}({n}={v})", self.family().name()),
            _ => self.family().name().to_string(),
        }
    }

    /// Checks parameter constraints for ambient dimension `d`.
    ///
    /// `p` must lie in `[0, 1)` unless `allow_negative_p` is set, in which
    /// case any `p < 1` is accepted. `k = 1` is accepted with a one-time warning:
    /// it does not give a strictly concave criterion.
    pub fn validate(&self, d: usize, allow_negative_p: bool) -> Result<()> {
        match *self {
            DistanceSpec::LogPhiPJb { p } | DistanceSpec::LogPhiPBr { p } => {
                let lower_ok = allow_negative_p || p >= 0.0;
                if !(p.is_finite() && lower_ok && p < 1.0) {
                    return Err(Error::invalid(if allow_negative_p {
                        format!("p = {p} must be finite and < 1")
                    } else {
                        format!("p = {p} outside [0, 1)")
                    }));
                }
            }
            DistanceSpec::LogSimplicialJb { k } | DistanceSpec::LogSimplicialBr { k } => {
                CriterionK::new(k, d)?;
                if k == 1 {
                    static WARNED: std::sync::Once = std::sync::Once::new();
                    WARNED.call_once(|| log::warn!("k = 1 gives a positively homogeneous trace criterion; covariances differing only by scale may be hard to separate"));
                }
            }
            DistanceSpec::Energy { delta } => {
                if !(delta > 0.0 && delta <= 2.0) {
                    return Err(Error::BadExponent(delta));
                }
            }
            DistanceSpec::Kl | DistanceSpec::Js | DistanceSpec::Bhattacharyya => {}
        }
        Ok(())
    }
}

/// How eigenvalues near zero are handled by negative or fractional powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FloorChoice {
    #[default]
    Reject,
    /// Clamp at `1e-12 · max(λ_max, 1)`.
    Clamp,
}

impl FloorChoice {
    fn resolve<T: Real>(self, spec: &Spectrum<T>) -> EigenFloor<T> {
        match self {
            FloorChoice::Reject => EigenFloor::Reject,
            FloorChoice::Clamp => EigenFloor::default_clamp(spec),
        }
    }

    fn resolve_eigs<T: Real>(self, eigs: &[T]) -> EigenFloor<T> {
        match self {
            FloorChoice::Reject => EigenFloor::Reject,
            FloorChoice::Clamp => {
                let max = eigs.first().copied().unwrap_or_else(T::zero);
                EigenFloor::Clamp(T::lit(1e-12) * max.max(T::one()))
            }
        }
    }
}

/// Options for [`evaluate_with`] and [`PairSpectra::evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalOptions {
    pub allow_negative_p: bool,
    pub floor: FloorChoice,
    /// Sample sizes `(n, m)` behind the two summaries. When set, the
    /// log-simplicial Burbea–Rao terms of the marginals use the unbiased
    /// `Φ_k` estimator instead of the plug-in value.
    pub unbiased_simplicial: Option<(usize, usize)>,
}

fn round_off_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(64.0))
}

/// Clamps round-off negatives to zero; `scale` is the magnitude of the
/// largest term entering the difference.
fn clamp_nonneg<T: Real>(value: T, scale: T) -> Result<T> {
    if value.is_nan() {
        return Err(Error::NumericalInconsistency {
            value: f64::NAN,
            tolerance: 0.0,
        });
    }
    if value >= T::zero() {
        return Ok(value);
    }
    let tol = round_off_tolerance::<T>() * (T::one() + scale.abs());
    if value >= -tol {
        Ok(T::zero())
    } else {
        Err(Error::NumericalInconsistency {
            value: value.as_f64(),
            tolerance: tol.as_f64(),
        })
    }
}

fn check_pair<T: Real>(g1: &GaussianSummary<T>, g2: &GaussianSummary<T>) -> Result<()> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            found: g2.dim(),
        });
    }
    Ok(())
}

fn mean_gap<T: Real>(g1: &GaussianSummary<T>, g2: &GaussianSummary<T>) -> Vec<T> {
    g2.mean.iter().zip(&g1.mean).map(|(&b, &a)| b - a).collect()
}

fn require_pd<T: Real>(spec: &Spectrum<T>, argument: Argument) -> Result<()> {
    if spec.numerical_rank() < spec.dim() {
        return Err(Error::SingularCovariance {
            argument,
            eigenvalue: spec.min_eigenvalue().as_f64(),
        });
    }
    Ok(())
}

fn require_pd_eigs<T: Real>(eigs: &[T], argument: Argument) -> Result<()> {
    if numerical_rank(eigs) < eigs.len() {
        return Err(Error::SingularCovariance {
            argument,
            eigenvalue: eigs.last().map_or(0.0, |l| l.as_f64()),
        });
    }
    Ok(())
}

/// Re-labels argument-specific errors raised by a helper that did not know
/// which argument it was working on.
fn tag(err: Error, argument: Argument) -> Error {
    match err {
        Error::NegativeEigenvalueBelowFloor { eigenvalue, .. } => Error::SingularCovariance { argument, eigenvalue },
        Error::SingularCovariance { eigenvalue, .. } => Error::SingularCovariance { argument, eigenvalue },
        Error::RankDeficient { k, rank, .. } => Error::RankDeficient { k, rank, argument },
        other => other,
    }
}

fn inverse<T: Real>(spec: &Spectrum<T>, argument: Argument) -> Result<SymMatrix<T>> {
    require_pd(spec, argument)?;
    fractional_power(spec, -T::one(), EigenFloor::Reject).map_err(|e| tag(e, argument))
}

fn log_det<T: Real>(eigs: &[T]) -> T {
    eigs.iter().map(|&l| l.ln()).sum()
}

/// Symmetrized Kullback–Leibler divergence
/// `¼[tr(Σ₁⁻¹Σ₂) + tr(Σ₂⁻¹Σ₁)] + ¼ δᵀ(Σ₁⁻¹ + Σ₂⁻¹)δ − d/2`.
pub fn kl_symmetrized<T: Real>(g1: &GaussianSummary<T>, g2: &GaussianSummary<T>) -> Result<T> {
    check_pair(g1, g2)?;
    let s1 = symmetric_eigen(&g1.cov)?;
    let s2 = symmetric_eigen(&g2.cov)?;
    let i1 = inverse(&s1, Argument::First)?;
    let i2 = inverse(&s2, Argument::Second)?;
    let delta = mean_gap(g1, g2);
    let quarter = T::lit(0.25);
    let t = i1.matrix().trace_of_product(g2.cov.matrix()) + i2.matrix().trace_of_product(g1.cov.matrix());
    let q = i1.add(&i2).quadratic_form(&delta);
    let half_d = T::from_usize_lossy(g1.dim()) * T::lit(0.5);
    clamp_nonneg(quarter * (t + q) - half_d, half_d)
}

struct CommonTerms<T> {
    log_det_ratio: T,
    mahalanobis: T,
}

/// `½ log[det((Σ₁+Σ₂)/2)/√(det Σ₁ det Σ₂)]` and `δᵀ(Σ₁+Σ₂)⁻¹δ`.
fn js_b_terms<T: Real>(g1: &GaussianSummary<T>, g2: &GaussianSummary<T>) -> Result<CommonTerms<T>> {
    check_pair(g1, g2)?;
    let e1 = symmetric_eigenvalues(&g1.cov)?;
    let e2 = symmetric_eigenvalues(&g2.cov)?;
    require_pd_eigs(&e1, Argument::First)?;
    require_pd_eigs(&e2, Argument::Second)?;
    let sum = g1.cov.add(&g2.cov);
    let ss = symmetric_eigen(&sum)?;
    let inv = inverse(&ss, Argument::Mixture)?;
    let half = T::lit(0.5);
    let log_det_half_sum = log_det(ss.eigenvalues()) - T::from_usize_lossy(g1.dim()) * T::LN_2();
    let log_det_ratio = half * (log_det_half_sum - half * (log_det(&e1) + log_det(&e2)));
    let delta = mean_gap(g1, g2);
    Ok(CommonTerms {
        log_det_ratio,
        mahalanobis: inv.quadratic_form(&delta),
    })
}

/// Jensen–Shannon divergence in its Gaussian moment form
/// `½ log[det((Σ₁+Σ₂)/2)/√(det Σ₁ det Σ₂)] + ½ log[1 + ½ δᵀ(Σ₁+Σ₂)⁻¹δ]`.
pub fn jensen_shannon<T: Real>(g1: &GaussianSummary<T>, g2: &GaussianSummary<T>) -> Result<T> {
    let c = js_b_terms(g1, g2)?;
    let half = T::lit(0.5);
    let v = c.log_det_ratio + half * (half * c.mahalanobis).ln_1p();
    clamp_nonneg(v, c.log_det_ratio)
}

/// Bhattacharyya distance
/// `½ log[det((Σ₁+Σ₂)/2)/√(det Σ₁ det Σ₂)] + ¼ δᵀ(Σ₁+Σ₂)⁻¹δ`.
pub fn bhattacharyya<T: Real>(g1: &GaussianSummary<T>, g2: &GaussianSummary<T>) -> Result<T> {
    let c = js_b_terms(g1, g2)?;
    let v = c.log_det_ratio + T::lit(0.25) * c.mahalanobis;
    clamp_nonneg(v, c.log_det_ratio)
}

/// Jeffreys–Bregman divergence of `log φ_p`:
/// `½[tr(Σ₁^{p−1}Σ₂)/tr(Σ₁^p) + tr(Σ₂^{p−1}Σ₁)/tr(Σ₂^p)]
///  + ½ δᵀ(Σ₁^{p−1}/tr(Σ₁^p) + Σ₂^{p−1}/tr(Σ₂^p))δ − 1`, with `tr(M⁰) = d`.
pub fn jb_log_phi_p<T: Real>(g1: &GaussianSummary<T>, g2: &GaussianSummary<T>, p: T, floor: FloorChoice) -> Result<T> {
    check_pair(g1, g2)?;
    if !(p.is_finite() && p < T::one()) {
        return Err(Error::invalid(format!("p = {p} must be finite and < 1")));
    }
    let s1 = symmetric_eigen(&g1.cov)?;
    let s2 = symmetric_eigen(&g2.cov)?;
    let n1 = grad_phi_p_normalized(&s1, p, floor.resolve(&s1)).map_err(|e| tag(e, Argument::First))?;
    let n2 = grad_phi_p_normalized(&s2, p, floor.resolve(&s2)).map_err(|e| tag(e, Argument::Second))?;
    jb_from_normalized_gradients(g1, g2, &n1, &n2, T::one())
}

/// `½[tr(N₁Σ₂) + tr(N₂Σ₁) + δᵀ(N₁+N₂)δ] − c` for normalized gradients `N`.
fn jb_from_normalized_gradients<T: Real>(
    g1: &GaussianSummary<T>,
    g2: &GaussianSummary<T>,
    n1: &SymMatrix<T>,
    n2: &SymMatrix<T>,
    constant: T,
) -> Result<T> {
    let delta = mean_gap(g1, g2);
    let half = T::lit(0.5);
    let t = n1.matrix().trace_of_product(g2.cov.matrix()) + n2.matrix().trace_of_product(g1.cov.matrix());
    let q = n1.add(n2).quadratic_form(&delta);
    clamp_nonneg(half * (t + q) - constant, constant)
}

fn simplicial_normalized_gradient<T: Real>(
    cov: &SymMatrix<T>,
    k: CriterionK,
    argument: Argument,
) -> Result<SymMatrix<T>> {
    let s = symmetric_eigen(cov)?;
    let phi = simplicial_phi(&s, k)?;
    if phi <= T::zero() {
        return Err(Error::RankDeficient {
            k: k.get(),
            rank: s.numerical_rank(),
            argument,
        });
    }
    // Spectral synthesis of e_{k−1}(λ∖λ_i)/e_k(λ): the Horner form in M
    // cancels badly for large k on spread-out spectra.
    let loo = leave_one_out_elementary(s.eigenvalues());
    Ok(s.synthesize(&normalized_simplicial_gradient_weights(s.eigenvalues(), &loo, k.get())))
}

/// Jeffreys–Bregman divergence of `log Φ_k` (the `k`-th order simplicial
/// distance): normalized gradients `∇Φ_k/Φ_k` and the constant `k`.
pub fn jb_log_simplicial<T: Real>(g1: &GaussianSummary<T>, g2: &GaussianSummary<T>, k: usize) -> Result<T> {
    check_pair(g1, g2)?;
    let kk = CriterionK::new(k, g1.dim())?;
    let n1 = simplicial_normalized_gradient(&g1.cov, kk, Argument::First)?;
    let n2 = simplicial_normalized_gradient(&g2.cov, kk, Argument::Second)?;
    jb_from_normalized_gradients(g1, g2, &n1, &n2, T::from_usize_lossy(k))
}

/// A matrix criterion, optionally differentiable.
pub trait Criterion<T: Real> {
    fn value(&self, m: &SymMatrix<T>) -> Result<T>;

    fn gradient(&self, m: &SymMatrix<T>) -> Result<SymMatrix<T>>;
}

/// `log φ_p`.
#[derive(Debug, Clone, Copy)]
pub struct LogPhiP<T> {
    pub p: T,
    pub floor: FloorChoice,
}

impl<T: Real> Criterion<T> for LogPhiP<T> {
    fn value(&self, m: &SymMatrix<T>) -> Result<T> {
        let s = symmetric_eigen(m)?;
        let v = log_phi_p(&s, self.p)?;
        if v == T::neg_infinity() {
            return Err(Error::SingularCovariance {
                argument: Argument::First,
                eigenvalue: s.min_eigenvalue().as_f64(),
            });
        }
        Ok(v)
    }

    fn gradient(&self, m: &SymMatrix<T>) -> Result<SymMatrix<T>> {
        let s = symmetric_eigen(m)?;
        grad_phi_p_normalized(&s, self.p, self.floor.resolve(&s))
    }
}

/// `log Φ_k`.
#[derive(Debug, Clone, Copy)]
pub struct LogSimplicial {
    pub k: usize,
}

impl<T: Real> Criterion<T> for LogSimplicial {
    fn value(&self, m: &SymMatrix<T>) -> Result<T> {
        let s = symmetric_eigen(m)?;
        let v = log_simplicial_phi(&s, CriterionK::new(self.k, m.dim())?)?;
        if v == T::neg_infinity() {
            return Err(Error::RankDeficient {
                k: self.k,
                rank: s.numerical_rank(),
                argument: Argument::First,
            });
        }
        Ok(v)
    }

    fn gradient(&self, m: &SymMatrix<T>) -> Result<SymMatrix<T>> {
        simplicial_normalized_gradient(m, CriterionK::new(self.k, m.dim())?, Argument::First)
    }
}

/// `Φ_k^{1/k}`, positively homogeneous.
#[derive(Debug, Clone, Copy)]
pub struct SimplicialRoot {
    pub k: usize,
}

impl<T: Real> Criterion<T> for SimplicialRoot {
    fn value(&self, m: &SymMatrix<T>) -> Result<T> {
        let s = symmetric_eigen(m)?;
        let phi = simplicial_phi(&s, CriterionK::new(self.k, m.dim())?)?;
        Ok(phi.powf(T::one() / T::from_usize_lossy(self.k)))
    }

    fn gradient(&self, m: &SymMatrix<T>) -> Result<SymMatrix<T>> {
        let kk = CriterionK::new(self.k, m.dim())?;
        let s = symmetric_eigen(m)?;
        let phi = simplicial_phi(&s, kk)?;
        let kf = T::from_usize_lossy(self.k);
        let factor = phi.powf(T::one() / kf - T::one()) / kf;
        Ok(grad_simplicial_phi(m, &s, kk)?.scale(factor))
    }
}

/// Burbea–Rao divergence of `criterion`:
/// `Φ[(Σ₁+Σ₂)/2 + δδᵀ/4] − [Φ(Σ₁) + Φ(Σ₂)]/2`.
pub fn br_divergence<T: Real, C: Criterion<T> + ?Sized>(
    g1: &GaussianSummary<T>,
    g2: &GaussianSummary<T>,
    criterion: &C,
) -> Result<T> {
    check_pair(g1, g2)?;
    let mix = mixture_covariance(g1, g2);
    let vm = criterion.value(&mix).map_err(|e| tag(e, Argument::Mixture))?;
    let v1 = criterion.value(&g1.cov).map_err(|e| tag(e, Argument::First))?;
    let v2 = criterion.value(&g2.cov).map_err(|e| tag(e, Argument::Second))?;
    let half = T::lit(0.5);
    clamp_nonneg(vm - half * (v1 + v2), vm.abs().max(v1.abs()).max(v2.abs()))
}

/// Covariance of the equal-weight mixture: `(Σ₁+Σ₂)/2 + δδᵀ/4`.
pub fn mixture_covariance<T: Real>(g1: &GaussianSummary<T>, g2: &GaussianSummary<T>) -> SymMatrix<T> {
    let delta = mean_gap(g1, g2);
    g1.cov.add(&g2.cov).scale(T::lit(0.5)).add_outer(&delta, T::lit(0.25))
}

/// Jeffreys–Bregman divergence from the gradient of `criterion`:
/// `½[tr{(∇Φ(Σ₁) − ∇Φ(Σ₂))(Σ₂ − Σ₁)} + δᵀ(∇Φ(Σ₁) + ∇Φ(Σ₂))δ]`.
pub fn jb_generic<T: Real, C: Criterion<T> + ?Sized>(
    g1: &GaussianSummary<T>,
    g2: &GaussianSummary<T>,
    criterion: &C,
) -> Result<T> {
    check_pair(g1, g2)?;
    let d1 = criterion.gradient(&g1.cov).map_err(|e| tag(e, Argument::First))?;
    let d2 = criterion.gradient(&g2.cov).map_err(|e| tag(e, Argument::Second))?;
    let delta = mean_gap(g1, g2);
    let t = d1.sub(&d2).matrix().trace_of_product(g2.cov.sub(&g1.cov).matrix());
    let q = d1.add(&d2).quadratic_form(&delta);
    let half = T::lit(0.5);
    let scale =
        d1.matrix().trace_of_product(g2.cov.matrix()).abs() + d2.matrix().trace_of_product(g1.cov.matrix()).abs();
    clamp_nonneg(half * (t + q), scale)
}

/// Maps `(μ, ζ)` to `(N(0, I), ζ[μ])` where `ζ[μ]` has mean
/// `Σ_μ^{−1/2}(a_ζ − a_μ)` and covariance `Σ_μ^{−1/2} Σ_ζ Σ_μ^{−1/2}`.
pub fn standardize_pair<T: Real>(
    g1: &GaussianSummary<T>,
    g2: &GaussianSummary<T>,
) -> Result<(GaussianSummary<T>, GaussianSummary<T>)> {
    check_pair(g1, g2)?;
    let s1 = symmetric_eigen(&g1.cov)?;
    require_pd(&s1, Argument::First)?;
    let root = fractional_power(&s1, T::lit(-0.5), EigenFloor::Reject).map_err(|e| tag(e, Argument::First))?;
    let mean = root.matrix().matvec(&mean_gap(g1, g2));
    let cov = g2.cov.congruence(root.matrix());
    Ok((
        GaussianSummary::standard(g1.dim()),
        GaussianSummary::from_parts(mean, cov)?,
    ))
}

/// Evaluates `spec` with default options (negative `p` rejected, eigenvalue
/// floor `Reject`). Energy distances need samples and are refused here.
pub fn evaluate<T: Real>(spec: &DistanceSpec, g1: &GaussianSummary<T>, g2: &GaussianSummary<T>) -> Result<T> {
    evaluate_with(spec, g1, g2, &EvalOptions::default())
}

pub fn evaluate_with<T: Real>(
    spec: &DistanceSpec,
    g1: &GaussianSummary<T>,
    g2: &GaussianSummary<T>,
    opts: &EvalOptions,
) -> Result<T> {
    check_pair(g1, g2)?;
    spec.validate(g1.dim(), opts.allow_negative_p)?;
    match *spec {
        DistanceSpec::Kl => kl_symmetrized(g1, g2),
        DistanceSpec::Js => jensen_shannon(g1, g2),
        DistanceSpec::Bhattacharyya => bhattacharyya(g1, g2),
        DistanceSpec::LogPhiPJb { p } => jb_log_phi_p(g1, g2, T::lit(p), opts.floor),
        DistanceSpec::LogPhiPBr { p } => br_divergence(
            g1,
            g2,
            &LogPhiP {
                p: T::lit(p),
                floor: opts.floor,
            },
        ),
        DistanceSpec::LogSimplicialJb { k } => jb_log_simplicial(g1, g2, k),
        DistanceSpec::LogSimplicialBr { k } => {
            let v = br_divergence(g1, g2, &LogSimplicial { k })?;
            match opts.unbiased_simplicial {
                Some((n, m)) => Ok(v - simplicial_correction::<T>(n, m, k)?),
                None => Ok(v),
            }
        }
        DistanceSpec::Energy { .. } => Err(Error::UnsupportedForSummaries(spec.family().name().into())),
    }
}

/// `½[log c(n,k) + log c(m,k)]` for the unbiased Φ_k factors `c`.
fn simplicial_correction<T: Real>(n: usize, m: usize, k: usize) -> Result<T> {
    let cn: T = unbiased_phi_k_factor(n, k)?;
    let cm: T = unbiased_phi_k_factor(m, k)?;
    Ok(T::lit(0.5) * (cn.ln() + cm.ln()))
}

/// Eigendecompositions of a pair of summaries, computed on demand and
/// reused across families and parameters.
pub struct PairSpectra<'a, T: Real> {
    g1: &'a GaussianSummary<T>,
    g2: &'a GaussianSummary<T>,
    delta: Vec<T>,
    full: [OnceCell<Result<Projected<T>>>; 2],
    values: [OnceCell<Result<Vec<T>>>; 2],
    mixture: OnceCell<Result<Vec<T>>>,
    sum: OnceCell<Result<Spectrum<T>>>,
    loo: [OnceCell<Vec<Vec<T>>>; 2],
}

/// A covariance spectrum projected on the other covariance and the mean gap.
struct Projected<T> {
    spectrum: Spectrum<T>,
    /// `u_iᵀ Σ_other u_i`.
    cross: Vec<T>,
    /// `(u_iᵀ δ)²`.
    gap: Vec<T>,
}

impl<'a, T: Real> PairSpectra<'a, T> {
    pub fn new(g1: &'a GaussianSummary<T>, g2: &'a GaussianSummary<T>) -> Result<Self> {
        check_pair(g1, g2)?;
        Ok(Self {
            g1,
            g2,
            delta: mean_gap(g1, g2),
            full: [OnceCell::new(), OnceCell::new()],
            values: [OnceCell::new(), OnceCell::new()],
            mixture: OnceCell::new(),
            sum: OnceCell::new(),
            loo: [OnceCell::new(), OnceCell::new()],
        })
    }

    fn covs(&self, i: usize) -> (&SymMatrix<T>, &SymMatrix<T>) {
        if i == 0 {
            (&self.g1.cov, &self.g2.cov)
        } else {
            (&self.g2.cov, &self.g1.cov)
        }
    }

    fn projected(&self, i: usize) -> Result<&Projected<T>> {
        self.full[i]
            .get_or_init(|| {
                let (own, other) = self.covs(i);
                let spectrum = symmetric_eigen(own)?;
                let d = own.dim();
                let u = spectrum.eigenvectors();
                let mut cross = Vec::with_capacity(d);
                let mut gap = Vec::with_capacity(d);
                for l in 0..d {
                    let col = u.column(l);
                    cross.push(other.quadratic_form(&col));
                    let g = dot(&col, &self.delta);
                    gap.push(g * g);
                }
                Ok(Projected { spectrum, cross, gap })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn eigenvalues(&self, i: usize) -> Result<&[T]> {
        if let Some(Ok(p)) = self.full[i].get() {
            return Ok(p.spectrum.eigenvalues());
        }
        self.values[i]
            .get_or_init(|| symmetric_eigenvalues(self.covs(i).0))
            .as_deref()
            .map_err(Clone::clone)
    }

    fn mixture_eigenvalues(&self) -> Result<&[T]> {
        self.mixture
            .get_or_init(|| symmetric_eigenvalues(&mixture_covariance(self.g1, self.g2)))
            .as_deref()
            .map_err(Clone::clone)
    }

    fn sum_spectrum(&self) -> Result<&Spectrum<T>> {
        self.sum
            .get_or_init(|| symmetric_eigen(&self.g1.cov.add(&self.g2.cov)))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn leave_one_out(&self, i: usize) -> Result<&[Vec<T>]> {
        let p = self.projected(i)?;
        Ok(self.loo[i].get_or_init(|| leave_one_out_elementary(p.spectrum.eigenvalues())))
    }

    fn argument(i: usize) -> Argument {
        if i == 0 {
            Argument::First
        } else {
            Argument::Second
        }
    }

    pub fn evaluate(&self, spec: &DistanceSpec, opts: &EvalOptions) -> Result<T> {
        let d = self.g1.dim();
        spec.validate(d, opts.allow_negative_p)?;
        let half = T::lit(0.5);
        match *spec {
            DistanceSpec::Kl => {
                // d/4 · JB(log φ_0) + … reduces to weights 1/λ.
                let mut acc = T::zero();
                for i in 0..2 {
                    let p = self.projected(i)?;
                    require_pd(&p.spectrum, Self::argument(i))?;
                    for ((&l, &c), &g) in p.spectrum.eigenvalues().iter().zip(&p.cross).zip(&p.gap) {
                        acc += (c + g) / l;
                    }
                }
                let half_d = T::from_usize_lossy(d) * half;
                clamp_nonneg(T::lit(0.25) * acc - half_d, half_d)
            }
            DistanceSpec::Js | DistanceSpec::Bhattacharyya => {
                let e1 = self.eigenvalues(0)?;
                require_pd_eigs(e1, Argument::First)?;
                let ld1 = log_det(e1);
                let e2 = self.eigenvalues(1)?;
                require_pd_eigs(e2, Argument::Second)?;
                let ld2 = log_det(e2);
                let ss = self.sum_spectrum()?;
                require_pd(ss, Argument::Mixture)?;
                let log_det_half_sum = log_det(ss.eigenvalues()) - T::from_usize_lossy(d) * T::LN_2();
                let ratio = half * (log_det_half_sum - half * (ld1 + ld2));
                let u = ss.eigenvectors();
                let mut maha = T::zero();
                for (l, &lam) in ss.eigenvalues().iter().enumerate() {
                    let g = dot(&u.column(l), &self.delta);
                    maha += g * g / lam;
                }
                let v = if matches!(spec, DistanceSpec::Js) {
                    ratio + half * (half * maha).ln_1p()
                } else {
                    ratio + T::lit(0.25) * maha
                };
                clamp_nonneg(v, ratio)
            }
            DistanceSpec::LogPhiPJb { p } => {
                let p = T::lit(p);
                let mut acc = T::zero();
                for i in 0..2 {
                    let pr = self.projected(i)?;
                    let eigs = pr.spectrum.eigenvalues();
                    let (w, _) = normalized_phi_p_weights(eigs, p, opts.floor.resolve_eigs(eigs))
                        .map_err(|e| tag(e, Self::argument(i)))?;
                    for ((&wi, &c), &g) in w.iter().zip(&pr.cross).zip(&pr.gap) {
                        acc += wi * (c + g);
                    }
                }
                clamp_nonneg(half * acc - T::one(), T::one())
            }
            DistanceSpec::LogSimplicialJb { k } => {
                let mut acc = T::zero();
                for i in 0..2 {
                    let pr = self.projected(i)?;
                    let eigs = pr.spectrum.eigenvalues();
                    let rank = numerical_rank(eigs);
                    if rank < k {
                        return Err(Error::RankDeficient {
                            k,
                            rank,
                            argument: Self::argument(i),
                        });
                    }
                    let w = normalized_simplicial_gradient_weights(eigs, self.leave_one_out(i)?, k);
                    for ((&wi, &c), &g) in w.iter().zip(&pr.cross).zip(&pr.gap) {
                        acc += wi * (c + g);
                    }
                }
                let kf = T::from_usize_lossy(k);
                clamp_nonneg(half * acc - kf, kf)
            }
            DistanceSpec::LogPhiPBr { p } => {
                let p = T::lit(p);
                let log_phi = |eigs: &[T], arg: Argument| -> Result<T> {
                    if p <= T::zero() {
                        require_pd_eigs(eigs, arg)?;
                    }
                    Ok(log_phi_p_finite(eigs, p))
                };
                let vm = log_phi(self.mixture_eigenvalues()?, Argument::Mixture)?;
                let v1 = log_phi(self.eigenvalues(0)?, Argument::First)?;
                let v2 = log_phi(self.eigenvalues(1)?, Argument::Second)?;
                clamp_nonneg(vm - half * (v1 + v2), vm.abs().max(v1.abs()).max(v2.abs()))
            }
            DistanceSpec::LogSimplicialBr { k } => {
                let log_e = |eigs: &[T], arg: Argument| -> Result<T> {
                    let rank = numerical_rank(eigs);
                    if rank < k {
                        return Err(Error::RankDeficient { k, rank, argument: arg });
                    }
                    Ok(log_elementary_all(eigs)[k])
                };
                let vm = log_e(self.mixture_eigenvalues()?, Argument::Mixture)?;
                let v1 = log_e(self.eigenvalues(0)?, Argument::First)?;
                let v2 = log_e(self.eigenvalues(1)?, Argument::Second)?;
                let v = clamp_nonneg(vm - half * (v1 + v2), vm.abs().max(v1.abs()).max(v2.abs()))?;
                match opts.unbiased_simplicial {
                    Some((n, m)) => Ok(v - simplicial_correction::<T>(n, m, k)?),
                    None => Ok(v),
                }
            }
            DistanceSpec::Energy { .. } => Err(Error::UnsupportedForSummaries(spec.family().name().into())),
        }
    }

    /// All `log e_k` of the three spectra entering the Burbea–Rao simplicial
    /// divergence; evaluating a whole `k` grid costs one recurrence each.
    pub fn log_simplicial_br_all(&self, opts: &EvalOptions) -> Result<Vec<Result<T>>> {
        let lm = log_elementary_all(self.mixture_eigenvalues()?);
        let e1 = self.eigenvalues(0)?;
        let e2 = self.eigenvalues(1)?;
        let (l1, l2) = (log_elementary_all(e1), log_elementary_all(e2));
        let (r1, r2, rm) = (
            numerical_rank(e1),
            numerical_rank(e2),
            numerical_rank(self.mixture_eigenvalues()?),
        );
        let half = T::lit(0.5);
        Ok((1..=e1.len())
            .map(|k| {
                for (rank, argument) in [(rm, Argument::Mixture), (r1, Argument::First), (r2, Argument::Second)] {
                    if rank < k {
                        return Err(Error::RankDeficient { k, rank, argument });
                    }
                }
                let v = clamp_nonneg(
                    lm[k] - half * (l1[k] + l2[k]),
                    lm[k].abs().max(l1[k].abs()).max(l2[k].abs()),
                )?;
                match opts.unbiased_simplicial {
                    Some((n, m)) => Ok(v - simplicial_correction::<T>(n, m, k)?),
                    None => Ok(v),
                }
            })
            .collect())
    }
}
