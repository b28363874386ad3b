//! Resampling two-sample tests built on the divergences: pseudo samples
//! under both hypotheses, ROC curves and AUC, parameter selection,
//! threshold calibration, the test decision and the preset simulations.
//!
//! Everything here works in `f64`. All randomness comes from streams
//! derived from a master seed per pseudo pair, so results are identical for
//! any number of worker threads.

use std::fmt;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{DistanceSpec, EvalOptions, Family, FloorChoice, GaussianSummary, PairSpectra};
use crate::empirical::{energy_distance, sample_moments_of_rows, GaussianSampler, PointSampler, Sample};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, derived_rng};
use crate::spectral::SymMatrix;

/// Largest tolerated fraction of failed distance evaluations.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

/// How pseudo samples are drawn from the observed ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum SamplingScheme {
    /// Subsets of sizes `n − r` and `m − r`.
    WithoutReplacement { r: usize },
    /// Resampling with replacement, sizes `n` and `m`.
    Bootstrap,
}

impl Default for SamplingScheme {
    fn default() -> Self {
        SamplingScheme::WithoutReplacement { r: 5 }
    }
}

impl SamplingScheme {
    /// Sizes of the pseudo samples drawn from samples of sizes `n` and `m`.
    pub fn sizes(&self, n: usize, m: usize) -> Result<(usize, usize)> {
        match *self {
            SamplingScheme::Bootstrap => Ok((n, m)),
            SamplingScheme::WithoutReplacement { r } => {
                if 2 * r >= n.min(m) || n.min(m) - r < 2 {
                    return Err(Error::SchemeInfeasible(format!(
                        "r = {r} needs r < min(n, m)/2 and at least two points left (n = {n}, m = {m})"
                    )));
                }
                Ok((n - r, m - r))
            }
        }
    }
}

/// Which hypothesis a pseudo pair imitates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// Same distribution: both pseudo samples come from the merged pool.
    H0,
    /// Different distributions: each pseudo sample comes from its own sample.
    H1,
}

impl Hypothesis {
    fn lane(self) -> u64 {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// A pseudo pair as row indices into the pool `[X; Y]`
/// (rows `0..n` are `X`, rows `n..n+m` are `Y`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoPair {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl PseudoPair {
    pub fn materialize(&self, pool: &Sample<f64>) -> Result<(Sample<f64>, Sample<f64>)> {
        Ok((pool.select(&self.x)?, pool.select(&self.y)?))
    }
}

fn draw_pair<R: Rng + ?Sized>(n: usize, m: usize, scheme: SamplingScheme, h: Hypothesis, rng: &mut R) -> PseudoPair {
    match (scheme, h) {
        (SamplingScheme::WithoutReplacement { r }, Hypothesis::H1) => PseudoPair {
            x: index::sample(rng, n, n - r).into_vec(),
            y: index::sample(rng, m, m - r).into_iter().map(|i| n + i).collect(),
        },
        (SamplingScheme::WithoutReplacement { r }, Hypothesis::H0) => {
            let mut all = index::sample(rng, n + m, n + m - 2 * r).into_vec();
            let y = all.split_off(n - r);
            PseudoPair { x: all, y }
        }
        (SamplingScheme::Bootstrap, Hypothesis::H1) => PseudoPair {
            x: (0..n).map(|_| rng.random_range(0..n)).collect(),
            y: (0..m).map(|_| n + rng.random_range(0..m)).collect(),
        },
        (SamplingScheme::Bootstrap, Hypothesis::H0) => {
            let mut all: Vec<usize> = (0..n + m).map(|_| rng.random_range(0..n + m)).collect();
            let y = all.split_off(n);
            PseudoPair { x: all, y }
        }
    }
}

/// `count` pseudo pairs for samples of sizes `n` and `m`; pair `i` uses the
/// stream `(seed, tag, hypothesis, i)`.
pub fn pseudo_pair_indices(
    n: usize,
    m: usize,
    scheme: SamplingScheme,
    hypothesis: Hypothesis,
    count: usize,
    seed: u64,
    tag: &str,
) -> Result<Vec<PseudoPair>> {
    scheme.sizes(n, m)?;
    Ok((0..count)
        .map(|i| {
            draw_pair(
                n,
                m,
                scheme,
                hypothesis,
                &mut derived_rng(seed, tag, hypothesis.lane(), i as u64),
            )
        })
        .collect())
}

fn pseudo_pairs(
    x: &Sample<f64>,
    y: &Sample<f64>,
    scheme: SamplingScheme,
    h: Hypothesis,
    count: usize,
    seed: u64,
) -> Result<Vec<(Sample<f64>, Sample<f64>)>> {
    let pool = x.concat(y)?;
    pseudo_pair_indices(x.n(), y.n(), scheme, h, count, seed, PAIR_TAG)?
        .iter()
        .map(|p| p.materialize(&pool))
        .collect()
}

const PAIR_TAG: &str = "pseudo-pair";

/// Pseudo pairs imitating different distributions: each pseudo sample is
/// drawn within its own sample.
pub fn pseudo_pairs_h1(
    x: &Sample<f64>,
    y: &Sample<f64>,
    scheme: SamplingScheme,
    count: usize,
    seed: u64,
) -> Result<Vec<(Sample<f64>, Sample<f64>)>> {
    pseudo_pairs(x, y, scheme, Hypothesis::H1, count, seed)
}

/// Pseudo pairs imitating identical distributions, drawn from the merged
/// pool. Without replacement, the two pseudo samples of a pair are disjoint.
pub fn pseudo_pairs_h0(
    x: &Sample<f64>,
    y: &Sample<f64>,
    scheme: SamplingScheme,
    count: usize,
    seed: u64,
) -> Result<Vec<(Sample<f64>, Sample<f64>)>> {
    pseudo_pairs(x, y, scheme, Hypothesis::H0, count, seed)
}

/// Options shared by every distance evaluation of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DistanceOptions {
    pub allow_negative_p: bool,
    pub floor: FloorChoice,
    /// Use the unbiased `Φ_k` estimator in log-simplicial Burbea–Rao terms.
    pub unbiased_simplicial: bool,
}

impl DistanceOptions {
    fn eval(&self, n: usize, m: usize) -> EvalOptions {
        EvalOptions {
            allow_negative_p: self.allow_negative_p,
            floor: self.floor,
            unbiased_simplicial: self.unbiased_simplicial.then_some((n, m)),
        }
    }
}

/// Distances for each of `specs` between the pool rows `a` and `b`.
fn distances_by_rows(
    pool: &Sample<f64>,
    a: &[usize],
    b: &[usize],
    specs: &[DistanceSpec],
    opts: &DistanceOptions,
) -> Vec<Result<f64>> {
    let gaussian = specs.iter().any(|s| !matches!(s, DistanceSpec::Energy { .. }));
    let summaries = gaussian.then(|| -> Result<(GaussianSummary<f64>, GaussianSummary<f64>)> {
        Ok((sample_moments_of_rows(pool, a)?, sample_moments_of_rows(pool, b)?))
    });
    let samples = specs
        .iter()
        .any(|s| matches!(s, DistanceSpec::Energy { .. }))
        .then(|| -> Result<(Sample<f64>, Sample<f64>)> { Ok((pool.select(a)?, pool.select(b)?)) });
    let spectra = match &summaries {
        Some(Ok((g1, g2))) => Some(PairSpectra::new(g1, g2)),
        _ => None,
    };
    let eval = opts.eval(a.len(), b.len());
    specs
        .iter()
        .map(|spec| match spec {
            DistanceSpec::Energy { delta } => match samples.as_ref().expect("energy requested") {
                Ok((x, y)) => energy_distance(x, y, *delta),
                Err(e) => Err(e.clone()),
            },
            _ => match (&summaries, &spectra) {
                (Some(Err(e)), _) => Err(e.clone()),
                (_, Some(Err(e))) => Err(e.clone()),
                (_, Some(Ok(ps))) => ps.evaluate(spec, &eval),
                _ => unreachable!("summaries computed for Gaussian families"),
            },
        })
        .collect()
}

/// Distance between two samples; Gaussian families go through the sample
/// moments, the energy family works on the points.
pub fn sample_distance(x: &Sample<f64>, y: &Sample<f64>, spec: &DistanceSpec, opts: &DistanceOptions) -> Result<f64> {
    spec.validate(x.dim(), opts.allow_negative_p)?;
    let pool = x.concat(y)?;
    let a: Vec<usize> = (0..x.n()).collect();
    let b: Vec<usize> = (x.n()..x.n() + y.n()).collect();
    distances_by_rows(&pool, &a, &b, std::slice::from_ref(spec), opts)
        .pop()
        .expect("one spec")
}

/// Empirical ROC curve of scores `d0` (negatives) against `d1` (positives).
///
/// Thresholds are the distinct pooled scores in decreasing order followed
/// by `-∞`; at threshold `τ`, `fpr = #{d0 > τ}/|d0|` and
/// `tpr = #{d1 > τ}/|d1|`. The curve runs from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub thresholds: Vec<f64>,
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    pub auc: f64,
}

impl RocCurve {
    /// Area under the polyline by the trapezoidal rule.
    pub fn trapezoidal_auc(&self) -> f64 {
        self.fpr
            .windows(2)
            .zip(self.tpr.windows(2))
            .map(|(f, t)| (f[1] - f[0]) * (t[1] + t[0]) * 0.5)
            .sum()
    }

    /// CSV with header `threshold,fpr,tpr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for ((t, f), p) in self.thresholds.iter().zip(&self.fpr).zip(&self.tpr) {
            out.push_str(&format!("{},{},{}\n", fmt_threshold(*t), f, p));
        }
        out
    }
}

fn fmt_threshold(t: f64) -> String {
    if t == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{t}")
    }
}

fn check_scores(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Mann–Whitney statistic with ties counted one half.
pub fn auc(d0: &[f64], d1: &[f64]) -> Result<f64> {
    check_scores(d0)?;
    check_scores(d1)?;
    let s0 = sorted(d0);
    let mut score = 0.0;
    for &v in d1 {
        let below = s0.partition_point(|&x| x < v);
        let not_above = s0.partition_point(|&x| x <= v);
        score += below as f64 + 0.5 * (not_above - below) as f64;
    }
    Ok(score / (d0.len() as f64 * d1.len() as f64))
}

pub fn roc(d0: &[f64], d1: &[f64]) -> Result<RocCurve> {
    let area = auc(d0, d1)?;
    let (s0, s1) = (sorted(d0), sorted(d1));
    let mut thresholds: Vec<f64> = s0.iter().chain(&s1).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    thresholds.push(f64::NEG_INFINITY);
    let above = |s: &[f64], t: f64| (s.len() - s.partition_point(|&x| x <= t)) as f64 / s.len() as f64;
    let fpr = thresholds.iter().map(|&t| above(&s0, t)).collect();
    let tpr = thresholds.iter().map(|&t| above(&s1, t)).collect();
    Ok(RocCurve {
        thresholds,
        fpr,
        tpr,
        auc: area,
    })
}

/// Upper empirical quantile: the `⌈(1 − s)N⌉`-th smallest value of `d0`.
pub fn calibrate_tau(d0: &[f64], significance: f64) -> Result<f64> {
    check_scores(d0)?;
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::invalid(format!("significance {significance} outside (0, 1)")));
    }
    let n = d0.len();
    // 0.95·100 is not exactly 95 in binary; shave the round-off before ⌈·⌉.
    let rank = (((1.0 - significance) * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    Ok(sorted(d0)[rank - 1])
}

/// Candidate values for `family`: `k ∈ {1, …, d}` or `p ∈ {0, 0.01, …, 0.99}`.
pub fn default_grid(family: Family, d: usize) -> Result<Vec<f64>> {
    match family {
        Family::LogSimplicialJb | Family::LogSimplicialBr => Ok((1..=d).map(|k| k as f64).collect()),
        Family::LogPhiPJb | Family::LogPhiPBr => Ok((0..100).map(|i| i as f64 / 100.0).collect()),
        other => Err(Error::invalid(format!("family `{}` has no default grid", other.name()))),
    }
}

/// AUC of one grid value; `None` when too many evaluations failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamAuc {
    pub param: f64,
    pub auc: Option<f64>,
    pub failed: usize,
}

/// Outcome of [`select_parameter`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub best: DistanceSpec,
    pub table: Vec<ParamAuc>,
    /// Surviving H0 pseudo-pair distances of the selected parameter.
    pub d0: Vec<f64>,
}

const H0_TAG: &str = "h0-pairs";
const H1_TAG: &str = "h1-pairs";

fn evaluate_pairs(
    pool: &Sample<f64>,
    pairs: &[PseudoPair],
    specs: &[DistanceSpec],
    opts: &DistanceOptions,
) -> Vec<Vec<Result<f64>>> {
    pairs
        .par_iter()
        .map(|p| distances_by_rows(pool, &p.x, &p.y, specs, opts))
        .collect()
}

fn column(rows: &[Vec<Result<f64>>], j: usize) -> (Vec<f64>, usize, Option<Error>) {
    let mut ok = Vec::with_capacity(rows.len());
    let mut failed = 0;
    let mut last = None;
    for r in rows {
        match &r[j] {
            Ok(v) => ok.push(*v),
            Err(e) => {
                failed += 1;
                last = Some(e.clone());
            }
        }
    }
    (ok, failed, last)
}

fn too_many(failed: usize, total: usize) -> bool {
    failed as f64 > MAX_FAILURE_FRACTION * total as f64
}

fn grid_specs(family: Family, grid: &[f64], d: usize, opts: &DistanceOptions) -> Result<Vec<DistanceSpec>> {
    if grid.is_empty() {
        return Err(Error::invalid("empty parameter grid"));
    }
    grid.iter()
        .map(|&v| {
            let s = family.with_param(Some(v))?;
            s.validate(d, opts.allow_negative_p)?;
            Ok(s)
        })
        .collect()
}

/// Picks the grid value with the largest AUC between H0 and H1 pseudo-pair
/// distances. One set of pairs serves the whole grid; ties go to the
/// smallest value.
#[allow(clippy::too_many_arguments)]
pub fn select_parameter(
    x: &Sample<f64>,
    y: &Sample<f64>,
    family: Family,
    grid: &[f64],
    scheme: SamplingScheme,
    n_pairs: usize,
    seed: u64,
    opts: &DistanceOptions,
) -> Result<SelectionOutcome> {
    let specs = grid_specs(family, grid, x.dim(), opts)?;
    let pool = x.concat(y)?;
    let h0 = pseudo_pair_indices(x.n(), y.n(), scheme, Hypothesis::H0, n_pairs, seed, H0_TAG)?;
    let h1 = pseudo_pair_indices(x.n(), y.n(), scheme, Hypothesis::H1, n_pairs, seed, H1_TAG)?;
    let r0 = evaluate_pairs(&pool, &h0, &specs, opts);
    let r1 = evaluate_pairs(&pool, &h1, &specs, opts);
    let mut order: Vec<usize> = (0..specs.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut table = Vec::with_capacity(specs.len());
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for j in order {
        let (d0, f0, _) = column(&r0, j);
        let (d1, f1, _) = column(&r1, j);
        let failed = f0 + f1;
        let area = if too_many(failed, 2 * n_pairs) || d0.is_empty() || d1.is_empty() {
            None
        } else {
            Some(auc(&d0, &d1)?)
        };
        if let Some(a) = area {
            if best.as_ref().is_none_or(|(_, b, _)| a > *b) {
                best = Some((j, a, d0));
            }
        }
        table.push(ParamAuc {
            param: grid[j],
            auc: area,
            failed,
        });
    }
    let (j, _, d0) = best.ok_or(Error::AllParametersInfeasible)?;
    Ok(SelectionOutcome {
        best: specs[j],
        table,
        d0,
    })
}

/// H0 and H1 pseudo-pair distances for one fixed distance, the raw material
/// of its ROC curve. Uses the same pairs as [`select_parameter`] and
/// [`run_test`] for a given seed; returns `(d0, d1, failed)`.
pub fn pseudo_pair_distances(
    x: &Sample<f64>,
    y: &Sample<f64>,
    spec: &DistanceSpec,
    scheme: SamplingScheme,
    n_pairs: usize,
    seed: u64,
    opts: &DistanceOptions,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    spec.validate(x.dim(), opts.allow_negative_p)?;
    let pool = x.concat(y)?;
    let specs = std::slice::from_ref(spec);
    let h0 = pseudo_pair_indices(x.n(), y.n(), scheme, Hypothesis::H0, n_pairs, seed, H0_TAG)?;
    let h1 = pseudo_pair_indices(x.n(), y.n(), scheme, Hypothesis::H1, n_pairs, seed, H1_TAG)?;
    let (d0, f0, l0) = column(&evaluate_pairs(&pool, &h0, specs, opts), 0);
    let (d1, f1, l1) = column(&evaluate_pairs(&pool, &h1, specs, opts), 0);
    if too_many(f0 + f1, 2 * n_pairs) {
        return Err(Error::TooManyFailures {
            failed: f0 + f1,
            total: 2 * n_pairs,
            last: l0.or(l1).map(|e| e.to_string()).unwrap_or_default(),
        });
    }
    Ok((d0, d1, f0 + f1))
}

/// Statistic of a test: a fixed distance, or a family whose parameter is
/// selected by AUC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Fixed(DistanceSpec),
    Grid { family: Family, grid: Vec<f64> },
}

impl Statistic {
    pub fn label(&self) -> String {
        match self {
            Statistic::Fixed(s) => s.label(),
            Statistic::Grid { family, .. } => format!("{}(selected)", family.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub statistic: Statistic,
    pub n_pairs: usize,
    pub scheme: SamplingScheme,
    pub significance: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub options: DistanceOptions,
}

impl TestConfig {
    /// Defaults: without replacement with `r = 5`, 5% significance.
    pub fn new(statistic: Statistic, n_pairs: usize, master_seed: u64) -> Self {
        Self {
            statistic,
            n_pairs,
            scheme: SamplingScheme::default(),
            significance: 0.05,
            master_seed,
            options: DistanceOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs < 10 {
            return Err(Error::invalid(format!(
                "N = {} pseudo pairs, at least 10 needed",
                self.n_pairs
            )));
        }
        if !(self.significance > 0.0 && self.significance <= 0.5) {
            return Err(Error::invalid(format!(
                "significance {} outside (0, 0.5]",
                self.significance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub distance: DistanceSpec,
    pub statistic: f64,
    pub tau: f64,
    pub reject: bool,
    pub selected_param: Option<f64>,
    pub auc_by_param: Option<Vec<ParamAuc>>,
    pub n_effective: usize,
    pub m_effective: usize,
    pub pairs_used: usize,
    pub pairs_failed: usize,
}

/// Resampling test of equal mean and covariance.
///
/// With a grid the parameter is selected first; the H0 pseudo pairs of the
/// selection also calibrate `τ`. The statistic is computed on `x` and `y`
/// with `r` random rows removed from each (untrimmed for the bootstrap).
pub fn run_test(x: &Sample<f64>, y: &Sample<f64>, config: &TestConfig) -> Result<TestResult> {
    config.validate()?;
    let (n_eff, m_eff) = config.scheme.sizes(x.n(), y.n())?;
    let opts = &config.options;
    let seed = config.master_seed;
    let (spec, d0, failed, table) = match &config.statistic {
        Statistic::Grid { family, grid } => {
            let sel = select_parameter(x, y, *family, grid, config.scheme, config.n_pairs, seed, opts)?;
            let failed = config.n_pairs - sel.d0.len();
            (sel.best, sel.d0, failed, Some(sel.table))
        }
        Statistic::Fixed(spec) => {
            spec.validate(x.dim(), opts.allow_negative_p)?;
            let pool = x.concat(y)?;
            let h0 = pseudo_pair_indices(
                x.n(),
                y.n(),
                config.scheme,
                Hypothesis::H0,
                config.n_pairs,
                seed,
                H0_TAG,
            )?;
            let rows = evaluate_pairs(&pool, &h0, std::slice::from_ref(spec), opts);
            let (d0, failed, last) = column(&rows, 0);
            if too_many(failed, config.n_pairs) {
                return Err(Error::TooManyFailures {
                    failed,
                    total: config.n_pairs,
                    last: last.map(|e| e.to_string()).unwrap_or_default(),
                });
            }
            (*spec, d0, failed, None)
        }
    };
    let tau = calibrate_tau(&d0, config.significance)?;
    let (xt, yt) = match config.scheme {
        SamplingScheme::Bootstrap => (x.clone(), y.clone()),
        SamplingScheme::WithoutReplacement { .. } => {
            let keep = |s: &Sample<f64>, size: usize, lane: u64| -> Result<Sample<f64>> {
                let mut idx = index::sample(&mut derived_rng(seed, "trim", lane, 0), s.n(), size).into_vec();
                idx.sort_unstable();
                s.select(&idx)
            };
            (keep(x, n_eff, 0)?, keep(y, m_eff, 1)?)
        }
    };
    let statistic = sample_distance(&xt, &yt, &spec, opts)?;
    Ok(TestResult {
        distance: spec,
        statistic,
        tau,
        reject: statistic > tau,
        selected_param: table.as_ref().and(spec.param()),
        auc_by_param: table,
        n_effective: xt.n(),
        m_effective: yt.n(),
        pairs_used: d0.len(),
        pairs_failed: failed,
    })
}

/// Covariance settings of the two simulation examples, both with mean
/// `(1, …, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum Preset {
    /// `Σ_μ = diag(A, 10⁻³ I)`, `Σ_ζ = diag(αA, 10⁻³ I)`, `α ∈ [1, 2]`.
    Scaled { alpha: f64 },
    /// `Σ_μ = diag(A, I)`, `Σ_ζ = diag(R_θ A R_θᵀ, I)`, `θ ∈ [0, π/4]`.
    Rotated { theta: f64 },
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Scaled { alpha } => write!(f, "example 1 (alpha = {alpha})"),
            Preset::Rotated { theta } => write!(f, "example 2 (theta = {theta})"),
        }
    }
}

const A: [[f64; 2]; 2] = [[2.0, -1.0], [-1.0, 2.0]];

impl Preset {
    /// Preset `1` or `2` with its parameter.
    pub fn from_id(id: u8, param: f64) -> Result<Self> {
        match id {
            1 if (1.0..=2.0).contains(&param) => Ok(Preset::Scaled { alpha: param }),
            2 if (0.0..=std::f64::consts::FRAC_PI_4).contains(&param) => Ok(Preset::Rotated { theta: param }),
            1 => Err(Error::invalid(format!("alpha = {param} outside [1, 2]"))),
            2 => Err(Error::invalid(format!("theta = {param} outside [0, pi/4]"))),
            _ => Err(Error::invalid(format!("unknown preset {id}"))),
        }
    }

    /// The two Gaussian summaries in dimension `d ≥ 2`.
    pub fn summaries(&self, d: usize) -> Result<(GaussianSummary<f64>, GaussianSummary<f64>)> {
        if d < 2 {
            return Err(Error::invalid("presets need d >= 2"));
        }
        let block = |top: [[f64; 2]; 2], tail: f64| -> Result<SymMatrix<f64>> {
            let mut m = Matrix::zeros(d, d);
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] = top[i][j];
                }
            }
            for i in 2..d {
                m[(i, i)] = tail;
            }
            SymMatrix::new(m)
        };
        let (second, tail) = match *self {
            Preset::Scaled { alpha } => (A.map(|r| r.map(|v| alpha * v)), 1e-3),
            Preset::Rotated { theta } => {
                let (s, c) = theta.sin_cos();
                let r = Matrix::from_rows(&[[c, s], [-s, c]])?;
                let rot = r.matmul(&Matrix::from_rows(&A)?).matmul(&r.transpose());
                ([[rot[(0, 0)], rot[(0, 1)]], [rot[(1, 0)], rot[(1, 1)]]], 1.0)
            }
        };
        let mean = vec![1.0; d];
        Ok((
            GaussianSummary::new(mean.clone(), block(A, tail)?)?,
            GaussianSummary::new(mean, block(second, tail)?)?,
        ))
    }
}

/// Sample of `n` draws from `sampler` using the stream `(seed, tag, lane, index)`.
pub fn draw_sample(
    sampler: &GaussianSampler<f64>,
    n: usize,
    seed: u64,
    tag: &str,
    lane: u64,
    index: u64,
) -> Result<Sample<f64>> {
    let d = sampler.dim();
    let mut rng = derived_rng(seed, tag, lane, index);
    let mut buf = vec![0.0; n * d];
    for row in buf.chunks_mut(d) {
        sampler.sample(&mut rng, row);
    }
    Sample::new(Matrix::from_row_major(n, d, buf)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub preset: Preset,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub reps: usize,
    pub distances: Vec<DistanceSpec>,
    pub significance: f64,
    pub seed: u64,
    #[serde(default)]
    pub options: DistanceOptions,
}

/// Per-distance outcome of [`simulate_example`]. `fp` and `tp` are the
/// rejection rates at the threshold calibrated on the simulated H0
/// distances themselves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRow {
    pub distance: DistanceSpec,
    pub label: String,
    pub auc: f64,
    pub tau: f64,
    pub fp: f64,
    pub tp: f64,
    pub failed: usize,
    #[serde(skip)]
    pub d0: Vec<f64>,
    #[serde(skip)]
    pub d1: Vec<f64>,
}

impl SimulationRow {
    pub fn roc(&self) -> Result<RocCurve> {
        roc(&self.d0, &self.d1)
    }
}

/// Distances between independent pairs of Gaussian samples, `reps` pairs
/// with both samples from `μ` (H0) and `reps` pairs with the second sample
/// from `ζ` (H1).
pub fn simulate_example(cfg: &SimulationConfig) -> Result<Vec<SimulationRow>> {
    if cfg.reps < 2 {
        return Err(Error::invalid("reps must be at least 2"));
    }
    for s in &cfg.distances {
        s.validate(cfg.d, cfg.options.allow_negative_p)?;
    }
    let (mu, zeta) = cfg.preset.summaries(cfg.d)?;
    let (sm, sz) = (GaussianSampler::new(&mu)?, GaussianSampler::new(&zeta)?);
    let rows: Vec<Result<[Vec<Result<f64>>; 2]>> = (0..cfg.reps)
        .into_par_iter()
        .map(|i| {
            let i = i as u64;
            let mut out = [Vec::new(), Vec::new()];
            for (h, second) in [(0u64, &sm), (1, &sz)] {
                let x = draw_sample(&sm, cfg.n, cfg.seed, "simulate", 2 * h, i)?;
                let y = draw_sample(second, cfg.m, cfg.seed, "simulate", 2 * h + 1, i)?;
                let pool = x.concat(&y)?;
                let a: Vec<usize> = (0..cfg.n).collect();
                let b: Vec<usize> = (cfg.n..cfg.n + cfg.m).collect();
                out[h as usize] = distances_by_rows(&pool, &a, &b, &cfg.distances, &cfg.options);
            }
            Ok(out)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let (r0, r1): (Vec<_>, Vec<_>) = rows.into_iter().map(|[a, b]| (a, b)).unzip();
    cfg.distances
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let (d0, f0, l0) = column(&r0, j);
            let (d1, f1, l1) = column(&r1, j);
            let failed = f0 + f1;
            if too_many(failed, 2 * cfg.reps) {
                return Err(Error::TooManyFailures {
                    failed,
                    total: 2 * cfg.reps,
                    last: l0.or(l1).map(|e| e.to_string()).unwrap_or_default(),
                });
            }
            let tau = calibrate_tau(&d0, cfg.significance)?;
            let rate = |v: &[f64]| v.iter().filter(|&&x| x > tau).count() as f64 / v.len() as f64;
            Ok(SimulationRow {
                distance: *spec,
                label: spec.label(),
                auc: auc(&d0, &d1)?,
                tau,
                fp: rate(&d0),
                tp: rate(&d1),
                failed,
                d0,
                d1,
            })
        })
        .collect()
}

/// Rejection rates of full resampling tests on simulated data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRates {
    pub label: String,
    /// Fraction of H0 replications rejected.
    pub fp: f64,
    /// Fraction of H1 replications rejected.
    pub tp: f64,
    pub reps: usize,
    /// Replications whose test errored.
    pub errors: usize,
}

/// Runs each test procedure on `reps` H0 data pairs (both samples from `μ`)
/// and `reps` H1 data pairs. `tests` supply statistic, scheme, `N` and
/// significance; their seeds are replaced per replication.
pub fn simulate_test_rates(
    preset: Preset,
    n: usize,
    m: usize,
    d: usize,
    reps: usize,
    tests: &[TestConfig],
    seed: u64,
) -> Result<Vec<TestRates>> {
    let (mu, zeta) = preset.summaries(d)?;
    let (sm, sz) = (GaussianSampler::new(&mu)?, GaussianSampler::new(&zeta)?);
    let outcomes: Vec<Result<Vec<[Option<bool>; 2]>>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let i = i as u64;
            let mut data = Vec::with_capacity(2);
            for (h, second) in [(0u64, &sm), (1, &sz)] {
                let x = draw_sample(&sm, n, seed, "rates", 2 * h, i)?;
                let y = draw_sample(second, m, seed, "rates", 2 * h + 1, i)?;
                data.push((x, y));
            }
            Ok(tests
                .iter()
                .enumerate()
                .map(|(t, cfg)| {
                    let mut out = [None, None];
                    for (h, (x, y)) in data.iter().enumerate() {
                        let mut c = cfg.clone();
                        c.master_seed = derive_seed(seed, "rates-test", t as u64, 2 * i + h as u64);
                        out[h] = run_test(x, y, &c).ok().map(|r| r.reject);
                    }
                    out
                })
                .collect())
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(tests
        .iter()
        .enumerate()
        .map(|(t, cfg)| {
            let mut counts = [0usize; 2];
            let mut valid = [0usize; 2];
            for rep in &outcomes {
                for h in 0..2 {
                    if let Some(rej) = rep[t][h] {
                        valid[h] += 1;
                        counts[h] += usize::from(rej);
                    }
                }
            }
            let frac = |h: usize| {
                if valid[h] == 0 {
                    f64::NAN
                } else {
                    counts[h] as f64 / valid[h] as f64
                }
            };
            TestRates {
                label: cfg.statistic.label(),
                fp: frac(0),
                tp: frac(1),
                reps,
                errors: 2 * reps - valid[0] - valid[1],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests;
