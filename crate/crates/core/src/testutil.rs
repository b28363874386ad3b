//! Shared helpers for unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::Matrix;
use crate::spectral::SymMatrix;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn assert_close(actual: f64, expected: f64, rel_tol: f64) {
    let scale = expected.abs().max(1.0);
    assert!(
        (actual - expected).abs() <= rel_tol * scale,
        "expected {expected}, got {actual} (tolerance {rel_tol})"
    );
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_row_major(rows, cols, data).unwrap()
}

/// Orthogonal matrix by Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(d: usize, rng: &mut impl Rng) -> Matrix<f64> {
    let g = gaussian_matrix(d, d, rng);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for _ in 0..2 {
            for c in &cols {
                let proj: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= proj * y;
                }
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        cols.push(v);
    }
    let mut q = Matrix::zeros(d, d);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..d {
            q[(i, j)] = c[i];
        }
    }
    q
}

/// `Q diag(λ) Qᵀ` with the given eigenvalues and a random orthogonal `Q`.
pub fn with_eigenvalues(eigs: &[f64], rng: &mut impl Rng) -> SymMatrix<f64> {
    let q = random_orthogonal(eigs.len(), rng);
    let d = eigs.len();
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = (0..d).map(|l| q[(i, l)] * eigs[l] * q[(j, l)]).sum();
        }
    }
    SymMatrix::new(m).unwrap()
}

/// Random SPD matrix with eigenvalues in `[0.1, 3.1]`.
pub fn random_spd(d: usize, rng: &mut impl Rng) -> SymMatrix<f64> {
    let eigs: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..3.1)).collect();
    with_eigenvalues(&eigs, rng)
}

/// Random PSD matrix of exact rank `r` (nonzero eigenvalues in `[0.2, 3.2]`).
pub fn random_psd_rank(d: usize, r: usize, rng: &mut impl Rng) -> SymMatrix<f64> {
    let eigs: Vec<f64> = (0..d)
        .map(|i| if i < r { rng.random_range(0.2..3.2) } else { 0.0 })
        .collect();
    with_eigenvalues(&eigs, rng)
}

pub fn random_vector(d: usize, scale: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Gaussian summary with random SPD covariance and standard normal mean.
pub fn random_gaussian(d: usize, rng: &mut impl Rng) -> crate::divergence::GaussianSummary<f64> {
    let mean = random_vector(d, 1.0, rng);
    crate::divergence::GaussianSummary::new(mean, random_spd(d, rng)).unwrap()
}
