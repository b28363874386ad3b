use super::*;
use crate::testutil::{random_vector, seeded};
use proptest::prelude::*;
use rand::Rng;
use std::collections::HashSet;

fn random_sample(n: usize, d: usize, shift: f64, seed: u64) -> Sample<f64> {
    let mut rng = seeded(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| random_vector(d, 1.0, &mut rng).into_iter().map(|v| v + shift).collect())
        .collect();
    Sample::from_rows(&rows).unwrap()
}

#[test]
fn scheme_sizes() {
    let s = SamplingScheme::WithoutReplacement { r: 5 };
    assert_eq!(s.sizes(100, 80).unwrap(), (95, 75));
    assert_eq!(SamplingScheme::Bootstrap.sizes(100, 80).unwrap(), (100, 80));
    assert!(matches!(s.sizes(10, 80), Err(Error::SchemeInfeasible(_))));
    assert!(SamplingScheme::WithoutReplacement { r: 0 }.sizes(2, 2).is_ok());
}

#[test]
fn subsets_without_replacement() {
    let x = random_sample(12, 2, 0.0, 1);
    let y = random_sample(9, 2, 0.0, 2);
    let scheme = SamplingScheme::WithoutReplacement { r: 0 };
    for (a, b) in pseudo_pairs_h1(&x, &y, scheme, 5, 3).unwrap() {
        let mut rows: Vec<Vec<f64>> = a.data().to_rows();
        let mut orig = x.data().to_rows();
        rows.sort_by(|u, v| u.partial_cmp(v).unwrap());
        orig.sort_by(|u, v| u.partial_cmp(v).unwrap());
        assert_eq!(rows, orig);
        assert_eq!(b.n(), 9);
    }
}

#[test]
fn h0_pairs_are_disjoint_and_duplicate_free() {
    let scheme = SamplingScheme::WithoutReplacement { r: 5 };
    let pairs = pseudo_pair_indices(40, 30, scheme, Hypothesis::H0, 50, 11, "t").unwrap();
    for p in &pairs {
        assert_eq!((p.x.len(), p.y.len()), (35, 25));
        let xs: HashSet<usize> = p.x.iter().copied().collect();
        let ys: HashSet<usize> = p.y.iter().copied().collect();
        assert_eq!(xs.len(), 35);
        assert_eq!(ys.len(), 25);
        assert!(xs.is_disjoint(&ys));
        assert!(p.x.iter().chain(&p.y).all(|&i| i < 70));
    }
    // both original samples contribute to the first pseudo sample
    assert!(pairs.iter().any(|p| p.x.iter().any(|&i| i >= 40)));
    let h1 = pseudo_pair_indices(40, 30, scheme, Hypothesis::H1, 50, 11, "t").unwrap();
    for p in &h1 {
        assert!(p.x.iter().all(|&i| i < 40) && p.y.iter().all(|&i| (40..70).contains(&i)));
        assert_eq!(p.x.iter().collect::<HashSet<_>>().len(), 35);
    }
}

#[test]
fn h0_rows_disjoint_by_hashing() {
    let x = random_sample(20, 3, 0.0, 4);
    let y = random_sample(20, 3, 1.0, 5);
    let key = |r: &[f64]| r.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    for (a, b) in pseudo_pairs_h0(&x, &y, SamplingScheme::WithoutReplacement { r: 3 }, 20, 6).unwrap() {
        let ka: HashSet<_> = (0..a.n()).map(|i| key(a.row(i))).collect();
        let kb: HashSet<_> = (0..b.n()).map(|i| key(b.row(i))).collect();
        assert_eq!(ka.len(), a.n());
        assert_eq!(kb.len(), b.n());
        assert!(ka.is_disjoint(&kb));
    }
}

#[test]
fn bootstrap_sizes_and_determinism() {
    let x = random_sample(15, 2, 0.0, 7);
    let y = random_sample(10, 2, 0.0, 8);
    let a = pseudo_pairs_h0(&x, &y, SamplingScheme::Bootstrap, 3, 42).unwrap();
    let b = pseudo_pairs_h0(&x, &y, SamplingScheme::Bootstrap, 3, 42).unwrap();
    assert_eq!(a, b);
    for (p, q) in &a {
        assert_eq!((p.n(), q.n()), (15, 10));
    }
    let c = pseudo_pairs_h1(&x, &y, SamplingScheme::Bootstrap, 3, 42).unwrap();
    assert_eq!(c, pseudo_pairs_h1(&x, &y, SamplingScheme::Bootstrap, 3, 42).unwrap());
    assert_ne!(c, pseudo_pairs_h1(&x, &y, SamplingScheme::Bootstrap, 3, 43).unwrap());
}

#[test]
fn subset_count_for_r5() {
    // C(100, 95) = C(100, 5)
    let c: f64 = (0..5).map(|i| (100 - i) as f64 / (i + 1) as f64).product();
    assert!(c > 7.5e7, "{c}");
}

#[test]
fn roc_examples() {
    let r = roc(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
    assert_eq!(r.auc, 1.0);
    let r = roc(&[1.0, 2.0], &[2.0, 3.0]).unwrap();
    assert_eq!(r.auc, 0.875);
    let same = [0.3, 0.1, 0.7, 0.7];
    let r = roc(&same, &same).unwrap();
    assert_eq!(r.auc, 0.5);
    assert_eq!((r.fpr[0], r.tpr[0]), (0.0, 0.0));
    assert_eq!((*r.fpr.last().unwrap(), *r.tpr.last().unwrap()), (1.0, 1.0));
    assert!(matches!(roc(&[], &[1.0]), Err(Error::EmptyInput)));
    let csv = roc(&[1.0], &[2.0]).unwrap().to_csv();
    assert_eq!(csv, "threshold,fpr,tpr\n2,0,0\n1,0,1\n-inf,1,1\n");
}

#[test]
fn tau_examples() {
    let d0: Vec<f64> = (1..=100).rev().map(f64::from).collect();
    assert_eq!(calibrate_tau(&d0, 0.05).unwrap(), 95.0);
    assert_eq!(calibrate_tau(&[2.0, 1.0], 0.5).unwrap(), 1.0);
    assert_eq!(calibrate_tau(&[3.5; 7], 0.1).unwrap(), 3.5);
    assert!(matches!(calibrate_tau(&[], 0.1), Err(Error::EmptyInput)));
}

#[test]
fn grids() {
    assert_eq!(
        default_grid(Family::LogSimplicialBr, 4).unwrap(),
        vec![1.0, 2.0, 3.0, 4.0]
    );
    let p = default_grid(Family::LogPhiPJb, 4).unwrap();
    assert_eq!(p.len(), 100);
    assert_eq!(p[0], 0.0);
    assert_eq!(p[99], 0.99);
    assert!(default_grid(Family::Kl, 4).is_err());
}

#[test]
fn selection_with_single_value_and_ties() {
    let x = random_sample(40, 3, 0.0, 9);
    let y = random_sample(40, 3, 0.5, 10);
    let s = SamplingScheme::WithoutReplacement { r: 3 };
    let opts = DistanceOptions::default();
    let one = select_parameter(&x, &y, Family::LogSimplicialJb, &[2.0], s, 20, 1, &opts).unwrap();
    assert_eq!(one.best, DistanceSpec::LogSimplicialJb { k: 2 });
    assert_eq!(one.table.len(), 1);
    // a repeated grid value ties with itself; the table is in ascending order
    let sel = select_parameter(&x, &y, Family::LogPhiPBr, &[0.5, 0.2, 0.5], s, 20, 1, &opts).unwrap();
    assert_eq!(
        sel.table.iter().map(|t| t.param).collect::<Vec<_>>(),
        vec![0.2, 0.5, 0.5]
    );
    assert_eq!(sel.d0.len(), 20);
}

#[test]
fn selection_skips_infeasible_parameters() {
    // rank-2 data in d = 4: k = 3, 4 fail on every pair
    let mut rng = seeded(12);
    let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let a: f64 = rng.random_range(-1.0..1.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                vec![a, b, a + b, a - b]
            })
            .collect();
        Sample::from_rows(&rows).unwrap()
    };
    let x = mk(&mut rng);
    let y = mk(&mut rng);
    let s = SamplingScheme::WithoutReplacement { r: 2 };
    let opts = DistanceOptions::default();
    let sel = select_parameter(&x, &y, Family::LogSimplicialBr, &[1.0, 2.0, 3.0, 4.0], s, 20, 5, &opts).unwrap();
    assert!(sel.table[2].auc.is_none() && sel.table[3].auc.is_none());
    assert_eq!(sel.table[2].failed, 40);
    assert!(matches!(sel.best, DistanceSpec::LogSimplicialBr { k: 1 | 2 }));
    let none = select_parameter(&x, &y, Family::LogSimplicialBr, &[3.0, 4.0], s, 20, 5, &opts);
    assert!(matches!(none, Err(Error::AllParametersInfeasible)));
    let cfg = TestConfig::new(Statistic::Fixed(DistanceSpec::LogSimplicialBr { k: 3 }), 20, 5);
    assert!(matches!(run_test(&x, &y, &cfg), Err(Error::TooManyFailures { .. })));
}

#[test]
fn identical_samples_are_not_rejected() {
    let x = random_sample(30, 3, 0.0, 13);
    let mut cfg = TestConfig::new(Statistic::Fixed(DistanceSpec::Bhattacharyya), 30, 3);
    cfg.scheme = SamplingScheme::Bootstrap;
    let r = run_test(&x, &x, &cfg).unwrap();
    assert!(r.statistic.abs() < 1e-10);
    assert!(r.tau >= 0.0);
    assert!(!r.reject);
    assert_eq!((r.n_effective, r.m_effective), (30, 30));
}

#[test]
fn run_test_detects_shift_and_is_reproducible() {
    let x = random_sample(60, 3, 0.0, 14);
    let y = random_sample(60, 3, 1.0, 15);
    let cfg = TestConfig::new(
        Statistic::Grid {
            family: Family::LogSimplicialBr,
            grid: vec![1.0, 2.0, 3.0],
        },
        30,
        99,
    );
    let a = run_test(&x, &y, &cfg).unwrap();
    assert!(a.reject);
    assert_eq!((a.n_effective, a.m_effective), (55, 55));
    assert_eq!(a.selected_param, a.distance.param());
    assert_eq!(a.auc_by_param.as_ref().unwrap().len(), 3);
    let b = run_test(&x, &y, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| run_test(&x, &y, &cfg).unwrap());
    assert_eq!(a, c);
}

#[test]
fn energy_statistic_runs() {
    let x = random_sample(20, 2, 0.0, 16);
    let y = random_sample(20, 2, 2.0, 17);
    let cfg = TestConfig::new(Statistic::Fixed(DistanceSpec::Energy { delta: 1.0 }), 20, 3);
    assert!(run_test(&x, &y, &cfg).unwrap().reject);
}

#[test]
fn config_validation() {
    let x = random_sample(20, 2, 0.0, 18);
    let mut cfg = TestConfig::new(Statistic::Fixed(DistanceSpec::Kl), 5, 3);
    assert!(matches!(run_test(&x, &x, &cfg), Err(Error::InvalidParameter(_))));
    cfg.n_pairs = 10;
    cfg.significance = 0.7;
    assert!(matches!(run_test(&x, &x, &cfg), Err(Error::InvalidParameter(_))));
}

#[test]
fn presets() {
    let (mu, zeta) = Preset::from_id(1, 1.5).unwrap().summaries(4).unwrap();
    assert_eq!(mu.cov().get(0, 1), -1.0);
    assert_eq!(zeta.cov().get(0, 0), 3.0);
    assert_eq!(zeta.cov().get(3, 3), 1e-3);
    assert_eq!(mu.mean(), &[1.0; 4]);
    let (mu, zeta) = Preset::from_id(2, std::f64::consts::FRAC_PI_4)
        .unwrap()
        .summaries(3)
        .unwrap();
    assert_eq!(mu.cov().get(2, 2), 1.0);
    // rotating A by π/4 diagonalizes it: eigenvalues 1 and 3
    assert!((zeta.cov().get(0, 1)).abs() < 1e-12);
    let diag = [zeta.cov().get(0, 0), zeta.cov().get(1, 1)];
    assert!((diag[0] - 1.0).abs() < 1e-12 && (diag[1] - 3.0).abs() < 1e-12 || (diag[0] - 3.0).abs() < 1e-12);
    assert!(Preset::from_id(1, 2.5).is_err());
    assert!(Preset::from_id(3, 1.0).is_err());
}

#[test]
fn small_simulation_null_case() {
    let cfg = SimulationConfig {
        preset: Preset::Scaled { alpha: 1.0 },
        n: 40,
        m: 40,
        d: 4,
        reps: 60,
        distances: vec![DistanceSpec::Bhattacharyya, DistanceSpec::LogSimplicialJb { k: 2 }],
        significance: 0.05,
        seed: 1,
        options: DistanceOptions::default(),
    };
    let rows = simulate_example(&cfg).unwrap();
    for r in &rows {
        assert!((r.auc - 0.5).abs() < 0.15, "{}: {}", r.label, r.auc);
        assert_eq!(r.d0.len(), 60);
    }
    assert_eq!(rows, simulate_example(&cfg).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rank_auc_equals_trapezoid(seed in any::<u64>(), n0 in 1usize..40, n1 in 1usize..40, levels in 2u32..20) {
        let mut rng = seeded(seed);
        // coarse values force ties
        let d0: Vec<f64> = (0..n0).map(|_| f64::from(rng.random_range(0..levels))).collect();
        let d1: Vec<f64> = (0..n1).map(|_| f64::from(rng.random_range(0..levels)) + 0.5 * f64::from(rng.random_range(0..2u32))).collect();
        let r = roc(&d0, &d1).unwrap();
        prop_assert!((r.auc - r.trapezoidal_auc()).abs() <= 1e-9);
        prop_assert!(r.fpr.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(r.tpr.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(r.thresholds.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn tau_is_upper_quantile(seed in any::<u64>(), n in 1usize..200, s in 0.01f64..0.5) {
        let mut rng = seeded(seed);
        let d0: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let tau = calibrate_tau(&d0, s).unwrap();
        let above = d0.iter().filter(|&&v| v > tau).count() as f64;
        prop_assert!(above <= s * n as f64 + 1e-9);
        prop_assert!(d0.contains(&tau));
    }
}
