use mscan::baselines::{gmg_localize, leading_singular_pair, localize_from_pair, SpectralConfig};
use mscan::rng::stream;
use mscan::scanners::{
    adaptive_las, adaptive_las_from, exhaustive_mscan, gss, las, AdaptiveConfig, GssConfig,
    LasConfig, LasInit,
};
use mscan::{
    err_measure, generate, mscan_objective, penalty, DataMatrix, Family, GenerationSpec,
    PenaltyParams, Selection,
};
use proptest::prelude::*;
use rand::Rng as _;
use rand_distr::StandardNormal;

fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DataMatrix {
    let mut rng = stream(seed, 0);
    let values = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    DataMatrix::new(rows, cols, values).unwrap()
}

fn integer_matrix(rows: usize, cols: usize, seed: u64) -> DataMatrix {
    let mut rng = stream(seed, 0);
    let values = (0..rows * cols)
        .map(|_| rng.random_range(-5..=5) as f64)
        .collect();
    DataMatrix::new(rows, cols, values).unwrap()
}

// Clusters the last iterate when power iteration stalls, as the bench driver does.
fn spectral_selection(x: &DataMatrix) -> Selection {
    match leading_singular_pair(x, &SpectralConfig::default()) {
        Ok(pair) => localize_from_pair(x, &pair.left, &pair.right).unwrap(),
        Err(mscan::Error::NotConverged { left, right, .. }) => {
            localize_from_pair(x, &left, &right).unwrap()
        }
        Err(e) => panic!("{e}"),
    }
}

fn index_set(total: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::btree_set(0..total, 1..=total).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #[test]
    fn penalty_complement_symmetry(rows in 2usize..400, cols in 2usize..400, a in 0.0f64..1.0, b in 0.0f64..1.0, delta in 0.0f64..3.0) {
        let m = 1 + (a * (rows - 2) as f64) as usize;
        let n = 1 + (b * (cols - 2) as f64) as usize;
        let p = PenaltyParams::new(delta).unwrap();
        let base = penalty(rows, cols, m, n, p).unwrap();
        prop_assert_eq!(base, penalty(rows, cols, rows - m, n, p).unwrap());
        prop_assert_eq!(base, penalty(rows, cols, m, cols - n, p).unwrap());
        prop_assert_eq!(base, penalty(cols, rows, n, m, p).unwrap());
    }

    #[test]
    fn penalty_increases_with_delta(rows in 2usize..200, cols in 2usize..200, m in 1usize..50, n in 1usize..50, d in 0.0f64..2.0, step in 0.01f64..1.0) {
        prop_assume!(m <= rows && n <= cols);
        let lo = penalty(rows, cols, m, n, PenaltyParams::new(d).unwrap()).unwrap();
        let hi = penalty(rows, cols, m, n, PenaltyParams::new(d + step).unwrap()).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn err_measure_is_a_symmetric_discrepancy(a in index_set(12), b in index_set(9), c in index_set(12), d in index_set(9)) {
        let s = Selection::new(a, b).unwrap();
        let t = Selection::new(c, d).unwrap();
        prop_assert_eq!(err_measure(&s, &t), err_measure(&t, &s));
        prop_assert_eq!(err_measure(&s, &s), 0.0);
        prop_assert_eq!(err_measure(&s, &t) == 0.0, s == t);
    }

    #[test]
    fn objective_is_transpose_invariant(seed in any::<u64>(), a in index_set(6), b in index_set(7)) {
        let x = gaussian_matrix(6, 7, seed);
        let s = Selection::new(a, b).unwrap();
        let p = PenaltyParams::GAUSSIAN;
        let direct = mscan_objective(&x, &s, p).unwrap();
        let flipped = mscan_objective(&x.transpose(), &s.transpose(), p).unwrap();
        prop_assert!((direct - flipped).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn spectral_ignores_positive_scaling(seed in any::<u64>(), exp in -8i32..8) {
        let spec = GenerationSpec { family: Family::Gaussian, rows: 30, cols: 24, block_rows: 6, block_cols: 5, theta: 1.5, seed };
        let (x, _) = generate(&spec).unwrap();
        // Powers of two scale every entry exactly, so the iterates scale exactly.
        let scale = 2f64.powi(exp);
        let y = x.map(|v| v * scale).unwrap();
        prop_assert_eq!(spectral_selection(&x), spectral_selection(&y));
    }

    #[test]
    fn gmg_ignores_constant_shift(seed in any::<u64>(), shift in -20i32..20) {
        let x = integer_matrix(15, 11, seed);
        // Integer data keep every sum exact, so gaps are unchanged bit for bit.
        let y = x.map(|v| v + shift as f64).unwrap();
        prop_assert_eq!(gmg_localize(&x).unwrap(), gmg_localize(&y).unwrap());
    }

    #[test]
    fn heuristics_never_beat_the_oracle(seed in any::<u64>(), rows in 2usize..=9, cols in 2usize..=9) {
        let x = gaussian_matrix(rows, cols, seed);
        let p = PenaltyParams::GAUSSIAN;
        let oracle = exhaustive_mscan(&x, p).unwrap();
        let cfg = AdaptiveConfig { m0: 2, n0: 2, restarts: 5, ..AdaptiveConfig::default() };
        let a = adaptive_las(&x, &cfg, seed).unwrap();
        let g = gss(&x, &GssConfig::new(rows, cols), seed).unwrap();
        prop_assert!(oracle.objective >= a.objective);
        prop_assert!(oracle.objective >= g.objective);
        prop_assert_eq!(mscan_objective(&x, &oracle.selection, p).unwrap(), oracle.objective);
    }

    #[test]
    fn las_and_adaptive_traces_never_decrease(seed in any::<u64>(), m in 1usize..=20, n in 1usize..=20) {
        let x = gaussian_matrix(20, 20, seed);
        let out = las(&x, &LasConfig::new(m, n, LasInit::Random { seed })).unwrap();
        prop_assert!(out.trace.windows(2).all(|w| w[1] >= w[0]));
        let init: Vec<usize> = (0..m).collect();
        let run = adaptive_las_from(&x, &AdaptiveConfig { n0: n, ..AdaptiveConfig::default() }, init).unwrap();
        prop_assert!(run.trace.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(*run.trace.last().unwrap(), run.objective);
    }
}

#[test]
fn scanner_results_agree_with_recomputed_objective() {
    let p = PenaltyParams::GAUSSIAN;
    for seed in 0..20 {
        let x = gaussian_matrix(25, 18, seed);
        let a = adaptive_las(
            &x,
            &AdaptiveConfig {
                restarts: 4,
                ..AdaptiveConfig::default()
            },
            seed,
        )
        .unwrap();
        let g = gss(&x, &GssConfig::new(25, 18), seed).unwrap();
        for r in [a, g] {
            let again = mscan_objective(&x, &r.selection, p).unwrap();
            assert!((r.objective - again).abs() <= 1e-9 * again.abs().max(1.0));
        }
    }
}

#[test]
fn generation_is_reproducible_and_thread_independent() {
    let spec = GenerationSpec::with_theta_mult(Family::Poisson, 90, 70, 9, 7, 2.0, 11).unwrap();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = one.install(|| generate(&spec).unwrap());
    let b = four.install(|| generate(&spec).unwrap());
    assert_eq!(a, b);
    let x = &a.0;
    let cfg = AdaptiveConfig {
        restarts: 6,
        ..AdaptiveConfig::default()
    };
    let r1 = one.install(|| adaptive_las(x, &cfg, 5).unwrap());
    let r4 = four.install(|| adaptive_las(x, &cfg, 5).unwrap());
    assert_eq!(r1, r4);
}

#[test]
fn stochastic_monotonicity_in_theta() {
    // Empirical CDFs on a fixed grid: larger theta must not put more mass
    // below any point than smaller theta, up to a DKW-style band.
    let draws = 20_000;
    let band = (f64::ln(2.0 / 1e-6) / (2.0 * draws as f64)).sqrt() * 2.0;
    for family in Family::ALL {
        let sample = |theta: f64| {
            let spec = GenerationSpec {
                family,
                rows: draws / 100,
                cols: 100,
                block_rows: draws / 100,
                block_cols: 100,
                theta,
                seed: 3,
            };
            let (x, _) = generate(&spec).unwrap();
            let mut v = x.values().to_vec();
            v.sort_by(f64::total_cmp);
            v
        };
        let (low, high) = (sample(0.2), sample(0.6));
        let cdf = |v: &[f64], t: f64| v.partition_point(|&a| a <= t) as f64 / v.len() as f64;
        for k in -30..=30 {
            let t = k as f64 / 10.0;
            assert!(cdf(&high, t) <= cdf(&low, t) + band, "{family} at {t}");
        }
    }
}
