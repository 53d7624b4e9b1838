//! Model-space properties over random atomic measures.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spw_core::interpolation::default_schedule;
use spw_core::*;

fn instance(seed: u64) -> (AtomicMeasure, MuFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = RandomAtomic::default().sample(&mut rng);
    let f = MuFunction::random(&m, &mut rng);
    (m, f)
}

fn adaptive(m: &AtomicMeasure, f: &MuFunction) -> AdaptiveAnalysis {
    let opts = AdaptiveOptions { tol: 1e-12, initial_order: 64, cap: 1 << 16 };
    adaptive_analysis(&mut InverseCache::new(m), f, opts).unwrap()
}

// Independent of the series route: direct sum over atoms.
fn quotient_oracle(m: &AtomicMeasure, f: &MuFunction, z: Complex64) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for ((x, w), v) in m.atoms().zip(f.values()) {
        let k = 1.0 / (1.0 - z * Complex64::from_polar(1.0, -std::f64::consts::TAU * x));
        num += w * v * k;
        den += w * k;
    }
    num / den
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_norm_matches_function_norm(seed in any::<u64>()) {
        let (m, f) = instance(seed);
        let run = adaptive(&m, &f);
        let alpha = cauchy_inverse(&m, run.order).unwrap().alpha;
        let g = nct_series(&m, &f, &alpha, run.order).unwrap();
        prop_assert!((g.series().energy().sqrt() - f.norm(&m)).abs() <= 1e-6);
    }

    #[test]
    fn quotient_and_series_agree(seed in any::<u64>(), r in 0.0..0.9f64, t in 0.0..1.0f64) {
        let (m, f) = instance(seed);
        let order = 300;
        let alpha = cauchy_inverse(&m, order).unwrap().alpha;
        let g = nct_series(&m, &f, &alpha, order).unwrap();
        let z = Complex64::from_polar(r, std::f64::consts::TAU * t);
        let s = series_eval(g.series(), z);
        let q = quotient_oracle(&m, &f, z);
        prop_assert!((s - q).norm() <= g.tail_bound(r) + 1e-12, "{} vs bound {}", (s - q).norm(), g.tail_bound(r));
        prop_assert!((nct_quotient(&m, &f, z).unwrap() - q).norm() <= 1e-12);
    }

    #[test]
    fn from_function_candidates_are_members(seed in any::<u64>()) {
        let (m, f) = instance(seed);
        let inv = cauchy_inverse(&m, 256).unwrap();
        let g = nct_series(&m, &f, &inv.alpha, 256).unwrap();
        let report = toeplitz_defect(&g, &inv.inner_function(), 32).unwrap();
        prop_assert!(report.passes(1e-6), "defect {} bound {}", report.defect, report.bound);
    }

    #[test]
    fn moment_round_trip(seed in any::<u64>()) {
        let (m, f) = instance(seed);
        let order = 1024;
        let inv = cauchy_inverse(&m, order).unwrap();
        let a = m.function_moments(&f, order).unwrap();
        let outcome = solve_moment_problem(&a, &m, &inv.alpha, &inv.inner_function(), 1e-6).unwrap();
        let MomentOutcome::Solved { function, .. } = outcome else {
            return Err(TestCaseError::fail("feasible moments rejected"));
        };
        let worst = function.values().iter().zip(f.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-6);
        let again = nct_series(&m, &function, &inv.alpha, order).unwrap();
        let original = nct_series(&m, &f, &inv.alpha, order).unwrap();
        prop_assert!(again.series().max_deviation(original.series()) <= 1e-8);
    }

    #[test]
    fn boundary_error_decreases_along_schedule(seed in any::<u64>()) {
        let (m, f) = instance(seed);
        let order = 4096;
        let alpha = cauchy_inverse(&m, order).unwrap().alpha;
        let g = nct_series(&m, &f, &alpha, order).unwrap();
        let schedule = default_schedule(3);
        let bv = boundary_recover(&g, &m, &schedule, Some(&f), 1e-6).unwrap();
        prop_assert!(bv.errors.windows(2).all(|e| e[1] <= e[0] + 1e-9), "{:?}", bv.errors);
    }
}
