use std::collections::HashSet;

use dppmle::analysis::{
    enumerate_regions, group_fibers, select_mle, sign_vector, to_implicit, verify_counts, SignVector,
};
use dppmle::dpp::random_counts;
use dppmle::model::{self, DataCounts, MatrixParam};
use dppmle::pipeline::{estimate, estimate_with, start_fiber, PipelineOptions};
use dppmle::solver::{monodromy_solve, solve_at, GradientSystem, HessianClass, TrackerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point_key(p: &[f64]) -> Vec<i64> {
    p.iter().map(|v| (v * 1e6).round() as i64).collect()
}

#[test]
fn n4_fiber_is_closed_under_deck_group() {
    let u = random_counts(4, 1000, 42);
    let est = estimate(&u, &PipelineOptions::default());
    assert_eq!(est.solutions.len(), 24);
    let keys: HashSet<Vec<i64>> =
        est.solutions.iter().map(|s| point_key(&s.real_point().unwrap())).collect();
    for s in est.solutions.iter() {
        let m = MatrixParam::from_point(4, &s.real_point().unwrap()).unwrap();
        for img in [m.flip_column(3), m.flip_column(4), m.negate_xs()] {
            assert!(keys.contains(&point_key(&img.to_point())));
        }
        let g = model::gradient(&m, &u).unwrap();
        let scale = u.total() as f64;
        assert!(g.iter().all(|v| v.abs() <= 1e-8 * scale), "{g:?}");
    }
}

#[test]
fn monodromy_fiber_is_closed_under_conjugation() {
    let sys = GradientSystem::new(4);
    let m = monodromy_solve(&sys, 5, 24, 30, &TrackerConfig::default()).unwrap();
    // generic complex data: the fiber itself need not be conjugation closed,
    // but the real-data fiber must be
    assert_eq!(m.solutions.len(), 24);
    let report = solve_at(&sys, &random_counts(4, 1000, 9).as_f64(), &m, &TrackerConfig::default(), 3);
    assert!(report.solutions.is_conjugation_closed());
    assert_eq!(report.lost_paths, 0);
}

#[test]
fn solving_is_deterministic() {
    let u = random_counts(4, 1000, 8);
    let opts = PipelineOptions { seed: 3, ..Default::default() };
    let a = estimate(&u, &opts);
    let b = estimate(&u, &opts);
    let pa: Vec<_> = a.solutions.iter().map(|s| s.point.clone()).collect();
    let pb: Vec<_> = b.solutions.iter().map(|s| s.point.clone()).collect();
    assert_eq!(pa, pb);
}

#[test]
fn mle_is_invariant_under_scaling_counts() {
    let opts = PipelineOptions::default();
    let (warm, complete) = start_fiber(5, &opts);
    assert!(complete);
    let u = random_counts(5, 1000, 21);
    let a = estimate_with(&warm, complete, &u, &opts).mle.unwrap();
    let b = estimate_with(&warm, complete, &u.scaled(2), &opts).mle.unwrap();
    assert!(a.implicit.tv_distance(&b.implicit) <= 1e-9);
    assert!((2.0 * a.loglik - b.loglik).abs() <= 1e-9 * b.loglik.abs());
}

#[test]
fn mle_beats_every_other_critical_point_and_random_points() {
    let u = random_counts(4, 1000, 77);
    let est = estimate(&u, &PipelineOptions::default());
    let mle = est.mle.unwrap();
    for s in est.solutions.iter() {
        assert!(s.loglik.unwrap() <= mle.loglik + 1e-9 * mle.loglik.abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..2000 {
        let m = MatrixParam::new(
            (0..2).map(|_| rng.random_range(-5.0..5.0)).collect(),
            (0..2).map(|_| rng.random_range(-5.0..5.0)).collect(),
        )
        .unwrap();
        if let Ok(l) = model::log_likelihood_parametric(&m, &u) {
            assert!(l <= mle.loglik + 1e-9);
        }
    }
}

#[test]
fn constant_counts_give_three_tied_maxima() {
    let u = DataCounts::new(4, vec![7; 6]).unwrap();
    let est = estimate(&u, &PipelineOptions::default());
    assert_eq!(est.solutions.len(), 24);
    assert_eq!(est.implicit_count, 3);
    let mle = est.mle.unwrap();
    assert!(mle.is_tied());
    assert_eq!(mle.candidates.len(), 3);
    for c in &mle.candidates {
        let mut q = c.q.clone();
        q.sort_by(f64::total_cmp);
        let expect = [0.125, 0.125, 0.125, 0.125, 0.25, 0.25];
        assert!(q.iter().zip(expect).all(|(a, b)| (a - b).abs() <= 1e-9), "{q:?}");
    }
    // the uniform point is off the model: p12 p34 - p13 p24 + p14 p23 = 0 cannot hold with all |p_ij| equal
    let relation_holds = (0..8u32).any(|s| {
        let e = |k: u32| if s >> k & 1 == 1 { -1.0f64 } else { 1.0 };
        (e(0) - e(1) + e(2)).abs() < 1e-12
    });
    assert!(!relation_holds);
}

#[test]
fn implicit_fibers_have_full_size() {
    let u = random_counts(5, 1000, 4);
    let est = estimate(&u, &PipelineOptions::default());
    let fibers = group_fibers(est.solutions.as_slice());
    assert_eq!(fibers.len(), 12);
    for f in &fibers {
        assert_eq!(f.members.len(), 16);
        let q0 = to_implicit(&est.solutions.as_slice()[f.members[0]]).unwrap();
        for &k in &f.members {
            assert!(to_implicit(&est.solutions.as_slice()[k]).unwrap().tv_distance(&q0) <= 1e-10);
        }
    }
}

#[test]
fn every_real_solution_is_a_strict_local_maximum() {
    let u = random_counts(4, 1000, 31);
    let est = estimate(&u, &PipelineOptions::default());
    assert!(est.solutions.iter().all(|s| s.hessian_class == HessianClass::Max));
    let report = verify_counts(4, &u, &est.solutions, 0).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    assert_eq!((report.count, report.count_real, report.implicit_count, report.regions_matched), (24, 24, 3, 24));
}

#[test]
fn n3_mle_is_the_empirical_distribution() {
    let u = DataCounts::new(3, vec![1, 2, 3]).unwrap();
    let est = estimate(&u, &PipelineOptions::default());
    let q = &est.mle.unwrap().implicit.q;
    for (a, b) in q.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
        assert!((a - b).abs() <= 1e-12);
    }
    assert!(select_mle(&est.solutions, &u).is_ok());
}

/// Regions found by sampling random matrices are a subset of the enumeration,
/// and with enough samples all of them turn up for small n.
#[test]
fn regions_agree_with_random_sampling() {
    for n in 3..=5 {
        let regions = enumerate_regions(n, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let mut seen: HashSet<SignVector> = HashSet::new();
        for _ in 0..200_000 {
            let m = MatrixParam::new(
                (0..n - 2).map(|_| rng.random_range(-1.0..1.0f64).tan()).collect(),
                (0..n - 2).map(|_| rng.random_range(-1.0..1.0f64).tan()).collect(),
            )
            .unwrap();
            if let Ok(sv) = sign_vector(&m) {
                seen.insert(sv);
            }
        }
        assert!(seen.is_subset(&regions), "n={n}");
        assert_eq!(seen.len(), regions.len(), "n={n}");
    }
}
