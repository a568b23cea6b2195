use dppmle::dpp::{dpp_distribution, projection_from_rows};
use dppmle::model::{self, DataCounts, MatrixParam};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn full(m: &MatrixParam<f64>) -> DMatrix<f64> {
    let n = m.n();
    DMatrix::from_fn(2, n, |r, c| match c {
        0 => (r == 0) as u8 as f64,
        1 => (r == 1) as u8 as f64,
        _ => if r == 0 { m.xs()[c - 2] } else { m.ys()[c - 2] },
    })
}

fn det2(a: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    a[(0, i)] * a[(1, j)] - a[(1, i)] * a[(0, j)]
}

fn matrix_strategy(max_n: usize) -> impl Strategy<Value = MatrixParam<f64>> {
    (3..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(-3.0..3.0f64, n - 2), prop::collection::vec(-3.0..3.0f64, n - 2))
            .prop_map(|(xs, ys)| MatrixParam::new(xs, ys).unwrap())
    })
}

fn counts_for(n: usize) -> impl Strategy<Value = DataCounts> {
    prop::collection::vec(1u64..=1000, n * (n - 1) / 2).prop_map(move |u| DataCounts::new(n, u).unwrap())
}

#[test]
fn plucker_examples() {
    let m = MatrixParam::new(vec![1.0, 2.0], vec![1.0, 3.0]).unwrap();
    let pv = model::plucker(&m);
    assert_eq!(pv.p, vec![1.0, 1.0, 3.0, -1.0, -2.0, 1.0]);
    assert_eq!(pv.q_n, 17.0);
}

#[test]
fn general_d_example() {
    let block = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 1.0]);
    let v = model::log_likelihood_general_d(&block, &[1, 1, 1, 1]).unwrap();
    assert!((v + 4.0 * 4f64.ln()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plucker_matches_determinants(m in matrix_strategy(8)) {
        let a = full(&m);
        let pv = model::plucker(&m);
        let mut k = 0;
        let mut q = 0.0;
        for i in 0..m.n() {
            for j in i + 1..m.n() {
                let d = det2(&a, i, j);
                prop_assert!((pv.p[k] - d).abs() <= 1e-12 * (1.0 + d.abs()));
                q += d * d;
                k += 1;
            }
        }
        prop_assert!((pv.q_n - q).abs() <= 1e-12 * q);
    }

    #[test]
    fn gradient_matches_finite_differences(
        (m, u) in matrix_strategy(7).prop_flat_map(|m| { let n = m.n(); (Just(m), counts_for(n)) })
    ) {
        prop_assume!(model::in_domain_with(&m, 1e-3));
        let g = model::gradient(&m, &u).unwrap();
        let z = m.to_point();
        let h = 1e-6;
        let scale = g.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for k in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let fp = model::log_likelihood_parametric(&MatrixParam::from_point(m.n(), &zp).unwrap(), &u).unwrap();
            let fm = model::log_likelihood_parametric(&MatrixParam::from_point(m.n(), &zm).unwrap(), &u).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            prop_assert!((g[k] - fd).abs() <= 1e-6 * scale, "k={k} {} vs {fd}", g[k]);
        }
    }

    #[test]
    fn sign_flips_and_scaling_keep_likelihood(
        (m, u) in matrix_strategy(6).prop_flat_map(|m| { let n = m.n(); (Just(m), counts_for(n)) }),
        col in 0usize..4
    ) {
        prop_assume!(model::in_domain(&m));
        let l = model::log_likelihood_parametric(&m, &u).unwrap();
        let i = 3 + col % (m.n() - 2);
        let flipped = model::log_likelihood_parametric(&m.flip_column(i), &u).unwrap();
        prop_assert!((l - flipped).abs() <= 1e-10 * l.abs());
        let negated = model::log_likelihood_parametric(&m.negate_xs(), &u).unwrap();
        prop_assert!((l - negated).abs() <= 1e-10 * l.abs());
        let q: Vec<f64> = model::plucker(&m).p.iter().map(|p| p * p).collect();
        let qs: Vec<f64> = q.iter().map(|v| 3.5 * v).collect();
        let li = model::log_likelihood_implicit(&q, &u).unwrap();
        prop_assert!((li - model::log_likelihood_implicit(&qs, &u).unwrap()).abs() <= 1e-10 * li.abs());
        prop_assert!((li - l).abs() <= 1e-9 * l.abs());
    }

    #[test]
    fn hessian_is_symmetric_and_matches_analytic(m in matrix_strategy(6)) {
        prop_assume!(model::in_domain_with(&m, 1e-2));
        let u = dppmle::dpp::random_counts(m.n(), 1000, 3);
        let h = model::hessian(&m, &u).unwrap();
        prop_assert!((&h - h.transpose()).amax() <= 1e-8);
        let ha = model::hessian_analytic(&m, &u).unwrap();
        let scale = ha.amax().max(1.0);
        prop_assert!((&h - &ha).amax() <= 1e-4 * scale, "{}", (&h - &ha).amax());
    }

    #[test]
    fn kernel_probabilities_are_normalized_minors(d in 2usize..=3, extra in 1usize..=5, seed in any::<u64>()) {
        let n = d + extra;
        let m = dppmle::dpp::random_subspace(d, n, seed);
        let dist = dpp_distribution(&projection_from_rows(&m).unwrap()).unwrap();
        prop_assert!((dist.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let minors = model::maximal_minors(&m);
        let total: f64 = minors.iter().map(|v| v * v).sum();
        for (p, mi) in dist.probs.iter().zip(&minors) {
            prop_assert!((p - mi * mi / total).abs() <= 1e-10 * (mi * mi / total).max(1e-3));
        }
    }

    #[test]
    fn discriminant_is_square_of_quadric(m in matrix_strategy(6)) {
        let q = model::plucker(&m).q_n;
        let disc = model::conic_discriminant(&m);
        prop_assert!((disc - q * q).abs() <= 1e-10 * q * q);
        // the quadratic form really is Q_{n+1} in the new column
        let (x, y) = (0.7, -1.3);
        let mut xs = m.xs().to_vec();
        let mut ys = m.ys().to_vec();
        xs.push(x);
        ys.push(y);
        let bigger = model::plucker(&MatrixParam::new(xs, ys).unwrap()).q_n;
        let a = model::conic_matrix(&m);
        let v = nalgebra::Vector3::new(1.0, x, y);
        prop_assert!((v.dot(&(a * v)) - bigger).abs() <= 1e-10 * bigger);
    }

    #[test]
    fn general_d_specializes_to_rank_two(
        (m, u) in matrix_strategy(6).prop_flat_map(|m| { let n = m.n(); (Just(m), counts_for(n)) })
    ) {
        prop_assume!(model::in_domain(&m));
        let block = DMatrix::from_fn(2, m.n() - 2, |r, c| if r == 0 { m.xs()[c] } else { m.ys()[c] });
        let a = model::log_likelihood_general_d(&block, u.counts()).unwrap();
        let b = model::log_likelihood_parametric(&m, &u).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b.abs());
    }
}
