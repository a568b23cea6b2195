//! Minors, the quadric and the likelihood for a small gauge-fixed matrix, and
//! the closed-form critical points for n = 3.

use dppmle::model::{self, DataCounts, MatrixParam};

fn main() {
    let m = MatrixParam::new(vec![1.0, 2.0], vec![3.0, -1.0]).unwrap();
    let pv = model::plucker(&m);
    println!("M = [[1, 0, 1, 2], [0, 1, 3, -1]]");
    for (k, (i, j)) in dppmle::pairs::pairs(4).into_iter().enumerate() {
        println!("  p_{i}{j} = {:>5}", pv.p[k]);
    }
    println!("  Q_4 = {}", pv.q_n);

    let u = DataCounts::new(4, vec![5, 3, 2, 7, 1, 4]).unwrap();
    println!("log-likelihood at M: {:.6}", model::log_likelihood_parametric(&m, &u).unwrap());
    let g = model::gradient(&m, &u).unwrap();
    println!("gradient: {g:.4?}");

    // n = 3: p = (1, y3, -x3), so q = u / sum u forces x3^2 = u23/u12 and y3^2 = u13/u12
    let u = DataCounts::new(3, vec![1, 2, 3]).unwrap();
    let x = (u.get(2, 3) as f64 / u.get(1, 2) as f64).sqrt();
    let y = (u.get(1, 3) as f64 / u.get(1, 2) as f64).sqrt();
    for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let c = MatrixParam::new(vec![sx * x], vec![sy * y]).unwrap();
        let g = model::gradient(&c, &u).unwrap();
        let h = model::hessian(&c, &u).unwrap();
        let eig = h.symmetric_eigenvalues();
        println!(
            "n=3 critical point ({:+.6}, {:+.6}): |grad| = {:.1e}, Hessian eigenvalues {:.4?}",
            sx * x,
            sy * y,
            g.iter().map(|v| v.abs()).fold(0.0, f64::max),
            eig.as_slice()
        );
    }
    let q = dppmle::analysis::ImplicitPoint::from_matrix(&MatrixParam::new(vec![x], vec![y]).unwrap());
    println!("implicit MLE q = {:?} (u / sum u)", q.q);
}
