//! Adding a column: Q_{n+1} is a conic in the new column whose discriminant is
//! Q_n^2. Also evaluates the likelihood for a rank-3 model.

use dppmle::dpp::random_subspace;
use dppmle::model::{self, MatrixParam};

fn main() {
    for n in 3..=6 {
        let raw = random_subspace(2, n - 2, n as u64);
        let m = MatrixParam::new(raw.row(0).iter().copied().collect(), raw.row(1).iter().copied().collect()).unwrap();
        let q = model::plucker(&m).q_n;
        let disc = model::conic_discriminant(&m);
        println!("n = {n}: det A = {disc:.12e}, Q_n^2 = {:.12e}", q * q);
    }

    let block = random_subspace(3, 3, 5);
    let u: Vec<u64> = (1..=20).map(|k| 1 + (7 * k) % 13).collect();
    let minors = model::maximal_minors(&{
        let mut full = nalgebra::DMatrix::<f64>::identity(3, 6);
        full.view_mut((0, 3), (3, 3)).copy_from(&block);
        full
    });
    println!("rank 3, n = 6: {} maximal minors", minors.len());
    println!("log-likelihood {:.6}", model::log_likelihood_general_d(&block, &u).unwrap());
}
