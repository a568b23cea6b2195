//! Build a projection kernel from a 2 x n matrix, list the subset
//! probabilities, and draw synthetic counts.
//!
//!     cargo run --example dpp_sampling -- 2000

use dppmle::dpp::{dpp_distribution, projection_from_rows, sample_counts};
use dppmle::io::counts_to_json;
use dppmle::pairs::pairs;
use nalgebra::DMatrix;

fn main() {
    let samples: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1000);
    let m = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 1.0, 2.0, 0.0, 1.0, 3.0, -1.0]);
    let kernel = projection_from_rows(&m).unwrap();
    println!("kernel P = {:.4}", kernel.matrix());
    let dist = dpp_distribution(&kernel).unwrap();
    for ((i, j), p) in pairs(4).into_iter().zip(&dist.probs) {
        println!("  Pr[{{{i},{j}}}] = {p:.6}");
    }
    println!("  total = {:.12}", dist.probs.iter().sum::<f64>());

    let s = sample_counts(&kernel, samples, 7).unwrap();
    if !s.is_generic() {
        println!("warning: pairs {:?} never observed", s.zero_pairs);
    }
    print!("{}", counts_to_json(&s.counts));
}
