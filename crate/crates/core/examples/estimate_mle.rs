//! Sample data from a known rank-2 kernel, compute every critical point of the
//! likelihood and compare the MLE with the truth.
//!
//!     cargo run --release --example estimate_mle -- 5 20000

use dppmle::analysis::ImplicitPoint;
use dppmle::dpp::{dpp_distribution, projection_from_rows, random_subspace, sample_counts};
use dppmle::pipeline::{estimate, PipelineOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let samples: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(20_000);

    let kernel = projection_from_rows(&random_subspace(2, n, 11)).unwrap();
    let truth = dpp_distribution(&kernel).unwrap();
    let data = sample_counts(&kernel, samples, 12).unwrap();
    println!("n = {n}, {samples} samples, counts {:?}", data.counts.counts());

    let est = estimate(&data.counts, &PipelineOptions::default());
    println!(
        "{} critical points ({} real), {} implicit points, monodromy {:.0} ms, homotopy {:.0} ms",
        est.solutions.len(),
        est.count_real(),
        est.implicit_count,
        est.timings.monodromy_ms,
        est.timings.homotopy_ms
    );
    let Some(mle) = est.mle else {
        println!("no real critical point");
        return;
    };
    let truth = ImplicitPoint { n, q: truth.probs };
    println!("MLE log-likelihood {:.6}", mle.loglik);
    println!("{:>6} {:>10} {:>10}", "pair", "true", "MLE");
    for (k, (i, j)) in dppmle::pairs::pairs(n).into_iter().enumerate() {
        println!("{:>6} {:>10.6} {:>10.6}", format!("{i}{j}"), truth.q[k], mle.implicit.q[k]);
    }
    println!("total variation to truth: {:.4}", mle.implicit.tv_distance(&truth));
}
