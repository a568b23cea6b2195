//! Check the exact counts, reality and maximality of all critical points for
//! random data, n = 3 up to the given bound.
//!
//!     cargo run --release --example verify_counts -- 6

use dppmle::analysis::verify_counts;
use dppmle::dpp::random_counts;
use dppmle::pipeline::{estimate, PipelineOptions};

fn main() {
    let max_n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let opts = PipelineOptions::default();
    for n in 3..=max_n {
        let u = random_counts(n, 1000, 100 + n as u64);
        let est = estimate(&u, &opts);
        let report = verify_counts(n, &u, &est.solutions, 1).unwrap();
        println!(
            "n = {n}: {}/{} critical points, {} real, {}/{} implicit, {} regions matched, {} maxima: {}",
            report.count,
            report.expected_count,
            report.count_real,
            report.implicit_count,
            report.expected_implicit,
            report.regions_matched,
            report.count_max,
            if report.passed() { "pass" } else { "FAIL" }
        );
        for f in &report.failures {
            println!("    {f}");
        }
    }
}
