//! Populate the critical fiber over random complex data by monodromy and move
//! it to random integer data, for n = 4, 5 (and 6 with `--n 6`).
//!
//!     cargo run --release --example monodromy_counts -- 6

use std::time::Instant;

use dppmle::dpp::random_counts;
use dppmle::solver::{expected_solution_count, monodromy_solve, solve_at, GradientSystem, TrackerConfig};

fn main() {
    let max_n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let cfg = TrackerConfig::default();
    for n in 4..=max_n {
        let sys = GradientSystem::new(n);
        let target = expected_solution_count(n);
        let t0 = Instant::now();
        let warm = match monodromy_solve(&sys, 42, target, 30, &cfg) {
            Ok(m) => m,
            Err(e) => {
                println!("n={n}: {e}");
                continue;
            }
        };
        let t_mono = t0.elapsed();
        println!(
            "n={n}: monodromy {} solutions, {} loops, {} paths ({} failed) in {:.2?}",
            warm.solutions.len(),
            warm.loops,
            warm.paths_tracked,
            warm.path_failures,
            t_mono
        );
        for seed in 0..3 {
            let u = random_counts(n, 1000, seed);
            let t1 = Instant::now();
            let rep = solve_at(&sys, &u.as_f64(), &warm, &cfg, seed);
            println!(
                "  data seed {seed}: {} solutions, {} real, {} lost, {} retried in {:.2?}",
                rep.solutions.len(),
                rep.count_real(),
                rep.lost_paths,
                rep.retried_paths,
                t1.elapsed()
            );
        }
    }
}
