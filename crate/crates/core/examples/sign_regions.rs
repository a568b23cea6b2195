//! Enumerate the sign patterns of the minors over the real parameter space,
//! one per region cut out by the hypersurfaces p_ij = 0.

use dppmle::analysis::enumerate_regions;
use dppmle::solver::expected_solution_count;

fn main() {
    for n in 3..=7 {
        let regions = enumerate_regions(n, 0).unwrap();
        println!("n = {n}: {} regions (2^(n-2) (n-1)! = {})", regions.len(), expected_solution_count(n));
        if n == 3 {
            let mut signs: Vec<Vec<i8>> = regions.iter().map(|s| s.signs()).collect();
            signs.sort();
            for s in signs {
                println!("    (p13, p23) signs {s:?}");
            }
        }
    }
}
