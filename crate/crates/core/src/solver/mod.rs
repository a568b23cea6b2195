//! Numerical solving of the rational critical system.
//!
//! The pipeline is: [`seed_solution`] draws a random start pair `(u0, z0)`,
//! [`monodromy_solve`] populates the whole fiber over the complex parameter
//! `u0` by tracking known solutions around random loops, and [`solve_at`]
//! moves that fiber to real data with a parameter homotopy.

mod homotopy;
mod linalg;
mod monodromy;
mod solutions;
mod system;
mod tracker;

pub use homotopy::{solve_at, SolveReport};
pub use monodromy::{monodromy_solve, seed_solution, IncompleteSet, Monodromy, StartPair};
pub use solutions::{HessianClass, Solution, SolutionSet};
pub use system::GradientSystem;
pub use tracker::{newton_refine, real_newton_refine, track_path, ParameterPath, Refinement};

/// Knobs of the predictor-corrector tracker and of solution bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub step_init: f64,
    pub step_min: f64,
    pub newton_tol: f64,
    pub max_corrector_iters: usize,
    pub max_steps: usize,
    pub dedup_tol: f64,
    pub reality_tol: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            step_init: 0.1,
            step_min: 1e-7,
            newton_tol: 1e-11,
            max_corrector_iters: 3,
            max_steps: 10_000,
            dedup_tol: 1e-6,
            reality_tol: 1e-8,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("step_init", self.step_init),
            ("step_min", self.step_min),
            ("newton_tol", self.newton_tol),
            ("dedup_tol", self.dedup_tol),
            ("reality_tol", self.reality_tol),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(format!("{name} must be positive, got {v}"));
        }
        if self.max_corrector_iters == 0 || self.max_steps == 0 {
            return Err("iteration limits must be positive".into());
        }
        if self.step_min >= self.step_init {
            return Err("step_min must be smaller than step_init".into());
        }
        Ok(())
    }
}

/// Expected number of parametric critical points, `2^(n-2) (n-1)!`.
pub fn expected_solution_count(n: usize) -> usize {
    (1..n).product::<usize>() << (n - 2)
}
