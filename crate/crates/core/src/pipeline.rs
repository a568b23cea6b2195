//! End-to-end estimation: monodromy start fiber, parameter homotopy to the
//! data, Hessian classification and MLE selection.

use std::time::Instant;

use crate::analysis::{classify_hessians, group_fibers, select_mle, MleResult};
use crate::model::DataCounts;
use crate::solver::{
    expected_solution_count, monodromy_solve, solve_at, GradientSystem, Monodromy, SolutionSet,
    TrackerConfig,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub seed: u64,
    /// Defaults to `2^(n-2) (n-1)!`.
    pub target_count: Option<usize>,
    pub stall_limit: usize,
    pub tracker: TrackerConfig,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { seed: 42, target_count: None, stall_limit: 30, tracker: TrackerConfig::default() }
    }
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageTimings {
    pub monodromy_ms: f64,
    pub homotopy_ms: f64,
    pub analysis_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Estimate {
    pub u: DataCounts,
    pub target_count: usize,
    /// Classified solutions at the data, canonically sorted.
    pub solutions: SolutionSet,
    pub implicit_count: usize,
    pub mle: Option<MleResult>,
    pub monodromy_complete: bool,
    pub lost_paths: usize,
    pub timings: StageTimings,
}

impl Estimate {
    pub fn count_real(&self) -> usize {
        self.solutions.iter().filter(|s| s.is_real).count()
    }

    /// All expected critical points were found.
    pub fn is_complete(&self) -> bool {
        self.monodromy_complete && self.solutions.len() >= self.target_count
    }
}

fn target_for(n: usize, opts: &PipelineOptions) -> usize {
    opts.target_count.unwrap_or_else(|| expected_solution_count(n))
}

/// Populate the start fiber for `n`. Returns the fiber and whether it reached
/// the target count.
pub fn start_fiber(n: usize, opts: &PipelineOptions) -> (Monodromy, bool) {
    let sys = GradientSystem::new(n);
    match monodromy_solve(&sys, opts.seed, target_for(n, opts), opts.stall_limit, &opts.tracker) {
        Ok(m) => (m, true),
        Err(e) => (e.partial, false),
    }
}

/// Solve at `u` reusing an already populated start fiber.
pub fn estimate_with(warm: &Monodromy, complete: bool, u: &DataCounts, opts: &PipelineOptions) -> Estimate {
    let n = u.n();
    let sys = GradientSystem::new(n);
    let t0 = Instant::now();
    let report = solve_at(&sys, &u.as_f64(), warm, &opts.tracker, opts.seed.wrapping_add(1));
    let homotopy_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let solutions = classify_hessians(report.solutions, u);
    let implicit_count = group_fibers(solutions.as_slice()).len();
    let mle = select_mle(&solutions, u).ok();
    let analysis_ms = t1.elapsed().as_secs_f64() * 1e3;
    Estimate {
        u: u.clone(),
        target_count: target_for(n, opts),
        solutions,
        implicit_count,
        mle,
        monodromy_complete: complete,
        lost_paths: report.lost_paths,
        timings: StageTimings { monodromy_ms: 0.0, homotopy_ms, analysis_ms },
    }
}

/// Full pipeline for one data vector.
pub fn estimate(u: &DataCounts, opts: &PipelineOptions) -> Estimate {
    let t0 = Instant::now();
    let (warm, complete) = start_fiber(u.n(), opts);
    let monodromy_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut est = estimate_with(&warm, complete, u, opts);
    est.timings.monodromy_ms = monodromy_ms;
    est
}
