use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::linalg::{l2_norm, sup_norm};
use super::solutions::{Solution, SolutionSet};
use super::system::GradientSystem;
use super::tracker::{newton_refine, track_path, ParameterPath};
use super::TrackerConfig;
use crate::error::SolverError;

/// Paths tracked per parallel batch before results are merged.
const BATCH: usize = 256;

/// A start pair `F(z0; u0) = 0` with generic complex parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct StartPair {
    pub u0: Vec<Complex64>,
    pub z0: Vec<Complex64>,
}

pub(crate) fn random_complex_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

pub(crate) fn random_unimodular(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

fn rescale(v: &mut [Complex64], norm: f64) {
    let s = norm / l2_norm(v);
    v.iter_mut().for_each(|x| *x *= s);
}

/// Draw a random point `z0` and choose parameters `u0` in the null space of
/// `A(z0)`, so that `F(z0; u0) = A(z0) u0 = 0` by construction.
pub fn seed_solution(n: usize, seed: u64) -> Result<StartPair, SolverError> {
    let sys = GradientSystem::new(n);
    let (m, np) = (sys.arity(), sys.num_params());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z0: Vec<Complex64> = (0..m)
        .map(|_| {
            let r = rng.random_range(0.5..=1.5);
            Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let a = DMatrix::from_row_slice(m, np, &sys.coefficient_matrix(&z0)?);
    let sv = a.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-10 * smax) {
        return Err(SolverError::SeedFailure(format!(
            "coefficient matrix is rank ambiguous (singular values {smin:e} / {smax:e})"
        )));
    }
    let ah = a.adjoint();
    let gram = (&a * &ah).lu();
    let mut u = nalgebra::DVector::from_vec(random_complex_vec(&mut rng, np));
    // project onto ker A twice; the second pass removes rounding residue
    for _ in 0..2 {
        let y = gram
            .solve(&(&a * &u))
            .ok_or_else(|| SolverError::SeedFailure("singular Gram matrix".into()))?;
        u -= &ah * y;
    }
    let mut u0: Vec<Complex64> = u.iter().copied().collect();
    rescale(&mut u0, np as f64);
    let res = sup_norm(&sys.residual(&z0, &u0)?);
    if !(res <= 1e-12) {
        return Err(SolverError::SeedFailure(format!("start residual {res:e} too large")));
    }
    Ok(StartPair { u0, z0 })
}

/// A populated fiber over the complex start parameters `u0`.
#[derive(Debug, Clone)]
pub struct Monodromy {
    pub u0: Vec<Complex64>,
    pub solutions: SolutionSet,
    pub loops: usize,
    pub paths_tracked: usize,
    pub path_failures: usize,
}

/// Monodromy stalled before reaching the target count. The partial fiber is kept.
#[derive(Debug, Clone, thiserror::Error)]
#[error("monodromy stalled with {found} of {target} solutions", found = partial.solutions.len())]
pub struct IncompleteSet {
    pub partial: Monodromy,
    pub target: usize,
}

struct Loop {
    path: ParameterPath,
}

/// Populate the solution set over a random complex parameter by monodromy.
///
/// Triangle loops `u0 -> g1 -> g2 -> u0` are added one at a time. Every
/// known solution is tracked once around every loop; new endpoints are
/// queued for all loops. A loop whose closure adds nothing counts towards
/// the stall limit. Results do not depend on the number of worker threads.
pub fn monodromy_solve(
    sys: &GradientSystem,
    seed: u64,
    target_count: usize,
    stall_limit: usize,
    cfg: &TrackerConfig,
) -> Result<Monodromy, IncompleteSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f_6e6f_646f_6d79);
    let mut attempt = 0u64;
    let (start, z0) = loop {
        let s = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        attempt += 1;
        if let Ok(pair) = seed_solution(sys.n(), s) {
            if let Ok(r) = newton_refine(sys, &pair.z0, &pair.u0, cfg) {
                break (pair, r);
            }
        }
        assert!(attempt < 100, "could not draw a start pair");
    };
    let u0 = start.u0;
    let radius = l2_norm(&u0);
    let mut solutions = SolutionSet::new(cfg.dedup_tol);
    solutions.insert(Solution::new(z0.point, z0.residual));

    let mut loops: Vec<Loop> = Vec::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let (mut paths_tracked, mut path_failures) = (0, 0);
    let (mut stall, mut found_since_loop) = (0usize, 0usize);

    while solutions.len() < target_count {
        if queue.is_empty() {
            if !loops.is_empty() {
                if found_since_loop == 0 {
                    stall += 1;
                } else {
                    stall = 0;
                }
            }
            if stall >= stall_limit {
                break;
            }
            found_since_loop = 0;
            let mut g1 = random_complex_vec(&mut rng, u0.len());
            let mut g2 = random_complex_vec(&mut rng, u0.len());
            rescale(&mut g1, radius);
            rescale(&mut g2, radius);
            let id = loops.len();
            loops.push(Loop { path: ParameterPath::through(vec![u0.clone(), g1, g2, u0.clone()]) });
            queue.extend((0..solutions.len()).map(|s| (s, id)));
        }
        let batch: Vec<(usize, usize)> = queue.drain(..queue.len().min(BATCH)).collect();
        let results: Vec<_> = batch
            .par_iter()
            .map(|&(s, l)| track_path(sys, &solutions.get(s).point, &loops[l].path, cfg))
            .collect();
        paths_tracked += batch.len();
        for res in results {
            match res {
                Ok(r) => {
                    if let Some(idx) = solutions.insert(Solution::new(r.point, r.residual)) {
                        found_since_loop += 1;
                        queue.extend((0..loops.len()).map(|l| (idx, l)));
                    }
                }
                Err(_) => path_failures += 1,
            }
        }
    }

    let out = Monodromy { u0, solutions, loops: loops.len(), paths_tracked, path_failures };
    if out.solutions.len() >= target_count {
        Ok(out)
    } else {
        Err(IncompleteSet { partial: out, target: target_count })
    }
}
