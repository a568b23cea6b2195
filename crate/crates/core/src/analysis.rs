//! Statistical conclusions drawn from a solved critical fiber: implicit
//! images, the MLE, second-order classification, and the combinatorics of
//! sign vectors that account for every real critical point.

use std::collections::{BTreeSet, HashSet};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::ModelError;
use crate::model::{self, DataCounts, MatrixParam};
use crate::pairs::num_pairs;
use crate::solver::{expected_solution_count, HessianClass, Solution, SolutionSet};

/// Total-variation tolerance when identifying implicit points.
pub const IMPLICIT_TV_TOL: f64 = 1e-8;
/// Eigenvalues closer to zero than this leave the Hessian unclassified.
pub const EIGEN_ZERO_TOL: f64 = 1e-7;
/// Relative tolerance for likelihood ties between distinct implicit points.
pub const TIE_TOL: f64 = 1e-9;

/// ML degree of `sGr(2, n)`, `(n-1)!/2`.
pub fn ml_degree(n: usize) -> usize {
    (1..n).product::<usize>() / 2
}

/// A point of the implicit model: `q_ij = p_ij^2 / Q_n`, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicitPoint {
    pub n: usize,
    pub q: Vec<f64>,
}

impl ImplicitPoint {
    pub fn from_matrix(m: &MatrixParam<f64>) -> Self {
        let pv = model::plucker(m);
        Self { n: m.n(), q: pv.p.iter().map(|p| p * p / pv.q_n).collect() }
    }

    pub fn tv_distance(&self, other: &Self) -> f64 {
        0.5 * self.q.iter().zip(&other.q).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

fn n_of(sol: &Solution) -> usize {
    sol.point.len() / 2 + 2
}

fn real_matrix(sol: &Solution) -> Result<MatrixParam<f64>, ModelError> {
    let re = sol
        .real_point()
        .ok_or_else(|| ModelError::Domain("solution is not real".into()))?;
    MatrixParam::from_point(n_of(sol), &re)
}

pub fn to_implicit(sol: &Solution) -> Result<ImplicitPoint, ModelError> {
    Ok(ImplicitPoint::from_matrix(&real_matrix(sol)?))
}

/// Real solutions sharing one implicit image.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub implicit: ImplicitPoint,
    /// Indices into the solution slice.
    pub members: Vec<usize>,
}

/// Group the real solutions by implicit image at [`IMPLICIT_TV_TOL`].
pub fn group_fibers(solutions: &[Solution]) -> Vec<Fiber> {
    let mut fibers: Vec<Fiber> = Vec::new();
    for (k, sol) in solutions.iter().enumerate() {
        let Ok(q) = to_implicit(sol) else { continue };
        match fibers.iter_mut().find(|f| f.implicit.tv_distance(&q) <= IMPLICIT_TV_TOL) {
            Some(f) => f.members.push(k),
            None => fibers.push(Fiber { implicit: q, members: vec![k] }),
        }
    }
    fibers
}

/// The maximum likelihood estimate and the evidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub implicit: ImplicitPoint,
    pub solution: Solution,
    pub loglik: f64,
    /// Every distinct implicit point attaining the maximum up to [`TIE_TOL`];
    /// holds just the MLE for generic data.
    pub candidates: Vec<ImplicitPoint>,
}

impl MleResult {
    pub fn is_tied(&self) -> bool {
        self.candidates.len() > 1
    }
}

/// Evaluate the parametric log-likelihood at every real solution and return
/// the maximizer together with its implicit image.
pub fn select_mle(solutions: &SolutionSet, u: &DataCounts) -> Result<MleResult, ModelError> {
    let mut scored: Vec<(f64, &Solution)> = Vec::new();
    for sol in solutions.iter().filter(|s| s.is_real) {
        let l = model::log_likelihood_parametric(&real_matrix(sol)?, u)?;
        scored.push((l, sol));
    }
    let (best, best_sol) = scored
        .iter()
        .copied()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(ModelError::NoRealSolution)?;
    let tol = TIE_TOL * best.abs().max(1.0);
    let mut candidates: Vec<ImplicitPoint> = Vec::new();
    for (l, sol) in &scored {
        if best - l <= tol {
            let q = to_implicit(sol)?;
            if !candidates.iter().any(|c| c.tv_distance(&q) <= IMPLICIT_TV_TOL) {
                candidates.push(q);
            }
        }
    }
    let mut solution = best_sol.clone();
    solution.loglik = Some(best);
    Ok(MleResult { implicit: to_implicit(best_sol)?, solution, loglik: best, candidates })
}

/// Eigenvalues (ascending) of the finite-difference Hessian at a real point.
pub fn hessian_eigenvalues(m: &MatrixParam<f64>, u: &DataCounts) -> Result<Vec<f64>, ModelError> {
    let h = model::hessian(m, u)?;
    let mut eig: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn classify_eigenvalues(eig: &[f64]) -> HessianClass {
    if eig.iter().any(|e| e.abs() <= EIGEN_ZERO_TOL || !e.is_finite()) {
        HessianClass::Unknown
    } else if eig.iter().all(|&e| e < 0.0) {
        HessianClass::Max
    } else if eig.iter().all(|&e| e > 0.0) {
        HessianClass::Min
    } else {
        HessianClass::Saddle
    }
}

/// Set `hessian_class` and `loglik` for every real solution. Complex ones
/// stay `Unknown`.
pub fn classify_hessians(solutions: SolutionSet, u: &DataCounts) -> SolutionSet {
    let classes: Vec<(HessianClass, Option<f64>)> = solutions
        .as_slice()
        .par_iter()
        .map(|sol| match real_matrix(sol) {
            Ok(m) => {
                let class = hessian_eigenvalues(&m, u)
                    .map(|e| classify_eigenvalues(&e))
                    .unwrap_or(HessianClass::Unknown);
                (class, model::log_likelihood_parametric(&m, u).ok())
            }
            Err(_) => (HessianClass::Unknown, None),
        })
        .collect();
    let mut out = solutions;
    for (k, (class, l)) in classes.into_iter().enumerate() {
        let sol = out.get_mut(k);
        sol.hessian_class = class;
        sol.loglik = l;
    }
    out
}

/// Signs of all minors `p_ij` except `p_12 = 1`, packed one bit per pair
/// (bit set means negative), in lexicographic pair order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector {
    n: usize,
    bits: u64,
}

impl SignVector {
    pub fn from_signs(n: usize, signs: &[i8]) -> Self {
        assert_eq!(signs.len(), num_pairs(n) - 1);
        let bits = signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .fold(0u64, |b, (k, _)| b | (1 << k));
        Self { n, bits }
    }

    /// Entries `+1`/`-1` for pairs `13, 14, ..., (n-1)n`.
    pub fn signs(&self) -> Vec<i8> {
        (0..num_pairs(self.n) - 1)
            .map(|k| if self.bits >> k & 1 == 1 { -1 } else { 1 })
            .collect()
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }
}

pub fn sign_vector(m: &MatrixParam<f64>) -> Result<SignVector, ModelError> {
    if !model::in_domain(m) {
        return Err(ModelError::Domain("a minor vanishes".into()));
    }
    let pv = model::plucker(m);
    let signs: Vec<i8> = pv.p[1..].iter().map(|&p| if p < 0.0 { -1 } else { 1 }).collect();
    Ok(SignVector::from_signs(m.n(), &signs))
}

/// Sign vectors of all regions of the real parameter space minus the
/// hypersurfaces `p_ij = 0`.
///
/// For each `k` in `2..=n` a base matrix has columns `3..=k` in the second
/// quadrant and the rest in the first, with generic magnitudes drawn from a
/// seeded generator. Every permutation of columns `3..=n` and every pattern of
/// column sign flips is applied and the resulting sign vectors collected.
pub fn enumerate_regions(n: usize, seed: u64) -> Result<HashSet<SignVector>, ModelError> {
    if !(3..=8).contains(&n) {
        return Err(ModelError::Dimension(format!("region enumeration needs 3 <= n <= 8, got {n}")));
    }
    let expected = expected_solution_count(n);
    let mut last = 0;
    for attempt in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let bases: Vec<MatrixParam<f64>> = (2..=n)
            .map(|k| {
                let xs = (3..=n)
                    .map(|i| {
                        let v: f64 = rng.random_range(0.1..10.0);
                        if i <= k { -v } else { v }
                    })
                    .collect();
                let ys = (3..=n).map(|_| rng.random_range(0.1..10.0)).collect();
                MatrixParam::new(xs, ys).expect("n >= 3")
            })
            .collect();
        if !bases.iter().all(model::in_domain) {
            continue;
        }
        let per_base: Vec<Vec<SignVector>> = bases
            .par_iter()
            .map(|base| {
                let mut out = Vec::new();
                for perm in (0..n - 2).permutations(n - 2) {
                    for flips in 0u32..(1 << (n - 2)) {
                        let mut xs = Vec::with_capacity(n - 2);
                        let mut ys = Vec::with_capacity(n - 2);
                        for (slot, &src) in perm.iter().enumerate() {
                            let s = if flips >> slot & 1 == 1 { -1.0 } else { 1.0 };
                            xs.push(s * base.xs()[src]);
                            ys.push(s * base.ys()[src]);
                        }
                        let m = MatrixParam::new(xs, ys).expect("n >= 3");
                        if let Ok(sv) = sign_vector(&m) {
                            out.push(sv);
                        }
                    }
                }
                out
            })
            .collect();
        let set: HashSet<SignVector> = per_base.into_iter().flatten().collect();
        if set.len() == expected {
            return Ok(set);
        }
        last = set.len();
    }
    Err(ModelError::DegenerateInstance(format!(
        "found {last} sign vectors, expected {expected}"
    )))
}

/// Outcome of checking a solved fiber against the exact counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub expected_count: usize,
    pub count: usize,
    pub count_real: usize,
    pub expected_implicit: usize,
    pub implicit_count: usize,
    /// Sizes of the implicit fibers, each expected to be `2^(n-1)`.
    pub fiber_sizes: Vec<usize>,
    pub regions_expected: usize,
    pub regions_matched: usize,
    pub count_max: usize,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check (a) the parametric count, (b) reality, (c) the number of implicit
/// images and fiber sizes, (d) the bijection between real solutions and
/// regions, and (e) negative definiteness of every Hessian.
pub fn verify_counts(
    n: usize,
    u: &DataCounts,
    solutions: &SolutionSet,
    region_seed: u64,
) -> Result<VerifyReport, ModelError> {
    let expected_count = expected_solution_count(n);
    let expected_implicit = ml_degree(n);
    let mut failures = Vec::new();

    let count = solutions.len();
    if count != expected_count {
        failures.push(format!("(a) found {count} critical points, expected {expected_count}"));
    }
    let count_real = solutions.iter().filter(|s| s.is_real).count();
    if count_real != count {
        let bad: Vec<String> = solutions
            .iter()
            .filter(|s| !s.is_real)
            .take(3)
            .map(|s| format!("{:?}", s.point))
            .collect();
        failures.push(format!("(b) {} non-real solutions, e.g. {}", count - count_real, bad.join("; ")));
    }

    let fibers = group_fibers(solutions.as_slice());
    let implicit_count = fibers.len();
    if implicit_count != expected_implicit {
        failures.push(format!("(c) {implicit_count} implicit points, expected {expected_implicit}"));
    }
    let fiber_sizes: Vec<usize> = fibers.iter().map(|f| f.members.len()).collect();
    let fiber_expected = 1usize << (n - 1);
    if let Some(bad) = fiber_sizes.iter().find(|&&s| s != fiber_expected) {
        failures.push(format!("(c) implicit fiber of size {bad}, expected {fiber_expected}"));
    }

    let mut seen = BTreeSet::new();
    let mut duplicate_signs = 0;
    for sol in solutions.iter().filter(|s| s.is_real) {
        match real_matrix(sol).and_then(|m| sign_vector(&m)) {
            Ok(sv) => {
                if !seen.insert(sv) {
                    duplicate_signs += 1;
                }
            }
            Err(e) => failures.push(format!("(d) sign vector unavailable: {e}")),
        }
    }
    if duplicate_signs > 0 {
        failures.push(format!("(d) {duplicate_signs} real solutions share a sign vector"));
    }
    let regions = enumerate_regions(n, region_seed)?;
    let regions_matched = seen.iter().filter(|s| regions.contains(s)).count();
    if regions_matched != regions.len() || seen.len() != regions.len() {
        failures.push(format!(
            "(d) {} solution sign vectors, {} regions, {regions_matched} matched",
            seen.len(),
            regions.len()
        ));
    }

    let mut count_max = 0;
    for sol in solutions.iter().filter(|s| s.is_real) {
        let m = real_matrix(sol)?;
        let eig = hessian_eigenvalues(&m, u)?;
        if classify_eigenvalues(&eig) == HessianClass::Max {
            count_max += 1;
        } else {
            failures.push(format!("(e) Hessian eigenvalues {eig:?} at {:?}", m.to_point()));
        }
    }

    Ok(VerifyReport {
        n,
        expected_count,
        count,
        count_real,
        expected_implicit,
        implicit_count,
        fiber_sizes,
        regions_expected: expected_count,
        regions_matched,
        count_max,
        failures,
    })
}
