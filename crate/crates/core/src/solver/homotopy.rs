use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::linalg::l2_norm;
use super::monodromy::{random_unimodular, Monodromy};
use super::solutions::{relative_distance, Solution, SolutionSet};
use super::system::GradientSystem;
use super::tracker::{newton_refine, real_newton_refine, track_path, ParameterPath, Refinement};
use super::TrackerConfig;
use crate::error::SolverError;

/// Largest relative move accepted from the real polish.
const POLISH_DRIFT: f64 = 1e-6;
/// Retries with a fresh detour for failed or colliding paths.
const RETRIES: usize = 1;

/// Result of moving a monodromy fiber to real data.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solutions: SolutionSet,
    pub start_count: usize,
    /// Start solutions whose path failed or collided even after retrying.
    pub lost_paths: usize,
    pub retried_paths: usize,
    /// Complex solutions whose conjugate is missing from the set.
    pub unpaired_complex: usize,
}

impl SolveReport {
    pub fn count_real(&self) -> usize {
        self.solutions.iter().filter(|s| s.is_real).count()
    }
}

/// Parameter homotopy from the start fiber to real data `u_target`.
///
/// Since the residual is linear in the parameters, the target fiber equals the
/// fiber over `gamma * u_target` for any nonzero `gamma`; each path runs
/// from `u0` to `gamma * u_target` with a random unimodular `gamma`, keeping
/// the segment off the real discriminant. Endpoints are refined at the real
/// target, polished to real points when nearly real, deduplicated and sorted.
pub fn solve_at(
    sys: &GradientSystem,
    u_target: &[f64],
    warmstart: &Monodromy,
    cfg: &TrackerConfig,
    seed: u64,
) -> SolveReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x686f_6d6f_746f_7079);
    let radius = l2_norm(&warmstart.u0);
    let target_norm = u_target.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target: Vec<Complex64> =
        u_target.iter().map(|&v| Complex64::new(v * radius / target_norm, 0.0)).collect();
    let starts: Vec<&[Complex64]> = warmstart.solutions.iter().map(|s| s.point.as_slice()).collect();

    let mut set = SolutionSet::new(cfg.dedup_tol);
    let mut pending: Vec<usize> = (0..starts.len()).collect();
    let mut retried = 0;
    for round in 0..=RETRIES {
        if pending.is_empty() {
            break;
        }
        if round > 0 {
            retried += pending.len();
        }
        let gamma = random_unimodular(&mut rng);
        let path = ParameterPath::straight(
            warmstart.u0.clone(),
            target.iter().map(|v| v * gamma).collect(),
        );
        let results: Vec<_> = pending
            .par_iter()
            .map(|&k| {
                track_path(sys, starts[k], &path, cfg)
                    .and_then(|r| finalize(sys, &r.point, u_target, cfg))
            })
            .collect();
        let mut holder: Vec<Option<usize>> = vec![None; set.len()];
        let mut next = Vec::new();
        for (&k, res) in pending.iter().zip(results) {
            match res {
                Ok(sol) => {
                    if let Some(existing) = set.find(&sol.point) {
                        next.push(k);
                        if let Some(Some(h)) = holder.get(existing) {
                            next.push(*h);
                        }
                    } else {
                        let idx = set.insert(sol).expect("not a duplicate");
                        holder.resize(idx + 1, None);
                        holder[idx] = Some(k);
                    }
                }
                Err(_) => next.push(k),
            }
        }
        next.sort_unstable();
        next.dedup();
        pending = next;
    }
    set.sort_canonical();
    let unpaired_complex = set
        .iter()
        .filter(|s| !s.is_real)
        .filter(|s| {
            let conj: Vec<Complex64> = s.point.iter().map(|z| z.conj()).collect();
            set.find(&conj).is_none()
        })
        .count();
    SolveReport {
        start_count: starts.len(),
        lost_paths: starts.len().saturating_sub(set.len()),
        retried_paths: retried,
        unpaired_complex,
        solutions: set,
    }
}

/// Refine at the real target and decide reality: a point is real when every
/// imaginary part is below `reality_tol` relative to `1 + |re|`.
fn finalize(
    sys: &GradientSystem,
    z: &[Complex64],
    u: &[f64],
    cfg: &TrackerConfig,
) -> Result<Solution, SolverError> {
    let uc: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let Refinement { point, residual, .. } = newton_refine(sys, z, &uc, cfg)?;
    let im = point.iter().map(|v| v.im.abs() / (1.0 + v.re.abs())).fold(0.0, f64::max);
    if im <= cfg.reality_tol {
        let re: Vec<f64> = point.iter().map(|v| v.re).collect();
        let mut sol = match real_newton_refine(sys, &re, u, cfg) {
            Ok(r) if relative_distance(&r.point, &point) <= POLISH_DRIFT => Solution::new(r.point, r.residual),
            _ => Solution::new(re.iter().map(|&v| Complex64::new(v, 0.0)).collect(), residual),
        };
        sol.is_real = true;
        return Ok(sol);
    }
    Ok(Solution::new(point, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::monodromy_solve;

    #[test]
    fn n3_lands_on_closed_form() {
        let sys = GradientSystem::new(3);
        let cfg = TrackerConfig::default();
        let warm = monodromy_solve(&sys, 2, 4, 30, &cfg).unwrap();
        let rep = solve_at(&sys, &[1.0, 2.0, 3.0], &warm, &cfg, 9);
        assert_eq!(rep.solutions.len(), 4);
        assert_eq!(rep.count_real(), 4);
        for s in &rep.solutions {
            assert!((s.point[0].re.abs() - 3f64.sqrt()).abs() < 1e-10);
            assert!((s.point[1].re.abs() - 2f64.sqrt()).abs() < 1e-10);
        }
        assert!(rep.solutions.is_conjugation_closed());
    }

    #[test]
    fn reality_tolerance_decides_classification() {
        let sys = GradientSystem::new(3);
        let cfg = TrackerConfig::default();
        let warm = monodromy_solve(&sys, 2, 4, 30, &cfg).unwrap();
        let strict = TrackerConfig { reality_tol: 1e-300, ..cfg.clone() };
        let rep = solve_at(&sys, &[1.0, 2.0, 3.0], &warm, &strict, 9);
        assert_eq!(rep.solutions.len(), 4);
        assert!(rep.count_real() < 4);
    }
}
