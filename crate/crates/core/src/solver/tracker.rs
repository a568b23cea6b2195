use num_complex::Complex64;

use super::linalg::{sup_norm, Lu};
use super::system::GradientSystem;
use super::TrackerConfig;
use crate::error::SolverError;

/// Newton iterations allowed in [`newton_refine`].
const MAX_NEWTON_ITERS: usize = 40;
/// Condition estimate beyond which the Jacobian counts as singular.
const MAX_CONDITION: f64 = 1e12;
/// Relative size of the last corrector update for an accepted step.
const CORRECTOR_TOL: f64 = 1e-9;
/// Largest acceptable ratio of consecutive corrector updates.
const CORRECTOR_CONTRACTION: f64 = 0.1;
/// Consecutive accepted steps before the step grows.
const GROWTH_STREAK: usize = 4;
const GROWTH_FACTOR: f64 = 1.5;

/// Outcome of [`newton_refine`].
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub point: Vec<Complex64>,
    /// Scaled residual, see [`GradientSystem::scaled_residual`].
    pub residual: f64,
    pub iterations: usize,
}

/// Piecewise linear path through parameter space, traversed for `t` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath {
    waypoints: Vec<Vec<Complex64>>,
}

impl ParameterPath {
    pub fn straight(from: Vec<Complex64>, to: Vec<Complex64>) -> Self {
        Self { waypoints: vec![from, to] }
    }

    pub fn through(waypoints: Vec<Vec<Complex64>>) -> Self {
        assert!(waypoints.len() >= 2, "a path needs at least two waypoints");
        Self { waypoints }
    }

    pub fn start(&self) -> &[Complex64] {
        &self.waypoints[0]
    }

    pub fn end(&self) -> &[Complex64] {
        self.waypoints.last().expect("nonempty path")
    }

    pub fn reversed(&self) -> Self {
        Self { waypoints: self.waypoints.iter().rev().cloned().collect() }
    }
}

fn pole(_: crate::error::ModelError) -> SolverError {
    SolverError::SingularJacobian(f64::INFINITY)
}

/// Damped Newton iteration on `F(z; u) = 0`.
///
/// Stops once the scaled residual is at most `cfg.newton_tol`, or when the
/// update has stagnated at rounding level. Starting on a pole of the system
/// reports a singular Jacobian.
pub fn newton_refine(
    sys: &GradientSystem,
    z: &[Complex64],
    u: &[Complex64],
    cfg: &TrackerConfig,
) -> Result<Refinement, SolverError> {
    let scale: f64 = u.iter().map(|v| v.norm()).sum();
    let un: Vec<Complex64> = u.iter().map(|v| v / scale).collect();
    let mut z = z.to_vec();
    let mut res = sys.scaled_residual(&z, u).map_err(pole)?;
    if res <= cfg.newton_tol {
        return Ok(Refinement { point: z, residual: res, iterations: 0 });
    }
    for it in 1..=MAX_NEWTON_ITERS {
        let (f, jac) = sys.residual_jacobian(&z, &un).map_err(pole)?;
        let lu = Lu::factor(jac, z.len());
        if !(lu.cond <= MAX_CONDITION) {
            return Err(SolverError::SingularJacobian(lu.cond));
        }
        let delta = lu.solve(&f);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let cand: Vec<Complex64> = z.iter().zip(&delta).map(|(a, d)| a - d * lambda).collect();
            if let Ok(r) = sys.scaled_residual(&cand, u) {
                if r < res {
                    accepted = Some((cand, r));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let step = sup_norm(&delta);
        match accepted {
            Some((cand, r)) => {
                z = cand;
                res = r;
            }
            None if step <= 1e-13 * (1.0 + sup_norm(&z)) => {
                // already at the rounding floor
                return Ok(Refinement { point: z, residual: res, iterations: it });
            }
            None => return Err(SolverError::Diverged(it)),
        }
        if res <= cfg.newton_tol || lambda * step <= 1e-15 * (1.0 + sup_norm(&z)) {
            return Ok(Refinement { point: z, residual: res, iterations: it });
        }
    }
    Err(SolverError::Diverged(MAX_NEWTON_ITERS))
}

/// Newton refinement restricted to real points for real parameters.
pub fn real_newton_refine(
    sys: &GradientSystem,
    z: &[f64],
    u: &[f64],
    cfg: &TrackerConfig,
) -> Result<Refinement, SolverError> {
    // complex arithmetic on real inputs keeps every imaginary part exactly zero
    let zc: Vec<Complex64> = z.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let uc: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut r = newton_refine(sys, &zc, &uc, cfg)?;
    r.point.iter_mut().for_each(|v| v.im = 0.0);
    Ok(r)
}

/// Track a solution of `F(z; path.start) = 0` along `path`, then refine the
/// endpoint at `path.end` to `cfg.newton_tol`.
pub fn track_path(
    sys: &GradientSystem,
    z0: &[Complex64],
    path: &ParameterPath,
    cfg: &TrackerConfig,
) -> Result<Refinement, SolverError> {
    let mut z = z0.to_vec();
    for seg in path.waypoints.windows(2) {
        z = track_segment(sys, &z, &seg[0], &seg[1], cfg)?;
    }
    newton_refine(sys, &z, path.end(), cfg)
}

enum StepFailure {
    Pole,
    Corrector,
}

fn track_segment(
    sys: &GradientSystem,
    z0: &[Complex64],
    u0: &[Complex64],
    u1: &[Complex64],
    cfg: &TrackerConfig,
) -> Result<Vec<Complex64>, SolverError> {
    let du: Vec<Complex64> = u1.iter().zip(u0).map(|(a, b)| a - b).collect();
    if sup_norm(&du) == 0.0 {
        return Ok(z0.to_vec());
    }
    let seg = Segment { sys, u0, du: &du, max_iters: cfg.max_corrector_iters };
    let mut z = z0.to_vec();
    let (mut t, mut h, mut streak) = (0.0f64, cfg.step_init, 0usize);
    for _ in 0..cfg.max_steps {
        if t >= 1.0 {
            return Ok(z);
        }
        let h_eff = h.min(1.0 - t);
        match seg.step(&z, t, h_eff) {
            Ok(next) => {
                z = next;
                t = if 1.0 - (t + h_eff) < 1e-14 { 1.0 } else { t + h_eff };
                streak += 1;
                if streak >= GROWTH_STREAK {
                    h *= GROWTH_FACTOR;
                    streak = 0;
                }
            }
            Err(kind) => {
                h = h_eff * 0.5;
                streak = 0;
                if h < cfg.step_min {
                    return Err(match kind {
                        StepFailure::Pole => SolverError::PoleHit { t },
                        StepFailure::Corrector => SolverError::PathFailure { t },
                    });
                }
            }
        }
    }
    if t >= 1.0 {
        Ok(z)
    } else {
        Err(SolverError::PathFailure { t })
    }
}

struct Segment<'a> {
    sys: &'a GradientSystem,
    u0: &'a [Complex64],
    du: &'a [Complex64],
    max_iters: usize,
}

impl Segment<'_> {
    fn params(&self, t: f64) -> Vec<Complex64> {
        self.u0.iter().zip(self.du).map(|(a, d)| a + d * t).collect()
    }

    /// Davidenko velocity `dz/dt = -J^{-1} dF/dt`.
    fn velocity(&self, z: &[Complex64], t: f64) -> Result<Vec<Complex64>, StepFailure> {
        let (_, jac) = self.sys.residual_jacobian(z, &self.params(t)).map_err(|_| StepFailure::Pole)?;
        let ft = self.sys.residual(z, self.du).map_err(|_| StepFailure::Pole)?;
        let lu = Lu::factor(jac, z.len());
        if !lu.cond.is_finite() {
            return Err(StepFailure::Corrector);
        }
        let mut v = lu.solve(&ft);
        v.iter_mut().for_each(|x| *x = -*x);
        Ok(v)
    }

    fn step(&self, z: &[Complex64], t: f64, h: f64) -> Result<Vec<Complex64>, StepFailure> {
        let axpy = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| x + y * s).collect()
        };
        // RK4 predictor
        let k1 = self.velocity(z, t)?;
        let k2 = self.velocity(&axpy(z, &k1, h / 2.0), t + h / 2.0)?;
        let k3 = self.velocity(&axpy(z, &k2, h / 2.0), t + h / 2.0)?;
        let k4 = self.velocity(&axpy(z, &k3, h), t + h)?;
        let mut pred: Vec<Complex64> = (0..z.len())
            .map(|i| z[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
            .collect();
        if pred.iter().any(|v| !v.is_finite()) {
            return Err(StepFailure::Corrector);
        }
        // Newton corrector at t + h
        let u = self.params(t + h);
        let mut prev = f64::INFINITY;
        for _ in 0..self.max_iters {
            let (f, jac) = self.sys.residual_jacobian(&pred, &u).map_err(|_| StepFailure::Pole)?;
            let lu = Lu::factor(jac, z.len());
            if !lu.cond.is_finite() {
                return Err(StepFailure::Corrector);
            }
            let delta = lu.solve(&f);
            pred.iter_mut().zip(&delta).for_each(|(p, d)| *p -= d);
            let rel = sup_norm(&delta) / (1.0 + sup_norm(&pred));
            if !rel.is_finite() || (prev.is_finite() && rel > CORRECTOR_CONTRACTION * prev) {
                return Err(StepFailure::Corrector);
            }
            if rel <= CORRECTOR_TOL {
                return Ok(pred);
            }
            prev = rel;
        }
        Err(StepFailure::Corrector)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn cu(u: &[f64]) -> Vec<Complex64> {
        u.iter().map(|&v| c(v)).collect()
    }

    #[test]
    fn newton_converges_to_closed_form_n3() {
        let sys = GradientSystem::new(3);
        let cfg = TrackerConfig::default();
        let r = newton_refine(&sys, &[c(1.7), c(1.4)], &cu(&[1.0, 2.0, 3.0]), &cfg).unwrap();
        assert!((r.point[0] - c(3f64.sqrt())).norm() < 1e-10, "{:?}", r.point);
        assert!((r.point[1] - c(2f64.sqrt())).norm() < 1e-10);
        assert!(r.residual <= cfg.newton_tol);
    }

    #[test]
    fn newton_at_solution_is_fixed_point() {
        let sys = GradientSystem::new(3);
        let cfg = TrackerConfig::default();
        let z = [c(3f64.sqrt()), c(2f64.sqrt())];
        let r = newton_refine(&sys, &z, &cu(&[1.0, 2.0, 3.0]), &cfg).unwrap();
        assert!(r.iterations <= 1);
        assert!((r.point[0] - z[0]).norm() < 1e-14 && (r.point[1] - z[1]).norm() < 1e-14);
    }

    #[test]
    fn newton_on_pole_fails_loudly() {
        let sys = GradientSystem::new(3);
        let cfg = TrackerConfig::default();
        let r = newton_refine(&sys, &[c(0.0), c(1.4)], &cu(&[1.0, 2.0, 3.0]), &cfg);
        assert!(
            matches!(r, Err(SolverError::SingularJacobian(_)) | Err(SolverError::Diverged(_))),
            "{r:?}"
        );
    }

    #[test]
    fn constant_path_returns_start() {
        let sys = GradientSystem::new(3);
        let cfg = TrackerConfig::default();
        let u = cu(&[1.0, 2.0, 3.0]);
        let z = [c(3f64.sqrt()), c(-(2f64.sqrt()))];
        let r = track_path(&sys, &z, &ParameterPath::straight(u.clone(), u), &cfg).unwrap();
        assert!((r.point[0] - z[0]).norm() < 1e-11 && (r.point[1] - z[1]).norm() < 1e-11);
    }

    #[test]
    fn tracks_closed_form_between_real_parameters() {
        let sys = GradientSystem::new(3);
        let cfg = TrackerConfig::default();
        let path = ParameterPath::straight(cu(&[1.0, 2.0, 3.0]), cu(&[2.0, 3.0, 5.0]));
        let z0 = [c(3f64.sqrt()), c(2f64.sqrt())];
        let r = track_path(&sys, &z0, &path, &cfg).unwrap();
        assert!((r.point[0] - c((5.0f64 / 2.0).sqrt())).norm() < 1e-8);
        assert!((r.point[1] - c((3.0f64 / 2.0).sqrt())).norm() < 1e-8);
        let back = track_path(&sys, &r.point, &path.reversed(), &cfg).unwrap();
        assert!((back.point[0] - z0[0]).norm() < 1e-7 && (back.point[1] - z0[1]).norm() < 1e-7);
    }
}
