use num_complex::Complex64;

use crate::error::ModelError;
use crate::model::{coefficient_matrix, critical_system};
use crate::pairs::num_pairs;

/// The square critical system `grad L_u(z) = 0` in the `2(n-2)` free matrix
/// entries, with the `C(n,2)` counts as complex parameters.
///
/// The residual is linear in the parameters: `F(z; u) = A(z) u` where column
/// `ab` of `A(z)` is `grad log(p_ab^2 / Q_n)`. Scaling `u` by a nonzero
/// constant does not move the solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradientSystem {
    n: usize,
}

impl GradientSystem {
    pub fn new(n: usize) -> Self {
        assert!(n >= 3, "need n >= 3");
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of unknowns, equal to the number of equations.
    pub fn arity(&self) -> usize {
        2 * (self.n - 2)
    }

    pub fn num_params(&self) -> usize {
        num_pairs(self.n)
    }

    pub fn residual(&self, z: &[Complex64], u: &[Complex64]) -> Result<Vec<Complex64>, ModelError> {
        Ok(critical_system(self.n, z, u, false)?.0)
    }

    /// Residual and row-major Jacobian.
    pub fn residual_jacobian(
        &self,
        z: &[Complex64],
        u: &[Complex64],
    ) -> Result<(Vec<Complex64>, Vec<Complex64>), ModelError> {
        let (f, j) = critical_system(self.n, z, u, true)?;
        Ok((f, j.expect("jacobian requested")))
    }

    /// Row-major `arity x num_params` matrix `A(z)`.
    pub fn coefficient_matrix(&self, z: &[Complex64]) -> Result<Vec<Complex64>, ModelError> {
        coefficient_matrix(self.n, z)
    }

    /// Sup norm of the residual with the parameters normalized to unit l1 norm.
    pub fn scaled_residual(&self, z: &[Complex64], u: &[Complex64]) -> Result<f64, ModelError> {
        let s: f64 = u.iter().map(|v| v.norm()).sum();
        let un: Vec<Complex64> = u.iter().map(|v| v / s).collect();
        Ok(super::linalg::sup_norm(&self.residual(z, &un)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn residual_is_linear_in_parameters() {
        let sys = GradientSystem::new(5);
        let z: Vec<Complex64> = (0..6).map(|k| c(0.3 + 0.2 * k as f64, 0.1 - 0.05 * k as f64)).collect();
        let u: Vec<Complex64> = (0..10).map(|k| c(1.0 + k as f64, 0.5)).collect();
        let a = sys.coefficient_matrix(&z).unwrap();
        let f = sys.residual(&z, &u).unwrap();
        for r in 0..6 {
            let s: Complex64 = (0..10).map(|k| a[r * 10 + k] * u[k]).sum();
            assert!((s - f[r]).norm() < 1e-12 * (1.0 + f[r].norm()));
        }
    }

    #[test]
    fn jacobian_matches_complex_finite_differences() {
        let sys = GradientSystem::new(4);
        let z = vec![c(0.7, 0.2), c(-1.1, 0.3), c(0.4, -0.6), c(1.3, 0.1)];
        let u: Vec<Complex64> = (0..6).map(|k| c(2.0 + k as f64, -0.3 * k as f64)).collect();
        let (_, jac) = sys.residual_jacobian(&z, &u).unwrap();
        let h = 1e-6;
        for k in 0..4 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let fp = sys.residual(&zp, &u).unwrap();
            let fm = sys.residual(&zm, &u).unwrap();
            for r in 0..4 {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                assert!((fd - jac[r * 4 + k]).norm() < 1e-6 * (1.0 + fd.norm()), "{r},{k}");
            }
        }
    }
}
