//! Dense complex LU with partial pivoting for the small square systems of
//! the tracker.

use num_complex::Complex64;

pub(crate) struct Lu {
    dim: usize,
    a: Vec<Complex64>,
    piv: Vec<usize>,
    /// Ratio of the largest to the smallest pivot modulus.
    pub cond: f64,
}

impl Lu {
    pub fn factor(mut a: Vec<Complex64>, dim: usize) -> Self {
        debug_assert_eq!(a.len(), dim * dim);
        let mut piv: Vec<usize> = (0..dim).collect();
        let (mut pmax, mut pmin) = (0.0f64, f64::INFINITY);
        for k in 0..dim {
            let (mut best, mut best_val) = (k, a[k * dim + k].norm());
            for r in (k + 1)..dim {
                let v = a[r * dim + k].norm();
                if v > best_val {
                    best = r;
                    best_val = v;
                }
            }
            pmax = pmax.max(best_val);
            pmin = pmin.min(best_val);
            if best_val == 0.0 {
                continue;
            }
            if best != k {
                for c in 0..dim {
                    a.swap(k * dim + c, best * dim + c);
                }
                piv.swap(k, best);
            }
            let inv = a[k * dim + k].inv();
            for r in (k + 1)..dim {
                let f = a[r * dim + k] * inv;
                a[r * dim + k] = f;
                if f.norm_sqr() != 0.0 {
                    for c in (k + 1)..dim {
                        let v = a[k * dim + c];
                        a[r * dim + c] -= f * v;
                    }
                }
            }
        }
        let cond = if pmin > 0.0 { pmax / pmin } else { f64::INFINITY };
        Self { dim, a, piv, cond }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for r in 0..dim {
            let mut s = x[r];
            for c in 0..r {
                s -= self.a[r * dim + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..dim).rev() {
            let mut s = x[r];
            for c in (r + 1)..dim {
                s -= self.a[r * dim + c] * x[c];
            }
            x[r] = s / self.a[r * dim + r];
        }
        x
    }
}

pub(crate) fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
