use num_complex::Complex64;

use super::linalg::sup_norm;

/// Second-order classification of a real critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HessianClass {
    Max,
    Min,
    Saddle,
    Unknown,
}

impl HessianClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            HessianClass::Max => "max",
            HessianClass::Min => "min",
            HessianClass::Saddle => "saddle",
            HessianClass::Unknown => "unknown",
        }
    }
}

/// A refined critical point of the parametric log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Coordinates `(x_3..x_n, y_3..y_n)`.
    pub point: Vec<Complex64>,
    pub residual: f64,
    pub is_real: bool,
    /// Parametric log-likelihood, only for real points at real data.
    pub loglik: Option<f64>,
    pub hessian_class: HessianClass,
}

impl Solution {
    pub fn new(point: Vec<Complex64>, residual: f64) -> Self {
        Self { point, residual, is_real: false, loglik: None, hessian_class: HessianClass::Unknown }
    }

    pub fn real_point(&self) -> Option<Vec<f64>> {
        self.is_real.then(|| self.point.iter().map(|z| z.re).collect())
    }
}

/// Relative sup-norm distance used for deduplication.
pub fn relative_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    diff / 1f64.max(sup_norm(a)).max(sup_norm(b))
}

/// Solutions of one system, deduplicated in relative sup norm.
///
/// Lookup is accelerated by an index sorted on the real part of the first
/// coordinate.
#[derive(Debug, Clone)]
pub struct SolutionSet {
    solutions: Vec<Solution>,
    index: Vec<(f64, usize)>,
    dedup_tol: f64,
}

impl SolutionSet {
    pub fn new(dedup_tol: f64) -> Self {
        Self { solutions: Vec::new(), index: Vec::new(), dedup_tol }
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn dedup_tol(&self) -> f64 {
        self.dedup_tol
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Solution> {
        self.solutions.iter()
    }

    pub fn as_slice(&self) -> &[Solution] {
        &self.solutions
    }

    pub fn get(&self, k: usize) -> &Solution {
        &self.solutions[k]
    }

    pub(crate) fn get_mut(&mut self, k: usize) -> &mut Solution {
        &mut self.solutions[k]
    }

    /// Index of a stored solution within `dedup_tol` of `point`.
    pub fn find(&self, point: &[Complex64]) -> Option<usize> {
        let key = point[0].re;
        let window = 2.0 * self.dedup_tol * 1f64.max(sup_norm(point));
        let lo = self.index.partition_point(|&(k, _)| k < key - window);
        self.index[lo..]
            .iter()
            .take_while(|&&(k, _)| k <= key + window)
            .map(|&(_, idx)| idx)
            .find(|&idx| relative_distance(&self.solutions[idx].point, point) <= self.dedup_tol)
    }

    /// Insert unless a duplicate is present; returns the new index if inserted.
    pub fn insert(&mut self, sol: Solution) -> Option<usize> {
        if self.find(&sol.point).is_some() {
            return None;
        }
        let key = sol.point[0].re;
        let idx = self.solutions.len();
        let pos = self.index.partition_point(|&(k, _)| k < key);
        self.index.insert(pos, (key, idx));
        self.solutions.push(sol);
        Some(idx)
    }

    /// Sort lexicographically by coordinates rounded to the dedup tolerance.
    pub fn sort_canonical(&mut self) {
        let scale = 1.0 / self.dedup_tol;
        let key = |s: &Solution| -> Vec<(i64, i64)> {
            s.point
                .iter()
                .map(|z| ((z.re * scale).round() as i64, (z.im * scale).round() as i64))
                .collect()
        };
        let mut sols = std::mem::take(&mut self.solutions);
        sols.sort_by_cached_key(key);
        self.index.clear();
        for s in sols {
            self.insert(s);
        }
    }

    /// Whether every solution's complex conjugate is also in the set.
    pub fn is_conjugation_closed(&self) -> bool {
        self.solutions.iter().all(|s| {
            let conj: Vec<Complex64> = s.point.iter().map(|z| z.conj()).collect();
            self.find(&conj).is_some()
        })
    }

    pub fn into_vec(self) -> Vec<Solution> {
        self.solutions
    }
}

impl<'a> IntoIterator for &'a SolutionSet {
    type Item = &'a Solution;
    type IntoIter = std::slice::Iter<'a, Solution>;

    fn into_iter(self) -> Self::IntoIter {
        self.solutions.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(re: &[f64]) -> Solution {
        Solution::new(re.iter().map(|&v| Complex64::new(v, 0.0)).collect(), 0.0)
    }

    #[test]
    fn dedup_in_relative_sup_norm() {
        let mut set = SolutionSet::new(1e-6);
        assert!(set.insert(sol(&[1.0, 2.0])).is_some());
        assert!(set.insert(sol(&[1.0 + 1e-8, 2.0])).is_none());
        assert!(set.insert(sol(&[1.0 + 1e-3, 2.0])).is_some());
        // large coordinates: relative tolerance
        assert!(set.insert(sol(&[1e6, 1.0])).is_some());
        assert!(set.insert(sol(&[1e6 + 0.1, 1.0])).is_none());
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn canonical_sort_is_order_independent() {
        let pts = [[0.5, 1.0], [-0.5, 2.0], [0.5, -1.0], [3.0, 0.0]];
        let mut a = SolutionSet::new(1e-6);
        let mut b = SolutionSet::new(1e-6);
        for p in &pts {
            a.insert(sol(p));
        }
        for p in pts.iter().rev() {
            b.insert(sol(p));
        }
        a.sort_canonical();
        b.sort_canonical();
        assert_eq!(a.as_slice(), b.as_slice());
        assert_eq!(a.get(0).point[0].re, -0.5);
        assert!(a.find(&sol(&[3.0, 0.0]).point).is_some());
    }

    #[test]
    fn conjugation_closure() {
        let mut set = SolutionSet::new(1e-6);
        set.insert(Solution::new(vec![Complex64::new(1.0, 2.0)], 0.0));
        assert!(!set.is_conjugation_closed());
        set.insert(Solution::new(vec![Complex64::new(1.0, -2.0)], 0.0));
        assert!(set.is_conjugation_closed());
    }
}
