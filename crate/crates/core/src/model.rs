//! Geometry of the gauge-fixed parameterization of the squared Grassmannian
//! `sGr(2, n)`: Plücker minors, the normalizing quadric `Q_n`, the implicit and
//! parametric log-likelihoods and their derivatives.
//!
//! A point of the parameter space is the matrix
//!
//! ```text
//!     [ 1 0 x_3 ... x_n ]
//!     [ 0 1 y_3 ... y_n ]
//! ```
//!
//! of which only the free block is stored. Flat coordinate vectors always use
//! the layout `(x_3, ..., x_n, y_3, ..., y_n)`.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::error::ModelError;
use crate::pairs::{num_pairs, pair_index, pairs, subsets};

/// Scalar field of a parameter point: `f64` or `Complex64`.
pub trait Scalar: nalgebra::ComplexField<RealField = f64> + Copy {}
impl<T: nalgebra::ComplexField<RealField = f64> + Copy> Scalar for T {}

/// Default relative zero tolerance for membership in the open domain.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Free `2 x (n-2)` block of the gauge-fixed matrix `M_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixParam<T> {
    n: usize,
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Scalar> MatrixParam<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self, ModelError> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(ModelError::Dimension(format!(
                "need equally many x and y entries (at least one), got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        Ok(Self { n: xs.len() + 2, xs, ys })
    }

    /// Build from a flat `(x_3..x_n, y_3..y_n)` vector.
    pub fn from_point(n: usize, point: &[T]) -> Result<Self, ModelError> {
        if n < 3 || point.len() != 2 * (n - 2) {
            return Err(ModelError::Dimension(format!(
                "point of length {} does not match n = {n}",
                point.len()
            )));
        }
        let (xs, ys) = point.split_at(n - 2);
        Self::new(xs.to_vec(), ys.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }

    /// Flat coordinates `(x_3..x_n, y_3..y_n)`.
    pub fn to_point(&self) -> Vec<T> {
        self.xs.iter().chain(self.ys.iter()).copied().collect()
    }

    /// Column `i` (1-based) of the full matrix.
    pub fn column(&self, i: usize) -> (T, T) {
        match i {
            1 => (T::one(), T::zero()),
            2 => (T::zero(), T::one()),
            _ => (self.xs[i - 3], self.ys[i - 3]),
        }
    }

    /// Negate column `i >= 3`, a deck transformation of the squaring map.
    pub fn flip_column(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.xs[i - 3] = -out.xs[i - 3];
        out.ys[i - 3] = -out.ys[i - 3];
        out
    }

    /// Negate the first row and re-gauge, i.e. negate every `x_i`.
    pub fn negate_xs(&self) -> Self {
        let mut out = self.clone();
        out.xs.iter_mut().for_each(|x| *x = -*x);
        out
    }

    /// Largest entry modulus of the free block.
    pub fn sup_norm(&self) -> f64 {
        self.xs
            .iter()
            .chain(self.ys.iter())
            .map(|v| v.modulus())
            .fold(0.0, f64::max)
    }
}

impl MatrixParam<f64> {
    pub fn to_complex(&self) -> MatrixParam<Complex64> {
        MatrixParam {
            n: self.n,
            xs: self.xs.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            ys: self.ys.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

/// The `C(n,2)` minors of `M_n` in lexicographic pair order, and `Q_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlueckerVector<T> {
    pub n: usize,
    pub p: Vec<T>,
    pub q_n: T,
}

impl<T: Scalar> PlueckerVector<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.p[pair_index(self.n, i, j)]
    }

    /// Euclidean norm of the minor vector.
    pub fn norm(&self) -> f64 {
        self.p.iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt()
    }
}

/// Observed counts, one per pair in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DataCounts {
    n: usize,
    u: Vec<u64>,
}

impl DataCounts {
    pub fn new(n: usize, u: Vec<u64>) -> Result<Self, ModelError> {
        if n < 3 || u.len() != num_pairs(n) {
            return Err(ModelError::Dimension(format!(
                "expected {} counts for n = {n}, got {}",
                num_pairs(n),
                u.len()
            )));
        }
        Ok(Self { n, u })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.u
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.u[pair_index(self.n, i, j)]
    }

    pub fn total(&self) -> u64 {
        self.u.iter().sum()
    }

    /// All counts strictly positive.
    pub fn is_generic(&self) -> bool {
        self.u.iter().all(|&c| c >= 1)
    }

    /// Pairs with a zero count.
    pub fn zero_pairs(&self) -> Vec<(usize, usize)> {
        pairs(self.n)
            .into_iter()
            .zip(&self.u)
            .filter(|(_, &c)| c == 0)
            .map(|(p, _)| p)
            .collect()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.u.iter().map(|&c| c as f64).collect()
    }

    pub fn scaled(&self, factor: u64) -> Self {
        Self { n: self.n, u: self.u.iter().map(|&c| c * factor).collect() }
    }
}

pub fn plucker<T: Scalar>(m: &MatrixParam<T>) -> PlueckerVector<T> {
    let n = m.n;
    let mut p = Vec::with_capacity(num_pairs(n));
    for (i, j) in pairs(n) {
        let (xi, yi) = m.column(i);
        let (xj, yj) = m.column(j);
        p.push(xi * yj - yi * xj);
    }
    let q_n = p.iter().fold(T::zero(), |acc, &v| acc + v * v);
    PlueckerVector { n, p, q_n }
}

pub fn in_domain<T: Scalar>(m: &MatrixParam<T>) -> bool {
    in_domain_with(m, DOMAIN_TOL)
}

/// True iff every minor and `Q_n` exceed `tol * ||p||` in modulus.
pub fn in_domain_with<T: Scalar>(m: &MatrixParam<T>, tol: f64) -> bool {
    domain_violation(&plucker(m), tol).is_none()
}

fn domain_violation<T: Scalar>(pv: &PlueckerVector<T>, tol: f64) -> Option<String> {
    let scale = tol * pv.norm();
    if let Some(((i, j), v)) = pairs(pv.n)
        .into_iter()
        .zip(&pv.p)
        .find(|(_, v)| v.modulus() <= scale)
    {
        return Some(format!("minor p_{i}{j} = {v} vanishes"));
    }
    if pv.q_n.modulus() <= scale {
        return Some(format!("Q_n = {} vanishes", pv.q_n));
    }
    None
}

fn check_domain<T: Scalar>(pv: &PlueckerVector<T>) -> Result<(), ModelError> {
    match domain_violation(pv, DOMAIN_TOL) {
        Some(msg) => Err(ModelError::Domain(msg)),
        None => Ok(()),
    }
}

fn check_counts<T>(m: &MatrixParam<T>, u: &DataCounts) -> Result<(), ModelError> {
    if m.n != u.n {
        return Err(ModelError::Dimension(format!(
            "matrix has n = {} but counts have n = {}",
            m.n, u.n
        )));
    }
    Ok(())
}

/// Parametric log-likelihood `sum u_ij log p_ij^2 - (sum u) log Q_n`.
///
/// Pairs with a zero count contribute nothing. For complex points the
/// principal branch of the logarithm is used, so the value is only meaningful
/// modulo `2 pi i`.
pub fn log_likelihood_parametric<T: Scalar>(
    m: &MatrixParam<T>,
    u: &DataCounts,
) -> Result<T, ModelError> {
    check_counts(m, u)?;
    let pv = plucker(m);
    check_domain(&pv)?;
    let mut acc = T::zero();
    for (&c, &p) in u.u.iter().zip(&pv.p) {
        if c > 0 {
            acc += T::from_real(c as f64) * (p * p).ln();
        }
    }
    Ok(acc - T::from_real(u.total() as f64) * pv.q_n.ln())
}

/// Implicit log-likelihood `sum u_ij log q_ij - (sum u) log(sum q_ij)`.
pub fn log_likelihood_implicit(q: &[f64], u: &DataCounts) -> Result<f64, ModelError> {
    if q.len() != u.u.len() {
        return Err(ModelError::Dimension(format!(
            "q has {} entries but u has {}",
            q.len(),
            u.u.len()
        )));
    }
    if let Some(bad) = q.iter().find(|&&v| !(v > 0.0)) {
        return Err(ModelError::Domain(format!("nonpositive probability {bad}")));
    }
    let total: f64 = q.iter().sum();
    let acc: f64 = u
        .u
        .iter()
        .zip(q)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &v)| c as f64 * v.ln())
        .sum();
    Ok(acc - u.total() as f64 * total.ln())
}

/// Analytic gradient of the parametric log-likelihood in `(x.., y..)` order.
pub fn gradient<T: Scalar>(m: &MatrixParam<T>, u: &DataCounts) -> Result<Vec<T>, ModelError> {
    check_counts(m, u)?;
    let w: Vec<T> = u.u.iter().map(|&c| T::from_real(c as f64)).collect();
    let (f, _) = critical_system(m.n, &m.to_point(), &w, false)?;
    Ok(f)
}

/// Analytic Hessian of the parametric log-likelihood (row-major, symmetric).
pub fn hessian_analytic(m: &MatrixParam<f64>, u: &DataCounts) -> Result<DMatrix<f64>, ModelError> {
    check_counts(m, u)?;
    let dim = 2 * (m.n - 2);
    let (_, jac) = critical_system(m.n, &m.to_point(), &u.as_f64(), true)?;
    Ok(DMatrix::from_row_slice(dim, dim, &jac.expect("jacobian requested")))
}

/// Hessian by central differences of the analytic gradient with step
/// `1e-5 * (1 + ||M||_inf)`, symmetrized as `(H + H^T) / 2`.
pub fn hessian(m: &MatrixParam<f64>, u: &DataCounts) -> Result<DMatrix<f64>, ModelError> {
    check_counts(m, u)?;
    check_domain(&plucker(m))?;
    let n = m.n;
    let dim = 2 * (n - 2);
    let h = 1e-5 * (1.0 + m.sup_norm());
    let w = u.as_f64();
    let base = m.to_point();
    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..dim {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[k] += h;
        minus[k] -= h;
        let (gp, _) = critical_system(n, &plus, &w, false)?;
        let (gm, _) = critical_system(n, &minus, &w, false)?;
        for r in 0..dim {
            hess[(r, k)] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

/// Sparse gradient of one minor: at most four nonzero entries.
struct MinorGrad<T> {
    entries: [(usize, T); 4],
    len: usize,
}

impl<T: Scalar> MinorGrad<T> {
    fn new() -> Self {
        Self { entries: [(0, T::zero()); 4], len: 0 }
    }

    fn push(&mut self, idx: usize, v: T) {
        self.entries[self.len] = (idx, v);
        self.len += 1;
    }

    fn iter(&self) -> impl Iterator<Item = &(usize, T)> {
        self.entries[..self.len].iter()
    }
}

/// Value and gradient of `p_ij`. Also returns the constant mixed second
/// derivatives `(x_i, y_j) -> +1`, `(y_i, x_j) -> -1` when `i, j >= 3`.
fn minor_with_grad<T: Scalar>(
    n: usize,
    point: &[T],
    i: usize,
    j: usize,
) -> (T, MinorGrad<T>, Option<[(usize, usize); 2]>) {
    let k = n - 2;
    let xi_idx = |c: usize| c - 3;
    let yi_idx = |c: usize| k + c - 3;
    let mut g = MinorGrad::new();
    match (i, j) {
        (1, 2) => (T::one(), g, None),
        (1, j) => {
            g.push(yi_idx(j), T::one());
            (point[yi_idx(j)], g, None)
        }
        (2, j) => {
            g.push(xi_idx(j), -T::one());
            (-point[xi_idx(j)], g, None)
        }
        (i, j) => {
            let (xi, yi) = (point[xi_idx(i)], point[yi_idx(i)]);
            let (xj, yj) = (point[xi_idx(j)], point[yi_idx(j)]);
            g.push(xi_idx(i), yj);
            g.push(yi_idx(j), xi);
            g.push(yi_idx(i), -xj);
            g.push(xi_idx(j), -yi);
            let mixed = [(xi_idx(i), yi_idx(j)), (yi_idx(i), xi_idx(j))];
            (xi * yj - yi * xj, g, Some(mixed))
        }
    }
}

/// Evaluate the critical system `sum_ab w_ab grad log(p_ab^2 / Q_n)` and,
/// optionally, its Jacobian (row-major `m x m`, `m = 2(n-2)`).
///
/// For integer weights this is the gradient (and Hessian) of the parametric
/// log-likelihood. Pairs with zero weight are skipped in the sums but every
/// minor still has to be nonzero.
pub(crate) fn critical_system<T: Scalar>(
    n: usize,
    point: &[T],
    weights: &[T],
    want_jac: bool,
) -> Result<(Vec<T>, Option<Vec<T>>), ModelError> {
    let dim = 2 * (n - 2);
    let two = T::from_real(2.0);
    let terms: Vec<_> = pairs(n)
        .into_iter()
        .map(|(i, j)| minor_with_grad(n, point, i, j))
        .collect();

    let mut q = T::zero();
    let mut norm_sq = 0.0;
    for (p, _, _) in &terms {
        q += *p * *p;
        norm_sq += p.modulus_squared();
    }
    let scale = DOMAIN_TOL * norm_sq.sqrt();
    for ((i, j), (p, _, _)) in pairs(n).into_iter().zip(&terms) {
        if p.modulus() <= scale {
            return Err(ModelError::Domain(format!("minor p_{i}{j} vanishes")));
        }
    }
    if q.modulus() <= scale {
        return Err(ModelError::Domain("Q_n vanishes".into()));
    }

    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    let mut grad_q = vec![T::zero(); dim];
    let mut f = vec![T::zero(); dim];
    for ((p, g, _), &w) in terms.iter().zip(weights) {
        let coef = two * *p;
        let wp = if w.is_zero() { T::zero() } else { two * w / *p };
        for &(idx, gv) in g.iter() {
            grad_q[idx] += coef * gv;
            f[idx] += wp * gv;
        }
    }
    let tq = total / q;
    for (fi, gq) in f.iter_mut().zip(&grad_q) {
        *fi -= tq * *gq;
    }
    if !want_jac {
        return Ok((f, None));
    }

    // J = sum w 2 (H_p/p - g g^T/p^2) - W (H_Q/Q - gQ gQ^T/Q^2)
    // with H_Q = sum 2 (g g^T + p H_p).
    let mut jac = vec![T::zero(); dim * dim];
    let neg_tq = -tq;
    for ((p, g, mixed), &w) in terms.iter().zip(weights) {
        let inv_p = T::one() / *p;
        let wcoef = if w.is_zero() { T::zero() } else { two * w * inv_p * inv_p };
        // -W/Q * 2 g g^T  and  -w 2/p^2 g g^T
        let outer = neg_tq * two + (-wcoef);
        for &(a, ga) in g.iter() {
            for &(b, gb) in g.iter() {
                jac[a * dim + b] += outer * ga * gb;
            }
        }
        if let Some(mixed) = mixed {
            // second derivative of p_ab: +1 at (x_i, y_j), -1 at (y_i, x_j)
            let hcoef = two * w * inv_p + neg_tq * two * *p;
            let [(a1, b1), (a2, b2)] = *mixed;
            jac[a1 * dim + b1] += hcoef;
            jac[b1 * dim + a1] += hcoef;
            jac[a2 * dim + b2] -= hcoef;
            jac[b2 * dim + a2] -= hcoef;
        }
    }
    let tq2 = tq / q;
    for a in 0..dim {
        for b in 0..dim {
            jac[a * dim + b] += tq2 * grad_q[a] * grad_q[b];
        }
    }
    Ok((f, Some(jac)))
}

/// Columns `grad log(p_ab^2 / Q_n)` of the matrix `A(z)` with
/// `critical_system(z, u) = A(z) u`, row-major `m x C(n,2)`.
pub(crate) fn coefficient_matrix<T: Scalar>(n: usize, point: &[T]) -> Result<Vec<T>, ModelError> {
    let dim = 2 * (n - 2);
    let np = num_pairs(n);
    let mut out = vec![T::zero(); dim * np];
    let mut e = vec![T::zero(); np];
    for col in 0..np {
        e.iter_mut().for_each(|v| *v = T::zero());
        e[col] = T::one();
        let (f, _) = critical_system(n, point, &e, false)?;
        for (r, v) in f.into_iter().enumerate() {
            out[r * np + col] = v;
        }
    }
    Ok(out)
}

/// All maximal minors of a `d x n` matrix, columns chosen in lexicographic order.
pub fn maximal_minors(mat: &DMatrix<f64>) -> Vec<f64> {
    let (d, n) = mat.shape();
    subsets(n, d)
        .into_iter()
        .map(|cols| mat.select_columns(cols.iter()).determinant())
        .collect()
}

/// Parametric log-likelihood for general `d`: the free block is `d x (n-d)`
/// and the full matrix is `[I_d | block]`. Counts are indexed by `d`-subsets
/// in lexicographic order.
pub fn log_likelihood_general_d(block: &DMatrix<f64>, u: &[u64]) -> Result<f64, ModelError> {
    let (d, k) = block.shape();
    if d < 2 || k < 1 {
        return Err(ModelError::Dimension(format!("block must be d x (n-d) with d >= 2, got {d} x {k}")));
    }
    let n = d + k;
    let mut full = DMatrix::<f64>::zeros(d, n);
    full.view_mut((0, 0), (d, d)).fill_with_identity();
    full.view_mut((0, d), (d, k)).copy_from(block);
    let minors = maximal_minors(&full);
    if minors.len() != u.len() {
        return Err(ModelError::Dimension(format!(
            "expected {} counts, got {}",
            minors.len(),
            u.len()
        )));
    }
    let norm: f64 = minors.iter().map(|v| v * v).sum();
    let scale = DOMAIN_TOL * norm.sqrt();
    if let Some(pos) = minors.iter().position(|v| v.abs() <= scale) {
        return Err(ModelError::Domain(format!("maximal minor #{pos} vanishes")));
    }
    let total: f64 = u.iter().map(|&c| c as f64).sum();
    let acc: f64 = minors
        .iter()
        .zip(u)
        .filter(|(_, &c)| c > 0)
        .map(|(m, &c)| c as f64 * (m * m).ln())
        .sum();
    Ok(acc - total * norm.ln())
}

/// The symmetric matrix `A` with `Q_{n+1} = (1, x_{n+1}, y_{n+1}) A (1, x_{n+1}, y_{n+1})^T`.
pub fn conic_matrix(m: &MatrixParam<f64>) -> Matrix3<f64> {
    let q = plucker(m).q_n;
    let sx: f64 = m.xs.iter().map(|v| v * v).sum();
    let sy: f64 = m.ys.iter().map(|v| v * v).sum();
    let sxy: f64 = m.xs.iter().zip(&m.ys).map(|(a, b)| a * b).sum();
    Matrix3::new(q, 0.0, 0.0, 0.0, 1.0 + sy, -sxy, 0.0, -sxy, 1.0 + sx)
}

/// Discriminant of `Q_{n+1}` as a conic in `(x_{n+1}, y_{n+1})`; equals `Q_n^2`.
pub fn conic_discriminant(m: &MatrixParam<f64>) -> f64 {
    conic_matrix(m).determinant()
}
