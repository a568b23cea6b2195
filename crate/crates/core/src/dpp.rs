//! Projection DPP semantics: kernels, subset probabilities and synthetic data.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::ModelError;
use crate::model::DataCounts;
use crate::pairs::subsets;

/// Orthogonal projection of rank `d` onto a subspace of `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionKernel {
    n: usize,
    d: usize,
    p: DMatrix<f64>,
}

impl ProjectionKernel {
    /// Validate symmetry (1e-12), idempotence (1e-10) and trace (1e-10).
    pub fn new(p: DMatrix<f64>, d: usize) -> Result<Self, ModelError> {
        let n = p.nrows();
        if p.ncols() != n {
            return Err(ModelError::Kernel(format!("kernel is {} x {}", n, p.ncols())));
        }
        let asym = (&p - p.transpose()).amax();
        if asym > 1e-12 {
            return Err(ModelError::Kernel(format!("asymmetry {asym:e}")));
        }
        let idem = (&p * &p - &p).amax();
        if idem > 1e-10 {
            return Err(ModelError::Kernel(format!("P^2 - P has entry {idem:e}")));
        }
        let tr = p.trace();
        if (tr - d as f64).abs() > 1e-10 {
            return Err(ModelError::Kernel(format!("trace {tr} but rank {d}")));
        }
        Ok(Self { n, d, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }
}

/// Probabilities of the `d`-subsets, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct DppDistribution {
    pub n: usize,
    pub d: usize,
    pub probs: Vec<f64>,
}

/// `P = M^T (M M^T)^{-1} M`, the projection onto the row span of `M`.
pub fn projection_from_rows(m: &DMatrix<f64>) -> Result<ProjectionKernel, ModelError> {
    let (d, n) = m.shape();
    if d == 0 || d > n {
        return Err(ModelError::Dimension(format!("need 1 <= d <= n, got {d} x {n}")));
    }
    let sv = m.clone().svd(false, false).singular_values;
    let ratio = sv.min() / sv.max();
    if !(ratio > 1e-10) {
        return Err(ModelError::Rank { ratio });
    }
    let gram_inv = (m * m.transpose())
        .try_inverse()
        .ok_or(ModelError::Rank { ratio })?;
    let p = m.transpose() * gram_inv * m;
    // remove rounding asymmetry before validation
    let p = (&p + p.transpose()) * 0.5;
    ProjectionKernel::new(p, d)
}

/// `probs_I = det(P_I)` for every `d`-subset `I`.
///
/// With `Q` an orthonormal basis of the range of `P`, `P_I = Q_I Q_I^T` and so
/// `det(P_I) = det(Q_I)^2`, which keeps small probabilities accurate to full
/// relative precision.
pub fn dpp_distribution(kernel: &ProjectionKernel) -> Result<DppDistribution, ModelError> {
    let (n, d) = (kernel.n, kernel.d);
    let eig = kernel.p.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let q = eig.eigenvectors.select_columns(order[..d].iter());
    let mut probs = Vec::new();
    for idx in subsets(n, d) {
        let sub = kernel.p.select_rows(idx.iter()).select_columns(idx.iter());
        let det = sub.determinant();
        if det < -1e-10 {
            return Err(ModelError::Kernel(format!("principal minor {idx:?} is {det:e}")));
        }
        let qi = q.select_rows(idx.iter()).determinant();
        probs.push(qi * qi);
    }
    Ok(DppDistribution { n, d, probs })
}

/// Counts drawn from a rank-2 DPP.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCounts {
    pub counts: DataCounts,
    /// Pairs that were never observed; the data are then not generic.
    pub zero_pairs: Vec<(usize, usize)>,
}

impl SampledCounts {
    pub fn is_generic(&self) -> bool {
        self.zero_pairs.is_empty()
    }
}

/// Draw `samples` i.i.d. pairs by inverse-CDF sampling over all `C(n,2)`
/// subset probabilities and tally them.
pub fn sample_counts(
    kernel: &ProjectionKernel,
    samples: u64,
    seed: u64,
) -> Result<SampledCounts, ModelError> {
    if kernel.d != 2 {
        return Err(ModelError::Dimension(format!("sampling needs d = 2, got {}", kernel.d)));
    }
    if samples == 0 {
        return Err(ModelError::Dimension("need at least one sample".into()));
    }
    let dist = dpp_distribution(kernel)?;
    let mut cdf = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0;
    for p in &dist.probs {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![0u64; cdf.len()];
    for _ in 0..samples {
        let r = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
        u[k] += 1;
    }
    let counts = DataCounts::new(kernel.n, u)?;
    let zero_pairs = counts.zero_pairs();
    Ok(SampledCounts { counts, zero_pairs })
}

/// Counts drawn uniformly from `{1..max}`.
pub fn random_counts(n: usize, max: u64, seed: u64) -> DataCounts {
    assert!(max >= 1, "max must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = (0..crate::pairs::num_pairs(n)).map(|_| rng.random_range(1..=max)).collect();
    DataCounts::new(n, u).expect("length matches")
}

/// A `d x n` matrix with independent standard normal entries.
pub fn random_subspace(d: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(d, n, |_, _| rng.sample(StandardNormal))
}
