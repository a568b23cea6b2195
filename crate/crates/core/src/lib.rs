//! Maximum likelihood estimation for rank-2 projection determinantal point
//! processes.
//!
//! The model is the squared Grassmannian `sGr(2, n)`: probability vectors
//! `q_ij = p_ij^2 / sum p_kl^2` built from the 2-minors of a `2 x n` matrix.
//! Its log-likelihood has `(n-1)!/2` critical points for generic data, every
//! one of them real, positive and a local maximum. Lifted to the gauge-fixed
//! parameter space each critical point has `2^(n-1)` preimages, so the
//! parametric system carries `2^(n-2) (n-1)!` solutions.
//!
//! The crate enumerates all of them numerically (monodromy to populate a
//! generic complex fiber, then a parameter homotopy to the data), picks the
//! MLE, and checks the counts, reality and maximality claims independently:
//!
//! * [`model`]: minors, the quadric `Q_n`, likelihoods, gradient and Hessian.
//! * [`dpp`]: projection kernels, subset probabilities and synthetic data.
//! * [`solver`]: Newton refinement, path tracking, monodromy and homotopy.
//! * [`analysis`]: implicit images, MLE selection, Hessian classes, sign
//!   vectors of regions and the count verification report.
//! * [`pipeline`]: the end-to-end estimate for one data vector.
//! * [`io`] and [`cli`]: JSON formats and the `dppmle` command-line driver.

pub mod analysis;
pub mod cli;
pub mod dpp;
pub mod error;
pub mod io;
pub mod model;
pub mod pairs;
pub mod pipeline;
pub mod solver;

pub use error::{ModelError, SolverError};
pub use model::{DataCounts, MatrixParam, PlueckerVector};
