//! Eulerian shape inference.
//!
//! Two landmark configurations with the same number of landmarks are
//! compared through the squared canonical correlations of their
//! Helmertized coordinates, a summary invariant under translation, rotation
//! and relabelling of the coordinate axes. The crate provides
//!
//! * [`partitions`], [`jack`] and [`hypergeom`]: partitions, Jack
//!   polynomials and hypergeometric functions of two matrix arguments;
//! * [`orthogonal`]: Haar integration over `O(K)` and the Euler relation
//!   that turns the density into a finite polynomial sum;
//! * [`density`]: the joint density of the sample squared canonical
//!   correlations in series and polynomial form;
//! * [`landmarks`]: landmark files, Helmert contrasts and the correlations
//!   themselves;
//! * [`inference`]: likelihood, maximum-likelihood estimation, tail
//!   probabilities and landmark discrimination;
//! * [`simulate`]: a seeded Wishart sampler used as a statistical oracle;
//! * [`quadrature`] and [`optim`]: Gauss–Kronrod integration and
//!   Nelder–Mead minimization.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod error;
pub mod hypergeom;
pub mod inference;
pub mod jack;
pub mod landmarks;
pub mod optim;
pub mod orthogonal;
pub mod partitions;
pub mod quadrature;
pub mod simulate;

pub use density::{
    log_density_polynomial, log_density_series, log_norm_constant, CanonicalCorrModel, CorrelationSample,
    PolynomialDensity,
};
pub use error::{Error, Result};
pub use hypergeom::{hyper_two_matrix, SeriesReport, SeriesSpec};
pub use inference::{
    discriminate_landmarks, log_likelihood, mle, tail_probability, DensityForm, Discrimination, EstimationReport,
    MleOptions, TailOptions, TailProbability,
};
pub use jack::JackEvaluator;
pub use landmarks::{
    parse_landmark_file, squared_canonical_correlations, write_landmark_file, Centering, HelmertizedPair,
    LandmarkConfiguration,
};
pub use orthogonal::{euler_2f1, QuadratureSpec};
pub use partitions::Partition;
pub use simulate::{sample_canonical_pairs, SimSpec};
