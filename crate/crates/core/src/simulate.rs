//! Seeded sampler of sample squared canonical correlations under the
//! Gaussian model `Z = [Y | X]` with `n` independent rows from
//! `N(0, [[I, P], [P, I]])`, `P = diag(ρ₁, …, ρ_K)`.
//!
//! Each sample draws from its own ChaCha8 stream (`seed`, stream = sample
//! index), so results do not depend on thread scheduling.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{CanonicalCorrModel, CorrelationSample};
use crate::error::{Error, Result};
use crate::landmarks::{helmert_submatrix, squared_canonical_correlations, HelmertizedPair, LandmarkConfiguration};

/// Draws before a sample is declared impossible to obtain.
const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub k: usize,
    pub n: usize,
    pub rho2: Vec<f64>,
    pub count: usize,
    pub seed: u64,
}

impl SimSpec {
    fn validate(&self) -> Result<CanonicalCorrModel> {
        CanonicalCorrModel::new(self.k, self.n, self.rho2.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub samples: Vec<CorrelationSample>,
    /// Draws discarded because roots tied or touched `0`/`1`.
    pub rejected: usize,
}

/// `count` independent samples of the ordered roots.
pub fn sample_canonical_pairs(spec: &SimSpec) -> Result<SimOutput> {
    let model = spec.validate()?;
    let draws: Vec<Result<(CorrelationSample, usize)>> = (0..spec.count)
        .into_par_iter()
        .map(|i| draw_one(&model, spec.seed, i as u64))
        .collect();
    let mut samples = Vec::with_capacity(spec.count);
    let mut rejected = 0;
    for d in draws {
        let (s, r) = d?;
        samples.push(s);
        rejected += r;
    }
    Ok(SimOutput { samples, rejected })
}

/// Gaussian pair `(X, Y)`, each `n × K`, in canonical form.
pub fn gaussian_pair(model: &CanonicalCorrModel, rng: &mut ChaCha8Rng) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, k) = (model.n(), model.k());
    let mut y = DMatrix::zeros(n, k);
    let mut x = DMatrix::zeros(n, k);
    for i in 0..n {
        for (j, &r2) in model.rho2().iter().enumerate() {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            y[(i, j)] = z1;
            x[(i, j)] = r2.sqrt() * z1 + (1.0 - r2).sqrt() * z2;
        }
    }
    (x, y)
}

/// Landmark populations `(X, Y)` of `count` figures with `N = n + 1`
/// landmarks whose Helmertized coordinates follow the Gaussian model:
/// figure `j` is `L'X_j` with `L` the sub-Helmert matrix.
pub fn synthetic_configurations(spec: &SimSpec) -> Result<(Vec<LandmarkConfiguration>, Vec<LandmarkConfiguration>)> {
    let model = spec.validate()?;
    let lt = helmert_submatrix(spec.n + 1)?.transpose();
    let pairs: Vec<_> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64);
            gaussian_pair(&model, &mut rng)
        })
        .collect();
    let mut xs = Vec::with_capacity(spec.count);
    let mut ys = Vec::with_capacity(spec.count);
    for (i, (x, y)) in pairs.into_iter().enumerate() {
        xs.push(LandmarkConfiguration::new(format!("x{}", i + 1), &lt * x)?);
        ys.push(LandmarkConfiguration::new(format!("y{}", i + 1), &lt * y)?);
    }
    Ok((xs, ys))
}

fn draw_one(model: &CanonicalCorrModel, seed: u64, stream: u64) -> Result<(CorrelationSample, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    for rejected in 0..MAX_ATTEMPTS {
        let (x, y) = gaussian_pair(model, &mut rng);
        let Ok(roots) = HelmertizedPair::new(x, y).and_then(|p| squared_canonical_correlations(&p)) else {
            continue;
        };
        if let Ok(sample) = CorrelationSample::new(roots) {
            return Ok((sample, rejected));
        }
    }
    Err(Error::InvalidArgument(format!(
        "no valid sample after {MAX_ATTEMPTS} draws; the model is degenerate"
    )))
}
