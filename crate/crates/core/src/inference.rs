//! Likelihood of a set of correlation samples, maximum-likelihood
//! estimation of the population squared canonical correlations, tail
//! probabilities and landmark discrimination.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{
    log_density_series, ordered_triangle_integral, polynomial_regime, CanonicalCorrModel, CorrelationSample,
    PolynomialDensity,
};
use crate::error::{Error, Result};
use crate::hypergeom::SeriesSpec;
use crate::landmarks::{form_pairs, sample_from_pair, Centering, LandmarkConfiguration};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::orthogonal::QuadratureSpec;
use crate::quadrature::AdaptiveSpec;
use crate::simulate::{sample_canonical_pairs, SimSpec};

/// Largest admissible population root.
pub const RHO2_MAX: f64 = 1.0 - 1e-9;

/// Which representation of the density to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityForm {
    /// Polynomial when `(K − n)/2` is a negative integer, else series.
    #[default]
    Auto,
    Polynomial,
    Series,
}

/// Log-likelihood of fixed samples as a function of `ρ²`.
#[derive(Debug, Clone)]
pub struct Likelihood {
    k: usize,
    n: usize,
    samples: Vec<CorrelationSample>,
    polynomial: Option<PolynomialDensity>,
    series: SeriesSpec,
}

impl Likelihood {
    pub fn new(
        samples: Vec<CorrelationSample>,
        k: usize,
        n: usize,
        form: DensityForm,
        quad: &QuadratureSpec,
        series: &SeriesSpec,
    ) -> Result<Self> {
        CanonicalCorrModel::null(k, n)?;
        if let Some((j, s)) = samples.iter().enumerate().find(|(_, s)| s.len() != k) {
            return Err(Error::InvalidSample(format!(
                "sample {j} has {} roots but K = {k}",
                s.len()
            )));
        }
        let use_polynomial = match form {
            DensityForm::Auto => polynomial_regime(k, n),
            DensityForm::Polynomial => true,
            DensityForm::Series => false,
        };
        let polynomial = if use_polynomial {
            Some(PolynomialDensity::new(k, n, quad)?)
        } else {
            None
        };
        Ok(Self {
            k,
            n,
            samples,
            polynomial,
            series: *series,
        })
    }

    pub fn samples(&self) -> &[CorrelationSample] {
        &self.samples
    }

    pub fn uses_polynomial(&self) -> bool {
        self.polynomial.is_some()
    }

    /// Degree `K q` of the partition sum in the polynomial form.
    pub fn polynomial_degree(&self) -> Option<usize> {
        self.polynomial.as_ref().map(PolynomialDensity::degree)
    }

    /// `Σ_j ln f(r²_j | ρ²)`. The per-sample terms are sorted before
    /// summation, so the value does not depend on the sample order.
    pub fn log_likelihood(&self, rho2: &[f64]) -> Result<f64> {
        let model = CanonicalCorrModel::new(self.k, self.n, sorted_desc(rho2))?;
        let mut terms: Vec<f64> = self
            .samples
            .par_iter()
            .enumerate()
            .map(|(j, s)| {
                let v = match &self.polynomial {
                    Some(p) => p.log_density(model.rho2(), s),
                    None => log_density_series(s, &model, &self.series).map(|(v, _)| v),
                };
                v.map_err(|e| Error::InvalidSample(format!("sample {j}: {e}")))
            })
            .collect::<Result<_>>()?;
        terms.sort_by(f64::total_cmp);
        Ok(terms.iter().sum())
    }
}

/// `Σ_j ln f(r²_j | model)` with the polynomial form when available.
pub fn log_likelihood(
    samples: &[CorrelationSample],
    model: &CanonicalCorrModel,
    quad: &QuadratureSpec,
    series: &SeriesSpec,
) -> Result<f64> {
    Likelihood::new(samples.to_vec(), model.k(), model.n(), DensityForm::Auto, quad, series)?
        .log_likelihood(model.rho2())
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub starts: usize,
    pub max_iterations: usize,
    /// Simplex diameter in `ρ²` units at which a start counts as converged.
    pub tolerance: f64,
    pub form: DensityForm,
    pub quadrature: QuadratureSpec,
    pub series: SeriesSpec,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            max_iterations: 500,
            tolerance: 1e-8,
            form: DensityForm::Auto,
            quadrature: QuadratureSpec::default(),
            series: SeriesSpec::default(),
        }
    }
}

/// Outcome of one Nelder–Mead run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: Vec<f64>,
    pub rho2_hat: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub k: usize,
    pub n: usize,
    pub samples: usize,
    /// `"polynomial"` or `"series"`.
    pub form: String,
    pub polynomial_degree: Option<usize>,
    pub rho2_hat: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub start: Vec<f64>,
    pub starts: Vec<StartOutcome>,
}

fn logistic(t: f64) -> f64 {
    (1.0 / (1.0 + (-t).exp())).clamp(0.0, RHO2_MAX)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn to_rho2(theta: &[f64]) -> Vec<f64> {
    sorted_desc(&theta.iter().map(|&t| logistic(t)).collect::<Vec<_>>())
}

/// Deterministic start points: the coordinate-wise sample mean of `r²`,
/// then geometric profiles `(c, c², …)` for `c` spread over `[0.05, 0.95]`.
/// Every coordinate is clamped to `[0.01, 0.99]`.
pub fn start_points(samples: &[CorrelationSample], k: usize, count: usize) -> Vec<Vec<f64>> {
    let clamp = |v: f64| v.clamp(0.01, 0.99);
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let m = samples.len().max(1) as f64;
    // Sorted before summing so the start does not depend on sample order.
    let mean = |i: usize| {
        let mut v: Vec<f64> = samples.iter().map(|s| s.values()[i]).collect();
        v.sort_by(f64::total_cmp);
        v.iter().sum::<f64>() / m
    };
    out.push((0..k).map(|i| clamp(mean(i))).collect());
    let extra = count - 1;
    for j in 0..extra {
        let c = if extra == 1 {
            0.5
        } else {
            0.95 - 0.9 * j as f64 / (extra - 1) as f64
        };
        out.push((0..k).map(|i| clamp(c.powi(i as i32 + 1))).collect());
    }
    out
}

/// Maximum-likelihood estimate of `ρ²` by multi-start Nelder–Mead over
/// `θ = logit(ρ²)`, sorting inside the objective.
///
/// The returned point is the best over all starts; `converged` is that
/// start's own flag, so a failed search is reported as such.
pub fn mle(samples: &[CorrelationSample], k: usize, n: usize, opts: &MleOptions) -> Result<EstimationReport> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("estimation needs at least one sample".into()));
    }
    if opts.starts == 0 {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    let lik = Likelihood::new(samples.to_vec(), k, n, opts.form, &opts.quadrature, &opts.series)?;
    let nm = NelderMeadOptions {
        max_iterations: opts.max_iterations,
        tolerance: opts.tolerance,
        initial_step: 1.0,
    };
    let starts: Vec<StartOutcome> = start_points(samples, k, opts.starts)
        .into_iter()
        .map(|start| {
            let theta0: Vec<f64> = start.iter().map(|&p| logit(p)).collect();
            let r = nelder_mead(
                |theta| lik.log_likelihood(&to_rho2(theta)).map_or(f64::INFINITY, |v| -v),
                to_rho2,
                &theta0,
                &nm,
            );
            StartOutcome {
                start,
                rho2_hat: to_rho2(&r.x),
                log_likelihood: -r.value,
                iterations: r.iterations,
                evaluations: r.evaluations,
                converged: r.converged,
            }
        })
        .collect();
    let best = starts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.log_likelihood.total_cmp(&b.1.log_likelihood).then(b.0.cmp(&a.0)))
        .map(|(_, s)| s.clone())
        .expect("at least one start");
    Ok(EstimationReport {
        k,
        n,
        samples: samples.len(),
        form: if lik.uses_polynomial() { "polynomial" } else { "series" }.into(),
        polynomial_degree: lik.polynomial_degree(),
        rho2_hat: best.rho2_hat,
        log_likelihood: best.log_likelihood,
        iterations: best.iterations,
        evaluations: best.evaluations,
        converged: best.converged && best.log_likelihood.is_finite(),
        start: best.start,
        starts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TailMethod {
    Quadrature,
    MonteCarlo { samples: usize },
}

/// `P(r₁² > t₁, …, r_K² > t_K)` with an error estimate: the quadrature
/// error bound, or one Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailProbability {
    pub value: f64,
    pub error: f64,
    pub method: TailMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    pub quadrature: QuadratureSpec,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            mc_samples: 100_000,
            seed: 0x7a11,
        }
    }
}

/// Tail probability of the sample roots beyond the threshold `t`. Uses 2-D
/// adaptive quadrature of the polynomial density when `K = 2` and the model
/// is in the polynomial regime, and simulation otherwise.
pub fn tail_probability(t: &[f64], model: &CanonicalCorrModel, opts: &TailOptions) -> Result<TailProbability> {
    if t.len() != model.k() {
        return Err(Error::InvalidArgument(format!(
            "threshold has {} values but K = {}",
            t.len(),
            model.k()
        )));
    }
    if let Some(bad) = t.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidArgument(format!(
            "threshold value {bad} is outside [0, 1]"
        )));
    }
    if model.k() == 2 && model.is_polynomial() {
        let density = PolynomialDensity::new(2, model.n(), &opts.quadrature)?;
        let rho2 = model.rho2();
        let spec = AdaptiveSpec {
            abs_tol: opts.abs_tol,
            rel_tol: opts.rel_tol,
            ..AdaptiveSpec::default()
        };
        let integral = ordered_triangle_integral([t[0], t[1]], &spec, |a, b| density.density_at(rho2, &[a, b]));
        return Ok(TailProbability {
            value: integral.value.clamp(0.0, 1.0),
            error: integral.error,
            method: TailMethod::Quadrature,
        });
    }
    if opts.mc_samples == 0 {
        return Err(Error::InvalidArgument("Monte Carlo tail needs samples".into()));
    }
    let sim = sample_canonical_pairs(&SimSpec {
        k: model.k(),
        n: model.n(),
        rho2: model.rho2().to_vec(),
        count: opts.mc_samples,
        seed: opts.seed,
    })?;
    let hits = sim
        .samples
        .iter()
        .filter(|s| s.values().iter().zip(t).all(|(r, t)| r > t))
        .count();
    let m = opts.mc_samples as f64;
    let p = hits as f64 / m;
    Ok(TailProbability {
        value: p,
        error: (p * (1.0 - p) / m).sqrt(),
        method: TailMethod::MonteCarlo {
            samples: opts.mc_samples,
        },
    })
}

/// Density on the cell centres `((i + ½)/R, (j + ½)/R)`, `j ≤ i`, of the
/// ordered triangle for `K = 2`; `R(R + 1)/2` rows of `[r₁², r₂², f]`.
/// Cells on the diagonal (tied roots) get density zero.
pub fn density_grid(
    model: &CanonicalCorrModel,
    resolution: usize,
    form: DensityForm,
    quad: &QuadratureSpec,
    series: &SeriesSpec,
) -> Result<Vec<[f64; 3]>> {
    if model.k() != 2 {
        return Err(Error::InvalidArgument("density grids need K = 2".into()));
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let lik = Likelihood::new(Vec::new(), 2, model.n(), form, quad, series)?;
    let cells: Vec<(usize, usize)> = (0..resolution).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    let r = resolution as f64;
    cells
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = ((i as f64 + 0.5) / r, (j as f64 + 0.5) / r);
            let Ok(sample) = CorrelationSample::new(vec![a, b]) else {
                return Ok([a, b, 0.0]);
            };
            let ln = match &lik.polynomial {
                Some(p) => p.log_density(model.rho2(), &sample)?,
                None => log_density_series(&sample, model, series)?.0,
            };
            Ok([a, b, ln.exp()])
        })
        .collect()
}

/// Correlation samples from paired configurations (one per specimen of
/// `y`; `x` may be a single template or figure).
pub fn samples_from_configurations(
    x: &[LandmarkConfiguration],
    y: &[LandmarkConfiguration],
    centering: Centering,
) -> Result<Vec<CorrelationSample>> {
    form_pairs(x, y, centering)?
        .iter()
        .enumerate()
        .map(|(j, p)| sample_from_pair(p).map_err(|e| Error::InvalidSample(format!("pair {j}: {e}"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationStep {
    /// Landmark indices kept (0-based).
    pub subset: Vec<usize>,
    pub report: EstimationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrimination {
    pub steps: Vec<DiscriminationStep>,
    pub warnings: Vec<String>,
    pub threshold: f64,
    /// First step whose `ρ̂₁²` moved by more than `threshold` relative to
    /// the previous step.
    pub drastic_change: Option<usize>,
}

/// Re-estimates `ρ²` on each landmark subset of the schedule. Invalid
/// subsets are skipped with a warning.
pub fn discriminate_landmarks(
    x: &[LandmarkConfiguration],
    y: &[LandmarkConfiguration],
    schedule: &[Vec<usize>],
    centering: Centering,
    opts: &MleOptions,
    threshold: f64,
) -> Result<Discrimination> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let first = y
        .first()
        .ok_or_else(|| Error::InvalidArgument("population Y is empty".into()))?;
    let (total, k) = (first.landmarks(), first.dim());
    let mut steps = Vec::new();
    let mut warnings = Vec::new();
    for (i, subset) in schedule.iter().enumerate() {
        let mut sorted = subset.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let skip = if sorted.len() != subset.len() {
            Some("repeats a landmark".to_string())
        } else if let Some(bad) = subset.iter().find(|&&r| r >= total) {
            Some(format!("index {bad} is out of range for {total} landmarks"))
        } else if subset.len() < 2 * k + 1 {
            Some(format!(
                "keeps {} landmarks, fewer than 2K + 1 = {}",
                subset.len(),
                2 * k + 1
            ))
        } else if opts.form == DensityForm::Polynomial && !polynomial_regime(k, subset.len() - 1) {
            Some(format!(
                "N' = {} breaks the polynomial parity condition for K = {k}",
                subset.len()
            ))
        } else {
            None
        };
        if let Some(why) = skip {
            warnings.push(format!("subset {}: skipped, {why}", i + 1));
            continue;
        }
        let restrict = |side: &[LandmarkConfiguration]| -> Result<Vec<LandmarkConfiguration>> {
            side.iter().map(|c| c.select(subset)).collect()
        };
        let outcome = samples_from_configurations(&restrict(x)?, &restrict(y)?, centering)
            .and_then(|s| mle(&s, k, subset.len() - 1, opts));
        match outcome {
            Ok(report) => steps.push(DiscriminationStep {
                subset: subset.clone(),
                report,
            }),
            Err(e) => warnings.push(format!("subset {}: skipped, {e}", i + 1)),
        }
    }
    let drastic_change = steps.windows(2).position(|w| {
        let (a, b) = (w[0].report.rho2_hat[0], w[1].report.rho2_hat[0]);
        (b - a).abs() > threshold * a.abs().max(f64::MIN_POSITIVE)
    });
    Ok(Discrimination {
        steps,
        warnings,
        threshold,
        drastic_change: drastic_change.map(|p| p + 1),
    })
}
