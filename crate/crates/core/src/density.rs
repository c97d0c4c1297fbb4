//! Joint density of the sample squared canonical correlations
//! `1 > r₁² > … > r_K² > 0` of two `K`-column Gaussian matrix variates with
//! `n` degrees of freedom:
//!
//! ```text
//! f(r²) = c(K, n) ∏(1 − ρᵢ²)^{n/2} ₂F₁^{(K)}(n/2, n/2; K/2; P², R²)
//!         ∏ (rᵢ²)^{−1/2} (1 − rᵢ²)^{(n−2K−1)/2} ∏_{i<j} (rᵢ² − rⱼ²)
//! c(K, n) = π^{K²/2} Γ_K(n/2) / (Γ_K(K/2)² Γ_K((n−K)/2))
//! ```
//!
//! The `₂F₁` factor is evaluated either by its zonal series
//! ([`log_density_series`]) or, when `q = (n − K)/2` is a positive integer,
//! by the Euler relation with `b₁ − a₁ = −q`, which leaves a finite sum over
//! partitions with `l₁ ≤ q` under an integral over `O(K)`
//! ([`PolynomialDensity`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergeom::{hyper_two_matrix, ln_mv_gamma, SeriesReport, SeriesSpec};
use crate::jack::{ln_factorial, zonal};
use crate::orthogonal::{
    product_eigenvalues, sym2_eigenvalues, EulerKernel, EulerNormalization, OrthogonalRule, QuadratureSpec,
};
use crate::partitions::{gen_pochhammer, Partition};
use crate::quadrature::{adaptive_2d, AdaptiveSpec, Integral};

/// Minimum distance of a sample root from `0`, `1` and its neighbours.
pub const EDGE_TOLERANCE: f64 = 1e-12;

/// `(K − n)/2` is a negative integer, so the Euler partition sum is finite.
pub fn polynomial_regime(k: usize, n: usize) -> bool {
    n > k && (n - k).is_multiple_of(2)
}

/// Population model: dimension `K`, degrees of freedom `n = N − 1` and the
/// population squared canonical correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCorrModel {
    k: usize,
    n: usize,
    rho2: Vec<f64>,
}

impl CanonicalCorrModel {
    pub fn new(k: usize, n: usize, rho2: Vec<f64>) -> Result<Self> {
        check_dimensions(k, n)?;
        if rho2.len() != k {
            return Err(Error::InvalidArgument(format!(
                "expected {k} squared canonical correlations, got {}",
                rho2.len()
            )));
        }
        for (i, &r) in rho2.iter().enumerate() {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidArgument(format!("rho2[{i}] = {r} is outside [0, 1)")));
            }
        }
        if rho2.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "rho2 must be weakly decreasing, got {rho2:?}"
            )));
        }
        Ok(Self { k, n, rho2 })
    }

    /// Model with every population correlation zero.
    pub fn null(k: usize, n: usize) -> Result<Self> {
        Self::new(k, n, vec![0.0; k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho2(&self) -> &[f64] {
        &self.rho2
    }

    pub fn is_polynomial(&self) -> bool {
        polynomial_regime(self.k, self.n)
    }

    /// `q = (n − K)/2` in the polynomial regime.
    pub fn q(&self) -> Option<usize> {
        self.is_polynomial().then(|| (self.n - self.k) / 2)
    }

    /// Total degree `K q` of the partition sum.
    pub fn polynomial_degree(&self) -> Option<usize> {
        self.q().map(|q| q * self.k)
    }
}

fn check_dimensions(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    if n < 2 * k {
        return Err(Error::InvalidArgument(format!(
            "n = {n} degrees of freedom is below 2K = {}",
            2 * k
        )));
    }
    Ok(())
}

/// Sample squared canonical correlations, strictly decreasing inside
/// `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSample {
    r2: Vec<f64>,
}

impl CorrelationSample {
    pub fn new(r2: Vec<f64>) -> Result<Self> {
        if r2.is_empty() {
            return Err(Error::InvalidSample("sample has no roots".into()));
        }
        for (i, &r) in r2.iter().enumerate() {
            if !(r > EDGE_TOLERANCE && r < 1.0 - EDGE_TOLERANCE) {
                return Err(Error::InvalidSample(format!(
                    "r2[{i}] = {r} is not inside (0, 1) by more than {EDGE_TOLERANCE:e}"
                )));
            }
        }
        for (i, w) in r2.windows(2).enumerate() {
            if !(w[0] - w[1] > EDGE_TOLERANCE) {
                return Err(Error::InvalidSample(format!(
                    "r2[{i}] = {} and r2[{}] = {} are not strictly decreasing",
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
        }
        Ok(Self { r2 })
    }

    /// Sorts decreasingly, then validates.
    pub fn from_unsorted(mut r2: Vec<f64>) -> Result<Self> {
        r2.sort_by(|a, b| b.total_cmp(a));
        Self::new(r2)
    }

    pub fn values(&self) -> &[f64] {
        &self.r2
    }

    pub fn len(&self) -> usize {
        self.r2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r2.is_empty()
    }
}

/// `ln c(K, n)`.
pub fn log_norm_constant(model: &CanonicalCorrModel) -> Result<f64> {
    ln_constant(model.k, model.n)
}

fn ln_constant(k: usize, n: usize) -> Result<f64> {
    check_dimensions(k, n)?;
    let kf = k as f64;
    let nf = n as f64;
    Ok(
        kf * kf / 2.0 * std::f64::consts::PI.ln() - 2.0 * ln_mv_gamma(k, kf / 2.0)? + ln_mv_gamma(k, nf / 2.0)?
            - ln_mv_gamma(k, (nf - kf) / 2.0)?,
    )
}

/// Everything but the constant and the `₂F₁` factor, in logs.
fn ln_root_factors(n: usize, rho2: &[f64], r2: &[f64]) -> f64 {
    let k = r2.len() as f64;
    let nf = n as f64;
    let edge = (nf - 2.0 * k - 1.0) / 2.0;
    let mut ln = nf / 2.0 * rho2.iter().map(|p| (-p).ln_1p()).sum::<f64>();
    for (i, &r) in r2.iter().enumerate() {
        ln += -0.5 * r.ln() + edge * (-r).ln_1p();
        for &s in &r2[i + 1..] {
            ln += (r - s).ln();
        }
    }
    ln
}

fn check_sample(model: &CanonicalCorrModel, sample: &CorrelationSample) -> Result<()> {
    if sample.len() != model.k {
        return Err(Error::InvalidSample(format!(
            "sample has {} roots but K = {}",
            sample.len(),
            model.k
        )));
    }
    Ok(())
}

/// Log density with the `₂F₁` factor summed as a zonal series. The series
/// report is returned alongside; non-convergence is flagged there rather
/// than raised.
pub fn log_density_series(
    sample: &CorrelationSample,
    model: &CanonicalCorrModel,
    spec: &SeriesSpec,
) -> Result<(f64, SeriesReport)> {
    check_sample(model, sample)?;
    let half_n = model.n as f64 / 2.0;
    let (f, report) = hyper_two_matrix(
        &[half_n, half_n],
        &[model.k as f64 / 2.0],
        &model.rho2,
        sample.values(),
        zonal(),
        spec,
    )?;
    if !(f > 0.0) {
        return Err(Error::Domain(format!(
            "truncated hypergeometric factor is {f}; raise max_degree"
        )));
    }
    Ok((
        ln_constant(model.k, model.n)? + f.ln() + ln_root_factors(model.n, &model.rho2, sample.values()),
        report,
    ))
}

/// Log density from the finite Euler partition sum. Fails with
/// [`Error::NotPolynomial`] outside the polynomial regime.
pub fn log_density_polynomial(
    sample: &CorrelationSample,
    model: &CanonicalCorrModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    PolynomialDensity::new(model.k, model.n, quad)?.log_density(model.rho2(), sample)
}

/// Reusable polynomial-form density for fixed `(K, n)`: the partition sum
/// and the `O(K)` nodes are built once and shared by every evaluation.
#[derive(Debug, Clone)]
pub struct PolynomialDensity {
    k: usize,
    n: usize,
    q: usize,
    ln_const: f64,
    kernel: EulerKernel,
    rule: OrthogonalRule,
}

impl PolynomialDensity {
    pub fn new(k: usize, n: usize, quad: &QuadratureSpec) -> Result<Self> {
        check_dimensions(k, n)?;
        if !polynomial_regime(k, n) {
            let hint = if k.is_multiple_of(2) {
                "K even requires n even (N odd)"
            } else {
                "K odd requires n odd (N even)"
            };
            return Err(Error::NotPolynomial(format!(
                "K = {k}, n = {n}: (K - n)/2 is not a negative integer; {hint}, or use the series form"
            )));
        }
        let half_n = n as f64 / 2.0;
        let q = (n - k) / 2;
        let kernel = EulerKernel::new(
            half_n,
            half_n,
            k as f64 / 2.0,
            k,
            zonal(),
            q * k,
            EulerNormalization::Plain,
        )?;
        Ok(Self {
            k,
            n,
            q,
            ln_const: ln_constant(k, n)?,
            kernel,
            rule: OrthogonalRule::new(k, quad)?,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Total degree `K q` of the partition sum.
    pub fn degree(&self) -> usize {
        self.kernel.max_degree()
    }

    pub fn kernel(&self) -> &EulerKernel {
        &self.kernel
    }

    fn check_args(&self, rho2: &[f64], r2: &[f64]) -> Result<()> {
        if rho2.len() != self.k || r2.len() != self.k {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for rho2 and r2, got {} and {}",
                self.k,
                rho2.len(),
                r2.len()
            )));
        }
        if rho2.iter().chain(r2).any(|v| !(0.0..1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "rho2 {rho2:?} and r2 {r2:?} must lie in [0, 1)"
            )));
        }
        Ok(())
    }

    /// `₂F₁^{(K)}(n/2, n/2; K/2; P², R²)` by the Euler relation.
    pub fn hypergeometric_factor(&self, rho2: &[f64], r2: &[f64]) -> Result<f64> {
        self.check_args(rho2, r2)?;
        if self.k == 2 {
            let (sx0, sx1) = (rho2[0].sqrt(), rho2[1].sqrt());
            let mut acc = 0.0;
            for (h, w) in self.rule.points() {
                let hyh = |i: usize, j: usize| h[(i, 0)] * r2[0] * h[(j, 0)] + h[(i, 1)] * r2[1] * h[(j, 1)];
                let mu = sym2_eigenvalues(sx0 * sx0 * hyh(0, 0), sx0 * sx1 * hyh(0, 1), sx1 * sx1 * hyh(1, 1));
                acc += w * self.kernel.integrand2(mu)?;
            }
            return Ok(acc);
        }
        self.rule
            .try_integrate(|h| self.kernel.integrand(&product_eigenvalues(rho2, h, r2)))
    }

    /// Contribution of one partition `λ` to the `₂F₁` factor:
    /// `[(K/2 − n/2)_λ (n/2)_λ / ((K/2)_λ |λ|!)] ∫ |I − M|^{−n/2} C_λ(−M(I − M)^{−1}) dH`
    /// with `M = P² H R² H'`. Exactly zero when `l₁ > q`.
    pub fn lambda_term(&self, lambda: &Partition, rho2: &[f64], r2: &[f64]) -> Result<f64> {
        self.check_args(rho2, r2)?;
        if lambda.len() > self.k {
            return Ok(0.0);
        }
        let half_n = self.n as f64 / 2.0;
        let half_k = self.k as f64 / 2.0;
        let coef = gen_pochhammer(half_k - half_n, lambda, 2.0) * gen_pochhammer(half_n, lambda, 2.0)
            / gen_pochhammer(half_k, lambda, 2.0)
            * (-ln_factorial(lambda.weight())).exp();
        let jack = zonal();
        let integral = self.rule.try_integrate(|h| {
            let mu = product_eigenvalues(rho2, h, r2);
            let mut det = 1.0;
            let mut w = Vec::with_capacity(mu.len());
            for m in mu {
                det *= 1.0 - m;
                w.push(-m / (1.0 - m));
            }
            if !(det > 0.0) {
                return Err(Error::Domain("|I - M| is not positive".into()));
            }
            Ok(det.powf(-half_n) * jack.jack_c(lambda, &w))
        })?;
        Ok(coef * integral)
    }

    /// Log density at population roots `rho2` (sorted or not).
    pub fn log_density(&self, rho2: &[f64], sample: &CorrelationSample) -> Result<f64> {
        if sample.len() != self.k {
            return Err(Error::InvalidSample(format!(
                "sample has {} roots but K = {}",
                sample.len(),
                self.k
            )));
        }
        let f = self.hypergeometric_factor(rho2, sample.values())?;
        if !(f > 0.0) {
            return Err(Error::Domain(format!("hypergeometric factor evaluated to {f}")));
        }
        Ok(self.ln_const + f.ln() + ln_root_factors(self.n, rho2, sample.values()))
    }

    /// Density at `(r₁², r₂²)`, zero off the open ordered triangle.
    pub fn density_at(&self, rho2: &[f64], r2: &[f64]) -> f64 {
        match CorrelationSample::new(r2.to_vec()) {
            Ok(sample) => self.log_density(rho2, &sample).map_or(0.0, f64::exp),
            Err(_) => 0.0,
        }
    }
}

/// `∫∫ f` over `{r₁² > t₁, r₂² > t₂, 1 > r₁² > r₂² > 0}` for a two-root
/// density `f(r₁², r₂²)`. Integrates in `uᵢ = √(rᵢ²)` to remove the
/// `(rᵢ²)^{−1/2}` edge singularity.
pub fn ordered_triangle_integral(t: [f64; 2], spec: &AdaptiveSpec, density: impl Fn(f64, f64) -> f64) -> Integral {
    let lo1 = t[0].clamp(0.0, 1.0).sqrt();
    let lo2 = t[1].clamp(0.0, 1.0).sqrt();
    adaptive_2d(
        lo1.max(lo2),
        1.0,
        |_| lo2,
        |u1| u1,
        spec,
        |u1, u2| 4.0 * u1 * u2 * density(u1 * u1, u2 * u2),
    )
}
