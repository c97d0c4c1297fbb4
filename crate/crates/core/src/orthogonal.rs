//! Integration over the orthogonal group with its normalized Haar measure
//! and the Euler-relation evaluator for `₂F₁` of two matrix arguments.
//!
//! On `O(2)` the measure is split evenly between rotations `R(θ)` and
//! reflections `R(θ) diag(1, −1)`, each averaged over `θ ∈ [0, 2π)` with a
//! Gauss–Legendre rule. Other dimensions fall back to Monte Carlo over
//! Haar-distributed matrices (QR of a Gaussian matrix with the sign of
//! `diag(R)` absorbed into `Q`).
//!
//! # Euler relation
//!
//! ```text
//! ₂F₁(a₁, a₂; b₁; X, Y) = Σ_k (1/k!) Σ_κ [(b₁ − a₁)_κ (a₂)_κ / (b₁)_κ]
//!     ∫_{O(m)} |I − X H Y H'|^{−a₂} C_κ(−X H Y H' (I − X H Y H')^{−1}) dH
//! ```
//!
//! The sum carries no `1/C_κ(I_m)` factor: applying the one-matrix Euler
//! transformation inside `∫ ₂F₁(a₁, a₂; b₁; X H Y H') dH` yields exactly this
//! form. [`EulerNormalization::DivideByIdentity`] exists so the alternative
//! reading can be checked numerically against the series definition; it
//! does not match (see the tests of this module).

use nalgebra::{DMatrix, Matrix2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergeom::termination_degree;
use crate::jack::{ln_factorial, ln_jack_c_identity, JackEvaluator, PowerTable};
use crate::partitions::{gen_pochhammer, partitions_of, Partition};
use crate::quadrature::GaussLegendre;

/// Quadrature settings for integrals over `O(K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes over the rotation angle (`K = 2`).
    pub nodes: usize,
    /// Average over both connected components of `O(2)`.
    pub include_reflections: bool,
    /// Haar samples for the Monte Carlo fallback (`K > 2`).
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 64,
            include_reflections: true,
            mc_samples: 20_000,
            seed: 0x5eed,
        }
    }
}

impl QuadratureSpec {
    pub fn with_nodes(nodes: usize) -> Self {
        Self {
            nodes,
            ..Self::default()
        }
    }
}

/// Weighted point set approximating the normalized Haar measure on `O(K)`.
#[derive(Debug, Clone)]
pub struct OrthogonalRule {
    dim: usize,
    points: Vec<(DMatrix<f64>, f64)>,
}

impl OrthogonalRule {
    pub fn new(dim: usize, spec: &QuadratureSpec) -> Result<Self> {
        match dim {
            0 => Err(Error::InvalidArgument(
                "orthogonal group dimension must be positive".into(),
            )),
            1 => Ok(Self {
                dim,
                points: vec![
                    (DMatrix::from_element(1, 1, 1.0), 0.5),
                    (DMatrix::from_element(1, 1, -1.0), 0.5),
                ],
            }),
            2 => {
                if spec.nodes == 0 {
                    return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
                }
                let points = o2_points(spec)
                    .into_iter()
                    .map(|(h, w)| (DMatrix::from_iterator(2, 2, h.iter().copied()), w))
                    .collect();
                Ok(Self { dim, points })
            }
            _ => {
                if spec.mc_samples == 0 {
                    return Err(Error::InvalidArgument("Monte Carlo needs at least one sample".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                let w = 1.0 / spec.mc_samples as f64;
                let points = (0..spec.mc_samples)
                    .map(|_| (haar_orthogonal(dim, &mut rng), w))
                    .collect();
                Ok(Self { dim, points })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[(DMatrix<f64>, f64)] {
        &self.points
    }

    pub fn integrate(&self, mut f: impl FnMut(&DMatrix<f64>) -> f64) -> f64 {
        self.points.iter().map(|(h, w)| w * f(h)).sum()
    }

    pub fn try_integrate(&self, mut f: impl FnMut(&DMatrix<f64>) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (h, w) in &self.points {
            acc += w * f(h)?;
        }
        Ok(acc)
    }
}

fn o2_points(spec: &QuadratureSpec) -> Vec<(Matrix2<f64>, f64)> {
    let rule = GaussLegendre::cached(spec.nodes);
    let components = if spec.include_reflections { 2 } else { 1 };
    let mut points = Vec::with_capacity(rule.nodes.len() * components);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let theta = std::f64::consts::PI * (x + 1.0);
        let (s, c) = theta.sin_cos();
        // Mean over [0, 2π): (1/2π)·π·Σ w_i = Σ w_i / 2.
        let weight = 0.5 * w / components as f64;
        points.push((Matrix2::new(c, -s, s, c), weight));
        if spec.include_reflections {
            points.push((Matrix2::new(c, s, s, -c), weight));
        }
    }
    points
}

/// Normalized Haar integral of `f` over `O(2)`.
pub fn integrate_o2(f: impl Fn(&Matrix2<f64>) -> f64, spec: &QuadratureSpec) -> f64 {
    o2_points(spec).iter().map(|(h, w)| w * f(h)).sum()
}

/// Haar-distributed orthogonal `dim × dim` matrix.
pub fn haar_orthogonal(dim: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Eigenvalues of the symmetric 2×2 matrix `[[a, b], [b, d]]`.
pub(crate) fn sym2_eigenvalues(a: f64, b: f64, d: f64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mean + radius, mean - radius]
}

/// Eigenvalues of `X H Y H'` for diagonal `X`, `Y` (`X ≥ 0`), taken from the
/// similar symmetric matrix `X^{1/2} H Y H' X^{1/2}`.
pub fn product_eigenvalues(x: &[f64], h: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let m = x.len();
    let sx: Vec<f64> = x.iter().map(|v| v.max(0.0).sqrt()).collect();
    let entry = |i: usize, j: usize| -> f64 {
        let hyh: f64 = (0..m).map(|k| h[(i, k)] * y[k] * h[(j, k)]).sum();
        sx[i] * hyh * sx[j]
    };
    match m {
        1 => vec![entry(0, 0)],
        2 => sym2_eigenvalues(entry(0, 0), entry(0, 1), entry(1, 1)).to_vec(),
        _ => {
            let s = DMatrix::from_fn(m, m, entry);
            s.symmetric_eigenvalues().iter().copied().collect()
        }
    }
}

/// Which partition sum to use inside the Euler integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EulerNormalization {
    /// `Σ_κ c_κ C_κ(·)`: matches the series definition.
    #[default]
    Plain,
    /// `Σ_κ c_κ C_κ(·)/C_κ(I_m)`: kept only for the numerical comparison.
    DivideByIdentity,
}

/// Partition sum of the Euler relation collapsed into one symmetric
/// polynomial `S(w) = Σ_κ c_κ C_κ(w) = Σ_μ d_μ M_μ(w)` with
/// `c_κ = (b₁ − a₁)_κ (a₂)_κ / ((b₁)_κ k!)`.
#[derive(Debug, Clone)]
pub struct EulerKernel {
    dim: usize,
    a2: f64,
    max_degree: usize,
    terminates: bool,
    /// Nonzero `(κ, c_κ)` before collapsing, in degree then reverse-lex order.
    terms: Vec<(Partition, f64)>,
    /// `(μ, d_μ)` of the collapsed polynomial.
    collapsed: Vec<(Partition, f64)>,
    /// Same polynomial as `(μ₁, μ₂, d_μ)` for the two-variable fast path.
    pairs: Vec<(usize, usize, f64)>,
}

impl EulerKernel {
    pub fn new(
        a1: f64,
        a2: f64,
        b1: f64,
        dim: usize,
        jack: &JackEvaluator,
        series_cap: usize,
        normalization: EulerNormalization,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let alpha = jack.alpha();
        let stop = termination_degree(&[b1 - a1], dim);
        let max_degree = stop.map_or(series_cap, |d| d.min(series_cap));
        let mut terms = Vec::new();
        for k in 0..=max_degree {
            for kappa in partitions_of(k, dim) {
                let num = gen_pochhammer(b1 - a1, &kappa, alpha) * gen_pochhammer(a2, &kappa, alpha);
                if num == 0.0 {
                    continue;
                }
                let den = gen_pochhammer(b1, &kappa, alpha);
                if den == 0.0 {
                    return Err(Error::DenominatorPole(b1));
                }
                let mut c = num / den * (-ln_factorial(k)).exp();
                if normalization == EulerNormalization::DivideByIdentity {
                    c /= ln_jack_c_identity(alpha, &kappa, dim)?.exp();
                }
                terms.push((kappa, c));
            }
        }
        let mut collapsed: Vec<(Partition, f64)> = Vec::new();
        for (kappa, c) in &terms {
            for (mu, d) in &jack.expansion(kappa, dim).terms {
                match collapsed.iter_mut().find(|(m, _)| m == mu) {
                    Some(slot) => slot.1 += c * d,
                    None => collapsed.push((mu.clone(), c * d)),
                }
            }
        }
        let pairs = collapsed.iter().map(|(mu, d)| (mu.part(0), mu.part(1), *d)).collect();
        Ok(Self {
            dim,
            a2,
            max_degree,
            terminates: stop.is_some_and(|d| d <= series_cap),
            terms,
            collapsed,
            pairs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest partition weight kept.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The partition sum is finite (no truncation).
    pub fn terminates(&self) -> bool {
        self.terminates
    }

    pub fn terms(&self) -> &[(Partition, f64)] {
        &self.terms
    }

    /// Collapsed monomial coefficients `(μ, d_μ)`.
    pub fn polynomial(&self) -> &[(Partition, f64)] {
        &self.collapsed
    }

    /// `S(w)` at eigenvalues `w` of the zonal argument.
    pub fn partition_sum(&self, w: &[f64]) -> f64 {
        let powers = PowerTable::new(w, self.max_degree);
        self.collapsed
            .iter()
            .map(|(mu, d)| d * powers.monomial_symmetric(mu.parts()))
            .sum()
    }

    /// `|I − M|^{−a₂} S(−M(I − M)^{−1})` from the eigenvalues `mu` of `M`.
    pub fn integrand(&self, mu: &[f64]) -> Result<f64> {
        let mut det = 1.0;
        let mut w = Vec::with_capacity(mu.len());
        for &m in mu {
            let gap = 1.0 - m;
            if !(gap > 0.0) {
                return Err(Error::Domain(format!(
                    "|I - XHYH'| must be positive; eigenvalue {m} of XHYH' is >= 1"
                )));
            }
            det *= gap;
            w.push(-m / gap);
        }
        Ok(det.powf(-self.a2) * self.partition_sum(&w))
    }

    /// [`Self::integrand`] for `dim = 2` without heap allocation.
    pub fn integrand2(&self, mu: [f64; 2]) -> Result<f64> {
        debug_assert_eq!(self.dim, 2);
        const STACK: usize = 64;
        if self.max_degree >= STACK {
            return self.integrand(&mu);
        }
        let (g0, g1) = (1.0 - mu[0], 1.0 - mu[1]);
        if !(g0 > 0.0 && g1 > 0.0) {
            return Err(Error::Domain(format!(
                "|I - XHYH'| must be positive; eigenvalues of XHYH' are {mu:?}"
            )));
        }
        let (w0, w1) = (-mu[0] / g0, -mu[1] / g1);
        let mut p0 = [1.0; STACK];
        let mut p1 = [1.0; STACK];
        for e in 1..=self.max_degree {
            p0[e] = p0[e - 1] * w0;
            p1[e] = p1[e - 1] * w1;
        }
        let sum: f64 = self
            .pairs
            .iter()
            .map(|&(a, b, d)| {
                if a == b {
                    d * p0[a] * p1[a]
                } else {
                    d * (p0[a] * p1[b] + p0[b] * p1[a])
                }
            })
            .sum();
        Ok((g0 * g1).powf(-self.a2) * sum)
    }
}

/// `₂F₁^{(2)}(a₁, a₂; b₁; X, Y)` through the Euler relation, integrating over
/// `O(m)` with `m = X_eigs.len()`. The partition sum stops at the
/// termination degree `m q` when `b₁ − a₁ = −q`, otherwise at `series_cap`.
#[allow(clippy::too_many_arguments)]
pub fn euler_2f1(
    a1: f64,
    a2: f64,
    b1: f64,
    x_eigs: &[f64],
    y_eigs: &[f64],
    jack: &JackEvaluator,
    spec: &QuadratureSpec,
    series_cap: usize,
    normalization: EulerNormalization,
) -> Result<f64> {
    if x_eigs.len() != y_eigs.len() {
        return Err(Error::InvalidArgument("matrix arguments differ in dimension".into()));
    }
    if x_eigs.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument(
            "X must be positive semidefinite (nonnegative eigenvalues)".into(),
        ));
    }
    let kernel = EulerKernel::new(a1, a2, b1, x_eigs.len(), jack, series_cap, normalization)?;
    let rule = OrthogonalRule::new(x_eigs.len(), spec)?;
    rule.try_integrate(|h| kernel.integrand(&product_eigenvalues(x_eigs, h, y_eigs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergeom::{hyper_two_matrix, SeriesSpec};
    use rand::Rng;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn o2_measure_is_normalized() {
        for nodes in [1, 7, 64, 128] {
            let total = integrate_o2(|_| 1.0, &QuadratureSpec::with_nodes(nodes));
            assert!((total - 1.0).abs() <= 1e-14, "nodes={nodes}: {total}");
        }
        assert!((integrate_o2(|_| 3.25, &QuadratureSpec::default()) - 3.25).abs() < 1e-14);
    }

    #[test]
    fn trace_is_conjugation_invariant() {
        let v = integrate_o2(|h| (h * h.transpose()).trace(), &QuadratureSpec::default());
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn splitting_identity_matches_monte_carlo() {
        // ∫ C_κ(X H Y H') dH = C_κ(X) C_κ(Y) / C_κ(I), checked against an
        // independent Monte Carlo average over random rotations.
        let jack = JackEvaluator::new(2.0).unwrap();
        let x = [0.7, 0.2];
        let y = [0.9, 0.4];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for kappa in [p(&[2]), p(&[1, 1]), p(&[3, 1])] {
            let exact =
                jack.jack_c(&kappa, &x) * jack.jack_c(&kappa, &y) / ln_jack_c_identity(2.0, &kappa, 2).unwrap().exp();
            let quad = integrate_o2(
                |h| {
                    let hd = DMatrix::from_iterator(2, 2, h.iter().copied());
                    jack.jack_c(&kappa, &product_eigenvalues(&x, &hd, &y))
                },
                &QuadratureSpec::default(),
            );
            let draws = 40_000;
            let mc: f64 = (0..draws)
                .map(|_| {
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let (s, c) = theta.sin_cos();
                    let h = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
                    jack.jack_c(&kappa, &product_eigenvalues(&x, &h, &y))
                })
                .sum::<f64>()
                / draws as f64;
            assert!((quad - exact).abs() < 1e-12 * exact.abs(), "{kappa}: {quad} vs {exact}");
            assert!((mc - exact).abs() < 1e-2 * exact.abs(), "{kappa}: mc {mc} vs {exact}");
        }
    }

    #[test]
    fn measure_is_rotation_invariant() {
        let r0 = Matrix2::new(0.6, -0.8, 0.8, 0.6);
        let f = |h: &Matrix2<f64>| {
            let m = h * Matrix2::new(0.9, 0.0, 0.0, 0.2) * h.transpose() * Matrix2::new(0.5, 0.0, 0.0, 0.1);
            (1.0 - m.trace() + m.determinant()).powf(-3.0) + h[(0, 1)].powi(3) + h[(0, 0)] * h[(1, 0)]
        };
        let spec = QuadratureSpec::with_nodes(64);
        let a = integrate_o2(f, &spec);
        let b = integrate_o2(|h| f(&(h * r0)), &spec);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn haar_samples_are_orthogonal_with_both_determinants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut signs = [0usize; 2];
        for _ in 0..200 {
            let q = haar_orthogonal(3, &mut rng);
            let err = (&q.transpose() * &q - DMatrix::identity(3, 3)).abs().max();
            assert!(err < 1e-12);
            signs[usize::from(q.determinant() > 0.0)] += 1;
        }
        assert!(signs[0] > 60 && signs[1] > 60);
    }

    #[test]
    fn euler_at_zero_argument_is_one() {
        let jack = JackEvaluator::new(2.0).unwrap();
        let v = euler_2f1(
            4.0,
            2.5,
            1.0,
            &[0.0, 0.0],
            &[0.3, 0.2],
            &jack,
            &QuadratureSpec::default(),
            60,
            EulerNormalization::Plain,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn euler_with_q_zero_is_determinant_integral() {
        let jack = JackEvaluator::new(2.0).unwrap();
        let (x, y, a2) = ([0.4, 0.1], [0.6, 0.3], 2.5);
        let spec = QuadratureSpec::default();
        let v = euler_2f1(1.5, a2, 1.5, &x, &y, &jack, &spec, 60, EulerNormalization::Plain).unwrap();
        let rule = OrthogonalRule::new(2, &spec).unwrap();
        let det = rule.integrate(|h| {
            product_eigenvalues(&x, h, &y)
                .iter()
                .map(|m| 1.0 - m)
                .product::<f64>()
                .powf(-a2)
        });
        assert!((v - det).abs() < 1e-13);
    }

    #[test]
    fn euler_matches_series_and_fixes_normalization() {
        let jack = JackEvaluator::new(2.0).unwrap();
        let (a1, a2, b1) = (6.0, 6.0, 1.0);
        let (x, y) = ([0.2, 0.1], [0.5, 0.2]);
        let (series, report) =
            hyper_two_matrix(&[a1, a2], &[b1], &x, &y, &jack, &SeriesSpec::with_max_degree(80)).unwrap();
        assert!(report.converged);
        let spec = QuadratureSpec::default();
        let plain = euler_2f1(a1, a2, b1, &x, &y, &jack, &spec, 80, EulerNormalization::Plain).unwrap();
        let divided = euler_2f1(
            a1,
            a2,
            b1,
            &x,
            &y,
            &jack,
            &spec,
            80,
            EulerNormalization::DivideByIdentity,
        )
        .unwrap();
        assert!((plain - series).abs() <= 1e-6 * series.abs(), "{plain} vs {series}");
        assert!((divided - series).abs() > 1e-3 * series.abs());
    }

    #[test]
    fn terminating_kernel_skips_partitions_beyond_q() {
        let jack = JackEvaluator::new(2.0).unwrap();
        let kernel = EulerKernel::new(6.0, 6.0, 1.0, 2, &jack, 100, EulerNormalization::Plain).unwrap();
        assert!(kernel.terminates());
        assert_eq!(kernel.max_degree(), 10);
        assert!(kernel.terms().iter().all(|(k, _)| k.largest_part() <= 5));
        // Every partition with k₁ ≤ 5 and at most two parts survives.
        assert_eq!(kernel.terms().len(), 21);
    }

    #[test]
    fn domain_error_when_determinant_vanishes() {
        let jack = JackEvaluator::new(2.0).unwrap();
        let err = euler_2f1(
            3.0,
            2.0,
            1.0,
            &[1.5, 0.2],
            &[0.9, 0.1],
            &jack,
            &QuadratureSpec::default(),
            20,
            EulerNormalization::Plain,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn monte_carlo_fallback_is_normalized_and_close() {
        let jack = JackEvaluator::new(2.0).unwrap();
        let spec = QuadratureSpec {
            mc_samples: 4000,
            ..QuadratureSpec::default()
        };
        let rule = OrthogonalRule::new(3, &spec).unwrap();
        assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        let (x, y) = ([0.3, 0.2, 0.1], [0.4, 0.3, 0.1]);
        let kappa = p(&[2, 1]);
        let exact =
            jack.jack_c(&kappa, &x) * jack.jack_c(&kappa, &y) / ln_jack_c_identity(2.0, &kappa, 3).unwrap().exp();
        let mc = rule.integrate(|h| jack.jack_c(&kappa, &product_eigenvalues(&x, h, &y)));
        assert!((mc - exact).abs() < 0.05 * exact, "{mc} vs {exact}");
    }
}
