//! Hypergeometric functions of two matrix arguments, the real multivariate
//! gamma function and terminating Gauss series.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::jack::{ln_factorial, ln_jack_c_identity, JackEvaluator};
use crate::partitions::{ln_gen_pochhammer, partitions_of, Partition};

/// Largest log-magnitude accepted for a single series term.
const LN_OVERFLOW: f64 = 700.0;

/// Truncation control for a hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    /// Highest total degree `k` summed.
    pub max_degree: usize,
    /// Relative size below which a per-degree increment counts as negligible.
    pub tail_tolerance: f64,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        Self {
            max_degree: 60,
            tail_tolerance: 1e-12,
        }
    }
}

impl SeriesSpec {
    pub fn with_max_degree(max_degree: usize) -> Self {
        Self {
            max_degree,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_degree == 0 || !(self.tail_tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "series spec needs max_degree >= 1 and tail_tolerance > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Convergence diagnostics of a truncated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    /// Partial sum after each degree `0..=last degree summed`.
    pub partial_sums: Vec<f64>,
    /// Sum of the terms of each degree.
    pub increments: Vec<f64>,
    /// Largest absolute term of the last degree summed.
    pub last_term_magnitude: f64,
    /// The series provably stops before `max_degree`; the value is exact.
    pub terminated: bool,
    /// `terminated`, or the last three increments are each at most
    /// `tail_tolerance · |sum|`.
    pub converged: bool,
}

impl SeriesReport {
    fn new(increments: Vec<f64>, last_term_magnitude: f64, terminated: bool, tol: f64) -> Self {
        let mut partial_sums = Vec::with_capacity(increments.len());
        let mut acc = 0.0;
        for inc in &increments {
            acc += inc;
            partial_sums.push(acc);
        }
        let converged = terminated
            || (increments.len() >= 3
                && increments[increments.len() - 3..]
                    .iter()
                    .all(|inc| inc.abs() <= tol * acc.abs()));
        Self {
            partial_sums,
            increments,
            last_term_magnitude,
            terminated,
            converged,
        }
    }

    pub fn value(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

/// `ln Γ_m(a)` with `Γ_m(a) = π^{m(m−1)/4} ∏_{i=1}^m Γ(a − (i−1)/2)`.
///
/// Only defined where every factor is positive, so `a > (m − 1)/2`.
pub fn ln_mv_gamma(m: usize, a: f64) -> Result<f64> {
    check_mv_gamma_args(m, a)?;
    let mut ln = (m * (m.saturating_sub(1))) as f64 / 4.0 * PI.ln();
    for i in 1..=m {
        let arg = a - (i - 1) as f64 / 2.0;
        if arg <= 0.0 {
            return Err(Error::Domain(format!(
                "ln Γ_{m}({a}) needs positive factors; factor {i} has argument {arg}"
            )));
        }
        ln += ln_gamma(arg);
    }
    Ok(ln)
}

/// Real multivariate gamma `Γ_m(a)`.
pub fn mv_gamma(m: usize, a: f64) -> Result<f64> {
    check_mv_gamma_args(m, a)?;
    let mut value = PI.powf((m * (m.saturating_sub(1))) as f64 / 4.0);
    for i in 1..=m {
        value *= gamma(a - (i - 1) as f64 / 2.0);
    }
    Ok(value)
}

fn check_mv_gamma_args(m: usize, a: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("multivariate gamma needs m >= 1".into()));
    }
    for i in 1..=m {
        let arg = a - (i - 1) as f64 / 2.0;
        if arg <= 0.0 && arg == arg.round() {
            return Err(Error::GammaPole { factor: i, arg });
        }
    }
    Ok(())
}

fn nonpositive_integer(x: f64) -> Option<usize> {
    (x <= 0.0 && x == x.round() && x.is_finite()).then(|| (-x) as usize)
}

/// Gauss series `₂F₁(a, b; c; x)` when `a` or `b` is a nonpositive integer.
pub fn gauss_2f1_terminating(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    let terms = match (nonpositive_integer(a), nonpositive_integer(b)) {
        (Some(p), Some(q)) => p.min(q),
        (Some(p), None) | (None, Some(p)) => p,
        (None, None) => return Err(Error::NonTerminating { a, b }),
    };
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..terms {
        let jf = j as f64;
        if c + jf == 0.0 {
            return Err(Error::DenominatorPole(c));
        }
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * x;
        sum += term;
    }
    Ok(sum)
}

/// Degree beyond which every term of a series with numerator parameters
/// `a` vanishes in `m` variables, if one exists.
pub fn termination_degree(a: &[f64], m: usize) -> Option<usize> {
    a.iter().filter_map(|&ai| nonpositive_integer(ai)).min().map(|q| q * m)
}

/// Truncated `pFq^{(m)}(a; b; X, Y)` of two matrix arguments given by
/// their eigenvalues:
///
/// ```text
/// Σ_k Σ_{κ ⊢ k} [(a_1)_κ ⋯ (a_p)_κ / ((b_1)_κ ⋯ (b_q)_κ)] C_κ(X) C_κ(Y) / (k! C_κ(I_m))
/// ```
///
/// Terms are summed degree by degree, partitions in reverse-lex order, so
/// the result is bit-reproducible.
pub fn hyper_two_matrix(
    a: &[f64],
    b: &[f64],
    x_eigs: &[f64],
    y_eigs: &[f64],
    jack: &JackEvaluator,
    spec: &SeriesSpec,
) -> Result<(f64, SeriesReport)> {
    spec.validate()?;
    if x_eigs.len() != y_eigs.len() || x_eigs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "matrix arguments must have the same positive dimension, got {} and {}",
            x_eigs.len(),
            y_eigs.len()
        )));
    }
    let m = x_eigs.len();
    let alpha = jack.alpha();
    let stop = termination_degree(a, m);
    let last = stop.map_or(spec.max_degree, |d| d.min(spec.max_degree));
    let terminated = stop.is_some_and(|d| d <= spec.max_degree);

    let mut increments = Vec::with_capacity(last + 1);
    let mut last_term_magnitude = 0.0;
    for k in 0..=last {
        let mut inc = 0.0;
        let mut largest: f64 = 0.0;
        for kappa in partitions_of(k, m) {
            let term = series_term(a, b, &kappa, x_eigs, y_eigs, jack, alpha, m, k)?;
            largest = largest.max(term.abs());
            inc += term;
        }
        increments.push(inc);
        last_term_magnitude = largest;
    }
    let report = SeriesReport::new(increments, last_term_magnitude, terminated, spec.tail_tolerance);
    Ok((report.value(), report))
}

#[allow(clippy::too_many_arguments)]
fn series_term(
    a: &[f64],
    b: &[f64],
    kappa: &Partition,
    x: &[f64],
    y: &[f64],
    jack: &JackEvaluator,
    alpha: f64,
    m: usize,
    k: usize,
) -> Result<f64> {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &ai in a {
        let (l, s) = ln_gen_pochhammer(ai, kappa, alpha);
        if s == 0.0 {
            return Ok(0.0);
        }
        ln += l;
        sign *= s;
    }
    for &bi in b {
        let (l, s) = ln_gen_pochhammer(bi, kappa, alpha);
        if s == 0.0 {
            return Err(Error::DenominatorPole(bi));
        }
        ln -= l;
        sign *= s;
    }
    let cx = jack.jack_c(kappa, x);
    let cy = jack.jack_c(kappa, y);
    if cx == 0.0 || cy == 0.0 {
        return Ok(0.0);
    }
    sign *= cx.signum() * cy.signum();
    ln += cx.abs().ln() + cy.abs().ln() - ln_factorial(k) - ln_jack_c_identity(alpha, kappa, m)?;
    if ln.is_nan() || ln > LN_OVERFLOW {
        return Err(Error::Overflow {
            degree: k,
            log_magnitude: ln,
        });
    }
    Ok(sign * ln.exp())
}

/// Scalar `pFq(a; b; x)` summed term by term up to degree `max_degree`.
pub fn scalar_pfq(a: &[f64], b: &[f64], x: f64, max_degree: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..max_degree {
        let jf = j as f64;
        let num: f64 = a.iter().map(|ai| ai + jf).product();
        let den: f64 = b.iter().map(|bi| bi + jf).product();
        term *= num / den * x / (jf + 1.0);
        sum += term;
    }
    sum
}
