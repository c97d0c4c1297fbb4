//! Jack functions `J_κ^{(α)}` and normalized Jack polynomials `C_κ^{(α)}`.
//!
//! The general evaluator expands `J_κ` in monomial symmetric functions
//! `M_λ`, `λ ≤ κ`. The coefficients come from the Laplace–Beltrami
//! eigen-equation
//!
//! ```text
//! Σ y_i² ∂²J/∂y_i² + (2/α) Σ_i Σ_{j≠i} y_i²/(y_i − y_j) ∂J/∂y_i
//!     = Σ k_i (k_i − 1 + (2/α)(m − i)) J
//! ```
//!
//! which acts triangularly on the monomial basis in dominance order, so the
//! coefficients follow from a back-substitution starting at `M_κ`. The
//! leading coefficient is fixed by the value of `J_κ` at the all-ones
//! vector. For two variables [`jack_c_2d`] gives a closed form in terms of a
//! terminating Gauss series.
//!
//! `α = 2` gives the real zonal polynomials, `α = 1` the complex ones and
//! `α = 1/2` the quaternionic ones.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use statrs::function::gamma::ln_gamma;

use crate::error::Result;
use crate::partitions::{check_alpha, dominated_unchecked, ln_hook_norm, partitions_of, Partition};

/// Monomial expansion `C_κ = Σ_λ c_λ M_λ`, restricted to `λ` with at most
/// `max_len` parts.
#[derive(Debug, Clone)]
pub struct MonomialExpansion {
    pub kappa: Partition,
    pub max_len: usize,
    /// `(λ, c_λ)` in reverse-lexicographic order of `λ`; `C`-normalized.
    pub terms: Vec<(Partition, f64)>,
    /// `ln(j_κ / (α^k k!))`: add to go from `C_κ` to `J_κ`.
    pub ln_c_to_j: f64,
}

impl MonomialExpansion {
    /// Evaluates `C_κ` at `eigs`; zero when `eigs.len() < l(κ)`.
    pub fn eval_c(&self, eigs: &[f64]) -> f64 {
        if eigs.len() < self.kappa.len() {
            return 0.0;
        }
        debug_assert!(eigs.len().min(self.kappa.weight()) <= self.max_len.max(eigs.len()));
        let powers = PowerTable::new(eigs, self.kappa.weight());
        self.terms
            .iter()
            .filter(|(lambda, _)| lambda.len() <= eigs.len())
            .map(|(lambda, c)| c * powers.monomial_symmetric(lambda.parts()))
            .sum()
    }
}

/// Cached Jack-polynomial evaluator for one value of α.
///
/// The cache is behind a read-write lock, so one evaluator can be shared by
/// reference across threads.
#[derive(Debug)]
pub struct JackEvaluator {
    alpha: f64,
    cache: RwLock<HashMap<(Partition, usize), Arc<MonomialExpansion>>>,
}

impl JackEvaluator {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Monomial expansion of `C_κ` over partitions with at most `max_len`
    /// parts (enough to evaluate at up to `max_len` variables).
    pub fn expansion(&self, kappa: &Partition, max_len: usize) -> Arc<MonomialExpansion> {
        let cap = max_len.min(kappa.weight()).max(kappa.len());
        let key = (kappa.clone(), cap);
        if let Some(found) = self.cache.read().expect("jack cache poisoned").get(&key) {
            return Arc::clone(found);
        }
        let built = Arc::new(build_expansion(kappa, cap, self.alpha));
        let mut guard = self.cache.write().expect("jack cache poisoned");
        Arc::clone(guard.entry(key).or_insert(built))
    }

    /// Jack function `J_κ^{(α)}` at the given eigenvalues.
    pub fn jack_j(&self, kappa: &Partition, eigs: &[f64]) -> f64 {
        if eigs.len() < kappa.len() {
            return 0.0;
        }
        if kappa.is_empty() {
            return 1.0;
        }
        let exp = self.expansion(kappa, eigs.len());
        exp.eval_c(eigs) * exp.ln_c_to_j.exp()
    }

    /// Normalized Jack polynomial `C_κ^{(α)}` at the given eigenvalues.
    pub fn jack_c(&self, kappa: &Partition, eigs: &[f64]) -> f64 {
        if eigs.len() < kappa.len() {
            return 0.0;
        }
        if kappa.is_empty() {
            return 1.0;
        }
        self.expansion(kappa, eigs.len()).eval_c(eigs)
    }
}

/// Process-wide zonal (`α = 2`) evaluator.
pub fn zonal() -> &'static JackEvaluator {
    static ZONAL: OnceLock<JackEvaluator> = OnceLock::new();
    ZONAL.get_or_init(|| JackEvaluator::new(2.0).expect("alpha = 2 is valid"))
}

/// Eigenvalue offset `ρ_λ = Σ l_i(l_i − 1) − (2/α) Σ (i − 1) l_i`.
///
/// Differs from the eigenvalue of the differential operator by a constant
/// that depends only on `m` and the weight.
fn rho(parts: &[usize], alpha: f64) -> f64 {
    parts
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let l = l as f64;
            l * (l - 1.0) - 2.0 / alpha * i as f64 * l
        })
        .sum()
}

fn build_expansion(kappa: &Partition, cap: usize, alpha: f64) -> MonomialExpansion {
    let k = kappa.weight();
    if k == 0 {
        return MonomialExpansion {
            kappa: kappa.clone(),
            max_len: cap,
            terms: vec![(Partition::empty(), 1.0)],
            ln_c_to_j: 0.0,
        };
    }
    let lambdas: Vec<Partition> = partitions_of(k, cap)
        .into_iter()
        .filter(|l| dominated_unchecked(l.parts(), kappa.parts()))
        .collect();
    let index: HashMap<&[usize], usize> = lambdas.iter().enumerate().map(|(i, l)| (l.parts(), i)).collect();

    // Monic coefficients (leading coefficient 1); reverse-lex order is a
    // linear extension of dominance, so every μ > λ is already known.
    let rho_kappa = rho(kappa.parts(), alpha);
    let mut monic = vec![0.0; lambdas.len()];
    monic[0] = 1.0;
    let mut mu = Vec::with_capacity(cap);
    for (idx, lambda) in lambdas.iter().enumerate().skip(1) {
        let parts = lambda.parts();
        let mut acc = 0.0;
        for i in 0..parts.len() {
            for j in (i + 1)..parts.len() {
                for t in 1..=parts[j] {
                    mu.clear();
                    mu.extend_from_slice(parts);
                    mu[i] += t;
                    mu[j] -= t;
                    mu.sort_unstable_by(|a, b| b.cmp(a));
                    while mu.last() == Some(&0) {
                        mu.pop();
                    }
                    if let Some(&m_idx) = index.get(mu.as_slice()) {
                        let w = (parts[i] as f64 - parts[j] as f64) + 2.0 * t as f64;
                        acc += w * monic[m_idx];
                    }
                }
            }
        }
        monic[idx] = 2.0 / alpha * acc / (rho_kappa - rho(parts, alpha));
    }

    // Pin J_κ(1,…,1) in l(κ) variables.
    let l = kappa.len();
    let monic_at_ones: f64 = lambdas
        .iter()
        .zip(&monic)
        .filter(|(lam, _)| lam.len() == l)
        .map(|(lam, c)| c * ones_count(lam.parts(), l))
        .sum();
    let ln_j_at_ones = ln_jack_j_identity(kappa, l, alpha);
    let ln_monic_to_j = ln_j_at_ones - monic_at_ones.ln();
    let ln_j_to_c = ln_j_to_c(kappa, alpha);
    let scale = (ln_monic_to_j + ln_j_to_c).exp();

    MonomialExpansion {
        kappa: kappa.clone(),
        max_len: cap,
        terms: lambdas
            .into_iter()
            .zip(monic)
            .map(|(lam, c)| (lam, c * scale))
            .collect(),
        ln_c_to_j: -ln_j_to_c,
    }
}

/// `ln(α^k k! / j_κ)`.
fn ln_j_to_c(kappa: &Partition, alpha: f64) -> f64 {
    let k = kappa.weight();
    if k == 0 {
        return 0.0;
    }
    k as f64 * alpha.ln() + ln_factorial(k) - ln_hook_norm(kappa, alpha).expect("nonempty")
}

pub(crate) fn ln_factorial(k: usize) -> f64 {
    statrs::function::factorial::ln_factorial(k as u64)
}

/// `M_λ(1,…,1)` in `m` variables: number of distinct arrangements.
fn ones_count(parts: &[usize], m: usize) -> f64 {
    if parts.len() > m {
        return 0.0;
    }
    let mut ln = ln_factorial(m) - ln_factorial(m - parts.len());
    let mut i = 0;
    while i < parts.len() {
        let mut j = i;
        while j < parts.len() && parts[j] == parts[i] {
            j += 1;
        }
        ln -= ln_factorial(j - i);
        i = j;
    }
    ln.exp().round()
}

/// `ln J_κ(1,…,1) = k ln α + Σ_i ln(((m − i + 1)/α)_{k_i})`.
fn ln_jack_j_identity(kappa: &Partition, m: usize, alpha: f64) -> f64 {
    kappa.weight() as f64 * alpha.ln()
        + kappa
            .parts()
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let a = (m - i) as f64 / alpha;
                ln_gamma(a + k as f64) - ln_gamma(a)
            })
            .sum::<f64>()
}

/// `ln C_κ(I_m)`; `-inf` when `m < l(κ)`.
pub fn ln_jack_c_identity(alpha: f64, kappa: &Partition, m: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if kappa.len() > m {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_j_to_c(kappa, alpha) + ln_jack_j_identity(kappa, m, alpha))
}

/// Closed form `C_κ(I_m) = (α^k k!/j_κ) · α^k ∏_i ((m − i + 1)/α)_{k_i}`.
pub fn jack_c_identity(alpha: f64, kappa: &Partition, m: usize) -> Result<f64> {
    Ok(ln_jack_c_identity(alpha, kappa, m)?.exp())
}

/// Closed form for `C_{(k1,k2)}^{(α)}(y1, y2)`.
///
/// With `ρ = k1 − k2` the ratio `C_κ(Y)/C_κ(I_2)` is a single terminating
/// Gauss series in `z = (y1 + y2)²/(4 y1 y2)`: the even branch uses
/// `F(−ρ/2, ρ/2 + 1/α; 1/2; z)` and the odd branch
/// `(y1 + y2)/2 · F(1/α + (1 + ρ)/2, 1/2 − ρ/2; 3/2; z)`, weighted by
/// `A_1 = (−1)^n ∏_{i<n}(1 + 2i)/(1 + 2(1/α + i))` and `A_2 = (2n + 1) A_1`.
///
/// Each power `z^j` is multiplied through by the prefactor
/// `(y1 y2)^{(k1+k2)/2}` (resp. `(k1+k2−1)/2`) so only integer powers of
/// `y1 y2` appear. The result is then regular at `y1 y2 = 0` and real for
/// negative eigenvalues.
pub fn jack_c_2d(alpha: f64, kappa: &Partition, y1: f64, y2: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if kappa.len() > 2 {
        return Ok(0.0);
    }
    let (k1, k2) = (kappa.part(0), kappa.part(1));
    if k1 + k2 == 0 {
        return Ok(1.0);
    }
    let rho = k1 - k2;
    let n = rho / 2;
    let inv_alpha = 1.0 / alpha;
    let a1_even: f64 = (0..n)
        .map(|i| {
            let i = i as f64;
            -(1.0 + 2.0 * i) / (1.0 + 2.0 * (inv_alpha + i))
        })
        .product();
    let product = y1 * y2;
    let quarter_sum_sq = 0.25 * (y1 + y2) * (y1 + y2);

    let (upper, lower, exponent, prefactor) = if rho % 2 == 0 {
        (n as f64 + inv_alpha, 0.5, (k1 + k2) / 2, a1_even)
    } else {
        (
            inv_alpha + n as f64 + 1.0,
            1.5,
            (k1 + k2 - 1) / 2,
            (2 * n + 1) as f64 * a1_even * 0.5 * (y1 + y2),
        )
    };
    // Σ_j (−n)_j (upper)_j / ((lower)_j j!) (y1 y2)^{e−j} ((y1+y2)²/4)^j
    let mut coeff = 1.0;
    let mut sum = 0.0;
    for j in 0..=n {
        if j > 0 {
            let jf = (j - 1) as f64;
            coeff *= (-(n as f64) + jf) * (upper + jf) / ((lower + jf) * (jf + 1.0));
        }
        sum += coeff * product.powi((exponent - j) as i32) * quarter_sum_sq.powi(j as i32);
    }
    Ok(prefactor * sum * jack_c_identity(alpha, kappa, 2)?)
}

/// Powers of each eigenvalue up to a maximum degree.
pub(crate) struct PowerTable {
    rows: Vec<Vec<f64>>,
}

impl PowerTable {
    pub(crate) fn new(eigs: &[f64], max_degree: usize) -> Self {
        let rows = eigs
            .iter()
            .map(|&y| {
                let mut row = Vec::with_capacity(max_degree + 1);
                let mut acc = 1.0;
                for _ in 0..=max_degree {
                    row.push(acc);
                    acc *= y;
                }
                row
            })
            .collect();
        Self { rows }
    }

    /// Monomial symmetric function `M_λ` at the tabulated eigenvalues.
    pub(crate) fn monomial_symmetric(&self, parts: &[usize]) -> f64 {
        let m = self.rows.len();
        if parts.len() > m {
            return 0.0;
        }
        match m {
            0 => 1.0,
            1 => self.rows[0][parts.first().copied().unwrap_or(0)],
            2 => {
                let (a, b) = (parts.first().copied().unwrap_or(0), parts.get(1).copied().unwrap_or(0));
                let r = &self.rows;
                if a == b {
                    r[0][a] * r[1][a]
                } else {
                    r[0][a] * r[1][b] + r[0][b] * r[1][a]
                }
            }
            _ => {
                let mut exps: Vec<usize> = parts.to_vec();
                exps.resize(m, 0);
                exps.sort_unstable();
                let mut total = 0.0;
                loop {
                    total += exps.iter().zip(&self.rows).map(|(&e, row)| row[e]).product::<f64>();
                    if !next_permutation(&mut exps) {
                        break;
                    }
                }
                total
            }
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{hook_norm, ln_lower_hook_product};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn j_examples() {
        let ev = JackEvaluator::new(2.0).unwrap();
        assert!(close(ev.jack_j(&p(&[2]), &[1.0, 1.0]), 8.0, 1e-12));
        assert_eq!(ev.jack_j(&p(&[1, 1, 1]), &[0.3, 0.7]), 0.0);
        // J_(1) = α^1 (m/α)_1 / m · Σ y at m variables ⇒ J_(1) = Σ y.
        let y = [0.4, -1.3];
        assert!(close(ev.jack_j(&p(&[1]), &y), y[0] + y[1], 1e-12));
    }

    #[test]
    fn c_examples() {
        for alpha in [0.5, 1.0, 2.0] {
            let ev = JackEvaluator::new(alpha).unwrap();
            let y = [0.3, -0.8, 1.7];
            assert!(close(ev.jack_c(&p(&[1]), &y), y.iter().sum(), 1e-12));
        }
        let ev = JackEvaluator::new(2.0).unwrap();
        assert!(close(ev.jack_c(&p(&[2]), &[1.0, 1.0]), 8.0 / 3.0, 1e-12));
        assert!(close(ev.jack_c(&p(&[1, 1]), &[1.0, 1.0]), 4.0 / 3.0, 1e-12));
    }

    #[test]
    fn zonal_degree_two_and_three_match_tables() {
        // Real zonal polynomials in monomials: C_(2) = M_2 + 2/3 M_11,
        // C_(1,1) = 4/3 M_11, C_(3) = M_3 + 3/5 M_21 + 2/5 M_111.
        let ev = JackEvaluator::new(2.0).unwrap();
        let c2 = ev.expansion(&p(&[2]), 3);
        assert!(close(c2.terms[0].1, 1.0, 1e-12));
        assert!(close(c2.terms[1].1, 2.0 / 3.0, 1e-12));
        let c11 = ev.expansion(&p(&[1, 1]), 3);
        assert!(close(c11.terms[0].1, 4.0 / 3.0, 1e-12));
        let c3 = ev.expansion(&p(&[3]), 3);
        let coeffs: Vec<f64> = c3.terms.iter().map(|t| t.1).collect();
        assert!(close(coeffs[0], 1.0, 1e-12));
        assert!(close(coeffs[1], 3.0 / 5.0, 1e-12));
        assert!(close(coeffs[2], 2.0 / 5.0, 1e-12));
    }

    #[test]
    fn leading_j_coefficient_is_lower_hook_product() {
        for alpha in [0.5, 1.0, 2.0, 3.7] {
            let ev = JackEvaluator::new(alpha).unwrap();
            for k in 1..=7 {
                for kappa in partitions_of(k, k) {
                    let exp = ev.expansion(&kappa, k);
                    let lead_j = exp.terms[0].1 * exp.ln_c_to_j.exp();
                    let expected = ln_lower_hook_product(&kappa, alpha).exp();
                    assert!(close(lead_j, expected, 1e-10), "alpha={alpha} kappa={kappa}");
                }
            }
        }
    }

    #[test]
    fn coefficient_of_all_ones_monomial_in_j_is_factorial() {
        // J_κ has coefficient k! on M_{1^k} for every α.
        for alpha in [0.5, 1.0, 2.0] {
            let ev = JackEvaluator::new(alpha).unwrap();
            for kappa in partitions_of(5, 5) {
                let exp = ev.expansion(&kappa, 5);
                let (last, c) = exp.terms.last().unwrap();
                assert_eq!(last, &p(&[1, 1, 1, 1, 1]));
                assert!(close(c * exp.ln_c_to_j.exp(), 120.0, 1e-10));
            }
        }
    }

    #[test]
    fn identity_closed_form_examples() {
        assert!(close(jack_c_identity(2.0, &p(&[1]), 2).unwrap(), 2.0, 1e-12));
        assert!(close(jack_c_identity(2.0, &p(&[2]), 2).unwrap(), 8.0 / 3.0, 1e-12));
        assert!(close(jack_c_identity(1.0, &p(&[1]), 3).unwrap(), 3.0, 1e-12));
        assert_eq!(jack_c_identity(2.0, &p(&[1, 1, 1]), 2).unwrap(), 0.0);
    }

    #[test]
    fn identity_closed_form_matches_evaluator() {
        for alpha in [0.5, 1.0, 2.0] {
            let ev = JackEvaluator::new(alpha).unwrap();
            for m in 1..=4 {
                for kappa in partitions_of(6, m) {
                    let ones = vec![1.0; m];
                    let a = ev.jack_c(&kappa, &ones);
                    let b = jack_c_identity(alpha, &kappa, m).unwrap();
                    assert!(close(a, b, 1e-11), "alpha={alpha} m={m} kappa={kappa}");
                }
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!(close(jack_c_2d(2.0, &p(&[2]), 1.0, 1.0).unwrap(), 8.0 / 3.0, 1e-12));
        let (y1, y2) = (0.37, -1.21);
        assert!(close(jack_c_2d(2.0, &p(&[1]), y1, y2).unwrap(), y1 + y2, 1e-12));
        assert!(close(
            jack_c_2d(2.0, &p(&[1, 1]), y1, y2).unwrap(),
            4.0 / 3.0 * y1 * y2,
            1e-12
        ));
    }

    #[test]
    fn closed_form_table_constants() {
        // A_1 for the even branch at n = 2 from the three table rows.
        let a1 = |alpha: f64, n: usize| -> f64 {
            (0..n)
                .map(|i| -(1.0 + 2.0 * i as f64) / (1.0 + 2.0 * (1.0 / alpha + i as f64)))
                .product()
        };
        let n = 2.0;
        assert!(close(a1(0.5, 2), 3.0 / ((2.0 * n + 1.0) * (2.0 * n + 3.0)), 1e-14));
        assert!(close(a1(1.0, 2), 1.0 / (2.0 * n + 1.0), 1e-14));
        assert!(close(a1(2.0, 2), 24.0 / (16.0 * 4.0), 1e-14));
    }

    #[test]
    fn closed_form_handles_zero_product() {
        let ev = JackEvaluator::new(2.0).unwrap();
        for kappa in partitions_of(7, 2) {
            let a = jack_c_2d(2.0, &kappa, 0.0, 0.9).unwrap();
            let b = ev.jack_c(&kappa, &[0.0, 0.9]);
            assert!(close(a, b, 1e-10), "kappa={kappa}: {a} vs {b}");
        }
    }

    #[test]
    fn closed_form_matches_oracle_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for alpha in [0.5, 1.0, 2.0] {
            let ev = JackEvaluator::new(alpha).unwrap();
            for _ in 0..100 {
                let k = rng.random_range(0..=8);
                let all = partitions_of(k, 2);
                let kappa = &all[rng.random_range(0..all.len())];
                let y1 = rng.random_range(0.05..2.0);
                let y2 = rng.random_range(0.05..2.0);
                let a = jack_c_2d(alpha, kappa, y1, y2).unwrap();
                let b = ev.jack_c(kappa, &[y1, y2]);
                assert!(close(a, b, 1e-10), "alpha={alpha} kappa={kappa}");
            }
        }
    }

    #[test]
    fn normalization_survives_factorial_overflow() {
        // 180! overflows f64; C_(180, 2)(y) must stay finite and positive.
        let ev = JackEvaluator::new(2.0).unwrap();
        let v = ev.jack_c(&p(&[180, 2]), &[0.9, 0.5]);
        assert!(v.is_finite() && v > 0.0, "{v}");
        assert!(close(ev.jack_c(&p(&[180]), &[0.99]), 0.99f64.powi(180), 1e-10));
    }

    #[test]
    fn hook_norm_consistency_with_normalization() {
        // C_(k)^{(α)} in one variable is y^k for every α.
        for alpha in [0.5, 1.0, 2.0] {
            let ev = JackEvaluator::new(alpha).unwrap();
            for k in 1..8 {
                assert!(close(ev.jack_c(&p(&[k]), &[1.3]), 1.3f64.powi(k as i32), 1e-12));
            }
            assert!(hook_norm(&p(&[3, 2]), alpha).unwrap() > 0.0);
        }
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        assert!(JackEvaluator::new(0.0).is_err());
        assert!(JackEvaluator::new(-1.0).is_err());
        assert!(jack_c_2d(-2.0, &p(&[1]), 1.0, 1.0).is_err());
    }

    #[test]
    fn shared_across_threads() {
        let ev = JackEvaluator::new(2.0).unwrap();
        let kappa = p(&[3, 1]);
        let reference = ev.jack_c(&kappa, &[0.2, 0.5]);
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| assert_eq!(ev.jack_c(&kappa, &[0.2, 0.5]), reference));
            }
        });
    }
}
