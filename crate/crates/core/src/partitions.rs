//! Integer partitions and the combinatorics built on them.
//!
//! A [`Partition`] indexes symmetric polynomials. Besides enumeration this
//! module provides the conjugate, the dominance order, the hook product
//! `j_κ` used to normalize Jack polynomials and the α-deformed Pochhammer
//! symbol `(a)_κ`.

use std::fmt;

use crate::error::{Error, Result};

/// Weakly decreasing sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Vec<usize>);

impl Partition {
    /// Builds a partition, dropping trailing zeros. Fails on increasing parts.
    pub fn new(parts: impl Into<Vec<usize>>) -> Result<Self> {
        let mut parts = parts.into();
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "parts of a partition must be weakly decreasing: {parts:?}"
            )));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "zero part inside a partition: {parts:?}"
            )));
        }
        Ok(Self(parts))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Sum of the parts.
    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Part `i` (0-based), zero past the length.
    pub fn part(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn largest_part(&self) -> usize {
        self.part(0)
    }

    /// Conjugate partition: `k'_i = #{j : k_j >= i}`.
    pub fn conjugate(&self) -> Partition {
        let first = self.largest_part();
        let parts = (1..=first)
            .map(|i| self.0.iter().take_while(|&&k| k >= i).count())
            .collect();
        Partition(parts)
    }

    /// Dominance order `self <= other`: partial sums of `self` never exceed
    /// those of `other`.
    pub fn dominated_by(&self, other: &Partition) -> Result<bool> {
        let (a, b) = (self.weight(), other.weight());
        if a != b {
            return Err(Error::WeightMismatch(a, b));
        }
        Ok(dominated_unchecked(&self.0, &other.0))
    }
}

pub(crate) fn dominated_unchecked(lambda: &[usize], kappa: &[usize]) -> bool {
    let n = lambda.len().max(kappa.len());
    let (mut sl, mut sk) = (0usize, 0usize);
    for i in 0..n {
        sl += lambda.get(i).copied().unwrap_or(0);
        sk += kappa.get(i).copied().unwrap_or(0);
        if sl > sk {
            return false;
        }
    }
    true
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of `k` with at most `max_length` parts, in
/// reverse-lexicographic order. `k = 0` yields the empty partition only.
pub fn partitions_of(k: usize, max_length: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(k, k, max_length, &mut current, &mut out);
    out
}

fn fill(remaining: usize, max_part: usize, slots: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    if slots == 0 {
        return;
    }
    let top = remaining.min(max_part);
    // The remaining slots must be able to absorb what is left.
    for part in (1..=top).rev() {
        if part * slots < remaining {
            break;
        }
        current.push(part);
        fill(remaining - part, part, slots - 1, current, out);
        current.pop();
    }
}

/// Dominance order `lambda <= kappa`.
pub fn dominance_leq(lambda: &Partition, kappa: &Partition) -> Result<bool> {
    lambda.dominated_by(kappa)
}

/// Conjugate of `p`.
pub fn conjugate(p: &Partition) -> Partition {
    p.conjugate()
}

/// Scalar rising factorial `(a)_n = a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, s| acc * (a + s as f64))
}

/// α-deformed Pochhammer symbol `(a)_κ = ∏_i (a - (i-1)/α)_{k_i}`.
///
/// Vanishes exactly when one of the row chains passes through zero, which is
/// what makes series with a nonpositive integer parameter terminate.
pub fn gen_pochhammer(a: f64, p: &Partition, alpha: f64) -> f64 {
    p.parts()
        .iter()
        .enumerate()
        .map(|(i, &k)| pochhammer(a - i as f64 / alpha, k))
        .product()
}

/// `ln |(a)_κ|` together with the sign of `(a)_κ`. The sign is 0 when the
/// symbol vanishes, in which case the log is `-inf`.
pub fn ln_gen_pochhammer(a: f64, p: &Partition, alpha: f64) -> (f64, f64) {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for (i, &k) in p.parts().iter().enumerate() {
        let base = a - i as f64 / alpha;
        for s in 0..k {
            let f = base + s as f64;
            if f == 0.0 {
                return (f64::NEG_INFINITY, 0.0);
            }
            if f < 0.0 {
                sign = -sign;
            }
            ln += f.abs().ln();
        }
    }
    (ln, sign)
}

/// Upper and lower hook lengths at cell `(i, j)` (1-based).
fn hooks(p: &Partition, conj: &Partition, i: usize, j: usize, alpha: f64) -> (f64, f64) {
    let arm = (p.part(i - 1) - j) as f64;
    let leg = (conj.part(j - 1) - i) as f64;
    let upper = leg + alpha * (arm + 1.0);
    let lower = leg + 1.0 + alpha * arm;
    (upper, lower)
}

/// Hook product `j_κ = ∏ h_*^κ(i,j) h^*_κ(i,j)` over the cells of `p`.
pub fn hook_norm(p: &Partition, alpha: f64) -> Result<f64> {
    Ok(ln_hook_norm(p, alpha)?.exp())
}

/// `ln j_κ`; see [`hook_norm`].
pub fn ln_hook_norm(p: &Partition, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if p.is_empty() {
        return Err(Error::InvalidArgument(
            "hook product is undefined for the empty partition".into(),
        ));
    }
    let conj = p.conjugate();
    let mut ln = 0.0;
    for (i, &row) in p.parts().iter().enumerate() {
        for j in 1..=row {
            let (u, l) = hooks(p, &conj, i + 1, j, alpha);
            ln += u.ln() + l.ln();
        }
    }
    Ok(ln)
}

/// `ln ∏ h^*_κ(i,j)`, the product of lower hooks. This is the coefficient of
/// the leading monomial `M_κ` in the Jack function `J_κ`.
pub fn ln_lower_hook_product(p: &Partition, alpha: f64) -> f64 {
    let conj = p.conjugate();
    let mut ln = 0.0;
    for (i, &row) in p.parts().iter().enumerate() {
        for j in 1..=row {
            ln += hooks(p, &conj, i + 1, j, alpha).1.ln();
        }
    }
    ln
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Jack parameter alpha must be positive and finite, got {alpha}"
        )))
    }
}
