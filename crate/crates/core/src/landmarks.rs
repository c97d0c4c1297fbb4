//! Landmark configurations, Helmert contrasts, Eulerian coordinates and the
//! sample squared canonical correlations between two configurations.
//!
//! # File format
//!
//! ```text
//! # optional comment lines
//! N K M
//! # optional label of the first configuration
//! x y          <- N rows of K numbers
//! ...
//!
//! # label of the second configuration
//! ...
//! ```
//!
//! A comment line directly above a block is that block's label. Numbers are
//! written with 17 significant digits so a write/parse cycle is bit exact.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::density::CorrelationSample;
use crate::error::{Error, Result};

/// One figure: `N` landmarks (rows) in `K` dimensions (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkConfiguration {
    pub label: String,
    pub coords: DMatrix<f64>,
}

impl LandmarkConfiguration {
    pub fn new(label: impl Into<String>, coords: DMatrix<f64>) -> Result<Self> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("landmark coordinates must be finite".into()));
        }
        if coords.nrows() == 0 || coords.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "configuration has no landmarks or no axes".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            coords,
        })
    }

    pub fn landmarks(&self) -> usize {
        self.coords.nrows()
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    /// Configuration restricted to the given landmark rows.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.landmarks()) {
            return Err(Error::InvalidArgument(format!(
                "landmark index {bad} out of range for {} landmarks",
                self.landmarks()
            )));
        }
        Self::new(self.label.clone(), self.coords.select_rows(rows.iter()))
    }
}

/// `(N − 1) × N` sub-Helmert matrix: row `j` (1-based) has `j` entries
/// `1/√(j(j+1))`, then `−j/√(j(j+1))`, then zeros.
pub fn helmert_submatrix(n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Helmert submatrix needs N >= 2, got {n}"
        )));
    }
    let mut l = DMatrix::zeros(n - 1, n);
    for j in 1..n {
        let jf = j as f64;
        let s = (jf * (jf + 1.0)).sqrt();
        for c in 0..j {
            l[(j - 1, c)] = 1.0 / s;
        }
        l[(j - 1, j)] = -jf / s;
    }
    Ok(l)
}

/// `L · X` for an `N × K` configuration.
pub fn helmertize(coords: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(helmert_submatrix(coords.nrows())? * coords)
}

/// Landmark-wise mean of configurations sharing `N` and `K`.
pub fn mean_configuration(configs: &[LandmarkConfiguration]) -> Result<DMatrix<f64>> {
    let first = configs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no configurations to average".into()))?;
    let mut sum = DMatrix::zeros(first.landmarks(), first.dim());
    for c in configs {
        if c.coords.shape() != sum.shape() {
            return Err(Error::InvalidArgument(format!(
                "configuration '{}' is {}x{}, expected {}x{}",
                c.label,
                c.landmarks(),
                c.dim(),
                first.landmarks(),
                first.dim()
            )));
        }
        sum += &c.coords;
    }
    Ok(sum / configs.len() as f64)
}

/// Helmertized coordinates `X = L(X* − μ_X)`, `Y = L(Y* − μ_Y)`, each
/// `(N − 1) × K`.
#[derive(Debug, Clone, PartialEq)]
pub struct HelmertizedPair {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

impl HelmertizedPair {
    /// Pair from matrices that are already Helmertized.
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.shape() != y.shape() {
            return Err(Error::InvalidArgument(format!(
                "X is {:?} but Y is {:?}",
                x.shape(),
                y.shape()
            )));
        }
        if x.nrows() < x.ncols() {
            return Err(Error::InvalidArgument(format!(
                "{} Helmertized rows cannot span {} dimensions",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(Self { x, y })
    }

    /// Subtracts the optional mean configurations, then Helmertizes both.
    pub fn from_configurations(
        x: &DMatrix<f64>,
        y: &DMatrix<f64>,
        x_mean: Option<&DMatrix<f64>>,
        y_mean: Option<&DMatrix<f64>>,
    ) -> Result<Self> {
        let center = |c: &DMatrix<f64>, mean: Option<&DMatrix<f64>>| -> Result<DMatrix<f64>> {
            match mean {
                Some(m) if m.shape() != c.shape() => Err(Error::InvalidArgument(format!(
                    "mean configuration is {:?} but the figure is {:?}",
                    m.shape(),
                    c.shape()
                ))),
                Some(m) => helmertize(&(c - m)),
                None => helmertize(c),
            }
        };
        Self::new(center(x, x_mean)?, center(y, y_mean)?)
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Degrees of freedom `n = N − 1`.
    pub fn degrees_of_freedom(&self) -> usize {
        self.x.nrows()
    }
}

/// Relative tolerance for declaring a triangular factor rank deficient.
const RANK_TOL: f64 = 1e-10;

fn orthonormal_basis(m: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    let qr = m.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if !(scale > 0.0) || r.diagonal().iter().any(|d| d.abs() <= RANK_TOL * scale) {
        return Err(Error::Singular(format!("{name} does not have full column rank")));
    }
    Ok(qr.q())
}

/// Squared canonical correlations: eigenvalues of
/// `(Y'Y)^{−1} Y'X (X'X)^{−1} X'Y`, sorted decreasingly and clamped to
/// `[0, 1]`.
///
/// With `X = Q_X R_X` and `Y = Q_Y R_Y` the matrix is similar to the
/// symmetric `(Q_X'Q_Y)'(Q_X'Q_Y)`, whose eigenvalues are computed instead.
/// Roots may sit at exactly `0` or `1`; see [`sample_from_pair`] for the
/// density-ready form.
pub fn squared_canonical_correlations(pair: &HelmertizedPair) -> Result<Vec<f64>> {
    let qx = orthonormal_basis(&pair.x, "X")?;
    let qy = orthonormal_basis(&pair.y, "Y")?;
    let m = qx.transpose() * qy;
    let s = m.transpose() * &m;
    let sym = (&s + s.transpose()) * 0.5;
    let mut roots: Vec<f64> = sym.symmetric_eigenvalues().iter().map(|v| v.clamp(0.0, 1.0)).collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok(roots)
}

/// [`squared_canonical_correlations`] validated as a density argument
/// (strictly ordered, inside `(0, 1)`).
pub fn sample_from_pair(pair: &HelmertizedPair) -> Result<CorrelationSample> {
    CorrelationSample::new(squared_canonical_correlations(pair)?)
}

/// `H X = [X₁; 0]` and `H Y = [U; V]` for an orthogonal `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerianCoordinates {
    /// Upper triangular with positive diagonal, `K × K`.
    pub x1: DMatrix<f64>,
    /// `K × K`.
    pub u: DMatrix<f64>,
    /// `(n − K) × K`.
    pub v: DMatrix<f64>,
    /// The orthogonal `n × n` matrix `H`.
    pub h: DMatrix<f64>,
}

/// Orthogonal-triangular factorization of `X` extended to a full orthogonal
/// `H`, applied to both matrices.
pub fn eulerian_coordinates(pair: &HelmertizedPair) -> Result<EulerianCoordinates> {
    let n = pair.degrees_of_freedom();
    let k = pair.dim();
    orthonormal_basis(&pair.x, "X")?;
    // QR of [X | I_n] yields a full n × n orthogonal factor whose leading
    // K columns span X.
    let mut aug = DMatrix::zeros(n, n + k);
    aug.view_mut((0, 0), (n, k)).copy_from(&pair.x);
    aug.view_mut((0, k), (n, n)).fill_with_identity();
    let q = aug.qr().q();
    let mut h = q.transpose();
    let hx = &h * &pair.x;
    for i in 0..k {
        if hx[(i, i)] < 0.0 {
            h.row_mut(i).neg_mut();
        }
    }
    let hx = &h * &pair.x;
    let hy = &h * &pair.y;
    Ok(EulerianCoordinates {
        x1: hx.view((0, 0), (k, k)).upper_triangle(),
        u: hy.rows(0, k).into_owned(),
        v: hy.rows(k, n - k).into_owned(),
        h,
    })
}

/// Roots of `|(U'U)(U'U + V'V)^{−1} − r² I| = 0`, sorted decreasingly.
pub fn eulerian_roots(coords: &EulerianCoordinates) -> Result<Vec<f64>> {
    let utu = coords.u.transpose() * &coords.u;
    let total = &utu + coords.v.transpose() * &coords.v;
    let inv = total.try_inverse().ok_or_else(|| Error::Singular("U'U + V'V".into()))?;
    let mut roots: Vec<f64> = (utu * inv).complex_eigenvalues().iter().map(|z| z.re).collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok(roots)
}

/// How mean configurations are removed before Helmertization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Centering {
    /// Sample mean for sides with several specimens, nothing for a single
    /// template or figure.
    #[default]
    Auto,
    None,
    SampleMean,
}

/// Forms one Helmertized pair per specimen of `y`. `x` holds either one
/// configuration per specimen or a single template/figure reused for all.
pub fn form_pairs(
    x: &[LandmarkConfiguration],
    y: &[LandmarkConfiguration],
    centering: Centering,
) -> Result<Vec<HelmertizedPair>> {
    if y.is_empty() || x.is_empty() {
        return Err(Error::InvalidArgument(
            "both sides need at least one configuration".into(),
        ));
    }
    if x.len() != 1 && x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "X has {} configurations and Y has {}; use one template or match the counts",
            x.len(),
            y.len()
        )));
    }
    let shape = y[0].coords.shape();
    if let Some(c) = x.iter().chain(y).find(|c| c.coords.shape() != shape) {
        return Err(Error::InvalidArgument(format!(
            "configuration '{}' is {}x{}, expected {}x{}",
            c.label,
            c.landmarks(),
            c.dim(),
            shape.0,
            shape.1
        )));
    }
    let mean_of = |side: &[LandmarkConfiguration]| -> Result<Option<DMatrix<f64>>> {
        match centering {
            Centering::None => Ok(None),
            Centering::Auto if side.len() == 1 => Ok(None),
            Centering::Auto | Centering::SampleMean => mean_configuration(side).map(Some),
        }
    };
    let (mx, my) = (mean_of(x)?, mean_of(y)?);
    y.iter()
        .enumerate()
        .map(|(j, yc)| {
            let xc = if x.len() == 1 { &x[0] } else { &x[j] };
            HelmertizedPair::from_configurations(&xc.coords, &yc.coords, mx.as_ref(), my.as_ref())
        })
        .collect()
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses the landmark text format.
pub fn parse_landmark_file(text: &str) -> Result<Vec<LandmarkConfiguration>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .peekable();

    // Header, skipping leading comments and blank lines.
    let (header_line, header) = loop {
        match lines.next() {
            None => return Err(parse_err(0, "missing header line 'N K M'")),
            Some((_, l)) if l.trim().is_empty() || l.trim_start().starts_with('#') => continue,
            Some(found) => break found,
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(
            header_line,
            format!("header must be 'N K M', found '{header}'"),
        ));
    }
    let mut dims = [0usize; 3];
    for (slot, f) in dims.iter_mut().zip(&fields) {
        *slot = f
            .parse()
            .map_err(|_| parse_err(header_line, format!("'{f}' is not a nonnegative integer")))?;
    }
    let [n, k, m] = dims;
    if n == 0 || k == 0 {
        return Err(parse_err(header_line, "N and K must be positive"));
    }

    let mut configs = Vec::with_capacity(m);
    let mut label = String::new();
    let mut rows: Vec<f64> = Vec::with_capacity(n * k);
    let mut block_start = 0;
    let finish =
        |rows: &mut Vec<f64>, label: &mut String, at: usize, configs: &mut Vec<LandmarkConfiguration>| -> Result<()> {
            if rows.is_empty() {
                return Ok(());
            }
            let found = rows.len() / k;
            if found != n {
                return Err(parse_err(
                    at,
                    format!("block {} has {found} rows, expected N = {n}", configs.len() + 1),
                ));
            }
            let coords = DMatrix::from_row_slice(n, k, rows);
            configs.push(LandmarkConfiguration {
                label: std::mem::take(label),
                coords,
            });
            rows.clear();
            Ok(())
        };
    let mut last_line = header_line;
    for (no, line) in lines {
        last_line = no;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            finish(&mut rows, &mut label, block_start, &mut configs)?;
            continue;
        }
        if let Some(comment) = line.trim_start().strip_prefix('#') {
            if rows.is_empty() {
                label = comment.strip_prefix(' ').unwrap_or(comment).to_string();
            }
            continue;
        }
        if rows.is_empty() {
            block_start = no;
            if configs.len() == m {
                return Err(parse_err(no, format!("more than M = {m} blocks")));
            }
        }
        let before = rows.len();
        for tok in trimmed.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(no, format!("'{tok}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(no, format!("non-finite value '{tok}'")));
            }
            rows.push(v);
        }
        if rows.len() - before != k {
            return Err(parse_err(
                no,
                format!("expected K = {k} values, found {}", rows.len() - before),
            ));
        }
        if rows.len() > n * k {
            return Err(parse_err(no, format!("block has more than N = {n} rows")));
        }
    }
    finish(&mut rows, &mut label, block_start, &mut configs)?;
    if configs.len() != m {
        return Err(parse_err(
            last_line,
            format!("expected M = {m} blocks, found {}", configs.len()),
        ));
    }
    Ok(configs)
}

/// Serializes configurations sharing `N` and `K`.
pub fn write_landmark_file(configs: &[LandmarkConfiguration]) -> Result<String> {
    let (n, k) = configs.first().map_or((0, 0), |c| c.coords.shape());
    if configs.is_empty() {
        return Err(Error::InvalidArgument("nothing to write".into()));
    }
    let mut out = String::new();
    writeln!(out, "{n} {k} {}", configs.len()).expect("writing to a String");
    for (i, c) in configs.iter().enumerate() {
        if c.coords.shape() != (n, k) {
            return Err(Error::InvalidArgument(format!(
                "configuration {} is {:?}, expected {:?}",
                i + 1,
                c.coords.shape(),
                (n, k)
            )));
        }
        if c.label.contains(['\n', '\r']) {
            return Err(Error::InvalidArgument("labels must fit on one line".into()));
        }
        if c.coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        if i > 0 {
            out.push('\n');
        }
        if !c.label.is_empty() {
            writeln!(out, "# {}", c.label).expect("writing to a String");
        }
        for r in 0..n {
            let row: Vec<String> = (0..k).map(|j| format!("{:.16e}", c.coords[(r, j)])).collect();
            writeln!(out, "{}", row.join(" ")).expect("writing to a String");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn helmert_examples() {
        let l = helmert_submatrix(3).unwrap();
        let s2 = 2f64.sqrt();
        let s6 = 6f64.sqrt();
        let expected = DMatrix::from_row_slice(2, 3, &[1.0 / s2, -1.0 / s2, 0.0, 1.0 / s6, 1.0 / s6, -2.0 / s6]);
        assert!((l - expected).amax() < 1e-15);
        let l5 = helmert_submatrix(5).unwrap();
        assert!((l5 * DMatrix::from_element(5, 1, 1.0)).amax() < 1e-15);
        let l7 = helmert_submatrix(7).unwrap();
        assert!((&l7 * l7.transpose() - DMatrix::identity(6, 6)).amax() < 1e-15);
        assert!(helmert_submatrix(1).is_err());
    }

    #[test]
    fn translation_is_removed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_matrix(&mut rng, 9, 2);
        let shift = DMatrix::from_fn(9, 2, |_, j| [3.5, -2.25][j]);
        let a = helmertize(&x).unwrap();
        let b = helmertize(&(&x + shift)).unwrap();
        assert!((a - b).amax() <= 1e-12);
    }

    #[test]
    fn identical_or_orthogonal_column_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_matrix(&mut rng, 12, 2);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, -1.0, 3.0]);
        let roots = squared_canonical_correlations(&HelmertizedPair::new(x.clone(), &x * a).unwrap()).unwrap();
        assert!(roots.iter().all(|r| (r - 1.0).abs() < 1e-12), "{roots:?}");
        let mut y = DMatrix::zeros(12, 2);
        y[(10, 0)] = 1.0;
        y[(11, 1)] = 1.0;
        let mut x = x;
        x.rows_mut(10, 2).fill(0.0);
        let roots = squared_canonical_correlations(&HelmertizedPair::new(x, y).unwrap()).unwrap();
        assert!(roots.iter().all(|r| r.abs() < 1e-12), "{roots:?}");
    }

    #[test]
    fn matches_block_wishart_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_matrix(&mut rng, 12, 2);
            let y = random_matrix(&mut rng, 12, 2);
            let roots = squared_canonical_correlations(&HelmertizedPair::new(x.clone(), y.clone()).unwrap()).unwrap();
            // A = Z'Z with Z = [Y | X].
            let a11 = y.transpose() * &y;
            let a12 = y.transpose() * &x;
            let a22 = x.transpose() * &x;
            let m = a11.try_inverse().unwrap() * &a12 * a22.try_inverse().unwrap() * a12.transpose();
            let mut other: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
            other.sort_by(|a, b| b.total_cmp(a));
            for (p, q) in roots.iter().zip(&other) {
                assert!((p - q).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eulerian_coordinates_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_matrix(&mut rng, 12, 2);
        let c = eulerian_coordinates(&HelmertizedPair::new(x.clone(), x.clone()).unwrap()).unwrap();
        assert!((&c.u - &c.x1).amax() < 1e-12);
        assert!(c.v.amax() < 1e-12);
        assert!(c.x1[(0, 0)] > 0.0 && c.x1[(1, 1)] > 0.0 && c.x1[(1, 0)] == 0.0);
        let mut hx = DMatrix::zeros(12, 2);
        hx.view_mut((0, 0), (2, 2)).copy_from(&c.x1);
        assert!((&c.h * &x - hx).amax() < 1e-10);
        assert!((&c.h * c.h.transpose() - DMatrix::identity(12, 12)).amax() < 1e-12);

        let qx = x.clone().qr().q();
        let c = eulerian_coordinates(&HelmertizedPair::new(qx.clone(), qx).unwrap()).unwrap();
        assert!((&c.x1 - DMatrix::identity(2, 2)).amax() < 1e-12);

        let y = random_matrix(&mut rng, 12, 2);
        let pair = HelmertizedPair::new(x, y).unwrap();
        let a = squared_canonical_correlations(&pair).unwrap();
        let b = eulerian_roots(&eulerian_coordinates(&pair).unwrap()).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let x = DMatrix::from_fn(6, 2, |i, _| i as f64);
        let y = DMatrix::from_fn(6, 2, |i, j| (i * j) as f64 + 1.0 + i as f64 * 0.1);
        let pair = HelmertizedPair::new(x, y).unwrap();
        assert!(matches!(squared_canonical_correlations(&pair), Err(Error::Singular(_))));
        assert!(matches!(eulerian_coordinates(&pair), Err(Error::Singular(_))));
    }

    #[test]
    fn form_pairs_replicates_templates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let template = LandmarkConfiguration::new("t", random_matrix(&mut rng, 7, 2)).unwrap();
        let pop: Vec<_> = (0..4)
            .map(|i| LandmarkConfiguration::new(format!("y{i}"), random_matrix(&mut rng, 7, 2)).unwrap())
            .collect();
        let pairs = form_pairs(std::slice::from_ref(&template), &pop, Centering::Auto).unwrap();
        assert_eq!(pairs.len(), 4);
        assert!(pairs.iter().all(|p| p.x == pairs[0].x && p.degrees_of_freedom() == 6));
        let mean = mean_configuration(&pop).unwrap();
        assert_eq!(pairs[2].y, helmertize(&(&pop[2].coords - &mean)).unwrap());
        assert!(form_pairs(&pop[..2], &pop, Centering::Auto).is_err());
    }

    #[test]
    fn parse_examples_and_errors() {
        let text = "# demo\n3 2 1\n0 0\n1 0\n0 1\n";
        let cfgs = parse_landmark_file(text).unwrap();
        assert_eq!(cfgs.len(), 1);
        assert_eq!(cfgs[0].coords.shape(), (3, 2));
        assert_eq!(cfgs[0].label, "");

        let labelled = "2 1 2\n# first\n1\n2\n\n# second\n3\n4\n";
        let cfgs = parse_landmark_file(labelled).unwrap();
        assert_eq!((cfgs[0].label.as_str(), cfgs[1].label.as_str()), ("first", "second"));
        assert_eq!(cfgs[1].coords[(1, 0)], 4.0);

        let short = parse_landmark_file("3 2 1\n0 0\n1 0\n").unwrap_err();
        assert!(matches!(short, Error::Parse { line: 2, .. }), "{short}");
        assert!(short.to_string().contains("2 rows, expected N = 3"));
        let bad = parse_landmark_file("3 2 1\n0 0\n1 nan\n0 1\n").unwrap_err();
        assert!(matches!(bad, Error::Parse { line: 3, .. }), "{bad}");
        let wide = parse_landmark_file("3 2 1\n0 0 0\n").unwrap_err();
        assert!(matches!(wide, Error::Parse { line: 2, .. }), "{wide}");
        let header = parse_landmark_file("3 2\n").unwrap_err();
        assert!(matches!(header, Error::Parse { line: 1, .. }), "{header}");
        assert!(parse_landmark_file("2 1 2\n1\n2\n").is_err());
        assert!(parse_landmark_file("2 1 1\n1\n2\n\n3\n4\n").is_err());
    }

    fn arb_dataset() -> impl Strategy<Value = Vec<LandmarkConfiguration>> {
        (1usize..6, 1usize..4, 1usize..4).prop_flat_map(|(n, k, m)| {
            proptest::collection::vec(
                (
                    "[a-z ]{0,8}",
                    proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), n * k),
                ),
                m,
            )
            .prop_map(move |blocks| {
                blocks
                    .into_iter()
                    .map(|(label, vals)| LandmarkConfiguration {
                        label: label.trim().to_string(),
                        coords: DMatrix::from_row_slice(n, k, &vals),
                    })
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_is_bit_exact(data in arb_dataset()) {
            let text = write_landmark_file(&data).unwrap();
            let back = parse_landmark_file(&text).unwrap();
            prop_assert_eq!(back.len(), data.len());
            for (a, b) in back.iter().zip(&data) {
                prop_assert_eq!(&a.label, &b.label);
                prop_assert!(a.coords.iter().zip(b.coords.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
            }
            prop_assert_eq!(write_landmark_file(&back).unwrap(), text);
        }

        #[test]
        fn axis_permutation_and_rotation_invariance(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_matrix(&mut rng, 10, 2);
            let y = random_matrix(&mut rng, 10, 2);
            let base = squared_canonical_correlations(&HelmertizedPair::new(x.clone(), y.clone()).unwrap()).unwrap();
            let swap = |m: &DMatrix<f64>| DMatrix::from_fn(m.nrows(), 2, |i, j| m[(i, 1 - j)]);
            let permuted = squared_canonical_correlations(&HelmertizedPair::new(swap(&x), swap(&y)).unwrap()).unwrap();
            let q = crate::orthogonal::haar_orthogonal(10, &mut rng);
            let rotated = squared_canonical_correlations(&HelmertizedPair::new(&q * &x, &q * &y).unwrap()).unwrap();
            for i in 0..2 {
                prop_assert!((base[i] - permuted[i]).abs() <= 1e-12);
                prop_assert!((base[i] - rotated[i]).abs() <= 1e-12);
            }
        }
    }
}
