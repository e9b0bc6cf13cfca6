//! Conditional-independence testing primitives: Fisher's z for continuous
//! data and the G² likelihood-ratio test for categorical data.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::column::{ColumnKind, FeatureColumn};
use crate::stats::{chi_square_sf, normal_cdf};

/// Clamp bound keeping the log transform finite on degenerate duplicates.
pub const CORR_CLAMP_EPS: f64 = 1e-12;

/// Residual variance below this (in correlation scale) means the tested
/// variable is linearly determined by the conditioning set, i.e. it is
/// conditionally degenerate and therefore independent of anything given z.
const DEGENERATE_RESIDUAL_TOL: f64 = 1e-10;

/// Determinant below this flags a collinear conditioning set: exact
/// duplicates inside z leave a tiny but nonzero determinant in floating
/// point, so try_inverse alone cannot be relied on.
const SINGULAR_DET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceConfig {
    pub alpha: f64,
    pub max_cond_size: usize,
}

impl SignificanceConfig {
    pub fn new(alpha: f64, max_cond_size: usize) -> Result<Self, CiError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CiError::InvalidAlpha(alpha));
        }
        Ok(Self { alpha, max_cond_size })
    }
}

impl Default for SignificanceConfig {
    fn default() -> Self {
        Self { alpha: 0.05, max_cond_size: 3 }
    }
}

/// Outcome of one conditional-independence test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    /// z-value for Fisher's z (signed), G² value for the categorical test.
    pub statistic: f64,
    pub p_value: f64,
    /// Verdict at the alpha the test was run with: p_value > alpha.
    pub independent: bool,
    /// G² degrees of freedom, or n - |z| - 3 for Fisher's z.
    pub dof_or_effective_n: i64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CiError {
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("correlation matrix is singular (collinear conditioning set)")]
    SingularMatrix,
    #[error("insufficient samples: need more than {required}, got {actual}")]
    InsufficientSamples { required: usize, actual: usize },
    #[error("column lengths differ")]
    LengthMismatch,
    #[error("column `{name}` is tagged {actual:?} but the test expects {expected:?}")]
    MixedTypes { name: String, actual: ColumnKind, expected: ColumnKind },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

fn check_lengths(x: &FeatureColumn, y: &FeatureColumn, z: &[&FeatureColumn]) -> Result<usize, CiError> {
    let n = x.len();
    if y.len() != n || z.iter().any(|c| c.len() != n) {
        return Err(CiError::LengthMismatch);
    }
    Ok(n)
}

/// Pearson correlation of two columns. Errors on zero variance.
pub fn pearson(x: &FeatureColumn, y: &FeatureColumn) -> Result<f64, CiError> {
    let n = x.len() as f64;
    let mx = x.mean();
    let my = y.mean();
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.values.iter().zip(&y.values) {
        let da = a - mx;
        let db = b - my;
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    if sxx / n <= 1e-24 {
        return Err(CiError::ZeroVariance(x.name.clone()));
    }
    if syy / n <= 1e-24 {
        return Err(CiError::ZeroVariance(y.name.clone()));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

fn clamp_corr(r: f64) -> f64 {
    r.clamp(-1.0 + CORR_CLAMP_EPS, 1.0 - CORR_CLAMP_EPS)
}

/// Partial correlation from the correlation matrix of [x, y, z1..zm],
/// by the precision-matrix formula r = -P_xy / sqrt(P_xx * P_yy).
///
/// If x or y is linearly determined by z (zero residual variance), the
/// pair is conditionally degenerate and 0 is returned: conditional on z
/// the variable is constant, hence independent of everything.
pub fn partial_corr_from_matrix(c: &DMatrix<f64>) -> Result<f64, CiError> {
    let k = c.nrows();
    debug_assert!(k >= 2 && c.ncols() == k);
    if k == 2 {
        return Ok(clamp_corr(c[(0, 1)]));
    }
    let m = k - 2;
    let czz = c.view((2, 2), (m, m)).into_owned();
    if czz.determinant().abs() < SINGULAR_DET_TOL {
        return Err(CiError::SingularMatrix);
    }
    let czz_inv = czz.try_inverse().ok_or(CiError::SingularMatrix)?;
    let cxz = c.view((0, 2), (1, m)).transpose();
    let cyz = c.view((1, 2), (1, m)).transpose();
    let resid_x = 1.0 - (cxz.transpose() * &czz_inv * &cxz)[(0, 0)];
    let resid_y = 1.0 - (cyz.transpose() * &czz_inv * &cyz)[(0, 0)];
    if resid_x < DEGENERATE_RESIDUAL_TOL || resid_y < DEGENERATE_RESIDUAL_TOL {
        return Ok(0.0);
    }
    let p = c.clone().try_inverse().ok_or(CiError::SingularMatrix)?;
    let denom = p[(0, 0)] * p[(1, 1)];
    if !(denom > 0.0) {
        return Err(CiError::SingularMatrix);
    }
    let r = -p[(0, 1)] / denom.sqrt();
    if !r.is_finite() {
        return Err(CiError::SingularMatrix);
    }
    Ok(clamp_corr(r))
}

/// Correlation matrix of [x, y, z1..zm]. Errors on any zero-variance column.
fn correlation_matrix(
    x: &FeatureColumn,
    y: &FeatureColumn,
    z: &[&FeatureColumn],
) -> Result<DMatrix<f64>, CiError> {
    let cols: Vec<&FeatureColumn> = std::iter::once(x).chain(std::iter::once(y)).chain(z.iter().copied()).collect();
    let k = cols.len();
    let mut c = DMatrix::identity(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let r = pearson(cols[i], cols[j])?;
            c[(i, j)] = r;
            c[(j, i)] = r;
        }
    }
    Ok(c)
}

/// Partial correlation of x and y given z, clamped to ±(1 - 1e-12).
pub fn partial_correlation(
    x: &FeatureColumn,
    y: &FeatureColumn,
    z: &[&FeatureColumn],
) -> Result<f64, CiError> {
    let n = check_lengths(x, y, z)?;
    if n <= z.len() + 3 {
        return Err(CiError::InsufficientSamples { required: z.len() + 3, actual: n });
    }
    let c = correlation_matrix(x, y, z)?;
    partial_corr_from_matrix(&c)
}

/// Fisher's z statistic and verdict from an already-computed partial
/// correlation on n samples with |z| = cond_size.
pub fn fisher_z_from_partial(r: f64, n: usize, cond_size: usize, alpha: f64) -> CiResult {
    let eff = n as i64 - cond_size as i64 - 3;
    let statistic = (eff as f64).sqrt() * 0.5 * ((1.0 + r) / (1.0 - r)).ln();
    let p_value = (2.0 * (1.0 - normal_cdf(statistic.abs()))).clamp(0.0, 1.0);
    CiResult { statistic, p_value, independent: p_value > alpha, dof_or_effective_n: eff }
}

/// Fisher's z conditional-independence test for continuous data.
pub fn fisher_z_test(
    x: &FeatureColumn,
    y: &FeatureColumn,
    z: &[&FeatureColumn],
    cfg: &SignificanceConfig,
) -> Result<CiResult, CiError> {
    let n = check_lengths(x, y, z)?;
    if n <= z.len() + 3 {
        return Err(CiError::InsufficientSamples { required: z.len() + 3, actual: n });
    }
    let r = partial_correlation(x, y, z)?;
    Ok(fisher_z_from_partial(r, n, z.len(), cfg.alpha))
}

/// G² likelihood-ratio conditional-independence test for categorical data.
///
/// Contingency tables of x by y are formed within each stratum (one per
/// observed configuration of z). Zero-observed cells contribute nothing;
/// dof counts only strata with nonzero totals.
pub fn g2_test(
    x: &FeatureColumn,
    y: &FeatureColumn,
    z: &[&FeatureColumn],
    cfg: &SignificanceConfig,
) -> Result<CiResult, CiError> {
    let n = check_lengths(x, y, z)?;
    if n == 0 {
        return Err(CiError::InsufficientSamples { required: 1, actual: 0 });
    }
    let lx = x.levels().len();
    let ly = y.levels().len();

    // stratum key -> (cell counts, row totals, col totals, total)
    type Stratum = (BTreeMap<(i64, i64), f64>, BTreeMap<i64, f64>, BTreeMap<i64, f64>, f64);
    let mut strata: BTreeMap<Vec<i64>, Stratum> = BTreeMap::new();
    for row in 0..n {
        let key: Vec<i64> = z.iter().map(|c| c.values[row].round() as i64).collect();
        let xv = x.values[row].round() as i64;
        let yv = y.values[row].round() as i64;
        let s = strata.entry(key).or_default();
        *s.0.entry((xv, yv)).or_default() += 1.0;
        *s.1.entry(xv).or_default() += 1.0;
        *s.2.entry(yv).or_default() += 1.0;
        s.3 += 1.0;
    }

    let mut g2 = 0.0;
    for (cells, rows, cols, total) in strata.values() {
        for (&(xv, yv), &obs) in cells {
            let expected = rows[&xv] * cols[&yv] / total;
            g2 += 2.0 * obs * (obs / expected).ln();
        }
    }
    let g2 = g2.max(0.0);

    let dof = (lx.saturating_sub(1) * ly.saturating_sub(1) * strata.len()) as u64;
    if dof == 0 {
        // A variable has a single observed level: verdict forced to independent.
        return Ok(CiResult { statistic: 0.0, p_value: 1.0, independent: true, dof_or_effective_n: 0 });
    }
    let p_value = chi_square_sf(g2, dof);
    Ok(CiResult { statistic: g2, p_value, independent: p_value > cfg.alpha, dof_or_effective_n: dof as i64 })
}

/// Dispatch to Fisher's z or G² after checking the column tags agree
/// with the requested kind.
pub fn ci_test(
    x: &FeatureColumn,
    y: &FeatureColumn,
    z: &[&FeatureColumn],
    cfg: &SignificanceConfig,
    kind: ColumnKind,
) -> Result<CiResult, CiError> {
    for col in std::iter::once(x).chain(std::iter::once(y)).chain(z.iter().copied()) {
        if col.kind != kind {
            return Err(CiError::MixedTypes { name: col.name.clone(), actual: col.kind, expected: kind });
        }
    }
    match kind {
        ColumnKind::Continuous => fisher_z_test(x, y, z, cfg),
        ColumnKind::Categorical => g2_test(x, y, z, cfg),
    }
}
