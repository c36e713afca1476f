//! Shared domain types: input distributions, point sets, weight tables and
//! moment summaries.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Relative tolerance for covariance symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL * max_eigenvalue` count as non-negative.
pub const PSD_TOL: f64 = 1e-10;

/// Multivariate normal input: mean vector and covariance in physical units.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// One violated invariant of a [`GaussianSpec`].
#[derive(Clone, Debug, PartialEq)]
pub enum ValidationIssue {
    DimensionMismatch { mean: usize, rows: usize, cols: usize },
    NonFinite,
    Asymmetric { row: usize, col: usize, deviation: f64 },
    NotPositiveSemiDefinite { min_eigenvalue: f64, max_eigenvalue: f64 },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::DimensionMismatch { mean, rows, cols } => write!(
                f,
                "mean has length {mean} but covariance is {rows}x{cols}"
            ),
            ValidationIssue::NonFinite => write!(f, "mean or covariance contains non-finite entries"),
            ValidationIssue::Asymmetric { row, col, deviation } => write!(
                f,
                "covariance is not symmetric at ({row}, {col}), relative deviation {deviation:.3e}"
            ),
            ValidationIssue::NotPositiveSemiDefinite {
                min_eigenvalue,
                max_eigenvalue,
            } => write!(
                f,
                "covariance is not positive semi-definite (eigenvalues span {min_eigenvalue:.6e} .. {max_eigenvalue:.6e})"
            ),
        }
    }
}

impl GaussianSpec {
    /// Stores the pair without checking it; see [`GaussianSpec::validate`].
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { mean, cov }
    }

    /// Builds a spec and rejects it if any invariant is violated.
    pub fn checked(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let spec = Self::new(mean, cov);
        let issues = spec.validate();
        if issues.is_empty() {
            Ok(spec)
        } else {
            let joined: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
            Err(Error::InvalidSpec(joined.join("; ")))
        }
    }

    /// Independent standard normal inputs of dimension `n`.
    pub fn standard(n: usize) -> Self {
        Self::new(DVector::zeros(n), DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn std_devs(&self) -> Vec<f64> {
        self.cov.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect()
    }

    /// Lists every violated invariant; an empty list means the spec is usable.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        validate_spec(self)
    }
}

/// Reports the invariants a [`GaussianSpec`] violates, empty on success.
pub fn validate_spec(spec: &GaussianSpec) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let n = spec.mean.len();
    let (rows, cols) = spec.cov.shape();
    if rows != n || cols != n {
        issues.push(ValidationIssue::DimensionMismatch { mean: n, rows, cols });
        return issues;
    }
    if spec.mean.iter().chain(spec.cov.iter()).any(|v| !v.is_finite()) {
        issues.push(ValidationIssue::NonFinite);
        return issues;
    }
    let scale = spec.cov.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut symmetric = true;
    'outer: for i in 0..n {
        for j in (i + 1)..n {
            let d = (spec.cov[(i, j)] - spec.cov[(j, i)]).abs();
            if d > SYMMETRY_TOL * scale {
                issues.push(ValidationIssue::Asymmetric {
                    row: i,
                    col: j,
                    deviation: d / scale,
                });
                symmetric = false;
                break 'outer;
            }
        }
    }
    if symmetric && n > 0 {
        let eig = SymmetricEigen::new(spec.cov.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if min < -PSD_TOL * max.abs().max(f64::MIN_POSITIVE) {
            issues.push(ValidationIssue::NotPositiveSemiDefinite {
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
    }
    issues
}

/// Marginal skewness and (non-excess) kurtosis of each standardized input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalShape {
    pub skewness: Vec<f64>,
    pub kurtosis: Vec<f64>,
}

impl MarginalShape {
    /// Gaussian marginals: skewness 0, kurtosis 3.
    pub fn standard_normal(n: usize) -> Self {
        Self {
            skewness: vec![0.0; n],
            kurtosis: vec![3.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.skewness.len()
    }
}

/// Role of a point within a generated set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Central,
    Axis,
    Diagonal,
    Grid,
    Sample,
}

impl PointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PointKind::Central => "central",
            PointKind::Axis => "axis",
            PointKind::Diagonal => "diagonal",
            PointKind::Grid => "grid",
            PointKind::Sample => "sample",
        }
    }
}

impl std::str::FromStr for PointKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" => Ok(PointKind::Central),
            "axis" => Ok(PointKind::Axis),
            "diagonal" => Ok(PointKind::Diagonal),
            "grid" => Ok(PointKind::Grid),
            "sample" => Ok(PointKind::Sample),
            other => Err(Error::Format(format!("unknown point kind `{other}`"))),
        }
    }
}

/// Dense row-major matrix of points, one row per point.
#[derive(Clone, Debug, PartialEq)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn zeros(count: usize, dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; count * dim],
        }
    }

    pub fn from_rows(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Deterministic (or sampled) points in standardized z-space.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaPointSet {
    pub points: Points,
    pub kinds: Vec<PointKind>,
}

impl SigmaPointSet {
    pub fn new(points: Points, kinds: Vec<PointKind>) -> Result<Self> {
        if points.len() != kinds.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: kinds.len(),
            });
        }
        if kinds.iter().filter(|k| **k == PointKind::Central).count() > 1 {
            return Err(Error::param("a point set has at most one central point"));
        }
        Ok(Self { points, kinds })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    pub fn central_index(&self) -> Option<usize> {
        self.kinds.iter().position(|k| *k == PointKind::Central)
    }

    /// True when every non-central point has its negation in the set.
    pub fn is_fully_symmetric(&self, tol: f64) -> bool {
        let n = self.dim();
        let mut neg = vec![0.0; n];
        self.points.rows().enumerate().all(|(i, p)| {
            if Some(i) == self.central_index() {
                return p.iter().all(|v| v.abs() <= tol);
            }
            for (d, s) in neg.iter_mut().zip(p) {
                *d = -s;
            }
            self.points
                .rows()
                .any(|q| q.iter().zip(&neg).all(|(a, b)| (a - b).abs() <= tol))
        })
    }
}

/// Weights per output-moment order. `w3` and `w4` differ from `w1` only at
/// the central point when scaling is active.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w3: Vec<f64>,
    pub w4: Vec<f64>,
}

impl WeightTable {
    /// Same weights for every moment order.
    pub fn unscaled(weights: Vec<f64>) -> Self {
        Self {
            w2: weights.clone(),
            w3: weights.clone(),
            w4: weights.clone(),
            w1: weights,
        }
    }

    /// Adds `zeta` to the third-order and `xi` to the fourth-order weight of
    /// the central point.
    pub fn scaled(weights: Vec<f64>, central: usize, zeta: f64, xi: f64) -> Self {
        let mut table = Self::unscaled(weights);
        table.w3[central] += zeta;
        table.w4[central] += xi;
        table
    }

    /// Equal weights `1/count`.
    pub fn uniform(count: usize) -> Self {
        Self::unscaled(vec![1.0 / count as f64; count])
    }

    pub fn len(&self) -> usize {
        self.w1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w1.is_empty()
    }

    /// Weight vector used for moment order `k` (1..=4).
    pub fn order(&self, k: usize) -> &[f64] {
        match k {
            1 => &self.w1,
            2 => &self.w2,
            3 => &self.w3,
            4 => &self.w4,
            _ => panic!("moment order {k} outside 1..=4"),
        }
    }

    pub fn sum(&self) -> f64 {
        compensated_sum(self.w1.iter().copied())
    }
}

/// First four moments of a scalar output.
///
/// Skewness and kurtosis are `None` when the variance is not positive.
/// Kurtosis is non-excess (3 for a normal output).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub std: f64,
    pub skew: Option<f64>,
    pub kurt: Option<f64>,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl MomentSummary {
    /// Builds a summary from the mean and central moments.
    pub fn from_central(mean: f64, m2: f64, m3: f64, m4: f64) -> Self {
        let (std, skew, kurt) = if m2 > 0.0 {
            (m2.sqrt(), Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2)))
        } else {
            (0.0, None, None)
        };
        Self {
            mean,
            std,
            skew,
            kurt,
            m2,
            m3,
            m4,
        }
    }

    /// Builds a summary from the four standardized statistics.
    pub fn from_stats(mean: f64, std: f64, skew: f64, kurt: f64) -> Self {
        let m2 = std * std;
        Self::from_central(mean, m2, skew * m2 * std, kurt * m2 * m2)
    }

    pub fn cov(&self) -> f64 {
        self.std / self.mean
    }
}

/// Model outputs aligned index-for-index with a point set.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationBatch {
    pub outputs: Vec<f64>,
    pub provenance: String,
}

impl EvaluationBatch {
    pub fn new(outputs: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if let Some(index) = outputs.iter().position(|y| !y.is_finite()) {
            return Err(Error::Model {
                index,
                message: format!("non-finite output {}", outputs[index]),
            });
        }
        Ok(Self {
            outputs,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn identity_spec_is_valid() {
        let spec = GaussianSpec::standard(2);
        assert!(validate_spec(&spec).is_empty());
    }

    #[test]
    fn indefinite_covariance_is_reported() {
        // eigenvalues 3 and -1
        let spec = GaussianSpec::new(DVector::zeros(2), dmatrix![1.0, 2.0; 2.0, 1.0]);
        let issues = validate_spec(&spec);
        assert_eq!(issues.len(), 1);
        match &issues[0] {
            ValidationIssue::NotPositiveSemiDefinite {
                min_eigenvalue,
                max_eigenvalue,
            } => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-12);
                assert!((max_eigenvalue - 3.0).abs() < 1e-12);
            }
            other => panic!("unexpected issue {other:?}"),
        }
    }

    #[test]
    fn asymmetric_covariance_is_reported() {
        let spec = GaussianSpec::new(DVector::zeros(2), dmatrix![1.0, 0.2; 0.3, 1.0]);
        let issues = validate_spec(&spec);
        assert!(matches!(issues[0], ValidationIssue::Asymmetric { row: 0, col: 1, .. }));
    }

    #[test]
    fn mismatched_lengths_are_reported() {
        let spec = GaussianSpec::new(DVector::zeros(3), DMatrix::identity(2, 2));
        assert!(matches!(
            validate_spec(&spec)[0],
            ValidationIssue::DimensionMismatch { mean: 3, .. }
        ));
        assert!(GaussianSpec::checked(DVector::zeros(3), DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn zero_variance_summary_is_undefined() {
        let s = MomentSummary::from_central(2.0, 0.0, 0.0, 0.0);
        assert_eq!(s.std, 0.0);
        assert!(s.skew.is_none() && s.kurt.is_none());
    }

    #[test]
    fn scaled_weights_touch_only_the_central_entry() {
        let w = WeightTable::scaled(vec![0.5, 0.25, 0.25], 0, -8.0, 60.0);
        assert_eq!(w.w1, w.w2);
        assert_eq!(w.w3, vec![-7.5, 0.25, 0.25]);
        assert_eq!(w.w4, vec![60.5, 0.25, 0.25]);
    }

    #[test]
    fn non_finite_outputs_are_rejected() {
        let err = EvaluationBatch::new(vec![1.0, f64::NAN], "t").unwrap_err();
        assert!(matches!(err, Error::Model { index: 1, .. }));
    }
}
