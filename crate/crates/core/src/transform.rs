//! Affine maps between standardized z-space and correlated physical x-space,
//! `x = μ + L z` with `L Lᵀ = P`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{GaussianSpec, Points, PSD_TOL};

/// Allowed reconstruction error `‖LLᵀ − P‖∞ / ‖P‖∞`.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorMethod {
    /// Lower-triangular factor in the given variable order.
    #[default]
    Cholesky,
    /// `V diag(√λ)`, eigenvalues in descending order.
    Eigen,
}

impl FactorMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FactorMethod::Cholesky => "cholesky",
            FactorMethod::Eigen => "eigen",
        }
    }
}

impl std::str::FromStr for FactorMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(FactorMethod::Cholesky),
            "eigen" => Ok(FactorMethod::Eigen),
            other => Err(Error::param(format!(
                "unknown factorization `{other}` (expected cholesky or eigen)"
            ))),
        }
    }
}

/// Square-root factor of a covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CovFactor {
    pub matrix: DMatrix<f64>,
    pub method: FactorMethod,
}

impl CovFactor {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `‖LLᵀ − P‖∞ / ‖P‖∞` (row-sum norm).
    pub fn reconstruction_error(&self, cov: &DMatrix<f64>) -> f64 {
        let diff = &self.matrix * self.matrix.transpose() - cov;
        let norm = |m: &DMatrix<f64>| {
            m.row_iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        norm(&diff) / norm(cov).max(f64::MIN_POSITIVE)
    }
}

/// Factors the covariance of a valid spec.
///
/// Cholesky fails on matrices that are not positive definite; the eigen
/// factor accepts semi-definite input, clipping eigenvalues in
/// `[−1e-10·λmax, 0)` to zero and rejecting anything more negative.
pub fn factor_covariance(spec: &GaussianSpec, method: FactorMethod) -> Result<CovFactor> {
    let issues = spec.validate();
    if !issues.is_empty() {
        let joined: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
        return Err(Error::InvalidSpec(joined.join("; ")));
    }
    let cov = &spec.cov;
    let matrix = match method {
        FactorMethod::Cholesky => cov
            .clone()
            .cholesky()
            .ok_or_else(|| {
                Error::NotPositiveDefinite(
                    "Cholesky factorization failed; the eigen factor accepts semi-definite covariances"
                        .into(),
                )
            })?
            .unpack(),
        FactorMethod::Eigen => eigen_factor(cov)?,
    };
    let factor = CovFactor { matrix, method };
    let err = factor.reconstruction_error(cov);
    if err.is_nan() || err > RECONSTRUCTION_TOL {
        return Err(Error::NotPositiveDefinite(format!(
            "factor reconstructs the covariance with relative error {err:.3e}"
        )));
    }
    Ok(factor)
}

fn eigen_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    let eig = SymmetricEigen::new(cov.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lmax = order.first().map(|&k| eig.eigenvalues[k]).unwrap_or(0.0);
    let mut out = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut lambda = eig.eigenvalues[k];
        if lambda < 0.0 {
            if lambda < -PSD_TOL * lmax.abs() {
                return Err(Error::NotPositiveDefinite(format!(
                    "eigenvalue {lambda:.6e} is below the clipping tolerance (largest {lmax:.6e})"
                )));
            }
            lambda = 0.0;
        }
        let mut v = eig.eigenvectors.column(k).clone_owned();
        let lead = v.iter().copied().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.neg_mut();
        }
        out.set_column(col, &(v * lambda.sqrt()));
    }
    Ok(out)
}

/// Maps each z-space row to `μ + L z`.
pub fn to_x_space(points: &Points, spec: &GaussianSpec, factor: &CovFactor) -> Result<Points> {
    let n = spec.dim();
    if points.dim() != n || factor.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if points.dim() != n { points.dim() } else { factor.dim() },
        });
    }
    let mut out = Points::zeros(points.len(), n);
    for (i, z) in points.rows().enumerate() {
        map_row(z, spec, factor, out.row_mut(i));
    }
    Ok(out)
}

/// Single-row version of [`to_x_space`] writing into `x`.
#[inline]
pub fn map_row(z: &[f64], spec: &GaussianSpec, factor: &CovFactor, x: &mut [f64]) {
    let l = &factor.matrix;
    for (r, xr) in x.iter_mut().enumerate() {
        let mut acc = spec.mean[r];
        for (c, zc) in z.iter().enumerate() {
            acc += l[(r, c)] * zc;
        }
        *xr = acc;
    }
}

/// Inverse map `z = L⁻¹ (x − μ)`; fails when the factor is singular.
pub fn to_z_space(points: &Points, spec: &GaussianSpec, factor: &CovFactor) -> Result<Points> {
    let n = spec.dim();
    if points.dim() != n || factor.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: points.dim(),
        });
    }
    let lu = factor.matrix.clone().lu();
    let mut out = Points::zeros(points.len(), n);
    for (i, x) in points.rows().enumerate() {
        let rhs = DVector::from_iterator(n, x.iter().zip(spec.mean.iter()).map(|(a, m)| a - m));
        let z = lu
            .solve(&rhs)
            .ok_or_else(|| Error::NotPositiveDefinite("singular covariance factor".into()))?;
        out.row_mut(i).copy_from_slice(z.as_slice());
    }
    Ok(out)
}

/// Covariance `P_ij = ρ_ij σ_i σ_j` from standard deviations and correlations.
pub fn corr_to_cov(stds: &[f64], corr: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = stds.len();
    if corr.nrows() != n || corr.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: corr.nrows().max(corr.ncols()),
        });
    }
    if let Some(s) = stds.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::InvalidSpec(format!(
            "standard deviations must be finite and non-negative, got {s}"
        )));
    }
    for i in 0..n {
        if (corr[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "correlation diagonal entry {} is {}, expected 1",
                i + 1,
                corr[(i, i)]
            )));
        }
        for j in 0..n {
            let r = corr[(i, j)];
            if !(r.is_finite() && (-1.0..=1.0).contains(&r)) {
                return Err(Error::InvalidSpec(format!(
                    "correlation ({}, {}) = {r} is outside [-1, 1]",
                    i + 1,
                    j + 1
                )));
            }
            if (r - corr[(j, i)]).abs() > 1e-12 {
                return Err(Error::InvalidSpec(format!(
                    "correlation matrix is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| corr[(i, j)] * stds[i] * stds[j]))
}
