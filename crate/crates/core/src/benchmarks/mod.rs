//! Built-in response models, their input distributions, and stored reference
//! moments.
//!
//! A [`BenchmarkCase`] bundles a model acting on physical inputs, the
//! Gaussian input specification, the default covariance factorization and
//! the published or analytic reference rows used for error reports.

pub mod elasticbar;
pub mod external;
pub mod polynomial;
pub mod references;
pub mod rooftruss;
pub mod sixstory;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::transform::FactorMethod;
use crate::types::{GaussianSpec, Points};

pub use references::{ReferenceRow, Source, TABLE_KEYS};

/// Scalar response of a vector of physical inputs.
pub trait ResponseModel: Send + Sync {
    fn dim(&self) -> usize;

    /// Evaluates one input vector; the message is wrapped with the point index
    /// by [`ResponseModel::evaluate_batch`].
    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String>;

    /// Evaluates every row, in parallel, preserving order. On failure the
    /// error names the lowest failing index.
    fn evaluate_batch(&self, xs: &Points) -> Result<Vec<f64>> {
        if xs.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: xs.dim(),
            });
        }
        let rows: Vec<&[f64]> = xs.rows().collect();
        let results: Vec<std::result::Result<f64, String>> =
            rows.par_iter().map(|x| self.evaluate(x)).collect();
        results
            .into_iter()
            .enumerate()
            .map(|(index, r)| {
                r.and_then(|y| {
                    if y.is_finite() {
                        Ok(y)
                    } else {
                        Err(format!("non-finite output {y}"))
                    }
                })
                .map_err(|message| Error::Model { index, message })
            })
            .collect()
    }
}

/// A named model with its inputs and reference data.
#[derive(Clone)]
pub struct BenchmarkCase {
    pub name: String,
    pub description: String,
    pub units: String,
    pub model: Arc<dyn ResponseModel>,
    pub input: GaussianSpec,
    pub factor: FactorMethod,
    pub references: Vec<ReferenceRow>,
}

impl std::fmt::Debug for BenchmarkCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BenchmarkCase")
            .field("name", &self.name)
            .field("dim", &self.input.dim())
            .field("units", &self.units)
            .finish()
    }
}

impl BenchmarkCase {
    pub fn dim(&self) -> usize {
        self.input.dim()
    }

    pub fn reference(&self, key: &str) -> Option<&ReferenceRow> {
        self.references.iter().find(|r| r.key == key)
    }
}

/// Registered case names with one-line descriptions. `polynomial-<n>` accepts
/// any dimension.
pub fn available_cases() -> Vec<(&'static str, &'static str)> {
    vec![
        ("polynomial", "sum of squared partial sums, n = 5 (use polynomial-<n> for other sizes)"),
        ("rooftruss", "roof truss peak deflection [mm], 6 correlated inputs"),
        ("rooftruss-asprinted", "roof truss with the load and moduli exactly as tabulated"),
        ("sixstory", "six-story frame top displacement [mm], 18 correlated inputs"),
        ("elasticbar", "elastic bar tip displacement [mm], 20 KL coefficients"),
    ]
}

/// Looks up a case by name.
pub fn case(name: &str) -> Result<BenchmarkCase> {
    match name {
        "polynomial" => polynomial::case(5),
        "rooftruss" => Ok(rooftruss::case(rooftruss::RoofTrussInputs::default())),
        "rooftruss-asprinted" => Ok(rooftruss::case(rooftruss::RoofTrussInputs::as_printed())),
        "sixstory" => Ok(sixstory::case()),
        "elasticbar" => elasticbar::case(),
        other => {
            if let Some(n) = other.strip_prefix("polynomial-").and_then(|s| s.parse().ok()) {
                return polynomial::case(n);
            }
            Err(Error::UnknownCase {
                name: other.to_string(),
                available: available_cases()
                    .iter()
                    .map(|c| c.0)
                    .collect::<Vec<_>>()
                    .join(", "),
            })
        }
    }
}
