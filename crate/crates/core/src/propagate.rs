//! End-to-end propagation: generate z-space points, map them to the physical
//! inputs, evaluate the model and estimate the output moments.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{BenchmarkCase, ResponseModel};
use crate::error::{Error, Result};
use crate::estimator::estimate_from_outputs;
use crate::hpem::build_hpem;
use crate::qpem::{self, build_qpem, QpemParams};
use crate::sampling::{self, mc_row, SamplePlan, DEFAULT_SOBOL_SKIP};
use crate::sparsequad::smolyak_grid;
use crate::transform::{factor_covariance, map_row, to_x_space, FactorMethod};
use crate::types::{GaussianSpec, MarginalShape, MomentSummary, Points, SigmaPointSet, WeightTable};

/// Seed used for sampling rows of the comparison tables.
pub const DEFAULT_SEED: u64 = 20240101;

/// Rows per chunk when streaming large Monte Carlo runs.
const MC_CHUNK: usize = 1 << 16;

/// A point-generation method with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Method {
    Qpem { r: f64, zeta: f64, xi: f64 },
    QpemUnscaled { r: f64 },
    Hpem,
    Sgh3,
    Mc { count: usize, seed: u64 },
    Lhs { count: usize, seed: u64 },
    Sobol { count: usize, skip: u64 },
}

impl Method {
    /// Scaled QPEM with the default radius and scaling factors.
    pub fn qpem() -> Self {
        Method::Qpem {
            r: qpem::DEFAULT_R,
            zeta: qpem::DEFAULT_ZETA,
            xi: qpem::DEFAULT_XI,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Qpem { .. } => "qpem",
            Method::QpemUnscaled { .. } => "qpem-unscaled",
            Method::Hpem => "hpem",
            Method::Sgh3 => "sgh3",
            Method::Mc { .. } => "mc",
            Method::Lhs { .. } => "lhs",
            Method::Sobol { .. } => "sobol",
        }
    }

    /// The method behind a comparison-table row key. Sampling rows use the
    /// QPEM point count `2n² + 1`.
    pub fn for_table_key(key: &str, n: usize) -> Option<Self> {
        let count = qpem::point_count(n);
        let sqrt3 = 3f64.sqrt();
        let scaled = |r| Method::Qpem {
            r,
            zeta: qpem::DEFAULT_ZETA,
            xi: qpem::DEFAULT_XI,
        };
        Some(match key {
            "lhs" => Method::Lhs {
                count,
                seed: DEFAULT_SEED,
            },
            "sobol" => Method::Sobol {
                count,
                skip: DEFAULT_SOBOL_SKIP,
            },
            "sgh3" => Method::Sgh3,
            "hpem" => Method::Hpem,
            "qpem-unscaled-sqrt3" => Method::QpemUnscaled { r: sqrt3 },
            "qpem-sqrt3" => scaled(sqrt3),
            "qpem-unscaled-3" => Method::QpemUnscaled { r: 3.0 },
            "qpem-3" => scaled(3.0),
            _ => return None,
        })
    }

    /// Standard normal points and weights in `n` dimensions.
    pub fn point_set(&self, n: usize) -> Result<(SigmaPointSet, WeightTable)> {
        match *self {
            Method::Qpem { r, zeta, xi } => {
                build_qpem(&QpemParams::new(n).with_r(r).with_scaling(zeta, xi))
            }
            Method::QpemUnscaled { r } => build_qpem(&QpemParams::new(n).with_r(r).unscaled()),
            Method::Hpem => build_hpem(n, &MarginalShape::standard_normal(n)),
            Method::Sgh3 => smolyak_grid(n, 2),
            Method::Mc { count, seed } => sampling::generate(&SamplePlan::mc(count, seed), n),
            Method::Lhs { count, seed } => sampling::generate(&SamplePlan::lhs(count, seed), n),
            Method::Sobol { count, skip } => {
                let plan = SamplePlan {
                    skip,
                    ..SamplePlan::sobol(count)
                };
                sampling::generate(&plan, n)
            }
        }
    }
}

/// Result of one propagation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub method: Method,
    pub factor: FactorMethod,
    pub summary: MomentSummary,
    pub point_count: usize,
    /// `Σ|w_i|` of the mean weights; 1 for rules without negative weights.
    pub stability_factor: f64,
    pub elapsed_seconds: f64,
}

/// Propagates `spec` through `model` with the given method.
pub fn propagate(
    model: &dyn ResponseModel,
    spec: &GaussianSpec,
    factor: FactorMethod,
    method: &Method,
) -> Result<Propagation> {
    let start = Instant::now();
    let n = spec.dim();
    if model.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: n,
        });
    }
    let (set, weights) = method.point_set(n)?;
    let l = factor_covariance(spec, factor)?;
    let xs = to_x_space(&set.points, spec, &l)?;
    let outputs = model.evaluate_batch(&xs)?;
    let summary = estimate_from_outputs(&outputs, &weights)?;
    Ok(Propagation {
        method: *method,
        factor,
        summary,
        point_count: set.len(),
        stability_factor: qpem::stability_factor(&weights),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Propagates a benchmark case using its default factorization.
pub fn propagate_case(case: &BenchmarkCase, method: &Method) -> Result<Propagation> {
    propagate(case.model.as_ref(), &case.input, case.factor, method)
}

/// Monte Carlo reference moments with their sampling uncertainty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReference {
    pub summary: MomentSummary,
    pub count: usize,
    pub seed: u64,
    /// Standard error of the mean, `σ/√N`.
    pub mean_se: f64,
    /// Asymptotic standard error of the standard deviation,
    /// `√((m4 − m2²) / (4 m2 N))`.
    pub std_se: f64,
}

impl McReference {
    /// Whether `mean` and `std` lie within `k` standard errors.
    pub fn brackets(&self, mean: f64, std: f64, k: f64) -> bool {
        (mean - self.summary.mean).abs() <= k * self.mean_se
            && (std - self.summary.std).abs() <= k * self.std_se
    }
}

/// Seeded Monte Carlo run streamed in chunks. Row `i` is the same as row `i`
/// of [`Method::Mc`], so the result matches [`propagate`] with that method.
pub fn mc_reference(
    model: &dyn ResponseModel,
    spec: &GaussianSpec,
    factor: FactorMethod,
    count: usize,
    seed: u64,
) -> Result<McReference> {
    if count < 2 {
        return Err(Error::param("Monte Carlo reference needs at least 2 samples"));
    }
    let n = spec.dim();
    if model.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: n,
        });
    }
    let l = factor_covariance(spec, factor)?;
    let mut outputs = Vec::with_capacity(count);
    let mut start = 0;
    while start < count {
        let rows = MC_CHUNK.min(count - start);
        let mut data = vec![0.0; rows * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, x)| {
            let mut z = vec![0.0; n];
            mc_row(seed, (start + i) as u64, &mut z);
            map_row(&z, spec, &l, x);
        });
        let xs = Points::from_rows(n, data)?;
        let chunk = model.evaluate_batch(&xs).map_err(|e| match e {
            Error::Model { index, message } => Error::Model {
                index: index + start,
                message,
            },
            other => other,
        })?;
        outputs.extend(chunk);
        start += rows;
    }
    let summary = estimate_from_outputs(&outputs, &WeightTable::uniform(count))?;
    let nf = count as f64;
    let std_se = if summary.m2 > 0.0 {
        ((summary.m4 - summary.m2 * summary.m2).max(0.0) / (4.0 * summary.m2 * nf)).sqrt()
    } else {
        0.0
    };
    Ok(McReference {
        summary,
        count,
        seed,
        mean_se: summary.std / nf.sqrt(),
        std_se,
    })
}

/// [`mc_reference`] for a benchmark case.
pub fn mc_reference_case(case: &BenchmarkCase, count: usize, seed: u64) -> Result<McReference> {
    mc_reference(case.model.as_ref(), &case.input, case.factor, count, seed)
}
