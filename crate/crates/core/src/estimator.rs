//! Output moments from weighted model evaluations.
//!
//! `ȳ = Σ w1_i Y_i` and `m_k = Σ wk_i (Y_i − ȳ)^k` for `k = 2, 3, 4`, each a
//! compensated sum in index order. Scaled rules differ only in the central
//! entries of `w3` and `w4`, so one code path serves both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, NeumaierSum};
use crate::types::{EvaluationBatch, MomentSummary, WeightTable};

/// Relative size of a negative `m2` still treated as rounding noise.
pub const NEGATIVE_VARIANCE_TOL: f64 = 1e-12;

pub fn estimate_moments(batch: &EvaluationBatch, weights: &WeightTable) -> Result<MomentSummary> {
    estimate_from_outputs(&batch.outputs, weights)
}

/// Same as [`estimate_moments`] on a bare output slice.
pub fn estimate_from_outputs(outputs: &[f64], weights: &WeightTable) -> Result<MomentSummary> {
    if outputs.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            found: outputs.len(),
        });
    }
    if let Some(index) = outputs.iter().position(|y| !y.is_finite()) {
        return Err(Error::Model {
            index,
            message: format!("non-finite output {}", outputs[index]),
        });
    }
    let mean = compensated_sum(outputs.iter().zip(&weights.w1).map(|(y, w)| w * y));

    let mut sums = [NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new()];
    for (i, &y) in outputs.iter().enumerate() {
        let d = y - mean;
        let d2 = d * d;
        sums[0].add(weights.w2[i] * d2);
        sums[1].add(weights.w3[i] * d2 * d);
        sums[2].add(weights.w4[i] * d2 * d2);
    }
    let (m2, m3, m4) = (sums[0].value(), sums[1].value(), sums[2].value());

    let max_y = outputs.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    let abs_w2 = compensated_sum(weights.w2.iter().map(|w| w.abs()));
    if m2 < -NEGATIVE_VARIANCE_TOL * abs_w2 * max_y * max_y {
        return Err(Error::Inconsistent(format!(
            "negative variance estimate {m2:.6e}; the rule's negative weights dominate this model"
        )));
    }
    Ok(MomentSummary::from_central(mean, m2, m3, m4))
}

/// Relative errors `|est − ref| / |ref|`; `None` where the reference is zero
/// or either side is undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub skew: Option<f64>,
    pub kurt: Option<f64>,
    pub reference: String,
}

impl ErrorReport {
    pub fn as_array(&self) -> [Option<f64>; 4] {
        [self.mean, self.std, self.skew, self.kurt]
    }
}

fn rel(est: Option<f64>, reference: Option<f64>) -> Option<f64> {
    match (est, reference) {
        (Some(e), Some(r)) if r != 0.0 && r.is_finite() && e.is_finite() => {
            Some((e - r).abs() / r.abs())
        }
        _ => None,
    }
}

pub fn relative_errors(
    summary: &MomentSummary,
    reference: &MomentSummary,
    provenance: impl Into<String>,
) -> ErrorReport {
    ErrorReport {
        mean: rel(Some(summary.mean), Some(reference.mean)),
        std: rel(Some(summary.std), Some(reference.std)),
        skew: rel(summary.skew, reference.skew),
        kurt: rel(summary.kurt, reference.kurt),
        reference: provenance.into(),
    }
}
