//! Hong's 2n+1 point estimate method.
//!
//! Each input gets two points on its own axis that reproduce the marginal
//! moments through fourth order; a shared central point closes the weight
//! sum. Cross moments such as `E[z_i² z_j²]` are not represented.

use crate::error::{Error, Result};
use crate::types::{MarginalShape, PointKind, Points, SigmaPointSet, WeightTable};

/// Per-dimension coordinates `(c_{i,1}, c_{i,2})`, weights and the central weight.
#[derive(Clone, Debug, PartialEq)]
pub struct HpemLayout {
    pub c: Vec<[f64; 2]>,
    pub w: Vec<[f64; 2]>,
    pub w0: f64,
}

impl HpemLayout {
    pub fn new(shape: &MarginalShape) -> Result<Self> {
        if shape.skewness.len() != shape.kurtosis.len() {
            return Err(Error::DimensionMismatch {
                expected: shape.skewness.len(),
                found: shape.kurtosis.len(),
            });
        }
        let mut c = Vec::with_capacity(shape.dim());
        let mut w = Vec::with_capacity(shape.dim());
        let mut w0 = 1.0;
        for (i, (&g, &k)) in shape.skewness.iter().zip(&shape.kurtosis).enumerate() {
            let disc = k - 0.75 * g * g;
            if disc.is_nan() || disc <= 0.0 {
                return Err(Error::param(format!(
                    "dimension {}: kurtosis - 3/4 skewness^2 must be positive, got {disc}",
                    i + 1
                )));
            }
            if k - g * g == 0.0 {
                return Err(Error::param(format!(
                    "dimension {}: kurtosis equals squared skewness, central weight is infinite",
                    i + 1
                )));
            }
            let root = disc.sqrt();
            let c1 = 0.5 * g + root;
            let c2 = 0.5 * g - root;
            let span = c1 - c2;
            c.push([c1, c2]);
            w.push([1.0 / (c1 * span), -1.0 / (c2 * span)]);
            w0 -= 1.0 / (k - g * g);
        }
        Ok(Self { c, w, w0 })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }
}

/// Builds the `2n+1` point set. Ordering: the central point, then for each
/// dimension `c_{i,1} e_i` followed by `c_{i,2} e_i`.
pub fn build_hpem(n: usize, shape: &MarginalShape) -> Result<(SigmaPointSet, WeightTable)> {
    if n < 1 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            reason: "at least one input is required".into(),
        });
    }
    if shape.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: shape.dim(),
        });
    }
    let layout = HpemLayout::new(shape)?;
    let count = 2 * n + 1;
    let mut points = Points::zeros(count, n);
    let mut kinds = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    kinds.push(PointKind::Central);
    weights.push(layout.w0);
    for i in 0..n {
        for l in 0..2 {
            let row = 1 + 2 * i + l;
            points.row_mut(row)[i] = layout.c[i][l];
            kinds.push(PointKind::Axis);
            weights.push(layout.w[i][l]);
        }
    }
    Ok((SigmaPointSet::new(points, kinds)?, WeightTable::unscaled(weights)))
}
