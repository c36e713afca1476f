//! Quadratic test function `y = Σ_i (Σ_{j≤i} x_j)²` with independent
//! `x_i ~ N(5, 1)`, and its exact moments.
//!
//! Writing `y = xᵀMx` with `M = LᵀL` (`L` the lower-triangular matrix of
//! ones), the cumulants of a Gaussian quadratic form with `x ~ N(m, I)` are
//! `κ_r = 2^{r−1} (r−1)! [tr(M^r) + r mᵀM^r m]`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{BenchmarkCase, ReferenceRow, ResponseModel, Source};
use crate::error::{Error, Result};
use crate::transform::FactorMethod;
use crate::types::{GaussianSpec, MomentSummary};

pub const INPUT_MEAN: f64 = 5.0;

#[derive(Clone, Copy, Debug)]
pub struct PolynomialModel {
    pub n: usize,
}

impl ResponseModel for PolynomialModel {
    fn dim(&self) -> usize {
        self.n
    }

    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String> {
        let mut partial = 0.0;
        let mut y = 0.0;
        for v in x {
            partial += v;
            y += partial * partial;
        }
        Ok(y)
    }
}

/// Exact moments of `xᵀMx` for `x ~ N(mean, I)`.
pub fn quadform_moments(mean: &[f64]) -> MomentSummary {
    let n = mean.len();
    let l = DMatrix::from_fn(n, n, |i, j| if j <= i { 1.0 } else { 0.0 });
    let m = l.transpose() * &l;
    let mu = DVector::from_column_slice(mean);

    let mut power = DMatrix::identity(n, n);
    let mut kappa = [0.0; 4];
    let mut fact = 1.0;
    for r in 1..=4 {
        power = &power * &m;
        if r > 1 {
            fact *= (r - 1) as f64;
        }
        let quad = mu.dot(&(&power * &mu));
        kappa[r - 1] = 2f64.powi(r as i32 - 1) * fact * (power.trace() + r as f64 * quad);
    }
    let [k1, k2, k3, k4] = kappa;
    MomentSummary::from_central(k1, k2, k3, k4 + 3.0 * k2 * k2)
}

/// Exact moments for the benchmark inputs `x_i ~ N(5, 1)`.
pub fn quadform_moment_oracle(n: usize) -> MomentSummary {
    quadform_moments(&vec![INPUT_MEAN; n])
}

pub fn case(n: usize) -> Result<BenchmarkCase> {
    if n < 1 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            reason: "the polynomial needs at least one input".into(),
        });
    }
    let exact = quadform_moment_oracle(n);
    Ok(BenchmarkCase {
        name: format!("polynomial-{n}"),
        description: format!("sum of squared partial sums of {n} inputs N(5, 1)"),
        units: "-".into(),
        model: Arc::new(PolynomialModel { n }),
        input: GaussianSpec::new(
            DVector::from_element(n, INPUT_MEAN),
            DMatrix::identity(n, n),
        ),
        factor: FactorMethod::Cholesky,
        references: vec![ReferenceRow {
            key: "oracle".into(),
            label: "exact".into(),
            points: None,
            values: [
                exact.mean,
                exact.std,
                exact.skew.unwrap_or(0.0),
                exact.kurt.unwrap_or(0.0),
            ],
            ci: None,
            source: Source::Analytic,
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsequad::gauss_hermite_1d;

    #[test]
    fn direct_evaluation() {
        let m = PolynomialModel { n: 2 };
        assert_eq!(m.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(m.evaluate(&[1.0, 2.0]).unwrap(), 10.0);
    }

    #[test]
    fn chi_square_limit() {
        let s = quadform_moments(&[0.0]);
        assert!((s.mean - 1.0).abs() < 1e-15);
        assert!((s.m2 - 2.0).abs() < 1e-15);
        assert!((s.skew.unwrap() - 8.0_f64.sqrt()).abs() < 1e-14);
        assert!((s.kurt.unwrap() - 15.0).abs() < 1e-13);
    }

    #[test]
    fn closed_form_mean() {
        for n in [5usize, 10, 20] {
            let nf = n as f64;
            let expect = nf * (nf + 1.0) / 2.0 + 25.0 * nf * (nf + 1.0) * (2.0 * nf + 1.0) / 6.0;
            assert!((quadform_moment_oracle(n).mean - expect).abs() < 1e-9 * expect);
        }
        assert!((quadform_moment_oracle(5).mean - 1390.0).abs() < 1e-9);
    }

    #[test]
    fn frozen_higher_moments() {
        // mpmath evaluation of the cumulant formula
        let s = quadform_moment_oracle(5);
        assert!((s.std - 259.63435828102564).abs() < 1e-9);
        assert!((s.skew.unwrap() - 0.28444095686640863).abs() < 1e-12);
        assert!((s.kurt.unwrap() - 3.108085305453011).abs() < 1e-12);
        let s = quadform_moment_oracle(10);
        assert!((s.std - 1306.0513006769681).abs() < 1e-8);
        assert!((s.skew.unwrap() - 0.20522328654685706).abs() < 1e-12);
        assert!((s.kurt.unwrap() - 3.0562436120037235).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_tensor_gauss_hermite() {
        let rule = gauss_hermite_1d(9).unwrap();
        let model = PolynomialModel { n: 3 };
        let mut raw = [0.0; 5];
        for (a, wa) in rule.nodes.iter().zip(&rule.weights) {
            for (b, wb) in rule.nodes.iter().zip(&rule.weights) {
                for (c, wc) in rule.nodes.iter().zip(&rule.weights) {
                    let y = model.evaluate(&[5.0 + a, 5.0 + b, 5.0 + c]).unwrap();
                    let w = wa * wb * wc;
                    for (k, r) in raw.iter_mut().enumerate() {
                        *r += w * y.powi(k as i32);
                    }
                }
            }
        }
        let mean = raw[1];
        let m2 = raw[2] - mean * mean;
        let m3 = raw[3] - 3.0 * mean * raw[2] + 2.0 * mean.powi(3);
        let m4 = raw[4] - 4.0 * mean * raw[3] + 6.0 * mean * mean * raw[2] - 3.0 * mean.powi(4);
        let quad = MomentSummary::from_central(mean, m2, m3, m4);
        let exact = quadform_moment_oracle(3);
        assert!((quad.mean - exact.mean).abs() < 1e-9 * exact.mean);
        assert!((quad.std - exact.std).abs() < 1e-9 * exact.std);
        assert!((quad.skew.unwrap() - exact.skew.unwrap()).abs() < 1e-9 * exact.skew.unwrap());
        assert!((quad.kurt.unwrap() - exact.kurt.unwrap()).abs() < 1e-9 * exact.kurt.unwrap());
    }
}
