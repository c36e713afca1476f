//! Roof truss peak deflection
//! `y = q l²/2 · (3.81/(A_c E_c) + 1.13/(A_s E_s))`, reported in mm.
//!
//! Inputs are ordered `(q, l, A_s, A_c, E_s, E_c)` with coefficients of
//! variation `(0.07, 0.01, 0.06, 0.12, 0.06, 0.06)` and correlations
//! `ρ(l, A_s) = ρ(l, A_c) = 0.3`, `ρ(A_c, A_s) = ρ(E_c, E_s) = 0.5`.
//!
//! The default means are the ones under which the published comparison
//! values are reproduced: `q = 20 kN/m`, `E_s = 100 GPa`, `E_c = 20 GPa`.
//! The tabulated values (`q = 200 kN/m`, `E_s = 200 GPa`, `E_c = 30 GPa`)
//! remain available as a separate case.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{references, BenchmarkCase, ResponseModel};
use crate::transform::{corr_to_cov, FactorMethod};
use crate::types::GaussianSpec;

pub const COV: [f64; 6] = [0.07, 0.01, 0.06, 0.12, 0.06, 0.06];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoofTrussInputs {
    /// Means of `(q [N/m], l [m], A_s [m²], A_c [m²], E_s [Pa], E_c [Pa])`.
    pub mean: [f64; 6],
    /// Output multiplier; 1000 reports millimetres.
    pub output_scale: f64,
}

impl Default for RoofTrussInputs {
    fn default() -> Self {
        Self {
            mean: [2.0e4, 12.0, 9.82e-4, 400e-4, 1.0e11, 2.0e10],
            output_scale: 1000.0,
        }
    }
}

impl RoofTrussInputs {
    pub fn as_printed() -> Self {
        Self {
            mean: [2.0e5, 12.0, 9.82e-4, 400e-4, 2.0e11, 3.0e10],
            output_scale: 1000.0,
        }
    }

    pub fn spec(&self) -> GaussianSpec {
        let stds: Vec<f64> = self.mean.iter().zip(COV).map(|(m, c)| m * c).collect();
        let cov = corr_to_cov(&stds, &correlation()).expect("valid correlation");
        GaussianSpec::new(DVector::from_column_slice(&self.mean), cov)
    }
}

pub fn correlation() -> DMatrix<f64> {
    let mut r = DMatrix::identity(6, 6);
    for (a, b, v) in [(1, 2, 0.3), (1, 3, 0.3), (3, 2, 0.5), (5, 4, 0.5)] {
        r[(a, b)] = v;
        r[(b, a)] = v;
    }
    r
}

#[derive(Clone, Copy, Debug)]
pub struct RoofTrussModel {
    pub output_scale: f64,
}

impl ResponseModel for RoofTrussModel {
    fn dim(&self) -> usize {
        6
    }

    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String> {
        let [q, l, a_s, a_c, e_s, e_c] = [x[0], x[1], x[2], x[3], x[4], x[5]];
        if a_s <= 0.0 || a_c <= 0.0 || e_s <= 0.0 || e_c <= 0.0 {
            return Err(format!(
                "non-positive area or modulus (A_s={a_s}, A_c={a_c}, E_s={e_s}, E_c={e_c})"
            ));
        }
        Ok(self.output_scale * q * l * l / 2.0 * (3.81 / (a_c * e_c) + 1.13 / (a_s * e_s)))
    }
}

pub fn case(inputs: RoofTrussInputs) -> BenchmarkCase {
    let printed = inputs == RoofTrussInputs::as_printed();
    BenchmarkCase {
        name: if printed { "rooftruss-asprinted" } else { "rooftruss" }.into(),
        description: "roof truss peak deflection, 6 correlated normal inputs".into(),
        units: "mm".into(),
        model: Arc::new(RoofTrussModel {
            output_scale: inputs.output_scale,
        }),
        input: inputs.spec(),
        factor: FactorMethod::Cholesky,
        references: references::rooftruss(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpem::{build_qpem, QpemParams};
    use crate::transform::{factor_covariance, to_x_space};

    #[test]
    fn load_enters_linearly() {
        let m = RoofTrussModel { output_scale: 1.0 };
        let x = [2.0e4, 12.0, 9.82e-4, 0.04, 1e11, 2e10];
        let mut x2 = x;
        x2[0] *= 2.0;
        let (a, b) = (m.evaluate(&x).unwrap(), m.evaluate(&x2).unwrap());
        assert!((b - 2.0 * a).abs() < 1e-15 * b);
    }

    #[test]
    fn mean_input_value() {
        // 1.44e6 * (3.81 / 8e8 + 1.13 / 9.82e7) m
        let hand = 1.44e6 * (4.7625e-9 + 1.13 / 9.82e7) * 1000.0;
        let m = RoofTrussModel { output_scale: 1000.0 };
        let y = m.evaluate(&RoofTrussInputs::default().mean).unwrap();
        assert!((y - hand).abs() < 1e-12 * hand);
        assert!((y - 23.428_264_8).abs() < 1e-6);
    }

    #[test]
    fn non_positive_modulus_is_a_model_error() {
        let m = RoofTrussModel { output_scale: 1.0 };
        assert!(m.evaluate(&[1.0, 1.0, 1.0, 1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn central_point_maps_to_the_input_means() {
        for inputs in [RoofTrussInputs::default(), RoofTrussInputs::as_printed()] {
            let spec = inputs.spec();
            assert!(spec.validate().is_empty());
            let f = factor_covariance(&spec, FactorMethod::Cholesky).unwrap();
            let (set, _) = build_qpem(&QpemParams::new(6)).unwrap();
            let x = to_x_space(&set.points, &spec, &f).unwrap();
            assert_eq!(x.row(0), &inputs.mean);
        }
    }
}
