//! Six-story shear frame under horizontal floor loads.
//!
//! The top displacement is the sum of inter-story drifts,
//! `u_t = Σ_k V_k H³ / (12 (EI_{2k−1} + EI_{2k}))` with `V_k = Σ_{j≥k} F_j`
//! the story shear. Inputs are `(F_1..F_6, EI_1..EI_12)`, `F ~ N(20, 6)` kN
//! and `EI ~ N(10⁴, 10³)` kN·m²; loads are pairwise correlated with 0.5,
//! stiffnesses with 0.1. The result is reported in mm.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{references, BenchmarkCase, ResponseModel};
use crate::transform::{corr_to_cov, FactorMethod};
use crate::types::GaussianSpec;

pub const STORY_HEIGHT: f64 = 4.0;
pub const LOAD_MEAN: f64 = 20.0;
pub const LOAD_STD: f64 = 6.0;
pub const STIFFNESS_MEAN: f64 = 1.0e4;
pub const STIFFNESS_STD: f64 = 1.0e3;

#[derive(Clone, Copy, Debug, Default)]
pub struct SixStoryModel;

impl ResponseModel for SixStoryModel {
    fn dim(&self) -> usize {
        18
    }

    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String> {
        let (loads, stiffness) = x.split_at(6);
        let h3 = STORY_HEIGHT.powi(3);
        let mut shear = 0.0;
        let mut total = 0.0;
        for k in (0..6).rev() {
            shear += loads[k];
            let ei = stiffness[2 * k] + stiffness[2 * k + 1];
            if ei <= 0.0 {
                return Err(format!("non-positive stiffness sum {ei} in story {}", k + 1));
            }
            total += shear * h3 / (12.0 * ei);
        }
        Ok(total * 1000.0)
    }
}

pub fn correlation() -> DMatrix<f64> {
    DMatrix::from_fn(18, 18, |i, j| {
        if i == j {
            1.0
        } else if i < 6 && j < 6 {
            0.5
        } else if i >= 6 && j >= 6 {
            0.1
        } else {
            0.0
        }
    })
}

pub fn spec() -> GaussianSpec {
    let mut mean = vec![LOAD_MEAN; 6];
    mean.extend([STIFFNESS_MEAN; 12]);
    let mut stds = vec![LOAD_STD; 6];
    stds.extend([STIFFNESS_STD; 12]);
    let cov = corr_to_cov(&stds, &correlation()).expect("valid correlation");
    GaussianSpec::new(DVector::from_vec(mean), cov)
}

pub fn case() -> BenchmarkCase {
    BenchmarkCase {
        name: "sixstory".into(),
        description: "six-story frame top displacement, 18 correlated normal inputs".into(),
        units: "mm".into(),
        model: Arc::new(SixStoryModel),
        input: spec(),
        factor: FactorMethod::Cholesky,
        references: references::sixstory(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_load_gives_zero_displacement() {
        let mut x = vec![0.0; 6];
        x.extend([1e4; 12]);
        assert_eq!(SixStoryModel.evaluate(&x).unwrap(), 0.0);
    }

    #[test]
    fn mean_input_value() {
        // 21 F H^3 / (12 * 2 EI) = 21 * 20 * 64 / 240000 m
        let y = SixStoryModel.evaluate(spec().mean.as_slice()).unwrap();
        assert!((y - 112.0).abs() < 1e-10);
    }

    #[test]
    fn top_load_only_bends_every_story() {
        let mut x = vec![0.0; 6];
        x[5] = 12.0;
        x.extend([1e4; 12]);
        // 6 stories * 12 * 64 / 240000 m
        assert!((SixStoryModel.evaluate(&x).unwrap() - 19.2).abs() < 1e-12);
    }

    #[test]
    fn covariance_is_positive_definite() {
        let s = spec();
        assert!(s.validate().is_empty());
        assert!(s.cov.clone().cholesky().is_some());
    }

    #[test]
    fn rejects_non_positive_stiffness() {
        let mut x = vec![1.0; 6];
        x.extend([-1.0; 12]);
        assert!(SixStoryModel.evaluate(&x).is_err());
    }
}
