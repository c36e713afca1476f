//! Elastic bar with a random axial rigidity field.
//!
//! `−(D(x) u′)′ = q` on `[0, L]`, fixed at `x = 0` and free at `x = L`. The
//! rigidity is a Gaussian field with mean 100 kN, standard deviation 10 kN
//! and squared-exponential correlation of length 0.2 m, expanded in 20 KL
//! modes on the 101 FE nodes. Each of the 100 linear elements uses the field
//! value at its midpoint. The model input is the vector of KL coefficients;
//! the output is the tip displacement in mm.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{references, BenchmarkCase, ResponseModel};
use crate::error::Result;
use crate::randomfield::{kl_decompose, KlBasis, Kernel};
use crate::transform::FactorMethod;
use crate::types::GaussianSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarConfig {
    pub length: f64,
    pub elements: usize,
    /// Distributed load [kN/m].
    pub load: f64,
    /// Mean rigidity [kN].
    pub mean: f64,
    /// Rigidity standard deviation [kN].
    pub stdev: f64,
    pub correlation_length: f64,
    pub terms: usize,
}

impl Default for BarConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            elements: 100,
            load: 1.0,
            mean: 100.0,
            stdev: 10.0,
            correlation_length: 0.2,
            terms: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ElasticBarModel {
    pub config: BarConfig,
    pub basis: KlBasis,
    /// `midpoint_modes[(e, k)] = √λ_k φ_k(x_e)` at element midpoints.
    midpoint_modes: DMatrix<f64>,
}

impl ElasticBarModel {
    pub fn new(config: BarConfig) -> Result<Self> {
        let ne = config.elements;
        let h = config.length / ne as f64;
        let nodes: Vec<f64> = (0..=ne).map(|i| i as f64 * h).collect();
        let kernel = Kernel::squared_exponential(config.stdev, config.correlation_length)?;
        let basis = kl_decompose(&nodes, &kernel, config.terms)?.with_mean(config.mean);
        let mids = element_midpoints(&config);
        let mut midpoint_modes = basis.sample_modes(&mids);
        for (k, lambda) in basis.eigenvalues.iter().enumerate() {
            let s = lambda.sqrt();
            midpoint_modes.column_mut(k).iter_mut().for_each(|v| *v *= s);
        }
        Ok(Self {
            config,
            basis,
            midpoint_modes,
        })
    }

    /// Element rigidities for KL coefficients `eta`.
    pub fn rigidities(&self, eta: &[f64]) -> Vec<f64> {
        let d = &self.midpoint_modes * DVector::from_column_slice(eta);
        d.iter().map(|v| self.config.mean + v).collect()
    }

    /// Tip displacement [mm] of the assembled FE system for given element
    /// rigidities, solved with the Thomas algorithm.
    pub fn tip_displacement(&self, rigidity: &[f64]) -> std::result::Result<f64, String> {
        let ne = self.config.elements;
        if let Some(e) = rigidity.iter().position(|d| d.is_nan() || *d <= 0.0) {
            return Err(format!("element {} has non-positive rigidity {}", e + 1, rigidity[e]));
        }
        let h = self.config.length / ne as f64;
        let k: Vec<f64> = rigidity.iter().map(|d| d / h).collect();
        // unknowns are nodes 1..=ne; row i couples elements i and i + 1
        let mut diag: Vec<f64> = (0..ne)
            .map(|i| k[i] + if i + 1 < ne { k[i + 1] } else { 0.0 })
            .collect();
        let off: Vec<f64> = (0..ne.saturating_sub(1)).map(|i| -k[i + 1]).collect();
        let mut rhs: Vec<f64> = (0..ne)
            .map(|i| self.config.load * h * if i + 1 < ne { 1.0 } else { 0.5 })
            .collect();
        for i in 1..ne {
            let m = off[i - 1] / diag[i - 1];
            diag[i] -= m * off[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        // the tip is the last unknown, so no back substitution is needed
        Ok(rhs[ne - 1] / diag[ne - 1] * 1000.0)
    }
}

fn element_midpoints(config: &BarConfig) -> Vec<f64> {
    let h = config.length / config.elements as f64;
    (0..config.elements).map(|e| (e as f64 + 0.5) * h).collect()
}

impl ResponseModel for ElasticBarModel {
    fn dim(&self) -> usize {
        self.config.terms
    }

    fn evaluate(&self, eta: &[f64]) -> std::result::Result<f64, String> {
        self.tip_displacement(&self.rigidities(eta))
    }
}

pub fn case() -> Result<BenchmarkCase> {
    let model = ElasticBarModel::new(BarConfig::default())?;
    let n = model.dim();
    Ok(BenchmarkCase {
        name: "elasticbar".into(),
        description: "elastic bar tip displacement, 20 standard normal KL coefficients".into(),
        units: "mm".into(),
        model: Arc::new(model),
        input: GaussianSpec::standard(n),
        factor: FactorMethod::Cholesky,
        references: references::elasticbar(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Statically determinate bar: element force is `q (L − x_mid)`.
    fn flux_sum(config: &BarConfig, rigidity: &[f64]) -> f64 {
        let h = config.length / config.elements as f64;
        element_midpoints(config)
            .iter()
            .zip(rigidity)
            .map(|(x, d)| config.load * (config.length - x) * h / d)
            .sum::<f64>()
            * 1000.0
    }

    #[test]
    fn constant_rigidity_gives_closed_form() {
        let model = ElasticBarModel::new(BarConfig::default()).unwrap();
        let u = model.evaluate(&[0.0; 20]).unwrap();
        // q L^2 / (2 mu) in mm
        assert!((u - 5.0).abs() < 1e-6 * 5.0);
    }

    #[test]
    fn solver_matches_statically_determinate_sum() {
        let config = BarConfig::default();
        let model = ElasticBarModel::new(config).unwrap();
        let eta: Vec<f64> = (0..20).map(|k| ((k * 7 % 5) as f64 - 2.0) * 0.6).collect();
        let d = model.rigidities(&eta);
        let fe = model.tip_displacement(&d).unwrap();
        assert!((fe - flux_sum(&config, &d)).abs() < 1e-12 * fe);
    }

    #[test]
    fn first_mode_shifts_rigidity() {
        let model = ElasticBarModel::new(BarConfig::default()).unwrap();
        let mut eta = vec![0.0; 20];
        eta[0] = 1.0;
        let d = model.rigidities(&eta);
        // the leading mode is positive-dominant, so the bar stiffens
        assert!(d.iter().sum::<f64>() > 100.0 * 100.0);
        assert!(model.evaluate(&eta).unwrap() < 5.0);
    }

    #[test]
    fn vanishing_field_is_deterministic() {
        let config = BarConfig {
            stdev: 1e-9,
            ..BarConfig::default()
        };
        let model = ElasticBarModel::new(config).unwrap();
        let u = model.evaluate(&[3.0; 20]).unwrap();
        assert!((u - 5.0).abs() < 1e-6);
    }

    #[test]
    fn negative_rigidity_is_reported() {
        let model = ElasticBarModel::new(BarConfig::default()).unwrap();
        let mut eta = vec![0.0; 20];
        eta[0] = -50.0;
        let err = model.evaluate(&eta).unwrap_err();
        assert!(err.contains("non-positive rigidity"));
    }
}
