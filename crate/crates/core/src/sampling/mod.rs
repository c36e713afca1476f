//! Sampling baselines in standardized normal space: Monte Carlo, Latin
//! hypercube and Sobol quasi-Monte Carlo. Every sample carries weight `1/N`.
//!
//! Monte Carlo coordinate `j` of sample `i` is `Φ⁻¹(u)` with `u` taken from
//! position `i·n + j` of the seeded counter stream, so rows can be generated
//! in parallel or streamed without changing any value.

pub mod rng;
pub mod sobol;
mod sobol_table;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};
use crate::types::{PointKind, Points, SigmaPointSet, WeightTable};

pub use rng::SplitMix64;
pub use sobol::{Sobol, SOBOL_MAX_DIM};

/// Standard normal quantile `Φ⁻¹(p) = −√2 · erfc⁻¹(2p)`.
pub fn inv_norm_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("probability must lie in (0, 1), got {p}")));
    }
    Ok(quantile(p))
}

#[inline]
fn quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMethod {
    Mc,
    Lhs,
    Sobol,
}

impl SampleMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleMethod::Mc => "mc",
            SampleMethod::Lhs => "lhs",
            SampleMethod::Sobol => "sobol",
        }
    }
}

pub const DEFAULT_SOBOL_SKIP: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub method: SampleMethod,
    pub count: usize,
    /// Used by `mc` and `lhs`.
    pub seed: u64,
    /// Leading Sobol points dropped; the first point is the origin of `[0,1)^n`.
    pub skip: u64,
}

impl SamplePlan {
    pub fn mc(count: usize, seed: u64) -> Self {
        Self {
            method: SampleMethod::Mc,
            count,
            seed,
            skip: 0,
        }
    }

    pub fn lhs(count: usize, seed: u64) -> Self {
        Self {
            method: SampleMethod::Lhs,
            count,
            seed,
            skip: 0,
        }
    }

    pub fn sobol(count: usize) -> Self {
        Self {
            method: SampleMethod::Sobol,
            count,
            seed: 0,
            skip: DEFAULT_SOBOL_SKIP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::param("sample count must be at least 1"));
        }
        if self.method == SampleMethod::Sobol && self.skip == 0 {
            return Err(Error::param(
                "Sobol skip must be at least 1: the first point is the origin, which has no normal quantile",
            ));
        }
        Ok(())
    }
}

/// Fills `out` with Monte Carlo row `index` for dimension `out.len()`.
pub fn mc_row(seed: u64, index: u64, out: &mut [f64]) {
    let n = out.len() as u64;
    for (j, z) in out.iter_mut().enumerate() {
        *z = quantile(rng::to_unit(rng::at(seed, index * n + j as u64)));
    }
}

/// Sobol points mapped to `[0, 1)` without the normal transform.
pub fn sobol_unit(n: usize, count: usize, skip: u64) -> Result<Points> {
    let data = Sobol::new(n)?.unit_points(skip, count)?;
    Points::from_rows(n, data)
}

/// Latin hypercube design on `(0, 1)^n`: per dimension a random permutation of
/// the strata and a uniform position inside each stratum. Dimension `d` draws
/// its permutation from child stream `2d` and its jitter from `2d + 1`.
pub fn lhs_unit(n: usize, count: usize, seed: u64) -> Points {
    let mut data = vec![0.0; count * n];
    let inv = 1.0 / count as f64;
    for d in 0..n {
        let mut perm: Vec<usize> = (0..count).collect();
        let mut g = SplitMix64::derive(seed, 2 * d as u64);
        for i in (1..count).rev() {
            let j = g.next_below(i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        let mut jitter = SplitMix64::derive(seed, 2 * d as u64 + 1);
        for (i, &stratum) in perm.iter().enumerate() {
            data[i * n + d] = (stratum as f64 + jitter.next_unit()) * inv;
        }
    }
    Points::from_rows(n.max(1), data).expect("consistent shape")
}

/// Generates `plan.count` standard normal points in `n` dimensions.
pub fn generate(plan: &SamplePlan, n: usize) -> Result<(SigmaPointSet, WeightTable)> {
    plan.validate()?;
    if n < 1 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            reason: "at least one input is required".into(),
        });
    }
    let count = plan.count;
    let points = match plan.method {
        SampleMethod::Mc => {
            let mut data = vec![0.0; count * n];
            data.par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, row)| mc_row(plan.seed, i as u64, row));
            Points::from_rows(n, data)?
        }
        SampleMethod::Lhs => to_normal(lhs_unit(n, count, plan.seed))?,
        SampleMethod::Sobol => to_normal(sobol_unit(n, count, plan.skip)?)?,
    };
    let kinds = vec![PointKind::Sample; count];
    Ok((SigmaPointSet::new(points, kinds)?, WeightTable::uniform(count)))
}

fn to_normal(unit: Points) -> Result<Points> {
    let data = unit
        .as_slice()
        .iter()
        .map(|&u| inv_norm_cdf(u))
        .collect::<Result<Vec<f64>>>()?;
    Points::from_rows(unit.dim(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_reference_values() {
        // 40-digit root finding on the normal CDF
        let cases = [
            (0.975, 1.959_963_984_540_053_9),
            (0.3, -0.524_400_512_708_040_8),
            (1e-10, -6.361_340_902_404_056),
            (0.999_999, 4.753_424_308_817_088),
        ];
        for (p, z) in cases {
            assert!((inv_norm_cdf(p).unwrap() - z).abs() < 1e-12, "p = {p}");
        }
        assert_eq!(inv_norm_cdf(0.5).unwrap(), 0.0);
    }

    #[test]
    fn quantile_is_antisymmetric() {
        for p in [0.01, 0.2, 0.37, 0.499] {
            let a = inv_norm_cdf(p).unwrap();
            let b = inv_norm_cdf(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_rejects_closed_endpoints() {
        assert!(inv_norm_cdf(0.0).is_err());
        assert!(inv_norm_cdf(1.0).is_err());
        assert!(inv_norm_cdf(f64::NAN).is_err());
    }

    #[test]
    fn lhs_one_sample_per_quartile() {
        let (set, w) = generate(&SamplePlan::lhs(4, 11), 1).unwrap();
        let q = [
            f64::NEG_INFINITY,
            inv_norm_cdf(0.25).unwrap(),
            0.0,
            inv_norm_cdf(0.75).unwrap(),
            f64::INFINITY,
        ];
        let mut occupancy = [0; 4];
        for p in set.points.rows() {
            let k = (0..4).find(|&k| p[0] > q[k] && p[0] < q[k + 1]).unwrap();
            occupancy[k] += 1;
        }
        assert_eq!(occupancy, [1, 1, 1, 1]);
        assert_eq!(w.w1, vec![0.25; 4]);
    }

    #[test]
    fn lhs_strata_are_filled_in_every_dimension() {
        let n = 6;
        let count = 37;
        let unit = lhs_unit(n, count, 2024);
        for d in 0..n {
            let mut seen = vec![0; count];
            for p in unit.rows() {
                seen[(p[d] * count as f64) as usize] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn mc_is_deterministic() {
        let a = generate(&SamplePlan::mc(100, 7), 3).unwrap();
        let b = generate(&SamplePlan::mc(100, 7), 3).unwrap();
        assert_eq!(a.0, b.0);
        let c = generate(&SamplePlan::mc(100, 8), 3).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn sobol_bar_configuration() {
        let (set, w) = generate(&SamplePlan::sobol(801), 20).unwrap();
        assert_eq!(set.len(), 801);
        assert!(set.points.as_slice().iter().all(|z| z.is_finite()));
        assert!((w.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sobol_without_skip_is_rejected_in_normal_space() {
        let mut plan = SamplePlan::sobol(8);
        plan.skip = 0;
        assert!(generate(&plan, 2).is_err());
        let unit = sobol_unit(2, 2, 0).unwrap();
        assert_eq!(unit.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn unit_sobol_points_lie_in_half_open_cube() {
        let unit = sobol_unit(10, 1000, 0).unwrap();
        assert!(unit.as_slice().iter().all(|&u| (0.0..1.0).contains(&u)));
    }
}
