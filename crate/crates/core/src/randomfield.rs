//! Karhunen–Loève expansion of one-dimensional Gaussian random fields.
//!
//! The covariance operator is discretized by the Nyström method on the given
//! mesh with trapezoid weights `W`. The symmetric problem
//! `W^½ C W^½ u = λ u` is solved densely and the modes are recovered as
//! `φ = W^{−½} u`, which makes them orthonormal under the quadrature weights.
//! Off-mesh values use the Nyström interpolant
//! `φ_k(x) = λ_k⁻¹ Σ_j w_j C(x, x_j) φ_k(x_j)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Squared-exponential covariance `σ² exp(−Σ_d (Δx_d / l_d)²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub variance: f64,
    pub lengths: Vec<f64>,
}

impl Kernel {
    pub fn new(variance: f64, lengths: Vec<f64>) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::param(format!("kernel variance must be positive, got {variance}")));
        }
        if lengths.is_empty() || lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::param("correlation lengths must be positive"));
        }
        Ok(Self { variance, lengths })
    }

    /// One-dimensional kernel from a standard deviation and correlation length.
    pub fn squared_exponential(stdev: f64, length: f64) -> Result<Self> {
        Self::new(stdev * stdev, vec![length])
    }

    pub fn covariance(&self, a: f64, b: f64) -> f64 {
        let t = (a - b) / self.lengths[0];
        self.variance * (-t * t).exp()
    }
}

/// Truncated expansion on a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct KlBasis {
    /// Descending, clipped at zero.
    pub eigenvalues: Vec<f64>,
    /// `modes[(i, k)] = φ_k(mesh[i])`.
    pub modes: DMatrix<f64>,
    pub mesh: Vec<f64>,
    pub weights: Vec<f64>,
    pub mean: f64,
    pub kernel: Kernel,
}

/// Trapezoid weights of a strictly increasing mesh.
pub fn trapezoid_weights(mesh: &[f64]) -> Vec<f64> {
    let m = mesh.len();
    (0..m)
        .map(|i| {
            let left = if i > 0 { mesh[i] - mesh[i - 1] } else { 0.0 };
            let right = if i + 1 < m { mesh[i + 1] - mesh[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Leading `terms` eigenpairs of the kernel's covariance operator on `mesh`.
///
/// Each mode is signed so that its entry of largest magnitude is positive.
pub fn kl_decompose(mesh: &[f64], kernel: &Kernel, terms: usize) -> Result<KlBasis> {
    let m = mesh.len();
    if m < 2 {
        return Err(Error::param("the mesh needs at least two nodes"));
    }
    if mesh.windows(2).any(|p| p[1].is_nan() || p[1] <= p[0]) {
        return Err(Error::param("mesh coordinates must be strictly increasing"));
    }
    if terms == 0 || terms > m {
        return Err(Error::param(format!(
            "number of terms must be in 1..={m} for a mesh of {m} nodes, got {terms}"
        )));
    }
    if kernel.lengths.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: kernel.lengths.len(),
        });
    }
    let weights = trapezoid_weights(mesh);
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let b = DMatrix::from_fn(m, m, |i, j| sw[i] * kernel.covariance(mesh[i], mesh[j]) * sw[j]);
    let eig = SymmetricEigen::new(b);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));

    let mut eigenvalues = Vec::with_capacity(terms);
    let mut modes = DMatrix::zeros(m, terms);
    for (k, &src) in order.iter().take(terms).enumerate() {
        eigenvalues.push(eig.eigenvalues[src].max(0.0));
        let mut col: Vec<f64> = (0..m).map(|i| eig.eigenvectors[(i, src)] / sw[i]).collect();
        let lead = col.iter().copied().fold(0.0_f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if lead < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
        for (i, v) in col.into_iter().enumerate() {
            modes[(i, k)] = v;
        }
    }
    Ok(KlBasis {
        eigenvalues,
        modes,
        mesh: mesh.to_vec(),
        weights,
        mean: 0.0,
        kernel: kernel.clone(),
    })
}

impl KlBasis {
    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    pub fn terms(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ λ_k / (σ² · |domain|)`.
    pub fn captured_variance_ratio(&self) -> f64 {
        let span = self.mesh[self.mesh.len() - 1] - self.mesh[0];
        self.eigenvalues.iter().sum::<f64>() / (self.kernel.variance * span)
    }

    /// Mode values at arbitrary coordinates, `out[(p, k)] = φ_k(xs[p])`.
    /// Modes with zero eigenvalue interpolate to zero.
    pub fn sample_modes(&self, xs: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(xs.len(), self.terms());
        for (p, &x) in xs.iter().enumerate() {
            let kw: Vec<f64> = self
                .mesh
                .iter()
                .zip(&self.weights)
                .map(|(&xj, &wj)| wj * self.kernel.covariance(x, xj))
                .collect();
            for (k, &lambda) in self.eigenvalues.iter().enumerate() {
                if lambda > 0.0 {
                    let s: f64 = kw.iter().zip(self.modes.column(k).iter()).map(|(a, b)| a * b).sum();
                    out[(p, k)] = s / lambda;
                }
            }
        }
        out
    }

    /// Field values on the mesh, `μ + Σ_k √λ_k φ_k(x_i) η_k`.
    pub fn realize(&self, eta: &[f64]) -> Result<Vec<f64>> {
        if eta.len() != self.terms() {
            return Err(Error::DimensionMismatch {
                expected: self.terms(),
                found: eta.len(),
            });
        }
        let scaled: Vec<f64> = self
            .eigenvalues
            .iter()
            .zip(eta)
            .map(|(l, e)| l.sqrt() * e)
            .collect();
        Ok((0..self.mesh.len())
            .map(|i| {
                self.mean
                    + self
                        .modes
                        .row(i)
                        .iter()
                        .zip(&scaled)
                        .map(|(p, s)| p * s)
                        .sum::<f64>()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{mc_row, SplitMix64};

    fn uniform_mesh(m: usize) -> Vec<f64> {
        (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
    }

    fn bar_basis() -> KlBasis {
        let kernel = Kernel::squared_exponential(10.0, 0.2).unwrap();
        kl_decompose(&uniform_mesh(101), &kernel, 20).unwrap().with_mean(100.0)
    }

    #[test]
    fn bar_eigenvalues_match_dense_reference() {
        // numpy eigvalsh on the same symmetric Nystrom matrix
        let basis = bar_basis();
        let expect = [
            32.963237733085634,
            26.526715186022884,
            18.52292749509917,
            11.272619707845008,
        ];
        for (a, b) in basis.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10 * b);
        }
        assert!((basis.captured_variance_ratio() - 0.9999999999838779).abs() < 1e-12);
        // a mesh twice as fine moves the ratio by ~1e-12
        assert!((basis.captured_variance_ratio() - 0.999999999985063).abs() < 1e-11);
        assert!(basis.eigenvalues.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn complete_basis_captures_all_variance() {
        let kernel = Kernel::squared_exponential(3.0, 0.3).unwrap();
        let basis = kl_decompose(&uniform_mesh(41), &kernel, 41).unwrap();
        assert!((basis.captured_variance_ratio() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn long_correlation_has_one_dominant_mode() {
        let kernel = Kernel::squared_exponential(1.0, 100.0).unwrap();
        let basis = kl_decompose(&uniform_mesh(101), &kernel, 101).unwrap();
        let total: f64 = basis.eigenvalues.iter().sum();
        assert!(basis.eigenvalues[0] / total >= 0.999);
        assert!(basis.modes.column(0).iter().all(|v| *v > 0.0));
    }

    #[test]
    fn modes_are_weighted_orthonormal() {
        let basis = bar_basis();
        for j in 0..basis.terms() {
            for k in 0..basis.terms() {
                let ip: f64 = (0..basis.mesh.len())
                    .map(|i| basis.weights[i] * basis.modes[(i, j)] * basis.modes[(i, k)])
                    .sum();
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((ip - target).abs() < 1e-8, "({j}, {k}) -> {ip}");
            }
        }
    }

    #[test]
    fn eigen_residual_is_small() {
        let basis = bar_basis();
        let m = basis.mesh.len();
        let l1 = basis.eigenvalues[0];
        for k in 0..basis.terms() {
            for i in 0..m {
                let cw: f64 = (0..m)
                    .map(|j| {
                        basis.kernel.covariance(basis.mesh[i], basis.mesh[j])
                            * basis.weights[j]
                            * basis.modes[(j, k)]
                    })
                    .sum();
                assert!((cw - basis.eigenvalues[k] * basis.modes[(i, k)]).abs() <= 1e-8 * l1);
            }
        }
    }

    #[test]
    fn pointwise_variance_never_exceeds_the_kernel() {
        let basis = bar_basis();
        for i in 0..basis.mesh.len() {
            let v: f64 = (0..basis.terms())
                .map(|k| basis.eigenvalues[k] * basis.modes[(i, k)].powi(2))
                .sum();
            assert!(v <= 100.0 * (1.0 + 1e-6));
        }
    }

    #[test]
    fn interpolation_reproduces_mesh_values() {
        let basis = bar_basis();
        let at_mesh = basis.sample_modes(&basis.mesh);
        let l1 = basis.eigenvalues[0];
        for k in 0..basis.terms() {
            // the eigen residual is divided by lambda_k
            let tol = 1e-12 * l1 / basis.eigenvalues[k];
            for i in 0..basis.mesh.len() {
                assert!((at_mesh[(i, k)] - basis.modes[(i, k)]).abs() < tol);
            }
        }
    }

    #[test]
    fn realize_definitions() {
        let basis = bar_basis();
        let zero = basis.realize(&[0.0; 20]).unwrap();
        assert!(zero.iter().all(|&v| v == 100.0));
        let mut e1 = vec![0.0; 20];
        e1[0] = 1.0;
        let f = basis.realize(&e1).unwrap();
        let s = basis.eigenvalues[0].sqrt();
        for (i, v) in f.iter().enumerate() {
            assert!((v - (100.0 + s * basis.modes[(i, 0)])).abs() < 1e-12);
        }
        assert!(basis.realize(&[0.0; 3]).is_err());
    }

    #[test]
    fn covariance_replay() {
        let basis = bar_basis();
        let draws = 100_000;
        let pairs = [(0, 0), (10, 20), (50, 50), (30, 45), (0, 100)];
        let mut sums = vec![0.0; pairs.len()];
        let mut means = vec![0.0; pairs.len() * 2];
        let mut eta = vec![0.0; 20];
        let seed = SplitMix64::derive(17, 0).next_u64();
        for d in 0..draws {
            mc_row(seed, d, &mut eta);
            let f = basis.realize(&eta).unwrap();
            for (p, &(i, j)) in pairs.iter().enumerate() {
                sums[p] += (f[i] - 100.0) * (f[j] - 100.0);
                means[2 * p] += f[i] - 100.0;
                means[2 * p + 1] += f[j] - 100.0;
            }
        }
        let nd = draws as f64;
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let est = sums[p] / nd - (means[2 * p] / nd) * (means[2 * p + 1] / nd);
            let cii = basis.kernel.covariance(basis.mesh[i], basis.mesh[i]);
            let cjj = basis.kernel.covariance(basis.mesh[j], basis.mesh[j]);
            let cij = basis.kernel.covariance(basis.mesh[i], basis.mesh[j]);
            let se = ((cii * cjj + cij * cij) / nd).sqrt();
            assert!((est - cij).abs() <= 3.0 * se, "pair ({i}, {j}): {est} vs {cij}");
        }
    }

    #[test]
    fn invalid_inputs() {
        let kernel = Kernel::squared_exponential(1.0, 0.2).unwrap();
        assert!(kl_decompose(&[0.0, 0.5, 0.5], &kernel, 1).is_err());
        assert!(kl_decompose(&uniform_mesh(5), &kernel, 6).is_err());
        assert!(Kernel::squared_exponential(1.0, 0.0).is_err());
        assert!(Kernel::new(-1.0, vec![1.0]).is_err());
    }
}
