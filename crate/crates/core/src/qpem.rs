//! Quadratic point estimate rule: `2n² + 1` fully symmetric points in
//! standardized space that reproduce every standard-normal moment through
//! fifth order.
//!
//! The set consists of the origin, `2n` axis points at `±r`, and `2n(n−1)`
//! diagonal points at `(±c2, ±c2)` in every coordinate pair. Third- and
//! fourth-order output moments may add `zeta` and `xi` to the central weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::types::{PointKind, Points, SigmaPointSet, WeightTable};

pub const DEFAULT_R: f64 = 3.0;
pub const DEFAULT_ZETA: f64 = -8.0;
pub const DEFAULT_XI: f64 = 60.0;

/// Construction parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpemParams {
    pub n: usize,
    /// Axis-point radius, must exceed `sqrt(2)`.
    pub r: f64,
    /// Added to the central weight for third-order output moments.
    pub zeta: f64,
    /// Added to the central weight for fourth-order output moments.
    pub xi: f64,
}

impl QpemParams {
    /// Scaled rule with the default radius.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            r: DEFAULT_R,
            zeta: DEFAULT_ZETA,
            xi: DEFAULT_XI,
        }
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_scaling(mut self, zeta: f64, xi: f64) -> Self {
        self.zeta = zeta;
        self.xi = xi;
        self
    }

    pub fn unscaled(self) -> Self {
        self.with_scaling(0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::UnsupportedDimension {
                dim: self.n,
                reason: "the quadratic rule needs n >= 2 (diagonal points do not exist for n = 1)"
                    .into(),
            });
        }
        if !(self.r.is_finite() && self.r > std::f64::consts::SQRT_2) {
            return Err(Error::param(format!(
                "r must exceed sqrt(2), got {}",
                self.r
            )));
        }
        if !(self.zeta.is_finite() && self.xi.is_finite()) {
            return Err(Error::param("zeta and xi must be finite"));
        }
        Ok(())
    }
}

/// Closed-form radii and weights of the rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QpemCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
}

impl QpemCoefficients {
    pub fn new(n: usize, r: f64) -> Self {
        let nf = n as f64;
        let r2 = r * r;
        let c2 = (r2 * (nf - 1.0) / (r2 + nf - 4.0)).sqrt();
        let w1 = (4.0 - nf) / (2.0 * r2 * r2);
        let ratio = (r2 + nf - 4.0) / (r2 * (nf - 1.0));
        let w2 = 0.25 * ratio * ratio;
        let w0 = 1.0 - 2.0 * nf * w1 - 2.0 * nf * (nf - 1.0) * w2;
        Self {
            c1: r,
            c2,
            w0,
            w1,
            w2,
        }
    }
}

/// Number of points for dimension `n`.
pub fn point_count(n: usize) -> usize {
    2 * n * n + 1
}

/// Builds the point set and per-order weights.
///
/// Ordering: the central point, then `+r e_i` for each axis, then `−r e_i`,
/// then for each coordinate pair `i < j` the sign patterns
/// `(+,+), (−,+), (+,−), (−,−)` applied to `(z_i, z_j)`.
pub fn build_qpem(params: &QpemParams) -> Result<(SigmaPointSet, WeightTable)> {
    params.validate()?;
    let n = params.n;
    let coef = QpemCoefficients::new(n, params.r);
    let count = point_count(n);

    let mut points = Points::zeros(count, n);
    let mut kinds = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);

    kinds.push(PointKind::Central);
    weights.push(coef.w0);
    let mut row = 1;
    for sign in [1.0, -1.0] {
        for i in 0..n {
            points.row_mut(row)[i] = sign * coef.c1;
            kinds.push(PointKind::Axis);
            weights.push(coef.w1);
            row += 1;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for (si, sj) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                let p = points.row_mut(row);
                p[i] = si * coef.c2;
                p[j] = sj * coef.c2;
                kinds.push(PointKind::Diagonal);
                weights.push(coef.w2);
                row += 1;
            }
        }
    }
    debug_assert_eq!(row, count);

    let set = SigmaPointSet::new(points, kinds)?;
    let table = WeightTable::scaled(weights, 0, params.zeta, params.xi);
    Ok((set, table))
}

/// Sum of absolute weights used for the mean, `Σ|w1_i|`.
pub fn stability_factor(weights: &WeightTable) -> f64 {
    compensated_sum(weights.w1.iter().map(|w| w.abs()))
}

/// The rule's estimate of `E[z_i^6]`, `r²(4−n) + (n−1)·r²(n−1)/(r²+n−4)`.
pub fn sixth_marginal_moment(r: f64, n: usize) -> f64 {
    let nf = n as f64;
    let u = r * r;
    u * (4.0 - nf) + (nf - 1.0) * (u * (nf - 1.0) / (u + nf - 4.0))
}

/// Squared error of the sixth marginal moment against its exact value 15.
pub fn e6_squared(r: f64, n: usize) -> f64 {
    let e = 15.0 - sixth_marginal_moment(r, n);
    e * e
}

/// How a candidate radius was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum R6Source {
    /// The sixth-moment error vanishes.
    ExactRoot,
    /// The derivative of the estimated sixth moment in `r²` vanishes.
    Stationary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct R6Candidate {
    pub r: f64,
    pub e6_squared: f64,
    pub source: R6Source,
}

/// Result of the sixth-moment radius search: every stationary point of
/// `e6²` found in `r > sqrt(2)`, plus the selected minimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct R6Search {
    pub r: f64,
    pub e6_squared: f64,
    pub candidates: Vec<R6Candidate>,
}

/// Upper end of the radius search, in units of `r²`.
const R6_SEARCH_U_MAX: f64 = 1e4;
const R6_SCAN_STEPS: usize = 4000;

/// Minimizes `e6²(r, n)` over `r > sqrt(2)`.
///
/// With `u = r²`, `d(e6²)/du = −2·e6·(n−4)·[(n−1)²/(u+n−4)² − 1]`, so the
/// stationary points are the roots of `e6` and of `(n−1)² − (u+n−4)²`. The
/// dimension factor `(n−4)` is dropped so that `n = 4`, where `e6²` is
/// constant in `r`, still yields a well-defined stationary point. Both
/// factors are scanned on a geometric grid, every sign change is refined by
/// bisection, and the candidate with the smallest `e6²` is returned (ties go
/// to the smaller radius).
pub fn argmin_r6(n: usize) -> Result<R6Search> {
    if n < 2 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            reason: "the sixth-moment tuning is defined for n >= 2".into(),
        });
    }
    let nf = n as f64;
    let e6 = |u: f64| 15.0 - sixth_marginal_moment(u.sqrt(), n);
    let stationary = |u: f64| (nf - 1.0).powi(2) - (u + nf - 4.0).powi(2);

    let u_min = 2.0_f64;
    let grid: Vec<f64> = (0..=R6_SCAN_STEPS)
        .map(|k| {
            let t = k as f64 / R6_SCAN_STEPS as f64;
            // open at u = 2
            u_min + (R6_SEARCH_U_MAX - u_min) * (t.powi(3) + 1e-9 * (1.0 - t))
        })
        .collect();

    let mut candidates = Vec::new();
    for (f, source) in [
        (&e6 as &dyn Fn(f64) -> f64, R6Source::ExactRoot),
        (&stationary as &dyn Fn(f64) -> f64, R6Source::Stationary),
    ] {
        for pair in grid.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (fa, fb) = (f(a), f(b));
            if fa == 0.0 {
                candidates.push(candidate(a, n, source));
            } else if fa.signum() != fb.signum() && fb != 0.0 {
                let u = bisect(f, a, b);
                candidates.push(candidate(u, n, source));
            }
        }
    }
    candidates.sort_by(|a, b| a.r.total_cmp(&b.r));
    candidates.dedup_by(|a, b| (a.r - b.r).abs() <= 1e-12 * b.r && a.source == b.source);

    let best = candidates
        .iter()
        .copied()
        .reduce(|best, c| {
            if c.e6_squared < best.e6_squared - 1e-12 * best.e6_squared.max(1e-300) {
                c
            } else {
                best
            }
        })
        .ok_or_else(|| Error::param(format!("no stationary point of e6^2 found for n = {n}")))?;
    Ok(R6Search {
        r: best.r,
        e6_squared: best.e6_squared,
        candidates,
    })
}

fn candidate(u: f64, n: usize, source: R6Source) -> R6Candidate {
    let r = u.sqrt();
    R6Candidate {
        r,
        e6_squared: e6_squared(r, n),
        source,
    }
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mce::{verify_mce, Monomial};

    #[test]
    fn two_dimensional_closed_form() {
        let c = QpemCoefficients::new(2, 3.0);
        assert!((c.w0 - 28.0 / 81.0).abs() < 1e-15);
        assert!((c.w1 - 1.0 / 81.0).abs() < 1e-15);
        assert!((c.w2 - 49.0 / 324.0).abs() < 1e-15);
        assert!((c.c2 - (9.0_f64 / 7.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_constraints_by_direct_summation() {
        let (set, w) = build_qpem(&QpemParams::new(2)).unwrap();
        assert_eq!(set.len(), 9);
        let sum = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
            set.points.rows().zip(&w.w1).map(|(z, wi)| wi * f(z)).sum()
        };
        assert!((sum(&|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((sum(&|z| z[0] * z[0]) - 1.0).abs() < 1e-14);
        assert!((sum(&|z| z[1].powi(4)) - 3.0).abs() < 1e-13);
        assert!((sum(&|z| z[0] * z[0] * z[1] * z[1]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn axis_weight_vanishes_at_four_dimensions() {
        for r in [1.5, 3.0, 7.0] {
            assert_eq!(QpemCoefficients::new(4, r).w1, 0.0);
        }
    }

    #[test]
    fn point_count_at_ten_dimensions() {
        let (set, w) = build_qpem(&QpemParams::new(10)).unwrap();
        assert_eq!(set.len(), 201);
        assert_eq!(w.len(), 201);
    }

    #[test]
    fn rejects_one_dimension_and_small_radius() {
        assert!(matches!(
            build_qpem(&QpemParams::new(1)),
            Err(Error::UnsupportedDimension { dim: 1, .. })
        ));
        let err = build_qpem(&QpemParams::new(3).with_r(1.4)).unwrap_err();
        assert!(err.to_string().contains("r must exceed sqrt(2)"));
        assert!(build_qpem(&QpemParams::new(3).with_r(std::f64::consts::SQRT_2)).is_err());
    }

    #[test]
    fn diagonal_ordering_follows_pairs_then_signs() {
        let (set, _) = build_qpem(&QpemParams::new(3)).unwrap();
        let c2 = QpemCoefficients::new(3, 3.0).c2;
        // rows 7..10: pair (0, 1)
        assert_eq!(set.point(7), &[c2, c2, 0.0]);
        assert_eq!(set.point(8), &[-c2, c2, 0.0]);
        assert_eq!(set.point(9), &[c2, -c2, 0.0]);
        assert_eq!(set.point(10), &[-c2, -c2, 0.0]);
        assert_eq!(set.point(11), &[c2, 0.0, c2]);
        assert_eq!(set.point(15), &[0.0, c2, c2]);
        assert_eq!(set.point(1), &[3.0, 0.0, 0.0]);
        assert_eq!(set.point(4), &[-3.0, 0.0, 0.0]);
    }

    #[test]
    fn fifth_order_exact_in_two_dimensions() {
        let (set, w) = build_qpem(&QpemParams::new(2)).unwrap();
        let report = verify_mce(&set, &w, 5);
        assert!(report.max_residual().residual <= 1e-12);
    }

    #[test]
    fn sixth_marginal_residual_matches_closed_form() {
        let (set, w) = build_qpem(&QpemParams::new(2)).unwrap();
        let report = verify_mce(&set, &w, 6);
        let res = report.residual(&Monomial::new(vec![(0, 6)]));
        // |18 + 9/7 - 15|
        assert!((res.residual - 30.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn e6_vanishes_at_the_quadratic_root_for_two_dimensions() {
        // 2u^2 - 18u + 30 = 0
        let u = (9.0 + 21.0_f64.sqrt()) / 2.0;
        assert!(e6_squared(u.sqrt(), 2) < 1e-24);
        let u = (9.0 - 21.0_f64.sqrt()) / 2.0;
        assert!(e6_squared(u.sqrt(), 2) < 1e-24);
    }

    #[test]
    fn e6_is_positive_at_default_radius_for_ten_dimensions() {
        assert!(e6_squared(3.0, 10) > 0.0);
        // value at sqrt(3) is 36 for every n
        for n in [2, 3, 4, 10, 50] {
            assert!((e6_squared(3.0_f64.sqrt(), n) - 36.0).abs() < 1e-9);
        }
    }

    #[test]
    fn argmin_reports_every_stationary_point_for_two_dimensions() {
        let search = argmin_r6(2).unwrap();
        assert!(search.e6_squared <= 1e-18);
        let roots: Vec<_> = search
            .candidates
            .iter()
            .filter(|c| c.source == R6Source::ExactRoot)
            .collect();
        assert_eq!(roots.len(), 2);
        assert!(search
            .candidates
            .iter()
            .any(|c| c.source == R6Source::Stationary && (c.r - 3.0_f64.sqrt()).abs() < 1e-9));
    }

    #[test]
    fn argmin_is_sqrt3_from_four_dimensions_up() {
        for n in [4, 5, 10, 50] {
            let search = argmin_r6(n).unwrap();
            assert!((search.r - 3.0_f64.sqrt()).abs() < 1e-6, "n = {n}");
        }
    }

    #[test]
    fn stability_factor_values() {
        let (_, w) = build_qpem(&QpemParams::new(2)).unwrap();
        assert!((stability_factor(&w) - 1.0).abs() < 1e-14);
        let (_, w) = build_qpem(&QpemParams::new(50)).unwrap();
        let c = QpemCoefficients::new(50, 3.0);
        let closed = c.w0.abs() + 100.0 * c.w1.abs() + 4900.0 * c.w2.abs();
        assert!((stability_factor(&w) - closed).abs() < 1e-9);
        assert!((closed - 57.79).abs() < 0.01);
        assert!(closed < 100.0);
    }

    #[test]
    fn uniform_positive_weights_have_unit_stability() {
        assert_eq!(stability_factor(&WeightTable::uniform(8)), 1.0);
    }
}
