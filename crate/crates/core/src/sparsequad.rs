//! Smolyak sparse Gauss–Hermite quadrature for standard normal inputs.
//!
//! The level-`L` grid is built with the combination technique from 1-D
//! Gauss–Hermite rules with 1, 2 and 3 nodes at levels 0, 1 and 2:
//!
//! `A(L, n) = Σ_{L−n+1 ≤ |i| ≤ L} (−1)^{L−|i|} C(n−1, L−|i|) ⊗_k U_{i_k}`
//!
//! Coincident nodes from different tensor grids are merged by summing their
//! weights. At level 2 this gives `2n² + 2n + 1` points for `n ≥ 2` and
//! integrates every polynomial of total degree five exactly.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::types::{PointKind, Points, SigmaPointSet, WeightTable};

/// Highest supported level.
pub const MAX_LEVEL: usize = 2;
/// Node count of the 1-D rule used at each level.
pub const LEVEL_SIZES: [usize; MAX_LEVEL + 1] = [1, 2, 3];
/// Coordinates closer than this are treated as the same node.
pub const MERGE_TOL: f64 = 1e-12;

/// One-dimensional rule for `N(0, 1)`; weights sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Normalized probabilists' Hermite values `He_k(x)/sqrt(k!)` for `k = m−1, m`.
fn hermite_pair(m: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..m {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// The `m`-node probabilists' Gauss–Hermite rule.
///
/// Nodes start from the eigenvalues of the Jacobi matrix, are polished by
/// Newton steps on `He_m`, and are then symmetrized about zero. Weights use
/// `w_i = 1 / (m · p_{m−1}(x_i)²)` with `p_k` the normalized polynomials.
pub fn gauss_hermite_1d(m: usize) -> Result<Rule1D> {
    if m < 1 {
        return Err(Error::param("a Gauss-Hermite rule needs at least one node"));
    }
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let sqrt_m = (m as f64).sqrt();
    for x in nodes.iter_mut() {
        for _ in 0..8 {
            let (pm1, pm) = hermite_pair(m, *x);
            let step = pm / (sqrt_m * pm1);
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }
    for i in 0..m / 2 {
        let a = 0.5 * (nodes[m - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[m - 1 - i] = a;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (pm1, _) = hermite_pair(m, x);
            1.0 / (m as f64 * pm1 * pm1)
        })
        .collect();
    for i in 0..m / 2 {
        let w = 0.5 * (weights[i] + weights[m - 1 - i]);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    Ok(Rule1D { nodes, weights })
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Sparse multi-indices `(dimension, level)` with positive levels summing to
/// at most `budget`, each listed once with strictly increasing dimensions.
fn sparse_indices(n: usize, budget: usize) -> Vec<Vec<(usize, usize)>> {
    fn extend(
        n: usize,
        start: usize,
        budget: usize,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        out.push(current.clone());
        for d in start..n {
            for level in 1..=budget {
                current.push((d, level));
                extend(n, d + 1, budget - level, current, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(n, 0, budget, &mut Vec::new(), &mut out);
    out.sort_by_key(|idx| idx.iter().map(|&(_, l)| l).sum::<usize>());
    out
}

fn merge_key(point: &[f64]) -> Vec<i64> {
    point.iter().map(|&x| (x / MERGE_TOL).round() as i64).collect()
}

/// Level-`level` Smolyak grid in `n` dimensions.
///
/// The origin comes first and is tagged central; the remaining points keep
/// the order in which they first appear in the combination sum.
pub fn smolyak_grid(n: usize, level: usize) -> Result<(SigmaPointSet, WeightTable)> {
    if n < 1 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            reason: "at least one input is required".into(),
        });
    }
    if level > MAX_LEVEL {
        return Err(Error::param(format!(
            "sparse grid level {level} is not supported (maximum {MAX_LEVEL})"
        )));
    }
    let rules: Vec<Rule1D> = LEVEL_SIZES
        .iter()
        .map(|&m| gauss_hermite_1d(m))
        .collect::<Result<_>>()?;

    let mut order: Vec<Vec<f64>> = Vec::new();
    let mut terms: Vec<Vec<f64>> = Vec::new();
    let mut lookup: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut point = vec![0.0; n];

    for index in sparse_indices(n, level) {
        let norm: usize = index.iter().map(|&(_, l)| l).sum();
        let gap = level - norm;
        if gap > n - 1 {
            continue;
        }
        let coef = if gap.is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(n - 1, gap);
        if coef == 0.0 {
            continue;
        }
        // tensor product over the support of the multi-index
        let sizes: Vec<usize> = index.iter().map(|&(_, l)| LEVEL_SIZES[l]).collect();
        let mut digits = vec![0usize; index.len()];
        loop {
            point.iter_mut().for_each(|v| *v = 0.0);
            let mut w = coef;
            for (k, &(d, l)) in index.iter().enumerate() {
                point[d] = rules[l].nodes[digits[k]];
                w *= rules[l].weights[digits[k]];
            }
            let slot = *lookup.entry(merge_key(&point)).or_insert_with(|| {
                order.push(point.clone());
                terms.push(Vec::new());
                order.len() - 1
            });
            terms[slot].push(w);

            let mut k = 0;
            while k < digits.len() {
                digits[k] += 1;
                if digits[k] < sizes[k] {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
        }
    }

    if let Some(k) = order.iter().position(|p| p.iter().all(|&v| v == 0.0)) {
        let p = order.remove(k);
        order.insert(0, p);
        let t = terms.remove(k);
        terms.insert(0, t);
    }

    let count = order.len();
    let mut data = Vec::with_capacity(count * n);
    let mut kinds = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for (p, t) in order.iter().zip(&terms) {
        data.extend_from_slice(p);
        kinds.push(if p.iter().all(|&v| v == 0.0) {
            PointKind::Central
        } else {
            PointKind::Grid
        });
        weights.push(compensated_sum(t.iter().copied()));
    }
    let set = SigmaPointSet::new(Points::from_rows(n, data)?, kinds)?;
    Ok((set, WeightTable::unscaled(weights)))
}

/// Merged level-2 point count for `n ≥ 2`.
pub fn sgh3_point_count(n: usize) -> usize {
    2 * n * n + 2 * n + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mce::verify_mce;

    #[test]
    fn one_node_rule() {
        let r = gauss_hermite_1d(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_node_rule() {
        let r = gauss_hermite_1d(3).unwrap();
        let s3 = 3.0_f64.sqrt();
        assert!((r.nodes[0] + s3).abs() < 1e-15);
        assert_eq!(r.nodes[1], 0.0);
        assert!((r.nodes[2] - s3).abs() < 1e-15);
        assert!((r.weights[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((r.weights[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn five_node_rule_and_degree_nine() {
        let r = gauss_hermite_1d(5).unwrap();
        let s = 10.0_f64.sqrt();
        let expect = [
            -(5.0 + s).sqrt(),
            -(5.0 - s).sqrt(),
            0.0,
            (5.0 - s).sqrt(),
            (5.0 + s).sqrt(),
        ];
        for (a, b) in r.nodes.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        // 1, 0, 1, 0, 3, 0, 15, 0, 105, 0
        let targets = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0, 0.0];
        for (k, t) in targets.iter().enumerate() {
            let m: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * x.powi(k as i32))
                .sum();
            assert!((m - t).abs() < 1e-11 * t.max(1.0), "degree {k}");
        }
    }

    #[test]
    fn large_rules_stay_normalized() {
        for m in [10, 20, 40] {
            let r = gauss_hermite_1d(m).unwrap();
            assert!((compensated_sum(r.weights.iter().copied()) - 1.0).abs() < 1e-13);
            assert!(r.weights.iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn one_dimensional_grid_is_the_finest_rule() {
        let (set, w) = smolyak_grid(1, 2).unwrap();
        let rule = gauss_hermite_1d(3).unwrap();
        assert_eq!(set.len(), 3);
        let mut pairs: Vec<(f64, f64)> = set.points.rows().map(|p| p[0]).zip(w.w1).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for ((x, wx), (y, wy)) in pairs.iter().zip(rule.nodes.iter().zip(&rule.weights)) {
            assert_eq!(x, y);
            assert!((wx - wy).abs() < 1e-15);
        }
    }

    #[test]
    fn counts_and_weight_sums() {
        for n in [2, 5, 10, 20] {
            let (set, w) = smolyak_grid(n, 2).unwrap();
            assert_eq!(set.len(), sgh3_point_count(n), "n = {n}");
            assert!((w.sum() - 1.0).abs() < 1e-12);
            assert_eq!(set.central_index(), Some(0));
            assert!(set.is_fully_symmetric(0.0));
        }
        assert_eq!(smolyak_grid(5, 2).unwrap().0.len(), 61);
        assert_eq!(smolyak_grid(10, 2).unwrap().0.len(), 221);
    }

    #[test]
    fn degree_five_exact() {
        for n in [2, 3, 6] {
            let (set, w) = smolyak_grid(n, 2).unwrap();
            let report = verify_mce(&set, &w, 5);
            assert!(report.max_residual().residual <= 1e-12, "n = {n}");
        }
    }

    #[test]
    fn has_negative_weights() {
        let (_, w) = smolyak_grid(4, 2).unwrap();
        assert!(w.w1.iter().any(|&x| x < 0.0));
    }

    #[test]
    fn lower_levels() {
        let (set, w) = smolyak_grid(3, 0).unwrap();
        assert_eq!(set.len(), 1);
        assert!((w.w1[0] - 1.0).abs() < 1e-15);
        let (set, w) = smolyak_grid(3, 1).unwrap();
        assert_eq!(set.len(), 7);
        assert!(verify_mce(&set, &w, 3).max_residual().residual < 1e-12);
        assert!(smolyak_grid(3, 3).is_err());
    }
}
