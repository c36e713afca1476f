//! Moment constraint checks: how well a weighted point set reproduces the
//! mixed moments of independent standard normal variables.
//!
//! Point sets produced here are sparse (at most two non-zero coordinates per
//! point for the deterministic rules), so sums are accumulated per point over
//! the monomials supported on that point's non-zero coordinates. A monomial
//! that no point touches has an estimated moment of exactly zero.

use std::collections::HashMap;

use crate::numeric::NeumaierSum;
use crate::types::{SigmaPointSet, WeightTable};

/// Sparse monomial `Π z_v^{k_v}` stored as sorted `(variable, exponent)`
/// pairs with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn new(mut factors: Vec<(u32, u32)>) -> Self {
        factors.retain(|&(_, k)| k > 0);
        factors.sort_unstable();
        let mut merged: Vec<(u32, u32)> = Vec::with_capacity(factors.len());
        for (v, k) in factors {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += k,
                _ => merged.push((v, k)),
            }
        }
        Self(merged)
    }

    /// From a dense exponent vector.
    pub fn from_exponents(exponents: &[u32]) -> Self {
        Self(
            exponents
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| (v as u32, k))
                .collect(),
        )
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|f| f.1).sum()
    }

    /// All exponents even (including the constant monomial).
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|f| f.1 % 2 == 0)
    }

    pub fn evaluate(&self, z: &[f64]) -> f64 {
        self.0
            .iter()
            .map(|&(v, k)| z[v as usize].powi(k as i32))
            .product()
    }

    /// Exact moment under independent standard normals:
    /// `Π (k_v − 1)!!` when every exponent is even, zero otherwise.
    pub fn normal_moment(&self) -> f64 {
        if !self.is_even() {
            return 0.0;
        }
        self.0.iter().map(|&(_, k)| double_factorial(k - 1)).product()
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(v, k)| format!("z{}^{}", v + 1, k))
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

fn double_factorial(k: u32) -> f64 {
    let mut acc = 1.0;
    let mut i = k;
    while i > 1 {
        acc *= i as f64;
        i -= 2;
    }
    acc
}

/// Steps `exponents` to the next vector with total degree `<= max_degree`
/// (odometer order). Returns false after the last one.
fn advance(exponents: &mut [u32], total: &mut u32, max_degree: u32) -> bool {
    for i in (0..exponents.len()).rev() {
        if *total < max_degree {
            exponents[i] += 1;
            *total += 1;
            return true;
        }
        *total -= exponents[i];
        exponents[i] = 0;
    }
    false
}

/// Iterator over every monomial in `dim` variables of total degree
/// `<= max_degree`, starting with the constant.
pub struct MonomialIter {
    exponents: Vec<u32>,
    total: u32,
    max_degree: u32,
    started: bool,
    done: bool,
}

impl MonomialIter {
    pub fn new(dim: usize, max_degree: u32) -> Self {
        Self {
            exponents: vec![0; dim],
            total: 0,
            max_degree,
            started: false,
            done: false,
        }
    }
}

impl Iterator for MonomialIter {
    type Item = Monomial;

    fn next(&mut self) -> Option<Monomial> {
        if self.done {
            return None;
        }
        if self.started && !advance(&mut self.exponents, &mut self.total, self.max_degree) {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(Monomial::from_exponents(&self.exponents))
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Accumulated {
    sum: NeumaierSum,
    abs_sum: f64,
}

/// Residual of one moment constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialResidual {
    pub monomial: Monomial,
    pub estimate: f64,
    pub target: f64,
    pub residual: f64,
    /// `residual / max(1, Σ|w_i m(z_i)|)`.
    pub scaled: f64,
}

/// Weighted point-set moments for all monomials up to `max_order`.
#[derive(Clone, Debug)]
pub struct MceReport {
    dim: usize,
    max_order: u32,
    sums: HashMap<Monomial, Accumulated>,
}

impl MceReport {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// Residual for a single monomial (which must be within `max_order`).
    pub fn residual(&self, monomial: &Monomial) -> MonomialResidual {
        assert!(monomial.degree() <= self.max_order);
        let target = monomial.normal_moment();
        let (estimate, abs_sum) = self
            .sums
            .get(monomial)
            .map(|a| (a.sum.value(), a.abs_sum))
            .unwrap_or((0.0, 0.0));
        let residual = (estimate - target).abs();
        MonomialResidual {
            monomial: monomial.clone(),
            estimate,
            target,
            residual,
            scaled: residual / abs_sum.max(1.0),
        }
    }

    /// Residuals of every monomial of degree `<= max_order`, lazily.
    pub fn residuals(&self) -> impl Iterator<Item = MonomialResidual> + '_ {
        MonomialIter::new(self.dim, self.max_order).map(move |m| self.residual(&m))
    }

    /// Largest residual over all monomials. Untouched odd monomials have an
    /// exact zero residual, so only touched monomials and untouched even ones
    /// need to be visited.
    pub fn max_residual(&self) -> MonomialResidual {
        self.worst(|_| true, |r| r.residual)
    }

    /// Largest scaled residual over all monomials.
    pub fn max_scaled_residual(&self) -> MonomialResidual {
        self.worst(|_| true, |r| r.scaled)
    }

    /// Largest residual over monomials with at least one odd exponent.
    pub fn max_odd_residual(&self) -> MonomialResidual {
        self.worst(|m| !m.is_even(), |r| r.residual)
    }

    fn worst(
        &self,
        filter: impl Fn(&Monomial) -> bool,
        key: impl Fn(&MonomialResidual) -> f64,
    ) -> MonomialResidual {
        let mut best = self.residual(&Monomial::new(Vec::new()));
        if !filter(&best.monomial) {
            best.residual = 0.0;
            best.scaled = 0.0;
        }
        let mut consider = |r: MonomialResidual| {
            if key(&r) > key(&best) {
                best = r;
            }
        };
        for m in self.sums.keys().filter(|m| filter(m)) {
            consider(self.residual(m));
        }
        // untouched even monomials: halve exponents and enumerate
        for half in MonomialIter::new(self.dim, self.max_order / 2) {
            let m = Monomial::new(half.factors().iter().map(|&(v, k)| (v, 2 * k)).collect());
            if filter(&m) && !self.sums.contains_key(&m) {
                consider(self.residual(&m));
            }
        }
        best
    }
}

/// Accumulates `Σ w1_i · m(z_i)` for every monomial of degree `<= max_order`.
pub fn verify_mce(points: &SigmaPointSet, weights: &WeightTable, max_order: u32) -> MceReport {
    let dim = points.dim();
    let mut sums: HashMap<Monomial, Accumulated> = HashMap::new();
    let constant = sums.entry(Monomial::new(Vec::new())).or_default();
    for &w in &weights.w1 {
        constant.sum.add(w);
        constant.abs_sum += w.abs();
    }

    let mut support: Vec<u32> = Vec::with_capacity(dim);
    let mut exps: Vec<u32> = Vec::with_capacity(dim);
    for (z, &w) in points.points.rows().zip(&weights.w1) {
        support.clear();
        support.extend(
            z.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i as u32),
        );
        exps.clear();
        exps.resize(support.len(), 0);
        let mut total = 0;
        while advance(&mut exps, &mut total, max_order) {
            let factors: Vec<(u32, u32)> = support
                .iter()
                .zip(&exps)
                .filter(|(_, &k)| k > 0)
                .map(|(&v, &k)| (v, k))
                .collect();
            let value: f64 = factors
                .iter()
                .map(|&(v, k)| z[v as usize].powi(k as i32))
                .product();
            let term = w * value;
            let acc = sums.entry(Monomial(factors)).or_default();
            acc.sum.add(term);
            acc.abs_sum += term.abs();
        }
    }
    MceReport {
        dim,
        max_order,
        sums,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_moments() {
        assert_eq!(Monomial::new(vec![(0, 2)]).normal_moment(), 1.0);
        assert_eq!(Monomial::new(vec![(0, 4)]).normal_moment(), 3.0);
        assert_eq!(Monomial::new(vec![(0, 6)]).normal_moment(), 15.0);
        assert_eq!(Monomial::new(vec![(0, 2), (3, 2)]).normal_moment(), 1.0);
        assert_eq!(Monomial::new(vec![(0, 4), (1, 2)]).normal_moment(), 3.0);
        assert_eq!(Monomial::new(vec![(0, 3), (1, 1)]).normal_moment(), 0.0);
        assert_eq!(Monomial::new(Vec::new()).normal_moment(), 1.0);
    }

    #[test]
    fn monomial_count_matches_binomial() {
        // C(n + d, d)
        assert_eq!(MonomialIter::new(3, 4).count(), 35);
        assert_eq!(MonomialIter::new(2, 5).count(), 21);
        assert_eq!(MonomialIter::new(1, 0).count(), 1);
    }

    #[test]
    fn monomials_are_unique_and_bounded() {
        let all: Vec<Monomial> = MonomialIter::new(4, 3).collect();
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        assert!(all.iter().all(|m| m.degree() <= 3));
    }

    #[test]
    fn merges_repeated_variables() {
        let m = Monomial::new(vec![(2, 1), (0, 1), (2, 3)]);
        assert_eq!(m.factors(), &[(0, 1), (2, 4)]);
        assert_eq!(m.to_string(), "z1^1*z3^4");
    }
}
