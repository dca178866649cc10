//! Composite Gauss–Legendre rules on cosine-mapped energy intervals.
//!
//! Integrands of the collision tensor have square-root branch points at every
//! channel threshold. Each finite interval `[a, b]` between consecutive
//! thresholds is mapped with `E = a + (b−a)(1 − cos θ)/2`, which turns
//! `sqrt(E − a)` and `sqrt(b − E)` into smooth functions of θ. The last interval
//! only has a branch point at its left end and uses `E = a + (b−a)(1 − cos θ)`,
//! θ ∈ [0, π/2].

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn unit_rule<T: Real>(nodes: usize) -> Vec<(T, T)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(nodes.max(1)).unwrap());
    let mut pairs: Vec<(T, T)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (T::lit(0.5 * (x + 1.0)), T::lit(0.5 * w)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs
}

/// Composite rule on [0, 1] with `panels` equal panels of `nodes` points each.
pub fn composite_unit_rule<T: Real>(panels: usize, nodes: usize) -> Vec<(T, T)> {
    let base = unit_rule::<T>(nodes);
    let width = T::one() / T::from_usize_lossy(panels);
    let mut out = Vec::with_capacity(panels * nodes);
    for panel in 0..panels {
        let left = width * T::from_usize_lossy(panel);
        out.extend(base.iter().map(|&(x, w)| (left + width * x, width * w)));
    }
    out
}

/// Integration nodes in energy for one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Nodes<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Nodes<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.points.iter().zip(&self.weights).fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }
}

/// Maps a unit composite rule onto `[a, b]` with the cosine substitution.
/// `open_right` selects the half-range map used for the last interval.
/// `1 − cos θ` is evaluated as `2 sin²(θ/2)` to keep nodes near `a` accurate.
pub fn cosine_mapped<T: Real>(a: T, b: T, open_right: bool, unit: &[(T, T)]) -> Nodes<T> {
    let pi = T::pi();
    let span = b - a;
    let mut points = Vec::with_capacity(unit.len());
    let mut weights = Vec::with_capacity(unit.len());
    for &(u, w) in unit {
        if open_right {
            let theta = u * pi / T::lit(2.0);
            let half = (theta / T::lit(2.0)).sin();
            points.push(a + span * T::lit(2.0) * half * half);
            weights.push(w * pi / T::lit(2.0) * span * theta.sin());
        } else {
            let theta = u * pi;
            let half = (theta / T::lit(2.0)).sin();
            points.push(a + span * half * half);
            weights.push(w * pi * span * theta.sin() / T::lit(2.0));
        }
    }
    Nodes { points, weights }
}

/// Sorted breakpoints with values closer than `merge_tol` collapsed onto the
/// smaller one.
pub fn merge_breakpoints<T: Real>(mut values: Vec<T>, merge_tol: T) -> Vec<T> {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<T> = Vec::with_capacity(values.len());
    for v in values {
        match out.last() {
            Some(&last) if v - last <= merge_tol => {}
            _ => out.push(v),
        }
    }
    out
}

/// A piecewise rule: one coarse and one refined node set per interval.
#[derive(Debug, Clone)]
pub struct PiecewiseRule<T> {
    pub breakpoints: Vec<T>,
    pub coarse: Vec<Nodes<T>>,
    pub fine: Vec<Nodes<T>>,
}

impl<T: Real> PiecewiseRule<T> {
    /// Intervals `[breakpoints[i], breakpoints[i+1]]`; the last ends at `top`
    /// and uses the half-range map.
    pub fn new(breakpoints: Vec<T>, top: T, panels: usize, nodes: usize) -> Self {
        let coarse_unit = composite_unit_rule::<T>(panels, nodes);
        let fine_unit = composite_unit_rule::<T>(panels, 2 * nodes);
        let mut edges = breakpoints.clone();
        edges.retain(|&b| b < top);
        edges.push(top);
        let mut coarse = Vec::new();
        let mut fine = Vec::new();
        let last = edges.len() - 1;
        for i in 0..last {
            let tail = i + 1 == last;
            coarse.push(cosine_mapped(edges[i], edges[i + 1], tail, &coarse_unit));
            fine.push(cosine_mapped(edges[i], edges[i + 1], tail, &fine_unit));
        }
        edges.pop();
        Self { breakpoints: edges, coarse, fine }
    }

    pub fn intervals(&self) -> usize {
        self.coarse.len()
    }

    /// Index of the first interval starting at or above `lower` (within `tol`).
    pub fn first_interval(&self, lower: T, tol: T) -> usize {
        self.breakpoints.iter().position(|&b| b >= lower - tol).unwrap_or(self.breakpoints.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_rule_integrates_polynomials() {
        let rule = unit_rule::<f64>(8);
        let integral: f64 = rule.iter().map(|&(x, w)| w * x.powi(7)).sum();
        assert!((integral - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn square_root_endpoint_is_resolved() {
        let unit = composite_unit_rule::<f64>(8, 32);
        // ∫_0^1 sqrt(x(1-x)) dx = π/8
        let nodes = cosine_mapped(0.0, 1.0, false, &unit);
        let v = nodes.integrate(|x| (x * (1.0 - x)).max(0.0).sqrt());
        assert!((v - std::f64::consts::PI / 8.0).abs() < 1e-14);
        // ∫_0^∞ e^{-x}/sqrt(x) dx = sqrt(π), truncated at 60
        let tail = cosine_mapped(0.0, 60.0, true, &unit);
        let v = tail.integrate(|x| (-x).exp() / x.sqrt());
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_merge() {
        let merged = merge_breakpoints(vec![1.0, 0.0, 1.0 + 1e-12, 2.0], 1e-9);
        assert_eq!(merged, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn piecewise_rule_layout() {
        let rule = PiecewiseRule::<f64>::new(vec![0.0, 1.0, 5.0], 10.0, 2, 4);
        assert_eq!(rule.intervals(), 3);
        assert_eq!(rule.coarse[0].len(), 8);
        assert_eq!(rule.fine[2].len(), 16);
        assert_eq!(rule.first_interval(1.0, 1e-12), 1);
        let total: f64 = (0..3).map(|i| rule.fine[i].integrate(|_| 1.0)).sum();
        assert!((total - 10.0).abs() < 1e-12);
    }
}
