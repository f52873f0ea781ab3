//! Fixed integration rules on a bounded interval.
//!
//! Two families are provided: the composite 7-point closed Newton–Cotes rule,
//! whose equispaced nodes double as the Nyström collocation grid, and
//! composite Gauss–Legendre panels for the smooth double and triple
//! integrals used elsewhere.

use alloc::vec::Vec;

use crate::legendre::gauss_legendre;
use crate::{Error, Result};

/// Weights of the 7-point closed Newton–Cotes rule on a unit panel, times 840.
pub const NEWTON_COTES_7: [f64; 7] = [41.0, 216.0, 27.0, 272.0, 27.0, 216.0, 41.0];

/// Nodes per composite Newton–Cotes panel, minus the shared endpoint.
pub const NODES_PER_PANEL: usize = 6;

/// Nodes and weights of a composite rule on `[start, end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
    start: f64,
    end: f64,
}

impl QuadratureRule {
    /// Composite 7-point closed Newton–Cotes rule with `panels` panels on `[0, horizon]`.
    ///
    /// The grid has `6 * panels + 1` equispaced nodes. Weights at shared
    /// panel endpoints accumulate, and the rule is exact for polynomials of
    /// degree up to 7.
    pub fn composite_newton_cotes(panels: usize, horizon: f64) -> Result<Self> {
        if panels == 0 {
            return Err(Error::InvalidConfig(
                "Newton-Cotes panel count must be positive",
            ));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidConfig("horizon must be positive and finite"));
        }
        let intervals = NODES_PER_PANEL * panels;
        let nodes: Vec<f64> = (0..=intervals)
            .map(|i| horizon * i as f64 / intervals as f64)
            .collect();
        let scale = horizon / (840.0 * panels as f64);
        let mut weights = alloc::vec![0.0; intervals + 1];
        for p in 0..panels {
            for (k, w) in NEWTON_COTES_7.iter().enumerate() {
                weights[NODES_PER_PANEL * p + k] += w * scale;
            }
        }
        Ok(QuadratureRule {
            nodes,
            weights,
            panels,
            start: 0.0,
            end: horizon,
        })
    }

    /// Composite Gauss–Legendre rule with `points_per_panel` nodes on each of
    /// `panels` equal panels of `[a, b]`; exact to degree `2 * points_per_panel - 1`
    /// on every panel.
    pub fn gauss_panels(points_per_panel: usize, panels: usize, a: f64, b: f64) -> Result<Self> {
        if points_per_panel < 2 {
            return Err(Error::InvalidConfig(
                "Gauss rule needs at least two points per panel",
            ));
        }
        if panels == 0 {
            return Err(Error::InvalidConfig("Gauss panel count must be positive"));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidConfig("Gauss interval must satisfy a < b"));
        }
        let (x, w) = gauss_legendre(points_per_panel);
        let mut nodes = Vec::with_capacity(points_per_panel * panels);
        let mut weights = Vec::with_capacity(points_per_panel * panels);
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + 0.5 * width * xi);
                weights.push(0.5 * width * wi);
            }
        }
        Ok(QuadratureRule {
            nodes,
            weights,
            panels,
            start: a,
            end: b,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// `Σ w_i f_i` for samples taken at the rule's nodes.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                expected: self.weights.len(),
                got: samples.len(),
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quadrature sample"));
        }
        Ok(self.weights.iter().zip(samples).map(|(w, f)| w * f).sum())
    }

    /// Integrates a callable by sampling it at the nodes.
    pub fn integrate_fn<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, w)| w * f(t))
            .sum()
    }
}

/// Gauss panels covering `[a, b]` at roughly `panels_per_unit` panels per unit length
/// (at least one). Returns `None` for an empty interval.
pub(crate) fn gauss_for_interval(
    points: usize,
    panels_per_unit: f64,
    a: f64,
    b: f64,
) -> Option<QuadratureRule> {
    if !(b > a) {
        return None;
    }
    let panels = num_traits::Float::ceil(panels_per_unit * (b - a)) as usize + 1;
    QuadratureRule::gauss_panels(points, panels, a, b).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    #[allow(unused_imports)]
    use num_traits::Float;

    #[test]
    fn single_panel_constant_and_degree_seven() {
        let rule = QuadratureRule::composite_newton_cotes(1, 1.0).unwrap();
        assert_eq!(rule.len(), 7);
        let one = rule.integrate_fn(|_| 1.0);
        assert!((one - 1.0).abs() < 1e-15);
        let t7 = rule.integrate_fn(|t| t.powi(7));
        assert!((t7 - 0.125).abs() < 1e-12);
    }

    #[test]
    fn node_count_for_hundred_panels() {
        let rule = QuadratureRule::composite_newton_cotes(100, 1.0).unwrap();
        assert_eq!(rule.len(), 601);
        assert_eq!(rule.nodes()[0], 0.0);
        assert_eq!(*rule.nodes().last().unwrap(), 1.0);
    }

    #[test]
    fn rejects_invalid_newton_cotes_arguments() {
        assert!(QuadratureRule::composite_newton_cotes(0, 1.0).is_err());
        assert!(QuadratureRule::composite_newton_cotes(3, 0.0).is_err());
        assert!(QuadratureRule::composite_newton_cotes(3, -1.0).is_err());
    }

    #[test]
    fn integrate_linear_exponential_and_zero() {
        let rule = QuadratureRule::composite_newton_cotes(100, 1.0).unwrap();
        let lin: alloc::vec::Vec<f64> = rule.nodes().to_vec();
        assert!((rule.integrate(&lin).unwrap() - 0.5).abs() < 1e-12);
        let zeros = alloc::vec![0.0; rule.len()];
        assert_eq!(rule.integrate(&zeros).unwrap(), 0.0);
        let ex: alloc::vec::Vec<f64> = rule.nodes().iter().map(|t| t.exp()).collect();
        assert!((rule.integrate(&ex).unwrap() - (core::f64::consts::E - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn integrate_rejects_bad_samples() {
        let rule = QuadratureRule::composite_newton_cotes(2, 1.0).unwrap();
        assert!(matches!(
            rule.integrate(&[1.0, 2.0]),
            Err(Error::LengthMismatch {
                expected: 13,
                got: 2
            })
        ));
        let mut s = alloc::vec![1.0; 13];
        s[4] = f64::NAN;
        assert!(rule.integrate(&s).is_err());
    }

    #[test]
    fn gauss_panel_exactness() {
        let g = QuadratureRule::gauss_panels(5, 1, 0.0, 1.0).unwrap();
        assert!((g.integrate_fn(|t| t.powi(9)) - 0.1).abs() < 1e-13);
        let g = QuadratureRule::gauss_panels(2, 4, 0.0, 1.0).unwrap();
        assert!((g.integrate_fn(|t| t.powi(3)) - 0.25).abs() < 1e-13);
        let g = QuadratureRule::gauss_panels(3, 7, -2.0, 5.0).unwrap();
        assert!((g.integrate_fn(|_| 1.0) - 7.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_rejects_invalid_arguments() {
        assert!(QuadratureRule::gauss_panels(1, 1, 0.0, 1.0).is_err());
        assert!(QuadratureRule::gauss_panels(3, 0, 0.0, 1.0).is_err());
        assert!(QuadratureRule::gauss_panels(3, 1, 1.0, 1.0).is_err());
        assert!(QuadratureRule::gauss_panels(3, 1, 2.0, 1.0).is_err());
    }
}
