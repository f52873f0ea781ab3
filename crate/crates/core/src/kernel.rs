//! The Fredholm kernel `k(t,s;a)` and right-hand side `Z(t)` of the quadratic
//! optimality condition
//!
//! ```text
//! ∫₀ᵀ k(t,s;a) u(s) ds = Z(t),
//! k(t,s;a) = e^{-A(t)-A(s)-max(t,s)} ∫_{max(t,s)}^T e^{2A(τ)+τ} dτ,
//! ```
//!
//! where `Z(t) = e^{-A(t)} ∫_t^T ∫_0^τ e^{2A(τ)-A(s)} E[G(τ)² z(s) / (G(t)G(s))] ds dτ`.
//!
//! When `z` is independent of the noise, the lognormal expectation factors as
//! `E[G(τ)²/(G(t)G(s))] E[z(s)] = e^{τ - max(t,s)} E[z(s)]`, and exchanging the
//! integrals gives `Z(t) = ∫₀ᵀ k(t,s;a) E[z(s)] ds`, which is what is evaluated
//! for the independent scenarios. For `z = G` the expectation couples with the
//! noise and only the closed form for `a ≡ 1`, `T = 1` is supported.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::E;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::DenseMatrix;
use crate::process::DriftCoefficient;
use crate::quadrature::{gauss_for_interval, QuadratureRule};
use crate::{Error, Result};

pub type MeanFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type CovarianceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Which stochastic drift `z` is being approximated.
#[derive(Clone)]
pub enum Scenario {
    /// `z` a geometric Brownian motion started at 1, independent of `W`:
    /// `E[z] ≡ 1`, `Cov(z(s), z(τ)) = e^{min(s,τ)} - 1`.
    IndependentGbm,
    /// `z = G`, driven by the same Brownian motion as the equation.
    DependentGbm,
    /// Any `z` independent of `W`, described by its mean and (optionally)
    /// its covariance.
    CustomIndependent {
        mean: MeanFn,
        covariance: Option<CovarianceFn>,
    },
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::IndependentGbm => f.write_str("IndependentGbm"),
            Scenario::DependentGbm => f.write_str("DependentGbm"),
            Scenario::CustomIndependent { covariance, .. } => f
                .debug_struct("CustomIndependent")
                .field("has_covariance", &covariance.is_some())
                .finish(),
        }
    }
}

impl Scenario {
    pub fn is_independent(&self) -> bool {
        !matches!(self, Scenario::DependentGbm)
    }

    /// `E[z(t)]`.
    pub fn mean(&self, t: f64) -> f64 {
        match self {
            Scenario::IndependentGbm | Scenario::DependentGbm => 1.0,
            Scenario::CustomIndependent { mean, .. } => mean(t),
        }
    }

    /// `Cov(z(s), z(τ))`, when known.
    pub fn covariance(&self, s: f64, tau: f64) -> Option<f64> {
        match self {
            Scenario::IndependentGbm | Scenario::DependentGbm => Some(s.min(tau).exp() - 1.0),
            Scenario::CustomIndependent { covariance, .. } => {
                covariance.as_ref().map(|c| c(s, tau))
            }
        }
    }
}

/// A drift coefficient, a horizon and a scenario: everything needed to write
/// down the kernel and right-hand side.
#[derive(Debug, Clone)]
pub struct KernelProblem {
    drift: DriftCoefficient,
    horizon: f64,
    scenario: Scenario,
}

impl KernelProblem {
    pub fn new(drift: DriftCoefficient, horizon: f64, scenario: Scenario) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidConfig("horizon must be positive and finite"));
        }
        let probe = QuadratureRule::gauss_panels(5, 20, 0.0, horizon)?;
        drift.check_bound_on(probe.nodes())?;
        if let Scenario::CustomIndependent { mean, .. } = &scenario {
            if probe.nodes().iter().any(|&t| !mean(t).is_finite()) {
                return Err(Error::NonFinite("mean of z"));
            }
        }
        Ok(KernelProblem {
            drift,
            horizon,
            scenario,
        })
    }

    /// `a ≡ -1`, `T = 1`, `z` an independent GBM.
    pub fn example_independent() -> Self {
        KernelProblem {
            drift: DriftCoefficient::constant(-1.0),
            horizon: 1.0,
            scenario: Scenario::IndependentGbm,
        }
    }

    /// `a ≡ 1`, `T = 1`, `z = G`.
    pub fn example_dependent() -> Self {
        KernelProblem {
            drift: DriftCoefficient::constant(1.0),
            horizon: 1.0,
            scenario: Scenario::DependentGbm,
        }
    }

    pub fn drift(&self) -> &DriftCoefficient {
        &self.drift
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn closed_form_drift(&self) -> Option<f64> {
        match self.drift.as_constant() {
            Some(c) if (c == -1.0 || c == 1.0) && self.horizon == 1.0 => Some(c),
            _ => None,
        }
    }

    fn check_time(&self, name: &'static str, t: f64) -> Result<()> {
        Error::check_range(name, t, 0.0, self.horizon)
    }

    /// `k(t, s; a)`: closed form for `a ≡ ±1` on `[0, 1]`, quadrature otherwise.
    pub fn eval_kernel(&self, t: f64, s: f64) -> Result<f64> {
        self.check_time("t", t)?;
        self.check_time("s", s)?;
        Ok(match self.closed_form_drift() {
            Some(c) if c < 0.0 => kernel_minus_one(t, s),
            Some(_) => kernel_plus_one(t, s),
            None => self.kernel_by_quadrature(t, s),
        })
    }

    /// `k(t, s; a)` evaluated from its integral definition even when a
    /// closed form exists.
    pub fn eval_kernel_generic(&self, t: f64, s: f64) -> Result<f64> {
        self.check_time("t", t)?;
        self.check_time("s", s)?;
        Ok(self.kernel_by_quadrature(t, s))
    }

    fn kernel_by_quadrature(&self, t: f64, s: f64) -> f64 {
        let a = &self.drift;
        let m = t.max(s);
        (-a.antiderivative(t) - a.antiderivative(s)).exp() * self.tail_factor(m)
    }

    /// `e^{-m} ∫_m^T e^{2A(τ)+τ} dτ`; the kernel is `e^{-A(t)-A(s)}` times
    /// this evaluated at `m = max(t, s)`.
    fn tail_factor(&self, m: f64) -> f64 {
        let a = &self.drift;
        match gauss_for_interval(5, 10.0, m, self.horizon) {
            Some(rule) => rule.integrate_fn(|tau| (2.0 * a.antiderivative(tau) + tau - m).exp()),
            None => 0.0,
        }
    }

    /// `[k(p_i, p_j)]` for arbitrary points in `[0, T]`.
    pub fn kernel_matrix(&self, points: &[f64]) -> Result<DenseMatrix> {
        for &p in points {
            self.check_time("t", p)?;
        }
        let n = points.len();
        match self.closed_form_drift() {
            Some(c) => {
                let k = if c < 0.0 {
                    kernel_minus_one
                } else {
                    kernel_plus_one
                };
                Ok(DenseMatrix::from_fn(n, |i, j| k(points[i], points[j])))
            }
            None => {
                // k factors as e^{-A(t)} e^{-A(s)} φ(max(t,s)); evaluate the
                // expensive pieces once per point.
                let scale: Vec<f64> = points
                    .iter()
                    .map(|&p| (-self.drift.antiderivative(p)).exp())
                    .collect();
                let tail: Vec<f64> = points.iter().map(|&p| self.tail_factor(p)).collect();
                Ok(DenseMatrix::from_fn(n, |i, j| {
                    let m = if points[i] >= points[j] { i } else { j };
                    scale[i] * scale[j] * tail[m]
                }))
            }
        }
    }

    /// `Z(t)`. The outer integral runs over `[t, T]`, so `Z(T) = 0` exactly.
    pub fn eval_z(&self, t: f64) -> Result<f64> {
        self.check_time("t", t)?;
        if t == self.horizon {
            return Ok(0.0);
        }
        match (&self.scenario, self.closed_form_drift()) {
            (Scenario::IndependentGbm, Some(c)) if c < 0.0 => Ok(z_independent_minus_one(t)),
            (Scenario::DependentGbm, Some(c)) if c > 0.0 => Ok(z_dependent_plus_one(t)),
            (Scenario::DependentGbm, _) => Err(Error::Unsupported(
                "z = G is only available with a = 1 and T = 1",
            )),
            _ => Ok(self.z_by_quadrature(t)),
        }
    }

    /// `∫₀ᵀ k(t,s) E[z(s)] ds`, split at the kink `s = t`. Only meaningful for
    /// independent scenarios.
    pub fn z_by_quadrature(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for (lo, hi) in [(0.0, t), (t, self.horizon)] {
            if let Some(rule) = gauss_for_interval(10, 20.0, lo, hi) {
                total += rule.integrate_fn(|s| self.kernel_unchecked(t, s) * self.scenario.mean(s));
            }
        }
        total
    }

    pub(crate) fn kernel_unchecked(&self, t: f64, s: f64) -> f64 {
        match self.closed_form_drift() {
            Some(c) if c < 0.0 => kernel_minus_one(t, s),
            Some(_) => kernel_plus_one(t, s),
            None => self.kernel_by_quadrature(t, s),
        }
    }

    /// `J[E z] = ½ ∫₀ᵀ ∫₀ᵗ ∫₀ᵗ e^{2A(t)-A(s)-A(τ)+t-max(s,τ)} Cov(z(s),z(τ)) ds dτ dt`,
    /// the optimal cost when `z` is independent of the noise.
    pub fn analytic_quadratic_cost_independent<C>(&self, cov: C) -> Result<f64>
    where
        C: Fn(f64, f64) -> f64,
    {
        if !self.scenario.is_independent() {
            return Err(Error::Unsupported(
                "the closed cost formula needs z independent of the noise",
            ));
        }
        let a = &self.drift;
        let big_a = |x: f64| a.antiderivative(x);
        let outer = gauss_for_interval(10, 4.0, 0.0, self.horizon)
            .ok_or(Error::InvalidConfig("empty horizon"))?;
        let mut total = 0.0;
        for (&t, &wt) in outer.nodes().iter().zip(outer.weights()) {
            let at = big_a(t);
            let Some(middle) = gauss_for_interval(10, 4.0, 0.0, t) else {
                continue;
            };
            let mut inner_sum = 0.0;
            for (&x, &wx) in middle.nodes().iter().zip(middle.weights()) {
                let ax = big_a(x);
                let Some(inner) = gauss_for_interval(10, 4.0, 0.0, x) else {
                    continue;
                };
                // y < x on this triangle, so max(y, x) = x; both orderings of
                // (s, τ) are covered by evaluating cov(y, x) and cov(x, y).
                let v = inner.integrate_fn(|y| {
                    (2.0 * at - ax - big_a(y) + t - x).exp() * (cov(y, x) + cov(x, y))
                });
                inner_sum += wx * v;
            }
            total += wt * inner_sum;
        }
        let value = 0.5 * total;
        if !value.is_finite() {
            return Err(Error::NonFinite("covariance integral"));
        }
        Ok(value)
    }
}

/// `k(t,s;-1) = e^{-|t-s|} - e^{-1+min(t,s)}` on `[0,1]`.
pub fn kernel_minus_one(t: f64, s: f64) -> f64 {
    // = -e^{min-max} (e^{max-1} - 1), which vanishes exactly at max = 1
    let (lo, hi) = (t.min(s), t.max(s));
    -(lo - hi).exp() * (hi - 1.0).exp_m1()
}

/// `k(t,s;1) = (e^{3-min-2max} - e^{|t-s|}) / 3` on `[0,1]`.
pub fn kernel_plus_one(t: f64, s: f64) -> f64 {
    // = e^{max-min} (e^{3(1-max)} - 1) / 3
    let (lo, hi) = (t.min(s), t.max(s));
    (hi - lo).exp() * (3.0 * (1.0 - hi)).exp_m1() / 3.0
}

/// `Z` for the independent GBM with `a ≡ -1`, `T = 1`.
pub fn z_independent_minus_one(t: f64) -> f64 {
    (-1.0 - t).exp()
        * (-E + t.exp() - 3.0 * (2.0 * t).exp() + 2.0 * (1.0 + t).exp() + (2.0 * t).exp() * t)
}

/// `Z` for `z = G` with `a ≡ 1`, `T = 1`.
pub fn z_dependent_plus_one(t: f64) -> f64 {
    (3.0 - 2.0 * t.exp() + (2.0 - 2.0 * t).exp() * (2.0 * E - 3.0)) / 6.0
}

/// `∫₀¹ k(t,s;1) ds` in closed form; compare with [`z_dependent_plus_one`] to
/// see that `u ≡ E[z] ≡ 1` does not solve the first-kind equation when `z = G`.
pub fn constant_drift_row_integral(t: f64) -> Result<f64> {
    Error::check_range("t", t, 0.0, 1.0)?;
    Ok(-(-3.0 * t).exp()
        * (E.powi(3) - 4.0 * (3.0 * t).exp() + 2.0 * (4.0 * t).exp() - 2.0 * (3.0 + t).exp()
            + 3.0 * (1.0 + 2.0 * t).exp())
        / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_vanishes_at_horizon() {
        let p = KernelProblem::example_independent();
        for s in [0.0, 0.3, 0.99, 1.0] {
            assert_eq!(p.eval_kernel(1.0, s).unwrap(), 0.0);
        }
        let p = KernelProblem::example_dependent();
        for s in [0.0, 0.3, 0.99, 1.0] {
            assert_eq!(p.eval_kernel(1.0, s).unwrap(), 0.0);
        }
    }

    #[test]
    fn kernel_known_value() {
        let p = KernelProblem::example_independent();
        let v = p.eval_kernel(0.5, 0.2).unwrap();
        let expect = (-0.3f64).exp() - (-0.8f64).exp();
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.291489).abs() < 1e-6);
    }

    #[test]
    fn kernel_rejects_out_of_range() {
        let p = KernelProblem::example_independent();
        assert!(p.eval_kernel(1.2, 0.1).is_err());
        assert!(p.eval_kernel(0.1, -0.1).is_err());
        assert!(p.eval_z(1.5).is_err());
    }

    #[test]
    fn z_boundary_and_origin() {
        let p = KernelProblem::example_independent();
        assert_eq!(p.eval_z(1.0).unwrap(), 0.0);
        assert!((p.eval_z(0.0).unwrap() - (1.0 - 2.0 / E)).abs() < 1e-14);
        let d = KernelProblem::example_dependent();
        assert!(d.eval_z(1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn dependent_scenario_needs_plus_one_drift() {
        let p = KernelProblem::new(DriftCoefficient::constant(0.5), 1.0, Scenario::DependentGbm)
            .unwrap();
        assert!(matches!(p.eval_z(0.2), Err(Error::Unsupported(_))));
        assert!(p.analytic_quadratic_cost_independent(|_, _| 0.0).is_err());
    }

    #[test]
    fn row_integral_boundary() {
        assert!(constant_drift_row_integral(1.0).unwrap().abs() < 1e-13);
        assert!(constant_drift_row_integral(1.1).is_err());
    }

    #[test]
    fn zero_covariance_gives_zero_cost() {
        let p = KernelProblem::example_independent();
        assert_eq!(
            p.analytic_quadratic_cost_independent(|_, _| 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn custom_mean_must_be_finite() {
        let s = Scenario::CustomIndependent {
            mean: Arc::new(|_| f64::NAN),
            covariance: None,
        };
        assert!(KernelProblem::new(DriftCoefficient::constant(0.0), 1.0, s).is_err());
    }
}
