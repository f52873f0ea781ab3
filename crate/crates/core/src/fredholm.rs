//! Solvers for the optimality condition.
//!
//! * Penalised, second kind: `δ u(t) + ∫₀ᵀ k(t,s) u(s) ds = Z(t)`, solved by
//!   Nyström collocation at the composite Newton–Cotes nodes.
//! * Unpenalised, first kind: `∫₀ᵀ k(t,s) u(s) ds = Z(t)`, solved by Galerkin
//!   projection onto shifted Legendre polynomials `Q_n(t) = P_n(2t/T - 1)`.
//!
//! The first-kind problem is ill-posed and its exact solution may not be a
//! function at all (for `z = G`, `a ≡ 1` it carries a point mass at `t = 0`),
//! so the polynomial truncation degree acts as the only regulariser. The
//! basis is fixed; choose `m` with the expected shape of the solution in mind.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::kernel::KernelProblem;
use crate::legendre::{legendre, legendre_all};
use crate::linalg::{solve_checked, DenseMatrix};
use crate::quadrature::QuadratureRule;
use crate::{Error, Result};

/// A deterministic drift `u` that can be evaluated on `[0, T]`.
pub trait Control {
    fn horizon(&self) -> f64;

    fn eval(&self, t: f64) -> Result<f64>;

    /// Values at the given nodes.
    fn sample(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        nodes.iter().map(|&t| self.eval(t)).collect()
    }

    /// Values at the nodes of `rule`.
    fn sample_rule(&self, rule: &QuadratureRule) -> Result<Vec<f64>> {
        self.sample(rule.nodes())
    }
}

/// `u ≡ value` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantControl {
    pub value: f64,
    pub horizon: f64,
}

impl ConstantControl {
    pub fn new(value: f64, horizon: f64) -> Self {
        ConstantControl { value, horizon }
    }
}

impl Control for ConstantControl {
    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn eval(&self, t: f64) -> Result<f64> {
        Error::check_range("t", t, 0.0, self.horizon)?;
        Ok(self.value)
    }
}

/// Any closure as a control.
pub struct FnControl<F> {
    f: F,
    horizon: f64,
}

impl<F: Fn(f64) -> f64> FnControl<F> {
    pub fn new(horizon: f64, f: F) -> Self {
        FnControl { f, horizon }
    }
}

impl<F: Fn(f64) -> f64> Control for FnControl<F> {
    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn eval(&self, t: f64) -> Result<f64> {
        Error::check_range("t", t, 0.0, self.horizon)?;
        Ok((self.f)(t))
    }
}

/// `Q_n(t) = P_n(2t - 1)` on `[0, 1]`.
pub fn shifted_legendre(n: usize, t: f64) -> Result<f64> {
    Error::check_range("t", t, 0.0, 1.0)?;
    Ok(legendre(n, 2.0 * t - 1.0))
}

/// Grid solution of the penalised equation.
#[derive(Debug, Clone)]
pub struct NystromSolution {
    rule: QuadratureRule,
    values: Vec<f64>,
    delta: f64,
    problem: KernelProblem,
    condition: f64,
}

/// Builds `(δI + K diag(w)) u = Z` on the `6N + 1` Newton–Cotes nodes and
/// solves it by LU with partial pivoting.
pub fn solve_second_kind_nystrom(
    problem: &KernelProblem,
    delta: f64,
    panels: usize,
) -> Result<NystromSolution> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidConfig(
            "penalisation constant must be positive",
        ));
    }
    let rule = QuadratureRule::composite_newton_cotes(panels, problem.horizon())?;
    let nodes = rule.nodes();
    let w = rule.weights();
    let k = problem.kernel_matrix(nodes)?;
    let mut a = DenseMatrix::from_fn(nodes.len(), |i, j| k.get(i, j) * w[j]);
    for i in 0..nodes.len() {
        a.set(i, i, a.get(i, i) + delta);
    }
    let rhs = nodes
        .iter()
        .map(|&t| problem.eval_z(t))
        .collect::<Result<Vec<_>>>()?;
    let (values, condition) = solve_checked(&a, &rhs)?;
    Ok(NystromSolution {
        rule,
        values,
        delta,
        problem: problem.clone(),
        condition,
    })
}

impl NystromSolution {
    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn problem(&self) -> &KernelProblem {
        &self.problem
    }

    /// 1-norm condition estimate of the collocation matrix.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    fn node_index(&self, t: f64) -> Option<usize> {
        let intervals = self.values.len() - 1;
        let pos = t / self.problem.horizon() * intervals as f64;
        let i = pos.round();
        if (pos - i).abs() <= 1e-12 {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Natural interpolation `(Z(t) - Σ_j w_j k(t,t_j) u_j) / δ`; at the
    /// nodes themselves the stored values are returned.
    pub fn eval(&self, t: f64) -> Result<f64> {
        Error::check_range("t", t, 0.0, self.problem.horizon())?;
        if let Some(i) = self.node_index(t) {
            return Ok(self.values[i]);
        }
        self.natural_interpolation(t)
    }

    /// The natural interpolation formula, without snapping to nodes.
    pub fn natural_interpolation(&self, t: f64) -> Result<f64> {
        let z = self.problem.eval_z(t)?;
        let integral: f64 = self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&self.values)
            .map(|((&s, w), u)| w * self.problem.kernel_unchecked(t, s) * u)
            .sum();
        Ok((z - integral) / self.delta)
    }

    /// `max_i |δ u(p_i) + ∫ k(p_i,s) u(s) ds - Z(p_i)|` with the integral taken
    /// over a composite Newton–Cotes rule with `refined_panels` panels and `u`
    /// evaluated by natural interpolation.
    pub fn residual_max(&self, points: &[f64], refined_panels: usize) -> Result<f64> {
        let fine = QuadratureRule::composite_newton_cotes(refined_panels, self.problem.horizon())?;
        let u_fine = self.sample(fine.nodes())?;
        let mut worst: f64 = 0.0;
        for &t in points {
            let u_t = self.eval(t)?;
            let integral: f64 = fine
                .nodes()
                .iter()
                .zip(fine.weights())
                .zip(&u_fine)
                .map(|((&s, w), u)| w * self.problem.kernel_unchecked(t, s) * u)
                .sum();
            let r = self.delta * u_t + integral - self.problem.eval_z(t)?;
            worst = worst.max(r.abs());
        }
        Ok(worst)
    }

    /// `∫ (∫ k(t,s) u(s) ds - Z(t))² dt` on the collocation rule: how far the
    /// grid solution is from solving the unpenalised equation.
    pub fn first_kind_defect(&self) -> Result<f64> {
        let nodes = self.rule.nodes();
        let w = self.rule.weights();
        let k = self.problem.kernel_matrix(nodes)?;
        let wu: Vec<f64> = w.iter().zip(&self.values).map(|(a, b)| a * b).collect();
        let ku = k.mul_vec(&wu);
        let sq = nodes
            .iter()
            .zip(&ku)
            .map(|(&t, v)| self.problem.eval_z(t).map(|z| (v - z) * (v - z)))
            .collect::<Result<Vec<_>>>()?;
        self.rule.integrate(&sq)
    }
}

impl Control for NystromSolution {
    fn horizon(&self) -> f64 {
        self.problem.horizon()
    }

    fn eval(&self, t: f64) -> Result<f64> {
        NystromSolution::eval(self, t)
    }

    fn sample_rule(&self, rule: &QuadratureRule) -> Result<Vec<f64>> {
        if rule.nodes() == self.rule.nodes() {
            Ok(self.values.clone())
        } else {
            self.sample(rule.nodes())
        }
    }
}

/// Coefficients of `u = Σ c_n Q_n(t/T)`.
#[derive(Debug, Clone)]
pub struct GalerkinSolution {
    coeffs: Vec<f64>,
    problem: KernelProblem,
    condition: f64,
}

/// Gauss points per panel and panels per axis for the Galerkin inner products.
pub const GALERKIN_GAUSS_POINTS: usize = 10;
pub const GALERKIN_GAUSS_PANELS: usize = 20;

/// Assembles `K_ji = ∫∫ k(τ,s) Q_j(τ) Q_i(s) dτ ds`, `z_j = ⟨Z, Q_j⟩` with
/// composite Gauss quadrature and solves `K c = z`.
pub fn solve_first_kind_galerkin(
    problem: &KernelProblem,
    degree: usize,
) -> Result<GalerkinSolution> {
    let horizon = problem.horizon();
    let rule =
        QuadratureRule::gauss_panels(GALERKIN_GAUSS_POINTS, GALERKIN_GAUSS_PANELS, 0.0, horizon)?;
    let x = rule.nodes();
    let w = rule.weights();
    let k = problem.kernel_matrix(x)?;
    let z = x
        .iter()
        .map(|&t| problem.eval_z(t))
        .collect::<Result<Vec<_>>>()?;

    // weighted basis: wq[n][p] = w_p Q_n(x_p / T)
    let size = degree + 1;
    let mut wq = alloc::vec![alloc::vec![0.0; x.len()]; size];
    for (p, (&xp, &wp)) in x.iter().zip(w).enumerate() {
        for (n, q) in legendre_all(degree, 2.0 * xp / horizon - 1.0)
            .into_iter()
            .enumerate()
        {
            wq[n][p] = wp * q;
        }
    }
    // (K · wq_i) for each basis function, then project.
    let kq: Vec<Vec<f64>> = wq.iter().map(|col| k.mul_vec(col)).collect();
    let gram = DenseMatrix::from_fn(size, |j, i| {
        wq[j].iter().zip(&kq[i]).map(|(a, b)| a * b).sum()
    });
    let rhs: Vec<f64> = wq
        .iter()
        .map(|col| col.iter().zip(&z).map(|(a, b)| a * b).sum())
        .collect();
    let (coeffs, condition) = solve_checked(&gram, &rhs)?;
    Ok(GalerkinSolution {
        coeffs,
        problem: problem.clone(),
        condition,
    })
}

impl GalerkinSolution {
    /// A solution with given coefficients, e.g. to evaluate a known expansion.
    pub fn from_coefficients(problem: &KernelProblem, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidConfig("at least one coefficient is required"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("Galerkin coefficient"));
        }
        Ok(GalerkinSolution {
            coeffs,
            problem: problem.clone(),
            condition: f64::NAN,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn problem(&self) -> &KernelProblem {
        &self.problem
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let horizon = self.problem.horizon();
        Error::check_range("t", t, 0.0, horizon)?;
        Ok(legendre_all(self.degree(), 2.0 * t / horizon - 1.0)
            .iter()
            .zip(&self.coeffs)
            .map(|(q, c)| q * c)
            .sum())
    }
}

impl Control for GalerkinSolution {
    fn horizon(&self) -> f64 {
        self.problem.horizon()
    }

    fn eval(&self, t: f64) -> Result<f64> {
        GalerkinSolution::eval(self, t)
    }
}

/// `∫₀ᵀ t^j u(t) dt` on `rule`.
pub fn moment_integral<C: Control + ?Sized>(u: &C, j: u32, rule: &QuadratureRule) -> Result<f64> {
    let values = u.sample_rule(rule)?;
    let samples: Vec<f64> = rule
        .nodes()
        .iter()
        .zip(&values)
        .map(|(t, v)| t.powi(j as i32) * v)
        .collect();
    rule.integrate(&samples)
}

/// `∫₀ᵀ |u(t)|^p dt` (the p-th power of the Lᵖ norm).
pub fn lp_norm_pth_power<C: Control + ?Sized>(u: &C, p: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidConfig("Lp exponent must exceed 1"));
    }
    let samples: Vec<f64> = u
        .sample_rule(rule)?
        .iter()
        .map(|v| v.abs().powf(p))
        .collect();
    rule.integrate(&samples)
}

/// `½ ∫₀ᵀ u(t)² dt`.
pub fn penalty_functional<C: Control + ?Sized>(u: &C, rule: &QuadratureRule) -> Result<f64> {
    let samples: Vec<f64> = u.sample_rule(rule)?.iter().map(|v| 0.5 * v * v).collect();
    rule.integrate(&samples)
}
