//! Numerical core for approximating a linear SDE with multiplicative noise
//!
//! ```text
//! dX = [a(t) X + z(t)] dt + X dW,    X(0) = X0
//! ```
//!
//! by the same equation driven by a deterministic drift `u(t)`, under the
//! quadratic cost `J[u] = E ∫ ξ_u(t)²/2 dt` where `ξ_u = X - X_u`.
//!
//! The optimality condition is a Fredholm equation with kernel `k(t,s;a)`:
//! of the second kind when the cost carries a quadratic penalty `δ‖u‖²/2`
//! (solved by Nyström collocation on a composite Newton–Cotes grid), and of
//! the first kind without it (solved by Galerkin projection on shifted
//! Legendre polynomials). Candidate drifts are then scored by Monte-Carlo
//! simulation of the gap process.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and multi-threaded trajectory loops live in the `drift-approx` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod fredholm;
pub mod kernel;
pub mod legendre;
pub mod linalg;
pub mod montecarlo;
pub mod process;
pub mod quadrature;

pub use error::{Error, Result};
pub use fredholm::{
    lp_norm_pth_power, moment_integral, penalty_functional, shifted_legendre,
    solve_first_kind_galerkin, solve_second_kind_nystrom, ConstantControl, Control,
    GalerkinSolution, NystromSolution,
};
pub use kernel::{KernelProblem, Scenario};
pub use montecarlo::{cost_sweep, estimate_quadratic_cost, CostEstimate, McConfig};
pub use process::{DriftCoefficient, NoiseSpec, PathSkeleton};
pub use quadrature::QuadratureRule;
