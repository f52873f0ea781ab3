//! Dense LU factorisation with partial pivoting and a 1-norm condition estimate.
//!
//! Systems here are at most a few hundred unknowns, so a plain row-major
//! `Vec<f64>` and a textbook right-looking elimination are sufficient.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Condition estimates above this are treated as numerically singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DenseMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<LuFactors> {
        LuFactors::new(self)
    }
}

/// `P A = L U` with unit lower `L` stored below the diagonal of `lu`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    norm_one: f64,
}

impl LuFactors {
    fn new(a: &DenseMatrix) -> Result<Self> {
        let n = a.n;
        if a.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot == 0.0 {
                return Err(Error::SolverFailure {
                    condition: f64::INFINITY,
                    reason: "zero pivot",
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(LuFactors {
            n,
            lu,
            perm,
            norm_one: a.norm_one(),
        })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: b.len(),
            });
        }
        // Uᵀ w = b
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for k in 0..i {
                s -= self.lu[k * n + i] * w[k];
            }
            w[i] = s / self.lu[i * n + i];
        }
        // Lᵀ v = w
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in i + 1..n {
                s -= self.lu[k * n + i] * w[k];
            }
            w[i] = s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        Ok(x)
    }

    /// Estimate of `‖A‖₁ ‖A⁻¹‖₁` (Hager's method with Higham's extra test vector).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let norm1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for iter in 0..5 {
            let Ok(y) = self.solve(&x) else {
                return f64::INFINITY;
            };
            let ny = norm1(&y);
            if !ny.is_finite() {
                return f64::INFINITY;
            }
            if iter > 0 && ny <= est {
                break;
            }
            est = ny;
            let sign: Vec<f64> = y
                .iter()
                .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            let Ok(z) = self.solve_transpose(&sign) else {
                return f64::INFINITY;
            };
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if iter > 0 && zmax <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        if let Ok(y) = self.solve(&alt) {
            let alt_est = 2.0 * norm1(&y) / (3.0 * n as f64);
            if alt_est > est {
                est = alt_est;
            }
        }
        est * self.norm_one
    }
}

/// Factorises, estimates the condition number and solves; refuses systems
/// whose estimate exceeds [`MAX_CONDITION`].
pub fn solve_checked(a: &DenseMatrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let lu = a.lu()?;
    let cond = lu.condition_estimate();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SolverFailure {
            condition: cond,
            reason: "condition estimate above 1e14",
        });
    }
    let x = lu.solve(b)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverFailure {
            condition: cond,
            reason: "non-finite solution",
        });
    }
    Ok((x, cond))
}
