//! Geometric Brownian motion, the pathwise solution map and the Euler scheme
//! for the gap process.
//!
//! All paths live on the equispaced grid `t_i = i·T/(6N)`, `i = 0..=6N`,
//! shared with the composite Newton–Cotes rule with `N` panels.
//!
//! Normal variates come from ChaCha8 keyed by the 64-bit seed (expanded with
//! `SeedableRng::seed_from_u64`), with the ChaCha stream selector set to the
//! per-trajectory stream id, and are mapped to `N(0,1)` by the ziggurat
//! sampler of `rand_distr::StandardNormal`. A `(seed, stream_id)` pair
//! therefore always reproduces the same draws regardless of which thread
//! consumes it or in which order.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::quadrature::{gauss_for_interval, QuadratureRule, NODES_PER_PANEL};
use crate::{Error, Result};

type CoefficientFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum DriftKind {
    Constant(f64),
    Custom(CoefficientFn),
}

/// The deterministic coefficient `a(t)` of the linear drift, with its
/// antiderivative `A(t) = ∫₀ᵗ a`.
#[derive(Clone)]
pub struct DriftCoefficient {
    kind: DriftKind,
    bound: f64,
}

impl fmt::Debug for DriftCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DriftKind::Constant(c) => write!(f, "DriftCoefficient::Constant({c})"),
            DriftKind::Custom(_) => write!(f, "DriftCoefficient::Custom(bound = {})", self.bound),
        }
    }
}

impl DriftCoefficient {
    /// `a ≡ c`, so `A(t) = c·t` exactly.
    pub fn constant(c: f64) -> Self {
        DriftCoefficient {
            kind: DriftKind::Constant(c),
            bound: c.abs(),
        }
    }

    /// A bounded measurable coefficient. `A` is obtained by Gauss quadrature,
    /// so jumps in `a` cost accuracy but are allowed.
    pub fn from_fn<F>(a: F, bound: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::InvalidConfig(
                "drift bound must be finite and nonnegative",
            ));
        }
        Ok(DriftCoefficient {
            kind: DriftKind::Custom(Arc::new(a)),
            bound,
        })
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.kind {
            DriftKind::Constant(c) => Some(c),
            DriftKind::Custom(_) => None,
        }
    }

    /// Essential bound `M ≥ |a|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            DriftKind::Constant(c) => *c,
            DriftKind::Custom(a) => a(t),
        }
    }

    pub fn antiderivative(&self, t: f64) -> f64 {
        match &self.kind {
            DriftKind::Constant(c) => c * t,
            DriftKind::Custom(a) => match gauss_for_interval(5, 10.0, 0.0, t) {
                Some(rule) => rule.integrate_fn(|s| a(s)),
                None => 0.0,
            },
        }
    }

    /// Checks `|a| ≤ M` at the given points.
    pub fn check_bound_on(&self, points: &[f64]) -> Result<()> {
        for &t in points {
            let v = self.value(t);
            if !v.is_finite() {
                return Err(Error::NonFinite("drift coefficient"));
            }
            if v.abs() > self.bound * (1.0 + 1e-12) {
                return Err(Error::InvalidConfig(
                    "drift coefficient exceeds its declared bound",
                ));
            }
        }
        Ok(())
    }
}

/// Values of a process on the `6N + 1` node grid of `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSkeleton {
    horizon: f64,
    panels: usize,
    values: Vec<f64>,
}

impl PathSkeleton {
    pub fn new(panels: usize, horizon: f64, values: Vec<f64>) -> Result<Self> {
        if panels == 0 || !(horizon > 0.0) {
            return Err(Error::InvalidConfig("skeleton needs N >= 1 and T > 0"));
        }
        let expected = NODES_PER_PANEL * panels + 1;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("skeleton value"));
        }
        Ok(PathSkeleton {
            horizon,
            panels,
            values,
        })
    }

    /// A deterministic function sampled on the grid.
    pub fn from_fn<F: FnMut(f64) -> f64>(panels: usize, horizon: f64, mut f: F) -> Result<Self> {
        let n = NODES_PER_PANEL * panels;
        let values = (0..=n).map(|i| f(horizon * i as f64 / n as f64)).collect();
        Self::new(panels, horizon, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.horizon / (NODES_PER_PANEL * self.panels) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.horizon * i as f64 / (NODES_PER_PANEL * self.panels) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.time(i)).collect()
    }

    fn same_grid(&self, other: &PathSkeleton) -> bool {
        self.panels == other.panels && self.horizon == other.horizon
    }

    fn matches_rule(&self, rule: &QuadratureRule) -> bool {
        rule.panels() == self.panels
            && rule.len() == self.values.len()
            && rule.start() == 0.0
            && rule.end() == self.horizon
    }
}

/// Identifies one reproducible stream of normal variates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl NoiseSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        NoiseSpec { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// The first `count` standard normal draws of this stream.
    pub fn normals(&self, count: usize) -> Vec<f64> {
        let mut rng = self.rng();
        let mut out = Vec::with_capacity(count);
        fill_normals(&mut rng, count, &mut out);
        out
    }
}

pub(crate) fn fill_normals(rng: &mut ChaCha8Rng, count: usize, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..count).map(|_| -> f64 { StandardNormal.sample(rng) }));
}

/// `E[G(t)^q] = exp(q(q-1)t/2)` for `G(t) = exp(W(t) - t/2)`.
pub fn gbm_moment(q: f64, t: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::OutOfRange {
            name: "q",
            value: q,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if !(t >= 0.0) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok((q * (q - 1.0) * t / 2.0).exp())
}

/// A GBM skeleton together with the Brownian increments that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct GbmPath {
    pub path: PathSkeleton,
    /// `W(t_i) - W(t_{i-1})` for `i = 1..=6N`.
    pub increments: Vec<f64>,
}

/// Exact lognormal recursion `G_0 = 1`, `G_i = G_{i-1} exp(ζ_i √h - h/2)`.
pub fn simulate_gbm_skeleton(panels: usize, horizon: f64, noise: NoiseSpec) -> Result<GbmPath> {
    if panels == 0 {
        return Err(Error::InvalidConfig("GBM skeleton needs N >= 1"));
    }
    let normals = noise.normals(NODES_PER_PANEL * panels);
    gbm_from_normals(panels, horizon, &normals)
}

/// GBM skeleton driven by the given standard normals (one per step).
pub fn gbm_from_normals(panels: usize, horizon: f64, normals: &[f64]) -> Result<GbmPath> {
    let steps = NODES_PER_PANEL * panels;
    if normals.len() != steps {
        return Err(Error::LengthMismatch {
            expected: steps,
            got: normals.len(),
        });
    }
    let h = horizon / steps as f64;
    let sqrt_h = h.sqrt();
    let increments: Vec<f64> = normals.iter().map(|z| z * sqrt_h).collect();
    let mut values = Vec::with_capacity(steps + 1);
    let mut g = 1.0;
    values.push(g);
    for dw in &increments {
        g *= (dw - 0.5 * h).exp();
        values.push(g);
    }
    Ok(GbmPath {
        path: PathSkeleton::new(panels, horizon, values)?,
        increments,
    })
}

/// `X(t) = G(t) e^{A(t)} (x0 + ∫₀ᵗ e^{-A(s)} z(s) / G(s) ds)` along one path,
/// with the running integral accumulated by the trapezoidal rule.
pub fn solution_map_pathwise(
    drift: &DriftCoefficient,
    x0: f64,
    z: &PathSkeleton,
    gbm: &PathSkeleton,
    rule: &QuadratureRule,
) -> Result<PathSkeleton> {
    if !z.same_grid(gbm) {
        return Err(Error::GridMismatch("z and G skeletons differ"));
    }
    if !z.matches_rule(rule) {
        return Err(Error::GridMismatch(
            "skeleton does not match quadrature rule",
        ));
    }
    if gbm.values.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidConfig("GBM values must be strictly positive"));
    }
    let big_a: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&t| drift.antiderivative(t))
        .collect();
    let integrand: Vec<f64> = z
        .values
        .iter()
        .zip(&gbm.values)
        .zip(&big_a)
        .map(|((zv, g), a)| (-a).exp() * zv / g)
        .collect();
    let h = z.step();
    let mut running = 0.0;
    let mut out = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        if i > 0 {
            running += 0.5 * h * (integrand[i - 1] + integrand[i]);
        }
        out.push(gbm.values[i] * big_a[i].exp() * (x0 + running));
    }
    PathSkeleton::new(z.panels, z.horizon, out)
}

/// Euler–Maruyama for `dξ = [a ξ + z - u] dt + ξ dW`, `ξ(0) = 0`.
///
/// `normals[i-1]` is the draw for step `i`; pass the draws that built `z`
/// to couple the two (dependent scenario).
pub fn euler_gap_scheme(
    drift: &DriftCoefficient,
    z: &PathSkeleton,
    u: &[f64],
    normals: &[f64],
) -> Result<PathSkeleton> {
    if u.len() != z.len() {
        return Err(Error::GridMismatch(
            "control samples do not match the skeleton grid",
        ));
    }
    if normals.len() + 1 != z.len() {
        return Err(Error::GridMismatch("one normal draw per step is required"));
    }
    let a_nodes: Vec<f64> = z.times().iter().map(|&t| drift.value(t)).collect();
    let mut xi = alloc::vec![0.0; z.len()];
    euler_gap_into(&a_nodes, &z.values, u, normals, z.step(), &mut xi);
    PathSkeleton::new(z.panels, z.horizon, xi)
}

/// Fills `xi` with the Euler skeleton. Returns the first index at which
/// `|ξ|` exceeds `limit` (the remaining entries are left untouched), if any.
pub(crate) fn euler_gap_guarded(
    a_nodes: &[f64],
    z: &[f64],
    u: &[f64],
    normals: &[f64],
    h: f64,
    limit: f64,
    xi: &mut [f64],
) -> Option<usize> {
    let sqrt_h = h.sqrt();
    xi[0] = 0.0;
    for i in 1..xi.len() {
        let prev = xi[i - 1];
        let next = prev
            + (a_nodes[i - 1] * prev + z[i - 1] - u[i - 1]) * h
            + normals[i - 1] * prev * sqrt_h;
        if !(next.abs() <= limit) {
            return Some(i);
        }
        xi[i] = next;
    }
    None
}

fn euler_gap_into(a_nodes: &[f64], z: &[f64], u: &[f64], normals: &[f64], h: f64, xi: &mut [f64]) {
    euler_gap_guarded(a_nodes, z, u, normals, h, f64::INFINITY, xi);
}
