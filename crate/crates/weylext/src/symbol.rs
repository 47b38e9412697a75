//! Closed-form phase-space symbols `a(z)`, `z = (x; ξ) ∈ R^{2m}`.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symplectic::SymplecticMatrix;

/// A symbol that can be evaluated at any phase-space point.
pub trait PhaseFunction: Send + Sync {
    /// `2m` for a symbol on `R^{2m}`.
    fn phase_dim(&self) -> usize;

    fn eval(&self, z: &[f64]) -> C64;

    /// Unit directions along which the symbol is known to vanish identically.
    fn null_directions(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }

    fn describe(&self) -> String;
}

pub type SharedSymbol = Arc<dyn PhaseFunction>;

/// `a(z) = ½ Mz·z + v·z + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSymbol {
    pub m: Mat<f64>,
    pub v: Vec<f64>,
    pub c: f64,
}

impl QuadraticSymbol {
    pub fn new(m: Mat<f64>, v: Vec<f64>, c: f64) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d || v.len() != d || d % 2 != 0 {
            return Err(Error::Shape(format!("quadratic symbol needs an even square M and matching v, got {}x{} and {}", d, m.ncols(), v.len())));
        }
        if (&m - m.transpose()).as_ref().norm_max() > 1e-12 {
            return Err(Error::InvalidForm("M must be symmetric".into()));
        }
        Ok(Self { m, v, c })
    }

    pub fn zero(half_dim: usize) -> Self {
        Self { m: Mat::zeros(2 * half_dim, 2 * half_dim), v: vec![0.0; 2 * half_dim], c: 0.0 }
    }

    /// `ξ² + x²` summed over `half_dim` degrees of freedom.
    pub fn oscillator(half_dim: usize) -> Self {
        Self { m: Mat::<f64>::identity(2 * half_dim, 2 * half_dim) * 2.0, v: vec![0.0; 2 * half_dim], c: 0.0 }
    }

    /// Linear symbol `z_index`.
    pub fn coordinate(half_dim: usize, index: usize) -> Self {
        let mut s = Self::zero(half_dim);
        s.v[index] = 1.0;
        s
    }

    pub fn half_dim(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn degree(&self) -> usize {
        if self.m.as_ref().norm_max() > 0.0 {
            2
        } else if self.v.iter().any(|&x| x != 0.0) {
            1
        } else {
            0
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self { c: self.c + c, ..self.clone() }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { m: &self.m * k, v: self.v.iter().map(|x| x * k).collect(), c: self.c * k }
    }

    /// `a ∘ s`: `½ (sᵀMs)z·z + (sᵀv)·z + c`.
    pub fn compose(&self, s: &SymplecticMatrix) -> Result<Self> {
        if s.matrix().nrows() != self.m.nrows() {
            return Err(Error::Dimension("symbol and symplectic matrix sizes differ".into()));
        }
        let sm = s.matrix();
        let m = sm.transpose() * &self.m * sm;
        let d = self.m.nrows();
        let v = (0..d).map(|j| (0..d).map(|i| sm[(i, j)] * self.v[i]).sum()).collect();
        let m = Mat::from_fn(d, d, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        Self::new(m, v, self.c)
    }
}

impl PhaseFunction for QuadraticSymbol {
    fn phase_dim(&self) -> usize {
        self.m.nrows()
    }

    fn eval(&self, z: &[f64]) -> C64 {
        let d = self.m.nrows();
        let mut s = self.c;
        for i in 0..d {
            s += self.v[i] * z[i];
            for j in 0..d {
                s += 0.5 * self.m[(i, j)] * z[i] * z[j];
            }
        }
        C64::new(s, 0.0)
    }

    /// Null space of `M` when the symbol is a pure quadratic form.
    fn null_directions(&self) -> Vec<Vec<f64>> {
        if self.c != 0.0 || self.v.iter().any(|&x| x != 0.0) {
            return Vec::new();
        }
        let scale = self.m.as_ref().norm_max();
        if scale == 0.0 {
            return Vec::new();
        }
        let Ok(evd) = self.m.self_adjoint_eigen(Side::Lower) else {
            return Vec::new();
        };
        let vals = evd.S().column_vector();
        let u = evd.U();
        (0..vals.nrows())
            .filter(|&k| vals[k].abs() <= 1e-12 * scale)
            .map(|k| (0..u.nrows()).map(|i| u[(i, k)]).collect())
            .collect()
    }

    fn describe(&self) -> String {
        format!("quadratic symbol on R^{}", self.m.nrows())
    }
}

/// `amp · exp(-Σ_a w_a (z_a - c_a)²)` with separable weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSymbol {
    pub center: Vec<f64>,
    pub weights: Vec<f64>,
    pub amplitude: f64,
}

impl GaussianSymbol {
    pub fn new(center: Vec<f64>, weights: Vec<f64>, amplitude: f64) -> Result<Self> {
        if center.len() != weights.len() || center.len() % 2 != 0 || center.is_empty() {
            return Err(Error::Shape("Gaussian center and weights need one even length".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Argument("Gaussian weights must be positive".into()));
        }
        Ok(Self { center, weights, amplitude })
    }

    /// `exp(-|z|²)` on `R^{2m}`.
    pub fn standard(half_dim: usize) -> Self {
        Self { center: vec![0.0; 2 * half_dim], weights: vec![1.0; 2 * half_dim], amplitude: 1.0 }
    }
}

impl PhaseFunction for GaussianSymbol {
    fn phase_dim(&self) -> usize {
        self.center.len()
    }

    fn eval(&self, z: &[f64]) -> C64 {
        let e: f64 = self.center.iter().zip(&self.weights).zip(z).map(|((c, w), x)| w * (x - c) * (x - c)).sum();
        C64::new(self.amplitude * (-e).exp(), 0.0)
    }

    fn describe(&self) -> String {
        format!("Gaussian symbol on R^{}", self.center.len())
    }
}

/// Constant symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSymbol {
    pub phase_dim: usize,
    pub value: C64,
}

impl PhaseFunction for ConstantSymbol {
    fn phase_dim(&self) -> usize {
        self.phase_dim
    }

    fn eval(&self, _z: &[f64]) -> C64 {
        self.value
    }

    fn describe(&self) -> String {
        format!("constant {} on R^{}", self.value, self.phase_dim)
    }
}

/// `c · a(z)`.
#[derive(Clone)]
pub struct ScaledSymbol {
    pub factor: C64,
    pub inner: SharedSymbol,
}

impl PhaseFunction for ScaledSymbol {
    fn phase_dim(&self) -> usize {
        self.inner.phase_dim()
    }

    fn eval(&self, z: &[f64]) -> C64 {
        self.factor * self.inner.eval(z)
    }

    fn null_directions(&self) -> Vec<Vec<f64>> {
        self.inner.null_directions()
    }

    fn describe(&self) -> String {
        format!("{} * ({})", self.factor, self.inner.describe())
    }
}

/// Closure-backed symbol.
pub struct FnSymbol<F: Fn(&[f64]) -> C64 + Send + Sync> {
    pub phase_dim: usize,
    pub f: F,
    pub label: String,
}

impl<F: Fn(&[f64]) -> C64 + Send + Sync> PhaseFunction for FnSymbol<F> {
    fn phase_dim(&self) -> usize {
        self.phase_dim
    }

    fn eval(&self, z: &[f64]) -> C64 {
        (self.f)(z)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// `(a ⊗ 1_{2k}) ∘ s` for a base symbol `a` on `R^{2n}` and `s ∈ Sp(2(n+k))`.
#[derive(Clone)]
pub struct ExtendedSymbol {
    pub base: SharedSymbol,
    pub n: usize,
    pub k: usize,
    pub s: SymplecticMatrix,
}

impl ExtendedSymbol {
    /// The base symbol's argument `(x', ξ')` where `(x', y'; ξ', η') = s z`.
    pub fn base_point(&self, z: &[f64]) -> Vec<f64> {
        let w = self.s.apply(z);
        let m = self.n + self.k;
        let mut out = Vec::with_capacity(2 * self.n);
        out.extend_from_slice(&w[..self.n]);
        out.extend_from_slice(&w[m..m + self.n]);
        out
    }
}

impl PhaseFunction for ExtendedSymbol {
    fn phase_dim(&self) -> usize {
        2 * (self.n + self.k)
    }

    fn eval(&self, z: &[f64]) -> C64 {
        self.base.eval(&self.base_point(z))
    }

    /// `s⁻¹` applied to the `(y, η)` directions (where `a ⊗ 1` is constant) and to
    /// the base symbol's own null directions.
    fn null_directions(&self) -> Vec<Vec<f64>> {
        if self.base.eval(&vec![0.0; 2 * self.n]).norm() != 0.0 {
            return Vec::new();
        }
        let m = self.n + self.k;
        let inv = self.s.inverse();
        let mut out = Vec::new();
        for i in 0..self.k {
            for slot in [self.n + i, m + self.n + i] {
                let mut e = vec![0.0; 2 * m];
                e[slot] = 1.0;
                out.push(normalize(inv.apply(&e)));
            }
        }
        for d in self.base.null_directions() {
            let mut e = vec![0.0; 2 * m];
            e[..self.n].copy_from_slice(&d[..self.n]);
            e[m..m + self.n].copy_from_slice(&d[self.n..]);
            out.push(normalize(inv.apply(&e)));
        }
        out
    }

    fn describe(&self) -> String {
        format!("extension of ({}) by k = {}", self.base.describe(), self.k)
    }
}

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}
