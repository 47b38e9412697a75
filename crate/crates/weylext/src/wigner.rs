//! Cross-Wigner transforms, Moyal products and Bopp operators.

use faer::Mat;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Grid, StateVector};
use crate::hermite::HermiteSeries;
use crate::linalg::OperatorMatrix;
use crate::symbol::{PhaseFunction, QuadraticSymbol, SharedSymbol};
use crate::weyl::{dequantize, quantize, quantize_quadratic, SampledSymbol};

/// `W(ψ, φ)(x, ξ) = (2π)^{-d} Σ_y e^{-iξy} ψ(x + y/2) conj φ(x - y/2) Δ^d` on the phase grid.
pub fn cross_wigner(psi: &StateVector, phi: &StateVector) -> Result<SampledSymbol> {
    psi.grid.check_same(&phi.grid)?;
    let grid = &psi.grid;
    let n = grid.len();
    let w = grid.cell_volume();
    let outer = Mat::from_fn(n, n, |i, j| psi.values[i] * phi.values[j].conj() * w);
    let m = OperatorMatrix::square(grid.clone(), outer)?;
    let d = grid.dim() as i32;
    Ok(dequantize(&m)?.scaled(C64::new((2.0 * PI).powi(-d), 0.0)))
}

/// Step and half-range of the trapezoidal rule used by [`cross_wigner_point`].
pub const POINT_QUAD_STEP: f64 = 0.025;
pub const POINT_QUAD_RANGE: f64 = 16.0;

/// Precomputed samples of `f` for repeated point evaluations of `W(f, g)`.
#[derive(Debug, Clone)]
pub struct PointWigner {
    nodes: Vec<f64>,
    f_vals: Vec<C64>,
    g: HermiteSeries,
}

impl PointWigner {
    pub fn new(f: &HermiteSeries, g: &HermiteSeries) -> Self {
        let m = (2.0 * POINT_QUAD_RANGE / POINT_QUAD_STEP).round() as usize;
        let nodes: Vec<f64> = (0..=m).map(|i| -POINT_QUAD_RANGE + i as f64 * POINT_QUAD_STEP).collect();
        let f_vals = nodes.iter().map(|&u| f.eval(u)).collect();
        Self { nodes, f_vals, g: g.clone() }
    }

    /// `W(f, g)(x, ξ) = π^{-1} ∫ e^{-2iξ(u - x)} f(u) conj g(2x - u) du`.
    pub fn eval(&self, x: f64, xi: f64) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (u, fu) in self.nodes.iter().zip(&self.f_vals) {
            if fu.norm_sqr() == 0.0 {
                continue;
            }
            let g = self.g.eval(2.0 * x - u).conj();
            s += fu * g * C64::from_polar(1.0, -2.0 * xi * (u - x));
        }
        s * (POINT_QUAD_STEP / PI)
    }
}

/// Cross-Wigner transform of two 1D Hermite series at an arbitrary phase-space point.
pub fn cross_wigner_point(f: &HermiteSeries, g: &HermiteSeries, x: f64, xi: f64) -> C64 {
    PointWigner::new(f, g).eval(x, xi)
}

/// `a ⋆ b` by the operator route: the Weyl symbol of `Op(a) Op(b)`.
pub fn moyal_star(a: &SampledSymbol, b: &SampledSymbol) -> Result<SampledSymbol> {
    a.positions.check_same(&b.positions)?;
    dequantize(&quantize(a).compose(&quantize(b))?)
}

/// `a ⋆ b` with operator factors supplied directly (e.g. from [`quantize_quadratic`]).
pub fn moyal_star_operators(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<SampledSymbol> {
    dequantize(&a.compose(b)?)
}

/// Direct quadrature oracle on `R²`:
/// `(a ⋆ b)(z) = (4π)^{-2} ∫∫ e^{(i/2)σ(u,v)} a(z + u/2) b(z - v/2) du dv`.
///
/// `σ(u, v) = Ju·v` as elsewhere. `points` nodes per axis on `[-half_width, half_width]`.
pub fn moyal_star_quadrature(a: &dyn PhaseFunction, b: &dyn PhaseFunction, z: [f64; 2], half_width: f64, points: usize) -> Result<C64> {
    if a.phase_dim() != 2 || b.phase_dim() != 2 {
        return Err(Error::Unsupported("quadrature oracle is implemented on R² only".into()));
    }
    let h = 2.0 * half_width / points as f64;
    let nodes: Vec<f64> = (0..points).map(|i| -half_width + (i as f64 + 0.5) * h).collect();
    let mut av = Vec::with_capacity(points * points);
    let mut bv = Vec::with_capacity(points * points);
    for &u1 in &nodes {
        for &u2 in &nodes {
            av.push(((u1, u2), a.eval(&[z[0] + 0.5 * u1, z[1] + 0.5 * u2])));
            bv.push(((u1, u2), b.eval(&[z[0] - 0.5 * u1, z[1] - 0.5 * u2])));
        }
    }
    let mut s = C64::new(0.0, 0.0);
    for &((u1, u2), fa) in &av {
        if fa.norm() < 1e-300 {
            continue;
        }
        for &((v1, v2), fb) in &bv {
            // σ(u, v) = Ju·v = u₂v₁ - u₁v₂
            let sigma = u2 * v1 - u1 * v2;
            s += fa * fb * C64::from_polar(1.0, 0.5 * sigma);
        }
    }
    Ok(s * h.powi(4) / (4.0 * PI).powi(2))
}

/// `ã_B(x, y; ξ, η) = a(x - ½η, y + ½ξ)` for `a` on `R^{2n}`.
#[derive(Clone)]
pub struct BoppSymbol {
    pub base: SharedSymbol,
    pub n: usize,
}

impl BoppSymbol {
    pub fn new(base: SharedSymbol) -> Result<Self> {
        let d = base.phase_dim();
        if d == 0 || d % 2 != 0 {
            return Err(Error::Dimension("Bopp symbols need a base symbol on R^{2n}".into()));
        }
        Ok(Self { n: d / 2, base })
    }

    fn base_point(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let (x, y, xi, eta) = (&z[..n], &z[n..2 * n], &z[2 * n..3 * n], &z[3 * n..]);
        let mut p = Vec::with_capacity(2 * n);
        p.extend((0..n).map(|a| x[a] - 0.5 * eta[a]));
        p.extend((0..n).map(|a| y[a] + 0.5 * xi[a]));
        p
    }
}

impl PhaseFunction for BoppSymbol {
    fn phase_dim(&self) -> usize {
        4 * self.n
    }

    fn eval(&self, z: &[f64]) -> C64 {
        self.base.eval(&self.base_point(z))
    }

    fn describe(&self) -> String {
        format!("Bopp symbol of ({})", self.base.describe())
    }
}

/// The linear map `R: (x, y; ξ, η) ↦ (x - ½η, y + ½ξ)` as a `2n × 4n` matrix.
fn bopp_reparam(n: usize) -> Mat<f64> {
    Mat::from_fn(2 * n, 4 * n, |i, j| {
        if i < n {
            if j == i {
                1.0
            } else if j == 3 * n + i {
                -0.5
            } else {
                0.0
            }
        } else if j == i {
            // y slot: row n + a, column n + a
            1.0
        } else if j == 2 * n + (i - n) {
            0.5
        } else {
            0.0
        }
    })
}

/// Exact quadratic form of the Bopp symbol of `q`.
pub fn bopp_quadratic(q: &QuadraticSymbol) -> Result<QuadraticSymbol> {
    let n = q.half_dim();
    let r = bopp_reparam(n);
    let m = r.transpose() * &q.m * &r;
    let v = (0..4 * n).map(|j| (0..2 * n).map(|i| r[(i, j)] * q.v[i]).sum()).collect();
    let d = 4 * n;
    QuadraticSymbol::new(Mat::from_fn(d, d, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])), v, q.c)
}

/// `Op(ã_B)` on a `2n`-axis grid, sampled route.
pub fn bopp_operator(a: SharedSymbol, grid: &Grid) -> Result<OperatorMatrix> {
    let b = BoppSymbol::new(a)?;
    if grid.dim() != 2 * b.n {
        return Err(Error::Dimension(format!("Bopp operator for n = {} needs a {}-axis grid", b.n, 2 * b.n)));
    }
    Ok(quantize(&SampledSymbol::sample(grid, &b)?))
}

/// `Op(ã_B)` for a quadratic base symbol, exact route.
pub fn bopp_operator_quadratic(q: &QuadraticSymbol, grid: &Grid) -> Result<OperatorMatrix> {
    quantize_quadratic(&bopp_quadratic(q)?, grid)
}
