//! Uniform tensor-product grids and sampled state vectors.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One axis of a uniform grid: nodes `-L + i*Δ` for `i = 0..N`, with `Δ = 2L/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub half_width: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Argument(format!("half width must be positive, got {half_width}")));
        }
        if points == 0 || points % 2 != 0 {
            return Err(Error::Argument(format!("points per axis must be even and positive, got {points}")));
        }
        Ok(Self { half_width, points })
    }

    /// Axis with `Δ² N = area`, i.e. `Δ · (N Δ) = area`.
    ///
    /// With `area = 2π` the position lattice coincides with its own frequency
    /// lattice, which makes Fourier-type quadratic-phase kernels exactly unitary.
    pub fn from_cell_area(points: usize, area: f64) -> Result<Self> {
        if !(area.is_finite() && area > 0.0) {
            return Err(Error::Argument(format!("cell area must be positive, got {area}")));
        }
        let spacing = (area / points as f64).sqrt();
        Self::new(0.5 * points as f64 * spacing, points)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    pub fn freq_spacing(&self) -> f64 {
        2.0 * PI / (self.points as f64 * self.spacing())
    }

    /// Dual frequency `ξ_k = (k - N/2) Δξ`.
    pub fn freq(&self, k: usize) -> f64 {
        (k as f64 - 0.5 * self.points as f64) * self.freq_spacing()
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.freq(k)).collect()
    }

    /// The frequency axis seen as a grid axis in its own right.
    pub fn dual(&self) -> Axis {
        Axis { half_width: PI / self.spacing(), points: self.points }
    }
}

/// Tensor-product grid. Flat indices are row-major: the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Argument("grid needs at least one axis".into()));
        }
        for a in &axes {
            Axis::new(a.half_width, a.points)?;
        }
        Ok(Self { axes })
    }

    pub fn uniform(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        let axis = Axis::new(half_width, points)?;
        Self::new(vec![axis; dim])
    }

    pub fn line(half_width: f64, points: usize) -> Result<Self> {
        Self::uniform(1, half_width, points)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `Π Δ_a`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    pub fn dual(&self) -> Grid {
        Grid { axes: self.axes.iter().map(|a| a.dual()).collect() }
    }

    /// Concatenate axes: `self` indices become the slow part of the flat index.
    pub fn product(&self, other: &Grid) -> Grid {
        let mut axes = self.axes.clone();
        axes.extend_from_slice(&other.axes);
        Grid { axes }
    }

    /// Split off the first `d` axes.
    pub fn split(&self, d: usize) -> Result<(Grid, Grid)> {
        if d == 0 || d >= self.dim() {
            return Err(Error::Dimension(format!("cannot split a {}-axis grid at {d}", self.dim())));
        }
        Ok((Grid { axes: self.axes[..d].to_vec() }, Grid { axes: self.axes[d..].to_vec() }))
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            let n = self.axes[a].points;
            idx[a] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.points + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat).iter().zip(&self.axes).map(|(&i, a)| a.node(i)).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|f| self.point(f)).collect()
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Dimension(format!("grid mismatch: {:?} vs {:?}", self.shape(), other.shape())))
        }
    }
}

/// Complex samples of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub grid: Grid,
    pub values: Vec<C64>,
}

impl StateVector {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> C64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn from_real_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |p| C64::new(f(p), 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Degenerate("cannot normalize the zero vector".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// `self ⊗ other` on the product grid, `self` index slow.
    pub fn tensor(&self, other: &StateVector) -> Self {
        let mut values = Vec::with_capacity(self.len() * other.len());
        for a in &self.values {
            for b in &other.values {
                values.push(a * b);
            }
        }
        Self { grid: self.grid.product(&other.grid), values }
    }

    /// Largest absolute value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Discrete `(u|v) = Σ conj(v_i) u_i Δ^d`, linear in `u`.
pub fn weighted_inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    u.grid.check_same(&v.grid)?;
    let s: C64 = u.values.iter().zip(&v.values).map(|(a, b)| a * b.conj()).sum();
    Ok(s * u.grid.cell_volume())
}
