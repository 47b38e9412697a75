//! Normalized Hermite functions, the reference eigenbasis of `ξ² + x²`.

use faer::Mat;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Grid, StateVector};

/// Largest tolerated `|h_{n_max}(±L)|` before the grid is declared too small.
pub const TAIL_TOL: f64 = 1e-5;

/// `[h_0(x), ..., h_{n_max}(x)]` by the stable three-term recurrence.
pub fn hermite_values(n_max: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n_max + 1);
    h.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max >= 1 {
        h.push(2f64.sqrt() * x * h[0]);
    }
    for j in 1..n_max {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * h[j] - (jf / (jf + 1.0)).sqrt() * h[j - 1];
        h.push(next);
    }
    h
}

pub fn hermite(j: usize, x: f64) -> f64 {
    hermite_values(j, x)[j]
}

/// Sampled `h_0..=h_{n_max}` on a 1D grid.
pub fn hermite_oracle(n_max: usize, grid: &Grid) -> Result<Vec<StateVector>> {
    if grid.dim() != 1 {
        return Err(Error::Dimension(format!("Hermite functions need a 1D grid, got {}D", grid.dim())));
    }
    let axis = grid.axis(0);
    let edge = hermite(n_max, axis.half_width).abs();
    if edge > TAIL_TOL {
        return Err(Error::Domain(format!(
            "|h_{n_max}(L)| = {edge:.2e} exceeds {TAIL_TOL:.0e} at L = {}",
            axis.half_width
        )));
    }
    let table: Vec<Vec<f64>> = axis.nodes().iter().map(|&x| hermite_values(n_max, x)).collect();
    Ok((0..=n_max)
        .map(|j| StateVector {
            grid: grid.clone(),
            values: table.iter().map(|row| C64::new(row[j], 0.0)).collect(),
        })
        .collect())
}

/// `h_j ⊗ h_l` for all `j, l ≤ n_max` on a 2D grid, ordered `(j, l)` lexicographically.
pub fn hermite_products(n_max: usize, grid: &Grid) -> Result<Vec<(usize, usize, StateVector)>> {
    let (gx, gy) = grid.split(1)?;
    let hx = hermite_oracle(n_max, &gx)?;
    let hy = if gy == gx { hx.clone() } else { hermite_oracle(n_max, &gy)? };
    let mut out = Vec::new();
    for (j, a) in hx.iter().enumerate() {
        for (l, b) in hy.iter().enumerate() {
            out.push((j, l, a.tensor(b)));
        }
    }
    Ok(out)
}

/// Ladder matrices `(X, P)` in the Hermite basis of size `n`.
pub fn ladder_xp(n: usize) -> (Mat<C64>, Mat<C64>) {
    let mut x = Mat::zeros(n, n);
    let mut p = Mat::zeros(n, n);
    for j in 1..n {
        let s = (j as f64 / 2.0).sqrt();
        x[(j - 1, j)] = C64::new(s, 0.0);
        x[(j, j - 1)] = C64::new(s, 0.0);
        p[(j - 1, j)] = C64::new(0.0, -s);
        p[(j, j - 1)] = C64::new(0.0, s);
    }
    (x, p)
}

/// `X² + P²` from the ladder algebra, truncated to `n × n` after forming the squares
/// one size larger so the last diagonal entry is exact.
pub fn oscillator_in_hermite_basis(n: usize) -> Mat<C64> {
    let (x, p) = ladder_xp(n + 1);
    let h = &x * &x + &p * &p;
    Mat::from_fn(n, n, |i, j| h[(i, j)])
}

/// Finite Hermite expansion `Σ c_j h_j`, evaluable anywhere along with its unitary Fourier transform.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSeries {
    pub coeffs: Vec<C64>,
}

impl HermiteSeries {
    pub fn basis(j: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); j + 1];
        coeffs[j] = C64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn eval(&self, x: f64) -> C64 {
        if self.coeffs.is_empty() {
            return C64::new(0.0, 0.0);
        }
        let h = hermite_values(self.coeffs.len() - 1, x);
        self.coeffs.iter().zip(&h).map(|(c, v)| c * v).sum()
    }

    /// `ĥ_j = (-i)^j h_j` for `f̂(ξ) = (2π)^{-1/2} ∫ e^{-iξx} f(x) dx`.
    pub fn fourier(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(j, c)| c * C64::new(0.0, -1.0).powu(j as u32)).collect();
        Self { coeffs }
    }

    pub fn conj(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn scaled(&self, a: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|j| *self.coeffs.get(j).unwrap_or(&zero) + *other.coeffs.get(j).unwrap_or(&zero))
            .collect();
        Self { coeffs }
    }

    pub fn sample(&self, grid: &Grid) -> Result<StateVector> {
        if grid.dim() != 1 {
            return Err(Error::Dimension("Hermite series live on a 1D grid".into()));
        }
        Ok(StateVector::from_fn(grid, |p| self.eval(p[0])))
    }
}
