//! Discrete Fourier transforms on centered grids and spectral derivative matrices.
//!
//! With nodes `x_n = (n - N/2)Δ` relative to the grid center and dual frequencies
//! `ξ_k = (k - N/2)Δξ`, the phase `ξ_k x_n` is symmetric in `(k, n)`, so one
//! centered sum serves both directions.

use ndarray::{ArrayD, Axis as NdAxis};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::grid::{Axis, StateVector};

/// In place along `axis`: `v[m] <- Σ_n exp(-i·sign·2π (m - N/2)(n - N/2) / N) v[n]`.
pub fn centered_sum_axis(arr: &mut ArrayD<C64>, axis: usize, sign: i32) {
    let n = arr.shape()[axis];
    let mut planner = FftPlanner::<f64>::new();
    let fft = if sign >= 0 { planner.plan_fft_forward(n) } else { planner.plan_fft_inverse(n) };
    let half = n / 2;
    let outer = if half % 2 == 0 { 1.0 } else { -1.0 };
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for mut lane in arr.lanes_mut(NdAxis(axis)) {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = if i % 2 == 0 { lane[i] } else { -lane[i] };
        }
        fft.process(&mut buf);
        for (k, v) in lane.iter_mut().enumerate() {
            let s = if k % 2 == 0 { outer } else { -outer };
            *v = buf[k] * s;
        }
    }
}

/// Multiply the band-limited interpolant along `axis` by a shift of `frac` grid steps.
///
/// The Nyquist mode is mapped with `cos` instead of `exp` so that real data stays real.
pub fn shift_axis(arr: &mut ArrayD<C64>, axis: usize, frac: f64) {
    let n = arr.shape()[axis];
    centered_sum_axis(arr, axis, 1);
    let factors: Vec<C64> = (0..n)
        .map(|k| {
            let theta = 2.0 * PI * (k as f64 - 0.5 * n as f64) / n as f64 * frac;
            if k == 0 {
                C64::new(theta.cos(), 0.0)
            } else {
                C64::from_polar(1.0, theta)
            }
        })
        .collect();
    for mut lane in arr.lanes_mut(NdAxis(axis)) {
        for (k, v) in lane.iter_mut().enumerate() {
            *v *= factors[k];
        }
    }
    centered_sum_axis(arr, axis, -1);
    let inv = 1.0 / n as f64;
    arr.mapv_inplace(|v| v * inv);
}

/// `F(ξ_k) = Σ_n exp(-i·sign·ξ_k·x_n) f(x_n) Δ^d`, returned on the dual grid.
///
/// The `(2π)^{-d}` inversion constant is not folded in; see [`idft`].
pub fn dft(f: &StateVector, sign: i32) -> StateVector {
    let grid = &f.grid;
    let mut arr = ArrayD::from_shape_vec(grid.shape(), f.values.clone()).expect("grid shape");
    for a in 0..grid.dim() {
        centered_sum_axis(&mut arr, a, sign);
    }
    let w = grid.cell_volume();
    let values = arr.iter().map(|v| v * w).collect();
    StateVector { grid: grid.dual(), values }
}

/// Inverse of [`dft`] with `sign = +1`: `(2π)^{-d} · dft(F, -1)`.
pub fn idft(big_f: &StateVector) -> StateVector {
    let d = big_f.grid.dim() as i32;
    let out = dft(big_f, -1);
    out.scaled(C64::new((2.0 * PI).powi(-d), 0.0))
}

/// Unitary Fourier transform `(2π)^{-d/2} dft(f, +1)`.
pub fn unitary_fourier(f: &StateVector) -> StateVector {
    let d = f.grid.dim() as i32;
    dft(f, 1).scaled(C64::new((2.0 * PI).powf(-0.5 * d as f64), 0.0))
}

fn toeplitz_from_symbol(axis: &Axis, symbol: impl Fn(usize, f64) -> f64) -> Vec<C64> {
    // t[m + N - 1] = (1/N) Σ_k σ(ξ_k) exp(i ξ_k m Δ)
    let n = axis.points;
    let dx = axis.spacing();
    let freqs = axis.freqs();
    (0..2 * n - 1)
        .map(|idx| {
            let m = idx as f64 - (n as f64 - 1.0);
            let s: C64 = freqs
                .iter()
                .enumerate()
                .map(|(k, &xi)| C64::from_polar(symbol(k, xi), xi * m * dx))
                .sum();
            s / n as f64
        })
        .collect()
}

fn toeplitz_matrix(n: usize, t: &[C64]) -> faer::Mat<C64> {
    faer::Mat::from_fn(n, n, |i, j| t[i + n - 1 - j])
}

/// Spectral `-i d/dx`: diagonal `ξ` in the Fourier basis with the Nyquist mode removed.
pub fn momentum_matrix(axis: &Axis) -> faer::Mat<C64> {
    let t = toeplitz_from_symbol(axis, |k, xi| if k == 0 { 0.0 } else { xi });
    toeplitz_matrix(axis.points, &t)
}

/// Spectral `-d²/dx²`: diagonal `ξ²` in the Fourier basis, Nyquist mode kept.
pub fn kinetic_matrix(axis: &Axis) -> faer::Mat<C64> {
    let t = toeplitz_from_symbol(axis, |_, xi| xi * xi);
    toeplitz_matrix(axis.points, &t)
}

/// Position multiplication on one axis.
pub fn position_matrix(axis: &Axis) -> faer::Mat<C64> {
    let nodes = axis.nodes();
    faer::Mat::from_fn(axis.points, axis.points, |i, j| if i == j { C64::new(nodes[i], 0.0) } else { C64::new(0.0, 0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn centered_sum_matches_direct() {
        let n = 8;
        let data: Vec<C64> = (0..n).map(|i| C64::new(i as f64 * 0.3 - 1.0, (i * i) as f64 * 0.1)).collect();
        let mut arr = ArrayD::from_shape_vec(vec![n], data.clone()).unwrap();
        centered_sum_axis(&mut arr, 0, 1);
        for m in 0..n {
            let direct: C64 = (0..n)
                .map(|k| {
                    let ph = -2.0 * PI * (m as f64 - 4.0) * (k as f64 - 4.0) / n as f64;
                    data[k] * C64::from_polar(1.0, ph)
                })
                .sum();
            assert!((direct - arr[[m]]).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let g = Grid::line(8.0, 64).unwrap();
        let f = StateVector::zeros(&g);
        assert!(dft(&f, 1).max_abs() == 0.0);
    }

    #[test]
    fn half_shifts_compose_to_identity() {
        let n = 16;
        let data: Vec<C64> = (0..n).map(|i| C64::new((-(i as f64 - 8.0).powi(2) / 4.0).exp(), 0.0)).collect();
        let mut arr = ArrayD::from_shape_vec(vec![n], data.clone()).unwrap();
        shift_axis(&mut arr, 0, 0.5);
        assert!(arr.iter().all(|v| v.im.abs() < 1e-14));
        shift_axis(&mut arr, 0, -0.5);
        for (a, b) in arr.iter().zip(&data) {
            assert!((a - b).norm() < 1e-3);
        }
    }

    #[test]
    fn momentum_is_hermitian_and_odd() {
        let axis = Axis::new(8.0, 32).unwrap();
        let p = momentum_matrix(&axis);
        for i in 0..32 {
            for j in 0..32 {
                assert!((p[(i, j)] - p[(j, i)].conj()).norm() < 1e-13);
            }
            assert!(p[(i, i)].norm() < 1e-13);
        }
    }
}
