//! Weyl symbol ↔ kernel ↔ operator matrix conversions.
//!
//! The grid operator of a sampled symbol is
//! `M[i,j] = N^{-d} Σ_k exp(iξ_k·(x_i - x_j)) a((x_i + x_j)/2, ξ_k)`.
//! Midpoints that fall between nodes are reached by band-limited half-step
//! shifts of `a` along the position axes. Entries with `|i_a - j_a| > N/2` on
//! any axis are left at zero: their periodic difference index would alias.

use faer::Mat;
use ndarray::ArrayD;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier::{centered_sum_axis, kinetic_matrix, momentum_matrix, position_matrix, shift_axis};
use crate::grid::Grid;
use crate::linalg::OperatorMatrix;
use crate::symbol::{PhaseFunction, QuadraticSymbol};

/// Symbol samples on `positions × dual(positions)`, position indices slow.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSymbol {
    pub positions: Grid,
    pub values: Vec<C64>,
}

impl SampledSymbol {
    pub fn new(positions: Grid, values: Vec<C64>) -> Result<Self> {
        let n = positions.len();
        if values.len() != n * n {
            return Err(Error::Shape(format!("{} symbol samples for a {}-node phase grid", values.len(), n * n)));
        }
        Ok(Self { positions, values })
    }

    pub fn phase_grid(&self) -> Grid {
        self.positions.product(&self.positions.dual())
    }

    pub fn sample(positions: &Grid, a: &dyn PhaseFunction) -> Result<Self> {
        if a.phase_dim() != 2 * positions.dim() {
            return Err(Error::Dimension(format!(
                "symbol on R^{} sampled over a {}-axis position grid",
                a.phase_dim(),
                positions.dim()
            )));
        }
        let phase = positions.product(&positions.dual());
        let values = (0..phase.len()).map(|f| a.eval(&phase.point(f))).collect();
        Ok(Self { positions: positions.clone(), values })
    }

    pub fn constant(positions: &Grid, c: C64) -> Self {
        let n = positions.len();
        Self { positions: positions.clone(), values: vec![c; n * n] }
    }

    pub fn conj(&self) -> Self {
        Self { positions: self.positions.clone(), values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { positions: self.positions.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.positions.check_same(&other.positions)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { positions: self.positions.clone(), values })
    }

    /// `(Σ |a|² ΔxΔξ)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let w = self.phase_grid().cell_volume();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `Σ a ΔxΔξ` over the phase grid.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.phase_grid().cell_volume()
    }

    /// `Σ_z a(z) b(z) ΔxΔξ`.
    pub fn pair(&self, other: &Self) -> Result<C64> {
        self.positions.check_same(&other.positions)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<C64>() * self.phase_grid().cell_volume())
    }

    /// Value at position node `i` and frequency node `k` (flat indices).
    pub fn at(&self, i: usize, k: usize) -> C64 {
        self.values[i * self.positions.len() + k]
    }

    fn array(&self) -> ArrayD<C64> {
        let mut shape = self.positions.shape();
        shape.extend(self.positions.shape());
        ArrayD::from_shape_vec(shape, self.values.clone()).expect("phase grid shape")
    }
}

fn parities(d: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..1usize << d).map(move |p| (0..d).map(|a| (p >> a) & 1).collect())
}

/// Operator matrix of a sampled symbol, `Δ^d` column weight included.
pub fn quantize(a: &SampledSymbol) -> OperatorMatrix {
    let grid = &a.positions;
    let d = grid.dim();
    let shape = grid.shape();
    let len = grid.len();
    let rows: Vec<Vec<usize>> = (0..len).map(|f| grid.unravel(f)).collect();
    let mut out = Mat::<C64>::zeros(len, len);
    for par in parities(d) {
        let mut arr = a.array();
        for ax in 0..d {
            if par[ax] == 1 {
                shift_axis(&mut arr, ax, 0.5);
            }
        }
        for ax in 0..d {
            centered_sum_axis(&mut arr, d + ax, -1);
        }
        let norm = 1.0 / len as f64;
        let mut idx = vec![0usize; 2 * d];
        for (fi, ri) in rows.iter().enumerate() {
            'col: for (fj, rj) in rows.iter().enumerate() {
                for ax in 0..d {
                    let n = shape[ax];
                    let (i, j) = (ri[ax], rj[ax]);
                    if (i + j) % 2 != par[ax] || i.abs_diff(j) > n / 2 {
                        continue 'col;
                    }
                    idx[ax] = (i + j - par[ax]) / 2;
                    idx[d + ax] = (i + n + n / 2 - j) % n;
                }
                out[(fi, fj)] = arr[idx.as_slice()] * norm;
            }
        }
    }
    OperatorMatrix {
        in_grid: grid.clone(),
        out_grid: grid.clone(),
        entries: out,
        quadrature_absorbed: true,
    }
}

/// Schwartz kernel samples `K(x_i, x_j)` (no quadrature weight).
pub fn symbol_to_kernel(a: &SampledSymbol) -> Mat<C64> {
    let m = quantize(a);
    let w = 1.0 / a.positions.cell_volume();
    Mat::from_fn(m.entries.nrows(), m.entries.ncols(), |i, j| m.entries[(i, j)] * w)
}

/// Weyl symbol of a square operator matrix: `a(x, ξ) = Σ_y e^{-iξy} K(x + y/2, x - y/2) Δ^d`.
pub fn dequantize(m: &OperatorMatrix) -> Result<SampledSymbol> {
    if !m.is_square() {
        return Err(Error::Shape("dequantize needs a square operator".into()));
    }
    let grid = &m.in_grid;
    let d = grid.dim();
    let shape = grid.shape();
    let len = grid.len();
    let mut full_shape = shape.clone();
    full_shape.extend(shape.iter().copied());
    let mut total = ArrayD::<C64>::zeros(full_shape.clone());
    let cells: Vec<Vec<usize>> = (0..len).map(|f| grid.unravel(f)).collect();
    let mut row = vec![0usize; d];
    let mut col = vec![0usize; d];
    for par in parities(d) {
        let mut u = ArrayD::<C64>::zeros(full_shape.clone());
        let mut idx = vec![0usize; 2 * d];
        for t in &cells {
            'off: for nq in &cells {
                for ax in 0..d {
                    let n = shape[ax] as i64;
                    let q = nq[ax] as i64 - n / 2;
                    if q.rem_euclid(2) as usize != par[ax] {
                        continue 'off;
                    }
                    let r = (q - par[ax] as i64).div_euclid(2);
                    let ri = t[ax] as i64 + r + par[ax] as i64;
                    let ci = t[ax] as i64 - r;
                    if ri < 0 || ri >= n || ci < 0 || ci >= n {
                        continue 'off;
                    }
                    row[ax] = ri as usize;
                    col[ax] = ci as usize;
                    idx[ax] = t[ax];
                    idx[d + ax] = nq[ax];
                }
                u[idx.as_slice()] = m.entries[(grid.ravel(&row), grid.ravel(&col))];
            }
        }
        for ax in 0..d {
            if par[ax] == 1 {
                shift_axis(&mut u, ax, -0.5);
            }
        }
        total += &u;
    }
    for ax in 0..d {
        centered_sum_axis(&mut total, d + ax, 1);
    }
    SampledSymbol::new(grid.clone(), total.into_raw_vec_and_offset().0)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Factor {
    X,
    P,
    X2,
    P2,
    XpSym,
}

fn factor_matrix(f: Factor, axis: &crate::grid::Axis) -> Mat<C64> {
    match f {
        Factor::X => position_matrix(axis),
        Factor::P => momentum_matrix(axis),
        Factor::X2 => {
            let x = position_matrix(axis);
            &x * &x
        }
        Factor::P2 => kinetic_matrix(axis),
        Factor::XpSym => {
            let x = position_matrix(axis);
            let p = momentum_matrix(axis);
            let s = &x * &p + &p * &x;
            Mat::from_fn(s.nrows(), s.ncols(), |i, j| s[(i, j)] * 0.5)
        }
    }
}

fn add_kron_term(out: &mut Mat<C64>, grid: &Grid, coef: f64, factors: &[(usize, Factor)]) {
    let d = grid.dim();
    let mut mats: Vec<Option<Mat<C64>>> = vec![None; d];
    for &(ax, f) in factors {
        mats[ax] = Some(factor_matrix(f, grid.axis(ax)));
    }
    let len = grid.len();
    let cells: Vec<Vec<usize>> = (0..len).map(|f| grid.unravel(f)).collect();
    for (i, ri) in cells.iter().enumerate() {
        for (j, rj) in cells.iter().enumerate() {
            let mut v = C64::new(coef, 0.0);
            for ax in 0..d {
                match &mats[ax] {
                    Some(m) => v *= m[(ri[ax], rj[ax])],
                    None => {
                        if ri[ax] != rj[ax] {
                            v = C64::new(0.0, 0.0);
                        }
                    }
                }
                if v == C64::new(0.0, 0.0) {
                    break;
                }
            }
            out[(i, j)] += v;
        }
    }
}

/// Exact Weyl quantization of `½Mz·z + v·z + c` with spectral momenta.
///
/// Same-axis products are Weyl-symmetrized: `x ξ ↦ (XP + PX)/2`, `ξ² ↦ D₂`
/// (the spectral second derivative, which keeps the Nyquist mode).
pub fn quantize_quadratic(q: &QuadraticSymbol, grid: &Grid) -> Result<OperatorMatrix> {
    let d = grid.dim();
    if q.half_dim() != d {
        return Err(Error::Dimension(format!("symbol on R^{} for a {d}-axis grid", 2 * q.half_dim())));
    }
    let len = grid.len();
    let mut out = Mat::<C64>::zeros(len, len);
    let single = |i: usize| if i < d { (i, Factor::X) } else { (i - d, Factor::P) };
    for i in 0..2 * d {
        for j in i..2 * d {
            let coef = if i == j { 0.5 * q.m[(i, i)] } else { q.m[(i, j)] };
            if coef == 0.0 {
                continue;
            }
            let (ai, fi) = single(i);
            let (aj, fj) = single(j);
            if ai == aj {
                let f = match (fi, fj) {
                    (Factor::X, Factor::X) => Factor::X2,
                    (Factor::P, Factor::P) => Factor::P2,
                    _ => Factor::XpSym,
                };
                add_kron_term(&mut out, grid, coef, &[(ai, f)]);
            } else {
                add_kron_term(&mut out, grid, coef, &[(ai, fi), (aj, fj)]);
            }
        }
        if q.v[i] != 0.0 {
            add_kron_term(&mut out, grid, q.v[i], &[single(i)]);
        }
    }
    if q.c != 0.0 {
        for i in 0..len {
            out[(i, i)] += C64::new(q.c, 0.0);
        }
    }
    OperatorMatrix::square(grid.clone(), out)
}

/// Quantize any closed-form symbol by sampling it on the phase grid.
pub fn quantize_function(a: &dyn PhaseFunction, grid: &Grid) -> Result<OperatorMatrix> {
    Ok(quantize(&SampledSymbol::sample(grid, a)?))
}
