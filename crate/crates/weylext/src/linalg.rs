//! Dense operator matrices on grids and the Hermitian eigensolver wrapper.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{Grid, StateVector};

pub const HERMITICITY_TOL: f64 = 1e-8;

/// Dense complex matrix acting from `in_grid` samples to `out_grid` samples.
///
/// When `quadrature_absorbed` is set, the column weight `Δ^d` is already part
/// of the entries, so `(M ψ)_i` approximates `(Aψ)(x_i)` directly.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub in_grid: Grid,
    pub out_grid: Grid,
    pub entries: Mat<C64>,
    pub quadrature_absorbed: bool,
}

impl OperatorMatrix {
    pub fn new(in_grid: Grid, out_grid: Grid, entries: Mat<C64>) -> Result<Self> {
        if entries.nrows() != out_grid.len() || entries.ncols() != in_grid.len() {
            return Err(Error::Shape(format!(
                "{}x{} entries for grids with {} -> {} nodes",
                entries.nrows(),
                entries.ncols(),
                in_grid.len(),
                out_grid.len()
            )));
        }
        Ok(Self { in_grid, out_grid, entries, quadrature_absorbed: true })
    }

    pub fn square(grid: Grid, entries: Mat<C64>) -> Result<Self> {
        Self::new(grid.clone(), grid, entries)
    }

    pub fn identity(grid: &Grid) -> Self {
        let n = grid.len();
        Self {
            in_grid: grid.clone(),
            out_grid: grid.clone(),
            entries: Mat::identity(n, n),
            quadrature_absorbed: true,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.len();
        Self { in_grid: grid.clone(), out_grid: grid.clone(), entries: Mat::zeros(n, n), quadrature_absorbed: true }
    }

    pub fn is_square(&self) -> bool {
        self.in_grid == self.out_grid
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.in_grid.check_same(&v.grid)?;
        let m = &self.entries;
        let mut out = vec![C64::new(0.0, 0.0); m.nrows()];
        for j in 0..m.ncols() {
            let vj = v.values[j];
            if vj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = m.col(j);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col[i] * vj;
            }
        }
        StateVector::new(self.out_grid.clone(), out)
    }

    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.in_grid.check_same(&rhs.out_grid)?;
        Ok(OperatorMatrix {
            in_grid: rhs.in_grid.clone(),
            out_grid: self.out_grid.clone(),
            entries: &self.entries * &rhs.entries,
            quadrature_absorbed: true,
        })
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            in_grid: self.out_grid.clone(),
            out_grid: self.in_grid.clone(),
            entries: self.entries.adjoint().to_owned(),
            quadrature_absorbed: true,
        }
    }

    pub fn add(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.in_grid.check_same(&rhs.in_grid)?;
        self.out_grid.check_same(&rhs.out_grid)?;
        Ok(OperatorMatrix { entries: &self.entries + &rhs.entries, ..self.clone() })
    }

    pub fn sub(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.add(&rhs.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> OperatorMatrix {
        let entries = Mat::from_fn(self.entries.nrows(), self.entries.ncols(), |i, j| self.entries[(i, j)] * c);
        OperatorMatrix { entries, ..self.clone() }
    }

    pub fn shifted(&self, c: f64) -> Result<OperatorMatrix> {
        if !self.is_square() {
            return Err(Error::Shape("shift needs a square operator".into()));
        }
        let mut out = self.clone();
        for i in 0..out.entries.nrows() {
            out.entries[(i, i)] += C64::new(c, 0.0);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<OperatorMatrix> {
        if !self.is_square() {
            return Err(Error::Shape("inverse needs a square operator".into()));
        }
        use faer::linalg::solvers::DenseSolveCore;
        let inv = self.entries.partial_piv_lu().inverse();
        if inv.as_ref().norm_max().is_nan() {
            return Err(Error::Numerical("singular matrix".into()));
        }
        Ok(OperatorMatrix { entries: inv, ..self.clone() })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.as_ref().norm_max()
    }

    /// Largest entry of `self - rhs`.
    pub fn max_diff(&self, rhs: &OperatorMatrix) -> f64 {
        (&self.entries - &rhs.entries).as_ref().norm_max()
    }

    /// `‖M - M†‖_max / ‖M‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        (&self.entries - self.entries.adjoint()).as_ref().norm_max() / scale
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> OperatorMatrix {
        let n = self.entries.nrows();
        let e = Mat::from_fn(n, n, |i, j| 0.5 * (self.entries[(i, j)] + self.entries[(j, i)].conj()));
        OperatorMatrix { entries: e, ..self.clone() }
    }

    /// Spectral norm estimate for Hermitian matrices: largest |eigenvalue|.
    pub fn hermitian_norm(&self) -> Result<f64> {
        let ev = eigvalsh(self)?;
        Ok(ev.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        self.entries.singular_values().map_err(|e| Error::Numerical(format!("{e:?}")))
    }
}

/// Kronecker product `a ⊗ b` with the `a` index slow.
pub fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Eigenpairs of a Hermitian operator, ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
    /// `‖M - M†‖_max / ‖M‖_max` before symmetrization.
    pub hermiticity_defect: f64,
}

impl Eigen {
    /// Eigenvector `k` as a grid function normalized in the weighted norm.
    pub fn state(&self, grid: &Grid, k: usize) -> StateVector {
        let scale = 1.0 / grid.cell_volume().sqrt();
        let values = (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)] * scale).collect();
        StateVector { grid: grid.clone(), values }
    }
}

fn check_hermitian(m: &OperatorMatrix) -> Result<f64> {
    if !m.is_square() || m.entries.nrows() != m.entries.ncols() {
        return Err(Error::Shape("eigendecomposition needs a square operator".into()));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect, tol: HERMITICITY_TOL });
    }
    Ok(defect)
}

/// Symmetrize, then diagonalize.
pub fn eigh(m: &OperatorMatrix) -> Result<Eigen> {
    let defect = check_hermitian(m)?;
    let h = m.hermitian_part();
    let evd = h.entries.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().map(|v| v.re).collect();
    Ok(Eigen { values, vectors: evd.U().to_owned(), hermiticity_defect: defect })
}

/// Eigenvalues only.
pub fn eigvalsh(m: &OperatorMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let h = m.hermitian_part();
    h.entries.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Numerical(format!("{e:?}")))
}

/// `max |(V†V - I)_{ij}|`.
pub fn orthonormality_defect(v: &Mat<C64>) -> f64 {
    let g = v.adjoint() * v;
    let n = g.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// `max_k ‖M v_k - λ_k v_k‖` over columns of the decomposition.
pub fn eigen_residual(m: &OperatorMatrix, e: &Eigen) -> f64 {
    let mv = &m.entries * &e.vectors;
    let mut worst = 0.0_f64;
    for k in 0..e.values.len() {
        let mut s = 0.0;
        for i in 0..mv.nrows() {
            s += (mv[(i, k)] - e.vectors[(i, k)] * e.values[k]).norm_sqr();
        }
        worst = worst.max(s.sqrt());
    }
    worst
}

/// Gram matrix `(v_a | v_b)` of grid functions, row `a` column `b`.
pub fn gram(vs: &[StateVector]) -> Result<Mat<C64>> {
    let n = vs.len();
    let mut g = Mat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            g[(a, b)] = crate::grid::weighted_inner(&vs[b], &vs[a])?;
        }
    }
    Ok(g)
}
