//! Real symplectic matrices in `(x; ξ)` ordering and their free generating forms.
//!
//! For extensions the ordering is `(x, y; ξ, η)`.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// `J = [[0, I], [-I, 0]]` of size `2m`.
pub fn j_matrix(m: usize) -> Mat<f64> {
    Mat::from_fn(2 * m, 2 * m, |i, j| {
        if j == i + m {
            1.0
        } else if i == j + m {
            -1.0
        } else {
            0.0
        }
    })
}

/// `‖SᵀJS - J‖_max ≤ tol`.
pub fn is_symplectic(s: &Mat<f64>, tol: f64) -> Result<bool> {
    if s.nrows() != s.ncols() || s.nrows() % 2 != 0 {
        return Err(Error::Shape(format!("symplectic test needs an even square matrix, got {}x{}", s.nrows(), s.ncols())));
    }
    Ok(symplectic_defect(s) <= tol)
}

pub fn symplectic_defect(s: &Mat<f64>) -> f64 {
    let j = j_matrix(s.nrows() / 2);
    (s.transpose() * &j * s - &j).as_ref().norm_max()
}

pub(crate) fn inverse(m: &Mat<f64>) -> Mat<f64> {
    m.partial_piv_lu().inverse()
}

pub(crate) fn det(m: &Mat<f64>) -> f64 {
    // Partial pivoting; exact zero for singular input instead of NaN.
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap_or(k);
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

fn block(s: &Mat<f64>, r: usize, c: usize, m: usize) -> Mat<f64> {
    Mat::from_fn(m, m, |i, j| s[(r * m + i, c * m + j)])
}

fn from_blocks(a: &Mat<f64>, b: &Mat<f64>, c: &Mat<f64>, d: &Mat<f64>) -> Mat<f64> {
    let m = a.nrows();
    Mat::from_fn(2 * m, 2 * m, |i, j| match (i < m, j < m) {
        (true, true) => a[(i, j)],
        (true, false) => b[(i, j - m)],
        (false, true) => c[(i - m, j)],
        (false, false) => d[(i - m, j - m)],
    })
}

fn rows_of(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> Result<Mat<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("matrix rows must form a square".into()));
    }
    Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
}

#[derive(Serialize, Deserialize)]
struct SymplecticJson {
    half_dim: usize,
    rows: Vec<Vec<f64>>,
}

/// An element of `Sp(2m, R)`, validated on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymplecticJson", into = "SymplecticJson")]
pub struct SymplecticMatrix {
    half_dim: usize,
    s: Mat<f64>,
}

impl TryFrom<SymplecticJson> for SymplecticMatrix {
    type Error = Error;
    fn try_from(j: SymplecticJson) -> Result<Self> {
        let s = from_rows(&j.rows)?;
        if s.nrows() != 2 * j.half_dim {
            return Err(Error::Shape(format!("half_dim {} does not match {} rows", j.half_dim, s.nrows())));
        }
        Self::new(s)
    }
}

impl From<SymplecticMatrix> for SymplecticJson {
    fn from(s: SymplecticMatrix) -> Self {
        SymplecticJson { half_dim: s.half_dim, rows: rows_of(&s.s) }
    }
}

impl SymplecticMatrix {
    pub fn new(s: Mat<f64>) -> Result<Self> {
        if !is_symplectic(&s, SYMPLECTIC_TOL)? {
            return Err(Error::InvalidForm(format!("matrix is not symplectic (defect {:.3e})", symplectic_defect(&s))));
        }
        Ok(Self { half_dim: s.nrows() / 2, s })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(from_rows(rows)?)
    }

    pub fn identity(m: usize) -> Self {
        Self { half_dim: m, s: Mat::identity(2 * m, 2 * m) }
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.s
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        rows_of(&self.s)
    }

    /// `(A, B, C, D)` with `s = [[A, B], [C, D]]`.
    pub fn blocks(&self) -> (Mat<f64>, Mat<f64>, Mat<f64>, Mat<f64>) {
        let m = self.half_dim;
        (block(&self.s, 0, 0, m), block(&self.s, 0, 1, m), block(&self.s, 1, 0, m), block(&self.s, 1, 1, m))
    }

    /// `s⁻¹ = -J sᵀ J`.
    pub fn inverse(&self) -> Self {
        let j = j_matrix(self.half_dim);
        let inv = -(&j * self.s.transpose() * &j);
        Self { half_dim: self.half_dim, s: inv }
    }

    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.half_dim != rhs.half_dim {
            return Err(Error::Dimension("symplectic sizes differ".into()));
        }
        Ok(Self { half_dim: self.half_dim, s: &self.s * &rhs.s })
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        (0..self.s.nrows()).map(|i| (0..self.s.ncols()).map(|j| self.s[(i, j)] * z[j]).sum()).collect()
    }

    pub fn determinant(&self) -> f64 {
        det(&self.s)
    }

    pub fn is_identity(&self) -> bool {
        (&self.s - Mat::<f64>::identity(self.s.nrows(), self.s.nrows())).as_ref().norm_max() == 0.0
    }

    /// Rotation by `theta` in each `(x_a, ξ_a)` plane.
    pub fn rotation(m: usize, theta: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        let id = Mat::<f64>::identity(m, m);
        let s_mat = from_blocks(&(&id * c), &(&id * s), &(&id * -s), &(&id * c));
        Self { half_dim: m, s: s_mat }
    }

    /// `diag(r, ..., 1/r, ...)`: position scaling by `r`.
    pub fn squeeze(m: usize, r: f64) -> Self {
        let s_mat = Mat::from_fn(2 * m, 2 * m, |i, j| if i != j { 0.0 } else if i < m { r } else { 1.0 / r });
        Self { half_dim: m, s: s_mat }
    }
}

/// Free generating form `W(x, x') = ½Px·x - Lx·x' + ½Qx'·x'` with Maslov index `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormJson", into = "FormJson")]
pub struct QuadraticFormW {
    pub p: Mat<f64>,
    pub l: Mat<f64>,
    pub q: Mat<f64>,
    pub maslov: i32,
}

#[derive(Serialize, Deserialize)]
struct FormJson {
    p: Vec<Vec<f64>>,
    l: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    maslov: i32,
}

impl TryFrom<FormJson> for QuadraticFormW {
    type Error = Error;
    fn try_from(j: FormJson) -> Result<Self> {
        Self::new(from_rows(&j.p)?, from_rows(&j.l)?, from_rows(&j.q)?, j.maslov)
    }
}

impl From<QuadraticFormW> for FormJson {
    fn from(w: QuadraticFormW) -> Self {
        FormJson { p: rows_of(&w.p), l: rows_of(&w.l), q: rows_of(&w.q), maslov: w.maslov }
    }
}

fn symmetric_defect(m: &Mat<f64>) -> f64 {
    (m - m.transpose()).as_ref().norm_max()
}

impl QuadraticFormW {
    pub fn new(p: Mat<f64>, l: Mat<f64>, q: Mat<f64>, maslov: i32) -> Result<Self> {
        let n = l.nrows();
        if [p.nrows(), p.ncols(), l.ncols(), q.nrows(), q.ncols()].iter().any(|&d| d != n) {
            return Err(Error::Shape("P, L, Q must share one square size".into()));
        }
        if symmetric_defect(&p) > 1e-12 || symmetric_defect(&q) > 1e-12 {
            return Err(Error::InvalidForm("P and Q must be symmetric".into()));
        }
        if det(&l).abs() <= 1e-10 {
            return Err(Error::InvalidForm(format!("det L = {:.3e} is too small", det(&l))));
        }
        Ok(Self { p, l, q, maslov })
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    pub fn det_l(&self) -> f64 {
        det(&self.l)
    }

    pub fn eval(&self, x: &[f64], xp: &[f64]) -> f64 {
        let n = self.n();
        let mut w = 0.0;
        for a in 0..n {
            for b in 0..n {
                w += 0.5 * self.p[(a, b)] * x[a] * x[b] - self.l[(a, b)] * xp[b] * x[a] + 0.5 * self.q[(a, b)] * xp[a] * xp[b];
            }
        }
        w
    }

    pub fn with_maslov(&self, maslov: i32) -> Self {
        Self { maslov, ..self.clone() }
    }
}

/// `P = DB⁻¹`, `L = B⁻¹`, `Q = B⁻¹A`, Maslov index 0.
pub fn w_from_symplectic(s: &SymplecticMatrix) -> Result<QuadraticFormW> {
    let (a, b, _c, d) = s.blocks();
    let m = s.half_dim();
    let det_b = det(&b);
    let scale = s.matrix().as_ref().norm_max().max(1.0);
    if det_b.abs() <= 1e-10 * scale.powi(m as i32) {
        return Err(Error::NotFree { det_b });
    }
    let b_inv = inverse(&b);
    let p = &d * &b_inv;
    let q = &b_inv * &a;
    let sym = |m: Mat<f64>| Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    QuadraticFormW::new(sym(p), b_inv, sym(q), 0)
}

/// Inverse of [`w_from_symplectic`]: `A = L⁻¹Q`, `B = L⁻¹`, `C = PL⁻¹Q - Lᵀ`, `D = PL⁻¹`.
pub fn symplectic_from_w(w: &QuadraticFormW) -> Result<SymplecticMatrix> {
    let l_inv = inverse(&w.l);
    let a = &l_inv * &w.q;
    let c = &w.p * &l_inv * &w.q - w.l.transpose();
    let d = &w.p * &l_inv;
    SymplecticMatrix::new(from_blocks(&a, &l_inv, &c, &d))
}

/// Generating form of the inverse operator: `W*(x, x') = -W(x', x)`, Maslov `n - m`.
///
/// Swapping arguments turns the cross term into `+Lᵀx·x'`, so `L* = -Lᵀ`.
pub fn w_dual(w: &QuadraticFormW) -> QuadraticFormW {
    QuadraticFormW {
        p: -&w.q,
        l: -w.l.transpose().to_owned(),
        q: -&w.p,
        maslov: w.n() as i32 - w.maslov,
    }
}

/// `s_n ⊕ s_k` acting on `(x, y; ξ, η)`.
pub fn embed_direct_sum(sn: &SymplecticMatrix, sk: &SymplecticMatrix) -> SymplecticMatrix {
    let (n, k) = (sn.half_dim(), sk.half_dim());
    let m = n + k;
    let mut out = Mat::<f64>::zeros(2 * m, 2 * m);
    // position/momentum slots of each factor inside the big ordering
    let slot_n = |i: usize| if i < n { i } else { m + (i - n) };
    let slot_k = |i: usize| if i < k { n + i } else { m + n + (i - k) };
    for i in 0..2 * n {
        for j in 0..2 * n {
            out[(slot_n(i), slot_n(j))] = sn.matrix()[(i, j)];
        }
    }
    for i in 0..2 * k {
        for j in 0..2 * k {
            out[(slot_k(i), slot_k(j))] = sk.matrix()[(i, j)];
        }
    }
    SymplecticMatrix { half_dim: m, s: out }
}

/// `D = [[0, I_n], [I_n, 0]]`.
pub fn swap_matrix(n: usize) -> Mat<f64> {
    Mat::from_fn(2 * n, 2 * n, |i, j| if (i < n) != (j < n) && i % n == j % n { 1.0 } else { 0.0 })
}

/// The Landau matrix `s_L = [[½I, -D], [½D, I]]` on `(x, y; ξ, η)`.
pub fn landau_symplectic() -> SymplecticMatrix {
    let d = swap_matrix(1);
    let id = Mat::<f64>::identity(2, 2);
    SymplecticMatrix::new(from_blocks(&(&id * 0.5), &(-&d), &(&d * 0.5), &id)).expect("Landau matrix is symplectic")
}

/// The Bopp matrix `s_B = [[I, -½D], [D, ½I]]` on `(x, y; ξ, η)` with `x, y ∈ R^n`.
pub fn bopp_symplectic(n: usize) -> SymplecticMatrix {
    let d = swap_matrix(n);
    let id = Mat::<f64>::identity(2 * n, 2 * n);
    SymplecticMatrix::new(from_blocks(&id, &(&d * -0.5), &d, &(&id * 0.5))).expect("Bopp matrix is symplectic")
}
