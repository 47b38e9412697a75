//! Symplectic dimensional extensions of symbols and operators.
//!
//! The primary operator route is tensor-then-conjugate,
//! `𝔼_s[A] = S̃⁻¹ (A ⊗ I) S̃`, where `S̃⁻¹ = S_{W(s⁻¹), m}` and `S̃` is built
//! from the dual form. Product grids are ordered x-major, y-minor.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, StateVector};
use crate::linalg::{kron, OperatorMatrix};
use crate::metaplectic::build_metaplectic;
use crate::symbol::{ExtendedSymbol, PhaseFunction, QuadraticSymbol, SharedSymbol};
use crate::symplectic::{bopp_symplectic, landau_symplectic, w_dual, w_from_symplectic, QuadraticFormW, SymplecticMatrix};
use crate::weyl::SampledSymbol;
use crate::wigner::cross_wigner;

/// How `S̃⁻¹` is realized.
#[derive(Debug, Clone, PartialEq)]
pub enum Route {
    /// `s = I`: no conjugation.
    Identity,
    /// One free generating form for `s⁻¹`.
    Free(QuadraticFormW),
    /// Caller-supplied free factors: `S̃⁻¹ = S_{W_1} S_{W_2} ⋯`.
    Factors(Vec<QuadraticFormW>),
    /// `s` is not free and no factors were supplied.
    Unavailable,
}

/// `s ∈ Sp(2(n+k))` together with the route used to build its metaplectic lift.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionSpec {
    pub n: usize,
    pub k: usize,
    pub s: SymplecticMatrix,
    pub maslov: i32,
    pub route: Route,
}

/// JSON form `{n, k, s, maslov}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionSpecJson {
    pub n: usize,
    pub k: usize,
    pub s: SymplecticMatrix,
    #[serde(default)]
    pub maslov: i32,
}

impl ExtensionSpec {
    pub fn new(n: usize, k: usize, s: SymplecticMatrix, maslov: i32) -> Result<Self> {
        if n == 0 || k == 0 || s.half_dim() != n + k {
            return Err(Error::Dimension(format!("s acts on R^{} but n + k = {}", 2 * s.half_dim(), n + k)));
        }
        let route = if s.is_identity() {
            Route::Identity
        } else {
            match w_from_symplectic(&s.inverse()) {
                Ok(w) => Route::Free(w.with_maslov(maslov)),
                Err(Error::NotFree { .. }) => Route::Unavailable,
                Err(e) => return Err(e),
            }
        };
        Ok(Self { n, k, s, maslov, route })
    }

    /// Supply free factors of `s⁻¹` explicitly; their product must project onto `s⁻¹`.
    pub fn with_factors(n: usize, k: usize, s: SymplecticMatrix, factors: Vec<QuadraticFormW>) -> Result<Self> {
        let mut spec = Self::new(n, k, s, 0)?;
        if factors.iter().any(|w| w.n() != n + k) {
            return Err(Error::Dimension("factor forms must act on R^{n+k}".into()));
        }
        let mut prod = SymplecticMatrix::identity(n + k);
        for w in &factors {
            prod = prod.compose(&crate::symplectic::symplectic_from_w(w)?)?;
        }
        let target = spec.s.inverse();
        if (prod.matrix() - target.matrix()).as_ref().norm_max() > 1e-9 {
            return Err(Error::InvalidForm("factor product does not equal s⁻¹".into()));
        }
        spec.route = Route::Factors(factors);
        Ok(spec)
    }

    pub fn identity(n: usize, k: usize) -> Self {
        Self::new(n, k, SymplecticMatrix::identity(n + k), 0).expect("identity spec")
    }

    /// `s_L` on `R⁴` with Maslov index 0.
    pub fn landau() -> Self {
        Self::new(1, 1, landau_symplectic(), 0).expect("Landau spec")
    }

    /// `s_B` on `R^{4n}` with Maslov index 0.
    pub fn bopp(n: usize) -> Self {
        Self::new(n, n, bopp_symplectic(n), 0).expect("Bopp spec")
    }

    pub fn from_json(j: ExtensionSpecJson) -> Result<Self> {
        Self::new(j.n, j.k, j.s, j.maslov)
    }

    pub fn to_json(&self) -> ExtensionSpecJson {
        ExtensionSpecJson { n: self.n, k: self.k, s: self.s.clone(), maslov: self.maslov }
    }

    /// Build `S̃` and `S̃⁻¹` on `x_grid × y_grid`.
    pub fn realize(&self, x_grid: &Grid, y_grid: &Grid) -> Result<Realization> {
        if x_grid.dim() != self.n || y_grid.dim() != self.k {
            return Err(Error::Dimension(format!(
                "spec with n = {}, k = {} on grids of dimension {} and {}",
                self.n,
                self.k,
                x_grid.dim(),
                y_grid.dim()
            )));
        }
        let grid = x_grid.product(y_grid);
        let (s_tilde, s_tilde_inv) = match &self.route {
            Route::Identity => (None, None),
            Route::Free(w) => (
                Some(build_metaplectic(&w_dual(w), &grid, &grid)?),
                Some(build_metaplectic(w, &grid, &grid)?),
            ),
            Route::Factors(ws) => {
                let mut inv = OperatorMatrix::identity(&grid);
                let mut fwd = OperatorMatrix::identity(&grid);
                for w in ws {
                    inv = inv.compose(&build_metaplectic(w, &grid, &grid)?)?;
                    fwd = build_metaplectic(&w_dual(w), &grid, &grid)?.compose(&fwd)?;
                }
                (Some(fwd), Some(inv))
            }
            Route::Unavailable => {
                return Err(Error::Unsupported("s is not free and no free factors were supplied".into()))
            }
        };
        Ok(Realization {
            spec: self.clone(),
            x_grid: x_grid.clone(),
            y_grid: y_grid.clone(),
            grid,
            s_tilde,
            s_tilde_inv,
        })
    }
}

/// An extension spec with its metaplectic matrices built on a product grid.
#[derive(Debug, Clone)]
pub struct Realization {
    pub spec: ExtensionSpec,
    pub x_grid: Grid,
    pub y_grid: Grid,
    pub grid: Grid,
    s_tilde: Option<OperatorMatrix>,
    s_tilde_inv: Option<OperatorMatrix>,
}

impl Realization {
    pub fn s_tilde(&self) -> OperatorMatrix {
        self.s_tilde.clone().unwrap_or_else(|| OperatorMatrix::identity(&self.grid))
    }

    pub fn s_tilde_inv(&self) -> OperatorMatrix {
        self.s_tilde_inv.clone().unwrap_or_else(|| OperatorMatrix::identity(&self.grid))
    }

    pub fn apply_s(&self, v: &StateVector) -> Result<StateVector> {
        match &self.s_tilde {
            Some(m) => m.apply(v),
            None => Ok(v.clone()),
        }
    }

    pub fn apply_s_inv(&self, v: &StateVector) -> Result<StateVector> {
        match &self.s_tilde_inv {
            Some(m) => m.apply(v),
            None => Ok(v.clone()),
        }
    }

    /// `S̃⁻¹ (A ⊗ I) S̃`.
    pub fn extend_operator(&self, a: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.x_grid.check_same(&a.in_grid)?;
        self.x_grid.check_same(&a.out_grid)?;
        let t = extend_operator_tensor(a, &self.y_grid)?;
        match (&self.s_tilde, &self.s_tilde_inv) {
            (Some(s), Some(si)) => si.compose(&t.compose(s)?),
            _ => Ok(t),
        }
    }

    /// Apply `S̃⁻¹ (A ⊗ I) S̃` to a vector without forming the matrix.
    pub fn apply_extended(&self, a: &OperatorMatrix, v: &StateVector) -> Result<StateVector> {
        let sv = self.apply_s(v)?;
        let (nx, ny) = (self.x_grid.len(), self.y_grid.len());
        let mut out = vec![C64::new(0.0, 0.0); nx * ny];
        for i in 0..nx {
            for j in 0..nx {
                let aij = a.entries[(i, j)];
                if aij == C64::new(0.0, 0.0) {
                    continue;
                }
                for y in 0..ny {
                    out[i * ny + y] += aij * sv.values[j * ny + y];
                }
            }
        }
        self.apply_s_inv(&StateVector::new(self.grid.clone(), out)?)
    }
}

/// `A ⊗ I_y` with x-major ordering.
pub fn extend_operator_tensor(a: &OperatorMatrix, y_grid: &Grid) -> Result<OperatorMatrix> {
    if !a.is_square() {
        return Err(Error::Shape("tensor extension needs a square operator".into()));
    }
    let ny = y_grid.len();
    let id = Mat::<C64>::identity(ny, ny);
    OperatorMatrix::square(a.in_grid.product(y_grid), kron(&a.entries, &id))
}

/// One-shot `𝔼_s[A]` on `A.in_grid × y_grid`.
pub fn extend_operator(a: &OperatorMatrix, spec: &ExtensionSpec, y_grid: &Grid) -> Result<OperatorMatrix> {
    spec.realize(&a.in_grid, y_grid)?.extend_operator(a)
}

/// `ã = (a ⊗ 1_{2k}) ∘ s` for any closed-form `a`.
pub fn extend_symbol(a: SharedSymbol, spec: &ExtensionSpec) -> Result<ExtendedSymbol> {
    if a.phase_dim() != 2 * spec.n {
        return Err(Error::Dimension(format!("symbol on R^{} for n = {}", a.phase_dim(), spec.n)));
    }
    Ok(ExtendedSymbol { base: a, n: spec.n, k: spec.k, s: spec.s.clone() })
}

/// Exact quadratic form of `(q ⊗ 1_{2k}) ∘ s`.
pub fn extend_quadratic(q: &QuadraticSymbol, spec: &ExtensionSpec) -> Result<QuadraticSymbol> {
    let (n, k) = (spec.n, spec.k);
    if q.half_dim() != n {
        return Err(Error::Dimension(format!("symbol on R^{} for n = {n}", 2 * q.half_dim())));
    }
    let m = n + k;
    let slot = |i: usize| if i < n { i } else { m + (i - n) };
    let mut big = Mat::<f64>::zeros(2 * m, 2 * m);
    let mut v = vec![0.0; 2 * m];
    for i in 0..2 * n {
        v[slot(i)] = q.v[i];
        for j in 0..2 * n {
            big[(slot(i), slot(j))] = q.m[(i, j)];
        }
    }
    QuadraticSymbol::new(big, v, q.c)?.compose(&spec.s)
}

/// `Σ ã(z) W(Ψ, Φ)(z) dz` over the phase grid of the product grid.
pub fn weak_form_eval(a: SharedSymbol, psi: &StateVector, phi: &StateVector, spec: &ExtensionSpec) -> Result<C64> {
    let ext: Arc<dyn PhaseFunction> = Arc::new(extend_symbol(a, spec)?);
    let w = cross_wigner(psi, phi)?;
    let sampled = SampledSymbol::sample(&psi.grid, ext.as_ref())?;
    sampled.pair(&w)
}
