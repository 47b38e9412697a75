//! Intertwiners `T_{S̃,χ} ψ = S̃⁻¹(ψ ⊗ χ)`, spectral transfer, kernel probes and
//! the non-decaying kernel witness.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::extension::Realization;
use crate::grid::{weighted_inner, Grid, StateVector};
use crate::hermite::HermiteSeries;
use crate::linalg::{eigh, eigvalsh, gram, OperatorMatrix};
use crate::wigner::PointWigner;

/// `T = S̃⁻¹ E_χ` and `T* = E_χ* S̃` as explicit matrices.
#[derive(Debug, Clone)]
pub struct Intertwiner {
    pub chi: StateVector,
    pub matrix: OperatorMatrix,
    pub adjoint: OperatorMatrix,
}

impl Intertwiner {
    pub fn apply(&self, phi: &StateVector) -> Result<StateVector> {
        self.matrix.apply(phi)
    }

    /// `T*Φ(x) = Σ_y conj χ(y) (S̃Φ)(x, y) Δ^k`.
    pub fn apply_adjoint(&self, big_phi: &StateVector) -> Result<StateVector> {
        self.adjoint.apply(big_phi)
    }
}

pub fn build_intertwiner(r: &Realization, chi: &StateVector) -> Result<Intertwiner> {
    r.y_grid.check_same(&chi.grid)?;
    if chi.max_abs() == 0.0 {
        return Err(Error::Degenerate("χ = 0 gives the zero intertwiner".into()));
    }
    let (nx, ny) = (r.x_grid.len(), r.y_grid.len());
    let len = nx * ny;
    let s_inv = r.s_tilde_inv();
    let s = r.s_tilde();
    let mut t = Mat::<C64>::zeros(len, nx);
    let mut ta = Mat::<C64>::zeros(nx, len);
    let wy = r.y_grid.cell_volume();
    for jx in 0..nx {
        for iy in 0..ny {
            let c = chi.values[iy];
            let cc = c.conj() * wy;
            let col = jx * ny + iy;
            for row in 0..len {
                t[(row, jx)] += s_inv.entries[(row, col)] * c;
                ta[(jx, row)] += cc * s.entries[(col, row)];
            }
        }
    }
    Ok(Intertwiner {
        chi: chi.clone(),
        matrix: OperatorMatrix::new(r.x_grid.clone(), r.grid.clone(), t)?,
        adjoint: OperatorMatrix::new(r.grid.clone(), r.x_grid.clone(), ta)?,
    })
}

/// Vectors `T_{χ_l} φ_j`, ordered `(j, l)` lexicographically.
pub fn intertwined_family(r: &Realization, phis: &[StateVector], chis: &[StateVector]) -> Result<Vec<(usize, usize, StateVector)>> {
    let ts: Vec<Intertwiner> = chis.iter().map(|c| build_intertwiner(r, c)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (j, phi) in phis.iter().enumerate() {
        for (l, t) in ts.iter().enumerate() {
            out.push((j, l, t.apply(phi)?));
        }
    }
    Ok(out)
}

/// `max |Gram - I|` for `{T_{χ_l} φ_j}`.
pub fn gram_check(r: &Realization, phis: &[StateVector], chis: &[StateVector]) -> Result<f64> {
    let vs: Vec<StateVector> = intertwined_family(r, phis, chis)?.into_iter().map(|(_, _, v)| v).collect();
    let g = gram(&vs)?;
    let n = g.nrows();
    let mut worst = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g[(a, b)] - C64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// Numerical rank and condition number of a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramSpectrum {
    pub size: usize,
    pub rank: usize,
    pub condition: f64,
}

pub fn gram_spectrum(vs: &[StateVector]) -> Result<GramSpectrum> {
    let g = gram(vs)?;
    let n = g.nrows();
    let h = Mat::from_fn(n, n, |i, j| 0.5 * (g[(i, j)] + g[(j, i)].conj()));
    let vals = h.self_adjoint_eigenvalues(faer::Side::Lower).map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let max = vals.iter().cloned().fold(0.0_f64, f64::max);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let rank = vals.iter().filter(|&&v| v > 1e-10 * max).count();
    Ok(GramSpectrum { size: n, rank, condition: if min > 0.0 { max / min } else { f64::INFINITY } })
}

/// One transferred eigenpair `(λ_j, T_{χ_l} φ_j)`.
#[derive(Debug, Clone)]
pub struct TransferredPair {
    pub j: usize,
    pub l: usize,
    pub lambda: f64,
    pub vector: StateVector,
    pub residual: f64,
}

/// Map eigenpairs of `A` through the intertwiners and measure `‖ÃΦ - λΦ‖`.
pub fn transfer_eigenpairs(
    a_ext: &OperatorMatrix,
    pairs: &[(f64, StateVector)],
    r: &Realization,
    chis: &[StateVector],
) -> Result<Vec<TransferredPair>> {
    let phis: Vec<StateVector> = pairs.iter().map(|(_, v)| v.clone()).collect();
    let fam = intertwined_family(r, &phis, chis)?;
    fam.into_iter()
        .map(|(j, l, v)| {
            let lambda = pairs[j].0;
            let av = a_ext.apply(&v)?;
            let residual = av.sub(&v.scaled(C64::new(lambda, 0.0)))?.norm();
            Ok(TransferredPair { j, l, lambda, vector: v, residual })
        })
        .collect()
}

/// First `χ_l` with `‖T_{χ_l}* Ψ‖ > tol`, scanning the basis in order.
pub fn first_nonvanishing_projection(r: &Realization, psi: &StateVector, chis: &[StateVector], tol: f64) -> Result<Option<(usize, f64)>> {
    for (l, chi) in chis.iter().enumerate() {
        let t = build_intertwiner(r, chi)?;
        let p = t.apply_adjoint(psi)?.norm();
        if p > tol {
            return Ok(Some((l, p)));
        }
    }
    Ok(None)
}

/// Where an extended spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumRoute {
    Direct,
    Intertwined,
}

/// A run of consecutive sorted eigenvalues with gaps no larger than the cluster tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    pub min: f64,
    pub max: f64,
    pub max_residual: f64,
}

/// Group ascending `values` whose consecutive gaps are `≤ gap_tol`.
pub fn cluster_eigenvalues(values: &[f64], residuals: &[f64], gap_tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 0..=values.len() {
        let split = i == values.len() || (i > start && values[i] - values[i - 1] > gap_tol);
        if split && i > start {
            let run = &values[start..i];
            let res = residuals.get(start..i).map(|r| r.iter().cloned().fold(0.0, f64::max)).unwrap_or(0.0);
            out.push(Cluster {
                value: run.iter().sum::<f64>() / run.len() as f64,
                multiplicity: run.len(),
                min: run[0],
                max: run[run.len() - 1],
                max_residual: res,
            });
            start = i;
        }
    }
    out
}

/// Clustered spectrum of a Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub route: SpectrumRoute,
    pub spectral_width: f64,
    pub cluster_tolerance: f64,
    pub gap_tolerance: f64,
    pub resolution_cutoff: f64,
    pub hermiticity_defect: f64,
    pub clusters: Vec<Cluster>,
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
}

/// Relative cluster tolerance: `1e-3 · spectral width`; gaps up to ten times that are merged.
pub const CLUSTER_REL_TOL: f64 = 1e-3;

pub fn spectrum_report(m: &OperatorMatrix, route: SpectrumRoute) -> Result<SpectrumReport> {
    let e = eigh(m)?;
    let mv = &m.entries * &e.vectors;
    let residuals: Vec<f64> = (0..e.values.len())
        .map(|k| {
            (0..mv.nrows())
                .map(|i| (mv[(i, k)] - e.vectors[(i, k)] * e.values[k]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let lo = e.values.first().copied().unwrap_or(0.0);
    let hi = e.values.last().copied().unwrap_or(0.0);
    let width = hi - lo;
    let tol = CLUSTER_REL_TOL * width;
    let cutoff = 0.5 * hi;
    let clusters = cluster_eigenvalues(&e.values, &residuals, 10.0 * tol).into_iter().filter(|c| c.value <= cutoff).collect();
    Ok(SpectrumReport {
        route,
        spectral_width: width,
        cluster_tolerance: tol,
        gap_tolerance: 10.0 * tol,
        resolution_cutoff: cutoff,
        hermiticity_defect: e.hermiticity_defect,
        clusters,
        eigenvalues: e.values,
    })
}

/// `-i (π/2)^{1/2} W(φ, conj χ̂)(x/2, y/2)` on a 2D grid.
pub fn landau_intertwiner_closed(phi: &HermiteSeries, chi: &HermiteSeries, grid: &Grid) -> Result<StateVector> {
    if grid.dim() != 2 {
        return Err(Error::Dimension("Landau intertwiner lives on a 2D grid".into()));
    }
    let w = PointWigner::new(phi, &chi.fourier().conj());
    let c = C64::new(0.0, -(0.5 * PI).sqrt());
    Ok(StateVector::from_fn(grid, |p| c * w.eval(0.5 * p[0], 0.5 * p[1])))
}

/// `(2π)^{1/2} i^{-1} W(φ, conj χ̂)(x, y)` on a 2D grid.
pub fn bopp_intertwiner_closed(phi: &HermiteSeries, chi: &HermiteSeries, grid: &Grid) -> Result<StateVector> {
    if grid.dim() != 2 {
        return Err(Error::Dimension("one-dimensional Bopp intertwiner lives on a 2D grid".into()));
    }
    let w = PointWigner::new(phi, &chi.fourier().conj());
    let c = C64::new(0.0, -(2.0 * PI).sqrt());
    Ok(StateVector::from_fn(grid, |p| c * w.eval(p[0], p[1])))
}

/// Smallest singular values of `A` and `Ã` and whether they agree on having a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelProbe {
    pub sigma_min: f64,
    pub sigma_min_extended: f64,
    pub norm: f64,
    pub norm_extended: f64,
    pub relative_threshold: f64,
    pub has_kernel: bool,
    pub extended_has_kernel: bool,
    pub consistent: bool,
}

pub const KERNEL_REL_THRESHOLD: f64 = 1e-6;

fn sigma_range(m: &OperatorMatrix) -> Result<(f64, f64)> {
    let ev = eigvalsh(&m.hermitian_part())?;
    let min = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    let max = ev.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    Ok((min, max))
}

/// Both operators are Hermitized, so `σ_min = min |λ|`.
pub fn kernel_probe(a: &OperatorMatrix, a_ext: &OperatorMatrix) -> Result<KernelProbe> {
    let (s, n) = sigma_range(a)?;
    let (se, ne) = sigma_range(a_ext)?;
    let has = s < KERNEL_REL_THRESHOLD * n;
    let has_e = se < KERNEL_REL_THRESHOLD * ne;
    Ok(KernelProbe {
        sigma_min: s,
        sigma_min_extended: se,
        norm: n,
        norm_extended: ne,
        relative_threshold: KERNEL_REL_THRESHOLD,
        has_kernel: has,
        extended_has_kernel: has_e,
        consistent: has == has_e,
    })
}

/// `e^{iky}` on a grid (constant modulus, hence non-decaying).
pub fn plane_wave(grid: &Grid, k: &[f64]) -> StateVector {
    StateVector::from_fn(grid, |p| C64::from_polar(1.0, p.iter().zip(k).map(|(a, b)| a * b).sum()))
}

/// Fraction of `‖v‖²` on nodes with `max_a |x_a| / L_a ≥ frac`.
pub fn outer_mass_ratio(v: &StateVector, frac: f64) -> f64 {
    let g = &v.grid;
    let total: f64 = v.values.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let outer: f64 = (0..g.len())
        .filter(|&f| g.point(f).iter().zip(g.axes()).any(|(x, a)| x.abs() >= frac * a.half_width))
        .map(|f| v.values[f].norm_sqr())
        .sum();
    outer / total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub residual_tol: f64,
    pub min_outer_mass: f64,
    pub outer_fraction: f64,
}

impl Default for WitnessParams {
    fn default() -> Self {
        Self { residual_tol: 1e-5, min_outer_mass: 0.1, outer_fraction: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub kernel_eigenvalue: f64,
    pub residual_ratio: f64,
    pub outer_mass_ratio: f64,
    pub params: WitnessParams,
    pub success: bool,
}

/// Build `Φ = T_{S̃,χ} φ` from a numerical kernel vector `φ` of `A` and report
/// how well `ÃΦ = 0` holds and how much of `Φ` sits near the box edge.
pub fn nonhypoellipticity_witness(a: &OperatorMatrix, r: &Realization, chi: &StateVector, params: WitnessParams) -> Result<WitnessReport> {
    let e = eigh(a)?;
    let (k, lam) = e
        .values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .map(|(k, v)| (k, *v))
        .ok_or_else(|| Error::Precondition("empty operator".into()))?;
    let scale = e.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if lam.abs() >= KERNEL_REL_THRESHOLD * scale {
        return Err(Error::Precondition(format!("no numerical kernel: smallest |λ| = {:.3e}", lam.abs())));
    }
    let phi = e.state(&a.in_grid, k);
    let t = build_intertwiner(r, chi)?;
    let big_phi = t.apply(&phi)?;
    let image = r.apply_extended(a, &big_phi)?;
    let ratio = image.norm() / big_phi.norm();
    let d = outer_mass_ratio(&big_phi, params.outer_fraction);
    Ok(WitnessReport {
        kernel_eigenvalue: lam,
        residual_ratio: ratio,
        outer_mass_ratio: d,
        params,
        success: ratio <= params.residual_tol && d >= params.min_outer_mass,
    })
}

/// `(Φ | Ψ)` helper used by reports.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<C64> {
    weighted_inner(a, b)
}
