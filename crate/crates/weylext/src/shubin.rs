//! Sampled growth and derivative diagnostics for the classes defined by
//! `C₀|z|^{m₀} ≤ |a(z)| ≤ C₁|z|^{m₁}` and `|∂^α a| ≤ C_α |a| |z|^{-ρ|α|}`.
//!
//! These are sampled evidence only, never a proof of class membership.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::symbol::PhaseFunction;

/// Radius beyond which the estimates are probed.
pub const DEFAULT_R0: f64 = 5.0;
pub const DEFAULT_SAMPLES: usize = 1024;
pub const LOWER_BOUND_FLOOR: f64 = 1e-8;
pub const VANISHING_FLOOR: f64 = 1e-12;

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic quasi-uniform points on the unit sphere of `R^dim`, `dim ∈ {2, 4}`.
///
/// On `S³` the Hopf parametrization with `cos²ϑ` uniform gives the uniform measure.
pub fn sphere_samples(dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    match dim {
        2 => Ok((0..count)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        4 => Ok((1..=count)
            .map(|k| {
                let u = radical_inverse(k, 2);
                let a = 2.0 * PI * radical_inverse(k, 3);
                let b = 2.0 * PI * radical_inverse(k, 5);
                let (c, s) = (u.sqrt(), (1.0 - u).sqrt());
                vec![c * a.cos(), c * a.sin(), s * b.cos(), s * b.sin()]
            })
            .collect()),
        _ => Err(Error::Unsupported(format!("sphere sampling on R^{dim}"))),
    }
}

fn probe_points(a: &dyn PhaseFunction, count: usize) -> Result<Vec<Vec<f64>>> {
    let mut pts = sphere_samples(a.phase_dim(), count)?;
    pts.extend(a.null_directions());
    Ok(pts)
}

fn check_radii(radii: &[f64], r0: f64) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Argument("no radii given".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("radii must be strictly increasing".into()));
    }
    if radii[0] < r0 {
        return Err(Error::Argument(format!("radius {} is below R0 = {r0}", radii[0])));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereStats {
    pub radius: f64,
    pub min_abs: f64,
    pub max_abs: f64,
    /// `min |a| / R^{m₀}`.
    pub lower_ratio: f64,
    /// `max |a| / R^{m₁}`.
    pub upper_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub m0: f64,
    pub m1: f64,
    pub samples_per_sphere: usize,
    pub per_radius: Vec<SphereStats>,
    pub c0_est: f64,
    pub c1_est: f64,
    pub violations: Vec<String>,
}

impl GrowthReport {
    pub fn lower_bound_holds(&self) -> bool {
        self.c0_est >= LOWER_BOUND_FLOOR
    }
}

/// Sphere statistics of `|a|` against `R^{m₀}` and `R^{m₁}`.
pub fn growth_envelope(a: &dyn PhaseFunction, m0: f64, m1: f64, radii: &[f64], samples: usize) -> Result<GrowthReport> {
    check_radii(radii, DEFAULT_R0)?;
    let dirs = probe_points(a, samples)?;
    let mut per_radius = Vec::with_capacity(radii.len());
    for &r in radii {
        let vals: Vec<f64> = dirs
            .iter()
            .map(|d| {
                let z: Vec<f64> = d.iter().map(|c| c * r).collect();
                a.eval(&z).norm()
            })
            .collect();
        let min_abs = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_abs = vals.iter().cloned().fold(0.0, f64::max);
        per_radius.push(SphereStats {
            radius: r,
            min_abs,
            max_abs,
            lower_ratio: min_abs / r.powf(m0),
            upper_ratio: max_abs / r.powf(m1),
        });
    }
    let c0_est = per_radius.iter().map(|s| s.lower_ratio).fold(f64::INFINITY, f64::min);
    let c1_est = per_radius.iter().map(|s| s.upper_ratio).fold(0.0, f64::max);
    let mut violations = Vec::new();
    if c0_est < LOWER_BOUND_FLOOR {
        let worst = per_radius.iter().find(|s| s.lower_ratio < LOWER_BOUND_FLOOR).map(|s| s.radius).unwrap_or(radii[0]);
        violations.push(format!("lower bound fails: min |a| / R^{m0} = {c0_est:.3e} (first at R = {worst})"));
    }
    Ok(GrowthReport { m0, m1, samples_per_sphere: dirs.len(), per_radius, c0_est, c1_est, violations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub rho: f64,
    /// `sup |∂^α a| R^{ρ|α|} / |a|` for `|α| = 1` and `|α| = 2`; `None` when `|a|` vanished.
    pub order1: Option<f64>,
    pub order2: Option<f64>,
    pub vanishing_samples: usize,
    pub per_radius: Vec<(f64, Option<f64>, Option<f64>)>,
}

impl DerivativeReport {
    pub fn flagged_infinite(&self) -> bool {
        self.vanishing_samples > 0
    }
}

/// Central finite differences with step `1e-4·R`.
pub fn derivative_ratio(a: &dyn PhaseFunction, rho: f64, radii: &[f64], samples: usize) -> Result<DerivativeReport> {
    check_radii(radii, DEFAULT_R0)?;
    let dirs = probe_points(a, samples)?;
    let d = a.phase_dim();
    let mut vanishing = 0;
    let mut per_radius = Vec::new();
    let (mut w1, mut w2) = (0.0_f64, 0.0_f64);
    for &r in radii {
        let h = 1e-4 * r;
        let (mut r1, mut r2) = (0.0_f64, 0.0_f64);
        let mut hit = false;
        for dir in &dirs {
            let z: Vec<f64> = dir.iter().map(|c| c * r).collect();
            let a0 = a.eval(&z);
            if a0.norm() < VANISHING_FLOOR {
                vanishing += 1;
                hit = true;
                continue;
            }
            let at = |shifts: &[(usize, f64)]| {
                let mut p = z.clone();
                for &(i, s) in shifts {
                    p[i] += s;
                }
                a.eval(&p)
            };
            for i in 0..d {
                let g = (at(&[(i, h)]) - at(&[(i, -h)])) / (2.0 * h);
                r1 = r1.max(g.norm() * r.powf(rho) / a0.norm());
                for j in i..d {
                    let hess = if i == j {
                        (at(&[(i, h)]) - a0 * 2.0 + at(&[(i, -h)])) / (h * h)
                    } else {
                        (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)]) + at(&[(i, -h), (j, -h)]))
                            / (4.0 * h * h)
                    };
                    r2 = r2.max(hess.norm() * r.powf(2.0 * rho) / a0.norm());
                }
            }
        }
        if hit {
            per_radius.push((r, None, None));
        } else {
            per_radius.push((r, Some(r1), Some(r2)));
            w1 = w1.max(r1);
            w2 = w2.max(r2);
        }
    }
    let finite = vanishing == 0;
    Ok(DerivativeReport {
        rho,
        order1: finite.then_some(w1),
        order2: finite.then_some(w2),
        vanishing_samples: vanishing,
        per_radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub rho: f64,
    pub m0: f64,
    pub m1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub symbol: String,
    pub params: ClassParams,
    pub passes: bool,
    pub witnesses: Vec<String>,
    pub growth: GrowthReport,
    pub derivatives: DerivativeReport,
    pub note: String,
}

/// Aggregate both diagnostics.
pub fn classify(a: &dyn PhaseFunction, params: ClassParams, radii: &[f64], samples: usize) -> Result<ClassReport> {
    let growth = growth_envelope(a, params.m0, params.m1, radii, samples)?;
    let derivatives = derivative_ratio(a, params.rho, radii, samples)?;
    let mut witnesses = growth.violations.clone();
    if derivatives.flagged_infinite() {
        witnesses.push(format!("|a| < {VANISHING_FLOOR:.0e} at {} sample(s): derivative ratios unbounded", derivatives.vanishing_samples));
    }
    Ok(ClassReport {
        symbol: a.describe(),
        params,
        passes: witnesses.is_empty(),
        witnesses,
        growth,
        derivatives,
        note: "sampled evidence, not a proof".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_unit_vectors() {
        for d in [2, 4] {
            for p in sphere_samples(d, 100).unwrap() {
                let n: f64 = p.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-14);
            }
        }
        assert!(sphere_samples(3, 10).is_err());
    }

    #[test]
    fn radii_validation() {
        let h = crate::symbol::QuadraticSymbol::oscillator(1);
        assert!(growth_envelope(&h, 2.0, 2.0, &[], 10).is_err());
        assert!(growth_envelope(&h, 2.0, 2.0, &[6.0, 5.5], 10).is_err());
        assert!(growth_envelope(&h, 2.0, 2.0, &[1.0], 10).is_err());
    }
}
