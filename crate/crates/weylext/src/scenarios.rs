//! Reproducible experiments behind the `weylext` command line.
//!
//! Each scenario parses a JSON config (unknown keys rejected, missing keys
//! defaulted), runs a pipeline and returns a [`Report`] of named checks with
//! their tolerances plus CSV-ready tables.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::extension::{extend_quadratic, extend_symbol, ExtensionSpec, ExtensionSpecJson, Realization};
use crate::grid::{Axis, Grid, StateVector};
use crate::hermite::{hermite_oracle, hermite_products, HermiteSeries};
use crate::intertwine::{
    bopp_intertwiner_closed, build_intertwiner, first_nonvanishing_projection, gram_check, gram_spectrum, intertwined_family,
    kernel_probe, nonhypoellipticity_witness, plane_wave, spectrum_report, transfer_eigenpairs,
    SpectrumReport, SpectrumRoute, WitnessParams,
};
use crate::linalg::{eigh, OperatorMatrix};
use crate::metaplectic::{build_metaplectic, inverse_metaplectic};
use crate::shubin::{classify, ClassParams};
use crate::symbol::{FnSymbol, GaussianSymbol, QuadraticSymbol, ScaledSymbol, SharedSymbol};
use crate::symplectic::{w_from_symplectic, SymplecticMatrix};
use crate::weyl::{quantize, quantize_quadratic, SampledSymbol};
use crate::wigner::{bopp_operator, bopp_operator_quadratic, bopp_quadratic, BoppSymbol};

pub const TOOL: &str = "weylext";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    HoSpectrum,
    Landau,
    Bopp,
    Covariance,
    IntertwineCheck,
    Shubin,
    Witness,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::HoSpectrum,
        Scenario::Landau,
        Scenario::Bopp,
        Scenario::Covariance,
        Scenario::IntertwineCheck,
        Scenario::Shubin,
        Scenario::Witness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::HoSpectrum => "ho-spectrum",
            Scenario::Landau => "landau",
            Scenario::Bopp => "bopp",
            Scenario::Covariance => "covariance",
            Scenario::IntertwineCheck => "intertwine-check",
            Scenario::Shubin => "shubin",
            Scenario::Witness => "witness",
        }
    }

    /// The default config as pretty JSON.
    pub fn default_config(self) -> String {
        let v = match self {
            Scenario::HoSpectrum => serde_json::to_value(HoSpectrumConfig::default()),
            Scenario::Landau => serde_json::to_value(LandauConfig::default()),
            Scenario::Bopp => serde_json::to_value(BoppConfig::default()),
            Scenario::Covariance => serde_json::to_value(CovarianceConfig::default()),
            Scenario::IntertwineCheck => serde_json::to_value(IntertwineConfig::default()),
            Scenario::Shubin => serde_json::to_value(ShubinConfig::default()),
            Scenario::Witness => serde_json::to_value(WitnessConfig::default()),
        };
        serde_json::to_string_pretty(&v.expect("default configs serialize")).expect("json")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Holds,
}

/// One named comparison against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, relation: Relation::AtMost, pass: value <= tolerance }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, relation: Relation::AtLeast, pass: value >= tolerance }
    }

    /// Boolean outcome; `value` is 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, tolerance: 1.0, relation: Relation::Holds, pass: ok }
    }
}

/// A CSV table: header row plus string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, headers: &[&str]) -> Self {
        Self { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Scenario result. Field order is the JSON key order.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub config: Value,
    pub grids: BTreeMap<String, Grid>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub details: Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

struct Outcome {
    grids: BTreeMap<String, Grid>,
    checks: Vec<Check>,
    details: Value,
    tables: Vec<Table>,
}

fn parse<T: DeserializeOwned>(raw: &str) -> Result<T> {
    serde_json::from_str(raw).map_err(|e| Error::Config(e.to_string()))
}

/// Parse `raw` for `scenario`, run it and assemble the report.
pub fn run(scenario: Scenario, raw: &str, seed: u64) -> Result<Report> {
    let (config, out) = match scenario {
        Scenario::HoSpectrum => with_config(raw, ho_spectrum)?,
        Scenario::Landau => with_config(raw, landau)?,
        Scenario::Bopp => with_config(raw, bopp)?,
        Scenario::Covariance => with_config(raw, |c| covariance(c, seed))?,
        Scenario::IntertwineCheck => with_config(raw, intertwine_check)?,
        Scenario::Shubin => with_config(raw, shubin)?,
        Scenario::Witness => with_config(raw, witness)?,
    };
    let tolerances = out.checks.iter().map(|c| (c.name.clone(), c.tolerance)).collect();
    Ok(Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        scenario,
        seed,
        config,
        grids: out.grids,
        tolerances,
        pass: out.checks.iter().all(|c| c.pass),
        checks: out.checks,
        details: out.details,
        tables: out.tables,
    })
}

fn with_config<T: DeserializeOwned + Serialize>(raw: &str, f: impl FnOnce(&T) -> Result<Outcome>) -> Result<(Value, Outcome)> {
    let cfg: T = parse(raw)?;
    let echo = serde_json::to_value(&cfg).map_err(|e| Error::Config(e.to_string()))?;
    Ok((echo, f(&cfg)?))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

// ---------------------------------------------------------------- configs

/// Which extension to use.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecConfig {
    Identity,
    Landau,
    Bopp,
    Custom(ExtensionSpecJson),
}

impl SpecConfig {
    pub fn build(&self) -> Result<ExtensionSpec> {
        Ok(match self {
            SpecConfig::Identity => ExtensionSpec::identity(1, 1),
            SpecConfig::Landau => ExtensionSpec::landau(),
            SpecConfig::Bopp => ExtensionSpec::bopp(1),
            SpecConfig::Custom(j) => ExtensionSpec::from_json(j.clone())?,
        })
    }

    /// Cell area `Δ²N` per axis that makes this extension's metaplectic kernel unitary on the grid.
    fn self_dual_area(&self) -> f64 {
        match self {
            SpecConfig::Bopp => PI,
            _ => 2.0 * PI,
        }
    }

    /// The one-dimensional axis used for both `x` and `y`.
    pub fn axis(&self, points: usize, half_width: Option<f64>) -> Result<Axis> {
        match half_width {
            Some(l) => Axis::new(l, points),
            None => Axis::from_cell_area(points, self.self_dual_area()),
        }
    }
}

/// Closed-form symbols that configs can name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolConfig {
    /// `|x|² + |ξ|²` on `R^{2·half_dim}`.
    Oscillator {
        #[serde(default = "one")]
        half_dim: usize,
    },
    /// `½ Mz·z + v·z + c`.
    Quadratic {
        m: Vec<Vec<f64>>,
        #[serde(default)]
        v: Vec<f64>,
        #[serde(default)]
        c: f64,
    },
    /// `amplitude · exp(-Σ w (z - c)²)`.
    Gaussian {
        center: Vec<f64>,
        weights: Vec<f64>,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// `(a ⊗ 1) ∘ s`.
    Extended { base: Box<SymbolConfig>, spec: SpecConfig },
    /// `a(x - ½η, y + ½ξ)`.
    Bopp { base: Box<SymbolConfig> },
    Scaled { factor: f64, inner: Box<SymbolConfig> },
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

impl SymbolConfig {
    /// Exact quadratic form when the symbol is polynomial of degree ≤ 2.
    pub fn quadratic(&self) -> Result<Option<QuadraticSymbol>> {
        Ok(match self {
            SymbolConfig::Oscillator { half_dim } => {
                if *half_dim == 0 {
                    return Err(Error::Config("half_dim must be at least 1".into()));
                }
                Some(QuadraticSymbol::oscillator(*half_dim))
            }
            SymbolConfig::Quadratic { m, v, c } => {
                let d = m.len();
                if m.iter().any(|r| r.len() != d) {
                    return Err(Error::Config("quadratic m must be square".into()));
                }
                let v = if v.is_empty() { vec![0.0; d] } else { v.clone() };
                Some(QuadraticSymbol::new(Mat::from_fn(d, d, |i, j| m[i][j]), v, *c)?)
            }
            SymbolConfig::Gaussian { .. } => None,
            SymbolConfig::Extended { base, spec } => match base.quadratic()? {
                Some(q) => Some(extend_quadratic(&q, &spec.build()?)?),
                None => None,
            },
            SymbolConfig::Bopp { base } => match base.quadratic()? {
                Some(q) => Some(bopp_quadratic(&q)?),
                None => None,
            },
            SymbolConfig::Scaled { factor, inner } => inner.quadratic()?.map(|q| q.scaled(*factor)),
        })
    }

    pub fn build(&self) -> Result<SharedSymbol> {
        if let Some(q) = self.quadratic()? {
            return Ok(Arc::new(q));
        }
        Ok(match self {
            SymbolConfig::Gaussian { center, weights, amplitude } => Arc::new(GaussianSymbol::new(center.clone(), weights.clone(), *amplitude)?),
            SymbolConfig::Extended { base, spec } => Arc::new(extend_symbol(base.build()?, &spec.build()?)?),
            SymbolConfig::Bopp { base } => Arc::new(BoppSymbol::new(base.build()?)?),
            SymbolConfig::Scaled { factor, inner } => Arc::new(ScaledSymbol { factor: C64::new(*factor, 0.0), inner: inner.build()? }),
            SymbolConfig::Oscillator { .. } | SymbolConfig::Quadratic { .. } => unreachable!("quadratic symbols returned above"),
        })
    }

    fn standard_gaussian() -> Self {
        SymbolConfig::Gaussian { center: vec![0.0, 0.0], weights: vec![1.0, 1.0], amplitude: 1.0 }
    }
}

fn oscillator_op(grid: &Grid) -> Result<OperatorMatrix> {
    quantize_quadratic(&QuadraticSymbol::oscillator(1), grid)
}

fn line(axis: Axis) -> Grid {
    Grid::new(vec![axis]).expect("non-empty")
}

fn plane(axis: Axis) -> Grid {
    line(axis).product(&line(axis))
}

fn grids(entries: &[(&str, &Grid)]) -> BTreeMap<String, Grid> {
    entries.iter().map(|(k, g)| (k.to_string(), (*g).clone())).collect()
}

// ------------------------------------------------------------ ho-spectrum

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HoSpectrumConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub n_eigs: usize,
    pub tolerance: f64,
}

impl Default for HoSpectrumConfig {
    fn default() -> Self {
        Self { half_width: 8.0, points: 64, n_eigs: 6, tolerance: 1e-6 }
    }
}

fn ho_spectrum(cfg: &HoSpectrumConfig) -> Result<Outcome> {
    positive("tolerance", cfg.tolerance)?;
    let g = Grid::line(cfg.half_width, cfg.points)?;
    if cfg.n_eigs > g.len() {
        return Err(Error::Config(format!("n_eigs = {} exceeds the {} grid points", cfg.n_eigs, g.len())));
    }
    let a = oscillator_op(&g)?;
    let e = eigh(&a)?;
    let mut table = Table::new("eigenvalues", &["j", "eigenvalue", "target", "error"]);
    let mut worst = 0.0_f64;
    let mut rows = Vec::new();
    for j in 0..cfg.n_eigs {
        let target = (2 * j + 1) as f64;
        let err = (e.values[j] - target).abs();
        worst = worst.max(err);
        table.push(vec![j.to_string(), num(e.values[j]), num(target), num(err)]);
        rows.push(json!({"j": j, "eigenvalue": e.values[j], "target": target, "error": err}));
    }
    let checks = if cfg.n_eigs == 0 { Vec::new() } else { vec![Check::at_most("max_eigenvalue_error", worst, cfg.tolerance)] };
    Ok(Outcome {
        grids: grids(&[("x", &g)]),
        checks,
        details: json!({"hermiticity_defect": e.hermiticity_defect, "eigenvalues": rows}),
        tables: vec![table],
    })
}

// ----------------------------------------------------------------- landau

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandauConfig {
    /// Points per axis; the half-width is chosen so that `Δ²N = 2π`.
    #[serde(rename = "N")]
    pub points: usize,
    pub n_clusters: usize,
    pub cluster_tolerance: f64,
    pub min_multiplicity: usize,
    pub route_tolerance: f64,
    pub n_transfer: usize,
    pub residual_tolerance: f64,
    pub hermiticity_tolerance: f64,
}

impl Default for LandauConfig {
    fn default() -> Self {
        Self {
            points: 32,
            n_clusters: 4,
            cluster_tolerance: 1e-3,
            min_multiplicity: 4,
            route_tolerance: 1e-3,
            n_transfer: 4,
            residual_tolerance: 1e-5,
            hermiticity_tolerance: 1e-6,
        }
    }
}

fn cluster_table(name: &str, reports: &[&SpectrumReport]) -> Table {
    let mut t = Table::new(name, &["route", "index", "value", "multiplicity", "min", "max", "max_residual"]);
    for r in reports {
        let route = serde_json::to_value(r.route).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        for (i, c) in r.clusters.iter().enumerate() {
            t.push(vec![route.clone(), i.to_string(), num(c.value), c.multiplicity.to_string(), num(c.min), num(c.max), num(c.max_residual)]);
        }
    }
    t
}

/// Lowest `count` numerical eigenpairs of `a`, normalized in the weighted norm.
fn lowest_pairs(a: &OperatorMatrix, count: usize) -> Result<Vec<(f64, StateVector)>> {
    let e = eigh(a)?;
    if count > e.values.len() {
        return Err(Error::Config(format!("requested {count} eigenpairs from a {}-point grid", e.values.len())));
    }
    Ok((0..count).map(|k| (e.values[k], e.state(&a.in_grid, k))).collect())
}

fn transfer_table(name: &str, ext: &OperatorMatrix, pairs: &[(f64, StateVector)], r: &Realization) -> Result<(Table, f64)> {
    let chis: Vec<StateVector> = pairs.iter().map(|(_, v)| v.clone()).collect();
    let transferred = transfer_eigenpairs(ext, pairs, r, &chis)?;
    let mut t = Table::new(name, &["j", "l", "lambda", "relative_residual"]);
    let mut worst = 0.0_f64;
    for p in &transferred {
        let rel = p.residual / (p.lambda.abs().max(1.0) * p.vector.norm());
        worst = worst.max(rel);
        t.push(vec![p.j.to_string(), p.l.to_string(), num(p.lambda), num(rel)]);
    }
    Ok((t, worst))
}

fn landau(cfg: &LandauConfig) -> Result<Outcome> {
    for (n, v) in [
        ("cluster_tolerance", cfg.cluster_tolerance),
        ("route_tolerance", cfg.route_tolerance),
        ("residual_tolerance", cfg.residual_tolerance),
        ("hermiticity_tolerance", cfg.hermiticity_tolerance),
    ] {
        positive(n, v)?;
    }
    let ax = SpecConfig::Landau.axis(cfg.points, None)?;
    let (gx, g2) = (line(ax), plane(ax));
    let spec = ExtensionSpec::landau();
    let r = spec.realize(&gx, &gx)?;
    let a = oscillator_op(&gx)?;
    let ext = r.extend_operator(&a)?;
    let tensor = spectrum_report(&ext, SpectrumRoute::Intertwined)?;
    let direct_op = quantize_quadratic(&extend_quadratic(&QuadraticSymbol::oscillator(1), &spec)?, &g2)?;
    let direct = spectrum_report(&direct_op, SpectrumRoute::Direct)?;

    let mut checks = vec![Check::at_least("cluster_count", tensor.clusters.len() as f64, cfg.n_clusters as f64)];
    let mut value_err = 0.0_f64;
    let mut min_mult = usize::MAX;
    let mut route_gap = 0.0_f64;
    for (j, c) in tensor.clusters.iter().take(cfg.n_clusters).enumerate() {
        value_err = value_err.max((c.value - (2 * j + 1) as f64).abs());
        min_mult = min_mult.min(c.multiplicity);
        let nearest = direct.eigenvalues.iter().map(|d| (d - c.value).abs()).fold(f64::INFINITY, f64::min);
        route_gap = route_gap.max(nearest);
    }
    if cfg.n_clusters > 0 {
        checks.push(Check::at_most("cluster_value_error", value_err, cfg.cluster_tolerance));
        checks.push(Check::at_least("min_multiplicity", min_mult as f64, cfg.min_multiplicity as f64));
        checks.push(Check::at_most("route_discrepancy", route_gap, cfg.route_tolerance));
    }
    checks.push(Check::at_most("extended_hermiticity_defect", ext.hermiticity_defect(), cfg.hermiticity_tolerance));
    let pairs = lowest_pairs(&a, cfg.n_transfer)?;
    let (ttable, worst) = transfer_table("transfer", &ext, &pairs, &r)?;
    if cfg.n_transfer > 0 {
        checks.push(Check::at_most("transfer_relative_residual", worst, cfg.residual_tolerance));
    }
    Ok(Outcome {
        grids: grids(&[("x", &gx), ("y", &gx), ("product", &g2)]),
        checks,
        details: json!({
            "spec": spec.to_json(),
            "tensor_route": tensor,
            "direct_route": direct,
        }),
        tables: vec![cluster_table("clusters", &[&tensor, &direct]), ttable],
    })
}

// ------------------------------------------------------------------- bopp

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoppConfig {
    /// Points per axis; the half-width is chosen so that `Δ²N = π`.
    #[serde(rename = "N")]
    pub points: usize,
    pub n_hermite: usize,
    pub n_clusters: usize,
    pub cluster_tolerance: f64,
    pub min_multiplicity: usize,
    pub gram_tolerance: f64,
    pub closed_form_pairs: usize,
    pub closed_form_tolerance: f64,
    /// Number of `χ = h_l` used in the direct-route eigen-check.
    pub eigen_check_chi: usize,
    pub eigen_tolerance: f64,
    pub transfer_tolerance: f64,
    pub coherence_symbol: SymbolConfig,
    pub coherence_tolerance: f64,
}

impl Default for BoppConfig {
    fn default() -> Self {
        Self {
            points: 48,
            n_hermite: 4,
            n_clusters: 4,
            cluster_tolerance: 1e-3,
            min_multiplicity: 4,
            gram_tolerance: 1e-6,
            closed_form_pairs: 2,
            closed_form_tolerance: 1e-6,
            eigen_check_chi: 2,
            eigen_tolerance: 1e-5,
            transfer_tolerance: 1e-5,
            coherence_symbol: SymbolConfig::standard_gaussian(),
            coherence_tolerance: 1e-4,
        }
    }
}

fn bopp(cfg: &BoppConfig) -> Result<Outcome> {
    for (n, v) in [
        ("cluster_tolerance", cfg.cluster_tolerance),
        ("gram_tolerance", cfg.gram_tolerance),
        ("closed_form_tolerance", cfg.closed_form_tolerance),
        ("eigen_tolerance", cfg.eigen_tolerance),
        ("transfer_tolerance", cfg.transfer_tolerance),
        ("coherence_tolerance", cfg.coherence_tolerance),
    ] {
        positive(n, v)?;
    }
    if cfg.n_hermite == 0 || cfg.eigen_check_chi > cfg.n_hermite || cfg.closed_form_pairs > cfg.n_hermite {
        return Err(Error::Config("need 1 <= n_hermite and eigen_check_chi, closed_form_pairs <= n_hermite".into()));
    }
    let ax = SpecConfig::Bopp.axis(cfg.points, None)?;
    let (gx, g2) = (line(ax), plane(ax));
    let r = ExtensionSpec::bopp(1).realize(&gx, &gx)?;
    let h = oscillator_op(&gx)?;
    let hs = hermite_oracle(cfg.n_hermite - 1, &gx)?;
    let mut checks = Vec::new();

    let ext = r.extend_operator(&h)?;
    let tensor = spectrum_report(&ext, SpectrumRoute::Intertwined)?;
    checks.push(Check::at_least("cluster_count", tensor.clusters.len() as f64, cfg.n_clusters as f64));
    let mut value_err = 0.0_f64;
    let mut min_mult = usize::MAX;
    for (j, c) in tensor.clusters.iter().take(cfg.n_clusters).enumerate() {
        value_err = value_err.max((c.value - (2 * j + 1) as f64).abs());
        min_mult = min_mult.min(c.multiplicity);
    }
    if cfg.n_clusters > 0 {
        checks.push(Check::at_most("cluster_value_error", value_err, cfg.cluster_tolerance));
        checks.push(Check::at_least("min_multiplicity", min_mult as f64, cfg.min_multiplicity as f64));
    }

    checks.push(Check::at_most("gram_deviation", gram_check(&r, &hs, &hs)?, cfg.gram_tolerance));

    let mut closed = Table::new("closed_form", &["j", "l", "relative_error"]);
    let mut closed_worst = 0.0_f64;
    for j in 0..cfg.closed_form_pairs {
        for l in 0..cfg.closed_form_pairs {
            let (phi, chi) = (HermiteSeries::basis(j), HermiteSeries::basis(l));
            let generic = build_intertwiner(&r, &chi.sample(&gx)?)?.apply(&phi.sample(&gx)?)?;
            let cf = bopp_intertwiner_closed(&phi, &chi, &g2)?;
            let e = generic.sub(&cf)?.norm() / cf.norm();
            closed_worst = closed_worst.max(e);
            closed.push(vec![j.to_string(), l.to_string(), num(e)]);
        }
    }
    if cfg.closed_form_pairs > 0 {
        checks.push(Check::at_most("closed_form_relative_error", closed_worst, cfg.closed_form_tolerance));
    }

    let direct = bopp_operator_quadratic(&QuadraticSymbol::oscillator(1), &g2)?;
    let mut eig = Table::new("eigen_check", &["route", "j", "l", "relative_residual"]);
    let (mut direct_worst, mut tensor_worst) = (0.0_f64, 0.0_f64);
    for (l, chi) in hs.iter().enumerate() {
        let t = build_intertwiner(&r, chi)?;
        for (j, phi) in hs.iter().enumerate() {
            let v = t.apply(phi)?;
            let lam = C64::new((2 * j + 1) as f64, 0.0);
            let scale = lam.re * v.norm();
            let rt = r.apply_extended(&h, &v)?.sub(&v.scaled(lam))?.norm() / scale;
            tensor_worst = tensor_worst.max(rt);
            eig.push(vec!["tensor".into(), j.to_string(), l.to_string(), num(rt)]);
            if l < cfg.eigen_check_chi {
                let rd = direct.apply(&v)?.sub(&v.scaled(lam))?.norm() / scale;
                direct_worst = direct_worst.max(rd);
                eig.push(vec!["direct".into(), j.to_string(), l.to_string(), num(rd)]);
            }
        }
    }
    checks.push(Check::at_most("transfer_relative_residual", tensor_worst, cfg.transfer_tolerance));
    if cfg.eigen_check_chi > 0 {
        checks.push(Check::at_most("direct_eigen_check", direct_worst, cfg.eigen_tolerance));
    }

    let sym = cfg.coherence_symbol.build()?;
    if sym.phase_dim() != 2 {
        return Err(Error::Config("coherence_symbol must live on R^2".into()));
    }
    let op_direct = match cfg.coherence_symbol.quadratic()? {
        Some(q) => bopp_operator_quadratic(&q, &g2)?,
        None => bopp_operator(sym.clone(), &g2)?,
    };
    let op_a = match cfg.coherence_symbol.quadratic()? {
        Some(q) => quantize_quadratic(&q, &gx)?,
        None => quantize(&SampledSymbol::sample(&gx, sym.as_ref())?),
    };
    let op_ext = r.extend_operator(&op_a)?;
    let mut coherence = 0.0_f64;
    for (_, _, v) in hermite_products(cfg.n_hermite - 1, &g2)? {
        coherence = coherence.max(op_direct.apply(&v)?.sub(&op_ext.apply(&v)?)?.norm() / v.norm());
    }
    checks.push(Check::at_most("bopp_extension_coherence", coherence, cfg.coherence_tolerance));

    Ok(Outcome {
        grids: grids(&[("x", &gx), ("y", &gx), ("product", &g2)]),
        checks,
        details: json!({
            "spec": ExtensionSpec::bopp(1).to_json(),
            "tensor_route": tensor,
            "coherence_symbol": sym.describe(),
        }),
        tables: vec![cluster_table("clusters", &[&tensor]), closed, eig],
    })
}

// ------------------------------------------------------------- covariance

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CovarianceConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub symbol: SymbolConfig,
    pub draws: usize,
    /// Rotation angle range; `s = R(θ) diag(r, 1/r)` is free when `sin θ ≠ 0`.
    pub theta_range: [f64; 2],
    pub squeeze_range: [f64; 2],
    pub n_hermite: usize,
    pub tolerance: f64,
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            points: 64,
            symbol: SymbolConfig::Gaussian { center: vec![0.2, -0.1], weights: vec![0.5, 0.8], amplitude: 1.0 },
            draws: 5,
            theta_range: [0.8, 2.3],
            squeeze_range: [0.8, 1.25],
            n_hermite: 5,
            tolerance: 1e-5,
        }
    }
}

fn covariance(cfg: &CovarianceConfig, seed: u64) -> Result<Outcome> {
    positive("tolerance", cfg.tolerance)?;
    let [t0, t1] = cfg.theta_range;
    let [r0, r1] = cfg.squeeze_range;
    if !(t0 < t1) || !(0.0 < r0 && r0 < r1) {
        return Err(Error::Config("ranges must be increasing and squeeze_range positive".into()));
    }
    let g = Grid::line(cfg.half_width, cfg.points)?;
    let a = cfg.symbol.build()?;
    if a.phase_dim() != 2 {
        return Err(Error::Config("covariance symbol must live on R^2".into()));
    }
    let op_a = quantize(&SampledSymbol::sample(&g, a.as_ref())?);
    let hs = if cfg.n_hermite == 0 { Vec::new() } else { hermite_oracle(cfg.n_hermite - 1, &g)? };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new("residuals", &["draw", "theta", "squeeze", "j", "relative_residual"]);
    let mut draws = Vec::new();
    let mut worst = 0.0_f64;
    for d in 0..cfg.draws {
        let theta = rng.gen_range(t0..t1);
        let sq = rng.gen_range(r0..r1);
        let s = SymplecticMatrix::rotation(1, theta).compose(&SymplecticMatrix::squeeze(1, sq))?;
        let w = w_from_symplectic(&s)?;
        let big_s = build_metaplectic(&w, &g, &g)?;
        let big_s_inv = inverse_metaplectic(&w, &g, &g)?;
        let (sc, ac) = (s.clone(), a.clone());
        let composed = FnSymbol { phase_dim: 2, f: move |z: &[f64]| ac.eval(&sc.apply(z)), label: "a∘s".into() };
        let lhs = quantize(&SampledSymbol::sample(&g, &composed)?);
        let rhs = big_s_inv.compose(&op_a.compose(&big_s)?)?;
        let mut draw_worst = 0.0_f64;
        for (j, v) in hs.iter().enumerate() {
            let e = lhs.apply(v)?.sub(&rhs.apply(v)?)?.norm() / v.norm();
            draw_worst = draw_worst.max(e);
            table.push(vec![d.to_string(), num(theta), num(sq), j.to_string(), num(e)]);
        }
        worst = worst.max(draw_worst);
        draws.push(json!({"theta": theta, "squeeze": sq, "s": s, "max_relative_residual": draw_worst}));
    }
    let checks = if cfg.draws == 0 || hs.is_empty() { Vec::new() } else { vec![Check::at_most("max_covariance_residual", worst, cfg.tolerance)] };
    Ok(Outcome {
        grids: grids(&[("x", &g)]),
        checks,
        details: json!({"symbol": a.describe(), "convention": "Op(a∘s) = S⁻¹ Op(a) S with S built from W(s)", "draws": draws}),
        tables: vec![table],
    })
}

// ------------------------------------------------------- intertwine-check

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntertwineConfig {
    pub spec: SpecConfig,
    #[serde(rename = "N")]
    pub points: usize,
    /// Optional half-width; by default the extension's self-dual box is used.
    #[serde(rename = "L")]
    pub half_width: Option<f64>,
    pub n_hermite: usize,
    pub gram_tolerance: f64,
    pub isometry_tolerance: f64,
    pub residual_tolerance: f64,
    pub condition_tolerance: f64,
}

impl Default for IntertwineConfig {
    fn default() -> Self {
        Self {
            spec: SpecConfig::Landau,
            points: 48,
            half_width: None,
            n_hermite: 4,
            gram_tolerance: 1e-6,
            isometry_tolerance: 1e-6,
            residual_tolerance: 1e-5,
            condition_tolerance: 1e-4,
        }
    }
}

fn intertwine_check(cfg: &IntertwineConfig) -> Result<Outcome> {
    for (n, v) in [
        ("gram_tolerance", cfg.gram_tolerance),
        ("isometry_tolerance", cfg.isometry_tolerance),
        ("residual_tolerance", cfg.residual_tolerance),
        ("condition_tolerance", cfg.condition_tolerance),
    ] {
        positive(n, v)?;
    }
    if cfg.n_hermite == 0 {
        return Err(Error::Config("n_hermite must be at least 1".into()));
    }
    let spec = cfg.spec.build()?;
    if spec.n != 1 || spec.k != 1 {
        return Err(Error::Config("intertwine-check runs on n = k = 1 extensions".into()));
    }
    let ax = cfg.spec.axis(cfg.points, cfg.half_width)?;
    let (gx, g2) = (line(ax), plane(ax));
    let r = spec.realize(&gx, &gx)?;
    let h = oscillator_op(&gx)?;
    let hs = hermite_oracle(cfg.n_hermite - 1, &gx)?;
    let mut checks = Vec::new();

    checks.push(Check::at_most("gram_deviation", gram_check(&r, &hs, &hs)?, cfg.gram_tolerance));
    let fam: Vec<StateVector> = intertwined_family(&r, &hs, &hs)?.into_iter().map(|(_, _, v)| v).collect();
    let gs = gram_spectrum(&fam)?;
    checks.push(Check::holds("gram_full_rank", gs.rank == gs.size));
    checks.push(Check::at_most("gram_condition_excess", gs.condition - 1.0, cfg.condition_tolerance));

    let mut table = Table::new("intertwining", &["j", "l", "norm_defect", "adjoint_defect", "forward_residual", "backward_residual"]);
    let (mut iso, mut adj, mut res) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (l, chi) in hs.iter().enumerate() {
        let t = build_intertwiner(&r, chi)?;
        for (j, phi) in hs.iter().enumerate() {
            let tphi = t.apply(phi)?;
            let nd = (tphi.norm() - phi.norm()).abs();
            let ad = t.apply_adjoint(&tphi)?.sub(phi)?.norm();
            let fwd = r.apply_extended(&h, &tphi)?.sub(&t.apply(&h.apply(phi)?)?)?.norm() / phi.norm();
            let probe = phi.tensor(chi);
            let bwd = t.apply_adjoint(&r.apply_extended(&h, &probe)?)?.sub(&h.apply(&t.apply_adjoint(&probe)?)?)?.norm() / probe.norm();
            iso = iso.max(nd);
            adj = adj.max(ad);
            res = res.max(fwd).max(bwd);
            table.push(vec![j.to_string(), l.to_string(), num(nd), num(ad), num(fwd), num(bwd)]);
        }
    }
    checks.push(Check::at_most("partial_isometry_norm_defect", iso, cfg.isometry_tolerance));
    checks.push(Check::at_most("adjoint_left_inverse_defect", adj, cfg.isometry_tolerance));
    checks.push(Check::at_most("intertwining_residual", res, cfg.residual_tolerance));

    // Scan the χ basis for a projection of an extended eigenvector built from the last χ.
    let last = hs.len() - 1;
    let psi = r.apply_s_inv(&hs[0].tensor(&hs[last]))?;
    let found = first_nonvanishing_projection(&r, &psi, &hs, 1e-3)?;
    Ok(Outcome {
        grids: grids(&[("x", &gx), ("y", &gx), ("product", &g2)]),
        checks,
        details: json!({
            "spec": spec.to_json(),
            "gram_spectrum": gs,
            "first_nonvanishing_projection": found.map(|(l, p)| json!({"chi_index": l, "norm": p})),
        }),
        tables: vec![table],
    })
}

// ----------------------------------------------------------------- shubin

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShubinEntry {
    pub label: String,
    pub symbol: SymbolConfig,
    pub params: ClassParams,
    pub expect: Verdict,
    /// Require the sphere ratios to be independent of the radius.
    #[serde(default)]
    pub check_stability: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShubinConfig {
    pub radii: Vec<f64>,
    pub samples: usize,
    pub stability_tolerance: f64,
    /// Expected failures must show `min |a| ≤ vanishing_tolerance · R²` on every sphere.
    pub vanishing_tolerance: f64,
    pub symbols: Vec<ShubinEntry>,
}

impl Default for ShubinConfig {
    fn default() -> Self {
        let h0 = SymbolConfig::Oscillator { half_dim: 1 };
        let params = ClassParams { rho: 1.0, m0: 2.0, m1: 2.0 };
        Self {
            radii: vec![5.0, 10.0, 20.0, 40.0],
            samples: 1024,
            stability_tolerance: 1e-10,
            vanishing_tolerance: 1e-10,
            symbols: vec![
                ShubinEntry { label: "h0".into(), symbol: h0.clone(), params, expect: Verdict::Pass, check_stability: true },
                ShubinEntry {
                    label: "one_plus_norm_squared".into(),
                    symbol: SymbolConfig::Quadratic { m: vec![vec![2.0, 0.0], vec![0.0, 2.0]], v: vec![], c: 1.0 },
                    params: ClassParams { rho: 1.0, m0: 0.0, m1: 2.0 },
                    expect: Verdict::Pass,
                    check_stability: false,
                },
                ShubinEntry {
                    label: "landau".into(),
                    symbol: SymbolConfig::Extended { base: Box::new(h0.clone()), spec: SpecConfig::Landau },
                    params,
                    expect: Verdict::Fail,
                    check_stability: false,
                },
                ShubinEntry {
                    label: "bopp_h0".into(),
                    symbol: SymbolConfig::Bopp { base: Box::new(h0) },
                    params,
                    expect: Verdict::Fail,
                    check_stability: false,
                },
            ],
        }
    }
}

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let hi = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.fold(f64::INFINITY, f64::min);
    hi - lo
}

fn shubin(cfg: &ShubinConfig) -> Result<Outcome> {
    positive("stability_tolerance", cfg.stability_tolerance)?;
    positive("vanishing_tolerance", cfg.vanishing_tolerance)?;
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    let mut table = Table::new("spheres", &["label", "radius", "min_abs", "max_abs", "lower_ratio", "upper_ratio", "order1", "order2"]);
    let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "inf".into());
    for e in &cfg.symbols {
        let a = e.symbol.build()?;
        let rep = classify(a.as_ref(), e.params, &cfg.radii, cfg.samples).map_err(|err| match err {
            Error::Argument(m) | Error::Unsupported(m) => Error::Config(format!("{}: {m}", e.label)),
            other => other,
        })?;
        let got = if rep.passes { Verdict::Pass } else { Verdict::Fail };
        checks.push(Check::holds(format!("{}_verdict", e.label), got == e.expect));
        if e.check_stability {
            let s = spread(rep.growth.per_radius.iter().map(|s| s.lower_ratio)).max(spread(rep.growth.per_radius.iter().map(|s| s.upper_ratio)));
            checks.push(Check::at_most(format!("{}_radius_stability", e.label), s, cfg.stability_tolerance));
        }
        if e.expect == Verdict::Fail {
            let worst = rep.growth.per_radius.iter().map(|s| s.min_abs / (s.radius * s.radius)).fold(0.0, f64::max);
            checks.push(Check::at_most(format!("{}_sphere_minimum_over_r2", e.label), worst, cfg.vanishing_tolerance));
        }
        for (s, d) in rep.growth.per_radius.iter().zip(&rep.derivatives.per_radius) {
            table.push(vec![e.label.clone(), num(s.radius), num(s.min_abs), num(s.max_abs), num(s.lower_ratio), num(s.upper_ratio), opt(d.1), opt(d.2)]);
        }
        reports.push(json!({"label": e.label, "report": rep}));
    }
    Ok(Outcome {
        grids: BTreeMap::new(),
        checks,
        details: json!({"note": "sampled evidence, not a proof", "symbols": reports}),
        tables: vec![table],
    })
}

// ---------------------------------------------------------------- witness

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChiConfig {
    /// `e^{i ξ_k y}` with `ξ_k` the `offset`-th dual frequency above zero.
    PlaneWave { offset: i64 },
    /// Hermite function `h_j`.
    Hermite { j: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessConfig {
    pub spec: SpecConfig,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub half_width: Option<f64>,
    pub chi: ChiConfig,
    pub residual_tolerance: f64,
    pub min_outer_mass: f64,
    pub outer_fraction: f64,
    /// Whether a successful witness is expected (false for decaying `χ`).
    pub expect_witness: bool,
    pub kernel_check: bool,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        let p = WitnessParams::default();
        Self {
            spec: SpecConfig::Landau,
            points: 32,
            half_width: None,
            chi: ChiConfig::PlaneWave { offset: 3 },
            residual_tolerance: p.residual_tol,
            min_outer_mass: p.min_outer_mass,
            outer_fraction: p.outer_fraction,
            expect_witness: true,
            kernel_check: true,
        }
    }
}

fn witness(cfg: &WitnessConfig) -> Result<Outcome> {
    positive("residual_tolerance", cfg.residual_tolerance)?;
    if !(0.0..1.0).contains(&cfg.outer_fraction) || !(0.0..=1.0).contains(&cfg.min_outer_mass) {
        return Err(Error::Config("outer_fraction must lie in [0, 1) and min_outer_mass in [0, 1]".into()));
    }
    let spec = cfg.spec.build()?;
    if spec.n != 1 || spec.k != 1 {
        return Err(Error::Config("witness runs on n = k = 1 extensions".into()));
    }
    let ax = cfg.spec.axis(cfg.points, cfg.half_width)?;
    let gx = line(ax);
    let r = spec.realize(&gx, &gx)?;
    let chi = match cfg.chi {
        ChiConfig::PlaneWave { offset } => {
            let k = ax.points as i64 / 2 + offset;
            if k < 0 || k >= ax.points as i64 {
                return Err(Error::Config(format!("plane-wave offset {offset} is outside the frequency grid")));
            }
            plane_wave(&gx, &[ax.freq(k as usize)])
        }
        ChiConfig::Hermite { j } => HermiteSeries::basis(j).sample(&gx)?,
    };
    let h = oscillator_op(&gx)?;
    let a = h.shifted(-1.0)?;
    let params = WitnessParams { residual_tol: cfg.residual_tolerance, min_outer_mass: cfg.min_outer_mass, outer_fraction: cfg.outer_fraction };
    let rep = nonhypoellipticity_witness(&a, &r, &chi, params)?;
    let mut checks = vec![Check::holds("witness_outcome_as_expected", rep.success == cfg.expect_witness)];
    if cfg.expect_witness {
        checks.push(Check::at_most("residual_ratio", rep.residual_ratio, cfg.residual_tolerance));
        checks.push(Check::at_least("outer_mass_ratio", rep.outer_mass_ratio, cfg.min_outer_mass));
    }
    let mut probes = Vec::new();
    if cfg.kernel_check {
        for (name, op, expect) in [("h0", &h, false), ("h0_minus_identity", &a, true)] {
            let p = kernel_probe(op, &r.extend_operator(op)?)?;
            checks.push(Check::holds(format!("{name}_kernel_flags_agree"), p.consistent && p.has_kernel == expect));
            probes.push(json!({"operator": name, "probe": p}));
        }
    }
    let g2 = plane(ax);
    Ok(Outcome {
        grids: grids(&[("x", &gx), ("y", &gx), ("product", &g2)]),
        checks,
        details: json!({"spec": spec.to_json(), "witness": rep, "kernel_probes": probes}),
        tables: Vec::new(),
    })
}
