//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its own line, even when it passes.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weylext::extension::{extend_quadratic, ExtensionSpec};
use weylext::fourier::{dft, idft};
use weylext::grid::{Axis, Grid, StateVector};
use weylext::hermite::{hermite_oracle, HermiteSeries};
use weylext::intertwine::{
    bopp_intertwiner_closed, build_intertwiner, gram_check, kernel_probe, landau_intertwiner_closed,
    nonhypoellipticity_witness, plane_wave, spectrum_report, SpectrumRoute, WitnessParams,
};
use weylext::linalg::{eigvalsh, OperatorMatrix};
use weylext::metaplectic::{build_metaplectic, inverse_metaplectic};
use weylext::shubin::{classify, growth_envelope, ClassParams};
use weylext::symbol::{FnSymbol, GaussianSymbol, PhaseFunction, QuadraticSymbol};
use weylext::symplectic::{symplectic_from_w, w_from_symplectic, QuadraticFormW, SymplecticMatrix};
use weylext::weyl::{dequantize, quantize, quantize_quadratic, SampledSymbol};
use weylext::wigner::{bopp_quadratic, cross_wigner};

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn self_dual(points: usize, area: f64) -> Axis {
    Axis::from_cell_area(points, area).unwrap()
}

fn grid_of(axes: &[Axis]) -> Grid {
    Grid::new(axes.to_vec()).unwrap()
}

fn oscillator(grid: &Grid) -> OperatorMatrix {
    quantize_quadratic(&QuadraticSymbol::oscillator(1), grid).unwrap()
}

fn rel(a: &StateVector, b: &StateVector) -> f64 {
    a.sub(b).unwrap().norm() / b.norm()
}

fn c1_harmonic_oscillator() -> Outcome {
    let g = Grid::line(8.0, 64).map_err(err)?;
    let ev = eigvalsh(&oscillator(&g)).map_err(err)?;
    let worst = (0..6).map(|j| (ev[j] - (2 * j + 1) as f64).abs()).fold(0.0, f64::max);
    Ok((worst <= 1e-6, format!("max |λ_j - (2j+1)| = {worst:.2e} (tol 1e-6)")))
}

fn c2_landau() -> Outcome {
    let ax = self_dual(32, 2.0 * PI);
    let (gx, g2) = (grid_of(&[ax]), grid_of(&[ax, ax]));
    let spec = ExtensionSpec::landau();
    let r = spec.realize(&gx, &gx).map_err(err)?;
    let ext = r.extend_operator(&oscillator(&gx)).map_err(err)?;
    let tensor = spectrum_report(&ext, SpectrumRoute::Intertwined).map_err(err)?;
    let direct_op = quantize_quadratic(&extend_quadratic(&QuadraticSymbol::oscillator(1), &spec).map_err(err)?, &g2).map_err(err)?;
    let direct = eigvalsh(&direct_op).map_err(err)?;
    let mut ok = tensor.clusters.len() >= 4;
    let mut worst_val = 0.0_f64;
    let mut worst_route = 0.0_f64;
    let mut min_mult = usize::MAX;
    for (j, c) in tensor.clusters.iter().take(4).enumerate() {
        let target = (2 * j + 1) as f64;
        worst_val = worst_val.max((c.value - target).abs());
        min_mult = min_mult.min(c.multiplicity);
        let nearest = direct.iter().map(|d| (d - c.value).abs()).fold(f64::INFINITY, f64::min);
        worst_route = worst_route.max(nearest);
    }
    ok &= worst_val <= 1e-3 && min_mult >= 4 && worst_route <= 1e-3;
    Ok((
        ok,
        format!("cluster error {worst_val:.2e}, min multiplicity {min_mult}, route gap {worst_route:.2e} (tol 1e-3, mult >= 4)"),
    ))
}

fn random_free(rng: &mut ChaCha8Rng) -> SymplecticMatrix {
    let theta = rng.gen_range(0.8..2.3);
    let r = rng.gen_range(0.8..1.25);
    SymplecticMatrix::rotation(1, theta).compose(&SymplecticMatrix::squeeze(1, r)).unwrap()
}

fn c3_covariance() -> Outcome {
    let g = Grid::line(8.0, 64).map_err(err)?;
    let a = GaussianSymbol::new(vec![0.2, -0.1], vec![0.5, 0.8], 1.0).map_err(err)?;
    let op_a = quantize(&SampledSymbol::sample(&g, &a).map_err(err)?);
    let hs = hermite_oracle(4, &g).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let s = random_free(&mut rng);
        let w = w_from_symplectic(&s).map_err(err)?;
        let big_s = build_metaplectic(&w, &g, &g).map_err(err)?;
        let big_s_inv = inverse_metaplectic(&w, &g, &g).map_err(err)?;
        let (sc, ac) = (s.clone(), a.clone());
        let acs = FnSymbol { phase_dim: 2, f: move |z: &[f64]| ac.eval(&sc.apply(z)), label: "a∘s".into() };
        let lhs = quantize(&SampledSymbol::sample(&g, &acs).map_err(err)?);
        let rhs = big_s_inv.compose(&op_a.compose(&big_s).map_err(err)?).map_err(err)?;
        for v in &hs {
            let d = lhs.apply(v).map_err(err)?.sub(&rhs.apply(v).map_err(err)?).map_err(err)?;
            worst = worst.max(d.norm() / v.norm());
        }
    }
    Ok((worst <= 1e-5, format!("max ‖Op(a∘s)v - S⁻¹Op(a)Sv‖/‖v‖ = {worst:.2e} over 5 draws (tol 1e-5)")))
}

fn rel_max(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    a.max_diff(b) / b.max_abs().max(f64::MIN_POSITIVE)
}

fn c4_homomorphism() -> Outcome {
    let ax = self_dual(32, 2.0 * PI);
    let gx = grid_of(&[ax]);
    let r = ExtensionSpec::landau().realize(&gx, &gx).map_err(err)?;
    let h = oscillator(&gx);
    let b = quantize(&SampledSymbol::sample(&gx, &GaussianSymbol::new(vec![0.5, 0.0], vec![1.0, 0.3], 1.0).map_err(err)?).map_err(err)?)
        .scaled(C64::new(0.0, 1.0));
    let e_ab = r.extend_operator(&h.compose(&b).map_err(err)?).map_err(err)?;
    let e_a_e_b = r.extend_operator(&h).map_err(err)?.compose(&r.extend_operator(&b).map_err(err)?).map_err(err)?;
    let hom = rel_max(&e_ab, &e_a_e_b);
    let adj = rel_max(&r.extend_operator(&b.adjoint()).map_err(err)?, &r.extend_operator(&b).map_err(err)?.adjoint());
    let a = h.shifted(1.0).map_err(err)?;
    let inv = r
        .extend_operator(&a.inverse().map_err(err)?)
        .map_err(err)?
        .compose(&r.extend_operator(&a).map_err(err)?)
        .map_err(err)?;
    let id = inv.max_diff(&OperatorMatrix::identity(&r.grid));
    let ok = hom <= 1e-10 && adj <= 1e-12 && id <= 1e-8;
    Ok((ok, format!("product {hom:.2e} (1e-10), adjoint {adj:.2e} (1e-12), inverse {id:.2e} (1e-8)")))
}

fn hermite_pair_sets(grid: &Grid, n: usize) -> Result<Vec<StateVector>, String> {
    hermite_oracle(n, grid).map_err(err)
}

fn c5_intertwiners() -> Outcome {
    let mut line = Vec::new();
    let mut ok = true;
    for (name, spec, area) in [("Landau", ExtensionSpec::landau(), 2.0 * PI), ("Bopp", ExtensionSpec::bopp(1), PI)] {
        let ax = self_dual(48, area);
        let gx = grid_of(&[ax]);
        let r = spec.realize(&gx, &gx).map_err(err)?;
        let hs = hermite_pair_sets(&gx, 3)?;
        let dev = gram_check(&r, &hs, &hs).map_err(err)?;
        let h = oscillator(&gx);
        let mut res = 0.0_f64;
        for chi in &hs {
            let t = build_intertwiner(&r, chi).map_err(err)?;
            for phi in &hs {
                let lhs = r.apply_extended(&h, &t.apply(phi).map_err(err)?).map_err(err)?;
                let rhs = t.apply(&h.apply(phi).map_err(err)?).map_err(err)?;
                res = res.max(lhs.sub(&rhs).map_err(err)?.norm() / phi.norm());
                let lhs = t.apply_adjoint(&r.apply_extended(&h, &phi.tensor(chi)).map_err(err)?).map_err(err)?;
                let rhs = h.apply(&t.apply_adjoint(&phi.tensor(chi)).map_err(err)?).map_err(err)?;
                res = res.max(lhs.sub(&rhs).map_err(err)?.norm() / phi.norm());
            }
        }
        ok &= dev <= 1e-6 && res <= 1e-5;
        line.push(format!("{name}: Gram {dev:.2e} (1e-6), intertwining {res:.2e} (1e-5)"));
    }
    Ok((ok, line.join("; ")))
}

fn c6_closed_forms() -> Outcome {
    let mut ok = true;
    let mut line = Vec::new();
    for (name, spec, area) in [("Landau", ExtensionSpec::landau(), 2.0 * PI), ("Bopp", ExtensionSpec::bopp(1), PI)] {
        let ax = self_dual(48, area);
        let (gx, g2) = (grid_of(&[ax]), grid_of(&[ax, ax]));
        let r = spec.realize(&gx, &gx).map_err(err)?;
        let mut worst = 0.0_f64;
        for j in 0..2 {
            for l in 0..2 {
                let (phi, chi) = (HermiteSeries::basis(j), HermiteSeries::basis(l));
                let generic = build_intertwiner(&r, &chi.sample(&gx).map_err(err)?)
                    .map_err(err)?
                    .apply(&phi.sample(&gx).map_err(err)?)
                    .map_err(err)?;
                let closed = if name == "Landau" {
                    landau_intertwiner_closed(&phi, &chi, &g2)
                } else {
                    bopp_intertwiner_closed(&phi, &chi, &g2)
                }
                .map_err(err)?;
                worst = worst.max(rel(&generic, &closed));
            }
        }
        ok &= worst <= 1e-6;
        line.push(format!("{name} {worst:.2e}"));
    }
    Ok((ok, format!("{} relative (tol 1e-6)", line.join(", "))))
}

fn c7_star_eigenvalues() -> Outcome {
    let g = Grid::line(12.0, 96).map_err(err)?;
    let h = oscillator(&g);
    let hs = hermite_oracle(3, &g).map_err(err)?;
    let mut worst = 0.0_f64;
    for (j, hj) in hs.iter().enumerate() {
        for hl in &hs {
            let w = cross_wigner(hj, hl).map_err(err)?;
            let star = dequantize(&h.compose(&quantize(&w)).map_err(err)?).map_err(err)?;
            let target = w.scaled(C64::new((2 * j + 1) as f64, 0.0));
            worst = worst.max(star.sub(&target).map_err(err)?.l2_norm() / w.l2_norm());
        }
    }
    Ok((worst <= 1e-6, format!("max ‖h₀⋆W - (2j+1)W‖/‖W‖ = {worst:.2e} (tol 1e-6)")))
}

fn c8_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sym = 0.0_f64;
    for (dim, n) in [(1, 64), (2, 48)] {
        let g = Grid::uniform(dim, 8.0, n).map_err(err)?;
        let c: Vec<f64> = (0..2 * dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let w: Vec<f64> = (0..2 * dim).map(|_| rng.gen_range(0.5..1.0)).collect();
        let a = SampledSymbol::sample(&g, &GaussianSymbol::new(c, w, 1.0).map_err(err)?).map_err(err)?;
        let back = dequantize(&quantize(&a)).map_err(err)?;
        sym = sym.max(back.sub(&a).map_err(err)?.l2_norm() / a.l2_norm());
    }
    let g = Grid::line(8.0, 64).map_err(err)?;
    let coeffs: Vec<C64> = (0..8).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let f = HermiteSeries { coeffs }.sample(&g).map_err(err)?;
    let ft = idft(&dft(&f, 1));
    let fourier = rel(&StateVector::new(g.clone(), ft.values).map_err(err)?, &f);
    let mut gen = 0.0_f64;
    for _ in 0..20 {
        let m = 2;
        let mut p = faer::Mat::<f64>::zeros(m, m);
        let mut q = faer::Mat::<f64>::zeros(m, m);
        let l = faer::Mat::<f64>::from_fn(m, m, |i, j| if i == j { 1.5 } else { 0.0 } + rng.gen_range(-0.5..0.5));
        for i in 0..m {
            for j in i..m {
                let (u, v) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                p[(i, j)] = u;
                p[(j, i)] = u;
                q[(i, j)] = v;
                q[(j, i)] = v;
            }
        }
        let w = QuadraticFormW::new(p, l, q, 0).map_err(err)?;
        let back = w_from_symplectic(&symplectic_from_w(&w).map_err(err)?).map_err(err)?;
        let d = [(&back.p, &w.p), (&back.l, &w.l), (&back.q, &w.q)]
            .iter()
            .map(|(a, b)| (*a - *b).as_ref().norm_max())
            .fold(0.0, f64::max);
        gen = gen.max(d);
    }
    let ok = sym <= 1e-8 && fourier <= 1e-10 && gen <= 1e-10;
    Ok((ok, format!("symbol {sym:.2e} (1e-8), dft {fourier:.2e} (1e-10), generating form {gen:.2e} (1e-10)")))
}

fn c9_shubin() -> Outcome {
    let radii = [5.0, 10.0, 20.0, 40.0];
    let h0 = QuadraticSymbol::oscillator(1);
    let rep = classify(&h0, ClassParams { rho: 1.0, m0: 2.0, m1: 2.0 }, &radii, 1024).map_err(err)?;
    let lows: Vec<f64> = rep.growth.per_radius.iter().map(|s| s.lower_ratio).collect();
    let highs: Vec<f64> = rep.growth.per_radius.iter().map(|s| s.upper_ratio).collect();
    let spread = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
    let stable = spread(&lows).max(spread(&highs));
    let mut ok = rep.passes && stable <= 1e-10;
    let landau = extend_quadratic(&h0, &ExtensionSpec::landau()).map_err(err)?;
    let bopp = bopp_quadratic(&h0).map_err(err)?;
    let mut worst = 0.0_f64;
    for q in [Arc::new(landau) as Arc<dyn PhaseFunction>, Arc::new(bopp)] {
        let g = growth_envelope(q.as_ref(), 2.0, 2.0, &radii, 1024).map_err(err)?;
        for s in &g.per_radius {
            worst = worst.max(s.min_abs / (s.radius * s.radius));
        }
        ok &= !g.lower_bound_holds();
    }
    ok &= worst <= 1e-10;
    Ok((ok, format!("h₀ passes, C spread {stable:.2e} (1e-10); extended sphere minima / R² <= {worst:.2e} (1e-10)")))
}

fn c10_witness() -> Outcome {
    let ax = self_dual(32, 2.0 * PI);
    let gx = grid_of(&[ax]);
    let r = ExtensionSpec::landau().realize(&gx, &gx).map_err(err)?;
    let a = oscillator(&gx).shifted(-1.0).map_err(err)?;
    let chi = plane_wave(&gx, &[ax.freq(ax.points / 2 + 3)]);
    let rep = nonhypoellipticity_witness(&a, &r, &chi, WitnessParams::default()).map_err(err)?;
    Ok((
        rep.success,
        format!("r = {:.2e} (<= 1e-5), outer mass {:.3} (>= 0.1)", rep.residual_ratio, rep.outer_mass_ratio),
    ))
}

fn c11_kernel() -> Outcome {
    let ax = self_dual(32, 2.0 * PI);
    let gx = grid_of(&[ax]);
    let r = ExtensionSpec::landau().realize(&gx, &gx).map_err(err)?;
    let h = oscillator(&gx);
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, a, expect) in [("H₀", h.clone(), false), ("H₀ - I", h.shifted(-1.0).map_err(err)?, true)] {
        let p = kernel_probe(&a, &r.extend_operator(&a).map_err(err)?).map_err(err)?;
        ok &= p.consistent && p.has_kernel == expect;
        parts.push(format!("{name}: σ_min {:.2e} / {:.2e}", p.sigma_min, p.sigma_min_extended));
    }
    Ok((ok, parts.join("; ")))
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 11] = [
        ("1 harmonic oscillator spectrum", c1_harmonic_oscillator),
        ("2 Landau clusters and routes", c2_landau),
        ("3 symplectic covariance", c3_covariance),
        ("4 homomorphism, adjoint, inverse", c4_homomorphism),
        ("5 intertwiner Gram and intertwining", c5_intertwiners),
        ("6 Landau and Bopp closed forms", c6_closed_forms),
        ("7 Moyal star eigenvalues", c7_star_eigenvalues),
        ("8 round trips", c8_round_trips),
        ("9 Shubin diagnostics", c9_shubin),
        ("10 non-hypoellipticity witness", c10_witness),
        ("11 kernel coherence", c11_kernel),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in checks {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {name}: {} [{detail}] ({:.1}s)", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criterion/criteria failed");
        std::process::exit(1);
    }
}
