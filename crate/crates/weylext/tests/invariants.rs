use std::sync::Arc;

use proptest::prelude::*;
use weylext::extension::{extend_quadratic, extend_symbol, ExtensionSpec};
use weylext::grid::{Grid, StateVector};
use weylext::metaplectic::{build_metaplectic, inverse_metaplectic};
use weylext::shubin::{classify, growth_envelope, ClassParams};
use weylext::symbol::{FnSymbol, GaussianSymbol, PhaseFunction, QuadraticSymbol, ScaledSymbol};
use weylext::symplectic::{embed_direct_sum, symplectic_defect, symplectic_from_w, w_dual, w_from_symplectic, SymplecticMatrix};
use weylext::weyl::{quantize, SampledSymbol};
use weylext::wigner::{cross_wigner, moyal_star};
use weylext::C64;

fn free_map(theta: f64, r: f64) -> SymplecticMatrix {
    SymplecticMatrix::rotation(1, theta).compose(&SymplecticMatrix::squeeze(1, r)).unwrap()
}

fn max_entry_diff(a: &SymplecticMatrix, b: &SymplecticMatrix) -> f64 {
    a.rows().iter().flatten().zip(b.rows().iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn wave(g: &Grid, c: f64, k: f64, w: f64) -> StateVector {
    StateVector::from_fn(g, |x| C64::from_polar((-w * (x[0] - c).powi(2)).exp(), k * x[0]))
}

fn theta() -> impl Strategy<Value = f64> {
    // Keep sin θ away from zero so the maps stay free.
    prop_oneof![0.3..2.8, -2.8..-0.3_f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generating_form_round_trip(t in theta(), r in 0.5..2.0_f64) {
        let s = free_map(t, r);
        let back = symplectic_from_w(&w_from_symplectic(&s).unwrap()).unwrap();
        prop_assert!(max_entry_diff(&s, &back) < 1e-12);
    }

    #[test]
    fn dual_form_is_an_involution(t in theta(), r in 0.5..2.0_f64, m in 0..4_i32) {
        let w = w_from_symplectic(&free_map(t, r)).unwrap().with_maslov(m);
        let ww = w_dual(&w_dual(&w));
        prop_assert_eq!(ww.maslov, w.maslov);
        for (a, b) in [(&ww.p, &w.p), (&ww.l, &w.l), (&ww.q, &w.q)] {
            prop_assert!((a - b).as_ref().norm_max() < 1e-15);
        }
    }

    // The dual form generates the inverse map.
    #[test]
    fn dual_form_generates_inverse(t in theta(), r in 0.5..2.0_f64) {
        let s = free_map(t, r);
        let inv = symplectic_from_w(&w_dual(&w_from_symplectic(&s).unwrap())).unwrap();
        prop_assert!(max_entry_diff(&inv, &s.inverse()) < 1e-12);
    }

    #[test]
    fn direct_sums_and_products_stay_symplectic(t1 in theta(), r1 in 0.5..2.0_f64, t2 in theta(), r2 in 0.5..2.0_f64) {
        let (a, b) = (free_map(t1, r1), free_map(t2, r2));
        let sum = embed_direct_sum(&a, &b);
        prop_assert!(symplectic_defect(sum.matrix()) < 1e-12);
        prop_assert!((sum.determinant() - 1.0).abs() < 1e-12);
        prop_assert!(max_entry_diff(&sum.compose(&sum.inverse()).unwrap(), &SymplecticMatrix::identity(2)) < 1e-12);
        prop_assert!(symplectic_defect(a.compose(&b).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn extended_quadratic_matches_pullback(z in prop::array::uniform4(-3.0..3.0_f64), bopp in any::<bool>()) {
        let spec = if bopp { ExtensionSpec::bopp(1) } else { ExtensionSpec::landau() };
        let h = QuadraticSymbol::new(faer::Mat::from_fn(2, 2, |i, j| if i == j { 1.5 + i as f64 } else { 0.3 }), vec![0.2, -0.1], 0.7).unwrap();
        let exact = extend_quadratic(&h, &spec).unwrap();
        let pulled = extend_symbol(Arc::new(h), &spec).unwrap();
        prop_assert!((exact.eval(&z) - pulled.eval(&z)).norm() < 1e-12);
    }

    #[test]
    fn shubin_ratios_scale_with_the_symbol(c in 0.1..10.0_f64, m0 in 0.0..3.0_f64) {
        let radii = [5.0, 10.0, 20.0];
        let h = QuadraticSymbol::oscillator(1);
        let scaled = ScaledSymbol { factor: C64::new(c, 0.0), inner: Arc::new(h.clone()) };
        let base = growth_envelope(&h, m0, 2.0, &radii, 64).unwrap();
        let grown = growth_envelope(&scaled, m0, 2.0, &radii, 64).unwrap();
        for (a, b) in base.per_radius.iter().zip(&grown.per_radius) {
            prop_assert!((b.lower_ratio - c * a.lower_ratio).abs() <= 1e-12 * b.lower_ratio);
            prop_assert!((b.upper_ratio - c * a.upper_ratio).abs() <= 1e-12 * b.upper_ratio);
        }
        let p = ClassParams { rho: 1.0, m0: 2.0, m1: 2.0 };
        prop_assert_eq!(classify(&h, p, &radii, 64).unwrap().passes, classify(&scaled, p, &radii, 64).unwrap().passes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wigner_is_sesquilinear_and_hermitian(
        c1 in -1.0..1.0_f64, c2 in -1.0..1.0_f64, k in -2.0..2.0_f64, re in -2.0..2.0_f64, im in -2.0..2.0_f64,
    ) {
        let g = Grid::line(8.0, 64).unwrap();
        let (u, v, f) = (wave(&g, c1, k, 0.5), wave(&g, c2, -k, 0.8), wave(&g, 0.0, 0.5, 1.0));
        let alpha = C64::new(re, im);
        let lhs = cross_wigner(&u.scaled(alpha).add(&v).unwrap(), &f).unwrap();
        let rhs = cross_wigner(&u, &f).unwrap().scaled(alpha).sub(&cross_wigner(&v, &f).unwrap().scaled(C64::new(-1.0, 0.0))).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
        let lhs = cross_wigner(&f, &u.scaled(alpha)).unwrap();
        let rhs = cross_wigner(&f, &u).unwrap().scaled(alpha.conj());
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
        let swapped = cross_wigner(&f, &u).unwrap().conj();
        // Exact in the continuum; entries with |i - j| near N/2 are cut, so tails leak in.
        prop_assert!(swapped.sub(&cross_wigner(&u, &f).unwrap()).unwrap().max_abs() < 1e-7);
    }

    #[test]
    fn adjoint_is_conjugate_symbol(cx in -1.0..1.0_f64, cxi in -1.0..1.0_f64, w in 0.3..1.5_f64, phase in 0.0..6.0_f64) {
        let g = Grid::line(6.0, 32).unwrap();
        let base = GaussianSymbol::new(vec![cx, cxi], vec![w, 1.0 / w], 1.0).unwrap();
        let a = FnSymbol { phase_dim: 2, f: move |z: &[f64]| base.eval(z) * C64::from_polar(1.0, phase + z[0]), label: "a".into() };
        let s = SampledSymbol::sample(&g, &a).unwrap();
        prop_assert!(quantize(&s.conj()).max_diff(&quantize(&s).adjoint()) < 1e-13);
    }

    #[test]
    fn star_product_is_associative(c in prop::array::uniform3(-1.0..1.0_f64), w in prop::array::uniform3(0.4..1.5_f64)) {
        let g = Grid::line(8.0, 64).unwrap();
        let sym = |i: usize| SampledSymbol::sample(&g, &GaussianSymbol::new(vec![c[i], -c[i]], vec![w[i], 1.0], 1.0).unwrap()).unwrap();
        let (a, b, d) = (sym(0), sym(1), sym(2));
        let left = moyal_star(&moyal_star(&a, &b).unwrap(), &d).unwrap();
        let right = moyal_star(&a, &moyal_star(&b, &d).unwrap()).unwrap();
        prop_assert!(left.sub(&right).unwrap().max_abs() < 1e-6);
    }

    // S⁻¹ Op(a) S = Op(a∘s) and S⁻¹ Op(a)† S = Op(a∘s)†.
    #[test]
    fn metaplectic_covariance_respects_adjoints(t in 0.8..2.3_f64, r in 0.8..1.25_f64) {
        let g = Grid::line(8.0, 64).unwrap();
        let s = free_map(t, r);
        let w = w_from_symplectic(&s).unwrap();
        let (big_s, big_s_inv) = (build_metaplectic(&w, &g, &g).unwrap(), inverse_metaplectic(&w, &g, &g).unwrap());
        let base = GaussianSymbol::new(vec![0.2, -0.1], vec![0.5, 0.8], 1.0).unwrap();
        let a = FnSymbol { phase_dim: 2, f: move |z: &[f64]| base.eval(z) * C64::from_polar(1.0, 0.3 * z[1]), label: "a".into() };
        let op_a = quantize(&SampledSymbol::sample(&g, &a).unwrap());
        let sc = s.clone();
        let pulled = FnSymbol { phase_dim: 2, f: move |z: &[f64]| a.eval(&sc.apply(z)), label: "a∘s".into() };
        let lhs = quantize(&SampledSymbol::sample(&g, &pulled).unwrap());
        let hs = weylext::hermite::hermite_oracle(4, &g).unwrap();
        for (op, want) in [(op_a.clone(), lhs.clone()), (op_a.adjoint(), lhs.adjoint())] {
            let conj = big_s_inv.compose(&op.compose(&big_s).unwrap()).unwrap();
            for h in &hs {
                prop_assert!(conj.apply(h).unwrap().sub(&want.apply(h).unwrap()).unwrap().norm() < 1e-5);
            }
        }
    }
}
