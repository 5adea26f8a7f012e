//! Cross-cutting invariants checked on randomized inputs: structural
//! identities of the lattice layer, exactness of the discrete transforms,
//! and consistency between independent ways of computing the same
//! quantity.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spintorus::field::{
    evaluate_j, evaluate_j_rect, lift_to_cover, lp_norm, quartic_integral, random_field,
    synthesize, SpinorField,
};
use spintorus::lattice::{
    dual_basis, reduce_to_moduli, spin_shift, LatticeBasis, ModuliPoint, SpinStructure, Vec2,
};
use spintorus::minimize::{estimate_lambda_min, MinimizeConfig};
use spintorus::spectrum::{dirac_spectrum, normalized_first};

fn random_basis(rng: &mut impl Rng) -> LatticeBasis {
    loop {
        let v1 = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let v2 = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if v1.norm() < 0.3 || v2.norm() < 0.3 {
            continue;
        }
        if let Ok(b) = LatticeBasis::new(v1, v2) {
            if b.area() > 0.1 {
                return b;
            }
        }
    }
}

fn random_nontrivial_spin(rng: &mut impl Rng) -> SpinStructure {
    match rng.gen_range(0..3) {
        0 => SpinStructure::new(true, false),
        1 => SpinStructure::new(false, true),
        _ => SpinStructure::new(true, true),
    }
}

proptest! {
    #[test]
    fn chi_is_a_homomorphism(
        e1: bool, e2: bool,
        a1 in -50i64..50, b1 in -50i64..50,
        a2 in -50i64..50, b2 in -50i64..50,
    ) {
        let s = SpinStructure::new(e1, e2);
        prop_assert_eq!(s.chi(a1 + a2, b1 + b2), s.chi(a1, b1) * s.chi(a2, b2));
    }

    #[test]
    fn dual_of_dual_is_identity(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_basis(&mut rng);
        let dd = dual_basis(&dual_basis(&b));
        prop_assert!((dd.v1() - b.v1()).norm() < 1e-12 * (1.0 + b.v1().norm()));
        prop_assert!((dd.v2() - b.v2()).norm() < 1e-12 * (1.0 + b.v2().norm()));
        // Biorthogonality of the dual pairing.
        let d = dual_basis(&b);
        prop_assert!((d.v1().dot(b.v1()) - 1.0).abs() < 1e-12);
        prop_assert!(d.v1().dot(b.v2()).abs() < 1e-12);
        prop_assert!(d.v2().dot(b.v1()).abs() < 1e-12);
        prop_assert!((d.v2().dot(b.v2()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spin_shift_is_a_half_dual_vector(seed in 0u64..200, e1: bool, e2: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_basis(&mut rng);
        let s = SpinStructure::new(e1, e2);
        let d = spin_shift(&b, s);
        // 2δ·v_i must be the parity bit (δ pairs half-integrally with Γ).
        let p1 = 2.0 * d.dot(b.v1());
        let p2 = 2.0 * d.dot(b.v2());
        prop_assert!((p1 - e1 as i64 as f64).abs() < 1e-12);
        prop_assert!((p2 - e2 as i64 as f64).abs() < 1e-12);
    }
}

#[test]
fn reduction_preserves_the_normalized_first_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..300 {
        let b = random_basis(&mut rng);
        let s = random_nontrivial_spin(&mut rng);
        let before = normalized_first(&b, s);
        let (p, audit) = reduce_to_moduli(&b, s).unwrap();
        assert!(p.contains(), "reduced point outside the moduli domain");
        let canon = LatticeBasis::canonical(p).unwrap();
        let after = normalized_first(&canon, SpinStructure::canonical());
        assert!(
            (before - after).abs() <= 1e-10 * before,
            "{before} vs {after} at ({:?})",
            b
        );
        // The audit must reproduce a basis of the same lattice up to the
        // recorded rotation and scale.
        let (w1, w2) = audit.apply(&b);
        assert!((w1.norm() - canon.v1().norm()).abs() < 1e-9 * (1.0 + w1.norm()));
        assert!((w2.norm() - canon.v2().norm()).abs() < 1e-9 * (1.0 + w2.norm()));
    }
}

#[test]
fn fields_are_twisted_periodic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let b = random_basis(&mut rng);
        let s = SpinStructure::new(rng.gen(), rng.gen());
        let f = random_field(b, s, 2, &mut rng).unwrap();
        let p = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for (a, bb) in [(1i64, 0i64), (0, 1), (1, 1), (-2, 3)] {
            let shifted = f.eval_at(p + a as f64 * b.v1() + bb as f64 * b.v2());
            let base = f.eval_at(p);
            let chi = s.chi(a, bb) as f64;
            for k in 0..2 {
                assert!(
                    (shifted[k] - chi * base[k]).norm() < 1e-10 * (1.0 + base[k].norm()),
                    "gamma = ({a},{bb})"
                );
            }
        }
    }
}

#[test]
fn dirac_operator_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let b = random_basis(&mut rng);
        let s = random_nontrivial_spin(&mut rng);
        let f = random_field(b, s, 3, &mut rng).unwrap();
        let g = random_field(b, s, 3, &mut rng).unwrap();
        let df = f.apply_dirac();
        let dg = g.apply_dirac();
        let dot = |u: &SpinorField, v: &SpinorField| -> Complex64 {
            u.coeffs()
                .iter()
                .zip(v.coeffs())
                .map(|(a, c)| a[0].conj() * c[0] + a[1].conj() * c[1])
                .sum()
        };
        let lhs = dot(&df, &g);
        let rhs = dot(&f, &dg);
        assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
    }
}

#[test]
fn j_is_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let b = random_basis(&mut rng);
        let f = random_field(b, SpinStructure::canonical(), 3, &mut rng).unwrap();
        let j = evaluate_j(&f, 32).unwrap();
        for c in [
            Complex64::new(3.7, 0.0),
            Complex64::new(0.0, 0.2),
            Complex64::new(-1.4, 2.2),
        ] {
            let mut g = f.clone();
            g.scale_mut(c);
            let jc = evaluate_j(&g, 32).unwrap();
            assert!((jc - j).abs() < 1e-10 * j, "c = {c}");
        }
    }
}

#[test]
fn parseval_between_modes_and_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..10 {
        let b = random_basis(&mut rng);
        let s = SpinStructure::new(rng.gen(), rng.gen());
        let f = random_field(b, s, 3, &mut rng).unwrap();
        let g = synthesize(&f, 2 * (2 * 3 + 1)).unwrap();
        let grid = lp_norm(&g, 2.0);
        let modes = f.l2_mode_norm();
        assert!((grid - modes).abs() < 1e-10 * modes);
    }
}

#[test]
fn quartic_quadrature_matches_mode_convolution() {
    // ∫|ψ|⁴ = area · Σ_k |ĥ_k|² with ĥ_k = Σ_m ⟨c_m, c_{m+k}⟩ — the
    // Fourier coefficients of |ψ|² (the spin twist cancels).  The grid
    // quadrature is exact at the minimal oversampling.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5 {
        let b = random_basis(&mut rng);
        let s = SpinStructure::new(rng.gen(), rng.gen());
        let n = 3i64;
        let f = random_field(b, s, n as usize, &mut rng).unwrap();
        let dim = 2 * n + 1;
        let idx = |a: i64, bb: i64| ((a + n) * dim + bb + n) as usize;
        let mut conv = 0.0;
        for ka in -2 * n..=2 * n {
            for kb in -2 * n..=2 * n {
                let mut h = Complex64::new(0.0, 0.0);
                for a in (-n).max(-n - ka)..=n.min(n - ka) {
                    for bb in (-n).max(-n - kb)..=n.min(n - kb) {
                        let c = f.coeffs()[idx(a, bb)];
                        let d = f.coeffs()[idx(a + ka, bb + kb)];
                        h += c[0].conj() * d[0] + c[1].conj() * d[1];
                    }
                }
                conv += h.norm_sqr();
            }
        }
        conv *= b.area();
        let quad = quartic_integral(&synthesize(&f, 2 * dim as usize).unwrap());
        assert!((quad - conv).abs() < 1e-10 * conv, "{quad} vs {conv}");
    }
}

#[test]
fn spectrum_is_exhaustive_against_a_larger_window() {
    // Brute force over a much larger index window must not find any
    // eigenvalue below the cutoff that the enumerator missed.
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..10 {
        let b = random_basis(&mut rng);
        let s = random_nontrivial_spin(&mut rng);
        let cutoff = 12.0 / b.area().sqrt();
        let spec = dirac_spectrum(&b, s, cutoff).unwrap();
        let total: u32 = spec.iter().map(|e| e.multiplicity).sum();
        let dual = dual_basis(&b);
        let delta = spin_shift(&b, s);
        let mut brute = 0u32;
        for a in -60..=60i64 {
            for bb in -60..=60i64 {
                let xi = 2.0 * std::f64::consts::PI
                    * (a as f64 * dual.v1() + bb as f64 * dual.v2() + delta);
                let lam = xi.norm();
                if lam <= cutoff {
                    brute += if lam < 1e-12 { 2 } else { 1 };
                }
            }
        }
        // Each nonzero |λ| contributes a ± pair in the spectrum.
        let expected = 2 * brute - if s.is_trivial() { 2 } else { 0 };
        assert_eq!(total, expected, "basis {:?}", b);
    }
}

#[test]
fn covering_consistency_of_the_minimizer() {
    // λ̂ on the torus and J of the lifted minimizer on the 3-fold cover
    // differ by exactly √3 under aligned quadrature grids.
    let cfg = MinimizeConfig {
        window: 6,
        max_iters: 300,
        restarts: 2,
        seed: 5,
        ..MinimizeConfig::default()
    };
    let r = estimate_lambda_min(ModuliPoint::new(0.0, 0.7), &cfg).unwrap();
    let f = &r.minimizer;
    let lifted = lift_to_cover(f, 3).unwrap();
    let m1 = 2 * (2 * lifted.window() + 1);
    let m2 = 2 * (2 * f.window() + 1) + 1;
    let j_torus = evaluate_j_rect(f, m1, m2).unwrap();
    let j_cover = evaluate_j_rect(&lifted, m1, 3 * m2).unwrap();
    assert!((j_cover - 3f64.sqrt() * j_torus).abs() <= 1e-9 * j_cover);
}

#[test]
fn el_residual_is_nonincreasing_under_window_refinement() {
    let mut coarse = MinimizeConfig {
        window: 6,
        max_iters: 2000,
        restarts: 3,
        seed: 11,
        ..MinimizeConfig::default()
    };
    let p = ModuliPoint::new(0.0, 0.4);
    let r1 = estimate_lambda_min(p, &coarse).unwrap();
    coarse.window = 12;
    let r2 = estimate_lambda_min(p, &coarse).unwrap();
    assert!(
        r2.el_residual <= 1.1 * r1.el_residual,
        "N=6: {}, N=12: {}",
        r1.el_residual,
        r2.el_residual
    );
    // Refinement can only improve the variational upper bound (within
    // optimizer slack).
    assert!(r2.lambda_hat <= r1.lambda_hat + 1e-6);
}
