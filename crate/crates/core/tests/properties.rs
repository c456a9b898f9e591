use num_complex::Complex64;
use proptest::prelude::*;

use skinspec::linalg::{
    determinant, eig_dense, poly_eval, poly_roots, smallest_singular_value, vec_norm, CMatrix,
};
use skinspec::modes::{pseudo_eigenvector, Side};
use skinspec::resonator::{capacitance_matrix, capacitance_to_ktoeplitz, ktoeplitz_matrix, ResonatorChain};
use skinspec::spectra::{multiset_distance, ResolventNorm};
use skinspec::winding::{in_region_G, winding_at_radius, winding_via_argument, Region};
use skinspec::SymbolCoeffs;

fn complex(half: f64) -> impl Strategy<Value = Complex64> {
    (-half..half, -half..half).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Coefficients bounded away from zero so the quadratic never degenerates.
fn coefficient() -> impl Strategy<Value = Complex64> {
    (0.5f64..2.0, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn symbol(max_k: usize) -> impl Strategy<Value = SymbolCoeffs> {
    (1..=max_k).prop_flat_map(|k| {
        (
            prop::collection::vec(complex(2.0), k),
            prop::collection::vec(coefficient(), k),
            prop::collection::vec(coefficient(), k),
        )
            .prop_map(|(a, b, c)| SymbolCoeffs::new(a, b, c).unwrap())
    })
}

fn real_symbol(max_k: usize) -> impl Strategy<Value = SymbolCoeffs> {
    (1..=max_k).prop_flat_map(|k| {
        let coeff = prop_oneof![0.5f64..2.0, -2.0f64..-0.5];
        (
            prop::collection::vec(-2.0f64..2.0, k),
            prop::collection::vec(coeff.clone(), k),
            prop::collection::vec(coeff, k),
        )
            .prop_map(|(a, b, c)| SymbolCoeffs::from_real(&a, &b, &c).unwrap())
    })
}

fn matrix(max_n: usize) -> impl Strategy<Value = CMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(complex(1.0), n * n).prop_map(move |d| CMatrix::from_row_major(n, n, d).unwrap())
    })
}

fn max_entry_gap(x: &CMatrix, y: &CMatrix) -> f64 {
    x.as_slice().iter().zip(y.as_slice()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn eigenvalues_match_trace_and_determinant(a in matrix(8)) {
        let pairs = eig_dense(&a).unwrap();
        let scale = 1.0 + a.frobenius_norm();
        let sum: Complex64 = pairs.iter().map(|p| p.value).sum();
        prop_assert!((sum - a.trace()).norm() <= 1e-10 * scale);
        let prod: Complex64 = pairs.iter().map(|p| p.value).product();
        let det = determinant(&a).unwrap();
        prop_assert!((prod - det).norm() <= 1e-9 * scale.powi(a.rows() as i32));
        for p in &pairs {
            let ax = a.mul_vec(&p.vector).unwrap();
            let r: Vec<Complex64> = ax.iter().zip(&p.vector).map(|(x, v)| x - p.value * v).collect();
            prop_assert!(vec_norm(&r) <= 1e-8 * scale * vec_norm(&p.vector));
        }
    }

    #[test]
    fn sigma_min_bounds_every_rayleigh_ratio(a in matrix(7), x in prop::collection::vec(complex(1.0), 7)) {
        let x = &x[..a.rows()];
        prop_assume!(vec_norm(x) > 1e-3);
        let sigma = smallest_singular_value(&a).unwrap();
        let ratio = vec_norm(&a.mul_vec(x).unwrap()) / vec_norm(x);
        prop_assert!(sigma <= ratio * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn lanczos_sigma_min_agrees_with_svd(a in matrix(8), lambda in complex(1.5)) {
        let svd = smallest_singular_value(&a.shifted(lambda)).unwrap();
        let lanczos = ResolventNorm::new(&a).unwrap().sigma_min(lambda);
        prop_assert!((svd - lanczos).abs() <= 1e-7 * (svd + 1e-8), "{} vs {}", svd, lanczos);
    }

    #[test]
    fn polynomial_roots_are_roots(roots in prop::collection::vec(complex(2.0), 1..7)) {
        // expand ∏(x − rᵢ), highest degree first
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for r in &roots {
            let mut next = coeffs.clone();
            next.push(Complex64::new(0.0, 0.0));
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] -= r * c;
            }
            coeffs = next;
        }
        let found = poly_roots(&coeffs).unwrap();
        prop_assert_eq!(found.len(), roots.len());
        for z in &found {
            let scale: f64 = coeffs.iter().enumerate().map(|(i, c)| c.norm() * z.norm().powi((coeffs.len() - 1 - i) as i32)).sum();
            prop_assert!(poly_eval(&coeffs, *z).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn closed_form_determinant_matches_lu(s in symbol(6), z in coefficient(), lambda in complex(3.0)) {
        let m = s.eval_symbol(z).unwrap().shifted(lambda);
        let lu = determinant(&m).unwrap();
        let closed = s.det_closed_form(z, lambda).unwrap();
        prop_assert!((lu - closed).norm() <= 1e-10 * m.frobenius_norm().powi(s.k() as i32).max(1.0));
    }

    #[test]
    fn quadratic_roots_obey_vieta(s in symbol(5), lambda in complex(3.0)) {
        let roots = s.quadratic_roots(lambda).unwrap();
        let (a, b, g) = (s.quad_a(), s.quad_b(), s.g_lambda(lambda));
        let scale = 1.0 + (b / a).norm() + (g / a).norm();
        prop_assert!((roots.z1 * roots.z2 - b / a).norm() <= 1e-10 * scale);
        prop_assert!((roots.z1 + roots.z2 + g / a).norm() <= 1e-10 * scale);
        prop_assert!(roots.z1.norm() <= roots.z2.norm());
    }

    #[test]
    fn winding_methods_agree(s in symbol(4), lambda in complex(4.0), r in 0.3f64..3.0) {
        let Ok(count) = winding_at_radius(&s, lambda, r) else { return Ok(()) };
        prop_assume!(count.guard > 1e-3);
        let arg = winding_via_argument(&s, lambda, r, 256).unwrap();
        prop_assert_eq!(count.winding, arg.winding);
        prop_assert!((-1..=1).contains(&count.winding));
    }

    #[test]
    fn winding_grows_with_radius(s in symbol(4), lambda in complex(3.0), r in 0.2f64..2.0, grow in 1.0f64..3.0) {
        let (Ok(small), Ok(large)) = (winding_at_radius(&s, lambda, r), winding_at_radius(&s, lambda, r * grow)) else {
            return Ok(());
        };
        prop_assert!(small.winding <= large.winding);
    }

    #[test]
    fn real_symbols_have_conjugate_symmetric_regions(s in real_symbol(4), lambda in complex(3.0)) {
        prop_assert_eq!(in_region_G(&s, lambda), in_region_G(&s, lambda.conj()));
    }

    #[test]
    fn region_agrees_with_root_count(s in symbol(4), lambda in complex(3.0)) {
        match (in_region_G(&s, lambda), winding_at_radius(&s, lambda, 1.0)) {
            (Region::Inside(w), Ok(count)) => prop_assert_eq!(w, count.winding),
            (Region::Outside, Ok(count)) => prop_assert_eq!(count.winding, 0),
            (Region::OnSigmaDet, Err(_)) => {}
            (region, count) => prop_assert!(false, "{:?} vs {:?}", region, count),
        }
    }

    #[test]
    fn mirrored_section_is_the_reversed_section(s in symbol(4), n in 3usize..20) {
        let a = s.finite_section(n);
        let m = s.mirrored(n).finite_section(n);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(m[(i, j)], a[(n - 1 - i, n - 1 - j)]);
            }
        }
    }

    /// σ_min ≤ ‖(A_N − λ)v‖/‖v‖ for the pseudo-eigenvector, which in turn
    /// matches the exact truncation defect.
    #[test]
    fn pseudo_modes_sandwich_sigma_min(s in symbol(3), lambda in complex(2.5), cells in 4usize..20) {
        prop_assume!(matches!(in_region_G(&s, lambda), Region::Inside(_)));
        let n = cells * s.k();
        let Ok(pe) = pseudo_eigenvector(&s, lambda, n) else { return Ok(()) };
        let sigma = smallest_singular_value(&s.finite_section(n).shifted(lambda)).unwrap();
        let floor = 1e-12 * (1.0 + s.finite_section(n).norm_inf());
        prop_assert!(sigma <= pe.residual + floor, "σ_min {} > residual {}", sigma, pe.residual);
        prop_assert!((pe.residual - pe.defect).abs() <= 1e-8 * (1.0 + pe.defect), "{} vs {}", pe.residual, pe.defect);
        let expected = if in_region_G(&s, lambda) == Region::Inside(-1) { Side::Left } else { Side::Right };
        prop_assert_eq!(pe.side, expected);
    }

    #[test]
    fn capacitance_rows_sum_to_zero_and_rebuild(
        pattern in prop::collection::vec(0.3f64..4.0, 1..5),
        extra in 0usize..20,
        gamma in prop_oneof![0.1f64..2.0, -2.0f64..-0.1],
    ) {
        let n = 3 * pattern.len() + extra;
        let chain = ResonatorChain::periodic(n, &pattern, gamma).unwrap();
        let c = capacitance_matrix(&chain);
        let sums = c.mul_vec(&vec![Complex64::new(1.0, 0.0); n]).unwrap();
        prop_assert!(sums.iter().all(|z| z.norm() <= 1e-12 * c.norm_inf()));
        let spec = capacitance_to_ktoeplitz(&chain).unwrap();
        prop_assert!(max_entry_gap(&c, &ktoeplitz_matrix(&spec)) <= 1e-12 * c.norm_inf());
    }

    #[test]
    fn circulant_spectrum_is_the_symbol_union(s in symbol(3), cells in 2usize..10) {
        let dense = skinspec::spectra::block_circulant_eigs(&s, cells).unwrap();
        let union = skinspec::spectra::symbol_circulant_eigs(&s, cells).unwrap();
        prop_assert!(multiset_distance(&dense, &union) <= 1e-8);
    }
}
