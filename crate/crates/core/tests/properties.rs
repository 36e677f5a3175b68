//! Structural invariants checked on random inputs.

use formlab::constructions::{
    interpolation_identity, laxmilgram_extract, mu_family_build, offdiagonal_build,
    polar_decompose, MatrixFamily, OffDiagSpec,
};
use formlab::forms::{
    first_rep_residual, lambda_grid, recover_h, resolvent_gap_check, second_rep_residual,
    shifted_invertibility, sign_abs_residual, uniqueness_residual,
};
use formlab::linalg::{operator_norm, spectral_apply, sym_eig, SpectralFn};
use formlab::model::OperatorFamily;
use formlab::sampling::{
    gaussian_matrix, random_invertible, random_invertible_symmetric, random_spd, stream,
};
use formlab::stability::{classify_growth, criteria_operators, GrowthSeries, Quantity};
use formlab::{build_context, FormContext, GeneralMatrix, SymmetricMatrix};
use proptest::prelude::*;

fn random_context(seed: u64, n: usize) -> FormContext {
    let a = random_spd(&mut stream(seed, 0), n, 100.0);
    let h = random_invertible_symmetric(&mut stream(seed, 1), n, 0.2, 4.0);
    build_context(&a, &h).unwrap()
}

fn identity_gap(m: &GeneralMatrix) -> f64 {
    m.distance_from_identity()
}

fn diff(a: &GeneralMatrix, b: &GeneralMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_decomposition_reconstructs(seed in any::<u64>(), n in 1usize..16) {
        let g = gaussian_matrix(&mut stream(seed, 2), n, n);
        let s = SymmetricMatrix::from_general(&g).unwrap();
        let e = sym_eig(&s).unwrap();
        prop_assert!(e.reconstruction_residual(&s) <= 1e-10);
        prop_assert!(e.orthogonality_residual() <= 1e-10 * n as f64);
        prop_assert!(e.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sign_and_absolute_value(seed in any::<u64>(), n in 1usize..10) {
        let s = random_invertible_symmetric(&mut stream(seed, 3), n, 0.1, 5.0);
        let sign = spectral_apply(&s, SpectralFn::Sign).unwrap();
        let abs = spectral_apply(&s, SpectralFn::Abs).unwrap();
        prop_assert!(identity_gap(&sign.matmul(sign.as_general()).unwrap()) <= 1e-10);
        prop_assert!(diff(&sign.matmul(s.as_general()).unwrap(), abs.as_general()) <= 1e-10);
        let e = sym_eig(&s).unwrap();
        let norm = operator_norm(s.as_general()).unwrap();
        prop_assert!((norm - e.max_abs()).abs() <= 1e-10 * norm);
    }

    #[test]
    fn representations_agree(seed in any::<u64>(), n in 1usize..10) {
        let ctx = random_context(seed, n);
        prop_assert!(first_rep_residual(&ctx, 16, seed).unwrap() <= 1e-10);
        prop_assert!(second_rep_residual(&ctx, 16, seed).unwrap() <= 1e-10);
        prop_assert!(uniqueness_residual(&ctx).unwrap() <= 1e-10);
        prop_assert!(recover_h(&ctx).unwrap() <= 1e-8);
        prop_assert!(sign_abs_residual(&ctx).unwrap() <= 1e-10);
    }

    #[test]
    fn resolvent_gap_and_shifts(seed in any::<u64>(), n in 1usize..8) {
        let ctx = random_context(seed, n);
        prop_assert!(resolvent_gap_check(&ctx).passed());
        for lambda in lambda_grid(&ctx, 5) {
            let cert = shifted_invertibility(&ctx, lambda).unwrap();
            prop_assert!(cert.holds, "{cert:?}");
        }
    }

    #[test]
    fn criteria_operator_identities(seed in any::<u64>(), n in 1usize..10) {
        let ctx = random_context(seed, n);
        let c = criteria_operators(&ctx).unwrap();
        prop_assert!(identity_gap(&c.k.matmul(&c.k).unwrap()) <= 1e-8);
        prop_assert!(identity_gap(&c.x.matmul(c.y.as_general()).unwrap()) <= 1e-8);
        prop_assert!((c.norm_y - 1.0 / c.min_eig_x).abs() <= 1e-8 * c.norm_y);
        prop_assert!(c.min_eig_x > 0.0 && c.min_eig_y > 0.0);
        prop_assert!(c.ratio >= 1.0 - 1e-12);
        prop_assert!((c.ratio - c.upper_ratio * c.lower_ratio).abs() <= 1e-8 * c.ratio);
    }

    #[test]
    fn ratio_grows_with_truncation(seed in any::<u64>(), blocks in 2usize..7, size in 1usize..4) {
        let mut a_blocks = Vec::new();
        let mut h_blocks = Vec::new();
        let mut last = 0.0;
        for k in 0..blocks {
            let idx = 2 * k as u64 + 20;
            a_blocks.push(random_spd(&mut stream(seed, idx), size, 1e3));
            h_blocks.push(random_invertible_symmetric(&mut stream(seed, idx + 1), size, 0.2, 4.0));
            let a = SymmetricMatrix::block_diagonal(&a_blocks).unwrap();
            let h = SymmetricMatrix::block_diagonal(&h_blocks).unwrap();
            let ratio = criteria_operators(&build_context(&a, &h).unwrap()).unwrap().ratio;
            prop_assert!(ratio >= last * (1.0 - 1e-9), "{ratio} < {last}");
            last = ratio;
        }
    }

    #[test]
    fn power_laws_are_classified(c in 0.1f64..10.0, p in 0.3f64..2.0) {
        let dims = vec![8, 16, 32, 64, 128];
        let series = GrowthSeries {
            quantity: Quantity::NormX,
            sizes: dims.clone(),
            values: dims.iter().map(|&n| c * (n as f64).powf(p)).collect(),
            dims,
        };
        let v = classify_growth(&series);
        prop_assert!(v.is_diverging(), "{v:?}");
        prop_assert!((v.slope - p).abs() <= 1e-9);
    }

    #[test]
    fn constants_are_bounded(c in 0.1f64..10.0, wobble in 0.0f64..0.01) {
        let dims = vec![8, 16, 32, 64, 128];
        let series = GrowthSeries {
            quantity: Quantity::NormX,
            sizes: dims.clone(),
            values: dims.iter().enumerate().map(|(i, _)| c * (1.0 + wobble * (i % 2) as f64)).collect(),
            dims,
        };
        prop_assert!(classify_growth(&series).is_bounded());
    }

    #[test]
    fn mu_family_form_is_mu_independent(seed in any::<u64>(), m in 1usize..5, mu in 0.0f64..=1.0) {
        let d = random_invertible(&mut stream(seed, 4), m, 0.3, 3.0);
        let family = MatrixFamily::Dense(d.clone());
        let ctx = mu_family_build(&family, mu, 1).unwrap();
        let reference = mu_family_build(&family, 0.5, 1).unwrap();
        prop_assert!(diff(ctx.b.as_general(), reference.b.as_general()) <= 1e-9);
        // B = [[0, Dᵀ], [D, 0]]
        prop_assert!(diff(&ctx.b.as_general().block(m, 0, m, m), &d) <= 1e-9);
        let k = criteria_operators(&ctx).unwrap().k;
        prop_assert!(identity_gap(&k.matmul(&k).unwrap()) <= 1e-8);
    }

    #[test]
    fn offdiagonal_gap_holds(seed in any::<u64>(), p in 1usize..5, m in 1usize..5) {
        let spec = OffDiagSpec {
            a_plus: OperatorFamily::dense("a+", random_spd(&mut stream(seed, 5), p, 20.0)),
            a_minus: OperatorFamily::dense("a-", random_spd(&mut stream(seed, 6), m, 20.0)),
            coupling: MatrixFamily::Dense(gaussian_matrix(&mut stream(seed, 7), p, m)),
        };
        let built = offdiagonal_build(&spec, 1).unwrap();
        prop_assert!(built.gap.passed(), "{:?}", built.gap);
        prop_assert!(built.gap.h_min_abs >= 1.0 - 1e-10);
    }

    #[test]
    fn polar_interpolation(seed in any::<u64>(), n in 1usize..7) {
        let d = random_invertible(&mut stream(seed, 8), n, 0.2, 5.0);
        let polar = polar_decompose(&d).unwrap();
        prop_assert!(polar.orthogonality_residual <= 1e-10);
        prop_assert!(polar.factor_residual <= 1e-10);
        for i in 0..=8 {
            let it = interpolation_identity(&polar, &d, i as f64 / 8.0).unwrap();
            prop_assert!(it.primal <= 1e-9 && it.dual <= 1e-9, "{it:?}");
        }
    }

    #[test]
    fn laxmilgram_recovers_operator(seed in any::<u64>(), n in 1usize..8, negative in any::<bool>()) {
        let a = random_spd(&mut stream(seed, 9), n, 50.0);
        // pointwise coercivity |b[x,x]| ≥ α a[x,x] forces a definite H
        let sign = if negative { -1.0 } else { 1.0 };
        let h = random_spd(&mut stream(seed, 10), n, 4.0).scale(sign);
        let ctx = build_context(&a, &h).unwrap();
        let lm = laxmilgram_extract(&a, &ctx.b, 1.0, 4.0).unwrap();
        prop_assert!(diff(lm.h.as_general(), h.as_general()) <= 1e-8);
        prop_assert!(lm.cert.inverse_bound_holds && lm.cert.norm_bound_holds);
        prop_assert!(lm.cert.roundtrip_residual <= 1e-10);
        // b[x,y] = a[x, My]
        let am = a.matmul(&lm.m).unwrap();
        prop_assert!(diff(&am, ctx.b.as_general()) <= 1e-8);
    }
}
