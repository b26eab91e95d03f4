//! Property tests for the algebraic invariants.

mod common;

use common::{corpus_specs, random_unital_algebra};
use corneralg::checker::{replay, sample_idempotent, Mode};
use corneralg::classifier::classify;
use corneralg::cli::AlgebraFile;
use corneralg::families::{make_family, random_instance, Disguise};
use corneralg::matcore::{orthonormal_span, rank_tol, svd_factor};
use corneralg::random::{gaussian_matrix, haar_unitary, rng_from};
use corneralg::structure::{bd_part, radical, triangularize, unhinge};
use corneralg::subalgebra::{
    compress, conjugate, generated_algebra, idempotency_residual, is_algebra, transpose_variant, MatrixSubspace,
    TransposeKind,
};
use corneralg::{ComplexMatrix, Tolerance};
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn low_rank(m: usize, p: usize, r: usize, seed: u64) -> ComplexMatrix {
    let mut rng = rng_from(seed);
    gaussian_matrix(&mut rng, m, r).matmul(&gaussian_matrix(&mut rng, r, p))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn rank_agrees_across_transposes(m in 1usize..7, p in 1usize..7, r in 0usize..7, seed in any::<u64>()) {
        let r = r.min(m).min(p);
        let x = low_rank(m, p, r.max(1), seed).scale_re(if r == 0 { 0.0 } else { 1.0 });
        let k = rank_tol(&x, &tol()).unwrap();
        prop_assert_eq!(k, r);
        prop_assert_eq!(rank_tol(&x.adjoint(), &tol()).unwrap(), k);
        prop_assert_eq!(rank_tol(&x.transpose(), &tol()).unwrap(), k);
    }

    #[test]
    fn svd_reconstructs(m in 1usize..8, p in 1usize..8, seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let x = gaussian_matrix(&mut rng, m, p);
        let svd = svd_factor(&x).unwrap();
        prop_assert!(svd.reconstruct().dist(&x) < 1e-10 * x.fro_norm().max(1.0));
        prop_assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn orthonormal_span_is_idempotent(n in 2usize..5, k in 1usize..8, extra in 0usize..6, seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let base: Vec<ComplexMatrix> = (0..k).map(|_| gaussian_matrix(&mut rng, n, n)).collect();
        let mut fam = base.clone();
        for _ in 0..extra {
            let g = gaussian_matrix(&mut rng, 1, k);
            let mut x = ComplexMatrix::zeros(n, n);
            for (j, b) in base.iter().enumerate() {
                x.axpy(g[(0, j)], b);
            }
            fam.push(x);
        }
        let once = orthonormal_span(&fam, &tol()).unwrap();
        prop_assert_eq!(once.len(), k.min(n * n));
        for (i, a) in once.iter().enumerate() {
            for (j, b) in once.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((a.inner(b).re - want).abs() < 1e-10 && a.inner(b).im.abs() < 1e-10);
            }
        }
        let twice = orthonormal_span(&once, &tol()).unwrap();
        prop_assert_eq!(twice.len(), once.len());
        let s1 = MatrixSubspace::span(n, &once, tol()).unwrap();
        let s2 = MatrixSubspace::span(n, &twice, tol()).unwrap();
        prop_assert!(s1.same_space(&s2));
    }

    #[test]
    fn sampled_idempotents_have_requested_rank(n in 2usize..7, r in 1usize..7, seed in any::<u64>(), proj in any::<bool>()) {
        let r = r.min(n);
        let mode = if proj { Mode::Projection } else { Mode::Idempotent };
        let e = sample_idempotent(n, mode, Some(r), seed).unwrap();
        prop_assert!(idempotency_residual(&e) < 1e-8);
        prop_assert!((e.trace().re - r as f64).abs() < 1e-8);
        if proj {
            prop_assert!(e.dist(&e.adjoint()) < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn generated_algebras_are_closed(n in 2usize..6, seed in any::<u64>()) {
        let a = random_unital_algebra(n, seed);
        prop_assert!(is_algebra(a.space()).closed);
        prop_assert!(a.is_unital());
        let mut rng = rng_from(seed ^ 1);
        let g = generated_algebra(&[gaussian_matrix(&mut rng, n, n).scale_re(0.5)], tol()).unwrap();
        prop_assert!(is_algebra(g.space()).closed);
    }

    #[test]
    fn compression_shrinks(n in 2usize..6, seed in any::<u64>()) {
        let a = random_unital_algebra(n, seed);
        let e = sample_idempotent(n, Mode::Idempotent, None, seed).unwrap();
        prop_assert!(compress(&a, &e).unwrap().dim() <= a.dim());
        prop_assert!(compress(&a, &ComplexMatrix::identity(n)).unwrap().same_space(a.space()));
    }

    #[test]
    fn conjugation_and_transposes_preserve_dimension(n in 2usize..6, seed in any::<u64>()) {
        let a = random_unital_algebra(n, seed);
        let mut rng = rng_from(seed ^ 2);
        let u = haar_unitary(&mut rng, n);
        prop_assert_eq!(conjugate(&a, &u).unwrap().dim(), a.dim());
        for kind in [TransposeKind::Transpose, TransposeKind::AntiTranspose] {
            let t = transpose_variant(&a, kind).unwrap();
            prop_assert_eq!(t.dim(), a.dim());
            prop_assert!(transpose_variant(&t, kind).unwrap().same_space(&a));
        }
    }

    #[test]
    fn corner_closure_is_unitarily_invariant(n in 3usize..6, seed in any::<u64>()) {
        let a = random_unital_algebra(n, seed);
        let mut rng = rng_from(seed ^ 3);
        let u = haar_unitary(&mut rng, n);
        let p = sample_idempotent(n, Mode::Projection, None, seed).unwrap();
        let moved = conjugate(&a, &u).unwrap();
        let q = u.adjoint().matmul(&p).matmul(&u);
        let before = is_algebra(&compress(&a, &p).unwrap());
        let after = is_algebra(&compress(&moved, &q).unwrap());
        // Only decisive residuals are compared.
        if before.residual > 1e-6 || before.residual < 1e-9 {
            prop_assert_eq!(before.closed, after.closed);
        }
    }

    #[test]
    fn radical_is_nilpotent_and_strictly_triangular(n in 2usize..6, seed in any::<u64>()) {
        let a = random_unital_algebra(n, seed);
        let rad = radical(&a).unwrap();
        for r in rad.basis() {
            prop_assert!(r.pow(n as u32).fro_norm() < 1e-6);
        }
        let b = triangularize(&a).unwrap();
        for r in rad.basis() {
            prop_assert!(bd_part(&b.to_frame(r), &b.sizes).fro_norm() < 1e-6);
        }
        let w = unhinge(&a, &b).unwrap();
        prop_assert_eq!(w.bd.dim() + w.rad.dim(), a.dim());
        prop_assert_eq!(w.rad.dim(), rad.dim());
    }

    #[test]
    fn violations_replay_deterministically(seed in any::<u64>()) {
        let a = random_unital_algebra(4, seed);
        let e = sample_idempotent(4, Mode::Idempotent, None, seed).unwrap();
        let r1 = replay(&a, &e).unwrap();
        let r2 = replay(&a, &e).unwrap();
        prop_assert_eq!(r1.closed, r2.closed);
        prop_assert!((r1.residual - r2.residual).abs() <= 1e-12);
    }

    #[test]
    fn algebra_files_round_trip(n in 2usize..6, seed in any::<u64>()) {
        let a = random_unital_algebra(n, seed);
        let f = AlgebraFile::from_algebra(&a, None);
        let back = AlgebraFile::from_json(&f.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert!(back.algebra(tol()).unwrap().same_space(&a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn families_are_unital_algebras(idx in 0usize..170) {
        let specs = corpus_specs(&[4, 5, 6]);
        let spec = &specs[idx % specs.len()];
        let a = make_family(spec, tol()).unwrap();
        prop_assert!(a.is_unital());
        prop_assert!(is_algebra(a.space()).closed);
    }

    #[test]
    fn anti_transpose_keeps_verdict(idx in 0usize..170, seed in 0u64..1000) {
        let specs = corpus_specs(&[4, 5]);
        let spec = &specs[idx % specs.len()];
        let a = random_instance(spec, Disguise::Similarity, seed, tol()).unwrap();
        let at = transpose_variant(&a, TransposeKind::AntiTranspose).unwrap();
        prop_assert_eq!(classify(&a, seed).unwrap().compressible, classify(&at, seed).unwrap().compressible);
    }
}
