//! Worked examples with known answers, grouped by module.

use corneralg::checker::{check_compressible, fold_corner, fold_operands, replay, sample_idempotent, witness_catalog, Mode};
use corneralg::classifier::{certify, classify, classify_generated, TypePath};
use corneralg::families::{ex1_dimension, make_family, random_instance, rank_splits, Disguise, FamilySpec, FamilyTag};
use corneralg::matcore::{c, eigenvalues, orthonormal_span, rank_tol, svd_factor, ONE};
use corneralg::structure::{block_diagonal, linkage, module_support, radical, triangularize, unhinge, Side};
use corneralg::subalgebra::{
    compress, conjugate, generated_algebra, is_algebra, transpose_variant, unitize, MatrixSubspace, TransposeKind,
};
use corneralg::{ComplexMatrix, MatrixAlgebra, Tolerance};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn e(n: usize, i: usize, j: usize) -> ComplexMatrix {
    ComplexMatrix::unit(n, n, i, j)
}

fn alg(n: usize, fam: &[ComplexMatrix]) -> MatrixAlgebra {
    MatrixAlgebra::span(n, fam, tol()).unwrap()
}

fn space(n: usize, fam: &[ComplexMatrix]) -> MatrixSubspace {
    MatrixSubspace::span(n, fam, tol()).unwrap()
}

/// C I_2 ⊕ T_2 style algebra with two non-scalar corners: span{I, E11, E12, E33, E34}
/// padded so the two 2 x 2 corners are upper triangular.
fn two_corner_algebra() -> MatrixAlgebra {
    let n = 4;
    alg(n, &[ComplexMatrix::identity(n), e(n, 0, 0), e(n, 0, 1), e(n, 2, 2), e(n, 2, 3)])
}

fn q_witness() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[1.0, 0.0, 0.0, 1.0], &[0.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 2.0, 0.0], &[1.0, 0.0, 0.0, 1.0]])
        .scale_re(0.5)
}

// --- matcore -------------------------------------------------------------

#[test]
fn svd_of_diagonal_sorts() {
    let svd = svd_factor(&ComplexMatrix::from_real(&[&[3.0, 0.0], &[0.0, 4.0]])).unwrap();
    assert_eq!(svd.s, vec![4.0, 3.0]);
    let z = svd_factor(&ComplexMatrix::zeros(2, 2)).unwrap();
    assert_eq!(z.s, vec![0.0, 0.0]);
}

#[test]
fn ranks_of_simple_matrices() {
    assert_eq!(rank_tol(&ComplexMatrix::identity(3), &tol()).unwrap(), 3);
    assert_eq!(rank_tol(&e(2, 0, 1), &tol()).unwrap(), 1);
    assert_eq!(rank_tol(&ComplexMatrix::zeros(3, 3), &tol()).unwrap(), 0);
}

#[test]
fn orthonormal_span_examples() {
    let b = orthonormal_span(&[ComplexMatrix::identity(2), ComplexMatrix::identity(2).scale_re(2.0)], &tol()).unwrap();
    assert_eq!(b.len(), 1);
    assert!(b[0].dist(&ComplexMatrix::identity(2).scale_re(1.0 / 2f64.sqrt())) < 1e-12);
    assert_eq!(orthonormal_span(&[e(2, 0, 0), e(2, 0, 1), e(2, 1, 1)], &tol()).unwrap().len(), 3);
}

// --- subalgebra ----------------------------------------------------------

#[test]
fn membership_examples() {
    let s = space(2, &[e(2, 0, 0), e(2, 0, 1)]);
    assert!(s.contains(&e(2, 0, 1)).unwrap().inside);
    let m = s.contains(&e(2, 1, 0)).unwrap();
    assert!(!m.inside);
    assert!((m.residual - 1.0).abs() < 1e-12);
    let ex1 = make_family(&FamilySpec::ex1(4, [1, 2, 1]), tol()).unwrap();
    assert!(ex1.contains(&ComplexMatrix::identity(4)).unwrap().inside);
}

#[test]
fn closure_examples() {
    assert!(is_algebra(&space(2, &[e(2, 0, 0), e(2, 0, 1), e(2, 1, 1)])).closed);
    assert!(!is_algebra(&space(2, &[e(2, 0, 1), e(2, 1, 0)])).closed);
    let corner = compress(&two_corner_algebra(), &q_witness()).unwrap();
    assert!(!is_algebra(&corner).closed);
}

#[test]
fn generated_algebra_examples() {
    assert_eq!(generated_algebra(&[e(2, 0, 1), e(2, 1, 0)], tol()).unwrap().dim(), 4);
    let j3 = ComplexMatrix::from_real(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
    let g = generated_algebra(std::slice::from_ref(&j3), tol()).unwrap();
    assert_eq!(g.dim(), 2);
    assert!(g.contains(&j3.matmul(&j3)).unwrap().inside);
    let t = &ComplexMatrix::identity(4) + &e(4, 0, 1);
    assert_eq!(generated_algebra(&[t, ComplexMatrix::identity(4)], tol()).unwrap().dim(), 2);
}

#[test]
fn unitize_examples() {
    let u = unitize(&alg(2, &[e(2, 0, 1)])).unwrap();
    assert_eq!(u.dim(), 2);
    assert!(u.is_unital());
    // P M_4 Q with rank-2 orthogonal P and Q, plus the identity.
    let lr = make_family(&FamilySpec::lr(4, [2, 0, 2]), tol()).unwrap();
    assert_eq!(lr.dim(), 4);
    assert_eq!(unitize(&lr).unwrap().dim(), 5);
}

#[test]
fn compress_examples() {
    let scalar = alg(4, &[ComplexMatrix::identity(4)]);
    let p = sample_idempotent(4, Mode::Projection, Some(2), 9).unwrap();
    assert!(compress(&scalar, &p).unwrap().same_space(&space(4, std::slice::from_ref(&p))));
    let m2 = alg(2, &[e(2, 0, 0), e(2, 0, 1), e(2, 1, 0), e(2, 1, 1)]);
    assert!(compress(&m2, &e(2, 0, 0)).unwrap().same_space(&space(2, &[e(2, 0, 0)])));
}

#[test]
fn conjugate_and_transpose_examples() {
    let a = alg(2, &[e(2, 0, 1)]);
    assert!(conjugate(&a, &ComplexMatrix::identity(2)).unwrap().same_space(&a));
    let d = ComplexMatrix::diag(&[ONE, c(2.0, 0.0)]);
    assert!(conjugate(&a, &d).unwrap().same_space(&a));
    assert!(transpose_variant(&a, TransposeKind::Transpose).unwrap().same_space(&alg(2, &[e(2, 1, 0)])));
    assert!(transpose_variant(&a, TransposeKind::AntiTranspose).unwrap().same_space(&a));
}

#[test]
fn hinged_family_conjugates_to_unhinged() {
    // S = I + t E12 (0-based E01) carries the hinged family onto the unhinged one.
    let t = c(0.7, -0.3);
    let at = make_family(&FamilySpec::at(4, t), tol()).unwrap();
    let ex2 = make_family(&FamilySpec::ex2(4), tol()).unwrap();
    let mut s = ComplexMatrix::identity(4);
    s[(0, 1)] = t;
    assert!(conjugate(&ex2, &s).unwrap().same_space(&at) || conjugate(&at, &s).unwrap().same_space(&ex2));
}

// --- structure -----------------------------------------------------------

#[test]
fn radical_examples() {
    let t2 = alg(2, &[e(2, 0, 0), e(2, 0, 1), e(2, 1, 1)]);
    assert!(radical(&t2).unwrap().same_space(&space(2, &[e(2, 0, 1)])));
    let m3: Vec<ComplexMatrix> = (0..9).map(|k| e(3, k / 3, k % 3)).collect();
    assert_eq!(radical(&alg(3, &m3)).unwrap().dim(), 0);
    assert_eq!(radical(&make_family(&FamilySpec::ex3(4), tol()).unwrap()).unwrap().dim(), 5);
}

#[test]
fn triangularize_examples() {
    let m4: Vec<ComplexMatrix> = (0..16).map(|k| e(4, k / 4, k % 4)).collect();
    let b = triangularize(&alg(4, &m4)).unwrap();
    assert_eq!(b.sizes, vec![4]);
    assert_eq!(b.linkage, vec![vec![0]]);
    let b = triangularize(&alg(2, &[ComplexMatrix::identity(2), e(2, 0, 1)])).unwrap();
    assert_eq!(b.sizes, vec![1, 1]);
    assert_eq!(b.linkage, vec![vec![0, 1]]);
    let ex1 = make_family(&FamilySpec::ex1(4, [1, 2, 1]), tol()).unwrap();
    let b = triangularize(&ex1).unwrap();
    let mut sizes = b.sizes.clone();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![1, 1, 2]);
    // Q1 and Q3 blocks are unlinked from each other and from the big block.
    assert_eq!(b.linkage.len(), 3);
}

#[test]
fn block_diagonal_examples() {
    let t2 = alg(2, &[e(2, 0, 0), e(2, 0, 1), e(2, 1, 1)]);
    let b = triangularize(&t2).unwrap();
    assert_eq!(block_diagonal(&t2, &b).unwrap().dim(), 2);
    assert_eq!(linkage(&t2, &b).unwrap(), vec![vec![0], vec![1]]);
    let ex2 = make_family(&FamilySpec::ex2(4), tol()).unwrap();
    let b = triangularize(&ex2).unwrap();
    assert_eq!(block_diagonal(&ex2, &b).unwrap().dim(), 3);
    let scalar_plus_rad = alg(3, &[ComplexMatrix::identity(3), e(3, 0, 1), e(3, 0, 2), e(3, 1, 2)]);
    let b = triangularize(&scalar_plus_rad).unwrap();
    assert_eq!(block_diagonal(&scalar_plus_rad, &b).unwrap().dim(), 1);
}

#[test]
fn unhinge_examples() {
    let t = c(1.5, 0.5);
    // {[[α, (β - α) t], [0, β]]} is spanned by I and E11 - t E12.
    let mut x = e(2, 0, 0);
    x[(0, 1)] = -t;
    let a = alg(2, &[ComplexMatrix::identity(2), x]);
    let b = triangularize(&a).unwrap();
    let w = unhinge(&a, &b).unwrap();
    assert_eq!(w.rad.dim(), 0);
    assert_eq!(w.unhinged.dim(), 2);
    let ex1 = make_family(&FamilySpec::ex1(5, [1, 3, 1]), tol()).unwrap();
    let b = triangularize(&ex1).unwrap();
    let w = unhinge(&ex1, &b).unwrap();
    assert!(w.similarity.dist(&ComplexMatrix::identity(5)) < 1e-8);
    assert_eq!(w.bd.dim() + w.rad.dim(), ex1.dim());
}

#[test]
fn module_support_examples() {
    let fam: Vec<ComplexMatrix> = (0..2).flat_map(|i| (0..2).map(move |j| ComplexMatrix::unit(2, 3, i, j))).collect();
    let s = module_support(&fam, Side::Right, &tol()).unwrap();
    assert_eq!(s.rank, 2);
    assert!(s.projection.dist(&ComplexMatrix::diag(&[ONE, ONE, c(0.0, 0.0)])) < 1e-10);
}

// --- families ------------------------------------------------------------

#[test]
fn family_dimensions() {
    assert_eq!(make_family(&FamilySpec::ex1(4, [1, 2, 1]), tol()).unwrap().dim(), 11);
    assert_eq!(make_family(&FamilySpec::ex2(4), tol()).unwrap().dim(), 7);
    let at0 = make_family(&FamilySpec::at(4, c(0.0, 0.0)), tol()).unwrap();
    assert!(at0.same_space(&make_family(&FamilySpec::ex2(4), tol()).unwrap()));
    for n in 3..=6 {
        for r in rank_splits(FamilyTag::EX1, n) {
            let a = make_family(&FamilySpec::ex1(n, r), tol()).unwrap();
            assert_eq!(a.dim(), ex1_dimension(r), "EX1 {r:?}");
        }
    }
}

#[test]
fn frozen_corpus_sizes() {
    let count = |tag| (4..=6).map(|n| rank_splits(tag, n).len()).sum::<usize>();
    assert_eq!(count(FamilyTag::LR_UNITAL), 142);
    assert_eq!(count(FamilyTag::EX1), 3 + 6 + 10);
}

#[test]
fn disguised_instances() {
    let s = random_instance(&FamilySpec::scalar(5), Disguise::Unitary, 3, tol()).unwrap();
    assert!(s.same_space(&alg(5, &[ComplexMatrix::identity(5)])));
    let ex3 = random_instance(&FamilySpec::ex3(4), Disguise::Unitary, 7, tol()).unwrap();
    assert_eq!(classify(&ex3, 0).unwrap().family_tag(), Some(FamilyTag::EX3));
    let lr = random_instance(&FamilySpec::lr_unital(5, [1, 2, 2]), Disguise::Similarity, 1, tol()).unwrap();
    assert!(check_compressible(&lr, Mode::Idempotent, 500, 0).unwrap().is_clean());
}

// --- checker -------------------------------------------------------------

#[test]
fn sampled_idempotents() {
    assert!(sample_idempotent(4, Mode::Projection, Some(4), 0).unwrap().dist(&ComplexMatrix::identity(4)) < 1e-12);
    assert!((sample_idempotent(3, Mode::Projection, Some(1), 0).unwrap().trace().re - 1.0).abs() < 1e-12);
    let e2 = sample_idempotent(4, Mode::Idempotent, Some(2), 3).unwrap();
    let mut ev: Vec<f64> = eigenvalues(&e2).unwrap().iter().map(|z| z.re).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (got, want) in ev.iter().zip([0.0, 0.0, 1.0, 1.0]) {
        assert!((got - want).abs() < 1e-8);
    }
}

#[test]
fn catalog_contents() {
    let cat = witness_catalog(4);
    let q = cat.iter().find(|w| w.name == "Q").unwrap();
    assert!(q.projection().dist(&q_witness()) < 1e-15);
    assert!(witness_catalog(3).iter().all(|w| w.size() == 3));
    for w in witness_catalog(6) {
        let p = w.projection();
        assert!(p.matmul(&p).dist(&p) < 1e-12, "{}", w.name);
    }
}

#[test]
fn checker_examples() {
    assert!(check_compressible(&alg(4, &[ComplexMatrix::identity(4)]), Mode::Idempotent, 200, 0).unwrap().is_clean());
    let ex3 = make_family(&FamilySpec::ex3(4), tol()).unwrap();
    assert!(check_compressible(&ex3, Mode::Idempotent, 500, 0).unwrap().is_clean());
    let d3 = alg(3, &[e(3, 0, 0), e(3, 1, 1), e(3, 2, 2)]);
    let p = ComplexMatrix::from_real(&[&[1.0, 0.0, 1.0], &[0.0, 2.0, 0.0], &[1.0, 0.0, 1.0]]).scale_re(0.5);
    // The 3 x 3 pattern commutes with the coordinate frame's corners; the
    // catalog pass finds it in a rotated frame.
    assert!(replay(&d3, &p).unwrap().closed);
    let report = check_compressible(&d3, Mode::Projection, 0, 0).unwrap();
    assert!(report.violations.iter().any(|v| v.source.contains("P_prime3")));
}

#[test]
fn fold_examples() {
    let id = ComplexMatrix::identity(4);
    let (q1, ee) = fold_operands(&id);
    let m4: Vec<ComplexMatrix> = (0..16).map(|k| e(4, k / 4, k % 4)).collect();
    let f = fold_corner(&alg(4, &m4), &q1, &ee).unwrap();
    assert_eq!(f.dim(), 4);
    assert!(is_algebra(&f).closed);
    let f = fold_corner(&alg(4, std::slice::from_ref(&id)), &q1, &ee).unwrap();
    assert!(f.dim() <= 2 && is_algebra(&f).closed);
    let ex1 = make_family(&FamilySpec::ex1(4, [1, 2, 1]), tol()).unwrap();
    assert!(is_algebra(&fold_corner(&ex1, &q1, &ee).unwrap()).closed);
}

// --- classifier ----------------------------------------------------------

#[test]
fn classifier_examples() {
    let ex1 = make_family(&FamilySpec::ex1(5, [1, 3, 1]), tol()).unwrap();
    let v = classify(&ex1, 0).unwrap();
    assert!(v.compressible);
    assert_eq!(v.family_tag(), Some(FamilyTag::EX1));
    assert_eq!(v.type_path, TypePath::IIUnlinked);

    let a = two_corner_algebra();
    let v = classify(&a, 0).unwrap();
    assert!(!v.compressible);
    assert!(certify(&a, &v));
    assert!(!replay(&a, &q_witness()).unwrap().closed);

    let at = random_instance(&FamilySpec::at(4, c(2.0, 0.0)), Disguise::Unitary, 11, tol()).unwrap();
    let v = classify(&at, 0).unwrap();
    assert_eq!(v.family_tag(), Some(FamilyTag::AT));
    assert!((v.spec.as_ref().unwrap().t_value().norm() - 2.0).abs() < 1e-6);
    assert!(certify(&at, &v));
}

#[test]
fn tampered_certificate_fails() {
    let a = random_instance(&FamilySpec::ex3(5), Disguise::Similarity, 2, tol()).unwrap();
    let mut v = classify(&a, 0).unwrap();
    assert!(certify(&a, &v));
    v.similarity = Some(ComplexMatrix::identity(5));
    assert!(!certify(&a, &v));
}

#[test]
fn small_n_rejected() {
    assert!(classify(&alg(3, &[ComplexMatrix::identity(3)]), 0).is_err());
}

#[test]
fn generated_examples() {
    let t = &ComplexMatrix::identity(4) + &e(4, 0, 1);
    let g = classify_generated(&t, 0).unwrap();
    assert!(g.unital.compressible && g.non_unital.compressible);
    let j3 = ComplexMatrix::from_real(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
    assert!(!classify_generated(&j3, 0).unwrap().unital.compressible);
    let d = ComplexMatrix::diag(&[ONE, c(2.0, 0.0), c(3.0, 0.0)]);
    let g = classify_generated(&d, 0).unwrap();
    assert!(!g.unital.compressible && !g.non_unital.compressible);
    let a = generated_algebra(&[d, ComplexMatrix::identity(3)], tol()).unwrap();
    assert!(certify(&a, &g.unital));
}

/// Partitions of n into summands (k, m): M_k repeated m times on the diagonal.
fn semisimple_patterns(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(rest: usize, min: (usize, usize), cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for k in 1..=rest {
            for m in 1..=rest / k {
                if (k, m) < min {
                    continue;
                }
                cur.push((k, m));
                rec(rest - k * m, (k, m), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, (0, 0), &mut Vec::new(), &mut out);
    out
}

fn semisimple_algebra(n: usize, pattern: &[(usize, usize)]) -> MatrixAlgebra {
    let mut gens = Vec::new();
    let mut off = 0;
    for &(k, m) in pattern {
        for a in 0..k {
            for b in 0..k {
                let mut x = ComplexMatrix::zeros(n, n);
                for r in 0..m {
                    x[(off + r * k + a, off + r * k + b)] = ONE;
                }
                gens.push(x);
            }
        }
        off += k * m;
    }
    alg(n, &gens)
}

#[test]
fn semisimple_specialization() {
    for n in 4..=5 {
        for (idx, pattern) in semisimple_patterns(n).iter().enumerate() {
            let want = match pattern.as_slice() {
                [(k, m)] => *k == 1 || *m == 1,
                [(1, m), (k, 1)] | [(k, 1), (1, m)] => k + m == n,
                _ => false,
            };
            let a = semisimple_algebra(n, pattern);
            let a = conjugate(&a, &corneralg::families::disguise_matrix(n, Disguise::Similarity, idx as u64)).unwrap();
            let v = classify(&a, idx as u64).unwrap();
            assert_eq!(v.compressible, want, "n = {n}, pattern {pattern:?}");
            assert!(certify(&a, &v), "n = {n}, pattern {pattern:?}");
        }
    }
}

#[test]
fn unitization_of_lr_is_compressible() {
    for n in 4..=5 {
        let splits = rank_splits(FamilyTag::LR, n);
        assert!(!splits.is_empty());
        for r in splits {
            let a = make_family(&FamilySpec::lr(n, r), tol()).unwrap();
            let u = unitize(&a).unwrap();
            let v = classify(&u, 1).unwrap();
            assert!(v.compressible, "n = {n}, ranks {r:?}");
            assert!(certify(&u, &v));
        }
    }
}
