//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use corneralg::families::{random_instance, rank_splits, Disguise, FamilySpec, FamilyTag};
use corneralg::matcore::c;
use corneralg::random::{gaussian_c, random_similarity, rng_from, uniform, MAX_SIMILARITY_CONDITION};
use corneralg::subalgebra::{conjugate, generated_algebra};
use corneralg::{ComplexMatrix, MatrixAlgebra, Tolerance};
use rand::Rng as _;

/// Hinge scalar used for the AT entries of the corpus.
pub const CORPUS_T: [f64; 2] = [1.5, -0.5];

/// Every compressible family with all rank splits for n in `ns`.
pub fn corpus_specs(ns: &[usize]) -> Vec<FamilySpec> {
    let mut specs = Vec::new();
    for &n in ns {
        for r in rank_splits(FamilyTag::LR_UNITAL, n) {
            specs.push(FamilySpec::lr_unital(n, r));
        }
        for r in rank_splits(FamilyTag::EX1, n) {
            specs.push(FamilySpec::ex1(n, r));
        }
        specs.push(FamilySpec::ex2(n));
        specs.push(FamilySpec::ex3(n));
        specs.push(FamilySpec::at(n, c(CORPUS_T[0], CORPUS_T[1])));
    }
    specs
}

/// Disguise k of an instance: canonical, then alternating unitary and
/// bounded-condition similarity.
pub fn corpus_disguise(k: usize) -> Disguise {
    match k {
        0 => Disguise::None,
        k if k % 2 == 1 => Disguise::Unitary,
        _ => Disguise::Similarity,
    }
}

pub fn corpus_instance(spec: &FamilySpec, index: usize, k: usize) -> MatrixAlgebra {
    let seed = (index as u64) * 1000 + k as u64;
    random_instance(spec, corpus_disguise(k), seed, Tolerance::default()).expect("corpus instance")
}

/// Unital algebra generated by I and 1-3 random upper triangular matrices
/// with a random sparsity pattern, disguised by a random similarity.
pub fn random_unital_algebra(n: usize, seed: u64) -> MatrixAlgebra {
    let mut rng = rng_from(seed);
    let count = 1 + rng.random_range(0..3);
    let density = uniform(&mut rng, 0.2, 0.7);
    let mut gens = vec![ComplexMatrix::identity(n)];
    for _ in 0..count {
        let g = ComplexMatrix::from_fn(n, n, |i, j| {
            if j >= i && rng.random_bool(density) {
                gaussian_c(&mut rng)
            } else {
                c(0.0, 0.0)
            }
        });
        gens.push(g);
    }
    let a = generated_algebra(&gens, Tolerance::default()).expect("generated algebra");
    let s = random_similarity(&mut rng, n, MAX_SIMILARITY_CONDITION);
    conjugate(&a, &s).expect("conjugate")
}
