//! Seeded randomness: substreams, complex Gaussians, Haar unitaries and
//! condition-capped similarities.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::{c, householder_qr, ComplexMatrix, C64};

pub type Rng = ChaCha8Rng;

/// Largest condition number of a random similarity.
pub const MAX_SIMILARITY_CONDITION: f64 = 50.0;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Independent stream for (seed, purpose, index).
pub fn substream(seed: u64, purpose: u64, index: u64) -> Rng {
    let mut r = Rng::seed_from_u64(splitmix(seed ^ splitmix(purpose)));
    r.set_stream(index);
    r
}

/// Standard complex normal: real and imaginary parts N(0, 1/2).
pub fn gaussian_c(rng: &mut Rng) -> C64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    c(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector(rng: &mut Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| gaussian_c(rng)).collect()
}

pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_c(rng))
}

pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn index(rng: &mut Rng, n: usize) -> usize {
    rng.random_range(0..n)
}

/// Haar unitary: QR of a complex Gaussian with the phases of diag(R) moved
/// into Q.
pub fn haar_unitary(rng: &mut Rng, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let (q, r) = householder_qr(&g, true);
    let mut q = q.expect("requested Q");
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// U diag(s) V^* with Haar U, V and singular values in [1, max_cond],
/// including both endpoints when n ≥ 2.
pub fn random_similarity(rng: &mut Rng, n: usize, max_cond: f64) -> ComplexMatrix {
    let u = haar_unitary(rng, n);
    let v = haar_unitary(rng, n);
    let lc = max_cond.max(1.0).ln();
    let mut s: Vec<f64> = (0..n).map(|_| uniform(rng, 0.0, 1.0) * lc).collect();
    if n >= 2 {
        s[0] = 0.0;
        s[n - 1] = lc;
    }
    let d = ComplexMatrix::diag(&s.iter().map(|x| c(x.exp(), 0.0)).collect::<Vec<_>>());
    u.matmul(&d).matmul(&v.adjoint())
}
