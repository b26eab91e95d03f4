//! Subspaces and subalgebras of M_n held by orthonormal Frobenius bases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    inverse, orthonormal_span, orthonormal_vectors, rank_tol, vdot, ComplexMatrix, Tolerance, C64, ZERO,
};

/// A linear subspace of n x n matrices with an orthonormal basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixSubspace {
    n: usize,
    basis: Vec<ComplexMatrix>,
    tol: Tolerance,
}

/// Outcome of a membership test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub inside: bool,
    pub residual: f64,
}

/// Outcome of a multiplicative closure test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    pub closed: bool,
    /// Basis pair (i, j) whose product b_i b_j is farthest from the space.
    pub worst_pair: Option<(usize, usize)>,
    pub residual: f64,
}

impl MatrixSubspace {
    /// Span of arbitrary n x n matrices.
    pub fn span(n: usize, family: &[ComplexMatrix], tol: Tolerance) -> Result<Self> {
        if family.iter().any(|x| x.shape() != (n, n)) {
            return Err(Error::Shape(format!("span: expected {n}x{n} members")));
        }
        Ok(MatrixSubspace { n, basis: orthonormal_span(family, &tol)?, tol })
    }

    pub fn zero(n: usize, tol: Tolerance) -> Self {
        MatrixSubspace { n, basis: Vec::new(), tol }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn tol(&self) -> Tolerance {
        self.tol
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.n, self.n);
        for b in &self.basis {
            p.axpy(x.inner(b), b);
        }
        p
    }

    /// Coordinates of the projection in the orthonormal basis.
    pub fn coordinates(&self, x: &ComplexMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| x.inner(b)).collect()
    }

    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        let mut r = x.clone();
        for b in &self.basis {
            r.axpy(-x.inner(b), b);
        }
        r.fro_norm()
    }

    pub fn contains(&self, x: &ComplexMatrix) -> Result<Membership> {
        if x.shape() != (self.n, self.n) {
            return Err(Error::Shape(format!("contains: expected {}x{}", self.n, self.n)));
        }
        let residual = self.residual(x);
        Ok(Membership { inside: residual <= self.tol.rel_eps * x.fro_norm().max(1.0), residual })
    }

    /// Largest residual of `other`'s basis against `self`.
    pub fn containment_residual(&self, other: &MatrixSubspace) -> f64 {
        other.basis.iter().map(|b| self.residual(b)).fold(0.0, f64::max)
    }

    pub fn contains_space(&self, other: &MatrixSubspace) -> bool {
        other.basis.iter().all(|b| self.residual(b) <= self.tol.rel_eps * b.fro_norm().max(1.0))
    }

    /// Mutual containment with equal dimension.
    pub fn same_space(&self, other: &MatrixSubspace) -> bool {
        self.n == other.n && self.dim() == other.dim() && self.contains_space(other) && other.contains_space(self)
    }

    /// Sum of two subspaces.
    pub fn sum(&self, other: &MatrixSubspace) -> Result<MatrixSubspace> {
        let fam: Vec<ComplexMatrix> = self.basis.iter().chain(&other.basis).cloned().collect();
        MatrixSubspace::span(self.n, &fam, self.tol)
    }

    /// Closure test over every ordered basis pair.
    pub fn closure(&self) -> Closure {
        let mut worst = Closure { closed: true, worst_pair: None, residual: 0.0 };
        for (i, bi) in self.basis.iter().enumerate() {
            for (j, bj) in self.basis.iter().enumerate() {
                let p = bi.matmul(bj);
                let r = self.residual(&p);
                if r > worst.residual {
                    worst.residual = r;
                    worst.worst_pair = Some((i, j));
                }
                if r > self.tol.rel_eps * p.fro_norm().max(1.0) {
                    worst.closed = false;
                }
            }
        }
        if worst.closed {
            worst.worst_pair = None;
        }
        worst
    }

    /// Maps every basis element through `f` and re-orthonormalizes.
    pub fn map(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Result<MatrixSubspace> {
        let fam: Vec<ComplexMatrix> = self.basis.iter().map(f).collect();
        MatrixSubspace::span(self.n, &fam, self.tol)
    }
}

/// True iff every product of basis elements lies in the space.
pub fn is_algebra(space: &MatrixSubspace) -> Closure {
    space.closure()
}

/// A multiplicatively closed subspace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixAlgebra {
    space: MatrixSubspace,
    unital: bool,
}

impl MatrixAlgebra {
    /// Validates closure and computes the unital flag.
    pub fn from_space(space: MatrixSubspace) -> Result<Self> {
        let cl = space.closure();
        if !cl.closed {
            return Err(Error::NotAlgebra(cl.residual));
        }
        Ok(Self::from_space_unchecked(space))
    }

    /// Trusts the caller that the space is closed.
    pub fn from_space_unchecked(space: MatrixSubspace) -> Self {
        let id = ComplexMatrix::identity(space.n());
        let unital = space.dim() > 0 && space.contains(&id).map(|m| m.inside).unwrap_or(false);
        MatrixAlgebra { space, unital }
    }

    pub fn span(n: usize, family: &[ComplexMatrix], tol: Tolerance) -> Result<Self> {
        Self::from_space(MatrixSubspace::span(n, family, tol)?)
    }

    pub fn space(&self) -> &MatrixSubspace {
        &self.space
    }

    pub fn into_space(self) -> MatrixSubspace {
        self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        self.space.basis()
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn tol(&self) -> Tolerance {
        self.space.tol()
    }

    pub fn contains(&self, x: &ComplexMatrix) -> Result<Membership> {
        self.space.contains(x)
    }

    pub fn same_space(&self, other: &MatrixAlgebra) -> bool {
        self.space.same_space(&other.space)
    }
}

/// Smallest algebra containing the generators.
pub fn generated_algebra(gens: &[ComplexMatrix], tol: Tolerance) -> Result<MatrixAlgebra> {
    let n = match gens.first() {
        Some(g) if g.is_square() => g.rows(),
        Some(_) => return Err(Error::Shape("generators must be square".into())),
        None => return Err(Error::InvalidInput("no generators".into())),
    };
    let mut basis = orthonormal_span(gens, &tol)?;
    for _ in 0..n * n {
        let space = MatrixSubspace { n, basis: basis.clone(), tol };
        let mut fresh = Vec::new();
        for bi in &basis {
            for bj in &basis {
                let p = bi.matmul(bj);
                let mut r = p.clone();
                for b in &basis {
                    r.axpy(-p.inner(b), b);
                }
                if r.fro_norm() > tol.rel_eps * p.fro_norm().max(1.0) {
                    fresh.push(r);
                }
            }
        }
        if fresh.is_empty() {
            return MatrixAlgebra::from_space(space);
        }
        let mut fam = basis.clone();
        fam.extend(fresh);
        let next = orthonormal_span(&fam, &tol)?;
        if next.len() == basis.len() {
            return MatrixAlgebra::from_space(MatrixSubspace { n, basis: next, tol });
        }
        basis = next;
    }
    MatrixAlgebra::from_space(MatrixSubspace { n, basis, tol })
}

/// span(A ∪ {I}).
pub fn unitize(a: &MatrixAlgebra) -> Result<MatrixAlgebra> {
    if a.is_unital() {
        return Ok(a.clone());
    }
    let mut fam = a.basis().to_vec();
    fam.push(ComplexMatrix::identity(a.n()));
    let space = MatrixSubspace::span(a.n(), &fam, a.tol())?;
    Ok(MatrixAlgebra { space, unital: true })
}

/// Frobenius residual of E^2 - E.
pub fn idempotency_residual(e: &ComplexMatrix) -> f64 {
    e.matmul(e).dist(e)
}

/// The corner E A E, kept in ambient coordinates.
pub fn compress(a: &MatrixAlgebra, e: &ComplexMatrix) -> Result<MatrixSubspace> {
    if e.shape() != (a.n(), a.n()) {
        return Err(Error::Shape("compress: idempotent has the wrong size".into()));
    }
    let r = idempotency_residual(e);
    if r > a.tol().rel_eps * e.fro_norm().max(1.0) {
        return Err(Error::NotIdempotent(r));
    }
    let fam: Vec<ComplexMatrix> = a.basis().iter().map(|b| e.matmul(b).matmul(e)).collect();
    if fam.is_empty() {
        return Ok(MatrixSubspace::zero(a.n(), a.tol()));
    }
    MatrixSubspace::span(a.n(), &fam, a.tol())
}

/// Conjugated algebra S^{-1} A S.
pub fn conjugate(a: &MatrixAlgebra, s: &ComplexMatrix) -> Result<MatrixAlgebra> {
    if s.shape() != (a.n(), a.n()) {
        return Err(Error::Shape("conjugate: similarity has the wrong size".into()));
    }
    if rank_tol(s, &a.tol())? < a.n() {
        return Err(Error::Singular);
    }
    let si = inverse(s)?;
    let space = a.space().map(|x| si.matmul(x).matmul(s))?;
    if space.dim() != a.dim() {
        return Err(Error::Numerical("conjugation changed the dimension".into()));
    }
    Ok(MatrixAlgebra { space, unital: a.is_unital() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransposeKind {
    Transpose,
    AntiTranspose,
}

/// X ↦ X^T, or X ↦ J X^T J.
pub fn transpose_matrix(x: &ComplexMatrix, which: TransposeKind) -> ComplexMatrix {
    match which {
        TransposeKind::Transpose => x.transpose(),
        TransposeKind::AntiTranspose => {
            let n = x.rows();
            ComplexMatrix::from_fn(n, n, |i, j| x[(n - 1 - j, n - 1 - i)])
        }
    }
}

pub fn transpose_variant(a: &MatrixAlgebra, which: TransposeKind) -> Result<MatrixAlgebra> {
    let space = a.space().map(|x| transpose_matrix(x, which))?;
    Ok(MatrixAlgebra { space, unital: a.is_unital() })
}

/// Orthonormal basis of the span of vectors given as columns, returned as
/// vectors.
pub fn vector_span(vectors: &[Vec<C64>], tol: &Tolerance) -> Result<Vec<Vec<C64>>> {
    orthonormal_vectors(vectors, tol)
}

/// Projection of a vector onto an orthonormal set.
pub fn project_vector(basis: &[Vec<C64>], v: &[C64]) -> Vec<C64> {
    let mut p = vec![ZERO; v.len()];
    for b in basis {
        let d = vdot(b, v);
        for (pi, bi) in p.iter_mut().zip(b) {
            *pi += d * bi;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;

    fn e(n: usize, i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::unit(n, n, i, j)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn membership_examples() {
        let s = MatrixSubspace::span(2, &[e(2, 0, 0), e(2, 0, 1)], tol()).unwrap();
        assert!(s.contains(&e(2, 0, 1)).unwrap().inside);
        let m = s.contains(&e(2, 1, 0)).unwrap();
        assert!(!m.inside);
        assert!((m.residual - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closure_examples() {
        let t2 = MatrixSubspace::span(2, &[e(2, 0, 0), e(2, 0, 1), e(2, 1, 1)], tol()).unwrap();
        assert!(is_algebra(&t2).closed);
        let off = MatrixSubspace::span(2, &[e(2, 0, 1), e(2, 1, 0)], tol()).unwrap();
        let cl = is_algebra(&off);
        assert!(!cl.closed);
        assert!(cl.worst_pair.is_some());
    }

    #[test]
    fn generated_examples() {
        assert_eq!(generated_algebra(&[e(2, 0, 1), e(2, 1, 0)], tol()).unwrap().dim(), 4);
        let j3 = &e(3, 0, 1) + &e(3, 1, 2);
        assert_eq!(generated_algebra(&[j3], tol()).unwrap().dim(), 2);
        let t = &ComplexMatrix::identity(4) + &e(4, 0, 1);
        assert_eq!(generated_algebra(&[t, ComplexMatrix::identity(4)], tol()).unwrap().dim(), 2);
    }

    #[test]
    fn unitize_examples() {
        let a = MatrixAlgebra::span(2, &[e(2, 0, 1)], tol()).unwrap();
        let u = unitize(&a).unwrap();
        assert_eq!(u.dim(), 2);
        assert!(u.is_unital());
        let full = generated_algebra(&[e(3, 0, 1), e(3, 1, 2), e(3, 2, 0)], tol()).unwrap();
        assert_eq!(unitize(&full).unwrap().dim(), 9);
    }

    #[test]
    fn compress_examples() {
        let scalar = MatrixAlgebra::span(4, &[ComplexMatrix::identity(4)], tol()).unwrap();
        let p = ComplexMatrix::diag(&[c(1.0, 0.0), c(1.0, 0.0), ZERO, ZERO]);
        let corner = compress(&scalar, &p).unwrap();
        assert_eq!(corner.dim(), 1);
        assert!(corner.contains(&p).unwrap().inside);
        let not_idem = ComplexMatrix::identity(4).scale_re(2.0);
        assert!(matches!(compress(&scalar, &not_idem), Err(Error::NotIdempotent(_))));
    }

    #[test]
    fn conjugate_scaling() {
        let a = MatrixAlgebra::span(2, &[e(2, 0, 1)], tol()).unwrap();
        let s = ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(conjugate(&a, &s).unwrap().same_space(&a));
        assert!(matches!(conjugate(&a, &ComplexMatrix::zeros(2, 2)), Err(Error::Singular)));
    }

    #[test]
    fn transpose_examples() {
        let a = MatrixAlgebra::span(2, &[e(2, 0, 1)], tol()).unwrap();
        let t = transpose_variant(&a, TransposeKind::Transpose).unwrap();
        assert!(t.contains(&e(2, 1, 0)).unwrap().inside);
        let at = transpose_variant(&a, TransposeKind::AntiTranspose).unwrap();
        assert!(at.contains(&e(2, 0, 1)).unwrap().inside);
    }

    #[test]
    fn anti_transpose_matches_definition() {
        let x = ComplexMatrix::from_fn(3, 3, |i, j| c((3 * i + j) as f64, i as f64));
        let j = ComplexMatrix::anti_identity(3);
        let expect = j.matmul(&x.transpose()).matmul(&j);
        assert!(transpose_matrix(&x, TransposeKind::AntiTranspose).dist(&expect) < 1e-15);
    }
}
