//! Radical, reduced block upper triangular form, block-diagonal part,
//! linkage, unhinging similarity and module supports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    cluster_values, eigenvalues, inverse, lstsq, null_space, orthogonal_complement, orthonormal_vectors, svd_factor,
    ComplexMatrix, Tolerance, C64, ONE, ZERO,
};
use crate::random::{gaussian_c, substream, Rng};
use crate::subalgebra::{unitize, MatrixAlgebra, MatrixSubspace};

/// Attempts allowed for the randomized invariant-subspace search.
pub const RETRY_BUDGET: usize = 32;

/// An orthonormal frame in which the algebra is in reduced block upper
/// triangular form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockStructure {
    /// Unitary U; columns are the adapted basis.
    pub frame: ComplexMatrix,
    pub sizes: Vec<usize>,
    /// Classes of linked block indices (0-based), each sorted, ordered by
    /// their first member.
    pub linkage: Vec<Vec<usize>>,
}

impl BlockStructure {
    pub fn n(&self) -> usize {
        self.frame.rows()
    }

    pub fn offsets(&self) -> Vec<usize> {
        offsets(&self.sizes)
    }

    /// U^* X U.
    pub fn to_frame(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.frame.adjoint().matmul(x).matmul(&self.frame)
    }

    /// U Y U^*.
    pub fn from_frame(&self, y: &ComplexMatrix) -> ComplexMatrix {
        self.frame.matmul(y).matmul(&self.frame.adjoint())
    }

    pub fn class_of(&self, block: usize) -> usize {
        self.linkage.iter().position(|c| c.contains(&block)).expect("every block has a class")
    }

    /// Coordinates (in the frame) covered by a block.
    pub fn coords(&self, block: usize) -> std::ops::Range<usize> {
        let off = self.offsets();
        off[block]..off[block] + self.sizes[block]
    }
}

pub fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut off = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for &s in sizes {
        off.push(acc);
        acc += s;
    }
    off
}

/// Diagonal block (i, i) part of X, zero elsewhere.
pub fn bd_part(x: &ComplexMatrix, sizes: &[usize]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
    for (o, s) in offsets(sizes).into_iter().zip(sizes) {
        for i in o..o + s {
            for j in o..o + s {
                out[(i, j)] = x[(i, j)];
            }
        }
    }
    out
}

/// Norm of the part of X strictly below the block diagonal.
pub fn below_blocks_norm(x: &ComplexMatrix, sizes: &[usize]) -> f64 {
    let off = offsets(sizes);
    let mut acc = 0.0;
    for (bi, (&oi, &si)) in off.iter().zip(sizes).enumerate() {
        for (&oj, &sj) in off.iter().zip(sizes).take(bi) {
            for i in oi..oi + si {
                for j in oj..oj + sj {
                    acc += x[(i, j)].norm_sqr();
                }
            }
        }
    }
    acc.sqrt()
}

pub fn block(x: &ComplexMatrix, sizes: &[usize], i: usize, j: usize) -> ComplexMatrix {
    let off = offsets(sizes);
    x.block(off[i], off[j], sizes[i], sizes[j])
}

fn dim_of(family: &[Vec<C64>], tol: &Tolerance) -> Result<usize> {
    if family.is_empty() || family.iter().all(|v| v.iter().all(|z| *z == ZERO)) {
        return Ok(0);
    }
    Ok(orthonormal_vectors(family, tol)?.len())
}

// ---------------------------------------------------------------------------
// radical

/// Kernel of the trace form Tr(xy) on the span of `basis` (assumed unital).
fn trace_form_kernel(basis: &[ComplexMatrix], tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
    let d = basis.len();
    if d == 0 {
        return Ok(Vec::new());
    }
    let n = basis[0].rows();
    let g = ComplexMatrix::from_fn(d, d, |i, j| {
        let (a, b) = (&basis[i], &basis[j]);
        let mut t = ZERO;
        for p in 0..n {
            for q in 0..n {
                t += a[(p, q)] * b[(q, p)];
            }
        }
        t
    });
    let kernel = null_space(&g, tol)?;
    Ok(kernel
        .into_iter()
        .map(|cvec| {
            let mut x = ComplexMatrix::zeros(n, n);
            for (ci, b) in cvec.iter().zip(basis) {
                x.axpy(*ci, b);
            }
            x
        })
        .collect())
}

/// Rad(A) = {x ∈ A : Tr(xy) = 0 for all y ∈ A}, computed on the unitization.
pub fn radical(a: &MatrixAlgebra) -> Result<MatrixSubspace> {
    let u = unitize(a)?;
    let tol = a.tol();
    let elems = trace_form_kernel(u.basis(), &tol)?;
    MatrixSubspace::span(a.n(), &elems, tol)
}

/// Elements of a framed algebra with zero block-diagonal part.
pub fn structural_radical(framed: &[ComplexMatrix], sizes: &[usize], tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
    if framed.is_empty() {
        return Ok(Vec::new());
    }
    let n = framed[0].rows();
    let cols: Vec<Vec<C64>> = framed.iter().map(|x| bd_part(x, sizes).as_slice().to_vec()).collect();
    let m = ComplexMatrix::from_columns(n * n, &cols);
    // Rank decisions relative to the framed basis, which has unit norm.
    let mut kernel = Vec::new();
    let svd = svd_factor(&m)?;
    let thr = tol.rank_eps_factor.max(tol.rel_eps * 1e-2);
    let r = svd.s.iter().filter(|&&s| s > thr).count();
    for j in r..framed.len() {
        let cvec = svd.v.column(j);
        let mut x = ComplexMatrix::zeros(n, n);
        for (ci, b) in cvec.iter().zip(framed) {
            x.axpy(*ci, b);
        }
        kernel.push(x);
    }
    Ok(kernel)
}

// ---------------------------------------------------------------------------
// triangularization

fn compress_family(basis: &[ComplexMatrix], v: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let vh = v.adjoint();
    basis.iter().map(|b| vh.matmul(b).matmul(v)).collect()
}

fn is_invariant(basis: &[ComplexMatrix], v: &ComplexMatrix, tol: &Tolerance) -> bool {
    let vh = v.adjoint();
    basis.iter().all(|b| {
        let bv = b.matmul(v);
        let r = &bv - &v.matmul(&vh.matmul(&bv));
        r.fro_norm() <= 10.0 * tol.rel_eps * b.fro_norm().max(1.0)
    })
}

fn random_element(basis: &[ComplexMatrix], rng: &mut Rng) -> ComplexMatrix {
    let d = basis[0].rows();
    let mut x = ComplexMatrix::zeros(d, d);
    for b in basis {
        x.axpy(gaussian_c(rng), b);
    }
    x
}

/// Spectral idempotents of a diagonalizable matrix, one per eigenvalue
/// cluster, by Lagrange interpolation.
pub fn spectral_idempotents(z: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    let d = z.rows();
    let ev = eigenvalues(z)?;
    let radius = 1e-6 * z.fro_norm().max(1.0);
    let clusters = cluster_values(&ev, radius);
    if clusters.len() < 2 {
        return Ok(vec![ComplexMatrix::identity(d)]);
    }
    let id = ComplexMatrix::identity(d);
    let mut out = Vec::with_capacity(clusters.len());
    for (k, (lam, _)) in clusters.iter().enumerate() {
        let mut e = id.clone();
        for (l, (mu, _)) in clusters.iter().enumerate() {
            if l == k {
                continue;
            }
            let mut f = z.clone();
            f.axpy(-*mu, &id);
            e = e.matmul(&f.scale(ONE / (lam - mu)));
        }
        out.push(e);
    }
    Ok(out)
}

/// Isometry onto the range of an idempotent; rank read off the singular
/// value gap (nonzero singular values of an idempotent are at least 1).
fn idempotent_range(e: &ComplexMatrix) -> Result<ComplexMatrix> {
    let svd = svd_factor(e)?;
    let r = svd.s.iter().filter(|&&s| s > 0.5).count();
    Ok(svd.u.select_columns(&(0..r).collect::<Vec<_>>()))
}

fn center_basis(basis: &[ComplexMatrix], tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
    let k = basis.len();
    let d = basis[0].rows();
    let mut m = ComplexMatrix::zeros(k * d * d, k);
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate() {
            let comm = &bi.matmul(bj) - &bj.matmul(bi);
            for (e, z) in comm.as_slice().iter().enumerate() {
                m[(j * d * d + e, i)] = *z;
            }
        }
    }
    let ns = null_space(&m, tol)?;
    Ok(ns
        .into_iter()
        .map(|cvec| {
            let mut x = ComplexMatrix::zeros(d, d);
            for (ci, b) in cvec.iter().zip(basis) {
                x.axpy(*ci, b);
            }
            x
        })
        .collect())
}

/// Proper nonzero invariant subspace of a reducible unital algebra, as an
/// isometry d x k.
fn invariant_subspace(basis: &[ComplexMatrix], rng: &mut Rng, tol: &Tolerance) -> Result<ComplexMatrix> {
    let d = basis[0].rows();
    let proper = |v: &ComplexMatrix| v.cols() > 0 && v.cols() < d && is_invariant(basis, v, tol);

    let rad = trace_form_kernel(basis, tol)?;
    if !rad.is_empty() {
        let cols: Vec<Vec<C64>> = rad.iter().flat_map(|r| r.columns()).collect();
        let v = ComplexMatrix::from_columns(d, &orthonormal_vectors(&cols, tol)?);
        if proper(&v) {
            return Ok(v);
        }
    }

    let center = center_basis(basis, tol)?;
    for _ in 0..RETRY_BUDGET {
        if center.len() > 1 {
            let z = random_element(&center, rng);
            let mut candidates = Vec::new();
            for e in spectral_idempotents(&z)? {
                let v = idempotent_range(&e)?;
                if proper(&v) {
                    candidates.push(v);
                }
            }
            if let Some(v) = candidates.into_iter().min_by_key(|v| v.cols()) {
                return Ok(v);
            }
        }
        // Cyclic subspace A v0 of a vector from a spectral range of a random element.
        let b = random_element(basis, rng);
        let mut ranges: Vec<ComplexMatrix> = Vec::new();
        for e in spectral_idempotents(&b)? {
            ranges.push(idempotent_range(&e)?);
        }
        ranges.sort_by_key(|v| v.cols());
        for r in ranges.into_iter().filter(|r| r.cols() > 0) {
            let v0 = r.column(0);
            let orbit: Vec<Vec<C64>> = basis.iter().map(|x| x.mat_vec(&v0)).collect();
            let v = ComplexMatrix::from_columns(d, &orthonormal_vectors(&orbit, tol)?);
            if proper(&v) {
                return Ok(v);
            }
        }
    }
    Err(Error::Numerical("no proper invariant subspace found within the retry budget".into()))
}

fn reduce(basis: &[ComplexMatrix], rng: &mut Rng, tol: &Tolerance) -> Result<(ComplexMatrix, Vec<usize>)> {
    let d = basis[0].rows();
    if d == 1 {
        return Ok((ComplexMatrix::identity(1), vec![1]));
    }
    let vecs: Vec<Vec<C64>> = basis.iter().map(|x| x.as_slice().to_vec()).collect();
    let ortho: Vec<ComplexMatrix> = orthonormal_vectors(&vecs, tol)?
        .into_iter()
        .map(|v| ComplexMatrix::from_vec(d, d, v))
        .collect::<Result<_>>()?;
    if ortho.len() == d * d {
        return Ok((ComplexMatrix::identity(d), vec![d]));
    }
    let v = invariant_subspace(&ortho, rng, tol)?;
    let w = orthogonal_complement(&v)?;
    let (u1, s1) = reduce(&compress_family(&ortho, &v), rng, tol)?;
    let (u2, s2) = reduce(&compress_family(&ortho, &w), rng, tol)?;
    let left = v.matmul(&u1);
    let right = w.matmul(&u2);
    let mut u = ComplexMatrix::zeros(d, d);
    u.set_block(0, 0, &left);
    u.set_block(0, left.cols(), &right);
    let mut sizes = s1;
    sizes.extend(s2);
    Ok((u, sizes))
}

/// Checks the reduced-form conditions for a frame: block upper triangular,
/// each diagonal block algebra {0} (size 1) or full.
pub fn verify_reduced_form(framed: &[ComplexMatrix], sizes: &[usize], tol: &Tolerance) -> Result<()> {
    for x in framed {
        let r = below_blocks_norm(x, sizes);
        if r > 10.0 * tol.rel_eps * x.fro_norm().max(1.0) {
            return Err(Error::Numerical(format!("frame is not block upper triangular (residual {r:.2e})")));
        }
    }
    for i in 0..sizes.len() {
        let fam: Vec<Vec<C64>> = framed.iter().map(|x| block(x, sizes, i, i).as_slice().to_vec()).collect();
        let dim = dim_of(&fam, tol)?;
        let d = sizes[i];
        let ok = dim == d * d || (d == 1 && dim == 0);
        if !ok {
            return Err(Error::Numerical(format!("block {i} of size {d} has algebra of dimension {dim}")));
        }
    }
    Ok(())
}

/// Reduced block upper triangular form of a unital algebra (seed 0).
pub fn triangularize(a: &MatrixAlgebra) -> Result<BlockStructure> {
    triangularize_seeded(a, 0)
}

pub fn triangularize_seeded(a: &MatrixAlgebra, seed: u64) -> Result<BlockStructure> {
    if !a.is_unital() {
        return Err(Error::InvalidInput("triangularize needs a unital algebra".into()));
    }
    let tol = a.tol();
    let mut last = Error::Numerical("triangularization failed".into());
    for attempt in 0..RETRY_BUDGET as u64 {
        let mut rng = substream(seed, 0x7472_6961, attempt);
        let (u, sizes) = match reduce(a.basis(), &mut rng, &tol) {
            Ok(r) => r,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let uh = u.adjoint();
        let framed: Vec<ComplexMatrix> = a.basis().iter().map(|b| uh.matmul(b).matmul(&u)).collect();
        if let Err(e) = verify_reduced_form(&framed, &sizes, &tol) {
            last = e;
            continue;
        }
        let linkage = linkage_of(&framed, &sizes, &tol)?;
        return Ok(BlockStructure { frame: u, sizes, linkage });
    }
    Err(last)
}

/// Basis of A expressed in the frame, U^* b U.
pub fn framed_basis(a: &MatrixAlgebra, b: &BlockStructure) -> Vec<ComplexMatrix> {
    a.basis().iter().map(|x| b.to_frame(x)).collect()
}

/// The algebra in frame coordinates.
pub fn framed_algebra(a: &MatrixAlgebra, b: &BlockStructure) -> Result<MatrixAlgebra> {
    Ok(MatrixAlgebra::from_space_unchecked(MatrixSubspace::span(a.n(), &framed_basis(a, b), a.tol())?))
}

/// BD(A) in frame coordinates.
pub fn block_diagonal(a: &MatrixAlgebra, b: &BlockStructure) -> Result<MatrixAlgebra> {
    check_structure(a, b)?;
    let fam: Vec<ComplexMatrix> = framed_basis(a, b).iter().map(|x| bd_part(x, &b.sizes)).collect();
    MatrixAlgebra::span(a.n(), &fam, a.tol())
}

fn check_structure(a: &MatrixAlgebra, b: &BlockStructure) -> Result<()> {
    if b.n() != a.n() || b.sizes.iter().sum::<usize>() != a.n() {
        return Err(Error::InvalidInput("block structure does not match the algebra".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// linkage

fn linkage_of(framed: &[ComplexMatrix], sizes: &[usize], tol: &Tolerance) -> Result<Vec<Vec<usize>>> {
    let m = sizes.len();
    let blocks: Vec<Vec<Vec<C64>>> = (0..m)
        .map(|i| framed.iter().map(|x| block(x, sizes, i, i).as_slice().to_vec()).collect())
        .collect();
    let dims: Vec<usize> = blocks.iter().map(|f| dim_of(f, tol)).collect::<Result<_>>()?;
    let mut parent: Vec<usize> = (0..m).collect();
    fn root(p: &[usize], mut i: usize) -> usize {
        while p[i] != i {
            i = p[i];
        }
        i
    }
    for i in 0..m {
        for j in i + 1..m {
            let pair: Vec<Vec<C64>> = blocks[i].iter().zip(&blocks[j]).map(|(x, y)| [x.as_slice(), y.as_slice()].concat()).collect();
            let dij = dim_of(&pair, tol)?;
            if dij == dims[i] + dims[j] {
                continue;
            }
            if sizes[i] == sizes[j] && dij == sizes[i] * sizes[i] && dims[i] == dij && dims[j] == dij {
                let (ri, rj) = (root(&parent, i), root(&parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            } else {
                return Err(Error::Numerical(format!(
                    "inconsistent linkage between blocks {i} and {j}: dims {}, {}, pair {dij}",
                    dims[i], dims[j]
                )));
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..m {
        let r = root(&parent, i);
        match classes.iter_mut().find(|c| root(&parent, c[0]) == r) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    Ok(classes)
}

/// Linkage partition of the blocks of `b` for the algebra `a`.
pub fn linkage(a: &MatrixAlgebra, b: &BlockStructure) -> Result<Vec<Vec<usize>>> {
    check_structure(a, b)?;
    linkage_of(&framed_basis(a, b), &b.sizes, &a.tol())
}

// ---------------------------------------------------------------------------
// unhinging

/// Coupling data of the unhinging similarity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hinges {
    /// S - I, strictly block upper triangular.
    pub coupling: ComplexMatrix,
    /// Singular values of the coupling (its SVD normal form).
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WedderburnData {
    /// BD(A) in frame coordinates.
    pub bd: MatrixAlgebra,
    /// Radical of the unhinged algebra (strictly block upper triangular).
    pub rad: MatrixSubspace,
    /// Block upper triangular S with identity diagonal blocks, frame
    /// coordinates; S^{-1} A S = BD ∔ Rad.
    pub similarity: ComplexMatrix,
    /// S^{-1} (U^* A U) S.
    pub unhinged: MatrixAlgebra,
    pub hinges: Option<Hinges>,
}

fn lift_idempotent(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut e = x.clone();
    let mut best = f64::INFINITY;
    for _ in 0..64 {
        let e2 = e.matmul(&e);
        let r = e2.dist(&e);
        if r <= 1e-14 * e.fro_norm().max(1.0) {
            return Ok(e);
        }
        if r >= best && r < 1e-9 * e.fro_norm().max(1.0) {
            return Ok(e);
        }
        best = best.min(r);
        let e3 = e2.matmul(&e);
        e = &e2.scale_re(3.0) - &e3.scale_re(2.0);
    }
    Err(Error::Numerical("idempotent lifting did not converge".into()))
}

/// Block upper triangular similarity bringing the framed algebra to
/// BD(A) ∔ Rad(A), built by lifting a full system of matrix units of BD(A)
/// into A.
pub fn unhinge(a: &MatrixAlgebra, b: &BlockStructure) -> Result<WedderburnData> {
    check_structure(a, b)?;
    let tol = a.tol();
    let n = a.n();
    let sizes = &b.sizes;
    let off = offsets(sizes);
    let framed = framed_basis(a, b);
    let id = ComplexMatrix::identity(n);

    // Per class: matrix units E_pq of BD(A) and preimages a_pq in A.
    struct ClassUnits {
        d: usize,
        bd_units: Vec<Vec<ComplexMatrix>>,
        lifts: Vec<Vec<ComplexMatrix>>,
    }
    let mut classes = Vec::new();
    for (s, class) in b.linkage.iter().enumerate() {
        let f = class[0];
        let d = sizes[f];
        let mut rows: Vec<(usize, usize)> = Vec::new();
        for i in 0..d {
            for j in 0..d {
                rows.push((off[f] + i, off[f] + j));
            }
        }
        for (t, other) in b.linkage.iter().enumerate() {
            if t == s {
                continue;
            }
            for &blk in other {
                for i in 0..sizes[blk] {
                    for j in 0..sizes[blk] {
                        rows.push((off[blk] + i, off[blk] + j));
                    }
                }
            }
        }
        let l = ComplexMatrix::from_fn(rows.len(), framed.len(), |r, k| framed[k][rows[r]]);
        let mut rhs = ComplexMatrix::zeros(rows.len(), d * d);
        for p in 0..d {
            for q in 0..d {
                rhs[(p * d + q, p * d + q)] = ONE;
            }
        }
        let coef = lstsq(&l, &rhs, &tol)?;
        let fit = l.matmul(&coef).dist(&rhs);
        if fit > 1e3 * tol.rel_eps * (d as f64) {
            return Err(Error::Numerical(format!("matrix units of class {s} not found (residual {fit:.2e})")));
        }
        let mut bd_units = vec![vec![ComplexMatrix::zeros(n, n); d]; d];
        let mut lifts = vec![vec![ComplexMatrix::zeros(n, n); d]; d];
        for p in 0..d {
            for q in 0..d {
                let mut x = ComplexMatrix::zeros(n, n);
                for (k, fk) in framed.iter().enumerate() {
                    x.axpy(coef[(k, p * d + q)], fk);
                }
                bd_units[p][q] = bd_part(&x, sizes);
                lifts[p][q] = x;
            }
        }
        classes.push(ClassUnits { d, bd_units, lifts });
    }

    // Orthogonal idempotents lifting the diagonal units.
    let mut remaining = id.clone();
    let mut diag: Vec<Vec<ComplexMatrix>> = Vec::new();
    for cu in &classes {
        let mut row = Vec::with_capacity(cu.d);
        for p in 0..cu.d {
            let x = remaining.matmul(&cu.lifts[p][p]).matmul(&remaining);
            let e = lift_idempotent(&x)?;
            remaining = &remaining - &e;
            row.push(e);
        }
        diag.push(row);
    }
    if remaining.fro_norm() > 1e3 * tol.rel_eps {
        return Err(Error::Numerical("lifted idempotents do not sum to the identity".into()));
    }

    // S = Σ u_{p0} E_{0p}.
    let mut s_mat = ComplexMatrix::zeros(n, n);
    for (cu, dg) in classes.iter().zip(&diag) {
        let u00 = &dg[0];
        s_mat = &s_mat + &u00.matmul(&cu.bd_units[0][0]);
        for (p, dp) in dg.iter().enumerate().take(cu.d).skip(1) {
            let u0p = u00.matmul(&cu.lifts[0][p]).matmul(dp);
            let w = dp.matmul(&cu.lifts[p][0]).matmul(u00);
            let g = u0p.matmul(&w);
            let r = &g - u00;
            let mut h = u00.clone();
            let mut term = u00.clone();
            for _ in 0..n {
                term = -&term.matmul(&r);
                if term.fro_norm() == 0.0 {
                    break;
                }
                h = &h + &term;
            }
            let up0 = w.matmul(&h);
            s_mat = &s_mat + &up0.matmul(&cu.bd_units[0][p]);
        }
    }
    // Clean the entries the theory fixes: identity blocks, zero below.
    let bd_err = bd_part(&s_mat, sizes).dist(&id);
    if bd_err > 1e3 * tol.rel_eps || below_blocks_norm(&s_mat, sizes) > 1e3 * tol.rel_eps {
        return Err(Error::Numerical(format!("unhinging similarity is not block unipotent ({bd_err:.2e})")));
    }
    for (bi, (&oi, &si)) in off.iter().zip(sizes).enumerate() {
        for (bj, (&oj, &sj)) in off.iter().zip(sizes).enumerate() {
            if bj > bi {
                continue;
            }
            for i in oi..oi + si {
                for j in oj..oj + sj {
                    s_mat[(i, j)] = if i == j { ONE } else { ZERO };
                }
            }
        }
    }
    let s_inv = inverse(&s_mat)?;
    let unhinged_fam: Vec<ComplexMatrix> = framed.iter().map(|x| s_inv.matmul(x).matmul(&s_mat)).collect();
    let unhinged = MatrixAlgebra::from_space_unchecked(MatrixSubspace::span(n, &unhinged_fam, tol)?);
    let bd_fam: Vec<ComplexMatrix> = framed.iter().map(|x| bd_part(x, sizes)).collect();
    let bd = MatrixAlgebra::from_space_unchecked(MatrixSubspace::span(n, &bd_fam, tol)?);
    let worst = unhinged.space().containment_residual(bd.space());
    if worst > 1e3 * tol.rel_eps {
        return Err(Error::Numerical(format!("unhinged algebra does not contain BD (residual {worst:.2e})")));
    }
    let rad_elems = structural_radical(unhinged.basis(), sizes, &tol)?;
    let rad = MatrixSubspace::span(n, &rad_elems, tol)?;
    let coupling = &s_mat - &id;
    let hinges = if coupling.fro_norm() > tol.rel_eps {
        let sv = svd_factor(&coupling)?.s;
        Some(Hinges { coupling, singular_values: sv })
    } else {
        None
    };
    Ok(WedderburnData { bd, rad, similarity: s_mat, unhinged, hinges })
}

// ---------------------------------------------------------------------------
// module supports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// S = (full space) · Q.
    Right,
    /// S = Q · (full space).
    Left,
}

#[derive(Clone, Debug)]
pub struct ModuleSupport {
    pub projection: ComplexMatrix,
    pub rank: usize,
}

/// Support projection of a one-sided module of p x q matrices.
pub fn module_support(space: &[ComplexMatrix], side: Side, tol: &Tolerance) -> Result<ModuleSupport> {
    let Some(first) = space.first() else {
        return Err(Error::InvalidInput("module_support needs the block shape".into()));
    };
    let (p, q) = first.shape();
    if space.iter().any(|x| x.shape() != (p, q)) {
        return Err(Error::Shape("module members differ in shape".into()));
    }
    let (vectors, len) = match side {
        Side::Right => (space.iter().flat_map(|x| x.adjoint().columns()).collect::<Vec<_>>(), q),
        Side::Left => (space.iter().flat_map(|x| x.columns()).collect::<Vec<_>>(), p),
    };
    let nonzero = vectors.iter().any(|v| v.iter().any(|z| z.norm() > 0.0));
    let basis = if nonzero { orthonormal_vectors(&vectors, tol)? } else { Vec::new() };
    let vmat = ComplexMatrix::from_columns(len, &basis);
    let projection = vmat.matmul(&vmat.adjoint());
    let rank = basis.len();
    let sp: Vec<Vec<C64>> = space.iter().map(|x| x.as_slice().to_vec()).collect();
    let dim = if nonzero { dim_of(&sp, tol)? } else { 0 };
    let expected = match side {
        Side::Right => p * rank,
        Side::Left => rank * q,
    };
    if dim != expected {
        return Err(Error::NotAModule(((dim as f64) - (expected as f64)).abs()));
    }
    // Every generator of the full module must lie in the span.
    if dim > 0 {
        let ortho = orthonormal_vectors(&sp, tol)?;
        let mut worst: f64 = 0.0;
        for v in &basis {
            for k in 0..match side {
                Side::Right => p,
                Side::Left => q,
            } {
                let g = match side {
                    Side::Right => {
                        let mut e = vec![ZERO; p];
                        e[k] = ONE;
                        ComplexMatrix::outer(&e, v)
                    }
                    Side::Left => {
                        let mut e = vec![ZERO; q];
                        e[k] = ONE;
                        ComplexMatrix::outer(v, &e)
                    }
                };
                let gv = g.as_slice();
                let mut r = gv.to_vec();
                for o in &ortho {
                    let d: C64 = o.iter().zip(gv).map(|(a, b)| a.conj() * b).sum();
                    for (ri, oi) in r.iter_mut().zip(o) {
                        *ri -= d * oi;
                    }
                }
                worst = worst.max(r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
            }
        }
        if worst > 1e3 * tol.rel_eps {
            return Err(Error::NotAModule(worst));
        }
    }
    Ok(ModuleSupport { projection, rank })
}

/// The (i, j) block of every basis element of a framed subspace.
pub fn block_space(framed: &[ComplexMatrix], sizes: &[usize], i: usize, j: usize) -> Vec<ComplexMatrix> {
    framed.iter().map(|x| block(x, sizes, i, j)).collect()
}
