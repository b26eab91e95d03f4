//! Compressibility verdicts for unital subalgebras of M_n (n ≥ 4) with a
//! replayable certificate: a similarity onto a canonical family instance, or
//! a witness idempotent whose corner is not closed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checker::{check_with, stencil_search, CheckOptions, Mode, Violation, DEFAULT_TRIALS, VIOLATION_THRESHOLD};
use crate::error::{Error, Result};
use crate::families::{make_family, FamilySpec, FamilyTag};
use crate::matcore::{
    c, cluster_values, eigenvalues, inverse, null_space, orthogonal_complement, orthonormal_vectors, singular_values,
    ComplexMatrix, Tolerance, C64, ONE, ZERO,
};
use crate::random::{gaussian_matrix, haar_unitary, substream};
use crate::structure::{framed_basis, radical, triangularize_seeded, unhinge, BlockStructure};
use crate::subalgebra::{
    compress, conjugate, generated_algebra, idempotency_residual, is_algebra, transpose_matrix, transpose_variant,
    unitize, MatrixAlgebra, MatrixSubspace, TransposeKind,
};

/// Random idempotents tried before the stencil grid when looking for a witness.
pub const WITNESS_SEARCH_TRIALS: usize = 2000;

/// Which structural case of the reduced form the algebra falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypePath {
    #[serde(rename = "trivial")]
    Trivial,
    #[serde(rename = "I-linked")]
    ILinked,
    #[serde(rename = "I-unlinked")]
    IUnlinked,
    #[serde(rename = "II-k-extreme")]
    IIKExtreme,
    #[serde(rename = "II-linked")]
    IILinked,
    #[serde(rename = "II-unlinked")]
    IIUnlinked,
    #[serde(rename = "III-mutually-unlinked")]
    IIIMutuallyUnlinked,
    #[serde(rename = "III-Q2-linked")]
    IIIQ2Linked,
    #[serde(rename = "III-Q1Q3-linked")]
    IIIQ1Q3Linked,
    /// The reduced form rules out compressibility outright (two large blocks,
    /// a non-scalar outer corner, or several distinguished indices).
    #[serde(rename = "excluded")]
    Excluded,
}

impl TypePath {
    pub fn as_str(&self) -> &'static str {
        match self {
            TypePath::Trivial => "trivial",
            TypePath::ILinked => "I-linked",
            TypePath::IUnlinked => "I-unlinked",
            TypePath::IIKExtreme => "II-k-extreme",
            TypePath::IILinked => "II-linked",
            TypePath::IIUnlinked => "II-unlinked",
            TypePath::IIIMutuallyUnlinked => "III-mutually-unlinked",
            TypePath::IIIQ2Linked => "III-Q2-linked",
            TypePath::IIIQ1Q3Linked => "III-Q1Q3-linked",
            TypePath::Excluded => "excluded",
        }
    }
}

impl fmt::Display for TypePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of the empirical check run against a verdict.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CrossValidation {
    pub trials: usize,
    pub catalog_checked: usize,
    pub indeterminate: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub compressible: bool,
    /// Tag of the canonical family (compressible only).
    pub family: Option<FamilyTag>,
    /// Parameters of the canonical instance the algebra is similar to.
    pub spec: Option<FamilySpec>,
    /// The target is the anti-transpose of the canonical instance.
    pub anti_transposed: bool,
    /// S with S^{-1} A S equal to the target (compressible only).
    pub similarity: Option<ComplexMatrix>,
    /// Idempotent with a non-closed corner (not compressible only).
    pub witness: Option<Violation>,
    pub type_path: TypePath,
    pub seed: u64,
    pub cross_validation: CrossValidation,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn family_tag(&self) -> Option<FamilyTag> {
        self.family
    }

    /// The target algebra of a compressible verdict.
    pub fn target(&self, tol: Tolerance) -> Result<Option<MatrixAlgebra>> {
        let Some(spec) = &self.spec else { return Ok(None) };
        let c = make_family(spec, tol)?;
        Ok(Some(if self.anti_transposed { transpose_variant(&c, TransposeKind::AntiTranspose)? } else { c }))
    }
}

// ---------------------------------------------------------------------------
// structural path

fn coords_of(b: &BlockStructure, blocks: impl IntoIterator<Item = usize>) -> Vec<usize> {
    blocks.into_iter().flat_map(|k| b.coords(k)).collect()
}

/// D x D lies in C·D for every framed basis element.
fn scalar_corner(framed: &[ComplexMatrix], coords: &[usize], tol: &Tolerance) -> bool {
    if coords.len() <= 1 {
        return true;
    }
    framed.iter().all(|x| {
        let lam = coords.iter().map(|&i| x[(i, i)]).sum::<C64>() / coords.len() as f64;
        let mut err = 0.0;
        for &i in coords {
            for &j in coords {
                let want = if i == j { lam } else { ZERO };
                err += (x[(i, j)] - want).norm_sqr();
            }
        }
        err.sqrt() <= 10.0 * tol.rel_eps * x.fro_norm().max(1.0)
    })
}

fn classes_of(b: &BlockStructure, blocks: &[usize]) -> Vec<usize> {
    let mut cs: Vec<usize> = blocks.iter().map(|&k| b.class_of(k)).collect();
    cs.sort_unstable();
    cs.dedup();
    cs
}

fn linked(b: &BlockStructure, x: &[usize], y: &[usize]) -> bool {
    let cx = classes_of(b, x);
    classes_of(b, y).iter().any(|c| cx.contains(c))
}

/// Type path of the reduced form plus notes.
pub fn type_path(a: &MatrixAlgebra, b: &BlockStructure) -> (TypePath, Vec<String>) {
    let tol = a.tol();
    let framed = framed_basis(a, b);
    let m = b.sizes.len();
    if a.dim() <= 1 {
        return (TypePath::Trivial, vec![]);
    }
    let big: Vec<usize> = (0..m).filter(|&k| b.sizes[k] >= 2).collect();
    if big.len() >= 2 {
        return (TypePath::Excluded, vec![format!("{} diagonal blocks of size at least 2", big.len())]);
    }
    if let [k] = big[..] {
        let q1: Vec<usize> = (0..k).collect();
        let q3: Vec<usize> = (k + 1..m).collect();
        for (name, q) in [("Q1", &q1), ("Q3", &q3)] {
            if !scalar_corner(&framed, &coords_of(b, q.iter().copied()), &tol) {
                return (TypePath::Excluded, vec![format!("type II outer corner {name} is not scalar")]);
            }
        }
        if q1.is_empty() || q3.is_empty() {
            return (TypePath::IIKExtreme, vec![]);
        }
        return if linked(b, &q1, &q3) { (TypePath::IILinked, vec![]) } else { (TypePath::IIUnlinked, vec![]) };
    }
    // All blocks 1 x 1.
    let scalar_range = |lo: usize, hi: usize| scalar_corner(&framed, &coords_of(b, lo..hi), &tol);
    let distinguished: Vec<usize> = (0..m).filter(|&k| !scalar_range(0, k + 1) && !scalar_range(k, m)).collect();
    match distinguished.len() {
        0 => {
            let d = (1..=m).rev().find(|&j| scalar_range(0, j)).unwrap_or(1);
            if d == m {
                return (TypePath::Trivial, vec!["all diagonal blocks linked and scalar".into()]);
            }
            if !scalar_range(d, m) {
                return (TypePath::Excluded, vec![format!("no scalar split after {d} blocks")]);
            }
            let (q1, q2): (Vec<usize>, Vec<usize>) = ((0..d).collect(), (d..m).collect());
            if linked(b, &q1, &q2) {
                (TypePath::ILinked, vec![])
            } else {
                (TypePath::IUnlinked, vec![])
            }
        }
        1 => {
            let k = distinguished[0];
            let q1: Vec<usize> = (0..k).collect();
            let q3: Vec<usize> = (k + 1..m).collect();
            let mut notes = Vec::new();
            for (name, q) in [("Q1", &q1), ("Q3", &q3)] {
                if !scalar_corner(&framed, &coords_of(b, q.iter().copied()), &tol) {
                    notes.push(format!("type III corner {name} is not scalar"));
                }
            }
            if !notes.is_empty() {
                return (TypePath::Excluded, notes);
            }
            let path = if linked(b, &q1, &q3) {
                TypePath::IIIQ1Q3Linked
            } else if linked(b, &q1, &[k]) || linked(b, &q3, &[k]) {
                TypePath::IIIQ2Linked
            } else {
                TypePath::IIIMutuallyUnlinked
            };
            (path, notes)
        }
        more => (TypePath::Excluded, vec![format!("{more} indices with two non-scalar corners")]),
    }
}

// ---------------------------------------------------------------------------
// recognizers

/// Candidate certificate: S with S^{-1} A S = target.
struct Candidate {
    spec: FamilySpec,
    similarity: ComplexMatrix,
}

fn verify_candidate(a: &MatrixAlgebra, cand: &Candidate) -> bool {
    let Ok(target) = make_family(&cand.spec, a.tol()) else { return false };
    match conjugate(a, &cand.similarity) {
        Ok(conj) => conj.same_space(&target),
        Err(_) => false,
    }
}

fn combine(basis: &[ComplexMatrix], coeffs: &[C64]) -> ComplexMatrix {
    let n = basis[0].rows();
    let mut x = ComplexMatrix::zeros(n, n);
    for (ci, b) in coeffs.iter().zip(basis) {
        x.axpy(*ci, b);
    }
    x
}

fn span_vectors(vs: &[Vec<C64>], tol: &Tolerance) -> Result<Vec<Vec<C64>>> {
    orthonormal_vectors(vs, tol)
}

fn project_out(v: &[C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut r = v.to_vec();
    for b in basis {
        let d: C64 = b.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= d * bi;
        }
    }
    r
}

/// Similarity bringing an LR-algebra {x : ran x ⊆ V, x K = 0} to its
/// coordinate form, with ranks (a, b, c).
fn lr_frame(v: &[Vec<C64>], k: &[Vec<C64>], n: usize, tol: &Tolerance) -> Result<(ComplexMatrix, [usize; 3])> {
    // V ∩ K: v-combinations with no component off K.
    let vmat = ComplexMatrix::from_columns(n, v);
    let off_k: Vec<Vec<C64>> = v.iter().map(|x| project_out(x, k)).collect();
    let off = ComplexMatrix::from_columns(n, &off_k);
    let inter: Vec<Vec<C64>> = if v.is_empty() {
        Vec::new()
    } else {
        let ns = null_space(&off, tol)?;
        let vecs: Vec<Vec<C64>> = ns.iter().map(|cvec| vmat.mat_vec(cvec)).collect();
        span_vectors(&vecs, tol)?
    };
    let rest_v = span_vectors(&v.iter().map(|x| project_out(x, &inter)).collect::<Vec<_>>(), tol)?;
    let rest_k = span_vectors(&k.iter().map(|x| project_out(x, &inter)).collect::<Vec<_>>(), tol)?;
    let sum: Vec<Vec<C64>> = v.iter().chain(k).cloned().collect();
    let sum = span_vectors(&sum, tol)?;
    let comp = orthogonal_complement(&ComplexMatrix::from_columns(n, &sum))?;
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    cols.extend(inter.iter().cloned());
    cols.extend(rest_v.iter().cloned());
    cols.extend(comp.columns());
    cols.extend(rest_k.iter().cloned());
    if cols.len() != n {
        return Err(Error::Numerical("LR frame has the wrong number of columns".into()));
    }
    Ok((ComplexMatrix::from_columns(n, &cols), [inter.len(), rest_v.len(), comp.cols()]))
}

/// Recognizes K as an LR-algebra: dim K = dim(left support) · dim(right support).
fn lr_of(elems: &[ComplexMatrix], n: usize, tol: &Tolerance) -> Result<Option<(ComplexMatrix, [usize; 3])>> {
    if elems.is_empty() {
        return Ok(None);
    }
    let kdim = span_vectors(&elems.iter().map(|x| x.as_slice().to_vec()).collect::<Vec<_>>(), tol)?.len();
    let v = span_vectors(&elems.iter().flat_map(|x| x.columns()).collect::<Vec<_>>(), tol)?;
    let w = span_vectors(&elems.iter().flat_map(|x| x.adjoint().columns()).collect::<Vec<_>>(), tol)?;
    if kdim == 0 || kdim != v.len() * w.len() {
        return Ok(None);
    }
    let k = orthogonal_complement(&ComplexMatrix::from_columns(n, &w))?.columns();
    Ok(Some(lr_frame(&v, &k, n, tol)?))
}

fn recognize_scalar(a: &MatrixAlgebra) -> Option<Candidate> {
    (a.dim() == 1).then(|| Candidate { spec: FamilySpec::scalar(a.n()), similarity: ComplexMatrix::identity(a.n()) })
}

fn recognize_lr_unital(a: &MatrixAlgebra, b: &BlockStructure) -> Result<Option<Candidate>> {
    let n = a.n();
    let tol = a.tol();
    if a.dim() == n * n {
        return Ok(Some(Candidate { spec: FamilySpec::lr_unital(n, [0, n, 0]), similarity: ComplexMatrix::identity(n) }));
    }
    let framed = framed_basis(a, b);
    for class in &b.linkage {
        if b.sizes[class[0]] != 1 {
            continue;
        }
        let i = b.coords(class[0]).start;
        let row = ComplexMatrix::from_fn(1, framed.len(), |_, k| framed[k][(i, i)]);
        let kernel: Vec<ComplexMatrix> = null_space(&row, &tol)?.iter().map(|cv| combine(a.basis(), cv)).collect();
        if let Some((s, ranks)) = lr_of(&kernel, n, &tol)? {
            let cand = Candidate { spec: FamilySpec::lr_unital(n, ranks), similarity: s };
            if verify_candidate(a, &cand) {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

/// Unhinged coordinates: T = U S_u with T^{-1} A T = BD ∔ Rad.
struct UnhingedView {
    t: ComplexMatrix,
    rad: MatrixSubspace,
    b: BlockStructure,
}

fn unhinged_view(a: &MatrixAlgebra, b: &BlockStructure) -> Result<UnhingedView> {
    let w = unhinge(a, b)?;
    Ok(UnhingedView { t: b.frame.matmul(&w.similarity), rad: w.rad, b: b.clone() })
}

/// Rad equals the span of the listed matrix units exactly.
fn rad_is_units(rad: &MatrixSubspace, units: &[(usize, usize)]) -> bool {
    if rad.dim() != units.len() {
        return false;
    }
    let n = rad.n();
    units.iter().all(|&(i, j)| {
        let e = ComplexMatrix::unit(n, n, i, j);
        rad.residual(&e) <= 1e3 * rad.tol().rel_eps
    })
}

fn permutation(order: &[usize]) -> ComplexMatrix {
    let n = order.len();
    let mut p = ComplexMatrix::zeros(n, n);
    for (k, &o) in order.iter().enumerate() {
        p[(o, k)] = ONE;
    }
    p
}

fn cross(rows: &[usize], cols: &[usize]) -> Vec<(usize, usize)> {
    rows.iter().flat_map(|&i| cols.iter().map(move |&j| (i, j))).collect()
}

fn class_coords(v: &UnhingedView, class: usize) -> Vec<usize> {
    coords_of(&v.b, v.b.linkage[class].iter().copied())
}

fn all_unit_blocks(v: &UnhingedView, class: usize) -> bool {
    v.b.linkage[class].iter().all(|&k| v.b.sizes[k] == 1)
}

fn finish(a: &MatrixAlgebra, v: &UnhingedView, order: Vec<usize>, spec: FamilySpec) -> Option<Candidate> {
    let cand = Candidate { spec, similarity: v.t.matmul(&permutation(&order)) };
    verify_candidate(a, &cand).then_some(cand)
}

fn recognize_ex1(a: &MatrixAlgebra, v: &UnhingedView) -> Option<Candidate> {
    let n = a.n();
    if v.b.linkage.len() != 3 {
        return None;
    }
    for (ca, cb, cc) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
        if v.b.linkage[cb].len() != 1 || !all_unit_blocks(v, ca) || !all_unit_blocks(v, cc) {
            continue;
        }
        let (da, db, dc) = (class_coords(v, ca), class_coords(v, cb), class_coords(v, cc));
        let mut units = cross(&da, &db);
        units.extend(cross(&da, &dc));
        units.extend(cross(&db, &dc));
        if !rad_is_units(&v.rad, &units) {
            continue;
        }
        let ranks = [da.len(), db.len(), dc.len()];
        let order: Vec<usize> = da.into_iter().chain(db).chain(dc).collect();
        if let Some(c) = finish(a, v, order, FamilySpec::ex1(n, ranks)) {
            return Some(c);
        }
    }
    None
}

fn recognize_ex3(a: &MatrixAlgebra, v: &UnhingedView) -> Option<Candidate> {
    let n = a.n();
    if v.b.linkage.len() != 2 || v.b.sizes.iter().any(|&s| s != 1) {
        return None;
    }
    for (cx, cy) in [(0, 1), (1, 0)] {
        let dx = class_coords(v, cx);
        let dy = class_coords(v, cy);
        if dx.len() != 2 {
            continue;
        }
        for (x1, x2) in [(dx[0], dx[1]), (dx[1], dx[0])] {
            let mut units = vec![(x1, x2)];
            units.extend(cross(&[x1, x2], &dy));
            if !rad_is_units(&v.rad, &units) {
                continue;
            }
            let order: Vec<usize> = [x1, x2].into_iter().chain(dy.iter().copied()).collect();
            if let Some(c) = finish(a, v, order, FamilySpec::ex3(n)) {
                return Some(c);
            }
        }
    }
    None
}

fn recognize_ex2(a: &MatrixAlgebra, v: &UnhingedView) -> Option<Candidate> {
    let n = a.n();
    if v.b.linkage.len() != 3 || v.b.sizes.iter().any(|&s| s != 1) {
        return None;
    }
    for (c1, c2, c3) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        let (d1, d2, d3) = (class_coords(v, c1), class_coords(v, c2), class_coords(v, c3));
        if d1.len() != 1 || d2.len() != 1 {
            continue;
        }
        let units = cross(&[d1[0], d2[0]], &d3);
        if !rad_is_units(&v.rad, &units) {
            continue;
        }
        let order: Vec<usize> = d1.into_iter().chain(d2).chain(d3).collect();
        if let Some(c) = finish(a, v, order, FamilySpec::ex2(n)) {
            return Some(c);
        }
    }
    None
}

/// Unitary recognition of the hinged family: the left support W of the
/// radical is 2-dimensional, A|W has an invariant line e1, and in the frame
/// (e1, e2, W^⊥) the hinge entry is t (a11 - a22).
fn recognize_at(a: &MatrixAlgebra, seed: u64) -> Result<Option<Candidate>> {
    let n = a.n();
    let tol = a.tol();
    let rad = radical(a)?;
    if rad.dim() == 0 {
        return Ok(None);
    }
    let w = span_vectors(&rad.basis().iter().flat_map(|x| x.columns()).collect::<Vec<_>>(), &tol)?;
    if w.len() != 2 {
        return Ok(None);
    }
    let wm = ComplexMatrix::from_columns(n, &w);
    let restricted: Vec<ComplexMatrix> = a.basis().iter().map(|x| wm.adjoint().matmul(x).matmul(&wm)).collect();
    let mut rng = substream(seed, 0x6174, 0);
    let g = gaussian_matrix(&mut rng, 1, restricted.len());
    let mut z = ComplexMatrix::zeros(2, 2);
    for (k, r) in restricted.iter().enumerate() {
        z.axpy(g[(0, k)], r);
    }
    // Eigenvectors of the 2 x 2 combination are the candidate invariant lines.
    let ev = eigenvalues(&z)?;
    let mut lines: Vec<Vec<C64>> = Vec::new();
    for lam in ev {
        let mut m = z.clone();
        m[(0, 0)] -= lam;
        m[(1, 1)] -= lam;
        let loose = Tolerance { rank_eps_factor: 1e-6, ..tol };
        if let Some(v) = null_space(&m, &loose)?.into_iter().next() {
            lines.push(v);
        }
    }
    let complement = orthogonal_complement(&wm)?;
    for line in lines {
        let e1 = wm.mat_vec(&line);
        let perp = vec![-line[1].conj(), line[0].conj()];
        let e2 = wm.mat_vec(&perp);
        let mut cols = vec![e1, e2];
        cols.extend(complement.columns());
        let mut f = ComplexMatrix::from_columns(n, &cols);
        let fh = f.adjoint();
        let (mut num, mut den) = (ZERO, 0.0);
        for x in a.basis() {
            let y = fh.matmul(x).matmul(&f);
            let d = y[(0, 0)] - y[(1, 1)];
            num += d.conj() * y[(0, 1)];
            den += d.norm_sqr();
        }
        if den == 0.0 {
            continue;
        }
        let t = num / den;
        let spec = if t.norm() < tol.rel_eps {
            FamilySpec::ex2(n)
        } else {
            let omega = t.conj() / t.norm();
            for i in 0..n {
                f[(i, 1)] *= omega;
            }
            FamilySpec::at(n, c(t.norm(), 0.0))
        };
        let cand = Candidate { spec, similarity: f };
        if verify_candidate(a, &cand) {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}

/// Maps a certificate for A^{aT} to one for A: S = J S'^{-T} J.
fn from_anti_transpose(cand: Candidate) -> Result<Candidate> {
    let n = cand.similarity.rows();
    let j = ComplexMatrix::anti_identity(n);
    let s = j.matmul(&inverse(&cand.similarity)?.transpose()).matmul(&j);
    Ok(Candidate { spec: cand.spec, similarity: s })
}

struct Orientation {
    a: MatrixAlgebra,
    b: Option<BlockStructure>,
    view: Option<Option<UnhingedView>>,
}

impl Orientation {
    fn structure(&mut self, seed: u64) -> Result<&BlockStructure> {
        if self.b.is_none() {
            self.b = Some(triangularize_seeded(&self.a, seed)?);
        }
        Ok(self.b.as_ref().expect("just set"))
    }

    fn ensure_view(&mut self, seed: u64, notes: &mut Vec<String>) -> Result<()> {
        if self.view.is_none() {
            let b = self.structure(seed)?.clone();
            let v = match unhinged_view(&self.a, &b) {
                Ok(v) => Some(v),
                Err(e) => {
                    notes.push(format!("unhinging failed: {e}"));
                    None
                }
            };
            self.view = Some(v);
        }
        Ok(())
    }

    fn with_view(
        &mut self,
        seed: u64,
        notes: &mut Vec<String>,
        f: fn(&MatrixAlgebra, &UnhingedView) -> Option<Candidate>,
    ) -> Result<Option<Candidate>> {
        self.ensure_view(seed, notes)?;
        Ok(self.view.as_ref().and_then(|v| v.as_ref()).and_then(|v| f(&self.a, v)))
    }
}

/// First matching family over both orientations, in priority order.
fn recognize(a: &MatrixAlgebra, b: &BlockStructure, seed: u64, notes: &mut Vec<String>) -> Result<Option<(Candidate, bool)>> {
    if let Some(c) = recognize_scalar(a) {
        return Ok(Some((c, false)));
    }
    let mut orients = [
        Orientation { a: a.clone(), b: Some(b.clone()), view: None },
        Orientation { a: transpose_variant(a, TransposeKind::AntiTranspose)?, b: None, view: None },
    ];
    if let Some(c) = recognize_lr_unital(a, b)? {
        return Ok(Some((c, false)));
    }
    for stage in 0..4 {
        for (k, o) in orients.iter_mut().enumerate() {
            let found = match stage {
                0 => o.with_view(seed, notes, recognize_ex1)?,
                1 => o.with_view(seed, notes, recognize_ex3)?,
                2 => recognize_at(&o.a, seed)?,
                _ => o.with_view(seed, notes, recognize_ex2)?,
            };
            if let Some(c) = found {
                return Ok(Some(if k == 0 { (c, false) } else { (from_anti_transpose(c)?, true) }));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// witnesses

/// Frames placing random 2-frames of two large blocks first, so that the
/// catalog entry Q sees P2 A P1 = 0 with both corners non-scalar.
fn two_block_frames(b: &BlockStructure, seed: u64) -> Result<Vec<ComplexMatrix>> {
    let n = b.n();
    let big: Vec<usize> = (0..b.sizes.len()).filter(|&k| b.sizes[k] >= 2).collect();
    let mut frames = Vec::new();
    if big.len() < 2 {
        return Ok(frames);
    }
    for draw in 0..4u64 {
        let mut rng = substream(seed, 0x7162, draw);
        let mut cols = Vec::new();
        for &k in &big[..2] {
            let d = b.sizes[k];
            let sub = b.frame.select_columns(&b.coords(k).collect::<Vec<_>>());
            let h = haar_unitary(&mut rng, d);
            let two = sub.matmul(&h.select_columns(&[0, 1]));
            cols.extend(two.columns());
        }
        let iso = ComplexMatrix::from_columns(n, &cols);
        let comp = orthogonal_complement(&iso)?;
        cols.extend(comp.columns());
        frames.push(ComplexMatrix::from_columns(n, &cols));
    }
    Ok(frames)
}

/// Catalog, then random idempotents, then the stencil grid.
pub fn find_witness(a: &MatrixAlgebra, b: Option<&BlockStructure>, seed: u64) -> Result<Option<Violation>> {
    let mut extra = Vec::new();
    if let Some(b) = b {
        extra.extend(two_block_frames(b, seed)?);
    }
    let catalog = CheckOptions {
        catalog: true,
        extra_frames: extra,
        stop_at_first: true,
        ..CheckOptions::new(Mode::Projection, 0, seed)
    };
    if let Some(v) = check_with(a, &catalog)?.violations.into_iter().next() {
        return Ok(Some(v));
    }
    let random = CheckOptions {
        catalog: false,
        stop_at_first: true,
        ..CheckOptions::new(Mode::Idempotent, WITNESS_SEARCH_TRIALS, seed)
    };
    if let Some(v) = check_with(a, &random)?.violations.into_iter().next() {
        return Ok(Some(v));
    }
    let mut frames = vec![ComplexMatrix::identity(a.n())];
    if let Some(b) = b {
        frames.push(b.frame.clone());
    }
    stencil_search(a, &frames, seed)
}

// ---------------------------------------------------------------------------
// classification

/// Verdict for a unital subalgebra of M_n, n ≥ 4.
pub fn classify(a: &MatrixAlgebra, seed: u64) -> Result<Verdict> {
    if a.n() <= 3 {
        return Err(Error::InvalidInput("classification needs n >= 4".into()));
    }
    classify_any(a, seed)
}

fn classify_any(a: &MatrixAlgebra, seed: u64) -> Result<Verdict> {
    if !a.is_unital() {
        return Err(Error::InvalidInput("classification needs a unital algebra".into()));
    }
    let b = triangularize_seeded(a, seed)?;
    let (path, mut notes) = type_path(a, &b);
    let found = recognize(a, &b, seed, &mut notes)?;
    match found {
        Some((cand, anti)) => {
            if path == TypePath::Excluded {
                notes.push("recognized a family although the reduced form looked excluded".into());
            }
            let report = check_with(a, &CheckOptions::new(Mode::Idempotent, DEFAULT_TRIALS, seed))?;
            if let Some(v) = report.violations.first() {
                return Err(Error::Inconsistent(format!(
                    "recognized {} but {} violates closure (residual {:.3e})",
                    cand.spec.tag, v.source, v.residual
                )));
            }
            Ok(Verdict {
                compressible: true,
                family: Some(cand.spec.tag),
                spec: Some(cand.spec),
                anti_transposed: anti,
                similarity: Some(cand.similarity),
                witness: None,
                type_path: path,
                seed,
                cross_validation: CrossValidation {
                    trials: report.trials,
                    catalog_checked: report.catalog_checked,
                    indeterminate: report.indeterminate,
                },
                notes,
            })
        }
        None => match find_witness(a, Some(&b), seed)? {
            Some(w) => Ok(Verdict {
                compressible: false,
                family: None,
                spec: None,
                anti_transposed: false,
                similarity: None,
                witness: Some(w),
                type_path: path,
                seed,
                cross_validation: CrossValidation::default(),
                notes,
            }),
            None => Err(Error::Inconsistent(format!(
                "no family recognized (path {path}) and no witness found"
            ))),
        },
    }
}

/// Re-verifies a verdict's certificate from scratch.
pub fn certify(a: &MatrixAlgebra, verdict: &Verdict) -> bool {
    if verdict.compressible {
        let (Some(s), Ok(Some(target))) = (&verdict.similarity, verdict.target(a.tol())) else {
            return false;
        };
        match conjugate(a, s) {
            Ok(conj) => conj.same_space(&target),
            Err(_) => false,
        }
    } else {
        let Some(w) = &verdict.witness else { return false };
        let e = &w.idempotent;
        if e.shape() != (a.n(), a.n()) || idempotency_residual(e) > a.tol().rel_eps * e.fro_norm().max(1.0) {
            return false;
        }
        match compress(a, e) {
            Ok(corner) => is_algebra(&corner).residual > VIOLATION_THRESHOLD,
            Err(_) => false,
        }
    }
}

// ---------------------------------------------------------------------------
// singly generated algebras

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratedVerdict {
    /// α with rank(T - αI) ≤ 1, when one exists.
    pub alpha: Option<C64>,
    pub rank_one_perturbation: bool,
    /// 0 is an eigenvalue of algebraic multiplicity exactly 1.
    pub zero_simple_eigenvalue: bool,
    /// Verdict for the unital algebra generated by T.
    pub unital: Verdict,
    /// Verdict for the algebra generated by T alone.
    pub non_unital: Verdict,
}

fn plain_verdict(compressible: bool, seed: u64, notes: Vec<String>) -> Verdict {
    Verdict {
        compressible,
        family: None,
        spec: None,
        anti_transposed: false,
        similarity: None,
        witness: None,
        type_path: TypePath::Trivial,
        seed,
        cross_validation: CrossValidation::default(),
        notes,
    }
}

/// Verdicts for Alg(T, I) and Alg(T) from the rank-one criterion, each
/// cross-checked against classification or corner testing.
pub fn classify_generated(t: &ComplexMatrix, seed: u64) -> Result<GeneratedVerdict> {
    let n = t.rows();
    if !t.is_square() || n < 3 {
        return Err(Error::InvalidInput("classify_generated needs an n x n matrix with n >= 3".into()));
    }
    let tol = Tolerance::default();
    let scale = t.fro_norm().max(1.0);
    let ev = eigenvalues(t)?;
    let clusters = cluster_values(&ev, 1e-6 * scale);
    let mut alpha = None;
    if let Some((mean, _)) = clusters.iter().find(|(_, m)| m.len() + 1 >= n) {
        let mut r = t.clone();
        for i in 0..n {
            r[(i, i)] -= *mean;
        }
        let sv = singular_values(&r)?;
        if sv.get(1).copied().unwrap_or(0.0) <= 1e-8 * scale {
            alpha = Some(*mean);
        }
    }
    let rank_one = alpha.is_some();
    let zero_simple = clusters.iter().any(|(mean, m)| mean.norm() <= 1e-6 * scale && m.len() == 1);

    let id = ComplexMatrix::identity(n);
    let unital_alg = generated_algebra(&[t.clone(), id], tol)?;
    let unital = cross_check(&unital_alg, rank_one, seed)?;

    let non_unital_alg = generated_algebra(std::slice::from_ref(t), tol)?;
    let expect = rank_one && !zero_simple;
    let non_unital = if non_unital_alg.dim() == 0 {
        if !expect {
            return Err(Error::Inconsistent("zero algebra predicted non-compressible".into()));
        }
        plain_verdict(true, seed, vec!["zero algebra".into()])
    } else if non_unital_alg.is_unital() {
        let mut v = cross_check(&unital_alg, expect, seed)?;
        v.notes.push("Alg(T) contains the identity".into());
        v
    } else {
        cross_check_non_unital(&non_unital_alg, expect, seed)?
    };
    Ok(GeneratedVerdict { alpha, rank_one_perturbation: rank_one, zero_simple_eigenvalue: zero_simple, unital, non_unital })
}

fn cross_check(a: &MatrixAlgebra, expect: bool, seed: u64) -> Result<Verdict> {
    let v = classify_any(a, seed)?;
    if v.compressible != expect {
        return Err(Error::Inconsistent(format!(
            "rank-one criterion says compressible = {expect}, classification says {}",
            v.compressible
        )));
    }
    Ok(v)
}

fn cross_check_non_unital(a: &MatrixAlgebra, expect: bool, seed: u64) -> Result<Verdict> {
    let n = a.n();
    let tol = a.tol();
    if expect {
        let (s, ranks) = lr_of(a.basis(), n, &tol)?
            .ok_or_else(|| Error::Inconsistent("predicted LR-algebra not recognized".into()))?;
        let spec = FamilySpec::lr(n, ranks);
        let cand = Candidate { spec, similarity: s };
        if !verify_candidate(a, &cand) {
            return Err(Error::Inconsistent("LR certificate does not verify".into()));
        }
        let report = check_with(a, &CheckOptions::new(Mode::Idempotent, DEFAULT_TRIALS, seed))?;
        if !report.is_clean() {
            return Err(Error::Inconsistent("predicted LR-algebra has a non-closed corner".into()));
        }
        let mut v = plain_verdict(true, seed, vec![]);
        v.family = Some(cand.spec.tag);
        v.spec = Some(cand.spec);
        v.similarity = Some(cand.similarity);
        v.cross_validation =
            CrossValidation { trials: report.trials, catalog_checked: report.catalog_checked, indeterminate: report.indeterminate };
        Ok(v)
    } else {
        let b = unitize(a).and_then(|u| triangularize_seeded(&u, seed)).ok();
        let w = find_witness(a, b.as_ref(), seed)?
            .ok_or_else(|| Error::Inconsistent("no witness for a predicted non-compressible Alg(T)".into()))?;
        let mut v = plain_verdict(false, seed, vec![]);
        v.witness = Some(w);
        Ok(v)
    }
}

/// Anti-transpose of a verdict's target: convenience for reports.
pub fn anti_transpose_matrix(x: &ComplexMatrix) -> ComplexMatrix {
    transpose_matrix(x, TransposeKind::AntiTranspose)
}
