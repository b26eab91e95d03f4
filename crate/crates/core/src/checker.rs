//! Randomized corner-closure testing and the catalog of witness projections.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{c, inverse, orthonormal_vectors, svd_factor, ComplexMatrix, Tolerance, C64, ONE, ZERO};
use crate::random::{gaussian_c, haar_unitary, index, random_similarity, substream, Rng, MAX_SIMILARITY_CONDITION};
use crate::structure::triangularize;
use crate::subalgebra::{compress, idempotency_residual, is_algebra, unitize, Closure, MatrixAlgebra, MatrixSubspace};

/// Closure residuals above this are violations.
pub const VIOLATION_THRESHOLD: f64 = 1e-6;
/// Closure residuals in (INDETERMINATE_FLOOR, VIOLATION_THRESHOLD] are
/// reported as indeterminate.
pub const INDETERMINATE_FLOOR: f64 = 1e-8;
pub const DEFAULT_TRIALS: usize = 500;
/// Haar frames added to the catalog pass.
pub const RANDOM_FRAMES: usize = 2;
/// Relative residual that sends a reduced-coordinate screen to the full test.
const SCREEN_THRESHOLD: f64 = 1e-9;

const PURPOSE_TRIAL: u64 = 0x7472_6961_6c73;
const PURPOSE_FRAME: u64 = 0x6672_616d_6573;
const PURPOSE_SCREEN: u64 = 0x7363_7265_656e;
const PURPOSE_SEARCH: u64 = 0x7365_6172_6368;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Projection,
    Idempotent,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Projection => "projection",
            Mode::Idempotent => "idempotent",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "projection" => Ok(Mode::Projection),
            "idempotent" => Ok(Mode::Idempotent),
            _ => Err(Error::InvalidInput(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub idempotent: ComplexMatrix,
    pub worst_pair: Option<(usize, usize)>,
    pub residual: f64,
    /// Where the idempotent came from: a catalog entry and frame, or a trial.
    pub source: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub catalog_checked: usize,
    pub indeterminate: usize,
    pub violations: Vec<Violation>,
}

impl TrialReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub catalog: bool,
    /// Frames (unitary, columns = basis) for the catalog pass in addition to
    /// the standard, triangularized and random frames.
    pub extra_frames: Vec<ComplexMatrix>,
    pub random_frames: usize,
    /// Stop after the first violation.
    pub stop_at_first: bool,
}

impl CheckOptions {
    pub fn new(mode: Mode, trials: usize, seed: u64) -> Self {
        CheckOptions { mode, trials, seed, catalog: true, extra_frames: Vec::new(), random_frames: RANDOM_FRAMES, stop_at_first: false }
    }
}

// ---------------------------------------------------------------------------
// sampling

/// Factors X (n x r), Y (r x n) with Y X = I, E = X Y.
fn sample_factors(rng: &mut Rng, n: usize, mode: Mode, r: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let cols: Vec<usize> = (0..r).collect();
    match mode {
        Mode::Projection => {
            let u = haar_unitary(rng, n);
            let x = u.select_columns(&cols);
            let y = x.adjoint();
            Ok((x, y))
        }
        Mode::Idempotent => {
            let s = random_similarity(rng, n, MAX_SIMILARITY_CONDITION);
            let si = inverse(&s)?;
            let x = s.select_columns(&cols);
            let y = si.block(0, 0, r, n);
            Ok((x, y))
        }
    }
}

fn trial_rank(n: usize, i: usize) -> usize {
    if n <= 1 {
        n
    } else {
        1 + i % (n - 1)
    }
}

/// A random idempotent: Haar projection, or S P S^{-1} with cond(S) ≤ 50.
pub fn sample_idempotent(n: usize, mode: Mode, rank: Option<usize>, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let mut rng = substream(seed, PURPOSE_TRIAL, u64::MAX);
    let r = match rank {
        Some(r) if (1..=n).contains(&r) => r,
        Some(r) => return Err(Error::InvalidInput(format!("rank {r} outside 1..={n}"))),
        None if n == 1 => 1,
        None => 1 + index(&mut rng, n - 1),
    };
    let (x, y) = sample_factors(&mut rng, n, mode, r)?;
    Ok(x.matmul(&y))
}

// ---------------------------------------------------------------------------
// catalog

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessCatalogEntry {
    pub name: String,
    /// Integer pattern before scaling.
    pub matrix: ComplexMatrix,
    pub scale: f64,
    /// Configuration the entry refutes.
    pub context: String,
}

impl WitnessCatalogEntry {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn projection(&self) -> ComplexMatrix {
        self.matrix.scale_re(self.scale)
    }

    pub fn rank(&self) -> usize {
        self.projection().trace().re.round() as usize
    }
}

fn entry(name: &str, rows: &[&[f64]], scale: f64, context: &str) -> WitnessCatalogEntry {
    WitnessCatalogEntry { name: name.into(), matrix: ComplexMatrix::from_real(rows), scale, context: context.into() }
}

fn p_k(k: f64) -> WitnessCatalogEntry {
    let a = k * k + 1.0;
    entry(
        &format!("P_k{}", k as i64),
        &[&[a, 0.0, 0.0, 0.0], &[0.0, k * k, 0.0, -k], &[0.0, 0.0, a, 0.0], &[0.0, -k, 0.0, 1.0]],
        1.0 / a,
        "linked type I, radical entry m21",
    )
}

/// Block pattern [[I, I], [I, I]] of size n (n even).
fn blocks_entry(n: usize) -> WitnessCatalogEntry {
    let h = n / 2;
    let m = ComplexMatrix::from_fn(n, n, |i, j| if i % h == j % h { ONE } else { ZERO });
    WitnessCatalogEntry { name: format!("P_blocks{n}"), matrix: m, scale: 0.5, context: "folded corner of two halves".into() }
}

/// Witness projections of ambient size ≤ n, each checked to be an orthogonal
/// projection.
pub fn witness_catalog(n: usize) -> Vec<WitnessCatalogEntry> {
    let mut out = Vec::new();
    if n >= 4 {
        out.push(entry(
            "Q",
            &[&[1.0, 0.0, 0.0, 1.0], &[0.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 2.0, 0.0], &[1.0, 0.0, 0.0, 1.0]],
            0.5,
            "two non-scalar corners with P2 A P1 = 0",
        ));
        out.push(entry(
            "Q_minus",
            &[&[1.0, 0.0, 0.0, -1.0], &[0.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 2.0, 0.0], &[-1.0, 0.0, 0.0, 1.0]],
            0.5,
            "type II linked outer corners",
        ));
        out.push(entry(
            "P_13",
            &[&[1.0, 0.0, 1.0, 0.0], &[0.0, 2.0, 0.0, 0.0], &[1.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 2.0]],
            0.5,
            "type III hinge scalar",
        ));
        out.push(entry(
            "P_24",
            &[&[2.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 1.0], &[0.0, 0.0, 2.0, 0.0], &[0.0, 1.0, 0.0, 1.0]],
            0.5,
            "three-dimensional radical in M_4",
        ));
        for k in [1.0, 2.0, 3.0] {
            out.push(p_k(k));
        }
        out.push(entry(
            "P_prime",
            &[&[2.0, 0.0, -1.0, -1.0], &[0.0, 3.0, 0.0, 0.0], &[-1.0, 0.0, 2.0, -1.0], &[-1.0, 0.0, -1.0, 2.0]],
            1.0 / 3.0,
            "type III with linked outer corners",
        ));
    }
    if n >= 3 {
        out.push(entry(
            "P_prime3",
            &[&[1.0, 0.0, 1.0], &[0.0, 2.0, 0.0], &[1.0, 0.0, 1.0]],
            0.5,
            "semisimple algebras with three summands",
        ));
    }
    if n >= 6 && n.is_multiple_of(2) {
        out.push(blocks_entry(n));
    }
    out.retain(|e| {
        let p = e.projection();
        idempotency_residual(&p) < 1e-12 && p.dist(&p.adjoint()) < 1e-12
    });
    out
}

/// Orthonormal basis W (s x r) of the range of a catalog projection.
fn range_basis(p: &ComplexMatrix) -> ComplexMatrix {
    let svd = svd_factor(p).expect("small exact matrix");
    let r = svd.s.iter().filter(|&&s| s > 0.5).count();
    svd.u.select_columns(&(0..r).collect::<Vec<_>>())
}

fn tuples(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn rec(n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                rec(n, s, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, s, &mut cur, &mut out);
    out
}

/// Perfect matchings of 0..n as orderings (a1, ..., a_h, b1, ..., b_h)
/// pairing a_i with b_i.
fn matchings(n: usize) -> Vec<Vec<usize>> {
    fn rec(free: Vec<usize>, pairs: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(pairs.clone());
            return;
        }
        let a = free[0];
        for k in 1..free.len() {
            let b = free[k];
            let rest: Vec<usize> = free.iter().copied().filter(|&x| x != a && x != b).collect();
            pairs.push((a, b));
            rec(rest, pairs, out);
            pairs.pop();
        }
    }
    let mut out = Vec::new();
    rec((0..n).collect(), &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|ps| ps.iter().map(|p| p.0).chain(ps.iter().map(|p| p.1)).collect())
        .collect()
}

/// A catalog witness placed in ambient coordinates: E = X X^*.
#[derive(Clone, Debug)]
pub struct EmbeddedWitness {
    pub label: String,
    pub x: ComplexMatrix,
}

impl EmbeddedWitness {
    pub fn idempotent(&self) -> ComplexMatrix {
        self.x.matmul(&self.x.adjoint())
    }
}

fn dedup_key(e: &ComplexMatrix) -> Vec<i64> {
    e.as_slice().iter().flat_map(|z| [(z.re * 1e8).round() as i64, (z.im * 1e8).round() as i64]).collect()
}

/// Every catalog entry embedded through every ordered principal sub-basis of
/// `frame`, duplicates (same E) removed.
pub fn embed_catalog(frame: &ComplexMatrix, frame_label: &str) -> Vec<EmbeddedWitness> {
    let n = frame.rows();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for e in witness_catalog(n) {
        let w = range_basis(&e.projection());
        let s = e.size();
        let orders = if s == n && e.name.starts_with("P_blocks") { matchings(n) } else { tuples(n, s) };
        for idx in orders {
            let x = frame.select_columns(&idx).matmul(&w);
            let emb = EmbeddedWitness { label: format!("{}@{}{:?}", e.name, frame_label, idx), x };
            if seen.insert(dedup_key(&emb.idempotent())) {
                out.push(emb);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// closure tests

/// Full closure test of the corner E A E.
pub fn replay(a: &MatrixAlgebra, e: &ComplexMatrix) -> Result<Closure> {
    Ok(is_algebra(&compress(a, e)?))
}

/// Relative residual of random products in the reduced corner {Y a X}.
fn screen(basis: &[ComplexMatrix], x: &ComplexMatrix, y: &ComplexMatrix, rng: &mut Rng, tol: &Tolerance) -> Result<f64> {
    let elems: Vec<Vec<C64>> = basis.iter().map(|a| y.matmul(a).matmul(x).as_slice().to_vec()).collect();
    if elems.iter().all(|v| v.iter().all(|z| z.norm() == 0.0)) {
        return Ok(0.0);
    }
    let ortho = orthonormal_vectors(&elems, tol)?;
    let r = x.cols();
    let mut worst: f64 = 0.0;
    for _ in 0..2 {
        let mut u = ComplexMatrix::zeros(r, r);
        let mut v = ComplexMatrix::zeros(r, r);
        for o in &ortho {
            let om = ComplexMatrix::from_vec(r, r, o.clone())?;
            u.axpy(gaussian_c(rng), &om);
            v.axpy(gaussian_c(rng), &om);
        }
        let p = u.matmul(&v);
        let pv = p.as_slice();
        let mut res = pv.to_vec();
        for o in &ortho {
            let d: C64 = o.iter().zip(pv).map(|(a, b)| a.conj() * b).sum();
            for (ri, oi) in res.iter_mut().zip(o) {
                *ri -= d * oi;
            }
        }
        let rn = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale = (u.fro_norm() * v.fro_norm()).max(f64::MIN_POSITIVE);
        worst = worst.max(rn / scale);
    }
    Ok(worst)
}

enum Outcome {
    Clean,
    Indeterminate,
    Violation(Violation),
}

fn examine(a: &MatrixAlgebra, x: &ComplexMatrix, y: &ComplexMatrix, rng: &mut Rng, source: String) -> Result<Outcome> {
    let tol = a.tol();
    if screen(a.basis(), x, y, rng, &tol)? <= SCREEN_THRESHOLD {
        return Ok(Outcome::Clean);
    }
    let e = x.matmul(y);
    let cl = replay(a, &e)?;
    Ok(if cl.residual > VIOLATION_THRESHOLD {
        Outcome::Violation(Violation { idempotent: e, worst_pair: cl.worst_pair, residual: cl.residual, source })
    } else if cl.residual > INDETERMINATE_FLOOR {
        Outcome::Indeterminate
    } else {
        Outcome::Clean
    })
}

/// Frames for the catalog pass: standard, triangularized (when available),
/// caller-supplied and Haar random.
fn catalog_frames(a: &MatrixAlgebra, opts: &CheckOptions) -> Vec<(String, ComplexMatrix)> {
    let n = a.n();
    let mut frames = vec![("std".to_string(), ComplexMatrix::identity(n))];
    if let Ok(b) = unitize(a).and_then(|u| triangularize(&u)) {
        frames.push(("tri".to_string(), b.frame));
    }
    for (k, f) in opts.extra_frames.iter().enumerate() {
        frames.push((format!("given{k}"), f.clone()));
    }
    for k in 0..opts.random_frames {
        let mut rng = substream(opts.seed, PURPOSE_FRAME, k as u64);
        frames.push((format!("haar{k}"), haar_unitary(&mut rng, n)));
    }
    frames
}

fn run_items<F>(count: usize, stop_at_first: bool, f: F) -> Result<Vec<Outcome>>
where
    F: Fn(usize) -> Result<Outcome> + Sync + Send,
{
    if stop_at_first {
        let mut out = Vec::new();
        for i in 0..count {
            let o = f(i)?;
            let hit = matches!(o, Outcome::Violation(_));
            out.push(o);
            if hit {
                break;
            }
        }
        Ok(out)
    } else {
        (0..count).into_par_iter().map(f).collect()
    }
}

/// Corner-closure testing with default options.
pub fn check_compressible(a: &MatrixAlgebra, mode: Mode, trials: usize, seed: u64) -> Result<TrialReport> {
    check_with(a, &CheckOptions::new(mode, trials, seed))
}

pub fn check_with(a: &MatrixAlgebra, opts: &CheckOptions) -> Result<TrialReport> {
    let n = a.n();
    let mut report = TrialReport {
        trials: opts.trials,
        seed: opts.seed,
        mode: opts.mode,
        catalog_checked: 0,
        indeterminate: 0,
        violations: Vec::new(),
    };
    let absorb = |outs: Vec<Outcome>, report: &mut TrialReport| {
        for o in outs {
            match o {
                Outcome::Clean => {}
                Outcome::Indeterminate => report.indeterminate += 1,
                Outcome::Violation(v) => report.violations.push(v),
            }
        }
    };
    if opts.catalog && n >= 3 {
        let mut seen = HashSet::new();
        let mut witnesses = Vec::new();
        for (label, frame) in catalog_frames(a, opts) {
            for w in embed_catalog(&frame, &label) {
                if seen.insert(dedup_key(&w.idempotent())) {
                    witnesses.push(w);
                }
            }
        }
        report.catalog_checked = witnesses.len();
        let outs = run_items(witnesses.len(), opts.stop_at_first, |i| {
            let w = &witnesses[i];
            let mut rng = substream(opts.seed, PURPOSE_SCREEN, i as u64);
            examine(a, &w.x, &w.x.adjoint(), &mut rng, format!("catalog:{}", w.label))
        })?;
        absorb(outs, &mut report);
        if opts.stop_at_first && !report.violations.is_empty() {
            return Ok(report);
        }
    }
    if n >= 2 {
        let outs = run_items(opts.trials, opts.stop_at_first, |i| {
            let mut rng = substream(opts.seed, PURPOSE_TRIAL, i as u64);
            let (x, y) = sample_factors(&mut rng, n, opts.mode, trial_rank(n, i))?;
            examine(a, &x, &y, &mut rng, format!("trial:{i}"))
        })?;
        absorb(outs, &mut report);
    }
    Ok(report)
}

/// Orthogonal projections onto spans of small integer stencils (entries in
/// {-1, 0, 1, 2}) in the given frames, first violation returned.
pub fn stencil_search(a: &MatrixAlgebra, frames: &[ComplexMatrix], seed: u64) -> Result<Option<Violation>> {
    let n = a.n();
    let tol = a.tol();
    let vals = [-1.0, 0.0, 1.0, 2.0];
    let mut stencils: Vec<Vec<f64>> = Vec::new();
    let total = 4usize.pow(n as u32);
    for code in 0..total {
        let mut v = Vec::with_capacity(n);
        let mut k = code;
        for _ in 0..n {
            v.push(vals[k % 4]);
            k /= 4;
        }
        let support = v.iter().filter(|x| **x != 0.0).count();
        let first = v.iter().find(|x| **x != 0.0).copied();
        if (2..=3).contains(&support) && first == Some(1.0) {
            stencils.push(v);
        }
    }
    let mut counter = 0u64;
    for (fi, frame) in frames.iter().enumerate() {
        for v in &stencils {
            let supp: Vec<usize> = (0..n).filter(|&i| v[i] != 0.0).collect();
            let outside: Vec<usize> = (0..n).filter(|i| !supp.contains(i)).collect();
            let mut variants: Vec<Vec<usize>> = vec![outside.clone()];
            variants.extend(outside.iter().map(|&j| vec![j]));
            variants.extend(supp.iter().skip(1).map(|&j| vec![j]));
            for extra in variants {
                let mut cols: Vec<Vec<C64>> = vec![v.iter().map(|&x| c(x, 0.0)).collect()];
                for &j in &extra {
                    let mut e = vec![ZERO; n];
                    e[j] = ONE;
                    cols.push(e);
                }
                let basis = orthonormal_vectors(&cols, &tol)?;
                if basis.len() >= n {
                    continue;
                }
                let x = frame.matmul(&ComplexMatrix::from_columns(n, &basis));
                let mut rng = substream(seed, PURPOSE_SEARCH, counter);
                counter += 1;
                if let Outcome::Violation(viol) =
                    examine(a, &x, &x.adjoint(), &mut rng, format!("stencil@frame{fi}{:?}+{:?}", v, extra))?
                {
                    return Ok(Some(viol));
                }
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// folding

/// The folded space {Q1 A Q1 + E^* A Q1 + Q1 A E + E^* A E}.
pub fn fold_corner(a: &MatrixAlgebra, q1: &ComplexMatrix, e: &ComplexMatrix) -> Result<MatrixSubspace> {
    let n = a.n();
    let tol = a.tol();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidInput("fold_corner needs even n".into()));
    }
    if q1.shape() != (n, n) || e.shape() != (n, n) {
        return Err(Error::Shape("fold_corner: operands must be n x n".into()));
    }
    let eps = 1e3 * tol.rel_eps;
    if idempotency_residual(q1) > eps || q1.dist(&q1.adjoint()) > eps {
        return Err(Error::InvalidInput("Q1 is not an orthogonal projection".into()));
    }
    if (q1.trace().re - (n / 2) as f64).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!("Q1 must have rank {}", n / 2)));
    }
    let q2 = &ComplexMatrix::identity(n) - q1;
    let eh = e.adjoint();
    if eh.matmul(e).dist(q1) > eps || e.matmul(&eh).dist(&q2) > eps {
        return Err(Error::InvalidInput("E must map ran(Q1) isometrically onto ran(I - Q1)".into()));
    }
    let fam: Vec<ComplexMatrix> = a
        .basis()
        .iter()
        .map(|x| {
            let xq = x.matmul(q1);
            let xe = x.matmul(e);
            &(&(&q1.matmul(&xq) + &eh.matmul(&xq)) + &q1.matmul(&xe)) + &eh.matmul(&xe)
        })
        .collect();
    MatrixSubspace::span(n, &fam, tol)
}

/// Q1 and E from a unitary frame: Q1 onto the first n/2 columns, E sending
/// column i to column n/2 + i.
pub fn fold_operands(frame: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = frame.rows();
    let h = n / 2;
    let v1 = frame.select_columns(&(0..h).collect::<Vec<_>>());
    let v2 = frame.select_columns(&(h..n).collect::<Vec<_>>());
    (v1.matmul(&v1.adjoint()), v2.matmul(&v1.adjoint()))
}
