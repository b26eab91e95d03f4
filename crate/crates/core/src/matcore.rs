//! Dense complex linear algebra: the matrix type, SVD, numerical rank,
//! orthonormalization of matrix families, least squares and eigenvalues.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Singular values at or below this are zero regardless of scale.
pub const RANK_FLOOR: f64 = 1e-14;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Numerical thresholds shared by every operation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative residual accepted for membership and idempotency tests.
    pub rel_eps: f64,
    /// Singular values below `rank_eps_factor * sigma_max` count as zero.
    pub rank_eps_factor: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel_eps: 1e-8, rank_eps_factor: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(rel_eps: f64, rank_eps_factor: f64) -> Result<Self> {
        if !(rel_eps > 0.0 && rank_eps_factor > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerances must be positive (rel_eps={rel_eps}, rank_eps_factor={rank_eps_factor})"
            )));
        }
        Ok(Tolerance { rel_eps, rank_eps_factor })
    }

    pub fn with_rel_eps(self, rel_eps: f64) -> Result<Self> {
        Tolerance::new(rel_eps, self.rank_eps_factor)
    }

    pub fn rank_threshold(&self, sigma_max: f64) -> f64 {
        (self.rank_eps_factor * sigma_max).max(RANK_FLOOR)
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, " {:>9.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// The anti-diagonal permutation J.
    pub fn anti_identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, n - 1 - i)] = ONE;
        }
        m
    }

    /// Matrix unit e_i e_j^*.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = ONE;
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(r, cols, rows.concat())
    }

    /// Real matrix from row slices; panics on ragged input.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| c(rows[i][j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// u v^*.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            m.set_column(j, col);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// self += s * other.
    pub fn axpy(&mut self, s: C64, other: &Self) {
        assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product <self, other> = Tr(other^* self).
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| b.conj() * a).sum()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Columns selected by index.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius distance.
    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape());
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape());
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

// Serialized as a list of rows, each entry a [re, im] pair.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..self.rows).map(|i| (0..self.cols).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<C64>> = rows.into_iter().map(|r| r.into_iter().map(|[a, b]| c(a, b)).collect()).collect();
        ComplexMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// vector helpers

pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// SVD

#[derive(Clone, Debug)]
pub struct Svd {
    /// m x m unitary.
    pub u: ComplexMatrix,
    /// min(m, p) singular values, descending.
    pub s: Vec<f64>,
    /// p x p unitary.
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, p) = (self.u.rows(), self.v.rows());
        let mut us = ComplexMatrix::zeros(m, p);
        for (k, &sk) in self.s.iter().enumerate() {
            for i in 0..m {
                us[(i, k)] = self.u[(i, k)] * sk;
            }
        }
        us.matmul(&self.v.adjoint())
    }
}

fn sweep_cap(rows: usize, cols: usize) -> usize {
    60 * rows.max(cols).max(1)
}

// Hestenes one-sided Jacobi on the columns of a tall matrix. Rotations are
// mirrored onto `v` when given.
fn jacobi_columns(cols: &mut [Vec<C64>], mut v: Option<&mut [Vec<C64>]>, cap: usize) -> Result<()> {
    let p = cols.len();
    if p < 2 {
        return Ok(());
    }
    let m = cols[0].len();
    let tol = f64::EPSILON * (m.max(p) as f64);
    // Pairs of roundoff-level columns are left alone.
    let fro2: f64 = cols.iter().flat_map(|c| c.iter()).map(|z| z.norm_sqr()).sum();
    let floor = tol * tol * fro2;
    for _ in 0..cap {
        let mut rotated = false;
        for i in 0..p - 1 {
            for j in i + 1..p {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for (a, b) in cols[i].iter().zip(&cols[j]) {
                    alpha += a.norm_sqr();
                    beta += b.norm_sqr();
                    gamma += a.conj() * b;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() || g <= floor {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let (left, right) = cols.split_at_mut(j);
                rotate(&mut left[i], &mut right[0], phase, cs, sn);
                if let Some(v) = v.as_deref_mut() {
                    let (left, right) = v.split_at_mut(j);
                    rotate(&mut left[i], &mut right[0], phase, cs, sn);
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::Numerical("one-sided Jacobi SVD did not converge".into()))
}

#[inline]
fn rotate(x: &mut [C64], y: &mut [C64], phase: C64, cs: f64, sn: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let ai = *a;
        let aj = *b * phase;
        *a = ai * cs - aj * sn;
        *b = ai * sn + aj * cs;
    }
}

fn argsort_desc(s: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    idx
}

// Extend orthonormal vectors to an orthonormal basis of C^m. Residuals of the
// standard basis vectors are updated in place; the largest one is taken next.
fn complete_basis(mut basis: Vec<Vec<C64>>, m: usize) -> Vec<Vec<C64>> {
    if basis.len() >= m {
        return basis;
    }
    let mut res: Vec<Vec<C64>> = (0..m)
        .map(|e| {
            let mut v = vec![ZERO; m];
            v[e] = ONE;
            v
        })
        .collect();
    let project = |res: &mut [Vec<C64>], b: &[C64]| {
        for v in res.iter_mut() {
            let d = vdot(b, v);
            if d != ZERO {
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= d * bi;
                }
            }
        }
    };
    for b in &basis {
        project(&mut res, b);
    }
    while basis.len() < m {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (e, v) in res.iter().enumerate() {
            let nv = vnorm(v);
            if nv > best_norm + 1e-12 {
                best = e;
                best_norm = nv;
            }
        }
        let mut v = res[best].clone();
        for b in &basis {
            let d = vdot(b, &v);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= d * bi;
            }
        }
        let nv = vnorm(&v);
        for z in v.iter_mut() {
            *z /= nv;
        }
        project(&mut res, &v);
        basis.push(v);
    }
    basis
}

fn svd_tall(x: &ComplexMatrix) -> Result<Svd> {
    let (m, p) = x.shape();
    let mut cols = x.columns();
    let mut v: Vec<Vec<C64>> = (0..p).map(|j| (0..p).map(|i| if i == j { ONE } else { ZERO }).collect()).collect();
    jacobi_columns(&mut cols, Some(&mut v), sweep_cap(m, p))?;
    let norms: Vec<f64> = cols.iter().map(|c| vnorm(c)).collect();
    let order = argsort_desc(&norms);
    let smax = order.first().map_or(0.0, |&i| norms[i]);
    let cutoff = smax * f64::EPSILON * (m.max(p) as f64);
    let mut ucols = Vec::new();
    let mut s = Vec::with_capacity(p);
    for &j in &order {
        s.push(norms[j]);
        if norms[j] > cutoff && norms[j] > 0.0 {
            ucols.push(cols[j].iter().map(|z| z / norms[j]).collect());
        }
    }
    let ucols = complete_basis(ucols, m);
    let vcols: Vec<Vec<C64>> = order.iter().map(|&j| v[j].clone()).collect();
    Ok(Svd { u: ComplexMatrix::from_columns(m, &ucols), s, v: ComplexMatrix::from_columns(p, &vcols) })
}

/// Full singular value decomposition X = U Σ V^*.
pub fn svd_factor(x: &ComplexMatrix) -> Result<Svd> {
    if !x.is_finite() {
        return Err(Error::Numerical("non-finite matrix entries".into()));
    }
    if x.rows() >= x.cols() {
        svd_tall(x)
    } else {
        let t = svd_tall(&x.adjoint())?;
        Ok(Svd { u: t.v, s: t.s, v: t.u })
    }
}

/// Singular values only, descending.
pub fn singular_values(x: &ComplexMatrix) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::Numerical("non-finite matrix entries".into()));
    }
    let xt;
    let x = if x.rows() >= x.cols() {
        x
    } else {
        xt = x.adjoint();
        &xt
    };
    let mut cols = x.columns();
    jacobi_columns(&mut cols, None, sweep_cap(x.rows(), x.cols()))?;
    let mut s: Vec<f64> = cols.iter().map(|c| vnorm(c)).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

fn count_above(s: &[f64], tol: &Tolerance) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    let thr = tol.rank_threshold(smax);
    s.iter().filter(|&&x| x > thr).count()
}

/// Number of singular values above the relative rank threshold.
pub fn rank_tol(x: &ComplexMatrix, tol: &Tolerance) -> Result<usize> {
    Ok(count_above(&singular_values(x)?, tol))
}

/// Householder QR. Returns R (m x p) and, when requested, the unitary Q (m x m).
pub fn householder_qr(x: &ComplexMatrix, want_q: bool) -> (Option<ComplexMatrix>, ComplexMatrix) {
    let (m, p) = x.shape();
    let mut r = x.clone();
    let mut q = if want_q { Some(ComplexMatrix::identity(m)) } else { None };
    for k in 0..p.min(m.saturating_sub(1)) {
        let xk: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let nx = vnorm(&xk);
        if nx == 0.0 {
            continue;
        }
        let ph = if xk[0].norm() > 0.0 { xk[0] / xk[0].norm() } else { ONE };
        let alpha = -ph * nx;
        let mut v = xk;
        v[0] -= alpha;
        let nv = vnorm(&v);
        if nv == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= nv;
        }
        for j in k..p {
            let d: C64 = (k..m).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            for i in k..m {
                let vi = v[i - k];
                r[(i, j)] -= 2.0 * vi * d;
            }
        }
        if let Some(q) = q.as_mut() {
            for i in 0..m {
                let d: C64 = (k..m).map(|l| q[(i, l)] * v[l - k]).sum();
                for l in k..m {
                    let vl = v[l - k].conj();
                    q[(i, l)] -= 2.0 * d * vl;
                }
            }
        }
    }
    (q, r)
}

/// Orthonormal basis of the span of a family of vectors (vectorize, SVD, threshold).
pub fn orthonormal_vectors(family: &[Vec<C64>], tol: &Tolerance) -> Result<Vec<Vec<C64>>> {
    let k = family.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let m = family[0].len();
    if family.iter().any(|v| v.len() != m) {
        return Err(Error::Shape("family members differ in length".into()));
    }
    if family.iter().any(|v| v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(Error::Numerical("non-finite entries in family".into()));
    }
    let cap = sweep_cap(m, k);
    if k <= m {
        let mut cols = family.to_vec();
        jacobi_columns(&mut cols, None, cap)?;
        let norms: Vec<f64> = cols.iter().map(|c| vnorm(c)).collect();
        let order = argsort_desc(&norms);
        let thr = tol.rank_threshold(norms[order[0]]);
        Ok(order
            .into_iter()
            .filter(|&j| norms[j] > thr)
            .map(|j| cols[j].iter().map(|z| z / norms[j]).collect())
            .collect())
    } else {
        // Wide family: the left singular vectors of X are the right singular
        // vectors of the triangular factor of X^*.
        let xh = ComplexMatrix::from_fn(k, m, |i, j| family[i][j].conj());
        let (_, r) = householder_qr(&xh, false);
        let mut cols: Vec<Vec<C64>> = (0..m).map(|j| (0..m).map(|i| r[(i, j)]).collect()).collect();
        let mut v: Vec<Vec<C64>> = (0..m).map(|j| (0..m).map(|i| if i == j { ONE } else { ZERO }).collect()).collect();
        jacobi_columns(&mut cols, Some(&mut v), cap)?;
        let norms: Vec<f64> = cols.iter().map(|c| vnorm(c)).collect();
        let order = argsort_desc(&norms);
        let thr = tol.rank_threshold(norms[order[0]]);
        Ok(order.into_iter().filter(|&j| norms[j] > thr).map(|j| v[j].clone()).collect())
    }
}

/// Orthonormal basis (Frobenius geometry) of the span of equally shaped matrices.
pub fn orthonormal_span(family: &[ComplexMatrix], tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
    let Some(first) = family.first() else {
        return Ok(Vec::new());
    };
    let (r, cc) = first.shape();
    if family.iter().any(|x| x.shape() != (r, cc)) {
        return Err(Error::Shape("orthonormal_span: members differ in shape".into()));
    }
    let vecs: Vec<Vec<C64>> = family.iter().map(|x| x.as_slice().to_vec()).collect();
    orthonormal_vectors(&vecs, tol)?
        .into_iter()
        .map(|v| ComplexMatrix::from_vec(r, cc, v))
        .collect()
}

/// Orthonormal basis of the column space, as an n x r matrix.
pub fn orthonormal_columns(x: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let cols = orthonormal_vectors(&x.columns(), tol)?;
    Ok(ComplexMatrix::from_columns(x.rows(), &cols))
}

/// Orthonormal basis of the orthogonal complement of the columns of an
/// isometry `w`.
pub fn orthogonal_complement(w: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = w.shape();
    if k == 0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let mut basis: Vec<Vec<C64>> = w.columns();
    basis = complete_basis(basis, n);
    Ok(ComplexMatrix::from_columns(n, &basis[k..]))
}

/// Basis of the null space of `x` (columns of V for zero singular values).
pub fn null_space(x: &ComplexMatrix, tol: &Tolerance) -> Result<Vec<Vec<C64>>> {
    if x.rows() < x.cols() {
        let svd = svd_factor(x)?;
        let r = count_above(&svd.s, tol);
        return Ok((r..x.cols()).map(|j| svd.v.column(j)).collect());
    }
    if !x.is_finite() {
        return Err(Error::Numerical("non-finite matrix entries".into()));
    }
    // Tall case: right singular vectors only.
    let (m, p) = x.shape();
    let mut cols = x.columns();
    let mut v: Vec<Vec<C64>> = (0..p).map(|j| (0..p).map(|i| if i == j { ONE } else { ZERO }).collect()).collect();
    jacobi_columns(&mut cols, Some(&mut v), sweep_cap(m, p))?;
    let norms: Vec<f64> = cols.iter().map(|c| vnorm(c)).collect();
    let order = argsort_desc(&norms);
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let r = count_above(&s, tol);
    Ok(order[r..].iter().map(|&j| v[j].clone()).collect())
}

/// Minimum-norm least-squares solution of A X = B via the pseudo-inverse.
pub fn lstsq(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::Shape("lstsq: row counts differ".into()));
    }
    let svd = svd_factor(a)?;
    let r = count_above(&svd.s, tol);
    let uhb = svd.u.adjoint().matmul(b);
    let mut y = ComplexMatrix::zeros(a.cols(), b.cols());
    for k in 0..r {
        for j in 0..b.cols() {
            y[(k, j)] = uhb[(k, j)] / svd.s[k];
        }
    }
    Ok(svd.v.matmul(&y))
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !x.is_square() {
        return Err(Error::Shape("inverse of a non-square matrix".into()));
    }
    let n = x.rows();
    let mut a = x.clone();
    let mut inv = ComplexMatrix::identity(n);
    let scale = x.max_abs();
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[(i, k)].norm().partial_cmp(&a[(j, k)].norm()).unwrap()).unwrap();
        if a[(p, k)].norm() <= 1e-14 * scale {
            return Err(Error::Singular);
        }
        if p != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = t;
                let t = inv[(k, j)];
                inv[(k, j)] = inv[(p, j)];
                inv[(p, j)] = t;
            }
        }
        let piv = a[(k, k)];
        for j in 0..n {
            a[(k, j)] /= piv;
            inv[(k, j)] /= piv;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[(i, k)];
            if f == ZERO {
                continue;
            }
            for j in 0..n {
                let akj = a[(k, j)];
                let ikj = inv[(k, j)];
                a[(i, j)] -= f * akj;
                inv[(i, j)] -= f * ikj;
            }
        }
    }
    Ok(inv)
}

/// 2-norm condition number sigma_max / sigma_min (infinite when singular).
pub fn condition_number(x: &ComplexMatrix) -> Result<f64> {
    let s = singular_values(x)?;
    let smin = s.last().copied().unwrap_or(0.0);
    Ok(if smin == 0.0 { f64::INFINITY } else { s[0] / smin })
}

// ---------------------------------------------------------------------------
// eigenvalues

fn hessenberg(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.rows();
    let mut h = x.clone();
    for k in 0..n.saturating_sub(2) {
        let xk: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let nx = vnorm(&xk);
        if nx == 0.0 {
            continue;
        }
        let ph = if xk[0].norm() > 0.0 { xk[0] / xk[0].norm() } else { ONE };
        let mut v = xk;
        v[0] += ph * nx;
        let nv = vnorm(&v);
        for z in v.iter_mut() {
            *z /= nv;
        }
        // H <- (I - 2vv^*) H (I - 2vv^*)
        for j in 0..n {
            let d: C64 = (k + 1..n).map(|i| v[i - k - 1].conj() * h[(i, j)]).sum();
            for i in k + 1..n {
                let vi = v[i - k - 1];
                h[(i, j)] -= 2.0 * vi * d;
            }
        }
        for i in 0..n {
            let d: C64 = (k + 1..n).map(|l| h[(i, l)] * v[l - k - 1]).sum();
            for l in k + 1..n {
                let vl = v[l - k - 1].conj();
                h[(i, l)] -= 2.0 * d * vl;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Eigenvalues of a square matrix via Hessenberg reduction and shifted QR.
pub fn eigenvalues(x: &ComplexMatrix) -> Result<Vec<C64>> {
    if !x.is_square() {
        return Err(Error::Shape("eigenvalues of a non-square matrix".into()));
    }
    if !x.is_finite() {
        return Err(Error::Numerical("non-finite matrix entries".into()));
    }
    let n = x.rows();
    let mut h = hessenberg(x);
    let mut eig = vec![ZERO; n];
    let mut hi = n;
    let mut iter = 0usize;
    let max_iter = 60 * n.max(1);
    while hi > 0 {
        let top = hi - 1;
        let mut l = top;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { h.max_abs() } else { s };
            if h[(l, l - 1)].norm() <= f64::EPSILON * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == top {
            eig[top] = h[(top, top)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::Numerical("QR eigenvalue iteration did not converge".into()));
        }
        let a = h[(top - 1, top - 1)];
        let b = h[(top - 1, top)];
        let cc = h[(top, top - 1)];
        let d = h[(top, top)];
        let mut mu = if iter % 11 == 10 {
            d + cc.norm() * 0.75
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * cc).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() { m1 } else { m2 }
        };
        if !mu.re.is_finite() || !mu.im.is_finite() {
            mu = d;
        }
        for k in l..=top {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(top - l);
        for k in l..top {
            let xk = h[(k, k)];
            let yk = h[(k + 1, k)];
            let r = (xk.norm_sqr() + yk.norm_sqr()).sqrt();
            let (cs, sn) = if r == 0.0 { (ONE, ZERO) } else { (xk / r, yk / r) };
            for j in k..=top {
                let p = h[(k, j)];
                let q = h[(k + 1, j)];
                h[(k, j)] = cs.conj() * p + sn.conj() * q;
                h[(k + 1, j)] = -sn * p + cs * q;
            }
            rots.push((cs, sn));
        }
        for (off, &(cs, sn)) in rots.iter().enumerate() {
            let k = l + off;
            for i in l..=(k + 2).min(top) {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * cs + q * sn;
                h[(i, k + 1)] = -p * sn.conj() + q * cs.conj();
            }
        }
        for k in l..=top {
            h[(k, k)] += mu;
        }
    }
    Ok(eig)
}

/// Groups eigenvalues whose distance is below `radius` (single linkage).
/// Clusters are returned with their members and mean value, ordered by
/// (re, im) of the mean.
pub fn cluster_values(values: &[C64], radius: f64) -> Vec<(C64, Vec<usize>)> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let nx = p[i];
            p[i] = r;
            i = nx;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    let mut out: Vec<(C64, Vec<usize>)> = groups
        .into_iter()
        .map(|(_, g)| {
            let mean = g.iter().map(|&i| values[i]).sum::<C64>() / g.len() as f64;
            (mean, g)
        })
        .collect();
    out.sort_by(|a, b| {
        a.0.re.partial_cmp(&b.0.re).unwrap().then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    out
}
