//! Named algebra families on coordinate blocks, and seeded disguises.
//!
//! Ranks (r1, r2, r3) describe coordinate projections Q1, Q2, Q3 onto
//! consecutive blocks of the standard basis. For LR and LR_UNITAL the ranks
//! may sum to less than n; the remaining coordinates form a fourth block Q4
//! and the LR part is (Q1+Q2) M_n (Q2+Q3).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, Tolerance, C64, ONE, ZERO};
use crate::random::{haar_unitary, random_similarity, rng_from, MAX_SIMILARITY_CONDITION};
use crate::subalgebra::{conjugate, generated_algebra, MatrixAlgebra};

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyTag {
    LR,
    LR_UNITAL,
    EX1,
    EX2,
    EX3,
    AT,
    SCALAR,
    DIAGONAL,
    GEN_T,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 9] = [
        FamilyTag::LR,
        FamilyTag::LR_UNITAL,
        FamilyTag::EX1,
        FamilyTag::EX2,
        FamilyTag::EX3,
        FamilyTag::AT,
        FamilyTag::SCALAR,
        FamilyTag::DIAGONAL,
        FamilyTag::GEN_T,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyTag::LR => "LR",
            FamilyTag::LR_UNITAL => "LR_UNITAL",
            FamilyTag::EX1 => "EX1",
            FamilyTag::EX2 => "EX2",
            FamilyTag::EX3 => "EX3",
            FamilyTag::AT => "AT",
            FamilyTag::SCALAR => "SCALAR",
            FamilyTag::DIAGONAL => "DIAGONAL",
            FamilyTag::GEN_T => "GEN_T",
        }
    }

    /// Whether every unital instance of the family is idempotent compressible.
    pub fn is_compressible(&self) -> Option<bool> {
        match self {
            FamilyTag::LR_UNITAL | FamilyTag::EX1 | FamilyTag::EX2 | FamilyTag::EX3 | FamilyTag::AT | FamilyTag::SCALAR => {
                Some(true)
            }
            FamilyTag::LR => Some(true),
            FamilyTag::DIAGONAL => None,
            FamilyTag::GEN_T => None,
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown family tag '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub tag: FamilyTag,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ranks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<ComplexMatrix>,
}

impl FamilySpec {
    fn plain(tag: FamilyTag, n: usize, ranks: Vec<usize>) -> Self {
        FamilySpec { tag, n, ranks, t: None, generator: None }
    }

    pub fn lr(n: usize, ranks: [usize; 3]) -> Self {
        Self::plain(FamilyTag::LR, n, ranks.to_vec())
    }

    pub fn lr_unital(n: usize, ranks: [usize; 3]) -> Self {
        Self::plain(FamilyTag::LR_UNITAL, n, ranks.to_vec())
    }

    pub fn ex1(n: usize, ranks: [usize; 3]) -> Self {
        Self::plain(FamilyTag::EX1, n, ranks.to_vec())
    }

    pub fn ex2(n: usize) -> Self {
        Self::plain(FamilyTag::EX2, n, vec![1, 1, n.saturating_sub(2)])
    }

    pub fn ex3(n: usize) -> Self {
        Self::plain(FamilyTag::EX3, n, vec![1, 1, n.saturating_sub(2)])
    }

    pub fn at(n: usize, t: C64) -> Self {
        FamilySpec { t: Some([t.re, t.im]), ..Self::plain(FamilyTag::AT, n, vec![1, 1, n.saturating_sub(2)]) }
    }

    pub fn scalar(n: usize) -> Self {
        Self::plain(FamilyTag::SCALAR, n, Vec::new())
    }

    pub fn diagonal(n: usize) -> Self {
        Self::plain(FamilyTag::DIAGONAL, n, Vec::new())
    }

    pub fn gen_t(t: ComplexMatrix) -> Self {
        FamilySpec { generator: Some(t.clone()), ..Self::plain(FamilyTag::GEN_T, t.rows(), Vec::new()) }
    }

    pub fn t_value(&self) -> C64 {
        self.t.map_or(ZERO, |[a, b]| C64::new(a, b))
    }

    fn ranks3(&self) -> Result<[usize; 3]> {
        match self.ranks.as_slice() {
            &[a, b, c] => Ok([a, b, c]),
            _ => Err(Error::InvalidInput(format!("{} needs three ranks", self.tag))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        match self.tag {
            FamilyTag::LR | FamilyTag::LR_UNITAL => {
                let [a, b, c] = self.ranks3()?;
                if a + b + c > n {
                    return Err(Error::InvalidInput(format!("ranks {a}+{b}+{c} exceed n = {n}")));
                }
                if a + b == 0 || b + c == 0 {
                    return Err(Error::InvalidInput("LR part would be zero".into()));
                }
            }
            FamilyTag::EX1 => {
                let [a, b, c] = self.ranks3()?;
                if a + b + c != n {
                    return Err(Error::InvalidInput(format!("EX1 ranks must sum to n = {n}")));
                }
            }
            FamilyTag::EX2 | FamilyTag::EX3 | FamilyTag::AT => {
                if n < 3 {
                    return Err(Error::InvalidInput(format!("{} needs n >= 3", self.tag)));
                }
                if !self.ranks.is_empty() && self.ranks != [1, 1, n - 2] {
                    return Err(Error::InvalidInput(format!("{} ranks must be (1, 1, n-2)", self.tag)));
                }
            }
            FamilyTag::SCALAR | FamilyTag::DIAGONAL => {}
            FamilyTag::GEN_T => match &self.generator {
                Some(t) if t.shape() == (n, n) => {}
                _ => return Err(Error::InvalidInput("GEN_T needs an n x n generator".into())),
            },
        }
        Ok(())
    }
}

fn proj(n: usize, range: std::ops::Range<usize>) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in range {
        m[(i, i)] = ONE;
    }
    m
}

fn units(n: usize, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Vec<ComplexMatrix> {
    let mut out = Vec::new();
    for i in rows {
        for j in cols.clone() {
            out.push(ComplexMatrix::unit(n, n, i, j));
        }
    }
    out
}

/// Spanning set of the canonical instance.
pub fn family_generators(spec: &FamilySpec) -> Result<Vec<ComplexMatrix>> {
    spec.validate()?;
    let n = spec.n;
    let id = ComplexMatrix::identity(n);
    let mut fam = Vec::new();
    match spec.tag {
        FamilyTag::LR | FamilyTag::LR_UNITAL => {
            let [a, b, c] = spec.ranks3()?;
            fam.extend(units(n, 0..a + b, a..a + b + c));
            if spec.tag == FamilyTag::LR_UNITAL {
                fam.push(id);
            }
        }
        FamilyTag::EX1 => {
            let [a, b, c] = spec.ranks3()?;
            if a > 0 {
                fam.push(proj(n, 0..a));
            }
            if c > 0 {
                fam.push(proj(n, a + b..n));
            }
            fam.extend(units(n, 0..a + b, a..n));
            debug_assert_eq!(a + b + c, n);
        }
        FamilyTag::EX2 => {
            fam.push(proj(n, 0..1));
            fam.push(proj(n, 1..2));
            fam.push(proj(n, 2..n));
            fam.extend(units(n, 0..2, 2..n));
        }
        FamilyTag::EX3 => {
            fam.push(proj(n, 0..2));
            fam.push(ComplexMatrix::unit(n, n, 0, 1));
            fam.extend(units(n, 0..2, 2..n));
            fam.push(proj(n, 2..n));
        }
        FamilyTag::AT => {
            let t = spec.t_value();
            let e12 = ComplexMatrix::unit(n, n, 0, 1);
            let mut q1 = proj(n, 0..1);
            q1.axpy(t, &e12);
            let mut q2 = proj(n, 1..2);
            q2.axpy(-t, &e12);
            fam.push(q1);
            fam.push(q2);
            fam.push(proj(n, 2..n));
            fam.extend(units(n, 0..2, 2..n));
        }
        FamilyTag::SCALAR => fam.push(id),
        FamilyTag::DIAGONAL => fam.extend((0..n).map(|i| ComplexMatrix::unit(n, n, i, i))),
        FamilyTag::GEN_T => {
            fam.push(spec.generator.clone().expect("validated"));
            fam.push(id);
        }
    }
    Ok(fam)
}

/// The canonical, coordinate-aligned instance.
pub fn make_family(spec: &FamilySpec, tol: Tolerance) -> Result<MatrixAlgebra> {
    let fam = family_generators(spec)?;
    if spec.tag == FamilyTag::GEN_T {
        return generated_algebra(&fam, tol);
    }
    MatrixAlgebra::span(spec.n, &fam, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Disguise {
    None,
    Unitary,
    Similarity,
}

impl FromStr for Disguise {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Disguise::None),
            "unitary" => Ok(Disguise::Unitary),
            "similarity" => Ok(Disguise::Similarity),
            _ => Err(Error::InvalidInput(format!("unknown disguise '{s}'"))),
        }
    }
}

/// The disguising matrix S for (disguise, seed); the instance is S^{-1} A S.
pub fn disguise_matrix(n: usize, disguise: Disguise, seed: u64) -> ComplexMatrix {
    let mut rng = rng_from(seed);
    match disguise {
        Disguise::None => ComplexMatrix::identity(n),
        Disguise::Unitary => haar_unitary(&mut rng, n),
        Disguise::Similarity => random_similarity(&mut rng, n, MAX_SIMILARITY_CONDITION),
    }
}

/// Canonical instance conjugated by a seeded unitary or similarity.
pub fn random_instance(spec: &FamilySpec, disguise: Disguise, seed: u64, tol: Tolerance) -> Result<MatrixAlgebra> {
    let a = make_family(spec, tol)?;
    if disguise == Disguise::None {
        return Ok(a);
    }
    conjugate(&a, &disguise_matrix(spec.n, disguise, seed))
}

/// Rank parameters covered by the corpus for a tag at size n.
pub fn rank_splits(tag: FamilyTag, n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    match tag {
        FamilyTag::EX1 => {
            for a in 1..n {
                for b in 1..n - a {
                    out.push([a, b, n - a - b]);
                }
            }
        }
        FamilyTag::LR | FamilyTag::LR_UNITAL => {
            for a in 0..=n {
                for b in 0..=n - a {
                    for c in 0..=n - a - b {
                        if a + b > 0 && b + c > 0 {
                            out.push([a, b, c]);
                        }
                    }
                }
            }
        }
        FamilyTag::EX2 | FamilyTag::EX3 | FamilyTag::AT if n >= 3 => out.push([1, 1, n - 2]),
        _ => {}
    }
    out
}

/// Dimension of the EX1 instance predicted from the ranks.
pub fn ex1_dimension(ranks: [usize; 3]) -> usize {
    let [a, b, c] = ranks;
    usize::from(a > 0) + usize::from(c > 0) + (a + b) * (b + c)
}
