//! Command-line front end: JSON algebra files, generation, checking,
//! classification, structure and witness reports.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::checker::{check_with, CheckOptions, Mode, TrialReport, Violation, DEFAULT_TRIALS};
use crate::classifier::{classify, find_witness, type_path, TypePath, Verdict};
use crate::error::{Error, Result};
use crate::families::{random_instance, Disguise, FamilySpec, FamilyTag};
use crate::matcore::{c, ComplexMatrix, Tolerance};
use crate::structure::{block_diagonal, radical, triangularize_seeded};
use crate::subalgebra::{unitize, MatrixAlgebra};

/// Environment variable overriding the relative tolerance.
pub const TOL_ENV: &str = "CORNERALG_TOL";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FileMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disguise: Option<Disguise>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

/// On-disk algebra: a spanning family of n x n complex matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub n: usize,
    pub basis: Vec<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<FileMeta>,
}

/// Compact JSON with every float written as 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 && value.is_sign_positive() {
            writer.write_all(b"0.0")
        } else {
            write!(writer, "{value:.16e}")
        }
    }
}

impl AlgebraFile {
    pub fn from_algebra(a: &MatrixAlgebra, meta: Option<FileMeta>) -> Self {
        AlgebraFile { n: a.n(), basis: a.basis().to_vec(), meta }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
        self.serialize(&mut ser).map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
        out.push(b'\n');
        String::from_utf8(out).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: AlgebraFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed algebra file: {e}")))?;
        if f.n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if f.basis.is_empty() {
            return Err(Error::InvalidInput("empty basis".into()));
        }
        if let Some(k) = f.basis.iter().position(|x| x.shape() != (f.n, f.n)) {
            let (r, cc) = f.basis[k].shape();
            return Err(Error::Shape(format!("basis element {k} is {r}x{cc}, expected {n}x{n}", n = f.n)));
        }
        Ok(f)
    }

    /// Orthonormalized algebra spanned by the basis.
    pub fn algebra(&self, tol: Tolerance) -> Result<MatrixAlgebra> {
        MatrixAlgebra::span(self.n, &self.basis, tol)
    }
}

pub fn tolerance_from_env() -> Result<Tolerance> {
    match std::env::var(TOL_ENV) {
        Ok(s) => {
            let v: f64 = s.trim().parse().map_err(|_| Error::InvalidInput(format!("{TOL_ENV}='{s}' is not a number")))?;
            Tolerance::default().with_rel_eps(v)
        }
        Err(_) => Ok(Tolerance::default()),
    }
}

pub fn parse_algebra_file(path: &Path, tol: Tolerance) -> Result<(MatrixAlgebra, AlgebraFile)> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let file = AlgebraFile::from_json(&text)?;
    Ok((file.algebra(tol)?, file))
}

pub fn write_algebra_file(path: &Path, file: &AlgebraFile) -> Result<()> {
    fs::write(path, file.to_json()?).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureReport {
    pub n: usize,
    pub dim: usize,
    pub unital: bool,
    pub radical_dim: usize,
    /// Block sizes of the reduced form of the (unitized) algebra.
    pub block_sizes: Vec<usize>,
    pub linkage: Vec<Vec<usize>>,
    pub bd_dim: usize,
    pub type_path: TypePath,
    pub frame: ComplexMatrix,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessReport {
    pub found: bool,
    pub witness: Option<Violation>,
    pub seed: u64,
}

pub fn structure_report(a: &MatrixAlgebra, seed: u64) -> Result<StructureReport> {
    let u = unitize(a)?;
    let b = triangularize_seeded(&u, seed)?;
    let bd = block_diagonal(&u, &b)?;
    let rad = radical(a)?;
    let (path, _) = type_path(&u, &b);
    Ok(StructureReport {
        n: a.n(),
        dim: a.dim(),
        unital: a.is_unital(),
        radical_dim: rad.dim(),
        block_sizes: b.sizes.clone(),
        linkage: b.linkage.clone(),
        bd_dim: bd.dim(),
        type_path: path,
        frame: b.frame.clone(),
        seed,
    })
}

pub fn witness_report(a: &MatrixAlgebra, seed: u64) -> Result<WitnessReport> {
    let b = unitize(a).and_then(|u| triangularize_seeded(&u, seed)).ok();
    let w = find_witness(a, b.as_ref(), seed)?;
    Ok(WitnessReport { found: w.is_some(), witness: w, seed })
}

fn matrix_text(x: &ComplexMatrix) -> String {
    let mut s = String::new();
    for i in 0..x.rows() {
        s.push_str("  [");
        for j in 0..x.cols() {
            let z = x[(i, j)];
            s.push_str(&format!(" {:>9.4}{:+.4}i", z.re, z.im));
        }
        s.push_str(" ]\n");
    }
    s
}

fn violation_text(v: &Violation) -> String {
    format!(
        "  source: {}\n  residual: {:.6e}\n  worst pair: {:?}\n  idempotent:\n{}",
        v.source,
        v.residual,
        v.worst_pair,
        matrix_text(&v.idempotent)
    )
}

pub fn verdict_text(v: &Verdict) -> String {
    let mut s = format!("compressible: {}\ntype path: {}\nseed: {}\n", v.compressible, v.type_path, v.seed);
    if let Some(f) = &v.spec {
        s.push_str(&format!("family: {} ranks {:?}", f.tag, f.ranks));
        if f.t.is_some() {
            let t = f.t_value();
            s.push_str(&format!(" t = {:.6}{:+.6}i", t.re, t.im));
        }
        if v.anti_transposed {
            s.push_str(" (anti-transposed)");
        }
        s.push('\n');
    }
    if let Some(sim) = &v.similarity {
        s.push_str(&format!("similarity:\n{}", matrix_text(sim)));
    }
    if let Some(w) = &v.witness {
        s.push_str(&format!("witness:\n{}", violation_text(w)));
    }
    let cv = &v.cross_validation;
    s.push_str(&format!(
        "cross-validation: {} trials, {} catalog checks, {} indeterminate\n",
        cv.trials, cv.catalog_checked, cv.indeterminate
    ));
    for note in &v.notes {
        s.push_str(&format!("note: {note}\n"));
    }
    s
}

pub fn trial_report_text(r: &TrialReport) -> String {
    let mut s = format!(
        "mode: {}\ntrials: {}\ncatalog checked: {}\nseed: {}\nindeterminate: {}\nviolations: {}\n",
        r.mode,
        r.trials,
        r.catalog_checked,
        r.seed,
        r.indeterminate,
        r.violations.len()
    );
    for v in &r.violations {
        s.push_str(&violation_text(v));
    }
    s
}

pub fn structure_text(r: &StructureReport) -> String {
    format!(
        "n: {}\ndim: {}\nunital: {}\nradical dim: {}\nblock sizes: {:?}\nlinkage: {:?}\nBD dim: {}\ntype path: {}\nseed: {}\nframe:\n{}",
        r.n,
        r.dim,
        r.unital,
        r.radical_dim,
        r.block_sizes,
        r.linkage,
        r.bd_dim,
        r.type_path,
        r.seed,
        matrix_text(&r.frame)
    )
}

pub fn witness_text(r: &WitnessReport) -> String {
    match &r.witness {
        Some(w) => format!("witness found (seed {}):\n{}", r.seed, violation_text(w)),
        None => format!("none found (seed {})\n", r.seed),
    }
}

// ---------------------------------------------------------------------------
// argument parsing

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "corneralg", version, about = "Corner compressibility of unital matrix algebras")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a family instance to an algebra file.
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        /// Comma-separated ranks a,b,c.
        #[arg(long)]
        ranks: Option<String>,
        /// Hinge scalar re,im.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        #[arg(long, default_value = "none")]
        disguise: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when absent.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Randomized and catalog corner-closure check.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "idempotent")]
        mode: String,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the witness catalog.
        #[arg(long)]
        no_catalog: bool,
    },
    /// Compressibility verdict with certificate.
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Radical, blocks, linkage and block-diagonal part.
    Structure {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// First violating idempotent, or none found.
    Witness {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| Error::InvalidInput(format!("bad {what} component '{p}'"))))
        .collect()
}

pub fn family_spec(tag: FamilyTag, n: usize, ranks: Option<&str>, t: Option<&str>) -> Result<FamilySpec> {
    let ranks3 = || -> Result<[usize; 3]> {
        let r: Vec<usize> = parse_list(ranks.ok_or_else(|| Error::InvalidInput(format!("{tag} needs --ranks")))?, "ranks")?;
        r.try_into().map_err(|_| Error::InvalidInput("--ranks takes three values".into()))
    };
    let spec = match tag {
        FamilyTag::LR => FamilySpec::lr(n, ranks3()?),
        FamilyTag::LR_UNITAL => FamilySpec::lr_unital(n, ranks3()?),
        FamilyTag::EX1 => FamilySpec::ex1(n, ranks3()?),
        FamilyTag::EX2 => FamilySpec::ex2(n),
        FamilyTag::EX3 => FamilySpec::ex3(n),
        FamilyTag::AT => {
            let v: Vec<f64> = parse_list(t.ok_or_else(|| Error::InvalidInput("AT needs --t".into()))?, "t")?;
            let [re, im]: [f64; 2] = v.try_into().map_err(|_| Error::InvalidInput("--t takes re,im".into()))?;
            FamilySpec::at(n, c(re, im))
        }
        FamilyTag::SCALAR => FamilySpec::scalar(n),
        FamilyTag::DIAGONAL => FamilySpec::diagonal(n),
        FamilyTag::GEN_T => return Err(Error::InvalidInput("GEN_T instances are written from a matrix, not generated".into())),
    };
    spec.validate()?;
    Ok(spec)
}

/// Report text and process exit code.
pub struct Outcome {
    pub output: String,
    pub code: i32,
}

fn render<T: Serialize>(format: Format, value: &T, text: impl FnOnce(&T) -> String) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Text => Ok(text(value)),
    }
}

pub fn execute(cli: &Cli, tol: Tolerance) -> Result<Outcome> {
    let fmt = cli.format;
    match &cli.command {
        Command::Gen { family, n, ranks, t, disguise, seed, output } => {
            let tag: FamilyTag = family.parse()?;
            let spec = family_spec(tag, *n, ranks.as_deref(), t.as_deref())?;
            let disguise: Disguise = disguise.parse()?;
            let a = random_instance(&spec, disguise, *seed, tol)?;
            let meta = FileMeta { family: Some(spec), disguise: Some(disguise), seed: Some(*seed), notes: None };
            let file = AlgebraFile::from_algebra(&a, Some(meta));
            match output {
                Some(p) => {
                    write_algebra_file(p, &file)?;
                    Ok(Outcome { output: format!("wrote {} (n = {}, dim = {})\n", p.display(), a.n(), a.dim()), code: 0 })
                }
                None => Ok(Outcome { output: file.to_json()?, code: 0 }),
            }
        }
        Command::Check { file, mode, trials, seed, no_catalog } => {
            let (a, _) = parse_algebra_file(file, tol)?;
            let mode: Mode = mode.parse()?;
            let opts = CheckOptions { catalog: !no_catalog, ..CheckOptions::new(mode, *trials, *seed) };
            let report = check_with(&a, &opts)?;
            let code = if report.is_clean() { 0 } else { 1 };
            Ok(Outcome { output: render(fmt, &report, trial_report_text)?, code })
        }
        Command::Classify { file, seed } => {
            let (a, _) = parse_algebra_file(file, tol)?;
            let v = classify(&a, *seed)?;
            let code = if v.compressible { 0 } else { 1 };
            Ok(Outcome { output: render(fmt, &v, verdict_text)?, code })
        }
        Command::Structure { file, seed } => {
            let (a, _) = parse_algebra_file(file, tol)?;
            let r = structure_report(&a, *seed)?;
            Ok(Outcome { output: render(fmt, &r, structure_text)?, code: 0 })
        }
        Command::Witness { file, seed } => {
            let (a, _) = parse_algebra_file(file, tol)?;
            let r = witness_report(&a, *seed)?;
            let code = if r.found { 1 } else { 0 };
            Ok(Outcome { output: render(fmt, &r, witness_text)?, code })
        }
    }
}

/// Parses arguments, runs, prints, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = tolerance_from_env().and_then(|tol| execute(&cli, tol));
    match result {
        Ok(out) => {
            print!("{}", out.output);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
