//! Clifford generators, Clifford systems and FKM multiplicity arithmetic.
//!
//! Generators are signed permutation matrices, so every relation can be
//! certified with integer arithmetic. A system P_0..P_m on R^{2l} is built
//! from q = m − 1 generators E_i on R^l by
//! P_0(u,v) = (u,−v), P_1(u,v) = (v,u), P_{1+i}(u,v) = (E_i v, −E_i u).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::report::VerificationReport;

pub const SCHEMA_VERSION: u32 = 1;

/// A signed permutation matrix: column j is `sign[j]·e_{perm[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPerm {
    perm: Vec<usize>,
    sign: Vec<i8>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> Self {
        SignedPerm { perm: (0..n).collect(), sign: vec![1; n] }
    }

    pub fn from_parts(perm: Vec<usize>, sign: Vec<i8>) -> Self {
        assert_eq!(perm.len(), sign.len());
        SignedPerm { perm, sign }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        let perm = other.perm.iter().map(|&p| self.perm[p]).collect();
        let sign = other
            .perm
            .iter()
            .zip(&other.sign)
            .map(|(&p, &s)| s * self.sign[p])
            .collect();
        SignedPerm { perm, sign }
    }

    pub fn transpose(&self) -> SignedPerm {
        let mut perm = vec![0; self.dim()];
        let mut sign = vec![0; self.dim()];
        for (j, (&p, &s)) in self.perm.iter().zip(&self.sign).enumerate() {
            perm[p] = j;
            sign[p] = s;
        }
        SignedPerm { perm, sign }
    }

    pub fn neg(&self) -> SignedPerm {
        SignedPerm { perm: self.perm.clone(), sign: self.sign.iter().map(|s| -s).collect() }
    }

    pub fn kron(&self, other: &SignedPerm) -> SignedPerm {
        let nb = other.dim();
        let n = self.dim() * nb;
        let mut perm = vec![0; n];
        let mut sign = vec![0; n];
        for j in 0..self.dim() {
            for l in 0..nb {
                perm[j * nb + l] = self.perm[j] * nb + other.perm[l];
                sign[j * nb + l] = self.sign[j] * other.sign[l];
            }
        }
        SignedPerm { perm, sign }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(j, &p)| p == j) && self.sign.iter().all(|&s| s == 1)
    }

    pub fn is_neg_identity(&self) -> bool {
        self.neg().is_identity()
    }

    pub fn to_integer_matrix(&self) -> DMatrix<i64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            m[(self.perm[j], j)] = self.sign[j] as i64;
        }
        m
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        self.to_integer_matrix().map(|v| v as f64)
    }
}

/// Sign and index of the Cayley–Dickson product of basis units e_i·e_j in
/// the 2^levels-dimensional algebra.
fn cayley_dickson(levels: u32, i: usize, j: usize) -> (i8, usize) {
    if levels == 0 {
        return (1, 0);
    }
    let half = 1usize << (levels - 1);
    let (a, b) = (i % half, i / half);
    let (c, d) = (j % half, j / half);
    let conj = |k: usize| if k == 0 { 1i8 } else { -1 };
    // (a, b)(c, d) = (ac − d̄ b, d a + b c̄) on basis units.
    match (b, d) {
        (0, 0) => cayley_dickson(levels - 1, a, c),
        (0, 1) => {
            let (s, k) = cayley_dickson(levels - 1, c, a);
            (s, k + half)
        }
        (1, 0) => {
            let (s, k) = cayley_dickson(levels - 1, a, c);
            (s * conj(c), k + half)
        }
        _ => {
            let (s, k) = cayley_dickson(levels - 1, c, a);
            (-s * conj(c), k)
        }
    }
}

/// Left multiplications by the q imaginary units e_1..e_q of the
/// 2^levels-dimensional Cayley–Dickson algebra (levels ≤ 3).
fn cayley_dickson_generators(levels: u32, q: usize) -> Vec<SignedPerm> {
    let n = 1usize << levels;
    (1..=q)
        .map(|u| {
            let mut perm = vec![0; n];
            let mut sign = vec![0; n];
            for j in 0..n {
                let (s, k) = cayley_dickson(levels, u, j);
                perm[j] = k;
                sign[j] = s;
            }
            SignedPerm { perm, sign }
        })
        .collect()
}

/// Cayley–Dickson level whose imaginary units supply q ≤ 7 generators.
fn doubling_level(q: usize) -> u32 {
    (q + 1).next_power_of_two().trailing_zeros()
}

/// Least l carrying q anticommuting skew orthogonal generators, read off the
/// construction: a doubling algebra for q ≤ 7, one extra factor of 2 at
/// q = 8, then eightfold periodicity.
pub fn minimal_module_dimension(q: usize) -> u64 {
    match q {
        0..=7 => 1 << doubling_level(q),
        8 => 2 * minimal_module_dimension(7),
        _ => minimal_module_dimension(8) * minimal_module_dimension(q - 8),
    }
}

/// Generators on R^{δ(q)}.
fn irreducible_generators(q: usize) -> Vec<SignedPerm> {
    match q {
        0..=7 => cayley_dickson_generators(doubling_level(q), q),
        8 => {
            let e = cayley_dickson_generators(3, 7);
            let k = SignedPerm::from_parts(vec![0, 1], vec![1, -1]);
            let j = SignedPerm::from_parts(vec![1, 0], vec![1, -1]);
            let mut out: Vec<SignedPerm> = e.iter().map(|g| g.kron(&k)).collect();
            out.push(SignedPerm::identity(8).kron(&j));
            out
        }
        _ => {
            let f = irreducible_generators(8);
            let inner = irreducible_generators(q - 8);
            let inner_dim = minimal_module_dimension(q - 8) as usize;
            let omega = f.iter().skip(1).fold(f[0].clone(), |acc, g| acc.compose(g));
            let mut out: Vec<SignedPerm> =
                f.iter().map(|g| g.kron(&SignedPerm::identity(inner_dim))).collect();
            out.extend(inner.iter().map(|e| omega.kron(e)));
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordGenerators {
    pub module_dim: usize,
    pub generators: Vec<SignedPerm>,
}

impl CliffordGenerators {
    pub fn q(&self) -> usize {
        self.generators.len()
    }

    pub fn integer_matrices(&self) -> Vec<DMatrix<i64>> {
        self.generators.iter().map(SignedPerm::to_integer_matrix).collect()
    }

    /// Exact check of skewness and E_iE_j + E_jE_i = −2δ_ij I.
    pub fn is_exact_clifford(&self) -> bool {
        let g = &self.generators;
        for (i, a) in g.iter().enumerate() {
            if a.dim() != self.module_dim || a.transpose() != a.neg() {
                return false;
            }
            if !a.compose(a).is_neg_identity() {
                return false;
            }
            for b in &g[i + 1..] {
                if a.compose(b) != b.compose(a).neg() {
                    return false;
                }
            }
        }
        true
    }
}

pub fn build_generators(q: usize, l: usize) -> Result<CliffordGenerators> {
    let minimal = minimal_module_dimension(q);
    if l == 0 || (l as u64) % minimal != 0 {
        return Err(Error::DimensionNotAdmissible { q, l, minimal });
    }
    let copies = l / minimal as usize;
    let base = irreducible_generators(q);
    let generators = base.iter().map(|g| SignedPerm::identity(copies).kron(g)).collect();
    Ok(CliffordGenerators { module_dim: l, generators })
}

/// Symmetric operators P_0..P_m on R^{2l} with P_iP_j + P_jP_i = 2δ_ij I.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordSystem {
    half_dim: usize,
    operators: Vec<DMatrix<f64>>,
    exact: bool,
}

impl CliffordSystem {
    /// Wraps operators after shape validation only.
    pub fn new(operators: Vec<DMatrix<f64>>, exact: bool) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::ShapeMismatch("empty operator list".into()))?;
        let n = first.nrows();
        if n == 0 || n % 2 != 0 {
            return Err(Error::ShapeMismatch(format!("operator side {n} is not a positive even number")));
        }
        for (i, p) in operators.iter().enumerate() {
            if p.nrows() != n || p.ncols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "operator {i} is {}x{}, expected {n}x{n}",
                    p.nrows(),
                    p.ncols()
                )));
            }
        }
        Ok(CliffordSystem { half_dim: n / 2, operators, exact })
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    /// m, one less than the number of operators.
    pub fn m(&self) -> usize {
        self.operators.len() - 1
    }

    /// N = l − m − 1, which may be nonpositive for invalid data.
    pub fn complementary_multiplicity(&self) -> i64 {
        self.half_dim as i64 - self.m() as i64 - 1
    }

    pub fn operators(&self) -> &[DMatrix<f64>] {
        &self.operators
    }

    pub fn operator(&self, i: usize) -> &DMatrix<f64> {
        &self.operators[i]
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// (P_0 x, …, P_m x).
    pub fn apply_all(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        self.operators.iter().map(|p| p * x).collect()
    }

    pub fn to_document(&self) -> SystemDocument {
        SystemDocument {
            version: SCHEMA_VERSION,
            half_dim: self.half_dim,
            m: self.m(),
            exact: self.exact,
            operators: self
                .operators
                .iter()
                .map(|p| (0..p.nrows()).map(|r| p.row(r).iter().copied().collect()).collect())
                .collect(),
        }
    }

    pub fn from_document(doc: &SystemDocument) -> Result<Self> {
        if doc.version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!("unsupported schema version {}", doc.version)));
        }
        let n = 2 * doc.half_dim;
        let mut ops = Vec::with_capacity(doc.operators.len());
        for (i, rows) in doc.operators.iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::ShapeMismatch(format!("operator {i} is not {n}x{n}")));
            }
            ops.push(DMatrix::from_fn(n, n, |r, c| rows[r][c]));
        }
        if ops.len() != doc.m + 1 {
            return Err(Error::ShapeMismatch(format!(
                "document declares m = {} but holds {} operators",
                doc.m,
                ops.len()
            )));
        }
        CliffordSystem::new(ops, doc.exact)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SystemDocument = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
        CliffordSystem::from_document(&doc)
    }
}

/// Serialized form of a system: row-major operator arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub version: u32,
    pub half_dim: usize,
    pub m: usize,
    pub exact: bool,
    pub operators: Vec<Vec<Vec<f64>>>,
}

/// Converts a serde_json error into a diagnostic carrying the byte offset.
pub fn parse_error(text: &str, err: &serde_json::Error) -> Error {
    let (line, column) = (err.line(), err.column());
    let mut offset = 0;
    if line > 0 {
        for (i, l) in text.split_inclusive('\n').enumerate() {
            if i + 1 == line {
                offset += column.saturating_sub(1).min(l.len());
                break;
            }
            offset += l.len();
        }
    }
    Error::Parse { offset, line, column, message: err.to_string() }
}

pub fn system_from_generators(gen: &CliffordGenerators) -> CliffordSystem {
    let l = gen.module_dim;
    let id = SignedPerm::identity(l);
    let p0 = SignedPerm::from_parts((0..2 * l).collect(), (0..2 * l).map(|i| if i < l { 1 } else { -1 }).collect());
    let swap = SignedPerm::from_parts(vec![1, 0], vec![1, 1]);
    let p1 = swap.kron(&id);
    // [[0, E],[−E, 0]] = (e_0 e_1ᵀ − e_1 e_0ᵀ) ⊗ E, and that 2×2 factor is J.
    let j = SignedPerm::from_parts(vec![1, 0], vec![-1, 1]);
    let mut ops = vec![p0.to_matrix(), p1.to_matrix()];
    for e in &gen.generators {
        ops.push(j.kron(e).to_matrix());
    }
    CliffordSystem { half_dim: l, operators: ops, exact: true }
}

/// Maximum entries of the symmetry, orthogonality and anticommutation residuals.
pub fn clifford_residuals(sys: &CliffordSystem) -> (f64, f64, f64) {
    let ops = sys.operators();
    let n = sys.dim();
    let id = DMatrix::<f64>::identity(n, n);
    let mut sym = 0.0f64;
    let mut orth = 0.0f64;
    let mut anti = 0.0f64;
    for (i, p) in ops.iter().enumerate() {
        sym = sym.max(max_abs(&(p - p.transpose())));
        orth = orth.max(max_abs(&(p.transpose() * p - &id)));
        for q in &ops[i..] {
            let mut s = p * q + q * p;
            if std::ptr::eq(p, q) {
                s -= &id * 2.0;
            }
            anti = anti.max(max_abs(&s));
        }
    }
    (sym, orth, anti)
}

pub fn verify_clifford_system(sys: &CliffordSystem, tol: f64) -> VerificationReport {
    let (sym, orth, anti) = clifford_residuals(sys);
    let mut report = VerificationReport::new("clifford_system", tol).with_samples(sys.operators().len());
    report.record("symmetry", &[sym]);
    report.record("orthogonality", &[orth]);
    report.record("anticommutation", &[anti]);
    report.note("m", sys.m() as u64);
    report.note("half_dim", sys.half_dim() as u64);
    report.note("exact", sys.is_exact());
    report
}

/// Q_i = Σ_j A[j][i] P_j for a special orthogonal (m+1)×(m+1) matrix A.
pub fn rotate_system(sys: &CliffordSystem, a: &DMatrix<f64>) -> Result<CliffordSystem> {
    let k = sys.operators().len();
    if a.nrows() != k || a.ncols() != k {
        return Err(Error::ShapeMismatch(format!("rotation is {}x{}, expected {k}x{k}", a.nrows(), a.ncols())));
    }
    let orth = max_abs(&(a.transpose() * a - DMatrix::<f64>::identity(k, k)));
    let det = a.determinant();
    if orth > 1e-10 || (det - 1.0).abs() > 1e-10 {
        return Err(Error::NotSpecialOrthogonal { orth, det });
    }
    let n = sys.dim();
    let ops = (0..k)
        .map(|i| {
            let mut q = DMatrix::zeros(n, n);
            for (j, p) in sys.operators().iter().enumerate() {
                let c = a[(j, i)];
                if c != 0.0 {
                    q += p * c;
                }
            }
            q
        })
        .collect();
    let integral = a.iter().all(|v| v.fract() == 0.0);
    Ok(CliffordSystem { half_dim: sys.half_dim(), operators: ops, exact: sys.is_exact() && integral })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiplicityPair {
    pub m1: u64,
    pub m2: u64,
    pub k: u64,
    pub l: u64,
}

/// The FKM pair (m, kδ(m) − m − 1) with l = kδ(m).
pub fn fkm_pair(m: u64, k: u64) -> Result<MultiplicityPair> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidMultiplicities { m1: m as i64, m2: 0 });
    }
    let l = k * minimal_module_dimension(m as usize - 1);
    let m2 = l as i64 - m as i64 - 1;
    if m2 <= 0 {
        return Err(Error::InvalidMultiplicities { m1: m as i64, m2 });
    }
    Ok(MultiplicityPair { m1: m, m2: m2 as u64, k, l })
}

/// The exact FKM system with m + 1 operators on R^{2l}, l = kδ(m).
pub fn fkm_system(m: usize, k: usize) -> Result<CliffordSystem> {
    let pair = fkm_pair(m as u64, k as u64)?;
    fkm_system_on(m, pair.l as usize)
}

/// The exact system with m + 1 operators on R^{2l}; l must be admissible and
/// leave N = l − m − 1 ≥ 1.
pub fn fkm_system_on(m: usize, l: usize) -> Result<CliffordSystem> {
    if m == 0 {
        return Err(Error::InvalidMultiplicities { m1: 0, m2: l as i64 - 1 });
    }
    let n = l as i64 - m as i64 - 1;
    if n <= 0 {
        return Err(Error::InvalidMultiplicities { m1: m as i64, m2: n });
    }
    Ok(system_from_generators(&build_generators(m - 1, l)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkmEnumeration {
    pub max_m1: u64,
    pub pairs: Vec<MultiplicityPair>,
    /// Normalized (min, max) pairs with min ≥ 3 and max < 3·min − 1.
    pub open_pairs: Vec<(u64, u64)>,
    /// Open pair outside the FKM family, listed for reference.
    pub non_fkm_open_pair: (u64, u64),
}

/// FKM pairs for m ≤ max_m1. For each m, k runs until m2 first reaches
/// 3m − 1; larger k only lengthens the list and cannot produce open pairs.
pub fn enumerate_fkm_pairs(max_m1: u64) -> FkmEnumeration {
    let mut pairs = Vec::new();
    let mut open = std::collections::BTreeSet::new();
    for m in 1..=max_m1 {
        let delta = minimal_module_dimension(m as usize - 1);
        let mut k = 1u64;
        loop {
            let m2 = (k * delta) as i64 - m as i64 - 1;
            if m2 > 0 {
                let m2 = m2 as u64;
                pairs.push(MultiplicityPair { m1: m, m2, k, l: k * delta });
                let (lo, hi) = (m.min(m2), m.max(m2));
                if lo >= 3 && hi < 3 * lo - 1 {
                    open.insert((lo, hi));
                }
                if m2 >= 3 * m - 1 {
                    break;
                }
            }
            k += 1;
        }
    }
    FkmEnumeration { max_m1, pairs, open_pairs: open.into_iter().collect(), non_fkm_open_pair: (4, 5) }
}
