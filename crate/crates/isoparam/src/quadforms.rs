//! Bihomogeneous forms p_a(x, y) = xᵀM_a y on V_+ × V_− with
//! M_a[α][μ] = F^μ_{αa}, their rank and spanning diagnostics, the normal form
//! of the shape-operator blocks, and kernel-dimension probes over complex
//! coefficient vectors.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focal::FrameTensors;
use crate::linalg::{max_abs, null_space, orthonormalize_against, rank, rank_threshold, singular_values};
use crate::par::map_indices;
use crate::rng::{gaussian_vector, sample_rng};

const STREAM_SPAN_X: u64 = 0x5a01;
const STREAM_SPAN_Y: u64 = 0x5a02;
const STREAM_PROBE_C: u64 = 0x9c01;
const STREAM_PROBE_V: u64 = 0x9c02;
const STREAM_OT: u64 = 0x0701;

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearSystem {
    pub m1: usize,
    pub m2: usize,
    /// M_1..M_{m1}, each m2×m2.
    pub mats: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearDocument {
    pub m1: usize,
    pub m2: usize,
    pub signature_form: String,
    pub mats: Vec<Vec<Vec<f64>>>,
}

impl BilinearSystem {
    pub fn new(mats: Vec<DMatrix<f64>>) -> Result<Self> {
        let m2 = mats.first().map(|m| m.nrows()).unwrap_or(0);
        if mats.iter().any(|m| m.nrows() != m2 || m.ncols() != m2) {
            return Err(Error::ShapeMismatch("bilinear matrices must share a square shape".into()));
        }
        Ok(BilinearSystem { m1: mats.len(), m2, mats })
    }

    pub fn from_tensors(t: &FrameTensors) -> Self {
        let mats = (0..t.m)
            .map(|a| DMatrix::from_fn(t.n, t.n, |al, mu| t.f_mu_alpha_a[(mu, al, a)]))
            .collect();
        BilinearSystem { m1: t.m, m2: t.n, mats }
    }

    /// p_a(x, y) for a in 0..m1 (the form attached to e_{a+1}).
    pub fn eval(&self, a: usize, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.mats[a] * y))
    }

    /// The signature form p_0(x, y) = |x|² − |y|².
    pub fn signature(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.norm_squared() - y.norm_squared()
    }

    /// p_a as a symmetric form on R^{2·m2}.
    pub fn symmetric_form(&self, a: usize) -> DMatrix<f64> {
        let k = self.m2;
        let mut s = DMatrix::zeros(2 * k, 2 * k);
        let half = &self.mats[a] * 0.5;
        s.view_mut((0, k), (k, k)).copy_from(&half);
        s.view_mut((k, 0), (k, k)).copy_from(&half.transpose());
        s
    }

    pub fn to_document(&self) -> BilinearDocument {
        BilinearDocument {
            m1: self.m1,
            m2: self.m2,
            signature_form: "sum x_alpha^2 - sum y_mu^2".into(),
            mats: self.mats.iter().map(to_rows).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum Certificate {
    Found { vector: Vec<f64>, trial: usize },
    FailureAfterTrials { trials: usize },
}

impl Certificate {
    pub fn is_found(&self) -> bool {
        matches!(self, Certificate::Found { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanningReport {
    pub ranks: Vec<usize>,
    pub rank_thresholds: Vec<f64>,
    /// m2 − m1; each rank must be at least this.
    pub rank_bound: i64,
    pub rank_bound_holds: bool,
    pub x_certificate: Certificate,
    pub y_certificate: Certificate,
    pub seed: u64,
    pub trials: usize,
    pub pass: bool,
}

/// Rank bound rank(M_a) ≥ m2 − m1, and a randomized search for x (resp. y)
/// making the vectors M_aᵀx (resp. M_a y) linearly independent.
pub fn rank_and_spanning_check(
    sys: &BilinearSystem,
    trials: usize,
    seed: u64,
    threshold: Option<f64>,
) -> Result<SpanningReport> {
    if sys.m1 == 0 {
        return Err(Error::InvalidMultiplicities { m1: 0, m2: sys.m2 as i64 });
    }
    let mut ranks = Vec::new();
    let mut thresholds = Vec::new();
    for m in &sys.mats {
        let (r, thr) = rank(m, threshold);
        ranks.push(r);
        thresholds.push(thr);
    }
    let bound = sys.m2 as i64 - sys.m1 as i64;
    let rank_bound_holds = ranks.iter().all(|&r| r as i64 >= bound);
    let search = |stream: u64, transpose: bool| -> Certificate {
        for trial in 0..trials {
            let mut rng = sample_rng(seed, stream, trial as u64);
            let v = gaussian_vector(&mut rng, sys.m2);
            let rows: Vec<DVector<f64>> = sys
                .mats
                .iter()
                .map(|m| if transpose { m.transpose() * &v } else { m * &v })
                .collect();
            let stacked = DMatrix::from_columns(&rows).transpose();
            let (r, _) = rank(&stacked, threshold);
            if r == sys.m1 {
                return Certificate::Found { vector: v.iter().copied().collect(), trial };
            }
        }
        Certificate::FailureAfterTrials { trials }
    };
    let x_certificate = search(STREAM_SPAN_X, true);
    let y_certificate = search(STREAM_SPAN_Y, false);
    let pass = rank_bound_holds && x_certificate.is_found() && y_certificate.is_found();
    Ok(SpanningReport {
        ranks,
        rank_thresholds: thresholds,
        rank_bound: bound,
        rank_bound_holds,
        x_certificate,
        y_certificate,
        seed,
        trials,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormOptions {
    pub tol: f64,
    /// Singular values at or below this are zero.
    pub zero_threshold: f64,
    /// Singular values closer than this share a cluster.
    pub cluster_gap: f64,
}

impl NormalFormOptions {
    pub fn new(tol: f64) -> Self {
        NormalFormOptions { tol, zero_threshold: 1e-8, cluster_gap: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBlock {
    pub sigma: f64,
    pub size: usize,
    /// Δ = f·(⊕ [[0, 1], [−1, 0]]) with f = √(1 − 2σ²).
    pub f: f64,
    pub block: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormResult {
    pub rank: usize,
    /// Nonzero singular values of B, descending.
    pub sigmas: Vec<f64>,
    pub blocks: Vec<DeltaBlock>,
    /// Columns: new bases of V_+, V_− and V_0 in old coordinates.
    pub plus_basis: DMatrix<f64>,
    pub minus_basis: DMatrix<f64>,
    pub zero_basis: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub kernel_dim_a: usize,
    pub residuals: BTreeMap<String, f64>,
    pub max_residual: f64,
    pub pass: bool,
}

fn standard_basis(n: usize) -> Vec<DVector<f64>> {
    (0..n).map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect()
}

fn columns(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

fn from_columns(n: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(cols)
    }
}

/// Nearest orthogonal matrix (polar factor).
fn polar(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, true);
    svd.u.expect("u") * svd.v_t.expect("v_t")
}

/// Canonical skew matrix f·(⊕ [[0, 1], [−1, 0]]) of the given size.
pub fn canonical_delta(size: usize, f: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(size, size);
    let mut i = 0;
    while i + 1 < size {
        d[(i, i + 1)] = f;
        d[(i + 1, i)] = -f;
        i += 2;
    }
    d
}

/// Orthogonal R with Rᵀ·K·R in canonical form for a skew K with K² ≈ −I.
fn canonical_rotation(k: &DMatrix<f64>) -> DMatrix<f64> {
    let size = k.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for e in standard_basis(size) {
        if basis.len() >= size {
            break;
        }
        let Some(v1) = orthonormalize_against(&[e], &basis, 1e-6).pop() else { continue };
        basis.push(v1.clone());
        if let Some(v2) = orthonormalize_against(&[-(k * &v1)], &basis, 1e-6).pop() {
            basis.push(v2);
        }
    }
    from_columns(size, &basis)
}

/// Simultaneous orthonormal bases of V_+, V_−, V_0 in which B = C =
/// [[0, 0], [0, diag σ]] and A = diag(I, Δ), with Δ grouped by σ-cluster.
pub fn block_normal_form(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    opts: NormalFormOptions,
) -> Result<NormalFormResult> {
    let n = a.nrows();
    let mz = b.ncols();
    if a.ncols() != n || b.nrows() != n || c.nrows() != n || c.ncols() != mz {
        return Err(Error::ShapeMismatch("blocks must be A: NxN, B and C: Nxm".into()));
    }
    let bc = max_abs(&(b.transpose() * b - c.transpose() * c));
    if bc > opts.tol {
        return Err(Error::IncompatibleBC { residual: bc });
    }

    // Right singular vectors of B, descending σ.
    let mut sigmas = Vec::new();
    let mut w_cols: Vec<DVector<f64>> = Vec::new();
    if n > 0 && mz > 0 {
        let svd = b.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        for &i in &order {
            let s = svd.singular_values[i];
            if s > opts.zero_threshold {
                if s < 100.0 * opts.zero_threshold {
                    return Err(Error::ClusterAmbiguity(format!("singular value {s:.3e} is close to zero")));
                }
                sigmas.push(s);
                w_cols.push(v_t.row(i).transpose());
            }
        }
    }
    let r = sigmas.len();

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=r {
        if i == r || sigmas[i - 1] - sigmas[i] > opts.cluster_gap {
            if i < r && sigmas[i - 1] - sigmas[i] < 100.0 * opts.cluster_gap {
                return Err(Error::ClusterAmbiguity(format!(
                    "singular values {:.9} and {:.9} are nearly degenerate",
                    sigmas[i - 1],
                    sigmas[i]
                )));
            }
            clusters.push((start, i));
            start = i;
        }
    }

    let mut y_cols: Vec<DVector<f64>> = w_cols.iter().zip(&sigmas).map(|(w, s)| b * w / *s).collect();
    let mut ys_cols: Vec<DVector<f64>> = w_cols.iter().zip(&sigmas).map(|(w, s)| c * w / *s).collect();
    y_cols = orthonormalize_against(&y_cols, &[], 1e-12);
    ys_cols = orthonormalize_against(&ys_cols, &[], 1e-12);
    if y_cols.len() != r || ys_cols.len() != r {
        return Err(Error::ClusterAmbiguity("images of B and C lost rank".into()));
    }
    let x_cols = orthonormalize_against(&standard_basis(n), &y_cols, 1e-8);
    let mut xs_cols = orthonormalize_against(&standard_basis(n), &ys_cols, 1e-8);
    let z_cols = orthonormalize_against(&standard_basis(mz), &w_cols, 1e-8);

    // Rotate the kernel part of V_− so the orthogonal block of A becomes I.
    let xm = from_columns(n, &x_cols);
    let xsm = from_columns(n, &xs_cols);
    let alpha = xm.transpose() * a * &xsm;
    let rot = polar(&alpha).transpose();
    xs_cols = columns(&(xsm * rot));

    // Within each σ-cluster bring the skew block to canonical form.
    let mut blocks = Vec::new();
    for &(lo, hi) in &clusters {
        let size = hi - lo;
        let ym = from_columns(n, &y_cols[lo..hi]);
        let ysm = from_columns(n, &ys_cols[lo..hi]);
        let mu = ym.transpose() * a * &ysm;
        let f2 = -(&mu * &mu).trace() / size as f64;
        let f = f2.max(0.0).sqrt();
        if f > opts.zero_threshold.sqrt() && size >= 2 {
            let rot = canonical_rotation(&(&mu / f));
            if rot.ncols() == size {
                let wm = from_columns(mz, &w_cols[lo..hi]) * &rot;
                let ym = ym * &rot;
                let ysm = ysm * &rot;
                for k in 0..size {
                    w_cols[lo + k] = wm.column(k).into_owned();
                    y_cols[lo + k] = ym.column(k).into_owned();
                    ys_cols[lo + k] = ysm.column(k).into_owned();
                }
            }
        }
        let sigma = sigmas[lo..hi].iter().sum::<f64>() / size as f64;
        blocks.push((lo, hi, sigma, f));
    }

    let plus_cols: Vec<DVector<f64>> = x_cols.iter().chain(&y_cols).cloned().collect();
    let minus_cols: Vec<DVector<f64>> = xs_cols.iter().chain(&ys_cols).cloned().collect();
    let zero_cols: Vec<DVector<f64>> = z_cols.iter().chain(&w_cols).cloned().collect();
    if plus_cols.len() != n || minus_cols.len() != n || zero_cols.len() != mz {
        return Err(Error::ClusterAmbiguity("could not complete orthonormal bases".into()));
    }
    let plus_basis = DMatrix::from_columns(&plus_cols);
    let minus_basis = DMatrix::from_columns(&minus_cols);
    let zero_basis = DMatrix::from_columns(&zero_cols);
    let at = plus_basis.transpose() * a * &minus_basis;
    let bt = plus_basis.transpose() * b * &zero_basis;
    let ct = minus_basis.transpose() * c * &zero_basis;

    let k = n - r;
    let mut a_target = DMatrix::zeros(n, n);
    for i in 0..k {
        a_target[(i, i)] = 1.0;
    }
    let mut delta_squares = 0.0f64;
    let mut first_zero = 0.0f64;
    let mut out_blocks = Vec::new();
    for &(lo, hi, sigma, f) in &blocks {
        let size = hi - lo;
        let canon = canonical_delta(size, f);
        a_target.view_mut((k + lo, k + lo), (size, size)).copy_from(&canon);
        let actual = at.view((k + lo, k + lo), (size, size)).into_owned();
        let target_sq = DMatrix::<f64>::identity(size, size) * (1.0 - 2.0 * sigma * sigma);
        delta_squares = delta_squares.max(max_abs(&(&actual * &actual + target_sq)));
        if (sigma - std::f64::consts::FRAC_1_SQRT_2).abs() <= opts.cluster_gap {
            first_zero = first_zero.max(max_abs(&actual));
        }
        out_blocks.push(DeltaBlock { sigma, size, f, block: to_rows(&actual) });
    }
    let mut b_target = DMatrix::zeros(n, mz);
    for (i, s) in sigmas.iter().enumerate() {
        b_target[(k + i, mz - r + i)] = *s;
    }

    let mut residuals = BTreeMap::new();
    residuals.insert("bc_precondition".to_string(), bc);
    residuals.insert("b_equals_c".to_string(), max_abs(&(&bt - &ct)));
    residuals.insert("b_canonical".to_string(), max_abs(&(&bt - &b_target)));
    residuals.insert("a_canonical".to_string(), max_abs(&(&at - &a_target)));
    residuals.insert("delta_squares".to_string(), delta_squares);
    residuals.insert("delta_first_zero".to_string(), first_zero);
    let orth = |m: &DMatrix<f64>| max_abs(&(m.transpose() * m - DMatrix::<f64>::identity(m.ncols(), m.ncols())));
    residuals.insert(
        "basis_orthogonality".to_string(),
        orth(&plus_basis).max(orth(&minus_basis)).max(orth(&zero_basis)),
    );
    let max_residual = residuals.values().copied().fold(0.0, f64::max);
    let sv = singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    let kthr = rank_threshold(n, n, smax).max(opts.zero_threshold);
    let kernel_dim_a = sv.iter().filter(|&&s| s <= kthr).count();
    Ok(NormalFormResult {
        rank: r,
        sigmas,
        blocks: out_blocks,
        plus_basis,
        minus_basis,
        zero_basis,
        a: at,
        b: bt,
        c: ct,
        kernel_dim_a,
        pass: max_residual <= opts.tol,
        residuals,
        max_residual,
    })
}

/// A triple already in normal form: σ-clusters given as (σ, size), with
/// clusters of σ ≠ 1/√2 of even size. Clusters are laid out by descending σ,
/// the order `block_normal_form` produces.
pub fn normal_form_triple(n: usize, m: usize, clusters: &[(f64, usize)]) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let mut clusters = clusters.to_vec();
    clusters.sort_by(|x, y| y.0.total_cmp(&x.0));
    let r: usize = clusters.iter().map(|c| c.1).sum();
    if r > n || r > m {
        return Err(Error::InvalidArgument(format!("rank {r} exceeds block sizes ({n}, {m})")));
    }
    let k = n - r;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..k {
        a[(i, i)] = 1.0;
    }
    let mut b = DMatrix::zeros(n, m);
    let mut off = 0;
    for &(sigma, size) in &clusters {
        let f = (1.0 - 2.0 * sigma * sigma).max(0.0).sqrt();
        a.view_mut((k + off, k + off), (size, size)).copy_from(&canonical_delta(size, f));
        for i in 0..size {
            b[(k + off + i, m - r + off + i)] = sigma;
        }
        off += size;
    }
    Ok((a.clone(), b.clone(), b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub seed: u64,
    pub threshold: Option<f64>,
    pub c_samples: usize,
    pub kernel_dim_histogram: BTreeMap<usize, usize>,
    pub max_kernel_dim: usize,
    pub generic_kernel_dim: usize,
    /// 2·max dim ker over the sampled c.
    pub max_fiber_dim: usize,
    pub fiber_bound: usize,
    pub fiber_bound_holds: bool,
    /// Upper evidence for dim Z_n: sampled fiber plus base dimension n − 1.
    pub z_dim_upper_evidence: usize,
    pub point_samples: usize,
    pub jacobian_ranks: BTreeMap<usize, usize>,
    pub smooth_fraction: f64,
}

fn complex_kernel_dim(m: &DMatrix<Complex<f64>>, threshold: Option<f64>) -> usize {
    let n = m.ncols();
    let sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let thr = threshold.unwrap_or_else(|| rank_threshold(m.nrows(), n, smax));
    n - sv.iter().filter(|&&s| s > thr).count()
}

fn complex_combination(mats: &[DMatrix<f64>], c: &[Complex<f64>]) -> DMatrix<Complex<f64>> {
    let k = mats[0].nrows();
    let mut out = DMatrix::from_element(k, mats[0].ncols(), Complex::new(0.0, 0.0));
    for (m, ci) in mats.iter().zip(c) {
        out += m.map(|v| Complex::new(v, 0.0)) * *ci;
    }
    out
}

fn random_unit_complex<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex<f64>> {
    let v: Vec<Complex<f64>> =
        (0..n).map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Kernel dimensions of Σ c_a M_a over seeded c on the unit sphere of C^n and
/// Jacobian ranks of (p_1..p_n) at seeded real points of their common zero set.
pub fn incidence_dimension_probe(
    sys: &BilinearSystem,
    n: usize,
    c_samples: usize,
    point_samples: usize,
    seed: u64,
    threshold: Option<f64>,
) -> Result<ProbeReport> {
    if n == 0 || n > sys.m1 {
        return Err(Error::InvalidArgument(format!("n = {n} must lie in 1..={}", sys.m1)));
    }
    let mats = &sys.mats[..n];
    let dims = map_indices(c_samples, |i| {
        let mut rng = sample_rng(seed, STREAM_PROBE_C, i as u64);
        let c = random_unit_complex(&mut rng, n);
        complex_kernel_dim(&complex_combination(mats, &c), threshold)
    });
    let mut histogram = BTreeMap::new();
    for &d in &dims {
        *histogram.entry(d).or_insert(0) += 1;
    }
    let max_kernel_dim = dims.iter().copied().max().unwrap_or(0);
    let generic_kernel_dim = histogram.iter().max_by_key(|(_, &count)| count).map(|(&d, _)| d).unwrap_or(0);
    let fiber_bound = (sys.m1 + sys.m2).saturating_sub(1);

    let ranks = map_indices(point_samples, |i| {
        let mut rng = sample_rng(seed, STREAM_PROBE_V, i as u64);
        let x = gaussian_vector(&mut rng, sys.m2);
        let sx = DMatrix::from_fn(n, sys.m2, |a, mu| (mats[a].transpose() * &x)[mu]);
        let kernel = null_space(&sx, None);
        let y = if kernel.ncols() == 0 {
            DVector::zeros(sys.m2)
        } else {
            &kernel * gaussian_vector(&mut rng, kernel.ncols())
        };
        let jac = DMatrix::from_fn(n, 2 * sys.m2, |a, j| {
            if j < sys.m2 {
                (&mats[a] * &y)[j]
            } else {
                sx[(a, j - sys.m2)]
            }
        });
        rank(&jac, threshold).0
    });
    let mut jacobian_ranks = BTreeMap::new();
    for &r in &ranks {
        *jacobian_ranks.entry(r).or_insert(0) += 1;
    }
    let smooth = ranks.iter().filter(|&&r| r == n).count();
    Ok(ProbeReport {
        n,
        m1: sys.m1,
        m2: sys.m2,
        seed,
        threshold,
        c_samples,
        kernel_dim_histogram: histogram,
        max_kernel_dim,
        generic_kernel_dim,
        max_fiber_dim: 2 * max_kernel_dim,
        fiber_bound,
        fiber_bound_holds: 2 * max_kernel_dim <= fiber_bound,
        z_dim_upper_evidence: 2 * max_kernel_dim + n - 1,
        point_samples,
        jacobian_ranks,
        smooth_fraction: if point_samples == 0 { 0.0 } else { smooth as f64 / point_samples as f64 },
    })
}

/// Gaussian integer used for exact elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct GaussInt {
    re: i128,
    im: i128,
}

impl GaussInt {
    const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
    fn mul(self, o: GaussInt) -> GaussInt {
        GaussInt { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
    fn sub(self, o: GaussInt) -> GaussInt {
        GaussInt { re: self.re - o.re, im: self.im - o.im }
    }
    fn div_exact(self, o: GaussInt) -> GaussInt {
        let num = self.mul(GaussInt { re: o.re, im: -o.im });
        let den = o.re * o.re + o.im * o.im;
        debug_assert!(num.re % den == 0 && num.im % den == 0, "inexact Gaussian division");
        GaussInt { re: num.re / den, im: num.im / den }
    }
}

/// Exact rank over Q(i) by fraction-free elimination.
fn exact_rank(mut a: Vec<Vec<GaussInt>>) -> usize {
    let rows = a.len();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut prev = GaussInt { re: 1, im: 0 };
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&i| a[i][col] != GaussInt::ZERO) else { continue };
        a.swap(p, row);
        for i in row + 1..rows {
            for j in col + 1..cols {
                a[i][j] = a[row][col].mul(a[i][j]).sub(a[i][col].mul(a[row][j])).div_exact(prev);
            }
            a[i][col] = GaussInt::ZERO;
        }
        prev = a[row][col];
        row += 1;
        if row == rows {
            break;
        }
    }
    row
}

/// Exact kernel dimension of c_1 M_1 + c_2 M_2 for integer matrices and
/// Gaussian-integer coefficients.
pub fn exact_kernel_dim(m1: &DMatrix<f64>, m2: &DMatrix<f64>, c: [(i64, i64); 2]) -> usize {
    let to_int = |v: f64| {
        assert!(v.fract() == 0.0, "exact rank needs integer entries");
        v as i128
    };
    let (c1, c2) = (
        GaussInt { re: c[0].0 as i128, im: c[0].1 as i128 },
        GaussInt { re: c[1].0 as i128, im: c[1].1 as i128 },
    );
    let rows = (0..m1.nrows())
        .map(|i| {
            (0..m1.ncols())
                .map(|j| {
                    let a = GaussInt { re: to_int(m1[(i, j)]), im: 0 };
                    let b = GaussInt { re: to_int(m2[(i, j)]), im: 0 };
                    let s = c1.mul(a);
                    let t = c2.mul(b);
                    GaussInt { re: s.re + t.re, im: s.im + t.im }
                })
                .collect()
        })
        .collect();
    m1.ncols() - exact_rank(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OzekiTakeuchiAnalysis {
    pub h: usize,
    pub m2: usize,
    /// Exact kernel dimensions at c = [√−1 : 1] and [−√−1 : 1].
    pub special_kernel_dims: [usize; 2],
    /// Kernel dimensions at seeded generic c, by singular values.
    pub generic_kernel_dims: Vec<usize>,
    pub generic_kernel_dim: usize,
    /// max(special fiber, generic fiber + 1).
    pub dim_z2: usize,
    pub ranks: Vec<usize>,
    pub seed: u64,
}

/// The two forms p_1 = −2Σ_j(x_j y_j + x_{h+j} y_{h+j}) and
/// p_2 = 2Σ_j(x_j y_{h+j} − x_{h+j} y_j) on R^{2h+1} × R^{2h+1}.
pub fn ozeki_takeuchi_system(h: usize) -> BilinearSystem {
    let k = 2 * h + 1;
    let mut a = DMatrix::zeros(k, k);
    let mut b = DMatrix::zeros(k, k);
    for j in 0..h {
        a[(j, j)] = -2.0;
        a[(h + j, h + j)] = -2.0;
        b[(j, h + j)] = 2.0;
        b[(h + j, j)] = -2.0;
    }
    BilinearSystem { m1: 2, m2: k, mats: vec![a, b] }
}

pub fn ozeki_takeuchi_example(h: usize, generic_samples: usize, seed: u64) -> Result<(BilinearSystem, OzekiTakeuchiAnalysis)> {
    if h == 0 {
        return Err(Error::InvalidArgument("h must be positive".into()));
    }
    let sys = ozeki_takeuchi_system(h);
    let special = [
        exact_kernel_dim(&sys.mats[0], &sys.mats[1], [(0, 1), (1, 0)]),
        exact_kernel_dim(&sys.mats[0], &sys.mats[1], [(0, -1), (1, 0)]),
    ];
    let generic: Vec<usize> = (0..generic_samples)
        .map(|i| {
            let mut rng = sample_rng(seed, STREAM_OT, i as u64);
            let c = random_unit_complex(&mut rng, 2);
            complex_kernel_dim(&complex_combination(&sys.mats, &c), None)
        })
        .collect();
    let generic_kernel_dim = generic.iter().copied().max().unwrap_or(0);
    let dim_z2 = (2 * special[0].max(special[1])).max(2 * generic_kernel_dim + 1);
    let ranks = sys.mats.iter().map(|m| rank(m, None).0).collect();
    Ok((
        sys,
        OzekiTakeuchiAnalysis {
            h,
            m2: 2 * h + 1,
            special_kernel_dims: special,
            generic_kernel_dims: generic,
            generic_kernel_dim,
            dim_z2,
            ranks,
            seed,
        },
    ))
}
