//! Focal submanifold M_+ = {|x| = 1, ⟨Q_i x, x⟩ = 0}, its Darboux frame and
//! the pointwise tensors and identities read off from it.
//!
//! Index conventions (0-based arrays): `a` in 0..m stands for the normal
//! e_{a+1} = Q_{a+1}x; `p` in 0..m stands for the osculating vector
//! e_{m+1+p} = Q_{p+1}Q_0 x; `α` and `μ` in 0..N index the plus and minus
//! bases. Tangent-space matrices use the order (V_+, V_−, V_0).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordSystem;
use crate::error::{Error, FkmCondition, Result};
use crate::fkm::CartanMunznerField;
use crate::linalg::{max_abs, null_space, orthonormalize_against, rank_threshold};
use crate::report::VerificationReport;
use crate::rng::{gaussian_vector, sample_rng, unit_vector};
use crate::tensor::Tensor3;

const STREAM_PLUS: u64 = 0xf0c1;
const STREAM_MINUS: u64 = 0xf0c2;
const STREAM_SLICE: u64 = 0x51ce;
const STREAM_SWAP: u64 = 0x5a4b;

/// Tolerance for membership in M_+ when a frame is built.
pub const ON_MANIFOLD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn constraint_residuals(sys: &CliffordSystem, x: &DVector<f64>) -> DVector<f64> {
    let k = sys.operators().len();
    let mut g = DVector::zeros(k + 1);
    for (i, p) in sys.operators().iter().enumerate() {
        g[i] = (p * x).dot(x);
    }
    g[k] = x.norm_squared() - 1.0;
    g
}

/// Largest violation of ⟨Q_i x, x⟩ = 0 and |x| = 1.
pub fn manifold_residual(sys: &CliffordSystem, x: &DVector<f64>) -> f64 {
    let g = constraint_residuals(sys, x);
    let k = g.len() - 1;
    let radial = (x.norm() - 1.0).abs();
    g.rows(0, k).amax().max(radial)
}

/// Gauss–Newton with minimum-norm steps on ⟨P_i x, x⟩ = 0, |x|² = 1.
pub fn project_to_mplus(sys: &CliffordSystem, x0: &DVector<f64>, tol: f64, max_iter: usize) -> Result<Projection> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), got: x0.len() });
    }
    let k = sys.operators().len() + 1;
    let mut x = x0.clone();
    for iter in 0..=max_iter {
        let g = constraint_residuals(sys, &x);
        let residual = g.amax().max((x.norm() - 1.0).abs());
        if residual <= tol {
            return Ok(Projection { point: x, iterations: iter, residual });
        }
        if iter == max_iter {
            return Err(Error::NoConvergence { iterations: max_iter, residual });
        }
        let mut jac = DMatrix::zeros(k, x.len());
        for (i, p) in sys.operators().iter().enumerate() {
            jac.row_mut(i).copy_from(&(p * &x * 2.0).transpose());
        }
        jac.row_mut(k - 1).copy_from(&(&x * 2.0).transpose());
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let thr = rank_threshold(k, x.len(), smax).max(f64::MIN_POSITIVE);
        let rank = svd.singular_values.iter().filter(|&&s| s > thr).count();
        if rank < k {
            return Err(Error::SingularJacobian { rank, needed: k });
        }
        let step = svd.solve(&g, thr).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        x -= step;
    }
    unreachable!("loop returns on the last iteration")
}

/// Adapted orthonormal frame at a point x of M_+.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxFrame {
    pub system: CliffordSystem,
    pub x: DVector<f64>,
    /// e_0..e_m with e_i = Q_i x.
    pub normals: Vec<DVector<f64>>,
    /// e_{m+1}..e_{2m} with e_{m+a} = Q_a Q_0 x.
    pub osculating: Vec<DVector<f64>>,
    /// −1 eigenvectors of Q_0 in the tangent space (V_+).
    pub plus: Vec<DVector<f64>>,
    /// +1 eigenvectors of Q_0 in the tangent space (V_−).
    pub minus: Vec<DVector<f64>>,
    pub basis_seed: u64,
}

impl DarbouxFrame {
    pub fn m(&self) -> usize {
        self.normals.len() - 1
    }

    pub fn n(&self) -> usize {
        self.plus.len()
    }

    pub fn tangent_dim(&self) -> usize {
        2 * self.n() + self.m()
    }

    /// Tangent basis in the order (V_+, V_−, V_0).
    pub fn tangent_basis(&self) -> Vec<DVector<f64>> {
        self.plus.iter().chain(&self.minus).chain(&self.osculating).cloned().collect()
    }

    /// x, e_0..e_m, e_{m+1}..e_{2m}, plus, minus.
    pub fn all_vectors(&self) -> Vec<DVector<f64>> {
        std::iter::once(self.x.clone())
            .chain(self.normals.iter().cloned())
            .chain(self.osculating.iter().cloned())
            .chain(self.plus.iter().cloned())
            .chain(self.minus.iter().cloned())
            .collect()
    }

    /// The frame at x̄ = e_0 obtained by exchanging x ↔ e_0 and e_a ↔ e_{a+m}.
    pub fn antipodal(&self) -> DarbouxFrame {
        let mut normals = vec![self.x.clone()];
        normals.extend(self.osculating.iter().cloned());
        DarbouxFrame {
            system: self.system.clone(),
            x: self.normals[0].clone(),
            normals,
            osculating: self.normals[1..].to_vec(),
            plus: self.plus.clone(),
            minus: self.minus.clone(),
            basis_seed: self.basis_seed,
        }
    }

    /// Frame invariants: Gram matrix, Q_0 eigen-split, normal rule e_i = Q_i x,
    /// osculating rule and membership of x in M_+.
    pub fn validate(&self, tol: f64) -> VerificationReport {
        let mut report = VerificationReport::new("darboux_frame", tol);
        let v = self.all_vectors();
        let g = DMatrix::from_columns(&v);
        let gram = g.transpose() * &g - DMatrix::<f64>::identity(v.len(), v.len());
        report.record("gram", &[max_abs(&gram)]);
        let q0 = self.system.operator(0);
        let plus: Vec<f64> = self.plus.iter().map(|u| (q0 * u + u).amax()).collect();
        let minus: Vec<f64> = self.minus.iter().map(|u| (q0 * u - u).amax()).collect();
        report.record("q0_plus", &plus);
        report.record("q0_minus", &minus);
        let normal_rule: Vec<f64> =
            self.normals.iter().enumerate().map(|(i, e)| (self.system.operator(i) * &self.x - e).amax()).collect();
        report.record("normal_rule", &normal_rule);
        let osc_rule: Vec<f64> = self
            .osculating
            .iter()
            .enumerate()
            .map(|(a, e)| (self.system.operator(a + 1) * &self.normals[0] - e).amax())
            .collect();
        report.record("osculating_rule", &osc_rule);
        report.record("on_manifold", &[manifold_residual(&self.system, &self.x)]);
        report
    }

    pub fn to_document(&self) -> FrameDocument {
        let rows = |v: &[DVector<f64>]| v.iter().map(|u| u.iter().copied().collect()).collect();
        FrameDocument {
            m: self.m(),
            n: self.n(),
            half_dim: self.system.half_dim(),
            basis_seed: self.basis_seed,
            vector_order: "x, e_0..e_m (normals), e_{m+1}..e_{2m} (osculating), plus (V_+), minus (V_-)".into(),
            x: self.x.iter().copied().collect(),
            normals: rows(&self.normals),
            osculating: rows(&self.osculating),
            plus: rows(&self.plus),
            minus: rows(&self.minus),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDocument {
    pub m: usize,
    pub n: usize,
    pub half_dim: usize,
    pub basis_seed: u64,
    pub vector_order: String,
    pub x: Vec<f64>,
    pub normals: Vec<Vec<f64>>,
    pub osculating: Vec<Vec<f64>>,
    pub plus: Vec<Vec<f64>>,
    pub minus: Vec<Vec<f64>>,
}

fn eigen_block(
    sys: &CliffordSystem,
    fixed: &[DVector<f64>],
    sign: f64,
    stream: u64,
    seed: u64,
) -> Vec<DVector<f64>> {
    let n = sys.dim();
    let q0 = sys.operator(0);
    let candidates: Vec<DVector<f64>> = (0..sys.half_dim() + 2)
        .map(|j| {
            let mut rng = sample_rng(seed, stream, j as u64);
            let v = gaussian_vector(&mut rng, n);
            (&v + q0 * &v * sign) * 0.5
        })
        .collect();
    orthonormalize_against(&candidates, fixed, 1e-8)
}

/// Builds the frame at a point of M_+; the plus and minus bases come from
/// seeded random vectors projected onto the Q_0 eigenspaces.
pub fn build_frame(sys: &CliffordSystem, x: &DVector<f64>, seed: u64) -> Result<DarbouxFrame> {
    if x.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), got: x.len() });
    }
    let residual = manifold_residual(sys, x);
    if residual > ON_MANIFOLD_TOL {
        return Err(Error::OffManifold { residual });
    }
    let m = sys.m();
    let big_n = sys.complementary_multiplicity();
    let normals: Vec<DVector<f64>> = sys.apply_all(x);
    let osculating: Vec<DVector<f64>> = (1..=m).map(|a| sys.operator(a) * &normals[0]).collect();
    let mut fixed = vec![x.clone()];
    fixed.extend(normals.iter().cloned());
    fixed.extend(osculating.iter().cloned());
    let plus = eigen_block(sys, &fixed, -1.0, STREAM_PLUS, seed);
    let minus = eigen_block(sys, &fixed, 1.0, STREAM_MINUS, seed);
    if big_n < 0 || plus.len() != big_n as usize || minus.len() != big_n as usize {
        return Err(Error::EigsplitDefect(format!(
            "dims (V_0, V_+, V_-) = ({m}, {}, {}), expected ({m}, {big_n}, {big_n})",
            plus.len(),
            minus.len()
        )));
    }
    let frame = DarbouxFrame {
        system: sys.clone(),
        x: x.clone(),
        normals,
        osculating,
        plus,
        minus,
        basis_seed: seed,
    };
    let check = frame.validate(1e-10);
    if !check.pass {
        return Err(Error::EigsplitDefect(format!(
            "frame invariants fail (max residual {:.3e})",
            check.residuals.max
        )));
    }
    Ok(frame)
}

/// Samples a focal point from a seeded random start and builds its frame.
pub fn random_frame(sys: &CliffordSystem, seed: u64) -> Result<DarbouxFrame> {
    let mut rng = crate::rng::seeded_rng(seed);
    let x0 = unit_vector(&mut rng, sys.dim());
    let x = project_to_mplus(sys, &x0, 1e-14, 50)?.point;
    build_frame(sys, &x, seed)
}

/// Coefficients t^i of a normal vector ν = Σ t^i Q_i x, after checking that
/// ν lies in the normal span and has unit length.
pub fn normal_coefficients(sys: &CliffordSystem, point: &DVector<f64>, normal: &DVector<f64>) -> Result<Vec<f64>> {
    let es = sys.apply_all(point);
    let t: Vec<f64> = es.iter().map(|e| e.dot(normal)).collect();
    let mut rebuilt = DVector::zeros(normal.len());
    for (e, ti) in es.iter().zip(&t) {
        rebuilt.axpy(*ti, e, 1.0);
    }
    let residual = (normal - rebuilt)
        .amax()
        .max((t.iter().map(|v| v * v).sum::<f64>() - 1.0).abs());
    if residual > 1e-10 {
        return Err(Error::NotUnitNormal { residual });
    }
    Ok(t)
}

/// Matrix of S_ν u = −(tangential part of Σ t^i Q_i u) in the given
/// orthonormal tangent basis.
pub fn shape_matrix(
    sys: &CliffordSystem,
    point: &DVector<f64>,
    normal: &DVector<f64>,
    basis: &[DVector<f64>],
) -> Result<DMatrix<f64>> {
    let t = normal_coefficients(sys, point, normal)?;
    let images: Vec<DVector<f64>> = basis
        .iter()
        .map(|u| {
            let mut v = DVector::zeros(u.len());
            for (p, ti) in sys.operators().iter().zip(&t) {
                if *ti != 0.0 {
                    v += p * u * *ti;
                }
            }
            v
        })
        .collect();
    let k = basis.len();
    Ok(DMatrix::from_fn(k, k, |r, c| -basis[r].dot(&images[c])))
}

/// Shape operator of M_+ at the frame point for a unit normal.
pub fn shape_operator(frame: &DarbouxFrame, normal: &DVector<f64>) -> Result<DMatrix<f64>> {
    shape_matrix(&frame.system, &frame.x, normal, &frame.tangent_basis())
}

/// S_a = S_{e_a} for a = 1..m, split into blocks A (V_− → V_+), B (V_0 → V_+)
/// and C (V_0 → V_−).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeBlocks {
    pub s: Vec<DMatrix<f64>>,
    pub a: Vec<DMatrix<f64>>,
    pub b: Vec<DMatrix<f64>>,
    pub c: Vec<DMatrix<f64>>,
}

impl ShapeBlocks {
    pub fn from_operators(s: Vec<DMatrix<f64>>, n: usize, m: usize) -> Self {
        let a = s.iter().map(|x| x.view((0, n), (n, n)).into_owned()).collect();
        let b = s.iter().map(|x| x.view((0, 2 * n), (n, m)).into_owned()).collect();
        let c = s.iter().map(|x| x.view((n, 2 * n), (n, m)).into_owned()).collect();
        ShapeBlocks { s, a, b, c }
    }

    /// Largest entry of the diagonal blocks, which vanish for shape operators
    /// of the normals e_1..e_m.
    pub fn diagonal_block_residual(&self) -> f64 {
        let n = self.a.first().map(|a| a.nrows()).unwrap_or(0);
        let m = self.b.first().map(|b| b.ncols()).unwrap_or(0);
        self.s
            .iter()
            .map(|s| {
                max_abs(&s.view((0, 0), (n, n)).into_owned())
                    .max(max_abs(&s.view((n, n), (n, n)).into_owned()))
                    .max(max_abs(&s.view((2 * n, 2 * n), (m, m)).into_owned()))
            })
            .fold(0.0, f64::max)
    }
}

pub fn shape_blocks(frame: &DarbouxFrame) -> Result<ShapeBlocks> {
    let basis = frame.tangent_basis();
    let s = (1..=frame.m())
        .map(|a| shape_matrix(&frame.system, &frame.x, &frame.normals[a], &basis))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapeBlocks::from_operators(s, frame.n(), frame.m()))
}

/// Coefficient arrays of the frame at a focal point.
///
/// `f_alpha_pa[(α,p,a)] = F^α_{pa}`, `f_mu_pa[(μ,p,a)] = F^μ_{pa}`,
/// `f_mu_alpha_a[(μ,α,a)] = F^μ_{αa}`, `f_mu_alpha_p[(μ,α,p)] = F^μ_{αp}`,
/// `l[(a,b,c)] = L^a_{bc}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTensors {
    pub m: usize,
    pub n: usize,
    pub f_alpha_pa: Tensor3,
    pub f_mu_pa: Tensor3,
    pub f_mu_alpha_a: Tensor3,
    pub f_mu_alpha_p: Tensor3,
    pub l: Tensor3,
}

/// F^α_{pa} = Q_bQ_a x·e_α and F^μ_{pa} = Q_bQ_a x·e_μ (p ↔ b);
/// F^μ_{αa} and F^μ_{αp} are the e_μ-derivatives of the frame fields
/// e_a = Q_a x and e_p = Q_bQ_0 x paired with e_α, scaled by −½;
/// L^a_{bc} = Q_aQ_bQ_c e_0·x.
pub fn extract_frame_tensors(frame: &DarbouxFrame) -> FrameTensors {
    let sys = &frame.system;
    let (m, n) = (frame.m(), frame.n());
    let q = |i: usize| sys.operator(i);
    // Q_b Q_a x = Q_b e_a.
    let qq: Vec<Vec<DVector<f64>>> =
        (1..=m).map(|b| (1..=m).map(|a| q(b) * &frame.normals[a]).collect()).collect();
    let f_alpha_pa = Tensor3::from_fn([n, m, m], |al, p, a| qq[p][a].dot(&frame.plus[al]));
    let f_mu_pa = Tensor3::from_fn([n, m, m], |mu, p, a| qq[p][a].dot(&frame.minus[mu]));
    let qa_mu: Vec<Vec<DVector<f64>>> =
        (1..=m).map(|a| frame.minus.iter().map(|e| q(a) * e).collect()).collect();
    let f_mu_alpha_a = Tensor3::from_fn([n, n, m], |mu, al, a| -0.5 * qa_mu[a][mu].dot(&frame.plus[al]));
    let q0_mu: Vec<DVector<f64>> = frame.minus.iter().map(|e| q(0) * e).collect();
    let f_mu_alpha_p =
        Tensor3::from_fn([n, n, m], |mu, al, p| -0.5 * (q(p + 1) * &q0_mu[mu]).dot(&frame.plus[al]));
    let qc_e0: Vec<DVector<f64>> = (1..=m).map(|c| q(c) * &frame.normals[0]).collect();
    let l = Tensor3::from_fn([m, m, m], |a, b, c| (q(a + 1) * (q(b + 1) * &qc_e0[c])).dot(&frame.x));
    FrameTensors { m, n, f_alpha_pa, f_mu_pa, f_mu_alpha_a, f_mu_alpha_p, l }
}

/// F^α_{pa}, F^μ_{pa}, F^μ_{αa} read off the shape-operator blocks instead of
/// the closed formulas: A_a = 2F^μ_{αa}, B_a = −F^α_{pa}, C_a = F^μ_{pa}.
pub fn tensors_from_blocks(blocks: &ShapeBlocks) -> (Tensor3, Tensor3, Tensor3) {
    let m = blocks.a.len();
    let n = blocks.a.first().map(|a| a.nrows()).unwrap_or(0);
    let fap = Tensor3::from_fn([n, m, m], |al, p, a| -blocks.b[a][(al, p)]);
    let fmp = Tensor3::from_fn([n, m, m], |mu, p, a| blocks.c[a][(mu, p)]);
    let fma = Tensor3::from_fn([n, n, m], |mu, al, a| 0.5 * blocks.a[a][(al, mu)]);
    (fap, fmp, fma)
}

/// Residuals of the four relations that characterize FKM frame data.
pub fn tensor_relation_residuals(t: &FrameTensors) -> Vec<(FkmCondition, f64)> {
    let (m, n) = (t.m, t.n);
    let mut mixed = 0.0f64;
    for mu in 0..n {
        for al in 0..n {
            for a in 0..m {
                mixed = mixed.max((t.f_mu_alpha_p[(mu, al, a)] - t.f_mu_alpha_a[(mu, al, a)]).abs());
            }
        }
    }
    let mut plus = 0.0f64;
    let mut minus = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            for k in 0..n {
                plus = plus.max((t.f_alpha_pa[(k, a, b)] + t.f_alpha_pa[(k, b, a)]).abs());
                minus = minus.max((t.f_mu_pa[(k, a, b)] + t.f_mu_pa[(k, b, a)]).abs());
            }
        }
    }
    let mut triple = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let v = t.l[(a, b, c)];
                triple = triple
                    .max((v + t.l[(b, a, c)]).abs())
                    .max((v + t.l[(a, c, b)]).abs())
                    .max((v + t.l[(c, b, a)]).abs());
            }
        }
    }
    vec![
        (FkmCondition::MixedSymmetry, mixed),
        (FkmCondition::PlusSkew, plus),
        (FkmCondition::MinusSkew, minus),
        (FkmCondition::TripleSkew, triple),
    ]
}

fn condition_key(c: FkmCondition) -> &'static str {
    match c {
        FkmCondition::MixedSymmetry => "relation_mixed_symmetry",
        FkmCondition::PlusSkew => "relation_plus_skew",
        FkmCondition::MinusSkew => "relation_minus_skew",
        FkmCondition::TripleSkew => "relation_triple_skew",
    }
}

/// Residuals of the six quadratic families satisfied by the frame tensors.
pub fn quadratic_family_residuals(t: &FrameTensors) -> [Vec<f64>; 6] {
    let (m, n) = (t.m, t.n);
    let fap = &t.f_alpha_pa;
    let fmp = &t.f_mu_pa;
    let fma = &t.f_mu_alpha_a;
    let fmq = &t.f_mu_alpha_p;
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut out: [Vec<f64>; 6] = Default::default();

    for p in 0..m {
        for q in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += fap[(k, p, a)] * fap[(k, q, b)] + fap[(k, p, b)] * fap[(k, q, a)];
                        s -= fmp[(k, p, a)] * fmp[(k, q, b)] + fmp[(k, p, b)] * fmp[(k, q, a)];
                    }
                    out[0].push(s);
                }
            }
        }
    }
    for al in 0..n {
        for be in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let mut s = -d(al, be) * d(a, b);
                    for p in 0..m {
                        s += fap[(al, p, a)] * fap[(be, p, b)] + fap[(al, p, b)] * fap[(be, p, a)];
                    }
                    for mu in 0..n {
                        s += 2.0 * (fma[(mu, al, a)] * fma[(mu, be, b)] + fma[(mu, al, b)] * fma[(mu, be, a)]);
                    }
                    out[1].push(s);
                }
            }
            for p in 0..m {
                for q in 0..m {
                    let mut s = -d(p, q) * d(al, be);
                    for a in 0..m {
                        s += fap[(al, p, a)] * fap[(be, q, a)] + fap[(al, q, a)] * fap[(be, p, a)];
                    }
                    for mu in 0..n {
                        s += 2.0 * (fmq[(mu, al, p)] * fmq[(mu, be, q)] + fmq[(mu, al, q)] * fmq[(mu, be, p)]);
                    }
                    out[2].push(s);
                }
            }
        }
    }
    for mu in 0..n {
        for nu in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let mut s = -d(a, b) * d(mu, nu);
                    for p in 0..m {
                        s += fmp[(mu, p, a)] * fmp[(nu, p, b)] + fmp[(mu, p, b)] * fmp[(nu, p, a)];
                    }
                    for al in 0..n {
                        s += 2.0 * (fma[(mu, al, a)] * fma[(nu, al, b)] + fma[(mu, al, b)] * fma[(nu, al, a)]);
                    }
                    out[3].push(s);
                }
            }
            for p in 0..m {
                for q in 0..m {
                    let mut s = -d(p, q) * d(mu, nu);
                    for a in 0..m {
                        s += fmp[(mu, p, a)] * fmp[(nu, q, a)] + fmp[(mu, q, a)] * fmp[(nu, p, a)];
                    }
                    for al in 0..n {
                        s += 2.0 * (fmq[(mu, al, p)] * fmq[(nu, al, q)] + fmq[(mu, al, q)] * fmq[(nu, al, p)]);
                    }
                    out[4].push(s);
                }
            }
            for al in 0..n {
                for be in 0..n {
                    let mut s = 0.0;
                    for a in 0..m {
                        s += fma[(mu, al, a)] * fma[(nu, be, a)] + fma[(mu, be, a)] * fma[(nu, al, a)];
                        s -= fmq[(mu, al, a)] * fmq[(nu, be, a)] + fmq[(mu, be, a)] * fmq[(nu, al, a)];
                    }
                    out[5].push(s);
                }
            }
        }
    }
    out
}

pub const QUADRATIC_FAMILY_NAMES: [&str; 6] = [
    "quadratic_osculating_balance",
    "quadratic_plus_normal",
    "quadratic_plus_osculating",
    "quadratic_minus_normal",
    "quadratic_minus_osculating",
    "quadratic_plus_minus_balance",
];

/// Six quadratic families, the three polynomial identities of the shape
/// operators S_1..S_m, and the four FKM tensor relations.
pub fn verify_focal_identities(tensors: &FrameTensors, blocks: &ShapeBlocks, tol: f64) -> VerificationReport {
    let mut report = VerificationReport::new("focal_identities", tol).with_samples(1);
    for (name, values) in QUADRATIC_FAMILY_NAMES.iter().zip(quadratic_family_residuals(tensors)) {
        report.record(name, &values);
    }
    let s = &blocks.s;
    let m = s.len();
    let cube: Vec<f64> = s.iter().map(|x| max_abs(&(x * x * x - x))).collect();
    report.record("shape_cube", &cube);
    if m >= 2 {
        let mut pair = Vec::new();
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    let (sa, sb) = (&s[a], &s[b]);
                    pair.push(max_abs(&(sa * sa * sb + sa * sb * sa + sb * sa * sa - sb)));
                }
            }
        }
        report.record("shape_pair", &pair);
    } else {
        report.skip("shape_pair");
    }
    if m >= 3 {
        let mut triple = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    let (x, y, z) = (&s[a], &s[b], &s[c]);
                    let sum = x * y * z + x * z * y + y * x * z + y * z * x + z * x * y + z * y * x;
                    triple.push(max_abs(&sum));
                }
            }
        }
        report.record("shape_triple", &triple);
    } else {
        report.skip("shape_triple");
    }
    for (cond, r) in tensor_relation_residuals(tensors) {
        report.record(condition_key(cond), &[r]);
    }
    report
}

/// x-part and y-part coordinates of z in (V_+, V_−).
fn slice_vector(frame: &DarbouxFrame, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut z = DVector::zeros(frame.system.dim());
    for (k, u) in frame.plus.iter().enumerate() {
        z.axpy(x[k], u, 1.0);
    }
    for (k, u) in frame.minus.iter().enumerate() {
        z.axpy(y[k], u, 1.0);
    }
    z
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntipodalCheck {
    pub report: VerificationReport,
    pub barred: DarbouxFrame,
    pub barred_tensors: FrameTensors,
}

pub const DOUBLE_SWAP_TOL: f64 = 1e-12;

/// Checks that x̄ = e_0 lies on M_+, that the swapped frame is a Darboux frame
/// there, and that the barred tensors and forms match the originals with a
/// and a+m exchanged.
pub fn antipodal_swap_check(frame: &DarbouxFrame, tol: f64, seed: u64) -> Result<AntipodalCheck> {
    let sys = &frame.system;
    let (m, n) = (frame.m(), frame.n());
    let mut report = VerificationReport::new("antipodal_swap", tol).with_seed(seed);
    report.record("e0_on_manifold", &[manifold_residual(sys, &frame.normals[0])]);

    let barred = frame.antipodal();
    let valid = barred.validate(tol);
    report.absorb("barred_frame", &valid);

    let tensors = extract_frame_tensors(frame);
    let barred_tensors = extract_frame_tensors(&barred);
    let barred_blocks = shape_blocks(&barred)?;
    let (_, _, barred_fma_shape) = tensors_from_blocks(&barred_blocks);
    let mut swap = Vec::new();
    for mu in 0..n {
        for al in 0..n {
            for a in 0..m {
                swap.push(barred_fma_shape[(mu, al, a)] - tensors.f_mu_alpha_p[(mu, al, a)]);
                swap.push(barred_tensors.f_mu_alpha_p[(mu, al, a)] - tensors.f_mu_alpha_a[(mu, al, a)]);
            }
        }
    }
    report.record("barred_mixed_tensor", &swap);

    // Forms on V_+ ⊕ V_−: p̄_a(v) against p_{a+m}(v), and p̄_0 against p_0.
    let basis = frame.tangent_basis();
    let s0 = shape_matrix(sys, &frame.x, &frame.normals[0], &basis)?;
    let sbar0 = shape_matrix(sys, &barred.x, &barred.normals[0], &basis)?;
    let samples = 20;
    let mut forms_a = Vec::new();
    let mut forms_0 = Vec::new();
    for i in 0..samples {
        let mut rng = sample_rng(seed, STREAM_SWAP, i as u64);
        let x = gaussian_vector(&mut rng, n);
        let y = gaussian_vector(&mut rng, n);
        for a in 0..m {
            let mut pbar = 0.0;
            let mut pam = 0.0;
            for al in 0..n {
                for mu in 0..n {
                    pbar += barred_fma_shape[(mu, al, a)] * x[al] * y[mu];
                    pam += tensors.f_mu_alpha_p[(mu, al, a)] * x[al] * y[mu];
                }
            }
            forms_a.push(pbar - pam);
        }
        let mut v = DVector::zeros(2 * n + m);
        v.rows_mut(0, n).copy_from(&x);
        v.rows_mut(n, n).copy_from(&y);
        forms_0.push((&s0 * &v).dot(&v) - (&sbar0 * &v).dot(&v));
    }
    report.record("barred_forms", &forms_a);
    report.record("barred_signature_form", &forms_0);
    report.samples = samples;

    let double = barred.antipodal();
    let vector_diff = double
        .all_vectors()
        .iter()
        .zip(frame.all_vectors())
        .map(|(a, b)| (a - b).amax())
        .fold(0.0, f64::max);
    let double_tensors = extract_frame_tensors(&double);
    let tensor_diff = [
        double_tensors.f_alpha_pa.max_abs_diff(&tensors.f_alpha_pa),
        double_tensors.f_mu_pa.max_abs_diff(&tensors.f_mu_pa),
        double_tensors.f_mu_alpha_a.max_abs_diff(&tensors.f_mu_alpha_a),
        double_tensors.f_mu_alpha_p.max_abs_diff(&tensors.f_mu_alpha_p),
        double_tensors.l.max_abs_diff(&tensors.l),
    ];
    let double_tol = tol.min(DOUBLE_SWAP_TOL);
    report.record_with_tol("double_swap_frame", &[vector_diff], double_tol);
    report.record_with_tol("double_swap_tensors", &tensor_diff, double_tol);
    Ok(AntipodalCheck { report, barred, barred_tensors })
}

/// On V_+ ⊕ V_−: F(z) = |z|⁴ − 2Σ_i p̌_i(z)² with p̌_i(z) = S_{e_i}z·z, and
/// F = 1 on the unit points where every p̌_i vanishes.
pub fn verify_slice_formula(frame: &DarbouxFrame, samples: usize, seed: u64, tol: f64) -> Result<VerificationReport> {
    let sys = &frame.system;
    let field = CartanMunznerField::new(sys);
    let (m, n) = (frame.m(), frame.n());
    let basis = frame.tangent_basis();
    let slices: Vec<DMatrix<f64>> = frame
        .normals
        .iter()
        .map(|e| shape_matrix(sys, &frame.x, e, &basis).map(|s| s.view((0, 0), (2 * n, 2 * n)).into_owned()))
        .collect::<Result<_>>()?;
    let forms = |c: &DVector<f64>| -> Vec<f64> { slices.iter().map(|s| (s * c).dot(c)).collect() };

    let mut generic = Vec::with_capacity(samples);
    let mut kernel_value = Vec::new();
    let mut kernel_forms = Vec::new();
    let mut kernel_radius = Vec::new();
    let mut kernel_missing = 0usize;
    for i in 0..samples {
        let mut rng = sample_rng(seed, STREAM_SLICE, i as u64);
        let c = unit_vector(&mut rng, 2 * n);
        let z = slice_vector(frame, &c.rows(0, n).into_owned(), &c.rows(n, n).into_owned());
        let p: Vec<f64> = forms(&c);
        let r2 = z.norm_squared();
        let predicted = r2 * r2 - 2.0 * p.iter().map(|v| v * v).sum::<f64>();
        generic.push(field.value(&z)? - predicted);

        // Unit points of the slice on which every p̌_i vanishes: x on V_+
        // with |x| = |y| = 1/√2 and y orthogonal to every A_aᵀx.
        let x = unit_vector(&mut rng, n) * std::f64::consts::FRAC_1_SQRT_2;
        let rows = DMatrix::from_fn(m, n, |a, mu| {
            (0..n).map(|al| slices[a + 1][(al, n + mu)] * x[al]).sum::<f64>()
        });
        let kernel = null_space(&rows, Some(1e-10));
        if kernel.ncols() == 0 {
            kernel_missing += 1;
            continue;
        }
        let w = gaussian_vector(&mut rng, kernel.ncols());
        let y = &kernel * w;
        let y = &y * (std::f64::consts::FRAC_1_SQRT_2 / y.norm());
        let z = slice_vector(frame, &x, &y);
        let mut cz = DVector::zeros(2 * n);
        cz.rows_mut(0, n).copy_from(&x);
        cz.rows_mut(n, n).copy_from(&y);
        kernel_forms.extend(forms(&cz));
        kernel_value.push(field.value(&z)? - 1.0);
        let xpart: f64 = frame.plus.iter().map(|u| u.dot(&z).powi(2)).sum::<f64>().sqrt();
        let ypart: f64 = frame.minus.iter().map(|u| u.dot(&z).powi(2)).sum::<f64>().sqrt();
        kernel_radius.push(xpart - std::f64::consts::FRAC_1_SQRT_2);
        kernel_radius.push(ypart - std::f64::consts::FRAC_1_SQRT_2);
    }
    let mut report = VerificationReport::new("slice_formula", tol).with_samples(samples).with_seed(seed);
    report.record("slice_identity", &generic);
    if kernel_value.is_empty() {
        report.skip("slice_kernel_value");
    } else {
        report.record("slice_kernel_forms", &kernel_forms);
        report.record("slice_kernel_value", &kernel_value);
        report.record("slice_kernel_radius", &kernel_radius);
    }
    report.note("kernel_points", (samples - kernel_missing) as u64);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalSpectrum {
    /// Eigenvalue counts near +1, 0 and −1.
    pub counts: [usize; 3],
    /// Largest distance of an eigenvalue from its cluster value.
    pub max_deviation: f64,
}

/// Spectrum of S_ν split at ±½ into the clusters {1, 0, −1}.
pub fn focal_spectrum(frame: &DarbouxFrame, normal: &DVector<f64>) -> Result<FocalSpectrum> {
    let s = shape_operator(frame, normal)?;
    let sym = (&s + s.transpose()) * 0.5;
    let mut counts = [0usize; 3];
    let mut max_deviation = 0.0f64;
    for &e in crate::linalg::symmetric_eigenvalues(&sym).iter() {
        let (slot, target) = if e > 0.5 {
            (0, 1.0)
        } else if e < -0.5 {
            (2, -1.0)
        } else {
            (1, 0.0)
        };
        counts[slot] += 1;
        max_deviation = max_deviation.max((e - target).abs());
    }
    Ok(FocalSpectrum { counts, max_deviation })
}
