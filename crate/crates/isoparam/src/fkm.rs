//! The Cartan–Münzner polynomial F(x) = |x|⁴ − 2Σ⟨P_i x, x⟩² of a Clifford
//! system, Münzner's PDEs, and the geometry of the tubes around M_+.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordSystem;
use crate::error::{Error, Result};
use crate::focal::project_to_mplus;
use crate::linalg::{cluster_sorted, orthonormalize_against, symmetric_eigenvalues};
use crate::par::map_indices;
use crate::report::VerificationReport;
use crate::rng::{sample_rng, unit_vector};

const STREAM_PDE: u64 = 0x70de;
const STREAM_TUBE_BASE: u64 = 0x7b0b;
const STREAM_TUBE_NORMAL: u64 = 0x7b0c;

/// F for a system, optionally with reversed orientation (−F).
#[derive(Debug, Clone, Copy)]
pub struct CartanMunznerField<'a> {
    system: &'a CliffordSystem,
    sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldEval {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub laplacian: f64,
}

impl<'a> CartanMunznerField<'a> {
    pub fn new(system: &'a CliffordSystem) -> Self {
        CartanMunznerField { system, sign: 1.0 }
    }

    pub fn negated(self) -> Self {
        CartanMunznerField { system: self.system, sign: -self.sign }
    }

    pub fn system(&self) -> &'a CliffordSystem {
        self.system
    }

    pub fn is_negated(&self) -> bool {
        self.sign < 0.0
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.system.dim() {
            return Err(Error::DimensionMismatch { expected: self.system.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        let r2 = x.norm_squared();
        let s: f64 = self.system.operators().iter().map(|p| (p * x).dot(x).powi(2)).sum();
        Ok(self.sign * (r2 * r2 - 2.0 * s))
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        let mut g = x * (4.0 * x.norm_squared());
        for p in self.system.operators() {
            let y = p * x;
            let s = y.dot(x);
            g.axpy(-8.0 * s, &y, 1.0);
        }
        Ok(g * self.sign)
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<FieldEval> {
        self.check_dim(x)?;
        let n = x.len();
        let r2 = x.norm_squared();
        let mut value = r2 * r2;
        let mut gradient = x * (4.0 * r2);
        let mut hessian = DMatrix::<f64>::identity(n, n) * (4.0 * r2) + (x * x.transpose()) * 8.0;
        for p in self.system.operators() {
            let y = p * x;
            let s = y.dot(x);
            value -= 2.0 * s * s;
            gradient.axpy(-8.0 * s, &y, 1.0);
            hessian -= (&y * y.transpose()) * 16.0 + p * (8.0 * s);
        }
        value *= self.sign;
        gradient *= self.sign;
        hessian *= self.sign;
        let laplacian = hessian.trace();
        Ok(FieldEval { value, gradient, hessian, laplacian })
    }
}

/// Checks |∇F|² = 16|x|⁶ and ΔF = 8(m2 − m1)|x|² with m1 = m, m2 = l − m − 1.
/// Residuals are divided by 1 + |x|⁶.
pub fn verify_munzner_pdes(
    field: &CartanMunznerField,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    let sys = field.system();
    let m1 = sys.m() as i64;
    let m2 = sys.complementary_multiplicity();
    if m2 < 1 {
        return Err(Error::InvalidMultiplicities { m1, m2 });
    }
    let c = 8.0 * (m2 - m1) as f64;
    let rows = map_indices(samples, |i| {
        let mut rng = sample_rng(seed, STREAM_PDE, i as u64);
        let radius = 0.5 + 1.5 * rand::Rng::random::<f64>(&mut rng);
        let x = unit_vector(&mut rng, sys.dim()) * radius;
        let e = field.eval(&x).expect("dimension checked");
        let r2 = x.norm_squared();
        let scale = 1.0 + r2 * r2 * r2;
        let grad = (e.gradient.norm_squared() - 16.0 * r2 * r2 * r2) / scale;
        let plus = (e.laplacian - c * r2) / scale;
        let minus = (e.laplacian + c * r2) / scale;
        (grad, plus, minus)
    });
    let grad: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let plus: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let minus: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let mut report = VerificationReport::new("munzner_pdes", tol).with_samples(samples).with_seed(seed);
    report.record("gradient_norm", &grad);
    let max = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let flipped = !(max(&plus) <= tol) && max(&minus) <= tol;
    report.record("laplacian", if flipped { &minus } else { &plus });
    report.note("orientation_flip", flipped);
    report.note("m1", m1);
    report.note("m2", m2);
    Ok(report)
}

/// A point cos t·x + sin t·e_0 on the tube of radius t about M_+.
#[derive(Debug, Clone, PartialEq)]
pub struct TubePoint {
    pub base: DVector<f64>,
    pub normal: DVector<f64>,
    pub t: f64,
    pub point: DVector<f64>,
}

impl TubePoint {
    pub fn new(base: DVector<f64>, normal: DVector<f64>, t: f64) -> Result<Self> {
        if base.len() != normal.len() {
            return Err(Error::DimensionMismatch { expected: base.len(), got: normal.len() });
        }
        let residual = (normal.norm() - 1.0).abs();
        if residual > 1e-10 {
            return Err(Error::NotUnitNormal { residual });
        }
        let point = &base * t.cos() + &normal * t.sin();
        Ok(TubePoint { base, normal, t, point })
    }

    /// Unit tangent of the normal geodesic at the tube point.
    pub fn geodesic_direction(&self) -> DVector<f64> {
        &self.base * (-self.t.sin()) + &self.normal * self.t.cos()
    }
}

/// Σ c_i P_i x for a unit coefficient vector c.
pub fn normal_from_coefficients(sys: &CliffordSystem, x: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
    let mut n = DVector::zeros(x.len());
    for (p, &ci) in sys.operators().iter().zip(c.iter()) {
        n += (p * x) * ci;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeConstancy {
    pub mean: f64,
    pub spread: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

/// Evaluates F over `bases` random focal points and `normals` random unit
/// normals at each, at radius t.
pub fn tube_constancy(
    field: &CartanMunznerField,
    bases: usize,
    normals: usize,
    t: f64,
    seed: u64,
) -> Result<TubeConstancy> {
    if !(t > -std::f64::consts::PI && t < std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!("tube radius {t} outside (-pi, pi)")));
    }
    let sys = field.system();
    let per_base = map_indices(bases, |i| -> Result<Vec<f64>> {
        let mut rng = sample_rng(seed, STREAM_TUBE_BASE, i as u64);
        let x0 = unit_vector(&mut rng, sys.dim());
        let x = project_to_mplus(sys, &x0, 1e-13, 50)?.point;
        (0..normals)
            .map(|j| {
                let mut rng = sample_rng(seed, STREAM_TUBE_NORMAL, (i * normals + j) as u64);
                let c = unit_vector(&mut rng, sys.m() + 1);
                let e0 = normal_from_coefficients(sys, &x, &c);
                let tube = TubePoint::new(x.clone(), e0, t)?;
                field.value(&tube.point)
            })
            .collect()
    });
    let mut values = Vec::with_capacity(bases * normals);
    for v in per_base {
        values.extend(v?);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    Ok(TubeConstancy { mean, spread: max - min, min, max, samples: values.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureMatch {
    /// s in cot(s − t).
    pub angle: f64,
    pub expected: f64,
    pub found: f64,
    pub expected_multiplicity: usize,
    pub found_multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSpectrum {
    pub t: f64,
    /// (curvature, multiplicity), descending.
    pub clusters: Vec<(f64, usize)>,
    /// Matches in the order s = 0, π/2, π/4, 3π/4 (multiplicities m, m, N, N).
    pub matches: Vec<CurvatureMatch>,
    pub max_deviation: f64,
    /// max |θ_i − θ_1 − (i−1)π/4| over θ = arccot(k) ∈ (0, π), sorted.
    pub angle_spacing_residual: f64,
    /// Relative residual of the cross relations among the four curvatures.
    pub relation_residual: f64,
    pub multiplicities_match: bool,
    pub pass: bool,
}

/// Relative gap used to split eigenvalue clusters.
pub const DEFAULT_CLUSTER_GAP: f64 = 1e-6;

pub fn level_shape_spectrum(field: &CartanMunznerField, tube: &TubePoint, tol: f64) -> Result<TubeSpectrum> {
    level_shape_spectrum_with_gap(field, tube, tol, DEFAULT_CLUSTER_GAP)
}

/// Principal curvatures of the level hypersurface of F through the tube
/// point, oriented by the outward geodesic direction.
pub fn level_shape_spectrum_with_gap(
    field: &CartanMunznerField,
    tube: &TubePoint,
    tol: f64,
    cluster_gap: f64,
) -> Result<TubeSpectrum> {
    let t = tube.t;
    let r = t / FRAC_PI_4;
    if (r - r.round()).abs() < 1e-9 {
        return Err(Error::FocalRadius { t });
    }
    let sys = field.system();
    let n = sys.dim();
    let y = &tube.point;
    let e = field.eval(y)?;
    let radial = e.gradient.dot(y);
    let g = &e.gradient - y * radial;
    let gnorm = g.norm();
    let dir = tube.geodesic_direction();
    let orient = if g.dot(&dir) >= 0.0 { 1.0 } else { -1.0 };
    let normal = &g * (orient / gnorm);

    let standard: Vec<DVector<f64>> = (0..n).map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    let tangent = orthonormalize_against(&standard, &[y.clone(), normal.clone()], 1e-8);
    if tangent.len() != n - 2 {
        return Err(Error::EigsplitDefect(format!("tangent space has dimension {} != {}", tangent.len(), n - 2)));
    }
    let w = DMatrix::from_columns(&tangent);
    let inner = &e.hessian - DMatrix::<f64>::identity(n, n) * radial;
    let mut shape = w.transpose() * inner * &w * (-orient / gnorm);
    shape = (&shape + shape.transpose()) * 0.5;
    let eig = symmetric_eigenvalues(&shape);
    let scale = eig.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let (clusters, min_split) = cluster_sorted(&eig, cluster_gap * scale);
    if clusters.len() != 4 {
        return Err(Error::ClusterAmbiguity(format!("expected 4 curvature clusters, found {}", clusters.len())));
    }
    if min_split < 10.0 * tol {
        return Err(Error::ClusterAmbiguity(format!("cluster gap {min_split:.3e} below 10*tol")));
    }

    let m = sys.m();
    let big_n = sys.complementary_multiplicity().max(0) as usize;
    let expected = [(0.0, m), (FRAC_PI_2, m), (FRAC_PI_4, big_n), (3.0 * FRAC_PI_4, big_n)];
    let cot = |a: f64| a.cos() / a.sin();
    let mut matches = Vec::new();
    let mut max_deviation = 0.0f64;
    let mut multiplicities_match = true;
    for &(s, mult) in &expected {
        let k = cot(s - t);
        let c = clusters
            .iter()
            .min_by(|a, b| (a.center - k).abs().total_cmp(&(b.center - k).abs()))
            .expect("four clusters");
        let dev = (c.center - k).abs() / (1.0 + k.abs());
        max_deviation = max_deviation.max(dev).max(c.spread / (1.0 + k.abs()));
        multiplicities_match &= c.count == mult;
        matches.push(CurvatureMatch {
            angle: s,
            expected: k,
            found: c.center,
            expected_multiplicity: mult,
            found_multiplicity: c.count,
        });
    }

    let mut thetas: Vec<(f64, f64)> = clusters.iter().map(|c| (1.0f64.atan2(c.center), c.center)).collect();
    thetas.sort_by(|a, b| a.0.total_cmp(&b.0));
    let angle_spacing_residual = thetas
        .iter()
        .enumerate()
        .map(|(i, (th, _))| (th - thetas[0].0 - i as f64 * FRAC_PI_4).abs())
        .fold(0.0f64, f64::max);
    let k1 = thetas[0].1;
    let predicted = [(k1 - 1.0) / (k1 + 1.0), -1.0 / k1, (1.0 + k1) / (1.0 - k1)];
    let relation_residual = predicted
        .iter()
        .zip(&thetas[1..])
        .map(|(p, (_, k))| (p - k).abs() / (1.0 + k.abs()))
        .fold(0.0f64, f64::max);

    let mut listed: Vec<(f64, usize)> = clusters.iter().map(|c| (c.center, c.count)).collect();
    listed.sort_by(|a, b| b.0.total_cmp(&a.0));
    let pass = multiplicities_match && max_deviation <= tol && relation_residual <= tol;
    Ok(TubeSpectrum {
        t,
        clusters: listed,
        matches,
        max_deviation,
        angle_spacing_residual,
        relation_residual,
        multiplicities_match,
        pass,
    })
}
