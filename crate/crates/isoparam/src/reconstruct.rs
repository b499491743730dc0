//! Reassembly of Clifford operators Q_0..Q_m from a Darboux frame and its
//! tensors, and comparison with a source system.
//!
//! Each operator is Σ_k (Q f_k) f_kᵀ over the frame vectors f_k, with Q f_k
//! expanded in the frame through the tensor coefficients.

use nalgebra::{DMatrix, DVector};

use crate::clifford::{clifford_residuals, CliffordSystem};
use crate::error::{Error, Result};
use crate::focal::{tensor_relation_residuals, DarbouxFrame, FrameTensors};
use crate::report::VerificationReport;

/// Tolerance for the frame conditions checked before assembly.
pub const CONDITION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedOperators {
    pub operators: Vec<DMatrix<f64>>,
    /// Largest asymmetry entry over all operators.
    pub symmetry_residual: f64,
}

impl ReconstructedOperators {
    pub fn to_system(&self) -> Result<CliffordSystem> {
        CliffordSystem::new(self.operators.clone(), false)
    }
}

fn outer_sum(pairs: &[(DVector<f64>, &DVector<f64>)], n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(n, n);
    for (image, f) in pairs {
        q += image * f.transpose();
    }
    q
}

pub fn build_q_operators(frame: &DarbouxFrame, tensors: &FrameTensors) -> Result<ReconstructedOperators> {
    build_q_operators_with_tol(frame, tensors, CONDITION_TOL)
}

pub fn build_q_operators_with_tol(
    frame: &DarbouxFrame,
    t: &FrameTensors,
    tol: f64,
) -> Result<ReconstructedOperators> {
    let (m, nn) = (frame.m(), frame.n());
    if t.m != m || t.n != nn {
        return Err(Error::ShapeMismatch(format!(
            "tensors are for (m, N) = ({}, {}), frame has ({m}, {nn})",
            t.m, t.n
        )));
    }
    let violated: Vec<_> = tensor_relation_residuals(t).into_iter().filter(|(_, r)| !(*r <= tol)).collect();
    if !violated.is_empty() {
        return Err(Error::ConditionViolated(violated));
    }
    let dim = frame.x.len();
    let x = &frame.x;
    let e0 = &frame.normals[0];
    let ea = &frame.normals[1..];
    let ep = &frame.osculating;
    let plus = &frame.plus;
    let minus = &frame.minus;

    let mut ops = Vec::with_capacity(m + 1);
    let mut q0 = vec![(e0.clone(), x), (x.clone(), e0)];
    for a in 0..m {
        q0.push((-&ep[a], &ea[a]));
        q0.push((-&ea[a], &ep[a]));
    }
    for u in plus {
        q0.push((-u, u));
    }
    for u in minus {
        q0.push((u.clone(), u));
    }
    ops.push(outer_sum(&q0, dim));

    let fap = &t.f_alpha_pa;
    let fmp = &t.f_mu_pa;
    let fma = &t.f_mu_alpha_a;
    let l = &t.l;
    for a in 0..m {
        let mut pairs = vec![(ea[a].clone(), x), (ep[a].clone(), e0)];
        for b in 0..m {
            // Q_a e_b = δ_ab x − L^c_{ab} e_{c+m} + F^α_{a+m,b} e_α + F^μ_{a+m,b} e_μ.
            let mut v = DVector::zeros(dim);
            if a == b {
                v += x;
            }
            for c in 0..m {
                v.axpy(-l[(c, a, b)], &ep[c], 1.0);
            }
            for k in 0..nn {
                v.axpy(fap[(k, a, b)], &plus[k], 1.0);
                v.axpy(fmp[(k, a, b)], &minus[k], 1.0);
            }
            pairs.push((v, &ea[b]));
            // Q_a e_{b+m} = δ_ab e_0 + L^c_{ab} e_c + F^α_{b+m,a} e_α − F^μ_{b+m,a} e_μ.
            let mut v = DVector::zeros(dim);
            if a == b {
                v += e0;
            }
            for c in 0..m {
                v.axpy(l[(c, a, b)], &ea[c], 1.0);
            }
            for k in 0..nn {
                v.axpy(fap[(k, b, a)], &plus[k], 1.0);
                v.axpy(-fmp[(k, b, a)], &minus[k], 1.0);
            }
            pairs.push((v, &ep[b]));
        }
        for al in 0..nn {
            // Q_a e_α = F^α_{a+m,b} e_b + F^α_{b+m,a} e_{b+m} − 2F^μ_{αa} e_μ.
            let mut v = DVector::zeros(dim);
            for b in 0..m {
                v.axpy(fap[(al, a, b)], &ea[b], 1.0);
                v.axpy(fap[(al, b, a)], &ep[b], 1.0);
            }
            for mu in 0..nn {
                v.axpy(-2.0 * fma[(mu, al, a)], &minus[mu], 1.0);
            }
            pairs.push((v, &plus[al]));
        }
        for mu in 0..nn {
            // Q_a e_μ = F^μ_{a+m,b} e_b − F^μ_{b+m,a} e_{b+m} − 2F^μ_{αa} e_α.
            let mut v = DVector::zeros(dim);
            for b in 0..m {
                v.axpy(fmp[(mu, a, b)], &ea[b], 1.0);
                v.axpy(-fmp[(mu, b, a)], &ep[b], 1.0);
            }
            for al in 0..nn {
                v.axpy(-2.0 * fma[(mu, al, a)], &plus[al], 1.0);
            }
            pairs.push((v, &minus[mu]));
        }
        ops.push(outer_sum(&pairs, dim));
    }
    let symmetry_residual = ops.iter().map(|q| crate::linalg::max_abs(&(q - q.transpose()))).fold(0.0, f64::max);
    Ok(ReconstructedOperators { operators: ops, symmetry_residual })
}

/// Orthonormal basis (Frobenius inner product) of span{P_i}, as flattened vectors.
fn span_basis(ops: &[DMatrix<f64>]) -> Vec<DVector<f64>> {
    let flat: Vec<DVector<f64>> = ops.iter().map(|p| DVector::from_column_slice(p.as_slice())).collect();
    crate::linalg::orthonormalize_against(&flat, &[], 1e-10)
}

/// ‖Π_U − Π_V‖_F for orthogonal projections onto the spans of two operator
/// families inside the symmetric matrices, computed as
/// (‖(I − Π_V)Π_U‖² + ‖(I − Π_U)Π_V‖²)^½ to avoid cancellation.
pub fn span_distance(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    let u = span_basis(a);
    let v = span_basis(b);
    let leftover = |from: &[DVector<f64>], onto: &[DVector<f64>]| -> f64 {
        from.iter()
            .map(|x| {
                let mut r = x.clone();
                for _pass in 0..2 {
                    for y in onto {
                        let d = y.dot(&r);
                        r.axpy(-d, y, 1.0);
                    }
                }
                r.norm_squared()
            })
            .sum()
    };
    (leftover(&u, &v) + leftover(&v, &u)).sqrt()
}

pub fn verify_reconstruction(
    recon: &ReconstructedOperators,
    original: &CliffordSystem,
    tol: f64,
) -> Result<VerificationReport> {
    let sys = recon.to_system()?;
    if sys.dim() != original.dim() {
        return Err(Error::ShapeMismatch(format!(
            "reconstructed side {} differs from source side {}",
            sys.dim(),
            original.dim()
        )));
    }
    let (sym, orth, anti) = clifford_residuals(&sys);
    let mut report = VerificationReport::new("reconstruction", tol).with_samples(1);
    report.record("symmetry", &[sym]);
    report.record("orthogonality", &[orth]);
    report.record("anticommutation", &[anti]);
    report.record("span_distance", &[span_distance(sys.operators(), original.operators())]);
    Ok(report)
}
