//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Default numerical-rank cutoff: (max dim)·ε·σ_max.
pub fn rank_threshold(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

pub fn numerical_rank(singular_values: &[f64], threshold: f64) -> usize {
    singular_values.iter().filter(|&&s| s > threshold).count()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank with the default threshold, or `threshold` when given.
pub fn rank(m: &DMatrix<f64>, threshold: Option<f64>) -> (usize, f64) {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let thr = threshold.unwrap_or_else(|| rank_threshold(m.nrows(), m.ncols(), smax));
    (numerical_rank(&s, thr), thr)
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &DMatrix<f64>, threshold: Option<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max();
    let thr = threshold.unwrap_or_else(|| rank_threshold(m.nrows(), n, smax));
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= thr)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Modified Gram–Schmidt of `candidates` against `fixed` (assumed orthonormal)
/// and each other, with one re-orthogonalization pass. Vectors whose norm
/// after projection falls below `drop_tol` are discarded.
pub fn orthonormalize_against(
    candidates: &[DVector<f64>],
    fixed: &[DVector<f64>],
    drop_tol: f64,
) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for c in candidates {
        let mut v = c.clone();
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        for _pass in 0..2 {
            for f in fixed.iter().chain(out.iter()) {
                let d = f.dot(&v);
                v.axpy(-d, f, 1.0);
            }
        }
        let n = v.norm();
        if n > drop_tol * scale {
            out.push(v / n);
        }
    }
    out
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: f64,
    pub count: usize,
    pub spread: f64,
}

/// Groups ascending `values`, starting a new cluster whenever the gap to the
/// previous value exceeds `gap`. Also returns the smallest gap that split
/// clusters (infinite when there is a single cluster).
pub fn cluster_sorted(values: &[f64], gap: f64) -> (Vec<Cluster>, f64) {
    let mut clusters = Vec::new();
    let mut min_split = f64::INFINITY;
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || (values[i] - values[i - 1]) > gap;
        if split {
            if i < values.len() {
                min_split = min_split.min(values[i] - values[i - 1]);
            }
            let part = &values[start..i];
            if !part.is_empty() {
                let center = part.iter().sum::<f64>() / part.len() as f64;
                let spread = part[part.len() - 1] - part[0];
                clusters.push(Cluster { center, count: part.len(), spread });
            }
            start = i;
        }
    }
    (clusters, min_split)
}

/// Orthonormal basis columns of the span of the given columns (Frobenius-sense
/// when applied to vectorized matrices).
pub fn orthonormal_columns(vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    orthonormalize_against(vectors, &[], 1e-10)
}
