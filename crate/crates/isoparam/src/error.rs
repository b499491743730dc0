use thiserror::Error;

/// Conditions a set of frame tensors must meet before operators can be assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FkmCondition {
    /// F^μ_{α,a+m} = F^μ_{αa}.
    MixedSymmetry,
    /// F^α_{a+m,b} = −F^α_{b+m,a}.
    PlusSkew,
    /// F^μ_{a+m,b} = −F^μ_{b+m,a}.
    MinusSkew,
    /// L^a_{bc} totally skew.
    TripleSkew,
}

impl std::fmt::Display for FkmCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            FkmCondition::MixedSymmetry => "mixed-symmetry F^mu_{alpha,a+m} = F^mu_{alpha a}",
            FkmCondition::PlusSkew => "plus-skew F^alpha_{a+m,b} = -F^alpha_{b+m,a}",
            FkmCondition::MinusSkew => "minus-skew F^mu_{a+m,b} = -F^mu_{b+m,a}",
            FkmCondition::TripleSkew => "triple-skew L^a_{bc}",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("module dimension {l} is not a positive multiple of {minimal} for {q} generators")]
    DimensionNotAdmissible { q: usize, l: usize, minimal: u64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not special orthogonal (orthogonality residual {orth:.3e}, det {det:.6})")]
    NotSpecialOrthogonal { orth: f64, det: f64 },
    #[error("invalid multiplicities: m1 = {m1}, m2 = {m2}")]
    InvalidMultiplicities { m1: i64, m2: i64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Newton projection did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian: rank {rank} < {needed}")]
    SingularJacobian { rank: usize, needed: usize },
    #[error("point is off the focal manifold (residual {residual:.3e})")]
    OffManifold { residual: f64 },
    #[error("eigenspace split defect: {0}")]
    EigsplitDefect(String),
    #[error("vector is not a unit normal (residual {residual:.3e})")]
    NotUnitNormal { residual: f64 },
    #[error("radius {t} is focal (multiple of pi/4)")]
    FocalRadius { t: f64 },
    #[error("cluster ambiguity: {0}")]
    ClusterAmbiguity(String),
    #[error("incompatible B and C blocks: |BtB - CtC| = {residual:.3e}")]
    IncompatibleBC { residual: f64 },
    #[error("frame conditions violated: {}", list_violations(.0))]
    ConditionViolated(Vec<(FkmCondition, f64)>),
    #[error("parse error at byte {offset} (line {line}, column {column}): {message}")]
    Parse { offset: usize, line: usize, column: usize, message: String },
}

fn list_violations(v: &[(FkmCondition, f64)]) -> String {
    v.iter()
        .map(|(c, r)| format!("{c} (residual {r:.3e})"))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
