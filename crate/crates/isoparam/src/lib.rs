//! Isoparametric hypersurfaces of FKM type.
//!
//! Builds Clifford systems with exact integer generators, the associated
//! Cartan–Münzner polynomial, focal frames on M_+, the frame tensors and the
//! bilinear forms they define, and reassembles Clifford operators from frame
//! data. Every construction comes with a residual report.

pub mod clifford;
pub mod error;
pub mod fkm;
pub mod focal;
pub mod linalg;
pub mod par;
pub mod quadforms;
pub mod reconstruct;
pub mod report;
pub mod rng;
pub mod tensor;

pub use clifford::{
    build_generators, enumerate_fkm_pairs, fkm_pair, fkm_system, fkm_system_on,
    minimal_module_dimension, rotate_system, system_from_generators, verify_clifford_system,
    CliffordGenerators, CliffordSystem, MultiplicityPair,
};
pub use error::{Error, FkmCondition, Result};
pub use report::VerificationReport;
