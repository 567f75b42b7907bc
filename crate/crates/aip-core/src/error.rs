//! Error type shared by all modules.

use crate::linalg::C64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum AipError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("map is not isometric (deviation {deviation:e})")]
    NotIsometric { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("operator is not contractive (norm {norm})")]
    NotContractive { norm: f64 },

    #[error("generator map is ill defined (least-squares residual {residual:e})")]
    IllDefined { residual: f64 },

    #[error("singular resolvent at z = {z}{}", match .eigenvalue {
        Some(ev) => format!(" (state eigenvalue {ev})"),
        None => String::new(),
    })]
    SingularResolvent { z: C64, eigenvalue: Option<C64> },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("non-finite entry in input matrix")]
    NonFinite,

    #[error("invalid problem data: {0}")]
    InvalidData(String),

    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,
}

pub type Result<T> = std::result::Result<T, AipError>;
