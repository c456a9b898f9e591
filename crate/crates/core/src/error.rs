use num_complex::Complex64;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("the symbol is singular at z = 0")]
    ZeroArgument,
    #[error("degenerate quadratic (prod b = {prod_b}, prod c = {prod_c}); this regime is not supported")]
    DegenerateQuadratic { prod_b: Complex64, prod_c: Complex64 },
    #[error("lambda lies on the radius-{radius} determinant curve (root modulus {modulus})")]
    OnBoundary { radius: f64, modulus: f64 },
    #[error("argument unwrap still jumps by more than pi/2 with {samples} samples; more samples are needed")]
    UnwrapFailure { samples: usize },
    #[error("coefficient b vanishes at row {row}; forward substitution impossible")]
    VanishingCoefficient { row: usize },
    #[error("construction needs winding -1 or +1 at radius 1, got {winding}")]
    WrongWinding { winding: i32 },
    #[error("Jordan-chain system is inconsistent (residual {residual:e}, allowed {allowed:e})")]
    InconsistentSystem { residual: f64, allowed: f64 },
    #[error("vector is zero")]
    ZeroVector,
    #[error("rebuilt matrix differs from the source by {max_error:e} at ({row}, {col})")]
    RebuildMismatch { max_error: f64, row: usize, col: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
