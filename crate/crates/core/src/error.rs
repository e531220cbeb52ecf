use thiserror::Error;

pub type Result<T, E = MiwError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MiwError {
    #[error("order {0} outside the supported range 0..=20")]
    OrderOutOfRange(usize),
    #[error("evaluation at the root {0} of the density")]
    Pole(f64),
    #[error("quadrature on [{a}, {b}] stopped at estimated error {error:e}")]
    Quadrature { a: f64, b: f64, error: f64 },
    #[error("polynomial degree {0} is below 2")]
    DegreeTooLow(usize),
    #[error("odd part of the polynomial admits no solution q (mismatch {0:e})")]
    NotRepresentable(f64),
    #[error("invalid start x1 = {x1}: {reason}")]
    InvalidStart { x1: f64, reason: &'static str },
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("N = {0} is too small to give every region a point")]
    TooFewPoints(usize),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("configuration is not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("collision between worlds {index} and {} at t = {time}", index + 1)]
    Collision { index: usize, time: f64 },
    #[error("index {0} is not an interior index")]
    BoundaryIndex(usize),
    #[error("shares sum to {0}, expected 1")]
    ShareMismatch(f64),
    #[error("degenerate table: {0}")]
    DegenerateTable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
