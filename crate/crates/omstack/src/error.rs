//! Error taxonomy for the simulator.
//!
//! Variants are grouped by failure mode rather than by module: invalid input
//! (caller bug), degenerate evaluation points (well-formed input hitting a
//! removable singularity), and numeric search failures (root/minimum lost).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input violates a documented precondition (non-finite ζ, unsorted
    /// positions, defect strength at/above its bound, …).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `|m22|` underflowed; reflectivity/transmission undefined.
    #[error("degenerate transfer matrix: |m22| = {m22_abs:.3e}")]
    DegenerateMatrix { m22_abs: f64 },

    /// The effective-mirror phase denominator vanished at this `kd`.
    #[error("degenerate point: effective-mirror denominator vanishes at kd = {kd}")]
    DegeneratePoint { kd: f64 },

    /// Continuation tracking of a resonance lost its branch.
    #[error("resonance tracking lost near k = {k0} rad/m: {detail}")]
    TrackingLost { k0: f64, detail: String },

    /// A bracketed root expected for series index `n` was not found.
    #[error("no sign change brackets the root for resonance index n = {n}")]
    MissingRoot { n: i64 },

    /// An iterative quadrature or search failed to reach its tolerance.
    #[error("numeric routine failed to converge: {0}")]
    NonConvergence(String),
}
