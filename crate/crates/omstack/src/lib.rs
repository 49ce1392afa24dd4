//! Transfer-matrix simulator for 1D optomechanical membrane stacks.
//!
//! The library models stacks of infinitely thin dielectric scatterers
//! ("membranes", each characterized by a real polarizability ζ) on a line,
//! via complex 2×2 transfer matrices. On top of that core it provides:
//!
//! - [`tmat`] — transfer-matrix algebra, reflectivity/transmission, and
//!   intracavity field reconstruction;
//! - [`geometry`] — membrane position sets (equidistant and quadratic-defect)
//!   and platform assembly (membrane array in a two-mirror cavity, and a
//!   membrane crystal with periodic side arrays);
//! - [`chebyshev`] — closed-form effective-mirror algebra (χ, μ) for periodic
//!   sub-arrays and the first-order defect expansion (ξ, ν, γ, λ);
//! - [`resonance`] — spectrum scans, transmissive-point finding/refinement,
//!   band windows, and continuation-based resonance tracking;
//! - [`coupling`] — linear/quadratic optomechanical coupling extraction by
//!   numerical differentiation of tracked resonances, collective sine-mode
//!   couplings, and closed-form reference values;
//! - [`supercavity`] — the analytic super-cavity model (effective dispersive
//!   mirrors, finesse, resonance series, FSR deviation, spacing tuning);
//! - [`bands`] — infinite-array band theory, Kronig-Penney Bloch/Wannier
//!   machinery, and the Helmholtz→Schrödinger parameter mapping.
//!
//! # Conventions
//!
//! - Field vectors are `(L, R)` pairs: amplitudes of the left-traveling
//!   (`e^{−ikx}`) and right-traveling (`e^{+ikx}`) plane-wave components.
//!   A transfer matrix maps the field vector on the **right** side of an
//!   element (or stack) to the one on its **left** side: `v_left = M v_right`.
//! - With that ordering, intensity transmission is `T = 1/|m22|²` and
//!   reflectivity is `R = |m12/m22|²` for a unit wave incident from the left.
//! - The dimensionless scan coordinate is `kd/π` (`d` = reference spacing);
//!   absolute wavenumbers are rad/m, couplings rad/s.

pub mod bands;
pub mod chebyshev;
pub mod coupling;
pub mod error;
pub mod geometry;
pub(crate) mod numeric;
pub mod resonance;
pub mod supercavity;
pub mod tmat;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const C_LIGHT: f64 = 299_792_458.0;

/// Tolerances used throughout the crate, each with its numerical basis.
/// Centralized so tests and library guards agree on one value.
pub mod tol {
    /// Unimodularity (`det M = 1`) and energy conservation (`R + T = 1`) for
    /// lossless stacks. Products of ≲200 exact 2×2 factors accumulate a few
    /// ulps per multiply; 1e-12 leaves two orders of headroom above f64 noise.
    pub const UNIMODULAR: f64 = 1e-12;

    /// Elementwise agreement between the Chebyshev closed form of a periodic
    /// stack and the brute-force matrix product, relative to the largest
    /// element. Chebyshev recurrences lose ~N ulps for N ≤ 50.
    pub const PARAFORM_REL: f64 = 1e-10;

    /// Field continuity across a zero-thickness scatterer, relative to the
    /// local amplitude: E is continuous, only E′ jumps.
    pub const FIELD_CONTINUITY_REL: f64 = 1e-9;

    /// Resonance refinement width in the dimensionless coordinate `kd`.
    /// Golden-section minimization of a smooth quadratic minimum reaches
    /// `sqrt(eps) ≈ 1.5e-8` in x; log-transformed reflectivity dips are
    /// V-shaped (not quadratic) near zero so the bracket collapses further.
    pub const REFINE_KD: f64 = 1e-12;

    /// Residual reflectivity below which a refined minimum counts as a true
    /// transmissive point (R = 0 analytically).
    pub const TRANSMISSIVE_R: f64 = 1e-10;

    /// |m22| below which reflectivity/transmission are considered degenerate.
    pub const DEGENERATE_M22: f64 = 1e-300;
}
