//! Complex 2×2 transfer-matrix algebra for stacks of thin scatterers.
//!
//! Every element of a stack is either a zero-thickness scatterer of real
//! polarizability ζ or a free-space gap. Field vectors are `(L, R)` pairs —
//! amplitudes of the left-traveling `e^{−ikx}` and right-traveling `e^{+ikx}`
//! components — and a transfer matrix maps the vector on the right side of an
//! element to the one on its left side, `v_left = M v_right`. In this
//! convention a single scatterer has amplitude reflectivity `r = iζ/(1−iζ)`
//! and the composite intensity coefficients are `T = 1/|m22|²`,
//! `R = |m12/m22|²`.
//!
//! All matrices here are unimodular (`det M = 1`), which encodes losslessness;
//! `R + T = 1` then holds identically.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// 2×2 complex transfer matrix, `v_left = M v_right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

/// `(L, R)` field amplitudes on one side of an element, or over one free
/// segment when anchored to an absolute-`x` phase reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldVector {
    /// Amplitude of the left-traveling component `e^{−ikx}`.
    pub left_amp: Complex64,
    /// Amplitude of the right-traveling component `e^{+ikx}`.
    pub right_amp: Complex64,
}

/// One zero-thickness scatterer: real polarizability and position on the line.
///
/// Mirrors and membranes in this model carry ζ < 0 (repulsive δ-wall in the
/// band-theory picture); positive ζ is accepted by the algebra but flagged by
/// [`crate::geometry`] validation as physically suspect for mirrors.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scatterer {
    /// Dimensionless polarizability ζ.
    pub zeta: f64,
    /// Position, meters.
    pub position: f64,
}

/// An ordered stack of scatterers; the single description every platform
/// (bare array, array-in-cavity, crystal) reduces to.
///
/// Construction enforces strictly increasing positions, so consumers can
/// assume sortedness.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SystemSpec {
    elements: Vec<Scatterer>,
}

impl TransferMatrix {
    pub const IDENTITY: Self = Self {
        m11: Complex64::new(1.0, 0.0),
        m12: Complex64::new(0.0, 0.0),
        m21: Complex64::new(0.0, 0.0),
        m22: Complex64::new(1.0, 0.0),
    };

    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    /// Scattering matrix of a single thin element,
    /// `[[1+iζ, iζ], [−iζ, 1−iζ]]`.
    pub fn scatter(zeta: f64) -> Result<Self> {
        if !zeta.is_finite() {
            return Err(Error::InvalidInput(format!("zeta must be finite, got {zeta}")));
        }
        let iz = Complex64::new(0.0, zeta);
        Ok(Self::new(1.0 + iz, iz, -iz, 1.0 - iz))
    }

    /// Free-propagation matrix over distance `d` at wavenumber `k`,
    /// `diag(e^{ikd}, e^{−ikd})`.
    ///
    /// `k = 0` or `d = 0` give the identity; negative `d` is rejected because
    /// element ordering must be handled upstream, not by phase tricks.
    pub fn propagation(k: f64, d: f64) -> Result<Self> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidInput(format!("wavenumber must be finite and ≥ 0, got {k}")));
        }
        if !d.is_finite() || d < 0.0 {
            return Err(Error::InvalidInput(format!("propagation distance must be ≥ 0, got {d}")));
        }
        let phase = Complex64::from_polar(1.0, k * d);
        Ok(Self::new(phase, Complex64::ZERO, Complex64::ZERO, phase.conj()))
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Largest elementwise modulus; the matrix norm used by expansion-error
    /// tests.
    pub fn inf_norm(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }

    /// Elementwise modulus of the difference to `other` (for comparisons).
    pub fn distance(&self, other: &Self) -> f64 {
        (self.m11 - other.m11)
            .norm()
            .max((self.m12 - other.m12).norm())
            .max((self.m21 - other.m21).norm())
            .max((self.m22 - other.m22).norm())
    }

    /// Intensity reflectivity `R = |m12/m22|²` for a unit wave incident from
    /// the left.
    pub fn reflectivity(&self) -> Result<f64> {
        let m22 = self.m22.norm();
        if m22 < tol::DEGENERATE_M22 {
            return Err(Error::DegenerateMatrix { m22_abs: m22 });
        }
        Ok((self.m12 / self.m22).norm_sqr())
    }

    /// Intensity transmission `T = 1/|m22|²`.
    pub fn transmission(&self) -> Result<f64> {
        let m22 = self.m22.norm();
        if m22 < tol::DEGENERATE_M22 {
            return Err(Error::DegenerateMatrix { m22_abs: m22 });
        }
        Ok(1.0 / self.m22.norm_sqr())
    }
}

impl std::ops::Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix::new(
            self.m11 * rhs.m11 + self.m12 * rhs.m21,
            self.m11 * rhs.m12 + self.m12 * rhs.m22,
            self.m21 * rhs.m11 + self.m22 * rhs.m21,
            self.m21 * rhs.m12 + self.m22 * rhs.m22,
        )
    }
}

impl SystemSpec {
    /// Build a stack from scatterers; positions must be strictly increasing.
    pub fn new(elements: Vec<Scatterer>) -> Result<Self> {
        for pair in elements.windows(2) {
            if !(pair[1].position > pair[0].position) {
                return Err(Error::InvalidInput(format!(
                    "scatterer positions must be strictly increasing: {} then {}",
                    pair[0].position, pair[1].position
                )));
            }
        }
        for e in &elements {
            if !e.zeta.is_finite() || !e.position.is_finite() {
                return Err(Error::InvalidInput("scatterer fields must be finite".into()));
            }
        }
        Ok(Self { elements })
    }

    /// Stack with no scatterers (free space).
    pub fn empty() -> Self {
        Self { elements: Vec::new() }
    }

    pub fn elements(&self) -> &[Scatterer] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Copy with element `j` (0-based) displaced by `h` meters. Ordering is
    /// re-validated, so a displacement pushing an element past its neighbor
    /// fails loudly instead of silently reordering.
    pub fn displaced(&self, j: usize, h: f64) -> Result<Self> {
        if j >= self.elements.len() {
            return Err(Error::InvalidInput(format!(
                "element index {j} out of range for {} elements",
                self.elements.len()
            )));
        }
        let mut elements = self.elements.clone();
        elements[j].position += h;
        Self::new(elements)
    }

    /// Spatially mirrored copy (x → −x, order reversed). Used by parity
    /// checks: lossless symmetric stacks have identical R and T both ways.
    pub fn mirrored(&self) -> Self {
        let mut elements: Vec<Scatterer> = self
            .elements
            .iter()
            .rev()
            .map(|e| Scatterer { zeta: e.zeta, position: -e.position })
            .collect();
        // Reversal of strictly increasing stays strictly increasing.
        if elements.is_empty() {
            elements = Vec::new();
        }
        Self { elements }
    }
}

/// Total transfer matrix of the stack at wavenumber `k`:
/// `M₁ · F₁₂ · M₂ · … · M_N`. The empty stack gives the identity.
pub fn chain(system: &SystemSpec, k: f64) -> Result<TransferMatrix> {
    let elements = system.elements();
    let Some(first) = elements.first() else {
        return Ok(TransferMatrix::IDENTITY);
    };
    let mut total = TransferMatrix::scatter(first.zeta)?;
    for pair in elements.windows(2) {
        let gap = pair[1].position - pair[0].position;
        total = total * TransferMatrix::propagation(k, gap)? * TransferMatrix::scatter(pair[1].zeta)?;
    }
    Ok(total)
}

/// Per-segment field amplitudes for a unit-amplitude wave incident from the
/// left (no wave incident from the right).
///
/// Segment `j` (0 ≤ j ≤ N) is the free region left of scatterer `j`
/// (segment 0 = incidence side, segment N = transmission side). The returned
/// amplitudes are anchored to absolute `x`: within segment `j`,
/// `E(x) = right_amp·e^{+ikx} + left_amp·e^{−ikx}`.
pub fn segment_amplitudes(system: &SystemSpec, k: f64) -> Result<Vec<FieldVector>> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::InvalidInput(format!("wavenumber must be positive, got {k}")));
    }
    let elements = system.elements();
    let n = elements.len();
    if n == 0 {
        return Ok(vec![FieldVector {
            left_amp: Complex64::ZERO,
            right_amp: Complex64::new(1.0, 0.0),
        }]);
    }
    // Backward pass in local frames: start with a unit transmitted wave on
    // the far right and normalize to unit incidence afterwards (|m22| ≥ 1 for
    // lossless stacks, so the normalization never degenerates).
    let mut segments = vec![
        FieldVector { left_amp: Complex64::ZERO, right_amp: Complex64::ZERO };
        n + 1
    ];
    let to_absolute = |local: (Complex64, Complex64), x_ref: f64| FieldVector {
        left_amp: local.0 * Complex64::from_polar(1.0, k * x_ref),
        right_amp: local.1 * Complex64::from_polar(1.0, -k * x_ref),
    };
    // Local (L, R) in the frame of the scatterer the segment touches.
    let mut local = (Complex64::ZERO, Complex64::new(1.0, 0.0)); // frame of x_{N-1}
    segments[n] = to_absolute(local, elements[n - 1].position);
    for j in (0..n).rev() {
        let m = TransferMatrix::scatter(elements[j].zeta)?;
        // Cross scatterer j in its own frame.
        local = (
            m.m11 * local.0 + m.m12 * local.1,
            m.m21 * local.0 + m.m22 * local.1,
        );
        segments[j] = to_absolute(local, elements[j].position);
        if j > 0 {
            // Re-anchor to the frame of scatterer j−1 across the gap.
            let gap = elements[j].position - elements[j - 1].position;
            let phase = Complex64::from_polar(1.0, k * gap);
            local = (local.0 * phase, local.1 / phase);
        }
    }
    // Normalize to unit incident amplitude (absolute right-traveling
    // coefficient of segment 0).
    let incident = segments[0].right_amp;
    for seg in &mut segments {
        seg.left_amp /= incident;
        seg.right_amp /= incident;
    }
    Ok(segments)
}

/// |E(x)| on `grid` for a unit wave incident from the left.
///
/// A grid point exactly at a scatterer position is evaluated as the limit
/// from the left; for the zero-thickness scatterers here the field itself is
/// continuous, so the one-sided choice only matters for testing that very
/// continuity.
pub fn field_profile(system: &SystemSpec, k: f64, grid: &[f64]) -> Result<Vec<f64>> {
    let segments = segment_amplitudes(system, k)?;
    let positions: Vec<f64> = system.elements().iter().map(|e| e.position).collect();
    Ok(grid
        .iter()
        .map(|&x| {
            let seg = positions.partition_point(|&p| p < x);
            let v = &segments[seg];
            let phase = Complex64::from_polar(1.0, k * x);
            (v.right_amp * phase + v.left_amp / phase).norm()
        })
        .collect())
}
