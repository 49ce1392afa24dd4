//! Membrane position sets and platform assembly.
//!
//! Position builders produce strictly increasing coordinate lists in meters,
//! centered on the origin:
//!
//! - equidistant: `x_j⁰ = D(−1/2 + (j−1)/(N−1))`, gap `d = D/(N−1)`;
//! - quadratic defect: `x_j = x_j⁰ − (α/d)(D²/4 − (x_j⁰)²)·sgn(x_j⁰)`,
//!   which pushes membranes toward the center, keeps the endpoints (and thus
//!   the total length `D`) fixed, and is antisymmetric about the origin.
//!
//! Two platforms assemble these arrays into full stacks: an array between two
//! end mirrors at `±L/2` (the mirrors sit about the origin, not about the
//! outermost membranes), and a crystal where periodic side arrays of spacing
//! `d_m` flank the inner array, the innermost side membrane separated from
//! the outer array membrane by `d_m` as well.

use crate::error::{Error, Result};
use crate::tmat::{Scatterer, SystemSpec};

/// A membrane array: count, shared polarizability, equidistant gap, and
/// quadratic defect strength.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArraySpec {
    /// Number of membranes N ≥ 1.
    pub n_membranes: usize,
    /// Shared polarizability ζ (negative for mirror-like membranes).
    pub zeta: f64,
    /// Equidistant inter-membrane gap `d`, meters.
    pub spacing_d: f64,
    /// Quadratic defect strength α ≥ 0 (dimensionless); 0 = equidistant.
    pub alpha: f64,
}

/// Membrane array inside a two-mirror cavity.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CavityPlatformSpec {
    pub array: ArraySpec,
    /// Mirror separation `L`, meters; mirrors at ±L/2 about the origin.
    pub cavity_length_l: f64,
    /// End-mirror polarizability ζ_m.
    pub mirror_zeta: f64,
}

/// Membrane crystal: inner (defect) array flanked by periodic side arrays.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CrystalSpec {
    pub inner: ArraySpec,
    /// Membranes per side array, N_m.
    pub n_side: usize,
    /// Side-membrane polarizability ζ_m.
    pub side_zeta: f64,
    /// Side-array spacing (and edge gap to the inner array) `d_m`, meters.
    pub side_spacing: f64,
}

impl ArraySpec {
    /// Total array length `D = (N−1)·d` (0 for a single membrane).
    pub fn total_length(&self) -> f64 {
        (self.n_membranes.saturating_sub(1)) as f64 * self.spacing_d
    }

    /// Largest admissible defect strength for `n` membranes:
    /// `2/[N(N−1)]` for even N, `4/[(N−3)(N+1)]` for odd N.
    ///
    /// At the bound, two neighboring positions coincide. For N ≤ 3 the
    /// quadratic defect cannot move any membrane (endpoints are pinned and a
    /// central membrane sits at the origin), so the bound is +∞.
    pub fn alpha_bound(n: usize) -> f64 {
        if n <= 3 {
            return f64::INFINITY;
        }
        let nf = n as f64;
        if n % 2 == 0 {
            2.0 / (nf * (nf - 1.0))
        } else {
            4.0 / ((nf - 3.0) * (nf + 1.0))
        }
    }

    /// Validate counts, spacing, and the defect bound.
    pub fn validate(&self) -> Result<()> {
        if self.n_membranes == 0 {
            return Err(Error::InvalidInput("array needs at least one membrane".into()));
        }
        if !(self.spacing_d > 0.0) && self.n_membranes > 1 {
            return Err(Error::InvalidInput(format!(
                "spacing must be positive, got {}",
                self.spacing_d
            )));
        }
        if !self.zeta.is_finite() {
            return Err(Error::InvalidInput("zeta must be finite".into()));
        }
        let bound = Self::alpha_bound(self.n_membranes);
        if !(self.alpha >= 0.0) || self.alpha >= bound {
            return Err(Error::InvalidInput(format!(
                "alpha = {} outside [0, {bound}) for N = {}",
                self.alpha, self.n_membranes
            )));
        }
        Ok(())
    }

    /// Positions in meters (defect applied when α > 0). `N = 1` returns the
    /// single membrane at the origin.
    pub fn positions(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.n_membranes == 1 {
            return Ok(vec![0.0]);
        }
        let d_total = self.total_length();
        if self.alpha == 0.0 {
            equidistant_positions(self.n_membranes, d_total)
        } else {
            defect_positions(self.n_membranes, d_total, self.alpha)
        }
    }

    /// Bare-array stack (no surrounding mirrors).
    pub fn system(&self) -> Result<SystemSpec> {
        let elements = self
            .positions()?
            .into_iter()
            .map(|position| Scatterer { zeta: self.zeta, position })
            .collect();
        SystemSpec::new(elements)
    }

    /// Non-fatal physical-modeling concerns (e.g. ζ > 0, which no mirror-like
    /// membrane has).
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.zeta > 0.0 {
            w.push(format!(
                "membrane polarizability {} is positive; mirrors require zeta < 0",
                self.zeta
            ));
        }
        w
    }
}

/// Equidistant positions over total length `D`, centered on the origin.
pub fn equidistant_positions(n: usize, d_total: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 membranes, got {n}")));
    }
    if !(d_total > 0.0) {
        return Err(Error::InvalidInput(format!("total length must be positive, got {d_total}")));
    }
    Ok((1..=n)
        .map(|j| d_total * (-0.5 + (j - 1) as f64 / (n - 1) as f64))
        .collect())
}

/// Quadratic-defect positions: each membrane is shifted toward the origin by
/// `(α/d)(D²/4 − x²)`, so endpoints stay put and gaps shrink toward the
/// center.
pub fn defect_positions(n: usize, d_total: f64, alpha: f64) -> Result<Vec<f64>> {
    let bound = ArraySpec::alpha_bound(n);
    if !(alpha >= 0.0) || alpha >= bound {
        return Err(Error::InvalidInput(format!(
            "alpha = {alpha} outside [0, {bound}) for N = {n}"
        )));
    }
    let base = equidistant_positions(n, d_total)?;
    let d = d_total / (n - 1) as f64;
    Ok(base
        .into_iter()
        .map(|x0| x0 - (alpha / d) * (d_total * d_total / 4.0 - x0 * x0) * sign(x0))
        .collect())
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Per-gap defect corrections `d_{j,j+1} = [d − (x_{j+1} − x_j)]/α`, meters.
///
/// For the quadratic defect these are independent of α (α cancels exactly)
/// and mirror-symmetric, `d_{i,i+1} = d_{N−i,N−i+1}`.
pub fn gap_corrections(positions: &[f64], d: f64, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(
            "gap corrections are defined only for alpha > 0 (correction = gap deficit / alpha)"
                .into(),
        ));
    }
    if positions.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 positions".into()));
    }
    Ok(positions
        .windows(2)
        .map(|p| (d - (p[1] - p[0])) / alpha)
        .collect())
}

impl CavityPlatformSpec {
    /// End mirrors at ±L/2 with the (possibly empty) array between them,
    /// the array centered on the cavity midpoint.
    pub fn assemble(&self) -> Result<SystemSpec> {
        self.assemble_with_shift(0.0)
    }

    /// Like [`assemble`](Self::assemble), with the whole array displaced by
    /// `shift` meters from the centered registration (gaps unchanged).
    ///
    /// Where the array sits relative to the cavity standing wave is a free
    /// design parameter of the platform: the couplings it produces are
    /// strongly registration-dependent and periodic in half the resonant
    /// wavelength, so callers scanning registrations shift by fractions of
    /// π/k.
    pub fn assemble_with_shift(&self, shift: f64) -> Result<SystemSpec> {
        if !(self.cavity_length_l > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cavity length must be positive, got {}",
                self.cavity_length_l
            )));
        }
        if !shift.is_finite() {
            return Err(Error::InvalidInput(format!(
                "array shift must be finite, got {shift}"
            )));
        }
        let half_l = self.cavity_length_l / 2.0;
        let mut elements = vec![Scatterer { zeta: self.mirror_zeta, position: -half_l }];
        if self.array.n_membranes > 0 {
            self.array.validate()?;
            for position in self.array.positions()? {
                elements.push(Scatterer { zeta: self.array.zeta, position: position + shift });
            }
        }
        elements.push(Scatterer { zeta: self.mirror_zeta, position: half_l });
        SystemSpec::new(elements)
    }

    /// Index range of the movable array membranes inside the assembled stack
    /// (everything but the two end mirrors).
    pub fn array_indices(&self) -> std::ops::Range<usize> {
        1..1 + self.array.n_membranes
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = self.array.warnings();
        let d_total = self.array.total_length();
        if self.cavity_length_l < 10.0 * d_total {
            w.push(format!(
                "cavity length {} m is below 10× the array length {} m; the long-cavity \
                 approximation degrades",
                self.cavity_length_l, d_total
            ));
        }
        if self.mirror_zeta > 0.0 {
            w.push(format!(
                "mirror polarizability {} is positive; mirrors require zeta < 0",
                self.mirror_zeta
            ));
        }
        w
    }
}

impl CrystalSpec {
    /// Full crystal stack: `N_m` side membranes at spacing `d_m` on each side
    /// of the inner array, edge gap `d_m`, mirror-symmetric about the origin.
    pub fn assemble(&self) -> Result<SystemSpec> {
        self.inner.validate()?;
        if self.n_side == 0 {
            return self.inner.system();
        }
        if !(self.side_spacing > 0.0) {
            return Err(Error::InvalidInput(format!(
                "side spacing must be positive, got {}",
                self.side_spacing
            )));
        }
        let inner = self.inner.positions()?;
        let first = *inner.first().expect("validated non-empty");
        let last = *inner.last().expect("validated non-empty");
        let mut elements = Vec::with_capacity(self.inner.n_membranes + 2 * self.n_side);
        for i in (1..=self.n_side).rev() {
            elements.push(Scatterer {
                zeta: self.side_zeta,
                position: first - i as f64 * self.side_spacing,
            });
        }
        for &position in &inner {
            elements.push(Scatterer { zeta: self.inner.zeta, position });
        }
        for i in 1..=self.n_side {
            elements.push(Scatterer {
                zeta: self.side_zeta,
                position: last + i as f64 * self.side_spacing,
            });
        }
        SystemSpec::new(elements)
    }

    /// Index range of the inner-array membranes inside the assembled stack.
    /// These are the mobile elements for coupling extraction; the side
    /// arrays act as the confining mirrors and stay frozen.
    pub fn mobile_indices(&self) -> std::ops::Range<usize> {
        self.n_side..self.n_side + self.inner.n_membranes
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = self.inner.warnings();
        if self.side_zeta > 0.0 {
            w.push(format!(
                "side polarizability {} is positive; mirrors require zeta < 0",
                self.side_zeta
            ));
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_three_symmetric() {
        let p = equidistant_positions(3, 2.0e-6).unwrap();
        assert_eq!(p, vec![-1.0e-6, 0.0, 1.0e-6]);
    }

    #[test]
    fn equidistant_two() {
        let p = equidistant_positions(2, 525e-9).unwrap();
        assert!((p[0] + 262.5e-9).abs() < 1e-18);
        assert!((p[1] - 262.5e-9).abs() < 1e-18);
    }

    #[test]
    fn equidistant_seven_matches_hand_values() {
        // d = 525 nm → D = 3.15 µm, x₁ = −1.575 µm.
        let p = equidistant_positions(7, 6.0 * 525e-9).unwrap();
        assert!((p[0] + 1.575e-6).abs() < 1e-15);
        assert!((p[6] - 1.575e-6).abs() < 1e-15);
        for gap in p.windows(2) {
            assert!((gap[1] - gap[0] - 525e-9).abs() < 1e-15);
        }
    }

    #[test]
    fn equidistant_rejects_single() {
        assert!(equidistant_positions(1, 1.0).is_err());
    }

    #[test]
    fn defect_zero_alpha_is_equidistant() {
        let p0 = equidistant_positions(7, 3.15e-6).unwrap();
        let p = defect_positions(7, 3.15e-6, 0.0).unwrap();
        assert_eq!(p0, p);
    }

    #[test]
    fn defect_keeps_endpoints_and_length() {
        let d_total = 3.15e-6;
        let p = defect_positions(7, d_total, 5e-3).unwrap();
        assert!((p[0] + d_total / 2.0).abs() < 1e-18);
        assert!((p[6] - d_total / 2.0).abs() < 1e-18);
    }

    #[test]
    fn defect_positions_antisymmetric() {
        let p = defect_positions(8, 7.0 * 500e-9, 1e-3).unwrap();
        for (j, &x) in p.iter().enumerate() {
            let mirror = p[p.len() - 1 - j];
            assert!((x + mirror).abs() < 1e-18, "x_{j} = {x} vs {mirror}");
        }
    }

    #[test]
    fn defect_gaps_shrink_toward_center() {
        let p = defect_positions(7, 3.15e-6, 5e-3).unwrap();
        let gaps: Vec<f64> = p.windows(2).map(|w| w[1] - w[0]).collect();
        // Left half decreasing toward the middle, right half mirrored.
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
        assert!((gaps[2] - gaps[3]).abs() < 1e-18 || gaps[2] > 0.0);
        for (g, gm) in gaps.iter().zip(gaps.iter().rev()) {
            assert!((g - gm).abs() < 1e-18);
        }
        assert!(gaps[2] < 525e-9, "central gap must shrink below d");
    }

    #[test]
    fn alpha_bound_values() {
        // Odd rule: 4/[(N−3)(N+1)]; even rule: 2/[N(N−1)].
        assert!((ArraySpec::alpha_bound(7) - 0.125).abs() < 1e-15);
        assert!((ArraySpec::alpha_bound(8) - 2.0 / 56.0).abs() < 1e-15);
        assert!(defect_positions(7, 3.15e-6, 5e-2).is_ok());
        assert!(defect_positions(7, 3.15e-6, 0.13).is_err());
    }

    #[test]
    fn near_bound_still_increasing_at_bound_coincident() {
        // Positions stay strictly ordered just below the bound for both
        // parities. For odd N the bound is exactly where the two gaps around
        // the fixed central membrane collapse: d·(1 − α(N−3)(N+1)/4) → 0.
        // For even N the bound 2/[N(N−1)] is conservative — the central pair
        // would only touch at 2/[N(N−2)] — so no near-zero gap is expected.
        for n in [7usize, 8] {
            let d = 500e-9;
            let d_total = (n - 1) as f64 * d;
            let bound = ArraySpec::alpha_bound(n);
            let p = defect_positions(n, d_total, bound * (1.0 - 1e-9)).unwrap();
            for w in p.windows(2) {
                assert!(w[1] > w[0], "N = {n}: strictly increasing just below the bound");
            }
            let min_gap = p.windows(2).map(|w| w[1] - w[0]).fold(f64::MAX, f64::min);
            if n % 2 == 1 {
                assert!(min_gap < 1e-6 * d, "N = {n}: central gaps collapse at the bound");
            } else {
                assert!(min_gap > 0.1 * d, "N = {n}: the conservative bound keeps gaps open");
            }
        }
        // Just above the odd bound the ordering breaks down and validation
        // must reject the spec.
        let spec = ArraySpec {
            n_membranes: 7,
            zeta: -0.5,
            spacing_d: 500e-9,
            alpha: ArraySpec::alpha_bound(7) * 1.01,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn gap_corrections_alpha_independent_and_symmetric() {
        let d_total = 6.0 * 525e-9;
        let d = 525e-9;
        let c1 = gap_corrections(&defect_positions(7, d_total, 1e-3).unwrap(), d, 1e-3).unwrap();
        let c2 = gap_corrections(&defect_positions(7, d_total, 1e-5).unwrap(), d, 1e-5).unwrap();
        // The corrections are exactly linear in alpha, so dividing it out is
        // alpha-independent up to cancellation noise in (d − gap).
        for (a, b) in c1.iter().zip(&c2) {
            assert!((a - b).abs() < 1e-6 * d, "corrections must not depend on alpha");
        }
        for (a, b) in c1.iter().zip(c1.iter().rev()) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1e-30), "corrections must be mirror-symmetric");
        }
    }

    #[test]
    fn gap_corrections_rejects_zero_alpha() {
        let p = equidistant_positions(5, 4.0 * 500e-9).unwrap();
        assert!(gap_corrections(&p, 500e-9, 0.0).is_err());
    }

    #[test]
    fn platform_a_empty_array_is_bare_cavity() {
        let spec = CavityPlatformSpec {
            array: ArraySpec { n_membranes: 0, zeta: -5.0, spacing_d: 525e-9, alpha: 0.0 },
            cavity_length_l: 6.3e-2,
            mirror_zeta: -20.0,
        };
        let sys = spec.assemble().unwrap();
        assert_eq!(sys.len(), 2);
        assert!((sys.elements()[0].position + 3.15e-2).abs() < 1e-12);
        assert!((sys.elements()[1].position - 3.15e-2).abs() < 1e-12);
    }

    #[test]
    fn platform_a_counts_and_order() {
        let spec = CavityPlatformSpec {
            array: ArraySpec { n_membranes: 7, zeta: -5.0, spacing_d: 525e-9, alpha: 5e-3 },
            cavity_length_l: 6.3e-2,
            mirror_zeta: -20.0,
        };
        let sys = spec.assemble().unwrap();
        assert_eq!(sys.len(), 9);
        assert_eq!(spec.array_indices(), 1..8);
    }

    #[test]
    fn shifted_assembly_moves_array_only() {
        let spec = CavityPlatformSpec {
            array: ArraySpec { n_membranes: 7, zeta: -5.0, spacing_d: 525e-9, alpha: 0.0 },
            cavity_length_l: 6.3e-2,
            mirror_zeta: -20.0,
        };
        let shift = 1.3e-7;
        let centered = spec.assemble().unwrap();
        let shifted = spec.assemble_with_shift(shift).unwrap();
        for (a, b) in centered.elements()[..1].iter().zip(&shifted.elements()[..1]) {
            assert_eq!(a.position, b.position);
        }
        assert_eq!(centered.elements()[8].position, shifted.elements()[8].position);
        for j in spec.array_indices() {
            let moved = shifted.elements()[j].position - centered.elements()[j].position;
            assert!((moved - shift).abs() < 1e-18);
        }
        assert!(spec.assemble_with_shift(f64::NAN).is_err());
    }

    #[test]
    fn crystal_47_membranes() {
        let spec = CrystalSpec {
            inner: ArraySpec { n_membranes: 7, zeta: -0.5, spacing_d: 500e-9, alpha: 1e-3 },
            n_side: 20,
            side_zeta: -0.5,
            side_spacing: 247e-9,
        };
        let sys = spec.assemble().unwrap();
        assert_eq!(sys.len(), 47);
        // Antisymmetric positions.
        let pos: Vec<f64> = sys.elements().iter().map(|e| e.position).collect();
        for (j, &x) in pos.iter().enumerate() {
            assert!((x + pos[pos.len() - 1 - j]).abs() < 1e-15);
        }
        // Edge gap between side block and inner array equals d_m.
        let gap = pos[20] - pos[19];
        assert!((gap - 247e-9).abs() < 1e-15);
        assert_eq!(spec.mobile_indices(), 20..27);
    }

    #[test]
    fn long_cavity_warning_fires() {
        let spec = CavityPlatformSpec {
            array: ArraySpec { n_membranes: 7, zeta: -5.0, spacing_d: 525e-9, alpha: 0.0 },
            cavity_length_l: 20e-6,
            mirror_zeta: -20.0,
        };
        assert!(!spec.warnings().is_empty());
    }
}
