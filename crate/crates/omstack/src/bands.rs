//! Infinite-array band theory, Bloch/Wannier machinery for the equivalent
//! Kronig-Penney lattice, and the Helmholtz→Schrödinger parameter mapping.
//!
//! An infinite equidistant array propagates Bloch waves when the one-cell
//! half-trace `a(kd) = cos kd − ζ sin kd` satisfies `|a| ≤ 1`, with
//! quasi-momentum `cos qd = a`. For ζ < 0 band `n` spans
//! `kd ∈ [nπ + 2·arctan(−ζ), (n+1)π]`.
//!
//! The cell wave function on `(−d/2, d/2]` (δ-walls at the half-integer
//! lattice points) is
//!
//! ```text
//! ψ⁽⁰⁾(x) = A[cos(qd/2)·sin(kd/2)·cos(kx) + i·sin(qd/2)·cos(kd/2)·sin(kx)]
//! ```
//!
//! normalized per cell through the closed form
//! `4|A|⁻²/d = sin²kd − (ζ/kd)·sin kd·(sin kd − kd·cos kd)`. Wannier
//! functions are Brillouin-zone averages of the Bloch extension in the
//! real-positive-`A` gauge.
//!
//! The dimensionless energy convention is `ℰ = (kd)²` (the bare lattice
//! energy unit ħ²/(2md²) set to 1); the tight-binding kinetic scale is the
//! quarter bandwidth `J = (kd_top² − kd_bot²)/4` in the same unit.

use num_complex::Complex64;

use crate::chebyshev::dispersion_functions;
use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;

/// Default Brillouin-zone quadrature order for Wannier construction.
pub const DEFAULT_BZ_NODES: usize = 256;

/// One point of the infinite-array dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BandPoint {
    /// Dimensionless optical wave number `kd`.
    pub kd: f64,
    /// Half-trace `a(kd)`; propagation requires `|a| ≤ 1`.
    pub a: f64,
    /// Bloch quasi-momentum `qd = arccos a ∈ [0, π]` when propagating.
    pub q_d: Option<f64>,
    /// Evanescent attenuation per cell `κd = arccosh|a|` when in a gap.
    pub kappa_d: Option<f64>,
    pub propagating: bool,
}

/// Evaluate the dispersion relation at `kd`.
pub fn dispersion(kd: f64, zeta: f64) -> BandPoint {
    let a = dispersion_functions(kd, zeta).a;
    if a.abs() <= 1.0 {
        BandPoint { kd, a, q_d: Some(a.acos()), kappa_d: None, propagating: true }
    } else {
        BandPoint { kd, a, q_d: None, kappa_d: Some(a.abs().acosh()), propagating: false }
    }
}

/// Edges `(kd_lo, kd_hi)` of propagating band `n` for ζ < 0:
/// `[nπ + 2·arctan(−ζ), (n+1)π]`, the roots of `|a| = 1` bracketing the band.
pub fn band_edges(zeta: f64, band_n: u32) -> Result<(f64, f64)> {
    if !(zeta < 0.0) {
        return Err(Error::InvalidInput(format!(
            "band edges as implemented require zeta < 0, got {zeta}"
        )));
    }
    let delta = (-zeta).atan();
    let n = band_n as f64;
    Ok((n * std::f64::consts::PI + 2.0 * delta, (n + 1.0) * std::f64::consts::PI))
}

/// Parameters of the equivalent Schrödinger lattice problem, in the
/// dimensionless convention `ℰ = (kd)²` (energy unit ħ²/(2md²) = 1, with m
/// the bare mapping mass; lengths in units of d).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SchrodingerMap {
    /// Particle energy `ℰ = (ωd/c)²` ≥ 0.
    pub energy_e: f64,
    /// Lattice potential strength `β = 2(ω/c)²·ζd/k = 2ζ·kd`.
    pub potential_strength_beta: f64,
    /// Tight-binding hopping: quarter of the lowest bandwidth,
    /// `J = (kd_top² − kd_bot²)/4`.
    pub kinetic_scale_j: f64,
    /// Defect-potential strength `Ω = α·β`.
    pub defect_strength_omega: f64,
    /// Effective mass in (ħ = d = 1) units of the tight-binding picture,
    /// `m_eff = 1/(2J)`.
    pub mass_scale: f64,
}

/// Map optical frequency `omega` (rad/s) in a lattice of spacing `d` and
/// polarizability `zeta` (with defect `alpha`) onto the Schrödinger-problem
/// parameters.
pub fn helmholtz_to_schrodinger(
    omega: f64,
    zeta: f64,
    d: f64,
    alpha: f64,
) -> Result<SchrodingerMap> {
    if !(omega >= 0.0) || !(d > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need omega ≥ 0 and d > 0, got omega = {omega}, d = {d}"
        )));
    }
    let kd = omega / crate::C_LIGHT * d;
    let (lo, hi) = band_edges(zeta, 0)?;
    let j = (hi * hi - lo * lo) / 4.0;
    let beta = 2.0 * zeta * kd;
    Ok(SchrodingerMap {
        energy_e: kd * kd,
        potential_strength_beta: beta,
        kinetic_scale_j: j,
        defect_strength_omega: alpha * beta,
        mass_scale: 1.0 / (2.0 * j),
    })
}

/// Norm factor of the cell wave function:
/// `4|A|⁻²/d = sin²kd − (ζ/kd)·sin kd·(sin kd − kd·cos kd)`.
fn norm_factor(kd: f64, zeta: f64) -> f64 {
    let s = kd.sin();
    s * s - zeta / kd * s * (s - kd * kd.cos())
}

/// Cell wave function ψ⁽⁰⁾ at `x̃ = x/d ∈ (−1/2, 1/2]`, real-positive-A gauge.
fn cell_wavefunction(q_d: f64, kd: f64, zeta: f64, x_over_d: f64) -> Complex64 {
    let amp = 2.0 / norm_factor(kd, zeta).sqrt();
    let even = (q_d / 2.0).cos() * (kd / 2.0).sin() * (kd * x_over_d).cos();
    let odd = (q_d / 2.0).sin() * (kd / 2.0).cos() * (kd * x_over_d).sin();
    amp * Complex64::new(even, odd)
}

/// Bloch wave function at arbitrary `x̃ = x/d`, extended cell by cell:
/// `ψ(x) = e^{iq·m·d}·ψ⁽⁰⁾(x − md)` with `m = round(x/d)`.
///
/// `q_d` and `kd` must lie on the dispersion curve (`cos qd = a(kd)` within
/// 1e-9), in units of 1/√d so that one cell carries unit norm.
pub fn bloch_wavefunction(q_d: f64, kd: f64, zeta: f64, x_over_d: f64) -> Result<Complex64> {
    let a = dispersion_functions(kd, zeta).a;
    if (q_d.cos() - a).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "(q, k) off the dispersion curve: cos(qd) = {}, a(kd) = {a}",
            q_d.cos()
        )));
    }
    let m = x_over_d.round();
    let phase = (Complex64::I * q_d * m).exp();
    Ok(phase * cell_wavefunction(q_d, kd, zeta, x_over_d - m))
}

/// Precomputed Brillouin-zone quadrature for lowest-band Wannier functions.
struct BlochBasis {
    zeta: f64,
    /// (q̃ node, kd on the dispersion curve, quadrature weight).
    nodes: Vec<(f64, f64, f64)>,
}

impl BlochBasis {
    fn build(zeta: f64, n_nodes: usize) -> Result<Self> {
        let (lo, hi) = band_edges(zeta, 0)?;
        let (xs, ws) = gauss_legendre(n_nodes);
        let nodes = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                let q = std::f64::consts::PI * x;
                let kd = solve_kd_for_q(zeta, q, lo, hi);
                // dq = π·dx over x ∈ (−1, 1); the 1/2π of the BZ average
                // leaves π·w/(2π) = w/2.
                (q, kd, 0.5 * w)
            })
            .collect();
        Ok(BlochBasis { zeta, nodes })
    }

    /// Wannier function of site 0 at `x̃`.
    fn wannier_at(&self, x_over_d: f64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &(q, kd, w) in &self.nodes {
            let m = x_over_d.round();
            let phase = (Complex64::I * q * m).exp();
            acc += w * phase * cell_wavefunction(q, kd, self.zeta, x_over_d - m);
        }
        acc
    }
}

/// Solve `a(kd) = cos q̃` for `kd` inside band 0 by bisection. The half-trace
/// decreases monotonically from +1 to −1 across the band, so the root is
/// unique and always bracketed.
fn solve_kd_for_q(zeta: f64, q_d: f64, kd_lo: f64, kd_hi: f64) -> f64 {
    let target = q_d.cos();
    let mut lo = kd_lo;
    let mut hi = kd_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dispersion_functions(mid, zeta).a - target > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * kd_hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest-band Wannier function centered on site `site_j`, sampled at the
/// given `x/d` grid (lengths in units of d, amplitudes in units of 1/√d).
///
/// Uses `n_nodes`-point Gauss-Legendre quadrature over the Brillouin zone in
/// the real-positive-amplitude gauge; the result is real up to quadrature
/// error. Errors if halving the node count moves a probe value by more than
/// 1e-8 (quadrature not converged for this ζ).
pub fn wannier_function(
    site_j: i64,
    zeta: f64,
    x_over_d: &[f64],
    n_nodes: usize,
) -> Result<Vec<Complex64>> {
    if n_nodes < 32 {
        return Err(Error::InvalidInput(format!(
            "need at least 32 quadrature nodes, got {n_nodes}"
        )));
    }
    let basis = BlochBasis::build(zeta, n_nodes)?;
    let coarse = BlochBasis::build(zeta, n_nodes / 2)?;
    let probe = 0.3;
    let achieved = (basis.wannier_at(probe) - coarse.wannier_at(probe)).norm();
    if achieved > 1e-8 {
        return Err(Error::NonConvergence(format!(
            "Brillouin-zone quadrature with {n_nodes} nodes only reached {achieved:.3e} \
             (need 1e-8); increase the node count"
        )));
    }
    Ok(x_over_d
        .iter()
        .map(|&x| basis.wannier_at(x - site_j as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmat::TransferMatrix;

    #[test]
    fn free_space_dispersion_is_identity() {
        for &kd in &[0.3, 1.0, 2.5] {
            let p = dispersion(kd, 0.0);
            assert!(p.propagating);
            assert!((p.q_d.unwrap() - kd).abs() < 1e-12, "free space: qd = kd");
        }
    }

    #[test]
    fn trace_identity_against_transfer_matrices() {
        // Tr[M·F] = 2a for the one-cell matrix.
        for &(zeta, kd) in &[(-5.0, 0.9), (-0.9, 2.0), (-0.5, 1.3), (-2.0, 3.1)] {
            let m = TransferMatrix::scatter(zeta).unwrap()
                * TransferMatrix::propagation(kd, 1.0).unwrap();
            let trace = (m.m11 + m.m22) / 2.0;
            let a = dispersion_functions(kd, zeta).a;
            assert!(trace.im.abs() < 1e-12);
            assert!((trace.re - a).abs() < 1e-12, "ζ = {zeta}, kd = {kd}");
        }
    }

    #[test]
    fn band_edges_sit_on_unit_half_trace() {
        for &zeta in &[-0.5, -0.9, -5.0] {
            for band in 0..3u32 {
                let (lo, hi) = band_edges(zeta, band).unwrap();
                assert!(
                    (dispersion_functions(lo, zeta).a.abs() - 1.0).abs() < 1e-12,
                    "lower edge ζ = {zeta}, band {band}"
                );
                assert!(
                    (dispersion_functions(hi, zeta).a.abs() - 1.0).abs() < 1e-12,
                    "upper edge ζ = {zeta}, band {band}"
                );
                assert!(lo > band as f64 * std::f64::consts::PI, "band floor above nπ");
            }
        }
    }

    #[test]
    fn gap_width_grows_with_mirror_strength() {
        // Band shrinks and gap grows as |ζ| increases.
        let widths: Vec<f64> = [-0.2, -1.0, -3.0, -6.0]
            .iter()
            .map(|&z| {
                let (lo, hi) = band_edges(z, 0).unwrap();
                hi - lo
            })
            .collect();
        for pair in widths.windows(2) {
            assert!(pair[1] < pair[0], "band width must shrink with |ζ|");
        }
    }

    #[test]
    fn bloch_zone_center_is_even() {
        let zeta = -0.9;
        let (lo, hi) = band_edges(zeta, 0).unwrap();
        let kd = solve_kd_for_q(zeta, 0.0, lo, hi);
        let plus = bloch_wavefunction(0.0, kd, zeta, 0.31).unwrap();
        let minus = bloch_wavefunction(0.0, kd, zeta, -0.31).unwrap();
        assert!((plus - minus).norm() < 1e-12, "q = 0 cell function must be even");
        assert!(plus.im.abs() < 1e-12);
    }

    #[test]
    fn bloch_rejects_off_curve_pairs() {
        assert!(bloch_wavefunction(0.3, 2.0, -0.9, 0.1).is_err());
    }

    #[test]
    fn bloch_cell_norm_unity() {
        // Cell norm via Gauss-Legendre over (−1/2, 1/2).
        let zeta = -5.0;
        let (lo, hi) = band_edges(zeta, 0).unwrap();
        let q = 1.1;
        let kd = solve_kd_for_q(zeta, q, lo, hi);
        let (xs, ws) = gauss_legendre(128);
        let norm: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                0.5 * w * bloch_wavefunction(q, kd, zeta, 0.5 * x).unwrap().norm_sqr()
            })
            .sum();
        assert!((norm - 1.0).abs() < 1e-8, "cell norm = {norm}");
    }

    #[test]
    fn bloch_derivative_jump_matches_wall_strength() {
        // ψ′(x→½⁺) − ψ′(x→½⁻) = −2kζ·ψ(½) at the δ-wall between cells.
        let zeta = -0.9;
        let (lo, hi) = band_edges(zeta, 0).unwrap();
        let q = 0.7;
        let kd = solve_kd_for_q(zeta, q, lo, hi);
        let h = 1e-6;
        let at = |x: f64| bloch_wavefunction(q, kd, zeta, x).unwrap();
        let wall = 0.5;
        let deriv_right = (at(wall + 2.0 * h) - at(wall + h)) / h;
        let deriv_left = (at(wall - h) - at(wall - 2.0 * h)) / h;
        let jump = deriv_right - deriv_left;
        let expect = -2.0 * kd * zeta * at(wall);
        assert!(
            (jump - expect).norm() < 1e-3 * expect.norm(),
            "jump = {jump}, expected {expect}"
        );
    }

    #[test]
    fn wannier_translation_identity() {
        let grid: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
        let w0 = wannier_function(0, -5.0, &grid, 64).unwrap();
        let shifted_grid: Vec<f64> = grid.iter().map(|x| x + 2.0).collect();
        let w2 = wannier_function(2, -5.0, &shifted_grid, 64).unwrap();
        for (a, b) in w0.iter().zip(&w2) {
            assert!((a - b).norm() < 1e-10, "w_2(x+2d) must equal w_0(x)");
        }
    }

    #[test]
    fn wannier_peaks_at_home_cell_and_decays() {
        let grid = vec![-1.5, 0.0, 1.5];
        let w = wannier_function(0, -5.0, &grid, 128).unwrap();
        let peak = w[1].norm();
        assert!(w[0].norm() < 0.5 * peak, "left neighbor sample must be well below peak");
        assert!(w[2].norm() < 0.5 * peak);
        for v in &w {
            assert!(v.im.abs() < 1e-9, "construction must be real, got {v}");
        }
    }

    #[test]
    fn schrodinger_map_values() {
        let d = 500e-9;
        let kd = 2.9;
        let omega = kd / d * crate::C_LIGHT;
        let m = helmholtz_to_schrodinger(omega, -5.0, d, 1e-3).unwrap();
        assert!((m.energy_e - kd * kd).abs() < 1e-9);
        assert!((m.potential_strength_beta - 2.0 * (-5.0) * kd).abs() < 1e-9);
        assert!(
            (m.defect_strength_omega - 1e-3 * m.potential_strength_beta).abs() < 1e-15
        );
        // J from the ζ=−5 lowest band: edges (2·atan 5, π).
        let lo = 2.0 * 5.0f64.atan();
        let expect_j = (std::f64::consts::PI.powi(2) - lo * lo) / 4.0;
        assert!((m.kinetic_scale_j - expect_j).abs() < 1e-12);
        assert!((expect_j - 0.581171).abs() < 1e-5, "frozen value check: J = {expect_j}");
        assert!(m.energy_e >= 0.0);
    }

    #[test]
    fn zero_defect_zero_omega() {
        let m = helmholtz_to_schrodinger(3e15, -0.9, 500e-9, 0.0).unwrap();
        assert_eq!(m.defect_strength_omega, 0.0);
    }
}
