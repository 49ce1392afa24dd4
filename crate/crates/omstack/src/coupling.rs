//! Optomechanical coupling extraction and closed-form references.
//!
//! The linear and quadratic couplings of membrane `j` are derivatives of the
//! compound resonance wave number with respect to that membrane's position,
//!
//! ```text
//! g⁽¹⁾_j = c·(δk/δx_j)·x₀        g⁽²⁾_j = c·(δ²k/δx_j²)·x₀²
//! ```
//!
//! evaluated numerically: displace one membrane by ±h and ±h/2, re-track the
//! resonance, central-difference, and Richardson-extrapolate (each order
//! with its own step — see [`DerivativeSteps`]). Collective couplings are
//! root-sum-squares over the mobile membranes; enhancement ratios compare
//! them against the single-membrane references
//!
//! ```text
//! g₀⁽¹⁾ = (2ck/L)·ζ/√(1+ζ²)·x₀     g₀⁽²⁾ = (2ck²/L)·ζ·x₀²
//! g     = 2ckx₀/L                   (unit-reflectivity optimum)
//! ```
//!
//! all at the same resonance k.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::CavityPlatformSpec;
use crate::resonance::{nearest_resonance, track_resonance};
use crate::tmat::SystemSpec;

/// Physical scales entering the coupling values.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhysicalScales {
    /// Mechanical zero-point motion x₀, meters.
    pub x0: f64,
    /// Mechanical frequency ω_m, rad/s (metadata; never enters the optics).
    pub omega_m: f64,
    /// Speed of light, m/s.
    pub c: f64,
}

impl PhysicalScales {
    /// SiN-membrane-scale defaults: x₀ = 2.7 fm, ω_m = 2π×211 kHz.
    pub fn membrane_defaults() -> Self {
        PhysicalScales {
            x0: 2.7e-15,
            omega_m: 2.0 * std::f64::consts::PI * 211e3,
            c: crate::C_LIGHT,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0) || !(self.c > 0.0) {
            return Err(Error::InvalidInput(format!(
                "x0 and c must be positive, got x0 = {}, c = {}",
                self.x0, self.c
            )));
        }
        Ok(())
    }
}

/// Single-membrane reference couplings, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ReferenceCouplings {
    /// Linear reference `g₀⁽¹⁾ = (2ck/L)·ζ/√(1+ζ²)·x₀`.
    pub g0_1: f64,
    /// Quadratic reference `g₀⁽²⁾ = (2ck²/L)·ζ·x₀²`.
    pub g0_2: f64,
    /// Unit-reflectivity optimum `g = 2ckx₀/L`.
    pub g_opt: f64,
}

/// Evaluate the single-membrane references at wave number `k` in a cavity of
/// length `l`.
pub fn reference_couplings(
    k: f64,
    l: f64,
    zeta: f64,
    scales: &PhysicalScales,
) -> Result<ReferenceCouplings> {
    scales.validate()?;
    if !(l > 0.0) || !(k > 0.0) {
        return Err(Error::InvalidInput(format!("need k > 0 and L > 0, got k = {k}, L = {l}")));
    }
    let g_opt = 2.0 * scales.c * k * scales.x0 / l;
    Ok(ReferenceCouplings {
        g0_1: g_opt * zeta / (1.0 + zeta * zeta).sqrt(),
        g0_2: (2.0 * scales.c * k * k / l) * zeta * scales.x0 * scales.x0,
        g_opt,
    })
}

/// Default linear differentiation step: 1e-6 of the array spacing. Small
/// enough for O(h²) truncation to be negligible, large enough that the
/// ~1e-12-in-kd tracking noise floor does not dominate the differences.
pub fn default_step(spacing_d: f64) -> f64 {
    1e-6 * spacing_d
}

/// Default quadratic differentiation step: 1e-5 of the array spacing.
///
/// The second central difference shrinks ∝ h² while the tracking noise
/// floor stays put, so membranes with near-vanishing curvature drown at the
/// linear step; one decade more step buys two decades of signal while the
/// O(h²) truncation (further reduced by Richardson extrapolation) stays
/// negligible.
pub fn default_quadratic_step(spacing_d: f64) -> f64 {
    1e-5 * spacing_d
}

/// Differentiation steps for the two derivative orders, meters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DerivativeSteps {
    /// Step for the first derivative.
    pub linear_h: f64,
    /// Step for the second derivative; may differ (see
    /// [`default_quadratic_step`]) because second differences are far more
    /// noise-sensitive.
    pub quadratic_h: f64,
}

impl DerivativeSteps {
    /// The per-order defaults for an array of spacing `d`.
    pub fn from_spacing(spacing_d: f64) -> Self {
        DerivativeSteps {
            linear_h: default_step(spacing_d),
            quadratic_h: default_quadratic_step(spacing_d),
        }
    }

    /// One step for both orders (halves the number of trackings).
    pub fn uniform(step_h: f64) -> Self {
        DerivativeSteps { linear_h: step_h, quadratic_h: step_h }
    }

    fn validate(&self) -> Result<()> {
        if !(self.linear_h > 0.0) || !(self.quadratic_h > 0.0) {
            return Err(Error::InvalidInput(format!(
                "steps must be positive, got linear {} and quadratic {}",
                self.linear_h, self.quadratic_h
            )));
        }
        Ok(())
    }
}

/// Full coupling extraction result, ready for serialization.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CouplingReport {
    /// Refined resonance wave number, rad/m.
    pub resonance_k: f64,
    /// Optical frequency ω_c = c·k, rad/s.
    pub omega_c: f64,
    /// Stack indices of the membranes that were displaced.
    pub mobile_indices: Vec<usize>,
    /// Linear couplings g⁽¹⁾_j, rad/s, one per mobile membrane.
    pub g1_per_membrane: Vec<f64>,
    /// Quadratic couplings g⁽²⁾_j, rad/s.
    pub g2_per_membrane: Vec<f64>,
    /// Collective (root-sum-square) linear coupling, rad/s.
    pub g1_sin: f64,
    /// Collective quadratic coupling, rad/s.
    pub g2_sin: f64,
    pub g0_1: f64,
    pub g0_2: f64,
    pub g_opt: f64,
    /// `g1_sin / |g0_1|`: collective enhancement over the single-membrane
    /// linear reference (numerator is a root-sum-square, hence ≥ 0; the
    /// reference enters by magnitude so the ratio is a pure enhancement).
    pub enhancement_1: f64,
    /// `g2_sin / |g0_2|`.
    pub enhancement_2: f64,
}

/// Linear coupling of membrane `j` (stack index), rad/s.
pub fn linear_coupling(
    system: &SystemSpec,
    resonance_k: f64,
    j: usize,
    scales: &PhysicalScales,
    step_h: f64,
) -> Result<f64> {
    Ok(coupling_pair(system, resonance_k, j, scales, DerivativeSteps::uniform(step_h))?.0)
}

/// Quadratic coupling of membrane `j` (stack index), rad/s.
pub fn quadratic_coupling(
    system: &SystemSpec,
    resonance_k: f64,
    j: usize,
    scales: &PhysicalScales,
    step_h: f64,
) -> Result<f64> {
    Ok(coupling_pair(system, resonance_k, j, scales, DerivativeSteps::uniform(step_h))?.1)
}

/// Both couplings of membrane `j`: displacements ±h and ±h/2 per derivative
/// order, central differences, one Richardson level. When both orders use
/// one step the four trackings are shared.
pub fn coupling_pair(
    system: &SystemSpec,
    resonance_k: f64,
    j: usize,
    scales: &PhysicalScales,
    steps: DerivativeSteps,
) -> Result<(f64, f64)> {
    scales.validate()?;
    steps.validate()?;
    let with_context = |e: Error| -> Error {
        Error::TrackingLost {
            k0: resonance_k,
            detail: format!("while differentiating membrane {j}: {e}"),
        }
    };
    let k_at = |h: f64| -> Result<f64> {
        let displaced = system.displaced(j, h)?;
        track_resonance(system, resonance_k, &displaced).map_err(with_context)
    };
    let quad = |h: f64| -> Result<[f64; 4]> {
        Ok([k_at(h)?, k_at(-h)?, k_at(0.5 * h)?, k_at(-0.5 * h)?])
    };
    let k0 = track_resonance(system, resonance_k, system).map_err(with_context)?;
    let h1 = steps.linear_h;
    let [kp, km, kp2, km2] = quad(h1)?;
    let d1_full = (kp - km) / (2.0 * h1);
    let d1_half = (kp2 - km2) / h1;
    let d1 = crate::numeric::richardson(d1_full, d1_half);

    let h2 = steps.quadratic_h;
    let [qp, qm, qp2, qm2] =
        if h2 == h1 { [kp, km, kp2, km2] } else { quad(h2)? };
    let d2_full = (qp - 2.0 * k0 + qm) / (h2 * h2);
    let d2_half = (qp2 - 2.0 * k0 + qm2) / (0.25 * h2 * h2);
    let d2 = crate::numeric::richardson(d2_full, d2_half);

    Ok((scales.c * scales.x0 * d1, scales.c * scales.x0 * scales.x0 * d2))
}

/// Root-sum-square collective coupling.
pub fn collective_coupling(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Extract per-membrane and collective couplings for every membrane in
/// `mobile`, with references evaluated at the refined resonance against a
/// cavity of length `reference_l` and membrane polarizability
/// `reference_zeta`.
///
/// Per-membrane derivatives run in parallel; results are reduced in index
/// order so the output is deterministic.
pub fn couplings_report(
    system: &SystemSpec,
    mobile: &[usize],
    resonance_k: f64,
    reference_l: f64,
    reference_zeta: f64,
    scales: &PhysicalScales,
    steps: DerivativeSteps,
) -> Result<CouplingReport> {
    if mobile.is_empty() {
        return Err(Error::InvalidInput("no mobile membranes given".into()));
    }
    let k0 = track_resonance(system, resonance_k, system)?;
    let pairs: Vec<(f64, f64)> = mobile
        .par_iter()
        .map(|&j| coupling_pair(system, k0, j, scales, steps))
        .collect::<Result<_>>()?;
    let g1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let g2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let refs = reference_couplings(k0, reference_l, reference_zeta, scales)?;
    let g1_sin = collective_coupling(&g1);
    let g2_sin = collective_coupling(&g2);
    Ok(CouplingReport {
        resonance_k: k0,
        omega_c: scales.c * k0,
        mobile_indices: mobile.to_vec(),
        g1_per_membrane: g1,
        g2_per_membrane: g2,
        g1_sin,
        g2_sin,
        g0_1: refs.g0_1,
        g0_2: refs.g0_2,
        g_opt: refs.g_opt,
        enhancement_1: g1_sin / refs.g0_1.abs(),
        enhancement_2: g2_sin / refs.g0_2.abs(),
    })
}

/// Couplings of one array registration inside the cavity.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RegistrationPoint {
    /// Array offset from the centered registration, as a fraction of the
    /// half wavelength π/k of the seeded resonance.
    pub shift_fraction: f64,
    /// The same offset in meters.
    pub shift_m: f64,
    pub report: CouplingReport,
}

/// Result of a [`registration_scan`]: couplings repeat when the array slides
/// by half a wavelength, and reflection symmetry about the centered position
/// makes offsets `s` and `−s` equivalent, so fractions in [0, 1/2] cover
/// every distinct registration.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RegistrationScan {
    /// One entry per scanned offset, ascending in `shift_fraction`.
    pub points: Vec<RegistrationPoint>,
    /// Index into `points` of the largest collective linear coupling: the
    /// registration that realizes the maximum value the geometry allows,
    /// which is the natural operating point to quote.
    pub best: usize,
}

impl RegistrationScan {
    /// The maximizing registration.
    pub fn best_point(&self) -> &RegistrationPoint {
        &self.points[self.best]
    }
}

/// Scan `n_registrations` array offsets, uniform over fractions 0…1/2 of the
/// half wavelength π/`array_k`, and extract the full coupling report at each.
///
/// `array_k` seeds the resonance search: per offset, the compound resonance
/// nearest to it is located in a window just over half a free spectral
/// range (so a mode pushed up to half an FSR away from the seed is still
/// caught), then every array membrane is differentiated about it.
/// Registrations run in parallel; the output order is deterministic.
pub fn registration_scan(
    platform: &CavityPlatformSpec,
    array_k: f64,
    n_registrations: usize,
    scales: &PhysicalScales,
    steps: DerivativeSteps,
) -> Result<RegistrationScan> {
    if n_registrations == 0 {
        return Err(Error::InvalidInput("need at least one registration".into()));
    }
    if !(array_k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "seed wave number must be positive, got {array_k}"
        )));
    }
    let half_wavelength = std::f64::consts::PI / array_k;
    let mobile: Vec<usize> = platform.array_indices().collect();
    let fsr = std::f64::consts::PI / platform.cavity_length_l;
    let points: Vec<RegistrationPoint> = (0..n_registrations)
        .into_par_iter()
        .map(|i| {
            let shift_fraction = if n_registrations == 1 {
                0.0
            } else {
                0.5 * i as f64 / (n_registrations - 1) as f64
            };
            let shift_m = shift_fraction * half_wavelength;
            let system = platform.assemble_with_shift(shift_m)?;
            let k0 = nearest_resonance(array_k, &system, 0.55 * fsr)?;
            let report = couplings_report(
                &system,
                &mobile,
                k0,
                platform.cavity_length_l,
                platform.array.zeta,
                scales,
                steps,
            )?;
            Ok(RegistrationPoint { shift_fraction, shift_m, report })
        })
        .collect::<Result<_>>()?;
    let best = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.report.g1_sin.total_cmp(&b.1.report.g1_sin))
        .map(|(i, _)| i)
        .expect("non-empty by construction");
    Ok(RegistrationScan { points, best })
}

/// Closed-form sine-profile amplitude of the per-membrane linear couplings
/// of an equidistant array at its first transmissive point:
///
/// ```text
/// G = −2ω_c·x₀ · ζ·csc(π/N)[√(sin²(π/N)+ζ²) − ζ]
///     ─────────────────────────────────────────────
///     L − 2Ndζ·csc²(π/N)√(sin²(π/N)+ζ²)
/// ```
pub fn sine_amplitude(
    n: u32,
    kd: f64,
    zeta: f64,
    d: f64,
    l: f64,
    scales: &PhysicalScales,
) -> Result<f64> {
    scales.validate()?;
    if n < 2 {
        return Err(Error::InvalidInput(format!("profile needs at least 2 membranes, got {n}")));
    }
    let omega_c = scales.c * kd / d;
    let s = (std::f64::consts::PI / n as f64).sin();
    let root = (s * s + zeta * zeta).sqrt();
    let csc = 1.0 / s;
    let numerator = zeta * csc * (root - zeta);
    Ok(-2.0 * omega_c * scales.x0 * numerator / effective_cavity_length(n, zeta, d, l))
}

/// Exact denominator of the sine-amplitude closed form,
/// `L − 2Ndζ·csc²(π/N)√(sin²(π/N)+ζ²)`: the cavity length corrected for the
/// group delay of the array (reduces to `L + (2/π²)dζ²N³` at large `N|ζ|`).
pub fn effective_cavity_length(n: u32, zeta: f64, d: f64, l: f64) -> f64 {
    let s = (std::f64::consts::PI / n as f64).sin();
    let root = (s * s + zeta * zeta).sqrt();
    l - 2.0 * n as f64 * d * zeta * root / (s * s)
}

/// Expected per-membrane linear couplings `G·sin(2π(j−½)/N)`, `j = 1..N`.
pub fn sine_mode_profile(
    n: u32,
    kd: f64,
    zeta: f64,
    d: f64,
    l: f64,
    scales: &PhysicalScales,
) -> Result<Vec<f64>> {
    let g = sine_amplitude(n, kd, zeta, d, l, scales)?;
    Ok((1..=n)
        .map(|j| g * (2.0 * std::f64::consts::PI * (j as f64 - 0.5) / n as f64).sin())
        .collect())
}

/// Closed-form scaling of the collective linear coupling, in units of the
/// optimum `g`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScalingEstimates {
    /// Weak-scatterer limit `|ζ|√(N/2)` (valid for N|ζ|/π ≪ 1).
    pub weak_scatterer_ratio: f64,
    /// Strong-scatterer limit `(√2/π)ζ²N^{3/2}` (valid for N|ζ|/π ≫ 1).
    pub strong_scatterer_ratio: f64,
    /// Regime parameter N|ζ|/π; ≈ 1 marks the crossover.
    pub crossover: f64,
    /// `2(ζN/π)²`: when this exceeds 1, the array's group delay dominates
    /// the effective cavity length (`L_eff ≈ L + (2/π²)dζ²N³`) and the
    /// short-array approximations above it break down.
    pub validity_margin: f64,
    /// `validity_margin < 1`.
    pub valid: bool,
}

/// Closed-form scaling estimates for an `n`-membrane array of polarizability
/// `zeta`; ratios are relative to the single-membrane optimum `g`.
pub fn scaling_estimates(n: u32, zeta: f64) -> ScalingEstimates {
    let nf = n as f64;
    let margin = 2.0 * (zeta * nf / std::f64::consts::PI).powi(2);
    ScalingEstimates {
        weak_scatterer_ratio: zeta.abs() * (nf / 2.0).sqrt(),
        strong_scatterer_ratio: std::f64::consts::SQRT_2 / std::f64::consts::PI
            * zeta
            * zeta
            * nf.powf(1.5),
        crossover: nf * zeta.abs() / std::f64::consts::PI,
        validity_margin: margin,
        valid: margin < 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scales() -> PhysicalScales {
        PhysicalScales::membrane_defaults()
    }

    #[test]
    fn reference_ratio_matches_closed_form() {
        // g0_1/g_opt = ζ/√(1+ζ²) = −5/√26 at ζ = −5.
        let r = reference_couplings(0.87 * std::f64::consts::PI / 525e-9, 6.3e-2, -5.0, &scales())
            .unwrap();
        assert!((r.g0_1 / r.g_opt + 5.0 / 26.0f64.sqrt()).abs() < 1e-14);
        assert!(r.g_opt >= r.g0_1.abs());
    }

    #[test]
    fn reference_unit_reflectivity_limit() {
        let r = reference_couplings(1e7, 6.3e-2, -1e9, &scales()).unwrap();
        assert!((r.g0_1 / r.g_opt + 1.0).abs() < 1e-12, "|ζ|→∞ must reach −g_opt");
    }

    #[test]
    fn optimal_coupling_magnitude() {
        // L = 6.3 cm, kd/π ≈ 0.87, d = 525 nm, x0 = 2.7 fm → g ≈ 2π×(21–24) Hz.
        let k = 0.87 * std::f64::consts::PI / 525e-9;
        let r = reference_couplings(k, 6.3e-2, -5.0, &scales()).unwrap();
        let g_hz = r.g_opt / (2.0 * std::f64::consts::PI);
        assert!(g_hz > 21.0 && g_hz < 24.5, "g_opt = {g_hz} Hz");
    }

    #[test]
    fn collective_coupling_pythagoras() {
        assert!((collective_coupling(&[3.0, 4.0]) - 5.0).abs() < 1e-15);
        assert_eq!(collective_coupling(&[]), 0.0);
    }

    #[test]
    fn sine_profile_antisymmetric_pairs() {
        let p = sine_mode_profile(2, 0.5 * std::f64::consts::PI, -5.0, 525e-9, 6.3e-2, &scales())
            .unwrap();
        assert!((p[0] + p[1]).abs() < 1e-12 * p[0].abs());
    }

    #[test]
    fn sine_profile_sum_of_squares() {
        // Σ_j sin²(2π(j−½)/N) = N/2 for N ≥ 3. N = 2 is the lone exception
        // (both sites sit at antinodes, the sum is 2): the cross terms
        // Σ cos(4π(j−½)/N) only vanish when e^{i4π/N} ≠ 1.
        let sum_n = |n: u32| -> f64 {
            (1..=n)
                .map(|j| {
                    (2.0 * std::f64::consts::PI * (j as f64 - 0.5) / n as f64).sin().powi(2)
                })
                .sum()
        };
        for n in 3..=12u32 {
            assert!((sum_n(n) - n as f64 / 2.0).abs() < 1e-12, "N = {n}");
        }
        assert!((sum_n(2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_estimates_regimes() {
        let s = scaling_estimates(7, -5.0);
        let expect = std::f64::consts::SQRT_2 / std::f64::consts::PI * 25.0 * 7.0f64.powf(1.5);
        assert!((s.strong_scatterer_ratio - expect).abs() < 1e-12);
        assert!((expect - 208.4).abs() < 0.5, "strong-limit estimate ≈ 208, got {expect}");
        assert!(!s.valid);

        let weak = scaling_estimates(5, -0.5);
        assert!(!weak.valid, "N=5, ζ=−0.5 already violates 2(ζN/π)² < 1");
        assert!((weak.validity_margin - 2.0 * (2.5 / std::f64::consts::PI).powi(2)).abs() < 1e-12);

        let tiny = scaling_estimates(2, -0.1);
        assert!(tiny.valid);
        assert!((tiny.weak_scatterer_ratio - 0.1).abs() < 1e-12);
    }

    #[test]
    fn effective_length_reduces_to_cubic_estimate() {
        // Large N|ζ|: L_eff − L → (2/π²)dζ²N³ (relative to the N³ term).
        let n = 40u32;
        let zeta = -8.0;
        let d = 500e-9;
        let l = 1e-2;
        let exact = effective_cavity_length(n, zeta, d, l) - l;
        let estimate = 2.0 / std::f64::consts::PI.powi(2)
            * d
            * zeta
            * zeta
            * (n as f64).powi(3);
        assert!(
            ((exact - estimate) / estimate).abs() < 0.05,
            "exact = {exact:.6e}, estimate = {estimate:.6e}"
        );
    }
}
