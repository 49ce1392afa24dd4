//! Analytic model of a cavity bounded by two periodic-array mirrors, and the
//! side-spacing tuning search that aligns its resonances with those of a
//! defect array placed inside.
//!
//! Each side array of `N_m` membranes (polarizability ζ_m, spacing d_m) acts
//! as one dispersive mirror with polarizability `χ_m(k) = ζ_m·U_{N_m−1}(a_m)`
//! and phase `μ_m(k)`. Two such mirrors a distance `D` apart transmit
//!
//! ```text
//! T(k) = 1 / |e^{−i(kD+2μ_m)}(1−iχ_m)² + e^{ikD}·χ_m²|²
//! ```
//!
//! High-finesse resonances exist where the side mirror is in a band gap
//! (`|a_m| > 1`); their wave numbers follow the phase condition
//! `k⁽ⁿ⁾D + μ_m(k⁽ⁿ⁾) = nπ` (exactly: `χ_m·tan(kD+μ_m) = 1`, which the
//! phase condition approaches as χ_m → ∞). Resonance crossings found while
//! scanning d_m tune the compound crystal onto a defect-array resonance.

use rayon::prelude::*;

use crate::chebyshev::{dispersion_functions, effective_mirror, EffectiveMirror};
use crate::coupling::{couplings_report, CouplingReport, DerivativeSteps, PhysicalScales};
use crate::error::{Error, Result};
use crate::geometry::CrystalSpec;
use crate::numeric::find_root_bracketed;
use crate::resonance::{track_resonance_windowed, transmissive_roots_symmetric};

/// Geometry of one periodic side mirror.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SideMirrorSpec {
    /// Number of membranes per side, N_m ≥ 1.
    pub n_side: u32,
    /// Side-membrane polarizability ζ_m.
    pub zeta_m: f64,
    /// Side-array spacing d_m, meters.
    pub d_m: f64,
}

/// Cavity of length `D` between two identical effective array mirrors.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SuperCavityModel {
    /// Distance between the innermost membranes of the two side mirrors, m.
    pub length_d: f64,
    pub side: SideMirrorSpec,
}

impl SuperCavityModel {
    /// Effective mirror of one side array at wave number `k` (principal μ).
    pub fn mirror(&self, k: f64) -> Result<EffectiveMirror> {
        effective_mirror(self.side.n_side, self.side.zeta_m, k * self.side.d_m)
    }

    /// True when `k` lies in a band gap of the side mirror (`|a_m| > 1`):
    /// the regime where the cavity is well defined and high-finesse.
    pub fn in_gap(&self, k: f64) -> bool {
        dispersion_functions(k * self.side.d_m, self.side.zeta_m).a.abs() > 1.0
    }
}

/// Empty-cavity transmission at wave number `k` for cavity length `d_cavity`
/// and the given effective mirror.
pub fn empty_transmission(k: f64, d_cavity: f64, mirror: &EffectiveMirror) -> f64 {
    let i = num_complex::Complex64::I;
    let chi = mirror.chi;
    let phase2 = mirror.phase * mirror.phase; // e^{2iμ}
    let denom = (-i * k * d_cavity).exp() / phase2 * (1.0 - i * chi) * (1.0 - i * chi)
        + (i * k * d_cavity).exp() * chi * chi;
    1.0 / denom.norm_sqr()
}

/// Finesse and linewidth of the cavity formed by two mirrors of
/// polarizability χ, with a validity flag for the dispersionless-mirror
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FinesseEstimate {
    /// `F = |χ|√(1+χ²)` (≈ χ² for large |χ|).
    pub finesse: f64,
    /// Linewidth in k, `κ = π/(D·F)`, rad/m.
    pub linewidth_k: f64,
    /// Free spectral range `π/D`, rad/m; `F·κ = k_FSR` identically.
    pub k_fsr: f64,
    /// False when |χ| < 3: the high-reflectivity assumption behind the
    /// estimate is then unreliable.
    pub valid: bool,
}

/// Mirror-polarizability finesse estimate: `F = |χ|√(1+χ²)`.
pub fn finesse(mirror: &EffectiveMirror) -> f64 {
    mirror.chi.abs() * (1.0 + mirror.chi * mirror.chi).sqrt()
}

/// Linewidth/finesse/FSR bundle for cavity length `d_cavity`.
pub fn linewidth(mirror: &EffectiveMirror, d_cavity: f64) -> FinesseEstimate {
    let f = finesse(mirror);
    let k_fsr = std::f64::consts::PI / d_cavity;
    FinesseEstimate {
        finesse: f,
        linewidth_k: k_fsr / f,
        k_fsr,
        valid: mirror.chi.abs() >= 3.0,
    }
}

/// Which resonance condition a series solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SeriesMode {
    /// `kD + μ_m = nπ` — the χ_m → ∞ limit of the peak condition.
    PhaseCondition,
    /// `χ_m·tan(kD + μ_m) = 1` — exact unit-transmission points of the
    /// empty-cavity transmission.
    ExactPeak,
}

/// One root of the resonance series.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SeriesRoot {
    /// Series index n (φ crosses nπ).
    pub n: i64,
    /// Root wave number, rad/m.
    pub k: f64,
    /// `k·d_m/π` report coordinate.
    pub kd_m_over_pi: f64,
    /// Side mirror in a band gap at this k (high finesse, model valid).
    pub in_gap: bool,
    /// True for a "fake" resonance: the phase condition crosses nπ inside a
    /// side-mirror band, where the cavity has low finesse and the series
    /// equation does not describe a real sharp resonance.
    pub fake: bool,
    pub mode: SeriesMode,
}

/// Solve the resonance series `n ∈ n_range` on `(0, k_max]`.
///
/// Marches k with the mirror phase μ_m unwrapped continuously from μ_m(0) = 0,
/// brackets each crossing of the phase function, and refines by bisection.
/// The trivial root k⁽⁰⁾ = 0 is excluded. Every crossing found for an n is
/// returned (a non-monotone phase may cross one level more than once);
/// an n whose level is inside the swept phase range but never bracketed is
/// reported as a missing root.
pub fn resonance_series(
    model: &SuperCavityModel,
    n_range: std::ops::RangeInclusive<i64>,
    k_max: f64,
    mode: SeriesMode,
) -> Result<Vec<SeriesRoot>> {
    if !(k_max > 0.0) {
        return Err(Error::InvalidInput(format!("k_max must be positive, got {k_max}")));
    }
    if *n_range.start() < 1 {
        return Err(Error::InvalidInput(
            "series indices start at n = 1 (k⁽⁰⁾ = 0 is the trivial root)".into(),
        ));
    }
    let d_cavity = model.length_d;
    let side = model.side;
    // Step fine enough that both kD and μ_m advance ≪ π between samples:
    // μ_m accumulates roughly like a group delay N_m·d_m per mirror.
    let phase_scale = d_cavity + 2.0 * side.n_side as f64 * side.d_m;
    let samples = ((k_max * phase_scale / 0.05).ceil() as usize).clamp(1000, 2_000_000);
    let k_lo = k_max * 1e-9;

    // φ(k) = kD + μ_m(k) (− arctan(1/χ) in exact-peak mode).
    let phi_at = |k: f64, mu_prev: f64| -> Result<(f64, f64)> {
        let m = effective_mirror_unwrapped_at(side, k, mu_prev)?;
        let offset = match mode {
            SeriesMode::PhaseCondition => 0.0,
            SeriesMode::ExactPeak => (1.0 / m.chi).atan(),
        };
        Ok((k * d_cavity + m.mu - offset, m.mu))
    };

    let mut roots: Vec<SeriesRoot> = Vec::new();
    let mut mu_prev = 0.0;
    let (mut phi_prev, mut k_prev) = {
        let (phi, mu) = phi_at(k_lo, mu_prev)?;
        mu_prev = mu;
        (phi, k_lo)
    };
    let mut phi_min = phi_prev;
    let mut phi_max = phi_prev;
    for i in 1..=samples {
        let k = k_lo + (k_max - k_lo) * i as f64 / samples as f64;
        let (phi, mu) = phi_at(k, mu_prev)?;
        phi_min = phi_min.min(phi);
        phi_max = phi_max.max(phi);
        // A jump of order π means we stepped across an arctan branch (χ sign
        // change, in-band); no real crossing is bracketed there.
        let continuous = (phi - phi_prev).abs() < 0.5 * std::f64::consts::PI;
        for n in n_range.clone() {
            let level = n as f64 * std::f64::consts::PI;
            if continuous && (phi_prev - level) * (phi - level) <= 0.0 && phi_prev != level {
                let anchor = mu_prev;
                let root = find_root_bracketed(
                    |kk| {
                        phi_at(kk, anchor).map(|(p, _)| p - level).unwrap_or(f64::NAN)
                    },
                    k_prev,
                    k,
                    1e-15 * k_max,
                )?;
                roots.push(SeriesRoot {
                    n,
                    k: root,
                    kd_m_over_pi: root * side.d_m / std::f64::consts::PI,
                    in_gap: model_in_gap(side, root),
                    fake: !model_in_gap(side, root),
                    mode,
                });
            }
        }
        phi_prev = phi;
        mu_prev = mu;
        k_prev = k;
    }
    // Report the first n whose level was swept but never crossed (should not
    // happen for a continuous φ; guards against over-coarse marching).
    for n in n_range {
        let level = n as f64 * std::f64::consts::PI;
        if level > phi_min && level < phi_max && !roots.iter().any(|r| r.n == n) {
            return Err(Error::MissingRoot { n });
        }
    }
    roots.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(roots)
}

fn model_in_gap(side: SideMirrorSpec, k: f64) -> bool {
    dispersion_functions(k * side.d_m, side.zeta_m).a.abs() > 1.0
}

fn effective_mirror_unwrapped_at(
    side: SideMirrorSpec,
    k: f64,
    mu_prev: f64,
) -> Result<EffectiveMirror> {
    crate::chebyshev::effective_mirror_unwrapped(side.n_side, side.zeta_m, k * side.d_m, mu_prev)
}

/// Residual and validity flags of the simplified resonance equation
/// `tan(k·d_m) = ζ_m[(−1)ⁿ·cos(k(d_m − D)) − 1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ApproxResonance {
    /// `tan(kd_m) − ζ_m[(−1)ⁿcos(k(d_m−D)) − 1]`; ≈ 0 at an approximate root.
    pub residual: f64,
    /// First validity condition: `|arccos(a_m)| ≪ 1/N_m` (deep in a gap the
    /// magnitude of the complex arccos, i.e. arccosh|a_m|, is used).
    pub validity_arccos: bool,
    /// Second validity condition: `|ζ_m| > (1 − cos kd_m)/sin kd_m`.
    pub validity_zeta: bool,
}

/// Evaluate the simplified resonance equation at `(k, n)`. Violated validity
/// conditions flag the result; the residual is still returned.
pub fn approx_resonance_equation(
    model: &SuperCavityModel,
    k: f64,
    n: i64,
) -> ApproxResonance {
    let side = model.side;
    let kdm = k * side.d_m;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let residual = kdm.tan() - side.zeta_m * (sign * (k * (side.d_m - model.length_d)).cos() - 1.0);
    let a = dispersion_functions(kdm, side.zeta_m).a;
    let arccos_mag = if a.abs() <= 1.0 { a.acos().abs() } else { a.abs().acosh() };
    let bound = (1.0 - kdm.cos()) / kdm.sin();
    ApproxResonance {
        residual,
        validity_arccos: arccos_mag < 1.0 / side.n_side as f64,
        validity_zeta: side.zeta_m.abs() > bound.abs(),
    }
}

/// Deviation of the spacing of series roots `i`, `j` from an integer number
/// of free spectral ranges.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FsrDeviation {
    /// Δ_{(i,j)}: the real part of the closed-form logarithm.
    pub delta: f64,
    /// Imaginary residual of that logarithm (0 for exact unit-transmission
    /// roots; grows when the roots drift off the true peaks).
    pub delta_imag: f64,
}

/// Closed-form FSR deviation
/// `Δ_{(i,j)} = (1/iD)·log[(1 − e^{ik_i d_m}·ρ_i)/(1 − e^{ik_j d_m}·ρ_j)]`
/// with `ρ = U_{N_m−2}(a_m)/[(1−iζ_m)U_{N_m−1}(a_m)]`, which satisfies
/// `k_i − k_j = (i−j)π/D + Δ_{(i,j)}` at the exact resonance wave numbers.
pub fn fsr_deviation(model: &SuperCavityModel, k_i: f64, k_j: f64) -> Result<FsrDeviation> {
    let term = |k: f64| -> Result<num_complex::Complex64> {
        let side = model.side;
        let a = dispersion_functions(k * side.d_m, side.zeta_m).a;
        let u1 = crate::chebyshev::chebyshev_u_i64(side.n_side as i64 - 1, a);
        let u2 = crate::chebyshev::chebyshev_u_i64(side.n_side as i64 - 2, a);
        let i = num_complex::Complex64::I;
        let denom = (1.0 - i * side.zeta_m) * u1;
        if denom.norm() < crate::tol::DEGENERATE_M22 {
            return Err(Error::DegeneratePoint { kd: k * side.d_m });
        }
        Ok(1.0 - (i * k * side.d_m).exp() * u2 / denom)
    };
    let i = num_complex::Complex64::I;
    let log = (term(k_i)? / term(k_j)?).ln() / (i * model.length_d);
    Ok(FsrDeviation { delta: log.re, delta_imag: log.im })
}

/// One aligned operating point found by the side-spacing scan.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TuneIntersection {
    /// Side spacing at which the cavity resonance meets the array resonance.
    pub d_m: f64,
    /// Cavity series index.
    pub n: i64,
    /// The shared wave number (the defect-array resonance), rad/m.
    pub k: f64,
    pub kd_m_over_pi: f64,
    /// Side mirror in a band gap at (k, d_m): the operating point sits in a
    /// high-finesse region.
    pub in_gap: bool,
    /// Full-crystal resonance including the extra mirror phase of the
    /// outermost array membranes (side count N_m → N_m+1, cavity = array
    /// span), rad/m; NaN when no nearby root exists.
    pub shifted_k: f64,
    /// Brute-force check: assembled-crystal transmission at the refined peak
    /// near `shifted_k` exceeds 0.99.
    pub validated: bool,
    /// Refined full-crystal peak wave number, rad/m.
    pub crystal_k: f64,
    /// Transmission at `crystal_k`.
    pub crystal_t: f64,
}

/// Configuration for [`tune_side_spacing`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TuneConfig {
    /// Scanned side-spacing range, meters.
    pub dm_lo: f64,
    pub dm_hi: f64,
    /// Scan resolution (default 400).
    pub dm_steps: usize,
    /// Cavity series indices to intersect.
    pub n_lo: i64,
    pub n_hi: i64,
    /// Wave-number window in which to search for inner-array resonances.
    pub k_lo: f64,
    pub k_hi: f64,
    /// Coarse samples for the array-resonance root scan.
    pub array_samples: usize,
}

/// Scan the side spacing d_m for values where an empty-cavity resonance
/// k⁽ⁿ⁾(d_m) crosses a transmissive resonance of the inner defect array
/// (which does not depend on d_m), refine each crossing, and validate it on
/// the fully assembled crystal.
///
/// For fixed array resonance k_a the cavity condition becomes a root problem
/// in d_m alone: `k_a·(D_in + 2d_m) + μ_m(k_a·d_m) = nπ`, with `D_in` the
/// inner-array span (the cavity length is the span plus the two edge gaps).
/// Intersections are returned for every (n, crossing), ordered by (n, d_m),
/// each flagged with the band-gap validity of its operating point; an empty
/// result is not an error.
pub fn tune_side_spacing(crystal: &CrystalSpec, config: &TuneConfig) -> Result<Vec<TuneIntersection>> {
    if !(config.dm_lo > 0.0) || !(config.dm_hi > config.dm_lo) {
        return Err(Error::InvalidInput(format!(
            "need 0 < dm_lo < dm_hi, got [{}, {}]",
            config.dm_lo, config.dm_hi
        )));
    }
    if config.dm_steps < 2 || config.array_samples < 3 {
        return Err(Error::InvalidInput("scan resolutions too coarse".into()));
    }
    let inner_positions = crystal.inner.positions()?;
    let d_in = inner_positions.last().unwrap() - inner_positions.first().unwrap();
    let inner_system = crystal.inner.system()?;
    let array_roots = transmissive_roots_symmetric(
        &inner_system,
        config.k_lo,
        config.k_hi,
        config.array_samples,
        1e-12 / crystal.inner.spacing_d,
    )?;

    let side_of = |d_m: f64| SideMirrorSpec {
        n_side: crystal.n_side as u32,
        zeta_m: crystal.side_zeta,
        d_m,
    };

    let mut intersections: Vec<TuneIntersection> = array_roots
        .par_iter()
        .map(|&k_a| -> Result<Vec<TuneIntersection>> {
            let mut found = Vec::new();
            // g(d_m; n) = k_a(D_in + 2d_m) + μ_m(k_a·d_m) − nπ, marched over
            // d_m with μ unwrapped along the march.
            let mut mu_prev = 0.0;
            let mut g_prev = f64::NAN;
            let mut dm_prev = config.dm_lo;
            for s in 0..=config.dm_steps {
                let d_m = config.dm_lo
                    + (config.dm_hi - config.dm_lo) * s as f64 / config.dm_steps as f64;
                let m = effective_mirror_unwrapped_at(side_of(d_m), k_a, mu_prev)?;
                let g = k_a * (d_in + 2.0 * d_m) + m.mu;
                if s > 0 {
                    for n in config.n_lo..=config.n_hi {
                        let level = n as f64 * std::f64::consts::PI;
                        if (g_prev - level) * (g - level) <= 0.0 && g_prev != level {
                            let anchor = mu_prev;
                            let root = find_root_bracketed(
                                |dm| {
                                    effective_mirror_unwrapped_at(side_of(dm), k_a, anchor)
                                        .map(|mm| k_a * (d_in + 2.0 * dm) + mm.mu - level)
                                        .unwrap_or(f64::NAN)
                                },
                                dm_prev,
                                d_m,
                                1e-12,
                            )?;
                            found.push(intersection_at(crystal, d_in, k_a, n, root)?);
                        }
                    }
                }
                mu_prev = m.mu;
                g_prev = g;
                dm_prev = d_m;
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    intersections.sort_by(|a, b| (a.n, a.d_m).partial_cmp(&(b.n, b.d_m)).unwrap());
    Ok(intersections)
}

/// Assemble, shift, and validate one (k_a, n, d_m) crossing.
fn intersection_at(
    crystal: &CrystalSpec,
    d_in: f64,
    k_a: f64,
    n: i64,
    d_m: f64,
) -> Result<TuneIntersection> {
    let side_plus = SideMirrorSpec {
        n_side: crystal.n_side as u32 + 1,
        zeta_m: crystal.side_zeta,
        d_m,
    };
    // Red-triangle shift: the crystal's effective mirrors include the
    // outermost array membranes (N_m+1 elements), and the cavity shrinks to
    // the array span itself. Solve k·D_in + μ_{N_m+1}(k·d_m) = nπ near k_a.
    let level = n as f64 * std::f64::consts::PI;
    let mu_a = effective_mirror_unwrapped_at(side_plus, k_a, 0.0)?.mu;
    // Choose the branch of μ that puts k_a closest to the condition.
    let branch = ((level - k_a * d_in - mu_a) / (2.0 * std::f64::consts::PI)).round();
    let mu_anchor = mu_a + 2.0 * std::f64::consts::PI * branch;
    let local = |k: f64| -> f64 {
        effective_mirror_unwrapped_at(side_plus, k, mu_anchor)
            .map(|m| k * d_in + m.mu - level)
            .unwrap_or(f64::NAN)
    };
    let window = 0.25 * std::f64::consts::PI / (d_in + 2.0 * d_m);
    let shifted_k = match find_root_bracketed(local, k_a - window, k_a + window, 1e-15 * k_a) {
        Ok(k) => k,
        Err(_) => f64::NAN,
    };

    // Brute-force validation on the fully assembled crystal.
    let tuned = CrystalSpec { side_spacing: d_m, ..*crystal };
    let stack = tuned.assemble()?;
    let seed = if shifted_k.is_finite() { shifted_k } else { k_a };
    let (crystal_k, crystal_t) = match track_resonance_windowed(seed, &stack, 2.0 * window) {
        Ok(k) => (k, crate::tmat::chain(&stack, k)?.transmission()?),
        Err(_) => (f64::NAN, 0.0),
    };
    let side = SideMirrorSpec {
        n_side: crystal.n_side as u32,
        zeta_m: crystal.side_zeta,
        d_m,
    };
    Ok(TuneIntersection {
        d_m,
        n,
        k: k_a,
        kd_m_over_pi: k_a * d_m / std::f64::consts::PI,
        in_gap: model_in_gap(side, k_a),
        shifted_k,
        validated: crystal_t > 0.99,
        crystal_k,
        crystal_t,
    })
}

/// Coupling report of a tuned crystal plus the light-localization estimate.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CrystalCouplings {
    pub report: CouplingReport,
    /// `(c·k/D_cav)·x₀` with `D_cav` the cavity length (array span plus the
    /// two edge gaps): the coupling scale expected from a light mode
    /// localized over the cavity, rad/s.
    pub localization_estimate: f64,
    /// Cavity length used for the estimate and the references, meters.
    pub cavity_length: f64,
}

/// Extract couplings on the assembled crystal at a tuned resonance; the
/// inner-array membranes move one at a time, the side arrays stay frozen in
/// their role as the confining mirrors.
pub fn crystal_couplings(
    crystal: &CrystalSpec,
    resonance_k: f64,
    scales: &PhysicalScales,
    steps: DerivativeSteps,
) -> Result<CrystalCouplings> {
    let stack = crystal.assemble()?;
    let inner_positions = crystal.inner.positions()?;
    let d_in = inner_positions.last().unwrap() - inner_positions.first().unwrap();
    let cavity_length = d_in + 2.0 * crystal.side_spacing;
    let mobile: Vec<usize> = crystal.mobile_indices().collect();
    let report = couplings_report(
        &stack,
        &mobile,
        resonance_k,
        cavity_length,
        crystal.inner.zeta,
        scales,
        steps,
    )?;
    Ok(CrystalCouplings {
        localization_estimate: scales.c * report.resonance_k / cavity_length * scales.x0,
        cavity_length,
        report,
    })
}
