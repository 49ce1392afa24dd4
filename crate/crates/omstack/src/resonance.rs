//! Reflectivity spectra, transmissive points, and resonance tracking.
//!
//! Transmissive points (unit transmission, zero reflectivity) of a lossless
//! stack are the working points of every platform here. Two finders coexist:
//!
//! - [`find_transmissive_points`]: grid scan → local minima of R below a
//!   threshold → golden-section refinement. Works for any stack, but only
//!   resolves dips wider than the grid step.
//! - [`transmissive_roots_symmetric`]: for mirror-symmetric stacks `m12(k)`
//!   is purely imaginary, so unit-transmission points are sign-change roots
//!   of `Im m12` — bracketed root finding then nails needle resonances of
//!   arbitrarily high finesse that any practical grid would miss.
//!
//! [`track_resonance`] follows one resonance under a small membrane
//! displacement by minimizing `log|m22|` in a trust window that starts far
//! below the free spectral range and widens only when the minimum keeps
//! landing at the window edge, capped below half an FSR so it can never hop
//! to a neighboring mode.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{find_root_bracketed, minimize_golden};
use crate::tmat::{chain, SystemSpec};

/// Default reflectivity threshold below which a sampled dip counts as a
/// transmissive-point candidate.
pub const DEFAULT_REFLECTIVITY_THRESHOLD: f64 = 0.5;

/// Default number of samples per band when scanning a spectrum.
pub const DEFAULT_SAMPLES_PER_BAND: usize = 4000;

/// Sampled reflection/transmission spectrum over a wave-number grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Wave numbers, rad/m, strictly increasing.
    pub k: Vec<f64>,
    /// Report coordinate `k·d/π` for the reference spacing `report_spacing`.
    pub kd_over_pi: Vec<f64>,
    pub reflectivity: Vec<f64>,
    pub transmission: Vec<f64>,
    /// Spacing `d` used for the `kd/π` report coordinate, meters.
    pub report_spacing: f64,
}

/// Scan R(k), T(k) over `samples` evenly spaced wave numbers.
pub fn scan_spectrum(
    system: &SystemSpec,
    k_min: f64,
    k_max: f64,
    samples: usize,
    report_spacing: f64,
) -> Result<Spectrum> {
    if !(k_min > 0.0) || !(k_max > k_min) {
        return Err(Error::InvalidInput(format!(
            "need 0 < k_min < k_max, got [{k_min}, {k_max}]"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {samples}")));
    }
    if !(report_spacing > 0.0) {
        return Err(Error::InvalidInput(format!(
            "report spacing must be positive, got {report_spacing}"
        )));
    }
    let k: Vec<f64> = (0..samples)
        .map(|i| k_min + (k_max - k_min) * i as f64 / (samples - 1) as f64)
        .collect();
    let rt: Vec<(f64, f64)> = k
        .par_iter()
        .map(|&ki| {
            let m = chain(system, ki)?;
            Ok((m.reflectivity()?, m.transmission()?))
        })
        .collect::<Result<_>>()?;
    let kd_over_pi = k.iter().map(|ki| ki * report_spacing / std::f64::consts::PI).collect();
    Ok(Spectrum {
        k,
        kd_over_pi,
        reflectivity: rt.iter().map(|x| x.0).collect(),
        transmission: rt.iter().map(|x| x.1).collect(),
        report_spacing,
    })
}

/// What produced a resonance entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonanceKind {
    /// Zero of the reflectivity of a bare membrane array.
    ArrayTransmissive,
    /// Transmission maximum of an array-in-cavity stack.
    CompoundCavity,
    /// Transmission maximum of a stack bounded by array mirrors.
    Supercavity,
}

/// One refined transmissive point.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Resonance {
    /// Refined wave number, rad/m.
    pub k: f64,
    /// `k·d/π` in the spectrum's report spacing.
    pub kd_over_pi: f64,
    /// `⌊kd/π⌋`: which π-interval of the report coordinate the point lies in.
    pub band_index: i64,
    /// Position among the points of the same band, ascending in k, 1-based.
    pub order_in_band: usize,
    /// Reflectivity at the refined minimum.
    pub residual_reflectivity: f64,
    pub kind: ResonanceKind,
    /// True when two modes have merged below grid resolution: such a point is
    /// reported as two entries with identical k, both flagged. Detected from
    /// the dip shape — reflectivity rising quartically (not quadratically)
    /// away from a zero on the axis — or from a dip floor that cannot reach
    /// zero, which for a lossless stack marks a pair pushed off the real
    /// axis.
    pub degenerate: bool,
    /// True when the residual reflectivity reached the unit-transmission
    /// tolerance; false marks a shallow dip kept as a coalesced-pair
    /// candidate rather than being dropped.
    pub refined: bool,
}

/// [`find_transmissive_points_with`] at the default 0.5 threshold.
pub fn find_transmissive_points(spectrum: &Spectrum, system: &SystemSpec) -> Result<Vec<Resonance>> {
    find_transmissive_points_with(spectrum, system, DEFAULT_REFLECTIVITY_THRESHOLD)
}

/// Locate local minima of the sampled reflectivity below `threshold` and
/// refine each by golden-section search on R(k) between its grid neighbors.
///
/// Refinement runs to `kd` resolution [`crate::tol::REFINE_KD`]; points whose
/// refined reflectivity stays above [`crate::tol::TRANSMISSIVE_R`] are
/// reported with `refined = false` instead of being dropped, so callers can
/// distinguish "no dip" from "dip that is not a true zero".
pub fn find_transmissive_points_with(
    spectrum: &Spectrum,
    system: &SystemSpec,
    threshold: f64,
) -> Result<Vec<Resonance>> {
    let r = &spectrum.reflectivity;
    if r.len() != spectrum.k.len() || r.len() < 3 {
        return Err(Error::InvalidInput("spectrum too short for minimum detection".into()));
    }
    let reflect = |k: f64| -> f64 {
        chain(system, k).and_then(|m| m.reflectivity()).unwrap_or(f64::INFINITY)
    };
    // Grid local minima below threshold. The strict left comparison keeps
    // only the leftmost point of a flat (noise-floor) plateau.
    let mut candidates: Vec<usize> = Vec::new();
    for i in 1..r.len() - 1 {
        if r[i] < threshold && r[i] < r[i - 1] && r[i] <= r[i + 1] {
            candidates.push(i);
        }
    }

    let k_tol = crate::tol::REFINE_KD / spectrum.report_spacing;
    let mut refined_points: Vec<(f64, f64)> = Vec::with_capacity(candidates.len());
    for &i in &candidates {
        refined_points.push(minimize_golden(reflect, spectrum.k[i - 1], spectrum.k[i + 1], k_tol));
    }
    refined_points.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Collapse numerical duplicates: neighboring grid minima of one wide dip
    // that converged to the same zero.
    refined_points.dedup_by(|b, a| (b.0 - a.0).abs() < 100.0 * k_tol);

    let grid_step = spectrum.k[1] - spectrum.k[0];
    let mut out = Vec::with_capacity(refined_points.len());
    for &(k_star, r_star) in &refined_points {
        let refined = r_star < crate::tol::TRANSMISSIVE_R;
        // Dip-shape exponent: R grows as (k−k*)² away from a simple zero and
        // as (k−k*)⁴ away from a doubly-degenerate one, so
        // R(2δ)/R(δ) ≈ 4 vs ≈ 16. Probe at one and two grid steps.
        let r1 = 0.5 * (reflect(k_star - grid_step) + reflect(k_star + grid_step));
        let r2 = 0.5 * (reflect(k_star - 2.0 * grid_step) + reflect(k_star + 2.0 * grid_step));
        let exponent = if r1 > r_star.max(1e-300) && r2 > r1 {
            (r2 / r1).log2()
        } else {
            2.0
        };
        // Two signatures of a coalesced doubly-degenerate pair: quartic
        // growth away from a zero that still touches R = 0 (two zeros merged
        // exactly on the axis), or a dip floor that stays above the
        // unit-transmission tolerance. The latter because for a lossless
        // stack |m22|² = 1 + |m12|², so a reflectivity minimum that fails to
        // reach zero is |m12| grazing past zero — the pair of real zeros it
        // replaces has merged and moved off the real axis.
        let degenerate = exponent > 3.0 || !refined;
        let entry = Resonance {
            k: k_star,
            kd_over_pi: k_star * spectrum.report_spacing / std::f64::consts::PI,
            band_index: (k_star * spectrum.report_spacing / std::f64::consts::PI).floor() as i64,
            order_in_band: 0,
            residual_reflectivity: r_star,
            kind: ResonanceKind::ArrayTransmissive,
            degenerate,
            refined,
        };
        out.push(entry);
        if degenerate {
            // Two modes merged below grid resolution: report both.
            out.push(entry);
        }
    }
    let mut per_band = std::collections::HashMap::new();
    for res in &mut out {
        let slot = per_band.entry(res.band_index).or_insert(0usize);
        *slot += 1;
        res.order_in_band = *slot;
    }
    Ok(out)
}

/// Unit-transmission wave numbers of a mirror-symmetric lossless stack on
/// `(k_lo, k_hi)`, found as sign-change roots of `Im m12(k)` on a coarse grid
/// and polished by bracketed root finding to `k_tol`.
///
/// For a stack symmetric about its center, `m12` is purely imaginary, so its
/// zeros — exactly the R = 0 points — are honest sign changes that bracketed
/// root finding resolves regardless of linewidth. Returns an error if the
/// stack is detectably asymmetric (`|Re m12|` comparable to `|m12|`).
pub fn transmissive_roots_symmetric(
    system: &SystemSpec,
    k_lo: f64,
    k_hi: f64,
    coarse_samples: usize,
    k_tol: f64,
) -> Result<Vec<f64>> {
    if !(k_lo > 0.0) || !(k_hi > k_lo) {
        return Err(Error::InvalidInput(format!(
            "need 0 < k_lo < k_hi, got [{k_lo}, {k_hi}]"
        )));
    }
    if coarse_samples < 3 {
        return Err(Error::InvalidInput("need at least 3 coarse samples".into()));
    }
    let f = |k: f64| -> Result<f64> {
        let m = chain(system, k)?;
        if m.m12.re.abs() > 1e-6 * m.m12.norm().max(1e-12) && m.m12.norm() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "stack is not mirror-symmetric at k = {k}: Re m12 = {:.3e}, |m12| = {:.3e}",
                m.m12.re,
                m.m12.norm()
            )));
        }
        Ok(m.m12.im)
    };
    let mut roots = Vec::new();
    let mut prev_k = k_lo;
    let mut prev_f = f(prev_k)?;
    for i in 1..coarse_samples {
        let ki = k_lo + (k_hi - k_lo) * i as f64 / (coarse_samples - 1) as f64;
        let fi = f(ki)?;
        if prev_f == 0.0 {
            roots.push(prev_k);
        } else if prev_f * fi < 0.0 {
            let r = find_root_bracketed(|k| f(k).unwrap_or(f64::NAN), prev_k, ki, k_tol)?;
            roots.push(r);
        }
        prev_k = ki;
        prev_f = fi;
    }
    if prev_f == 0.0 {
        roots.push(prev_k);
    }
    Ok(roots)
}

/// Window in `kd` spanned by the transmissive points of one band of an
/// `n`-element equidistant array.
///
/// Unit transmission occurs where `U_{N−1}(a) = 0`, i.e. `a = cos(mπ/N)`.
/// Writing `a(kd) = √(1+ζ²)·cos(kd + atan ζ)`, each band is centered on
/// `c = bπ + π/2 − atan ζ` (where `a = 0`) and its outermost zeros
/// (`m = 1` and `m = N−1`) lie at `c ∓ h` with
/// `h = π/2 − arccos(cos(π/N)/√(1+ζ²))`.
///
/// All `N − 1` transmissive points of the band lie inside the returned
/// `(kd_lo, kd_hi)` interval, which pads the outermost zeros by 1e-9 so
/// points refined to floating-point accuracy cannot straddle the edge.
pub fn band_window(n: u32, zeta: f64, band: u32) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "band window needs at least 2 elements, got {n}"
        )));
    }
    let center = band as f64 * std::f64::consts::PI + std::f64::consts::FRAC_PI_2 - zeta.atan();
    let half = std::f64::consts::FRAC_PI_2
        - ((std::f64::consts::PI / n as f64).cos() / (1.0 + zeta * zeta).sqrt()).acos();
    let pad = 1e-9;
    Ok((center - half - pad, center + half + pad))
}

/// Grid intervals used by the windowed tracker before refinement. The
/// `|m22|` landscape between neighboring resonances varies on the
/// free-spectral-range scale, so as long as the window stays below half an
/// FSR this density resolves every dip basin; golden-section search then
/// only needs unimodality between the best sample's two neighbors.
const TRACK_SAMPLES: usize = 128;

/// Parabolic tip polish after golden-section refinement.
///
/// Direct minimization cannot place a quadratic minimum better than
/// `κ·√ε ≈ 1e-9 rad/m` (function values become indistinguishable), which
/// second differences amplify by 1/h². `log|m22|` is even in `k − k_min` to
/// an excellent approximation near a dip, so one parabola through points a
/// wide baseline apart — where the curvature signal towers over f64 noise —
/// relocates the tip to ~1e-11 rad/m. If the baseline overshoots the dip's
/// own width the correction collapses toward zero, so a mis-scaled baseline
/// degrades gracefully to a no-op.
fn polish_tip(objective: impl Fn(f64) -> f64, k: f64, baseline: f64) -> f64 {
    let (fm, f0, fp) = (objective(k - baseline), objective(k), objective(k + baseline));
    let den = fm - 2.0 * f0 + fp;
    if den > 0.0 && fm.is_finite() && fp.is_finite() {
        let off = 0.5 * (fm - fp) / den;
        if off.abs() <= 1.0 {
            return k + off * baseline;
        }
    }
    k
}

/// Follow the resonance at `k0` of `system` onto the slightly perturbed
/// `displaced` stack; returns the displaced resonance wave number.
///
/// The search minimizes `log|m22|` (V-shaped around a unit-transmission
/// point, with its floor exactly at the resonance) inside a trust window
/// that starts at 2% of the free spectral range `π/span` and widens
/// adaptively — see [`track_resonance_adaptive`] — up to a cap of 45% of
/// the FSR, below the half-FSR distance at which a neighboring mode could
/// first be mistaken for the followed one.
pub fn track_resonance(system: &SystemSpec, k0: f64, displaced: &SystemSpec) -> Result<f64> {
    let fsr = std::f64::consts::PI / stack_span(system)?;
    track_resonance_adaptive(k0, displaced, 0.02 * fsr, 0.45 * fsr)
}

/// [`track_resonance`] with explicit initial and maximal half-windows.
///
/// A displacement that moves the resonance past the window edge leaves the
/// edge sample as the apparent minimum; accepting it would silently clip
/// the shift and bias every derivative taken from the result. A result is
/// therefore accepted only when it lands comfortably interior
/// (|k − k0| < 0.8·window); otherwise the window grows fourfold, up to
/// `window_max`. If the minimum still hugs the edge at the cap, the branch
/// cannot be followed unambiguously and tracking reports failure rather
/// than a clipped value.
pub fn track_resonance_adaptive(
    k0: f64,
    displaced: &SystemSpec,
    window0: f64,
    window_max: f64,
) -> Result<f64> {
    if !(window0 > 0.0) || !(window_max >= window0) {
        return Err(Error::InvalidInput(format!(
            "need 0 < window0 <= window_max, got {window0} and {window_max}"
        )));
    }
    let mut window = window0;
    loop {
        let at_cap = window >= window_max;
        match track_resonance_windowed(k0, displaced, window) {
            Ok(k) if (k - k0).abs() < 0.8 * window => return Ok(k),
            Ok(k) if at_cap => {
                return Err(Error::TrackingLost {
                    k0,
                    detail: format!(
                        "minimum at {k} stays near the edge of the capped \
                         ±{window:.3e} rad/m window; the displaced resonance \
                         cannot be followed unambiguously"
                    ),
                });
            }
            Err(e) if at_cap => return Err(e),
            _ => window = (window * 4.0).min(window_max),
        }
    }
}

/// Refined wave number of the transmission resonance nearest `seed_k`.
///
/// Scans `seed_k ± window` on a uniform grid, golden-refines every interior
/// local minimum of `log|m22|`, and returns the refined dip closest to the
/// seed that still transmits (T ≥ 0.5). Unlike [`track_resonance_windowed`],
/// which keeps the globally deepest dip, the nearest-dip rule stays
/// deterministic when two modes of near-equal depth flank the seed — the
/// usual situation when seeding from a bare-array resonance that the
/// surrounding cavity splits into a mode ladder.
pub fn nearest_resonance(seed_k: f64, system: &SystemSpec, window: f64) -> Result<f64> {
    if !(window > 0.0) || !(seed_k > window) {
        return Err(Error::InvalidInput(format!(
            "need 0 < window < seed_k, got window = {window}, seed_k = {seed_k}"
        )));
    }
    let objective = |k: f64| -> f64 {
        chain(system, k).map(|m| m.m22.norm().ln()).unwrap_or(f64::INFINITY)
    };
    let lo = seed_k - window;
    let step = 2.0 * window / TRACK_SAMPLES as f64;
    let v: Vec<f64> = (0..=TRACK_SAMPLES).map(|i| objective(lo + i as f64 * step)).collect();
    let k_tol = 1e-15 * seed_k;
    let mut nearest: Option<f64> = None;
    for i in 1..TRACK_SAMPLES {
        if v[i] < v[i - 1] && v[i] <= v[i + 1] {
            let a = lo + (i - 1) as f64 * step;
            let b = lo + (i + 1) as f64 * step;
            let (k_star, _) = minimize_golden(&objective, a, b, k_tol);
            let k_star = polish_tip(&objective, k_star, 1e-4 * window);
            if chain(system, k_star)?.transmission()? < 0.5 {
                continue;
            }
            let better = match nearest {
                Some(best) => (k_star - seed_k).abs() < (best - seed_k).abs(),
                None => true,
            };
            if better {
                nearest = Some(k_star);
            }
        }
    }
    nearest.ok_or_else(|| Error::TrackingLost {
        k0: seed_k,
        detail: format!(
            "no transmitting dip inside the ±{window:.3e} rad/m seed window"
        ),
    })
}

/// Single fixed-window tracking pass: the global `log|m22|` minimum over a
/// [`TRACK_SAMPLES`]-interval grid spanning `k0 ± window`, polished by
/// golden-section search between the best sample's neighbors.
pub fn track_resonance_windowed(k0: f64, displaced: &SystemSpec, window: f64) -> Result<f64> {
    if !(window > 0.0) || !(k0 > window) {
        return Err(Error::InvalidInput(format!(
            "need 0 < window < k0, got window = {window}, k0 = {k0}"
        )));
    }
    let objective = |k: f64| -> f64 {
        chain(displaced, k).map(|m| m.m22.norm().ln()).unwrap_or(f64::INFINITY)
    };
    let lo = k0 - window;
    let step = 2.0 * window / TRACK_SAMPLES as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=TRACK_SAMPLES {
        let v = objective(lo + i as f64 * step);
        if v < best.1 {
            best = (i, v);
        }
    }
    let a = lo + best.0.saturating_sub(1) as f64 * step;
    let b = lo + (best.0 + 1).min(TRACK_SAMPLES) as f64 * step;
    let k_tol = 1e-15 * k0;
    let (k_star, _) = minimize_golden(objective, a, b, k_tol);
    let k_star = polish_tip(&objective, k_star, 1e-4 * window);
    let t = chain(displaced, k_star)?.transmission()?;
    if t < 0.5 {
        return Err(Error::TrackingLost {
            k0,
            detail: format!(
                "best point in ±{window:.3e} window has transmission {t:.3e}; \
                 the resonance moved outside the window or vanished"
            ),
        });
    }
    Ok(k_star)
}

fn stack_span(system: &SystemSpec) -> Result<f64> {
    let elements = system.elements();
    match (elements.first(), elements.last()) {
        (Some(a), Some(b)) if b.position > a.position => Ok(b.position - a.position),
        _ => Err(Error::InvalidInput(
            "resonance tracking needs a stack with nonzero extent".into(),
        )),
    }
}
