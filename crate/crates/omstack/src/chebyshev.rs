//! Closed-form optics of equidistant arrays and the first-order defect
//! expansion.
//!
//! An equidistant array of `N` identical scatterers has a transfer matrix
//! expressible through Chebyshev polynomials of the second kind evaluated at
//! the half-trace `a(kd) = cos kd − ζ sin kd`:
//!
//! ```text
//! M_N = [ (1+iχ)e^{iμ}   iχ           ]       χ = ζ·U_{N−1}(a)
//!       [ −iχ            (1−iχ)e^{−iμ} ]      e^{iμ} = (1−iχ)/m22
//! ```
//!
//! with `m22 = (1−iζ)U_{N−1}(a) − e^{ikd}U_{N−2}(a)`. The array therefore
//! acts as a single effective mirror with polarizability χ and phase μ.
//!
//! A weak quadratic defect perturbs the gaps by `−α·c_j·d`; to first order in
//! α the array matrix becomes `M_N + α·M_corr`, with `M_corr` assembled from
//! closed-form 2×2 blocks (one per gap in the left half, the central gap of an
//! even array counted at half weight). `M_corr` has the exact structure
//! `[[z, iξ], [−iξ, z*]]` with ξ real: the defect shifts the effective
//! polarizability to `γ = χ + αξ` and the phase to λ.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tmat::TransferMatrix;

/// Chebyshev polynomial of the second kind, `U_n(x)`, via the forward
/// recurrence `U_{n+1} = 2x·U_n − U_{n−1}`.
///
/// The recurrence is numerically stable for the growing solution, which is
/// the one needed both inside bands (|x| ≤ 1, oscillatory) and inside gaps
/// (|x| > 1, exponentially growing).
pub fn chebyshev_u(n: u32, x: f64) -> f64 {
    chebyshev_u_i64(n as i64, x)
}

/// `U_n(x)` extended with `U_{−1} = 0`, as needed by the defect blocks.
pub(crate) fn chebyshev_u_i64(n: i64, x: f64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    let mut prev = 0.0; // U_{−1}
    let mut cur = 1.0; // U_0
    for _ in 0..n {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

/// The two dispersion combinations entering every closed form:
/// `a = cos kd − ζ sin kd` (half-trace of the one-cell matrix) and
/// `b = sin kd + ζ cos kd` (its quarter-phase-shifted partner).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionFunctions {
    pub a: f64,
    pub b: f64,
}

/// Evaluate `a(kd)` and `b(kd)` for polarizability ζ.
pub fn dispersion_functions(kd: f64, zeta: f64) -> DispersionFunctions {
    let (s, c) = kd.sin_cos();
    DispersionFunctions { a: c - zeta * s, b: s + zeta * c }
}

/// Equidistant array summarized as one mirror: polarizability χ and phase μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMirror {
    /// Effective polarizability `χ = ζ·U_{N−1}(a)`.
    pub chi: f64,
    /// Effective phase, principal branch `(−π, π]`.
    pub mu: f64,
    /// The unit complex number `e^{iμ}` (kept alongside μ so callers never
    /// re-wrap the angle).
    pub phase: Complex64,
}

impl EffectiveMirror {
    /// Reconstruct the full array transfer matrix from (χ, μ).
    pub fn matrix(&self) -> TransferMatrix {
        let i = Complex64::I;
        TransferMatrix::new(
            (1.0 + i * self.chi) * self.phase,
            i * self.chi,
            -i * self.chi,
            (1.0 - i * self.chi) * self.phase.conj(),
        )
    }
}

/// Effective-mirror parameters of `n` equidistant scatterers with
/// polarizability ζ at dimensionless wave number `kd`.
///
/// μ is returned on the principal branch; use
/// [`effective_mirror_unwrapped`] to follow μ continuously along a scan.
/// μ(kd→0) → 0 since `U_n(1) = n+1` makes the ratio real positive there.
pub fn effective_mirror(n: u32, zeta: f64, kd: f64) -> Result<EffectiveMirror> {
    if n == 0 {
        return Err(Error::InvalidInput("effective mirror needs at least one element".into()));
    }
    if !kd.is_finite() || !zeta.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite input: kd = {kd}, zeta = {zeta}")));
    }
    let a = dispersion_functions(kd, zeta).a;
    let u_n1 = chebyshev_u_i64(n as i64 - 1, a);
    let u_n2 = chebyshev_u_i64(n as i64 - 2, a);
    let chi = zeta * u_n1;
    let i = Complex64::I;
    // m22 of the array chain in its local frame.
    let m22 = (1.0 - i * zeta) * u_n1 - (i * kd).exp() * u_n2;
    if m22.norm() < crate::tol::DEGENERATE_M22 {
        return Err(Error::DegeneratePoint { kd });
    }
    let phase = (1.0 - i * chi) / m22;
    Ok(EffectiveMirror { chi, mu: phase.arg(), phase })
}

/// Like [`effective_mirror`] but with μ unwrapped to the 2π-branch nearest
/// `previous_mu`, for continuous tracking along a wave-number scan.
pub fn effective_mirror_unwrapped(
    n: u32,
    zeta: f64,
    kd: f64,
    previous_mu: f64,
) -> Result<EffectiveMirror> {
    let mut m = effective_mirror(n, zeta, kd)?;
    m.mu = crate::numeric::unwrap_near(m.mu, previous_mu);
    Ok(m)
}

/// First-order defect expansion of an equidistant array.
#[derive(Debug, Clone, Copy)]
pub struct DefectExpansion {
    /// Defect polarizability increment: `γ = χ + α·ξ` to first order.
    pub xi: f64,
    /// Defect phase parameter ν (complex principal logarithm of
    /// `m11_corr/(1+iξ)`). Its imaginary part measures how far the
    /// correction matrix is from an exact (real-ν) mirror parametrization;
    /// see [`DefectExpansion::nu_modulus_residual`].
    pub nu: Complex64,
    /// `| |e^{iν}| − 1 |`: residual of the unit-modulus assumption implicit
    /// in parametrizing the correction by a real phase. The correction block
    /// is exactly `[[z, iξ],[−iξ, z*]]` with ξ real, but `|z| ≠ √(1+ξ²)` in
    /// general, so ν picks up a small imaginary part.
    pub nu_modulus_residual: f64,
    /// Effective polarizability including the defect, `γ = χ + α·ξ`.
    pub gamma: f64,
    /// Effective phase λ of the defected array (principal branch), from
    /// `e^{iλ} = (1 − iγ)/m22(M_N + αM_corr)`.
    pub lambda: f64,
    /// The O(α) correction matrix `M_corr` (defected array ≈ M_N + α·M_corr).
    pub correction: TransferMatrix,
    /// `M_N + α·M_corr`, the first-order approximation to the full chain.
    pub first_order: TransferMatrix,
    /// Unperturbed effective mirror of the equidistant array.
    pub equidistant: EffectiveMirror,
}

/// Expand the array transfer matrix to first order in the defect strength α.
///
/// `corrections_over_d` are the per-gap corrections in units of the
/// equidistant gap, `c_j = [d − (x_{j+1} − x_j)]/(αd)`, one entry per gap
/// (length `n − 1`); only the left half `j = 1..⌊N/2⌋` enters, with the
/// central gap of an even array weighted ½ (it would otherwise be counted
/// twice by the mirror symmetry of the expansion).
///
/// Returns an error if the assembled correction violates the exact
/// `m12 = iξ` (ξ real) structure beyond 1e-10 relative — that would indicate
/// inconsistent inputs, e.g. corrections that are not mirror-symmetric.
///
/// The expansion is trustworthy while `α·|c_j|·kd ≪ 1`; `first_order`
/// deviates from the exact chain at O(α²). Callers should warn (not fail)
/// when α exceeds ~1e-3 at mirror-grade |ζ|.
pub fn first_order_defect(
    n: u32,
    zeta: f64,
    kd: f64,
    corrections_over_d: &[f64],
    alpha: f64,
) -> Result<DefectExpansion> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "defect expansion needs at least 3 elements, got {n}"
        )));
    }
    if corrections_over_d.len() != (n - 1) as usize {
        return Err(Error::InvalidInput(format!(
            "expected {} gap corrections, got {}",
            n - 1,
            corrections_over_d.len()
        )));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be non-negative, got {alpha}")));
    }
    let equidistant = effective_mirror(n, zeta, kd)?;
    let d = dispersion_functions(kd, zeta);
    let i = Complex64::I;
    let exp_pos = (i * kd).exp();
    let exp_neg = exp_pos.conj();

    // ℂ_m = U_{m−1}(a) − e^{ikd}(1+iζ)U_m(a), the half-chain building block.
    let c_block = |m: i64| -> Complex64 {
        Complex64::from(chebyshev_u_i64(m - 1, d.a))
            - exp_pos * (1.0 + i * zeta) * chebyshev_u_i64(m, d.a)
    };

    let half = (n / 2) as i64;
    let mut corr = TransferMatrix::new(
        Complex64::ZERO,
        Complex64::ZERO,
        Complex64::ZERO,
        Complex64::ZERO,
    );
    for j in 1..=half {
        let u_jm1 = chebyshev_u_i64(j - 1, d.a);
        let u_njm1 = chebyshev_u_i64(n as i64 - j - 1, d.a);
        let c11 = 2.0
            * (c_block(j - 1) * c_block(n as i64 - j - 1)
                - Complex64::from(zeta * zeta * u_jm1 * u_njm1));
        let c12 = 4.0 * zeta * d.b * u_jm1 * u_njm1;
        // Central gap of an even array: half weight.
        let weight = corrections_over_d[(j - 1) as usize]
            * if 2 * j == n as i64 { 0.5 } else { 1.0 };
        let s = -i * (kd * weight);
        corr.m11 += s * c11 * exp_neg;
        corr.m12 += s * (-c12);
        corr.m21 += s * c12;
        corr.m22 += s * (-c11.conj() * exp_pos);
    }

    // Exact structure check: m12 = iξ with ξ real, m21 = −m12.
    let xi_c = corr.m12 / i;
    let scale = xi_c.norm().max(1.0);
    if xi_c.im.abs() > 1e-10 * scale {
        return Err(Error::InvalidInput(format!(
            "correction matrix lost its iξ off-diagonal structure (Im ξ = {:.3e}); \
             gap corrections are probably not mirror-symmetric",
            xi_c.im
        )));
    }
    let xi = xi_c.re;

    let e_inu = corr.m11 / (1.0 + i * xi);
    let nu = -i * e_inu.ln();
    let nu_modulus_residual = (e_inu.norm() - 1.0).abs();

    let first_order = TransferMatrix::new(
        equidistant.matrix().m11 + alpha * corr.m11,
        equidistant.matrix().m12 + alpha * corr.m12,
        equidistant.matrix().m21 + alpha * corr.m21,
        equidistant.matrix().m22 + alpha * corr.m22,
    );
    let gamma = equidistant.chi + alpha * xi;
    let e_ilambda = (1.0 - i * gamma) / first_order.m22;
    Ok(DefectExpansion {
        xi,
        nu,
        nu_modulus_residual,
        gamma,
        lambda: e_ilambda.arg(),
        correction: corr,
        first_order,
        equidistant,
    })
}

/// Closed-form ξ (no matrix assembly):
/// `ξ = 4ζb·Σ_{j=1}^{⌊N/2⌋} kd·c_j·(1 − δ_{j,N/2}/2)·U_{j−1}(a)U_{N−j−1}(a)`.
/// Useful as an independent cross-check of [`first_order_defect`].
pub fn xi_closed_form(n: u32, zeta: f64, kd: f64, corrections_over_d: &[f64]) -> f64 {
    let d = dispersion_functions(kd, zeta);
    let mut sum = 0.0;
    for j in 1..=(n / 2) as i64 {
        let w = if 2 * j == n as i64 { 0.5 } else { 1.0 };
        sum += kd
            * corrections_over_d[(j - 1) as usize]
            * w
            * chebyshev_u_i64(j - 1, d.a)
            * chebyshev_u_i64(n as i64 - j - 1, d.a);
    }
    4.0 * zeta * d.b * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmat::{chain, SystemSpec, Scatterer};

    fn array_system(n: usize, zeta: f64, d: f64) -> SystemSpec {
        let elements = (0..n)
            .map(|j| Scatterer { zeta, position: j as f64 * d })
            .collect();
        SystemSpec::new(elements).unwrap()
    }

    #[test]
    fn chebyshev_u_small_orders() {
        for &x in &[-0.9, -0.3, 0.0, 0.4, 1.7] {
            assert!((chebyshev_u(0, x) - 1.0).abs() < 1e-15);
            assert!((chebyshev_u(1, x) - 2.0 * x).abs() < 1e-15);
            assert!((chebyshev_u(2, x) - (4.0 * x * x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_u_at_one_is_n_plus_one() {
        for n in 0..40u32 {
            assert_eq!(chebyshev_u(n, 1.0), (n + 1) as f64);
        }
    }

    #[test]
    fn chebyshev_u_trig_identity_in_band() {
        // U_n(cos θ) = sin((n+1)θ)/sin θ.
        let theta: f64 = 0.7;
        for n in 0..20u32 {
            let expect = ((n + 1) as f64 * theta).sin() / theta.sin();
            assert!(
                (chebyshev_u(n, theta.cos()) - expect).abs() < 1e-10,
                "n = {n}"
            );
        }
    }

    #[test]
    fn effective_mirror_single_element_is_bare_scatterer() {
        let m = effective_mirror(1, -5.0, 0.87 * std::f64::consts::PI).unwrap();
        assert!((m.chi + 5.0).abs() < 1e-15);
        assert!(m.mu.abs() < 1e-15);
    }

    #[test]
    fn effective_mirror_phase_is_unimodular() {
        for &kd in &[0.1, 0.5, 0.87 * std::f64::consts::PI, 2.9, 3.7] {
            for &n in &[2u32, 6, 7, 20] {
                let m = effective_mirror(n, -0.5, kd).unwrap();
                assert!(
                    (m.phase.norm() - 1.0).abs() < 1e-12,
                    "n = {n}, kd = {kd}: |e^{{iμ}}| = {}",
                    m.phase.norm()
                );
            }
        }
    }

    #[test]
    fn effective_mirror_mu_vanishes_at_zero_k() {
        for &n in &[2u32, 7, 20] {
            let m = effective_mirror(n, -5.0, 1e-9).unwrap();
            assert!(m.mu.abs() < 1e-6, "μ({n}) = {}", m.mu);
        }
    }

    #[test]
    fn effective_mirror_matches_brute_chain() {
        let d = 525e-9;
        for &n in &[2usize, 3, 7, 12] {
            for &kd in &[0.3, 0.87 * std::f64::consts::PI, 1.4] {
                let k = kd / d;
                let brute = chain(&array_system(n, -5.0, d), k).unwrap();
                let para = effective_mirror(n as u32, -5.0, kd).unwrap().matrix();
                assert!(
                    brute.distance(&para) < 1e-9 * brute.inf_norm(),
                    "n = {n}, kd = {kd}: distance {}",
                    brute.distance(&para)
                );
            }
        }
    }

    #[test]
    fn unwrapped_mu_is_continuous() {
        let mut prev = 0.0;
        let mut last = 0.0;
        let steps = 4000;
        for i in 1..=steps {
            let kd = 2.5 * i as f64 / steps as f64;
            let m = effective_mirror_unwrapped(20, -0.5, kd, prev).unwrap();
            assert!((m.mu - last).abs() < 0.5, "jump at kd = {kd}");
            last = m.mu;
            prev = m.mu;
        }
    }

    #[test]
    fn defect_expansion_against_exact_chain() {
        // N = 7, quadratic-defect corrections in units of d: [−5,−3,8,8,−3,−5].
        let corr = [-5.0, -3.0, 8.0, 8.0, -3.0, -5.0];
        let n = 7u32;
        let zeta = -5.0;
        let kd = 0.87 * std::f64::consts::PI;
        let d = 525e-9;

        // Residual against the exact displaced chain truncates at O(α²):
        // shrinking α tenfold must shrink the mismatch ~hundredfold.
        let residual = |alpha: f64| -> f64 {
            let exp = first_order_defect(n, zeta, kd, &corr, alpha).unwrap();
            let base = crate::geometry::defect_positions(7, 6.0 * d, alpha).unwrap();
            let sys = SystemSpec::new(
                base.into_iter().map(|position| Scatterer { zeta, position }).collect(),
            )
            .unwrap();
            let exact = chain(&sys, kd / d).unwrap();
            exact.distance(&exp.first_order) / exact.inf_norm()
        };
        let coarse = residual(1e-5);
        let fine = residual(1e-6);
        assert!(fine < 1e-6, "first-order mismatch {fine:.3e} at alpha = 1e-6");
        let order = (coarse / fine).log10();
        assert!((order - 2.0).abs() < 0.3, "expected quadratic truncation, got 10^{order:.2}");
    }

    #[test]
    fn defect_xi_matches_closed_form() {
        let corr = [-5.0, -3.0, 8.0, 8.0, -3.0, -5.0];
        let kd = 0.87 * std::f64::consts::PI;
        let exp = first_order_defect(7, -5.0, kd, &corr, 1e-4).unwrap();
        let xi = xi_closed_form(7, -5.0, kd, &corr);
        assert!(
            (exp.xi - xi).abs() < 1e-9 * xi.abs().max(1.0),
            "matrix ξ = {}, closed form = {xi}",
            exp.xi
        );
    }

    #[test]
    fn defect_correction_structure() {
        // M_corr = [[z, iξ],[−iξ, z*]] with ξ real.
        let corr = [-5.0, -3.0, 8.0, 8.0, -3.0, -5.0];
        let exp = first_order_defect(7, -5.0, 0.87 * std::f64::consts::PI, &corr, 1e-4).unwrap();
        let c = exp.correction;
        assert!((c.m12 + c.m21).norm() < 1e-10 * c.m12.norm().max(1.0));
        assert!((c.m11 - c.m22.conj()).norm() < 1e-10 * c.m11.norm().max(1.0));
        assert!(c.m12.re.abs() < 1e-10 * c.m12.norm().max(1.0), "m12 must be purely imaginary");
    }

    #[test]
    fn defect_even_array_central_gap_half_weight() {
        // N = 4 quadratic defect: positions ±3d/2 fixed, ±d/2 move inward by
        // (α/d)(9d²/4 − d²/4) = 2αd: gaps d+2αd, d−4αd, d+2αd → c = [−2, 4, −2].
        let corr = [-2.0, 4.0, -2.0];
        let zeta = -5.0;
        let kd = 0.8 * std::f64::consts::PI;
        let d = 500e-9;
        let alpha = 1e-6;
        let exp = first_order_defect(4, zeta, kd, &corr, alpha).unwrap();
        let base = crate::geometry::defect_positions(4, 3.0 * d, alpha).unwrap();
        let sys = SystemSpec::new(
            base.into_iter().map(|position| Scatterer { zeta, position }).collect(),
        )
        .unwrap();
        let exact = chain(&sys, kd / d).unwrap();
        let err = exact.distance(&exp.first_order) / exact.inf_norm();
        assert!(err < 1e-8, "even-N first-order mismatch {err:.3e}");
    }

    #[test]
    fn defect_rejects_wrong_correction_count() {
        assert!(first_order_defect(7, -5.0, 2.7, &[1.0, 2.0], 1e-4).is_err());
    }

    #[test]
    fn lambda_consistent_with_first_order_m22() {
        let corr = [-5.0, -3.0, 8.0, 8.0, -3.0, -5.0];
        let exp = first_order_defect(7, -5.0, 0.87 * std::f64::consts::PI, &corr, 1e-4).unwrap();
        // (1 − iγ)e^{−iλ} should reproduce m22 of the first-order matrix up
        // to the same small modulus residual that ν carries.
        let i = Complex64::I;
        let recon = (1.0 - i * exp.gamma) * (-i * exp.lambda).exp();
        let rel = (recon - exp.first_order.m22).norm() / exp.first_order.m22.norm();
        assert!(rel < 1e-2, "λ reconstruction residual {rel:.3e}");
    }
}
