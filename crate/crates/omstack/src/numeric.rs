//! Small shared numeric kernels: scalar minimization, bracketed root
//! finding, phase unwrapping, and Gauss-Legendre nodes.
//!
//! These are deliberately simple, allocation-free routines tuned for the
//! smooth 1D objectives this crate produces (log-transformed transmission
//! dips, slowly varying phases). They are not general-purpose optimizers.

use crate::error::{Error, Result};

/// Inverse golden ratio, `(√5 − 1)/2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of `f` on `[lo, hi]`.
///
/// Converges unconditionally for unimodal `f`; for the V-shaped log-dips this
/// crate minimizes, the bracket shrinks by the golden ratio per step, so
/// `x_tol = 1e-12·(hi−lo)` costs ~60 evaluations. Returns `(x_min, f(x_min))`.
pub fn minimize_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if fx <= fc && fx <= fd {
        (x, fx)
    } else if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection/secant hybrid on a bracketed sign change.
///
/// `f(lo)` and `f(hi)` must have opposite signs. Each iteration tries a
/// secant step; if it falls outside the shrinking bracket (or stalls) it
/// falls back to bisection, so convergence is guaranteed and usually
/// superlinear. Stops when the bracket is below `x_tol`.
pub fn find_root_bracketed<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NonConvergence(format!(
            "no sign change on [{a:e}, {b:e}]: f(a) = {fa:e}, f(b) = {fb:e}"
        )));
    }
    for _ in 0..200 {
        if (b - a).abs() <= x_tol {
            break;
        }
        // Secant candidate; bisection fallback keeps the bracket honest.
        let mut x = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        let margin = 0.01 * (b - a).abs();
        if !x.is_finite() || x <= a.min(b) + margin || x >= a.max(b) - margin {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(0.5 * (a + b))
}

/// Continue `angle` onto the branch nearest `previous` by adding the
/// multiple of 2π that minimizes the jump. Used to unwrap phases along scans.
pub fn unwrap_near(angle: f64, previous: f64) -> f64 {
    use std::f64::consts::TAU;
    let mut a = angle;
    while a - previous > std::f64::consts::PI {
        a -= TAU;
    }
    while a - previous < -std::f64::consts::PI {
        a += TAU;
    }
    a
}

/// Nodes and weights of `n`-point Gauss-Legendre quadrature on [−1, 1].
///
/// Newton iteration on `P_n` seeded with the Chebyshev-root asymptotic;
/// accurate to machine precision for the n ≤ 512 used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess: Chebyshev root asymptotic for Legendre zeros.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P'_n(x) by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Richardson extrapolation of a central-difference derivative: combine a
/// full-step and a half-step estimate to cancel the leading O(h²) error,
/// yielding an O(h⁴) value: `(4·v_half − v_full)/3`.
pub fn richardson(v_full: f64, v_half: f64) -> f64 {
    (4.0 * v_half - v_full) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = minimize_golden(|x| (x - 2.0) * (x - 2.0) + 1.0, 0.0, 5.0, 1e-12);
        assert!((x - 2.0).abs() < 1e-6, "x = {x}");
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_handles_v_shape() {
        // Log-dips behave like |x − x0|; golden section still collapses.
        let (x, _) = minimize_golden(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-14);
        assert!((x - 0.3).abs() < 1e-12, "x = {x}");
    }

    #[test]
    fn root_bracketed_cosine() {
        let r = find_root_bracketed(|x| x.cos(), 1.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn root_rejects_same_sign() {
        assert!(find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn unwrap_tracks_continuously() {
        let prev = 3.0;
        let wrapped = 3.2 - std::f64::consts::TAU; // same angle, wrong branch
        assert!((unwrap_near(wrapped, prev) - 3.2).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // n-point GL is exact through degree 2n−1.
        let (x, w) = gauss_legendre(8);
        let integral: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14, "{integral}");
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_256_weight_sum() {
        let (_, w) = gauss_legendre(256);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn richardson_cancels_h2_term() {
        // Derivative of sin at 0 with large h: Richardson should beat both.
        let f = |x: f64| x.sin();
        let h = 0.1;
        let full = (f(h) - f(-h)) / (2.0 * h);
        let half = (f(h / 2.0) - f(-h / 2.0)) / h;
        let extrap = richardson(full, half);
        assert!((extrap - 1.0).abs() < 1e-6);
        assert!((extrap - 1.0).abs() < (half - 1.0).abs() / 10.0);
    }
}
