//! Temporary scratch probe (not shipped): prints coupling numbers for
//! cross-checking against reference tables.

use omstack::coupling::{registration_scan, DerivativeSteps, PhysicalScales};
use omstack::geometry::{ArraySpec, CavityPlatformSpec};
use omstack::resonance::{band_window, transmissive_roots_symmetric};

fn main() {
    let d = 525e-9;
    let alpha: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let n_reg: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(3);
    let array = ArraySpec { n_membranes: 7, zeta: -5.0, spacing_d: d, alpha };
    let platform = CavityPlatformSpec {
        array,
        cavity_length_l: 6.3e-2,
        mirror_zeta: -20.0,
    };
    let seed_u: Option<f64> = std::env::args().nth(3).and_then(|s| s.parse().ok());
    let bare = array.system().unwrap();
    let (lo, hi) = band_window(7, -5.0, 0).unwrap();
    let roots = transmissive_roots_symmetric(&bare, (lo - 0.05) / d, (hi + 0.35) / d, 8000, 1e-9 / d)
        .unwrap();
    println!("bare zeros (u = kd/pi):");
    for r in &roots {
        println!("  {:.8}", r * d / std::f64::consts::PI);
    }
    let scales = PhysicalScales::membrane_defaults();
    let steps = DerivativeSteps::from_spacing(d);
    let seeds: Vec<f64> = match seed_u {
        Some(u) => vec![u * std::f64::consts::PI / d],
        None => vec![roots[0], roots[roots.len() - 1]],
    };
    for (which, &k_array) in seeds.iter().enumerate() {
        println!(
            "--- seed zero #{which} u = {:.8} ---",
            k_array * d / std::f64::consts::PI
        );
        let scan = registration_scan(&platform, k_array, n_reg, &scales, steps).unwrap();
        for p in &scan.points {
            println!(
                "sf = {:.4}  rss1 = {:10.3}  rss2 = {:12.3}  g_opt/2pi = {:.3}  g1_sin/2pi = {:.2}  g2_sin/2pi = {:.4e}",
                p.shift_fraction,
                p.report.enhancement_1,
                p.report.enhancement_2,
                p.report.g_opt / (2.0 * std::f64::consts::PI),
                p.report.g1_sin / (2.0 * std::f64::consts::PI),
                p.report.g2_sin / (2.0 * std::f64::consts::PI),
            );
        }
        let b = scan.best_point();
        println!(
            "best sf = {:.4}  k0*d/pi = {:.12}",
            b.shift_fraction,
            b.report.resonance_k * d / std::f64::consts::PI
        );
        println!("g1_j/g01 at best:");
        for g in &b.report.g1_per_membrane {
            print!(" {:10.3}", g / b.report.g0_1);
        }
        println!();
        println!("g2_j/g02 at best:");
        for g in &b.report.g2_per_membrane {
            print!(" {:12.4e}", g / b.report.g0_2);
        }
        println!();
    }
}
