//! Temporary scratch probe (not shipped): prints raw tracked wave numbers
//! for one displaced membrane to cross-check second differences.

use omstack::geometry::{ArraySpec, CavityPlatformSpec};
use omstack::resonance::{nearest_resonance, track_resonance};

fn main() {
    let d = 525e-9;
    let array = ArraySpec { n_membranes: 7, zeta: -5.0, spacing_d: d, alpha: 0.0 };
    let platform = CavityPlatformSpec {
        array,
        cavity_length_l: 6.3e-2,
        mirror_zeta: -20.0,
    };
    let u_res = 0.88062657227181;
    let k_array = u_res * std::f64::consts::PI / d;
    let s = 0.5 * std::f64::consts::PI / k_array;
    let system = platform.assemble_with_shift(s).unwrap();
    let fsr = std::f64::consts::PI / platform.cavity_length_l;
    let seed = nearest_resonance(k_array, &system, 0.55 * fsr).unwrap();
    let k0 = track_resonance(&system, seed, &system).unwrap();
    println!("seed = {seed:.9}  k0 = {k0:.9}  (seed-k0 = {:+.3e})", seed - k0);
    let h2 = 1e-5 * d;
    for j in [1usize, 4] {
        let k_at = |h: f64| -> f64 {
            let displaced = system.displaced(j, h).unwrap();
            track_resonance(&system, k0, &displaced).unwrap()
        };
        let (kp, km, kp2, km2) = (k_at(h2), k_at(-h2), k_at(0.5 * h2), k_at(-0.5 * h2));
        println!("stack index {j}:");
        println!("  kp  - k0 = {:+.9e}   km  - k0 = {:+.9e}", kp - k0, km - k0);
        println!("  kp2 - k0 = {:+.9e}   km2 - k0 = {:+.9e}", kp2 - k0, km2 - k0);
        println!("  full second diff = {:+.6e}", kp - 2.0 * k0 + km);
        println!("  half second diff = {:+.6e}", kp2 - 2.0 * k0 + km2);
    }
}
