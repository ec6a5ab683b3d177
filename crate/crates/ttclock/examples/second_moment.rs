//! Second moment of the dwell-time operator from the beta contextual
//! values, and the dwell-time uncertainty.
//!
//! ```bash
//! cargo run --example second_moment
//! ```

use std::f64::consts::PI;

use ttclock::analysis::Scenario;
use ttclock::spin_meter::postselection_overlaps;
use ttclock::{linspace, BarrierSpec, UnitSystem};

fn main() {
    let k0 = 3.0 * PI;
    let barrier = BarrierSpec::square(k0 * k0, 1.0, UnitSystem::default()).unwrap();
    let spin = postselection_overlaps(PI / 2.0 - PI / 8.0, PI / 4.0).unwrap();
    let sc = Scenario::new(barrier, spin);

    println!("second moment via beta CVs (left-incoming state)");
    println!(
        "{:>6} {:>13} {:>13} {:>13} {:>11}",
        "k/k0", "<T_d>", "<T_d^2>", "Cbar_11", "Delta T_d"
    );
    for frac in linspace(0.15, 0.9, 6) {
        let p = sc.at_k(frac * k0).unwrap();
        let (m2, dt) = p.moments().unwrap();
        println!(
            "{:>6.2} {:>13.6e} {:>13.6e} {:>13.6e} {:>11.5e}",
            frac, p.dwell.c_ll, m2, p.squared.c11, dt
        );
    }

    // beta values are not squares of the alpha values.
    let p = sc.at_k(0.5 * k0).unwrap();
    let alpha = p.cvs().unwrap();
    let beta = p.beta_cvs().unwrap();
    println!("\nat k = 0.5 k0:");
    println!(
        "  alpha_r+^2 = {:.6e}",
        alpha.alpha_r_plus * alpha.alpha_r_plus
    );
    println!(
        "  beta_r+    = {:.6e}  (not a simple power of alpha)",
        beta.alpha_r_plus
    );
    println!(
        "  symmetric barrier: beta_r+ - beta_l+ = {:.3e}",
        beta.alpha_r_plus - beta.alpha_l_plus
    );
}
