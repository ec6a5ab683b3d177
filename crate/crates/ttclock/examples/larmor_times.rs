//! Larmor times from the operational spin-split response, cross-checked
//! against the closed-form square-barrier derivatives.
//!
//! ```bash
//! cargo run --example larmor_times
//! ```

use std::f64::consts::PI;

use ttclock::larmor::{analytic_square_larmor, complex_times, default_probe_omega};
use ttclock::{linspace, BarrierSpec, SolverOptions, UnitSystem};

fn main() {
    let units = UnitSystem::default();
    let k0 = 3.0 * PI;
    let barrier = BarrierSpec::square(k0 * k0, 1.0, units).unwrap();
    let opts = SolverOptions::default();
    let probe = default_probe_omega(&barrier);

    println!("square barrier Larmor times (probe omega_L = {probe:.3e})");
    println!(
        "{:>6} {:>13} {:>13} {:>13} {:>12}",
        "k/k0", "tau_zt", "tau_yt", "tau_zr", "rel dev"
    );
    for frac in linspace(0.15, 0.85, 8) {
        let k = frac * k0;
        let numeric = complex_times(&barrier, k, probe, &opts).unwrap();
        let analytic = analytic_square_larmor(barrier.v0, barrier.width, k, units).unwrap();
        let dev = (numeric.tau_t - analytic.tau_t).norm() / analytic.tau_t.norm();
        println!(
            "{:>6.2} {:>13.6e} {:>13.6e} {:>13.6e} {:>12.2e}",
            frac, numeric.tau_zt, numeric.tau_yt, numeric.tau_zr, dev
        );
    }

    let k = 0.5 * k0;
    let t = complex_times(&barrier, k, probe, &opts).unwrap();
    println!("\ncomplex-time bookkeeping at k = 0.5 k0:");
    println!("  tau_t   = {:.6e} + {:.6e} i", t.tau_t.re, t.tau_t.im);
    println!(
        "  tau_r^l = {:.6e} + {:.6e} i",
        t.tau_r_left.re, t.tau_r_left.im
    );
    println!(
        "  delta_tau = {:.6e} + {:.2e} i  (real for symmetric barriers, = tau_zt / R)",
        t.delta_tau.re, t.delta_tau.im
    );
}
