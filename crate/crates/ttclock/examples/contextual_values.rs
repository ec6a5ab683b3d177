//! Contextual values for the four detector outcomes: the 4x4 linear solve,
//! the closed forms, divergence with 1/omega_L, and singular contexts.
//!
//! ```bash
//! cargo run --example contextual_values
//! ```

use std::f64::consts::PI;

use ttclock::analysis::Scenario;
use ttclock::contextual::{cvs_closed_form, detect_singular_context};
use ttclock::spin_meter::postselection_overlaps;
use ttclock::{BarrierSpec, UnitSystem};

fn main() {
    let k0 = 3.0 * PI;
    let units = UnitSystem::default();
    let spin = postselection_overlaps(PI / 2.0 - PI / 8.0, PI / 4.0).unwrap();

    println!(
        "context at theta = pi/2 - pi/8, phi = pi/4: {}",
        detect_singular_context(&spin)
    );

    for (name, barrier) in [
        ("square", BarrierSpec::square(k0 * k0, 1.0, units).unwrap()),
        (
            "quadratic",
            BarrierSpec::quadratic(k0 * k0, k0 * k0, 1.0, units).unwrap(),
        ),
        (
            "trapezoid",
            BarrierSpec::trapezoid(k0 * k0, 0.5 * k0 * k0, 1.0, units).unwrap(),
        ),
    ] {
        let sc = Scenario::new(barrier, spin);
        println!("\n{name} barrier, omega_L = {:.4e}:", sc.omega);
        println!(
            "{:>6} {:>13} {:>13} {:>13} {:>13} {:>10}",
            "k/k0", "wL a_r+", "wL a_r-", "wL a_l+", "wL a_l-", "dual rel"
        );
        for frac in [0.2, 0.5, 0.8] {
            let p = sc.at_k(frac * sc.barrier.k0()).unwrap();
            let clock = p.clock().unwrap();
            let lin = p.cvs().unwrap();
            let cf = cvs_closed_form(
                &clock.t_ops,
                &p.dwell,
                &p.amps,
                &clock.times,
                &spin,
                sc.omega,
            )
            .unwrap();
            let rel = (lin.alpha_r_plus - cf.alpha_r_plus).abs() / lin.alpha_r_plus.abs();
            println!(
                "{:>6.2} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e} {:>10.1e}",
                frac,
                sc.omega * lin.alpha_r_plus,
                sc.omega * lin.alpha_r_minus,
                sc.omega * lin.alpha_l_plus,
                sc.omega * lin.alpha_l_minus,
                rel
            );
        }
    }
    println!("\n(square-barrier rows are flat in k: -x0_-/Im x1 and +x0_+/Im x1)");

    // Singular geometries: the 4x4 system loses rank.
    for (label, theta, phi) in [
        ("x-y plane (theta = pi/2)", PI / 2.0, PI / 2.0),
        ("x-z plane (phi -> 0)", 1.0, 1e-12),
    ] {
        let s = postselection_overlaps(theta, phi).unwrap();
        let sc = Scenario::new(BarrierSpec::square(k0 * k0, 1.0, units).unwrap(), s);
        let p = sc.at_k(0.5 * k0).unwrap();
        match p.cvs() {
            Err(e) => println!("{label}: {e}"),
            Ok(_) => println!("{label}: unexpectedly regular"),
        }
    }
}
