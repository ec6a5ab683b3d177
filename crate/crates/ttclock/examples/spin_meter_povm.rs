//! The spin clock as a generalized detector: post-selection overlaps, POVM
//! completeness, outcome probabilities, and the rotated spin states.
//!
//! ```bash
//! cargo run --example spin_meter_povm
//! ```

use std::f64::consts::PI;

use ttclock::analysis::Scenario;
use ttclock::estimators::InitialSystemState;
use ttclock::linalg::Mat2;
use ttclock::spin_meter::{
    postselection_overlaps, rotated_spin_states, Side, SpinOutcome, SIDES, SPIN_OUTCOMES,
};
use ttclock::{BarrierSpec, UnitSystem};

fn main() {
    let k0 = 3.0 * PI;
    let barrier = BarrierSpec::square(k0 * k0, 1.0, UnitSystem::default()).unwrap();
    let spin = postselection_overlaps(PI / 2.0 - PI / 8.0, PI / 4.0).unwrap();
    println!("detector axis: theta = pi/2 - pi/8, phi = pi/4");
    println!("  x0_+ = {:.9}", spin.x0_plus);
    println!("  x0_- = {:.9}", spin.x0_minus);
    println!("  x1   = {:.9} + {:.9} i", spin.x1.re, spin.x1.im);

    let sc = Scenario::new(barrier, spin);
    let p = sc.at_k(0.5 * k0).unwrap();
    let clock = p.clock().unwrap();

    let completeness = clock.povm.sum().max_abs_diff(&Mat2::identity());
    println!("\nPOVM completeness residual: {completeness:.3e}");

    println!("\noutcome probabilities for the left-incoming state:");
    let rho = InitialSystemState::left_incoming().density();
    let mut total = 0.0;
    for side in SIDES {
        for m in SPIN_OUTCOMES {
            let prob = clock.povm.element(side, m).mul(&rho).trace().re;
            total += prob;
            let label = match (side, m) {
                (Side::Transmitted, SpinOutcome::Plus) => "P(transmitted, +n)",
                (Side::Transmitted, SpinOutcome::Minus) => "P(transmitted, -n)",
                (Side::Reflected, SpinOutcome::Plus) => "P(reflected,  +n)",
                (Side::Reflected, SpinOutcome::Minus) => "P(reflected,  -n)",
            };
            println!("  {label} = {prob:.9e}");
        }
    }
    println!("  sum = {total:.12} (T = {:.6e})", p.amps.transmission);

    // The spin left behind after transmission/reflection encodes the times.
    let omega = 1e-4;
    let (s_r, s_l) = rotated_spin_states(&clock.times, omega);
    println!("\nrotated spin states at omega_L = {omega:.1e}:");
    println!(
        "  transmitted: precession angle / omega = {:.6e} (tau_yt = {:.6e})",
        s_r.precession_angle() / omega,
        clock.times.tau_yt
    );
    println!(
        "  transmitted: z polarization / omega   = {:.6e} (tau_zt = {:.6e})",
        s_r.z_polarization() / omega,
        clock.times.tau_zt
    );
    println!(
        "  reflected:   precession angle / omega = {:.6e} (tau_yr^l = {:.6e})",
        s_l.precession_angle() / omega,
        clock.times.tau_yr_left
    );
}
