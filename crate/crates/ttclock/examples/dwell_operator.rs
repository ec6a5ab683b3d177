//! The dwell-time operator at fixed k: matrix elements, eigensystem, square,
//! and the wave-packet-averaged dwell time.
//!
//! ```bash
//! cargo run --example dwell_operator
//! ```

use std::f64::consts::PI;

use ttclock::dwell::{
    dwell_eigensystem, dwell_matrix, squared_matrix, wavepacket_dwell, WavePacket,
};
use ttclock::{interior_wavefunctions, BarrierSpec, SolverOptions, UnitSystem};

fn main() {
    let units = UnitSystem::default();
    let k0 = 3.0 * PI;
    let barrier = BarrierSpec::square(k0 * k0, 1.0, units).unwrap();
    let opts = SolverOptions::default();

    let k = 0.5 * k0;
    let wave = interior_wavefunctions(&barrier, k, &opts).unwrap();
    let m = dwell_matrix(&wave, &barrier).unwrap();
    println!("dwell matrix at k = 0.5 k0:");
    println!("  C_ll = tau_d = {:.9e}", m.c_ll);
    println!("  C_rr        = {:.9e}", m.c_rr);
    println!(
        "  C_rl        = {:.9e} + {:.2e} i (real for symmetric barriers)",
        m.c_rl.re, m.c_rl.im
    );

    let e = dwell_eigensystem(&m);
    println!("\neigensystem:");
    println!("  lambda_+ = {:.9e}", e.lambda_plus);
    println!(
        "  lambda_- = {:.9e}  (non-negative spectrum)",
        e.lambda_minus
    );

    let sq = squared_matrix(&m);
    println!("\nsquared operator:");
    println!("  Cbar_11 = C_ll^2 + |C_rl|^2 = {:.9e}", sq.c11);
    println!(
        "  spectral check: w+ l+^2 + w- l-^2 = {:.9e}",
        e.state_plus[0].norm_sqr() * e.lambda_plus.powi(2)
            + e.state_minus[0].norm_sqr() * e.lambda_minus.powi(2)
    );

    // Momentum-averaged dwell time for a narrow Gaussian packet.
    let packet = WavePacket::new(0.5 * k0, 0.02 * k0).unwrap();
    let tau_packet = wavepacket_dwell(&barrier, &packet, &opts).unwrap();
    println!("\nwave packet (k_c = 0.5 k0, sigma = 0.02 k0):");
    println!(
        "  tau_D = {tau_packet:.9e}  vs  tau_d(k_c) = {:.9e}",
        m.c_ll
    );
}
