//! Momentum-averaged dwell time for Gaussian packets of shrinking width:
//! the packet average collapses onto the fixed-k dwell time.
//!
//! ```bash
//! cargo run --example wavepacket_average
//! ```

use std::f64::consts::PI;

use ttclock::dwell::{dwell_matrix, wavepacket_dwell, WavePacket};
use ttclock::{interior_wavefunctions, BarrierSpec, SolverOptions, UnitSystem};

fn main() {
    let k0 = 3.0 * PI;
    let barrier = BarrierSpec::square(k0 * k0, 1.0, UnitSystem::default()).unwrap();
    let opts = SolverOptions::default();
    let kc = 0.6 * k0;

    let wave = interior_wavefunctions(&barrier, kc, &opts).unwrap();
    let fixed = dwell_matrix(&wave, &barrier).unwrap().c_ll;
    println!("tau_d at k_c = 0.6 k0: {fixed:.9e}\n");

    println!("{:>12} {:>14} {:>12}", "sigma/k_c", "tau_D", "rel gap");
    for sigma_frac in [0.05, 0.02, 0.01, 0.005, 0.001] {
        let packet = WavePacket::new(kc, sigma_frac * kc).unwrap();
        let tau = wavepacket_dwell(&barrier, &packet, &opts).unwrap();
        println!(
            "{:>12.3} {:>14.9e} {:>12.3e}",
            sigma_frac,
            tau,
            (tau - fixed).abs() / fixed
        );
    }

    // Packets must keep negligible weight at k <= 0.
    match WavePacket::new(1.0, 0.5) {
        Err(e) => println!("\nwide packet rejected: {e}"),
        Ok(_) => println!("\nwide packet unexpectedly accepted"),
    }
}
