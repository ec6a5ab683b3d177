//! Operational tunneling-time toolkit.
//!
//! Solves stationary 1D barrier scattering, builds the dwell-time operator,
//! models the Larmor spin clock as a generalized detector, solves for the
//! contextual values that decompose the dwell-time operator over the clock's
//! POVM, and produces conditioned (tunneling-time) averages, weak values,
//! disturbance terms, and second moments, with a built-in identity
//! verification suite.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example square_barrier_amplitudes   # transfer matrix vs closed form
//! cargo run --example dwell_operator              # dwell matrix, spectrum, square
//! cargo run --example wavepacket_average          # packet-averaged dwell time
//! cargo run --example larmor_times                # spin-split Larmor times vs analytic
//! cargo run --example spin_meter_povm             # post-selection geometry and POVM
//! cargo run --example contextual_values           # CV linear solve vs closed form
//! cargo run --example conditioned_average         # tunneling time, weak value, disturbance
//! cargo run --example second_moment               # beta CVs and the dwell-time uncertainty
//! cargo run --example steinberg_comparison        # projector-based transmission time
//! cargo run --example verify_identities           # full identity report
//! cargo run --example figure_data                 # CSV data behind the figure presets
//! ```
//!
//! The thin `ttclock` binary exposes the same pipeline as subcommands
//! (`amplitudes`, `dwell`, `larmor`, `cv`, `conditioned`, `moments`,
//! `figure <name>`, `verify`); see the README.

pub mod analysis;
pub mod cli;
pub mod contextual;
pub mod dwell;
pub mod error;
pub mod estimators;
pub mod larmor;
pub mod linalg;
pub mod potential;
pub mod quad;
pub mod scattering;
pub mod spin_meter;
pub mod verify;

pub use error::{Error, Result};
pub use potential::{make_barrier, BarrierKind, BarrierSpec, UnitSystem};
pub use scattering::{
    analytic_square_amplitudes, check_unitarity, interior_wavefunctions, solve_amplitudes,
    InteriorWave, ScatteringAmplitudes, SolverOptions,
};

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "need at least two points");
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|j| if j == n - 1 { b } else { a + j as f64 * h })
        .collect()
}
