//! Larmor times for arbitrary barriers via spin-split scattering solves,
//! with the analytic square-barrier route as a cross-check.
//!
//! All times are defined operationally from the first-order response of the
//! amplitudes to the probe frequency, t_pm = t [1 +- (omega/2)(tau_zt + i tau_yt)],
//! extracted by a central difference in omega with one Richardson step.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{BarrierSpec, UnitSystem};
use crate::scattering::{solve_amplitudes, ScatteringAmplitudes, SolverOptions};

/// Ratio of the probe frequency to V0/hbar used when none is given.
pub const DEFAULT_PROBE_RATIO: f64 = 1e-6;

/// Default probe omega_L for a barrier: 1e-6 V0 / hbar.
pub fn default_probe_omega(barrier: &BarrierSpec) -> f64 {
    DEFAULT_PROBE_RATIO * barrier.v0 / barrier.units.hbar
}

/// Amplitudes for the two spin components at probe frequency omega_L.
/// `plus` sees the potential shifted by -hbar omega/2, `minus` by +hbar omega/2.
#[derive(Debug, Clone)]
pub struct SpinfulAmplitudes {
    pub omega_probe: f64,
    pub plus: ScatteringAmplitudes,
    pub minus: ScatteringAmplitudes,
}

/// The Larmor times packaged as complex times: tau_t = tau_zt + i tau_yt,
/// tau_r^{l/r} = tau_zr + i tau_yr^{l/r}, and delta_tau = tau_t - tau_r^l.
#[derive(Debug, Clone, Copy)]
pub struct ComplexTimes {
    pub tau_zt: f64,
    pub tau_zr: f64,
    pub tau_yt: f64,
    pub tau_yr_left: f64,
    pub tau_yr_right: f64,
    pub tau_t: Complex64,
    pub tau_r_left: Complex64,
    pub tau_r_right: Complex64,
    pub delta_tau: Complex64,
}

impl ComplexTimes {
    fn from_complex(tau_t: Complex64, tau_r_left: Complex64, tau_r_right: Complex64) -> Self {
        Self {
            tau_zt: tau_t.re,
            tau_zr: tau_r_left.re,
            tau_yt: tau_t.im,
            tau_yr_left: tau_r_left.im,
            tau_yr_right: tau_r_right.im,
            tau_t,
            tau_r_left,
            tau_r_right,
            delta_tau: tau_t - tau_r_left,
        }
    }

    /// Largest |tau| in play; sets scales for weak-probe validity windows.
    pub fn max_magnitude(&self) -> f64 {
        self.tau_t
            .norm()
            .max(self.tau_r_left.norm())
            .max(self.tau_r_right.norm())
    }
}

/// Solves the two spin channels: potential shifted by -/+ hbar omega/2 for
/// spin +z / -z.
pub fn spin_split_solve(
    barrier: &BarrierSpec,
    k: f64,
    omega_probe: f64,
    opts: &SolverOptions,
) -> Result<SpinfulAmplitudes> {
    let shift = 0.5 * barrier.units.hbar * omega_probe;
    Ok(SpinfulAmplitudes {
        omega_probe,
        plus: solve_amplitudes(barrier, k, -shift, opts)?,
        minus: solve_amplitudes(barrier, k, shift, opts)?,
    })
}

fn response_at(
    barrier: &BarrierSpec,
    k: f64,
    omega: f64,
    base: &ScatteringAmplitudes,
    opts: &SolverOptions,
) -> Result<[Complex64; 3]> {
    let sp = spin_split_solve(barrier, k, omega, opts)?;
    let denom = omega;
    Ok([
        (sp.plus.t - sp.minus.t) / (denom * base.t),
        (sp.plus.r_left - sp.minus.r_left) / (denom * base.r_left),
        (sp.plus.r_right - sp.minus.r_right) / (denom * base.r_right),
    ])
}

/// Larmor complex times by first-order spin-split response, probing at
/// omega and omega/2 with one Richardson extrapolation step.
pub fn complex_times(
    barrier: &BarrierSpec,
    k: f64,
    omega_probe: f64,
    opts: &SolverOptions,
) -> Result<ComplexTimes> {
    if omega_probe <= 0.0 || !omega_probe.is_finite() {
        return Err(Error::Domain(format!(
            "probe omega must be > 0, got {omega_probe}"
        )));
    }
    let base = solve_amplitudes(barrier, k, 0.0, opts)?;
    for (name, z) in [
        ("t", base.t),
        ("r_left", base.r_left),
        ("r_right", base.r_right),
    ] {
        if z.norm() < 1e-12 {
            return Err(Error::AmplitudeTooSmall {
                name,
                magnitude: z.norm(),
            });
        }
    }
    let full = response_at(barrier, k, omega_probe, &base, opts)?;
    let half = response_at(barrier, k, 0.5 * omega_probe, &base, opts)?;
    let richardson = |c: Complex64, f: Complex64| (c * 4.0 - f) / 3.0;
    Ok(ComplexTimes::from_complex(
        richardson(half[0], full[0]),
        richardson(half[1], full[1]),
        richardson(half[2], full[2]),
    ))
}

/// Closed-form Larmor times for the square barrier from the analytic
/// kappa-derivatives of t(kappa) and r(kappa); valid for 0 < k < k0.
pub fn analytic_square_larmor(v0: f64, d: f64, k: f64, units: UnitSystem) -> Result<ComplexTimes> {
    if k <= 0.0 || k.is_nan() {
        return Err(Error::NonPositiveWavenumber(k));
    }
    let k0sq = 2.0 * units.mass * v0 / (units.hbar * units.hbar);
    if k * k >= k0sq {
        return Err(Error::Domain(format!(
            "analytic Larmor times need k < k0 (k = {k}, k0 = {})",
            k0sq.sqrt()
        )));
    }
    let kap = (k0sq - k * k).sqrt();
    let x = kap * d;
    // Normalized hyperbolics: for large kappa d work with e^{-2 kappa d}
    // so that only ratios of like-scaled quantities appear.
    let (ch, sh) = if x > 300.0 {
        let e = (-2.0 * x).exp();
        (0.5 * (1.0 + e), 0.5 * (1.0 - e))
    } else {
        (x.cosh(), x.sinh())
    };
    let i = Complex64::new(0.0, 1.0);
    let dfac = Complex64::new(ch, 0.0) + i * 0.5 * (kap / k - k / kap) * sh;
    let ddfac = Complex64::new(d * sh, 0.0)
        + i * 0.5 * ((1.0 / k + k / (kap * kap)) * sh + (kap / k - k / kap) * d * ch);
    let pref = units.mass / (units.hbar * kap);
    let tau_t = ddfac / dfac * pref;
    // Extra logarithmic derivative of the reflection prefactor
    // (kappa/k + k/kappa) sinh(kappa d); real, so tau_yr = tau_yt.
    let g = ((1.0 / k - k / (kap * kap)) * sh + (kap / k + k / kap) * d * ch)
        / ((kap / k + k / kap) * sh);
    let tau_r = tau_t - Complex64::new(pref * g, 0.0);
    Ok(ComplexTimes::from_complex(tau_t, tau_r, tau_r))
}
