//! The spin-1/2 Larmor clock as a generalized detector: post-selection
//! geometry, measurement operators, POVM elements, and the rotated spin
//! states left behind by the interaction.
//!
//! Spin conventions are fixed once here: sigma_z |+-z> = +-|+-z> and
//! |+-x> = (|+z> +- |-z>)/sqrt(2). Every overlap is computed from explicit
//! 2-spinors, never from trig shortcuts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::larmor::ComplexTimes;
use crate::linalg::Mat2;
use crate::scattering::ScatteringAmplitudes;

/// Spin outcome label: post-selection along +n or -n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinOutcome {
    Plus,
    Minus,
}

pub const SPIN_OUTCOMES: [SpinOutcome; 2] = [SpinOutcome::Plus, SpinOutcome::Minus];

/// A normalized spinor in the {|+z>, |-z>} basis.
#[derive(Debug, Clone, Copy)]
pub struct SpinState {
    pub up: Complex64,
    pub down: Complex64,
}

impl SpinState {
    pub fn plus_x() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { up: r, down: r }
    }

    pub fn minus_x() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { up: r, down: -r }
    }

    pub fn inner(&self, other: &SpinState) -> Complex64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    pub fn normalized(&self) -> Self {
        let n = (self.up.norm_sqr() + self.down.norm_sqr()).sqrt();
        Self {
            up: self.up / n,
            down: self.down / n,
        }
    }

    /// Azimuthal Bloch angle relative to the +x meridian:
    /// arg<+z|s> - arg<-z|s>.
    pub fn precession_angle(&self) -> f64 {
        self.up.arg() - self.down.arg()
    }

    /// <sigma_z> = |<+z|s>|^2 - |<-z|s>|^2.
    pub fn z_polarization(&self) -> f64 {
        self.up.norm_sqr() - self.down.norm_sqr()
    }
}

/// Post-selection geometry: the detector spin axis n(theta, phi) and the
/// derived overlaps x0_{+-n} = |<+-n|+x>|^2 and
/// x1 = <+x|+n><+n|-x> = -<+x|-n><-n|-x>.
#[derive(Debug, Clone, Copy)]
pub struct SpinPostSelection {
    pub theta: f64,
    pub phi: f64,
    pub x0_plus: f64,
    pub x0_minus: f64,
    pub x1: Complex64,
    plus_n: SpinState,
    minus_n: SpinState,
}

impl SpinPostSelection {
    pub fn state(&self, m: SpinOutcome) -> &SpinState {
        match m {
            SpinOutcome::Plus => &self.plus_n,
            SpinOutcome::Minus => &self.minus_n,
        }
    }

    /// <m|+x>.
    pub fn overlap_plus_x(&self, m: SpinOutcome) -> Complex64 {
        self.state(m).inner(&SpinState::plus_x())
    }

    /// <m|-x>.
    pub fn overlap_minus_x(&self, m: SpinOutcome) -> Complex64 {
        self.state(m).inner(&SpinState::minus_x())
    }

    pub fn x0(&self, m: SpinOutcome) -> f64 {
        match m {
            SpinOutcome::Plus => self.x0_plus,
            SpinOutcome::Minus => self.x0_minus,
        }
    }

    /// <+x|m><m|-x>, the signed first-order overlap (+x1 for +n, -x1 for -n).
    pub fn x1_signed(&self, m: SpinOutcome) -> Complex64 {
        match m {
            SpinOutcome::Plus => self.x1,
            SpinOutcome::Minus => -self.x1,
        }
    }
}

/// Builds the post-selection overlaps for a detector axis with polar angle
/// theta in (0, pi) and azimuth phi in (0, 2 pi).
pub fn postselection_overlaps(theta: f64, phi: f64) -> Result<SpinPostSelection> {
    use std::f64::consts::PI;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::DegeneratePostSelection(format!(
            "theta must lie strictly inside (0, pi), got {theta}"
        )));
    }
    if !(phi > 0.0 && phi < 2.0 * PI) {
        return Err(Error::DegeneratePostSelection(format!(
            "phi must lie strictly inside (0, 2 pi), got {phi}"
        )));
    }
    let (ct, st) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let phase = Complex64::new(0.0, phi).exp();
    let plus_n = SpinState {
        up: Complex64::new(ct, 0.0),
        down: phase * st,
    };
    let minus_n = SpinState {
        up: Complex64::new(st, 0.0),
        down: -phase * ct,
    };

    let px = SpinState::plus_x();
    let mx = SpinState::minus_x();
    let x0_plus = plus_n.inner(&px).norm_sqr();
    let x0_minus = minus_n.inner(&px).norm_sqr();
    // Both evaluations of x1 agree to machine precision; keep the +n one.
    let x1 = px.inner(&plus_n) * plus_n.inner(&mx);
    debug_assert!((x1 + px.inner(&minus_n) * minus_n.inner(&mx)).norm() < 1e-14);

    Ok(SpinPostSelection {
        theta,
        phi,
        x0_plus,
        x0_minus,
        x1,
        plus_n,
        minus_n,
    })
}

/// First-order measurement operators M_m ~ M0_m + omega M1_m in the
/// momentum basis, for both spin outcomes.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementOperators {
    pub m0_plus: Mat2,
    pub m0_minus: Mat2,
    pub m1_plus: Mat2,
    pub m1_minus: Mat2,
    /// omega_L the first-order family is evaluated at.
    pub omega: f64,
}

impl MeasurementOperators {
    pub fn m0(&self, m: SpinOutcome) -> &Mat2 {
        match m {
            SpinOutcome::Plus => &self.m0_plus,
            SpinOutcome::Minus => &self.m0_minus,
        }
    }

    pub fn m1(&self, m: SpinOutcome) -> &Mat2 {
        match m {
            SpinOutcome::Plus => &self.m1_plus,
            SpinOutcome::Minus => &self.m1_minus,
        }
    }
}

/// The time-weighted S-matrix derivative block: W = [[t tau_t, r^r tau_r^r],
/// [r^l tau_r^l, t tau_t]]; M1_m = (1/2) W <m|-x>.
pub fn response_block(amps: &ScatteringAmplitudes, times: &ComplexTimes) -> Mat2 {
    Mat2::new(
        amps.t * times.tau_t,
        amps.r_right * times.tau_r_right,
        amps.r_left * times.tau_r_left,
        amps.t * times.tau_t,
    )
}

/// Builds M0_m = S0 <m|+x> and M1_m = (1/2) W <m|-x> at the given omega.
pub fn measurement_operators(
    amps: &ScatteringAmplitudes,
    times: &ComplexTimes,
    spin: &SpinPostSelection,
    omega: f64,
) -> MeasurementOperators {
    let s0 = amps.s_matrix();
    let w_half = response_block(amps, times).scale_re(0.5);
    MeasurementOperators {
        m0_plus: s0.scale(spin.overlap_plus_x(SpinOutcome::Plus)),
        m0_minus: s0.scale(spin.overlap_plus_x(SpinOutcome::Minus)),
        m1_plus: w_half.scale(spin.overlap_minus_x(SpinOutcome::Plus)),
        m1_minus: w_half.scale(spin.overlap_minus_x(SpinOutcome::Minus)),
        omega,
    }
}

/// Momentum outcome label: detected on the transmitted (right) or reflected
/// (left) side for a left-incoming wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Transmitted,
    Reflected,
}

pub const SIDES: [Side; 2] = [Side::Transmitted, Side::Reflected];

impl Side {
    pub fn projector(&self) -> Mat2 {
        match self {
            Side::Transmitted => Mat2::projector_right(),
            Side::Reflected => Mat2::projector_left(),
        }
    }
}

/// POVM elements E_{p,m} truncated at first order in omega_L, in the
/// incoming momentum basis.
#[derive(Debug, Clone, Copy)]
pub struct ProbabilityOperators {
    pub e_r_plus: Mat2,
    pub e_r_minus: Mat2,
    pub e_l_plus: Mat2,
    pub e_l_minus: Mat2,
    pub omega: f64,
}

impl ProbabilityOperators {
    pub fn element(&self, p: Side, m: SpinOutcome) -> &Mat2 {
        match (p, m) {
            (Side::Transmitted, SpinOutcome::Plus) => &self.e_r_plus,
            (Side::Transmitted, SpinOutcome::Minus) => &self.e_r_minus,
            (Side::Reflected, SpinOutcome::Plus) => &self.e_l_plus,
            (Side::Reflected, SpinOutcome::Minus) => &self.e_l_minus,
        }
    }

    pub fn sum(&self) -> Mat2 {
        self.e_r_plus
            .add(&self.e_r_minus)
            .add(&self.e_l_plus)
            .add(&self.e_l_minus)
    }
}

/// E_{p,m} = (Pi_p M_m)^dag (Pi_p M_m) truncated to first order in omega.
pub fn povm_elements(m_ops: &MeasurementOperators, omega: f64) -> ProbabilityOperators {
    let element = |p: Side, m: SpinOutcome| -> Mat2 {
        let pi = p.projector();
        let m0 = m_ops.m0(m);
        let m1 = m_ops.m1(m);
        let zeroth = m0.adjoint().mul(&pi).mul(m0);
        let cross = m0
            .adjoint()
            .mul(&pi)
            .mul(m1)
            .add(&m1.adjoint().mul(&pi).mul(m0));
        zeroth.add(&cross.scale_re(omega))
    };
    ProbabilityOperators {
        e_r_plus: element(Side::Transmitted, SpinOutcome::Plus),
        e_r_minus: element(Side::Transmitted, SpinOutcome::Minus),
        e_l_plus: element(Side::Reflected, SpinOutcome::Plus),
        e_l_minus: element(Side::Reflected, SpinOutcome::Minus),
        omega,
    }
}

/// The renormalized spin states after transmission (|s_r>) and reflection
/// (|s_l>): |+x> plus the (omega/2) tau admixture of |-x>.
pub fn rotated_spin_states(times: &ComplexTimes, omega: f64) -> (SpinState, SpinState) {
    let build = |tau: Complex64| {
        let px = SpinState::plus_x();
        let mx = SpinState::minus_x();
        let c = tau * (0.5 * omega);
        SpinState {
            up: px.up + c * mx.up,
            down: px.down + c * mx.down,
        }
        .normalized()
    };
    (build(times.tau_t), build(times.tau_r_left))
}
