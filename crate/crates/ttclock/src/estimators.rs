//! Headline quantities: CV-weighted expectations, conditioned (tunneling
//! time) averages, weak values, the measurement disturbance, second moments,
//! and the projector-based comparison time.
//!
//! Post-selection bookkeeping is done in the post-scattering frame: the
//! zero-order measurement maps rho_in to rho_out = S0 rho_in S0^dag, the
//! side projector Pi_p acts there, and the measurement operators conjugated
//! by S0^dag carry the first-order clock response. In that frame the
//! zeroth-order operators commute with the projector, so the disturbance is
//! purely the first-order non-commutativity the decomposition attributes it
//! to, and conditioned_avg = Re(weak value) + disturbance holds exactly.

use num_complex::Complex64;

use crate::contextual::ContextualValues;
use crate::dwell::DwellMatrix;
use crate::error::{Error, Result};
use crate::larmor::ComplexTimes;
use crate::linalg::Mat2;
use crate::potential::UnitSystem;
use crate::quad::simpson_uniform_complex;
use crate::scattering::{InteriorWave, ScatteringAmplitudes};
use crate::spin_meter::{
    response_block, ProbabilityOperators, Side, SpinOutcome, SpinPostSelection, SIDES,
    SPIN_OUTCOMES,
};

/// Initial system state alpha |k_l> + beta |k_r> in the incoming momentum
/// basis; normalized on construction.
#[derive(Debug, Clone, Copy)]
pub struct InitialSystemState {
    pub amp_left: Complex64,
    pub amp_right: Complex64,
}

impl InitialSystemState {
    pub fn left_incoming() -> Self {
        Self {
            amp_left: Complex64::new(1.0, 0.0),
            amp_right: Complex64::new(0.0, 0.0),
        }
    }

    pub fn right_incoming() -> Self {
        Self {
            amp_left: Complex64::new(0.0, 0.0),
            amp_right: Complex64::new(1.0, 0.0),
        }
    }

    pub fn superposition(amp_left: Complex64, amp_right: Complex64) -> Result<Self> {
        let n = (amp_left.norm_sqr() + amp_right.norm_sqr()).sqrt();
        if n < 1e-300 {
            return Err(Error::Domain("zero initial state".into()));
        }
        Ok(Self {
            amp_left: amp_left / n,
            amp_right: amp_right / n,
        })
    }

    /// rho_in = |psi><psi| in the momentum basis.
    pub fn density(&self) -> Mat2 {
        let (a, b) = (self.amp_left, self.amp_right);
        Mat2::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj())
    }
}

/// How a conditioned average was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionedRoute {
    ProbabilityWeighted,
    ClosedForm,
}

/// A conditioned average together with its weak-value / disturbance
/// decomposition; conditioned_avg = Re(weak_value) + disturbance.
#[derive(Debug, Clone, Copy)]
pub struct ConditionedResult {
    pub conditioned_avg: f64,
    pub weak_value: Complex64,
    pub disturbance: f64,
    /// Probability of the post-selected side for this initial state.
    pub transmitted_prob: f64,
    pub route: ConditionedRoute,
}

fn probability(povm: &ProbabilityOperators, p: Side, m: SpinOutcome, rho: &Mat2) -> f64 {
    povm.element(p, m).mul(rho).trace().re
}

/// The CV-weighted unconditioned average Sum alpha_{p,m} Tr[E_{p,m} rho].
pub fn expectation_via_cvs(
    cvs: &ContextualValues,
    povm: &ProbabilityOperators,
    state: &InitialSystemState,
) -> f64 {
    let rho = state.density();
    let mut total = 0.0;
    for p in SIDES {
        for m in SPIN_OUTCOMES {
            total += cvs.value(p, m) * probability(povm, p, m, &rho);
        }
    }
    total
}

/// Weak value of the dwell operator for a left-incoming state post-selected
/// on the transmitted side: T_d^w = C_ll + (r^r / t) C_rl.
pub fn weak_value(dwell: &DwellMatrix, amps: &ScatteringAmplitudes) -> Result<Complex64> {
    weak_value_for_state(
        dwell,
        amps,
        &InitialSystemState::left_incoming(),
        Side::Transmitted,
    )
}

/// Weak value <f| T_d |psi> / <f|psi> with |f> the backward-evolved
/// post-selection on the chosen side.
pub fn weak_value_for_state(
    dwell: &DwellMatrix,
    amps: &ScatteringAmplitudes,
    state: &InitialSystemState,
    side: Side,
) -> Result<Complex64> {
    // |f> = S0^dag |k_side>: rows of S0 conjugated.
    let s0 = amps.s_matrix();
    let row = match side {
        Side::Transmitted => 0,
        Side::Reflected => 1,
    };
    let f = [s0.e[row][0], s0.e[row][1]]; // <f| = (row of S0)
    let psi = [state.amp_left, state.amp_right];
    let td = dwell.matrix();
    let tpsi = [
        td.e[0][0] * psi[0] + td.e[0][1] * psi[1],
        td.e[1][0] * psi[0] + td.e[1][1] * psi[1],
    ];
    let overlap = f[0] * psi[0] + f[1] * psi[1];
    if overlap.norm() < 1e-12 {
        return Err(Error::VanishingPostSelection(overlap.norm_sqr()));
    }
    Ok((f[0] * tpsi[0] + f[1] * tpsi[1]) / overlap)
}

/// Conditioned average of the dwell operator over the given side, by the
/// operational probability-weighted route, with its weak-value and
/// disturbance split.
pub fn conditioned_average(
    cvs: &ContextualValues,
    povm: &ProbabilityOperators,
    dwell: &DwellMatrix,
    amps: &ScatteringAmplitudes,
    state: &InitialSystemState,
    side: Side,
) -> Result<ConditionedResult> {
    let rho = state.density();
    let p_plus = probability(povm, side, SpinOutcome::Plus, &rho);
    let p_minus = probability(povm, side, SpinOutcome::Minus, &rho);
    let p_side = p_plus + p_minus;
    if p_side < 1e-12 {
        return Err(Error::VanishingPostSelection(p_side));
    }
    let conditioned_avg = (cvs.value(side, SpinOutcome::Plus) * p_plus
        + cvs.value(side, SpinOutcome::Minus) * p_minus)
        / p_side;
    let wv = weak_value_for_state(dwell, amps, state, side)?;
    Ok(ConditionedResult {
        conditioned_avg,
        weak_value: wv,
        disturbance: conditioned_avg - wv.re,
        transmitted_prob: p_side,
        route: ConditionedRoute::ProbabilityWeighted,
    })
}

/// Closed-form conditioned average for the transmitted side and a
/// left-incoming state: T11 - R Re[delta_tau^* x1] f_r.
pub fn conditioned_average_closed_form(
    t11: f64,
    reflection: f64,
    times: &ComplexTimes,
    spin: &SpinPostSelection,
    cvs: &ContextualValues,
) -> f64 {
    t11 - reflection * (times.delta_tau.conj() * spin.x1).re * cvs.f_r
}

/// Measurement disturbance from the first-order non-commutativity of the
/// measurement operators with the side projector, evaluated in the
/// post-scattering frame.
pub fn disturbance(
    cvs: &ContextualValues,
    amps: &ScatteringAmplitudes,
    times: &ComplexTimes,
    spin: &SpinPostSelection,
    state: &InitialSystemState,
    side: Side,
    omega: f64,
) -> Result<f64> {
    let s0 = amps.s_matrix();
    let rho_out = s0.mul(&state.density()).mul(&s0.adjoint());
    let f_proj = side.projector();
    let p_side = f_proj.mul(&rho_out).trace().re;
    if p_side < 1e-12 {
        return Err(Error::VanishingPostSelection(p_side));
    }
    // V = (1/2) W S0^dag; N0_{p,m} = <m|+x> Pi_p, N1_{p,m} = Pi_p V <m|-x>.
    let v = response_block(amps, times).scale_re(0.5).mul(&s0.adjoint());
    let mut total = 0.0;
    for p in SIDES {
        let pi = p.projector();
        for m in SPIN_OUTCOMES {
            let y = spin.overlap_plus_x(m);
            let z = spin.overlap_minus_x(m);
            let n0 = pi.scale(y);
            let n1 = pi.mul(&v).scale(z);
            // [N0^dag, F] N0 + omega ([N0^dag, F] N1 + N0^dag [F, N1])
            let c0 = n0.adjoint().commutator(&f_proj);
            let inner = c0.mul(&n0).add(
                &c0.mul(&n1)
                    .add(&n0.adjoint().mul(&f_proj.commutator(&n1)))
                    .scale_re(omega),
            );
            total += cvs.value(p, m) * inner.mul(&rho_out).trace().re;
        }
    }
    Ok(total / p_side)
}

/// Second moment and dwell-time uncertainty from the alpha and beta CV
/// families weighted by the same outcome probabilities.
pub fn second_moment_and_uncertainty(
    alpha: &ContextualValues,
    beta: &ContextualValues,
    povm: &ProbabilityOperators,
    state: &InitialSystemState,
) -> Result<(f64, f64)> {
    let first = expectation_via_cvs(alpha, povm, state);
    let second = expectation_via_cvs(beta, povm, state);
    let var = second - first * first;
    let tol = 1e-10 * second.abs().max(1.0);
    if var < -tol {
        return Err(Error::NegativeVariance(var));
    }
    Ok((second, var.max(0.0).sqrt()))
}

/// Steinberg's projector-based transmission time
/// tau_ts = (m / hbar k) (integral of phi_r phi_l over the barrier) / t,
/// defined for symmetric barriers; no conjugation in the integrand.
pub fn steinberg_time(
    wave: &InteriorWave,
    amps: &ScatteringAmplitudes,
    units: UnitSystem,
) -> Result<Complex64> {
    let sym = (amps.r_left - amps.r_right).norm();
    if sym > 1e-8 * amps.r_left.norm().max(1e-12) {
        return Err(Error::Domain(
            "Steinberg comparison requires a symmetric barrier (r^l = r^r)".into(),
        ));
    }
    if amps.t.norm() < 1e-12 {
        return Err(Error::AmplitudeTooSmall {
            name: "t",
            magnitude: amps.t.norm(),
        });
    }
    let vals: Vec<Complex64> = wave
        .phi_right
        .iter()
        .zip(&wave.phi_left)
        .map(|(r, l)| r * l)
        .collect();
    let integral = simpson_uniform_complex(wave.step(), &vals);
    let pref = units.mass / (units.hbar * wave.k);
    Ok(integral * pref / amps.t)
}
