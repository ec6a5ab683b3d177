//! One-stop evaluation of the full measurement stack at a single
//! wavenumber, shared by the CLI, the verification suite, and the examples.

use num_complex::Complex64;

use crate::contextual::{
    second_moment_cvs, solve_cvs_linear, transformed_operators, ContextualValues,
    TransformedOperators,
};
use crate::dwell::{
    dwell_eigensystem, dwell_matrix, squared_matrix, DwellEigensystem, DwellMatrix, DwellSquared,
};
use crate::error::Result;
use crate::estimators::{
    conditioned_average, disturbance, second_moment_and_uncertainty, steinberg_time,
    ConditionedResult, InitialSystemState,
};
use crate::larmor::{complex_times, default_probe_omega, ComplexTimes};
use crate::potential::{BarrierSpec, UnitSystem};
use crate::scattering::{
    interior_from_amplitudes, solve_amplitudes, InteriorWave, ScatteringAmplitudes, SolverOptions,
};
use crate::spin_meter::{
    measurement_operators, povm_elements, MeasurementOperators, ProbabilityOperators, Side,
    SpinPostSelection,
};

/// Barrier, detector geometry, and strength/discretization settings for a
/// sweep; everything needed to evaluate any quantity at any k.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub barrier: BarrierSpec,
    pub spin: SpinPostSelection,
    /// Working omega_L the CVs are scaled for.
    pub omega: f64,
    /// Probe omega_L for the first-order time extraction.
    pub probe_omega: f64,
    pub solver: SolverOptions,
}

impl Scenario {
    pub fn new(barrier: BarrierSpec, spin: SpinPostSelection) -> Self {
        let omega = 1e-3 * barrier.v0 / barrier.units.hbar;
        let probe_omega = default_probe_omega(&barrier);
        Self {
            barrier,
            spin,
            omega,
            probe_omega,
            solver: SolverOptions::default(),
        }
    }

    /// Evaluates the full stack at wavenumber k. Scattering and dwell parts
    /// must succeed; the Larmor-clock stack may fail independently (opaque
    /// or reflectionless barriers) and carries its own Result.
    pub fn at_k(&self, k: f64) -> Result<KPoint> {
        let amps = solve_amplitudes(&self.barrier, k, 0.0, &self.solver)?;
        let wave = interior_from_amplitudes(&self.barrier, &amps, &self.solver)?;
        let dwell = dwell_matrix(&wave, &self.barrier)?;
        let eigen = dwell_eigensystem(&dwell);
        let squared = squared_matrix(&dwell);
        let clock = complex_times(&self.barrier, k, self.probe_omega, &self.solver).map(|times| {
            let t_ops = transformed_operators(&dwell, &amps, &times, &self.spin);
            let m_ops = measurement_operators(&amps, &times, &self.spin, self.omega);
            let povm = povm_elements(&m_ops, self.omega);
            let cvs = solve_cvs_linear(&t_ops, &self.spin, self.omega);
            let beta_cvs = second_moment_cvs(&squared, &amps, &times, &self.spin, self.omega);
            ClockPoint {
                times,
                t_ops,
                m_ops,
                povm,
                cvs,
                beta_cvs,
            }
        });
        Ok(KPoint {
            k,
            spin: self.spin,
            omega: self.omega,
            units: self.barrier.units,
            amps,
            wave,
            dwell,
            eigen,
            squared,
            clock,
        })
    }
}

/// The Larmor-clock-dependent part of a k-point. CV solves carry their own
/// Result because singular contexts leave the POVM intact.
#[derive(Debug, Clone)]
pub struct ClockPoint {
    pub times: ComplexTimes,
    pub t_ops: TransformedOperators,
    pub m_ops: MeasurementOperators,
    pub povm: ProbabilityOperators,
    pub cvs: Result<ContextualValues>,
    pub beta_cvs: Result<ContextualValues>,
}

/// Everything the toolkit can say about one wavenumber.
#[derive(Debug, Clone)]
pub struct KPoint {
    pub k: f64,
    pub spin: SpinPostSelection,
    pub omega: f64,
    pub units: UnitSystem,
    pub amps: ScatteringAmplitudes,
    pub wave: InteriorWave,
    pub dwell: DwellMatrix,
    pub eigen: DwellEigensystem,
    pub squared: DwellSquared,
    pub clock: Result<ClockPoint>,
}

impl KPoint {
    pub fn clock(&self) -> Result<&ClockPoint> {
        self.clock.as_ref().map_err(Clone::clone)
    }

    pub fn times(&self) -> Result<&ComplexTimes> {
        Ok(&self.clock()?.times)
    }

    pub fn cvs(&self) -> Result<&ContextualValues> {
        self.clock()?.cvs.as_ref().map_err(Clone::clone)
    }

    pub fn beta_cvs(&self) -> Result<&ContextualValues> {
        self.clock()?.beta_cvs.as_ref().map_err(Clone::clone)
    }

    /// Conditioned average on the chosen side for a left-incoming state.
    pub fn conditioned(&self, side: Side) -> Result<ConditionedResult> {
        conditioned_average(
            self.cvs()?,
            &self.clock()?.povm,
            &self.dwell,
            &self.amps,
            &InitialSystemState::left_incoming(),
            side,
        )
    }

    /// Commutator-route disturbance for a left-incoming state.
    pub fn disturbance_direct(&self, side: Side) -> Result<f64> {
        disturbance(
            self.cvs()?,
            &self.amps,
            &self.clock()?.times,
            &self.spin,
            &InitialSystemState::left_incoming(),
            side,
            self.omega,
        )
    }

    /// CV-measured (second moment, uncertainty) for a left-incoming state.
    pub fn moments(&self) -> Result<(f64, f64)> {
        second_moment_and_uncertainty(
            self.cvs()?,
            self.beta_cvs()?,
            &self.clock()?.povm,
            &InitialSystemState::left_incoming(),
        )
    }

    /// Steinberg comparison time (symmetric barriers only).
    pub fn steinberg(&self) -> Result<Complex64> {
        steinberg_time(&self.wave, &self.amps, self.units)
    }
}
