//! Contextual values: the generalized eigenvalues assigned to the four
//! detector outcomes so that outcome frequencies reconstruct moments of the
//! dwell-time operator. Solved two ways: a real 4x4 linear system and the
//! closed forms, with singular-context detection.
//!
//! For first-order response times the solved values depend on the detector
//! geometry alone (alpha0 = 0, f_r = -f_l = 1/Im x1 for every barrier
//! shape); all momentum dependence of the decomposition lives in the POVM
//! elements. The `verify` suite certifies the response identities behind
//! this on every run.

use num_complex::Complex64;
use serde::Serialize;

use crate::dwell::{DwellMatrix, DwellSquared};
use crate::error::{Error, Result};
use crate::larmor::ComplexTimes;
use crate::linalg::{solve4, Mat2};
use crate::scattering::ScatteringAmplitudes;
use crate::spin_meter::{Side, SpinOutcome, SpinPostSelection};

/// Detector-geometry classification of the CV linear system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ContextClass {
    /// Invertible context: x1 has both real and imaginary parts.
    Regular,
    /// n in the x-z plane (x1 real): phase information lost.
    XZPlane,
    /// n in the x-y plane (x1 imaginary): amplitude information lost.
    XYPlane,
    /// |Re(x1) Im(x1)| within tolerance of zero: the system is unusable.
    NearSingular { score: f64 },
}

impl std::fmt::Display for ContextClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ContextClass::Regular => write!(f, "regular"),
            ContextClass::XZPlane => write!(f, "x-z plane (x1 real, phase response lost)"),
            ContextClass::XYPlane => write!(f, "x-y plane (x1 imaginary, amplitude response lost)"),
            ContextClass::NearSingular { score } => {
                write!(f, "near-singular (|Re x1 * Im x1| = {score:.3e})")
            }
        }
    }
}

pub const SINGULAR_TOL: f64 = 1e-9;

/// Classifies the post-selection geometry against the CV solvability
/// condition; both Re(x1) and Im(x1) must survive.
pub fn detect_singular_context(spin: &SpinPostSelection) -> ContextClass {
    let re = spin.x1.re.abs();
    let im = spin.x1.im.abs();
    let tol = SINGULAR_TOL;
    if im < tol && re < tol {
        ContextClass::NearSingular { score: re * im }
    } else if im < tol {
        ContextClass::XZPlane
    } else if re < tol {
        ContextClass::XYPlane
    } else if re * im < tol * tol {
        ContextClass::NearSingular { score: re * im }
    } else {
        ContextClass::Regular
    }
}

/// The unitarily transformed dwell operator T~_d = S0 T_d S0^dag and the
/// first-order elements of the transformed POVM.
#[derive(Debug, Clone, Copy)]
pub struct TransformedOperators {
    pub t11: f64,
    pub t22: f64,
    pub t12: Complex64,
    pub er11: f64,
    pub el22: f64,
    pub er12: Complex64,
    pub el12: Complex64,
}

impl TransformedOperators {
    pub fn t_matrix(&self) -> Mat2 {
        Mat2::new(
            Complex64::new(self.t11, 0.0),
            self.t12,
            self.t12.conj(),
            Complex64::new(self.t22, 0.0),
        )
    }
}

/// A Hermitian 2x2 operator in the momentum basis, the common shape of both
/// the dwell matrix and its square.
#[derive(Debug, Clone, Copy)]
pub struct HermitianPair {
    /// (1,1) element (left-left).
    pub d1: f64,
    /// (2,2) element (right-right).
    pub d2: f64,
    /// (2,1) element; (1,2) is its conjugate.
    pub off: Complex64,
}

impl From<&DwellMatrix> for HermitianPair {
    fn from(m: &DwellMatrix) -> Self {
        Self {
            d1: m.c_ll,
            d2: m.c_rr,
            off: m.c_rl,
        }
    }
}

impl From<&DwellSquared> for HermitianPair {
    fn from(m: &DwellSquared) -> Self {
        Self {
            d1: m.c11,
            d2: m.c22,
            off: m.c21,
        }
    }
}

impl HermitianPair {
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            Complex64::new(self.d1, 0.0),
            self.off.conj(),
            self.off,
            Complex64::new(self.d2, 0.0),
        )
    }
}

/// Transforms a Hermitian operator and assembles the first-order POVM
/// elements in the transformed frame.
pub fn transformed_for(
    op: &HermitianPair,
    amps: &ScatteringAmplitudes,
    times: &ComplexTimes,
    spin: &SpinPostSelection,
) -> TransformedOperators {
    let s0 = amps.s_matrix();
    let tt = s0.mul(&op.matrix()).mul(&s0.adjoint());

    let x1 = spin.x1;
    let (cap_t, cap_r) = (amps.transmission, amps.reflection);
    let er11 = ((times.tau_t * cap_t + times.tau_r_right * cap_r) * x1).re;
    let el22 = ((times.tau_t * cap_t + times.tau_r_left * cap_r) * x1).re;
    let c = amps.r_left.conj() * amps.t * times.delta_tau.conj() * 0.5;
    let er12 = c * x1;
    let el12 = -c * x1.conj();

    TransformedOperators {
        t11: tt.e[0][0].re,
        t22: tt.e[1][1].re,
        t12: tt.e[0][1],
        er11,
        el22,
        er12,
        el12,
    }
}

/// transformed_for applied to the dwell matrix itself.
pub fn transformed_operators(
    dwell: &DwellMatrix,
    amps: &ScatteringAmplitudes,
    times: &ComplexTimes,
    spin: &SpinPostSelection,
) -> TransformedOperators {
    transformed_for(&HermitianPair::from(dwell), amps, times, spin)
}

/// The four contextual values at working frequency omega, their pole
/// decomposition alpha = alpha0 +- alpha1 / (omega x0), and solver
/// diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct ContextualValues {
    pub alpha_r_plus: f64,
    pub alpha_r_minus: f64,
    pub alpha_l_plus: f64,
    pub alpha_l_minus: f64,
    pub alpha0_r: f64,
    pub alpha0_l: f64,
    pub alpha1_r: f64,
    pub alpha1_l: f64,
    pub f_r: f64,
    pub f_l: f64,
    pub omega: f64,
    pub condition_number: f64,
}

impl ContextualValues {
    pub fn value(&self, p: Side, m: SpinOutcome) -> f64 {
        match (p, m) {
            (Side::Transmitted, SpinOutcome::Plus) => self.alpha_r_plus,
            (Side::Transmitted, SpinOutcome::Minus) => self.alpha_r_minus,
            (Side::Reflected, SpinOutcome::Plus) => self.alpha_l_plus,
            (Side::Reflected, SpinOutcome::Minus) => self.alpha_l_minus,
        }
    }

    fn from_decomposition(
        alpha0_r: f64,
        alpha0_l: f64,
        f_r: f64,
        f_l: f64,
        spin: &SpinPostSelection,
        omega: f64,
        condition_number: f64,
    ) -> Self {
        let x00 = spin.x0_plus * spin.x0_minus;
        let alpha1_r = -x00 * f_r;
        let alpha1_l = x00 * f_l;
        let assemble = |a0: f64, a1: f64, x0: f64, sign: f64| a0 + sign * a1 / (omega * x0);
        Self {
            alpha_r_plus: assemble(alpha0_r, alpha1_r, spin.x0_plus, 1.0),
            alpha_r_minus: assemble(alpha0_r, alpha1_r, spin.x0_minus, -1.0),
            alpha_l_plus: assemble(alpha0_l, alpha1_l, spin.x0_plus, 1.0),
            alpha_l_minus: assemble(alpha0_l, alpha1_l, spin.x0_minus, -1.0),
            alpha0_r,
            alpha0_l,
            alpha1_r,
            alpha1_l,
            f_r,
            f_l,
            omega,
            condition_number,
        }
    }
}

fn check_context(spin: &SpinPostSelection) -> Result<()> {
    match detect_singular_context(spin) {
        ContextClass::Regular => Ok(()),
        class => Err(Error::SingularContext(class)),
    }
}

/// Solves the 4x4 real system (T11, Re T12, Im T12, T22) for
/// (xi_r^0, xi_l^0, d alpha_r^(1), d alpha_l^(1)) by pivoted LU and
/// reconstructs the CVs.
pub fn solve_cvs_linear(
    t_ops: &TransformedOperators,
    spin: &SpinPostSelection,
    omega: f64,
) -> Result<ContextualValues> {
    check_context(spin)?;
    // Unknown order: xi_r0, xi_l0, d_alpha_r1, d_alpha_l1.
    let a = [
        [1.0, 0.0, t_ops.er11, 0.0],
        [0.0, 0.0, t_ops.er12.re, t_ops.el12.re],
        [0.0, 0.0, t_ops.er12.im, t_ops.el12.im],
        [0.0, 1.0, 0.0, t_ops.el22],
    ];
    let b = [t_ops.t11, t_ops.t12.re, t_ops.t12.im, t_ops.t22];
    let (x, _det, cond) = solve4(a, b, 1e-13).ok_or_else(|| {
        let class = match detect_singular_context(spin) {
            ContextClass::Regular => ContextClass::NearSingular {
                score: spin.x1.re.abs() * spin.x1.im.abs(),
            },
            c => c,
        };
        Error::SingularContext(class)
    })?;
    let [xi_r0, xi_l0, da_r1, da_l1] = x;
    Ok(ContextualValues::from_decomposition(
        xi_r0, xi_l0, -da_r1, da_l1, spin, omega, cond,
    ))
}

/// Closed-form CVs from the explicit inverse of the 4x4 system.
pub fn cvs_closed_form(
    t_ops: &TransformedOperators,
    _dwell: &DwellMatrix,
    amps: &ScatteringAmplitudes,
    times: &ComplexTimes,
    spin: &SpinPostSelection,
    omega: f64,
) -> Result<ContextualValues> {
    check_context(spin)?;
    let x1 = spin.x1;
    let (cap_t, cap_r) = (amps.transmission, amps.reflection);
    let dtau = times.delta_tau;
    let denom = cap_r * cap_t * dtau.norm_sqr() * x1.re * x1.im;
    if denom.abs() < 1e-300 || !denom.is_finite() {
        return Err(Error::SingularContext(ContextClass::NearSingular {
            score: denom.abs(),
        }));
    }
    let f_r = (t_ops.t12 * amps.t * amps.r_right.conj() * dtau * x1).im / denom;
    let f_l = (t_ops.t12 * amps.t.conj() * amps.r_left * dtau * x1.conj()).im / denom;
    let alpha0_r = t_ops.t11 + t_ops.er11 * f_r;
    let alpha0_l = t_ops.t22 - t_ops.el22 * f_l;

    // Condition diagnostic from the same matrix the linear route assembles.
    let a = [
        [1.0, 0.0, t_ops.er11, 0.0],
        [0.0, 0.0, t_ops.er12.re, t_ops.el12.re],
        [0.0, 0.0, t_ops.er12.im, t_ops.el12.im],
        [0.0, 1.0, 0.0, t_ops.el22],
    ];
    let cond = solve4(a, [0.0; 4], 1e-13)
        .map(|(_, _, c)| c)
        .unwrap_or(f64::INFINITY);

    Ok(ContextualValues::from_decomposition(
        alpha0_r, alpha0_l, f_r, f_l, spin, omega, cond,
    ))
}

/// Second-moment CVs beta_{p,m}: the same solve with the squared matrix in
/// place of the dwell matrix.
pub fn second_moment_cvs(
    squared: &DwellSquared,
    amps: &ScatteringAmplitudes,
    times: &ComplexTimes,
    spin: &SpinPostSelection,
    omega: f64,
) -> Result<ContextualValues> {
    let t_ops = transformed_for(&HermitianPair::from(squared), amps, times, spin);
    solve_cvs_linear(&t_ops, spin, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwell::{dwell_matrix, squared_matrix};
    use crate::larmor::{complex_times, default_probe_omega};
    use crate::potential::{BarrierSpec, UnitSystem};
    use crate::scattering::{interior_from_amplitudes, solve_amplitudes, SolverOptions};
    use crate::spin_meter::{
        measurement_operators, postselection_overlaps, povm_elements, SIDES, SPIN_OUTCOMES,
    };
    use std::f64::consts::PI;

    fn fig_spin() -> SpinPostSelection {
        postselection_overlaps(PI / 2.0 - PI / 8.0, PI / 4.0).unwrap()
    }

    struct Stack {
        amps: ScatteringAmplitudes,
        dwell: DwellMatrix,
        times: ComplexTimes,
        t_ops: TransformedOperators,
        spin: SpinPostSelection,
        omega: f64,
    }

    fn stack(b: &BarrierSpec, k: f64, spin: SpinPostSelection) -> Stack {
        let opts = SolverOptions::default();
        let amps = solve_amplitudes(b, k, 0.0, &opts).unwrap();
        let wave = interior_from_amplitudes(b, &amps, &opts).unwrap();
        let dwell = dwell_matrix(&wave, b).unwrap();
        let times = complex_times(b, k, default_probe_omega(b), &opts).unwrap();
        let t_ops = transformed_operators(&dwell, &amps, &times, &spin);
        let omega = 1e-3 * b.v0;
        Stack {
            amps,
            dwell,
            times,
            t_ops,
            spin,
            omega,
        }
    }

    fn square_3pi() -> BarrierSpec {
        BarrierSpec::square((3.0 * PI).powi(2), 1.0, UnitSystem::default()).unwrap()
    }

    #[test]
    fn classification_matches_geometry() {
        assert_eq!(
            detect_singular_context(&postselection_overlaps(PI / 2.0, PI / 2.0).unwrap()),
            ContextClass::XYPlane
        );
        assert_eq!(
            detect_singular_context(&postselection_overlaps(1e-10, 1.0).unwrap()),
            ContextClass::XZPlane
        );
        assert_eq!(detect_singular_context(&fig_spin()), ContextClass::Regular);
        assert!(matches!(
            detect_singular_context(&postselection_overlaps(PI / 2.0, 1e-12).unwrap()),
            ContextClass::NearSingular { .. }
        ));
    }

    #[test]
    fn transformed_matches_explicit_elements() {
        let b = BarrierSpec::trapezoid(
            (3.0 * PI).powi(2),
            0.5 * (3.0 * PI).powi(2),
            1.0,
            UnitSystem::default(),
        )
        .unwrap();
        let s = stack(&b, 0.5 * b.k0(), fig_spin());
        let (t, rr, rl) = (s.amps.t, s.amps.r_right, s.amps.r_left);
        let (cap_t, cap_r) = (s.amps.transmission, s.amps.reflection);
        let (c_ll, c_rr, c_rl) = (s.dwell.c_ll, s.dwell.c_rr, s.dwell.c_rl);

        let t11 = cap_t * c_ll + cap_r * c_rr + 2.0 * (t.conj() * rr * c_rl).re;
        let t22 = cap_r * c_ll + cap_t * c_rr + 2.0 * (rl.conj() * t * c_rl).re;
        let t12 = rl.conj() * t * c_ll
            + rl.conj() * rr * c_rl
            + c_rl.conj() * cap_t
            + t.conj() * rr * c_rr;
        assert!((s.t_ops.t11 - t11).abs() < 1e-12 * t11.abs().max(1.0));
        assert!((s.t_ops.t22 - t22).abs() < 1e-12 * t22.abs().max(1.0));
        assert!((s.t_ops.t12 - t12).norm() < 1e-12 * t12.norm().max(1.0));
        // Trace preserved under the unitary conjugation.
        assert!((s.t_ops.t11 + s.t_ops.t22 - (c_ll + c_rr)).abs() < 1e-10);
    }

    #[test]
    fn transformed_povm_elements_match_sandwich() {
        let b = BarrierSpec::trapezoid(
            (3.0 * PI).powi(2),
            0.5 * (3.0 * PI).powi(2),
            1.0,
            UnitSystem::default(),
        )
        .unwrap();
        let s = stack(&b, 0.6 * b.k0(), fig_spin());
        let m_ops = measurement_operators(&s.amps, &s.times, &s.spin, s.omega);
        let povm = povm_elements(&m_ops, s.omega);
        let s0 = s.amps.s_matrix();
        // E~_{r,+n} = S0 E_{r,+n} S0^dag = x0 Pi_r + omega [[er11, er12],[er12*, 0]].
        let sandwich = s0.mul(&povm.e_r_plus).mul(&s0.adjoint());
        let first = sandwich.sub(&Mat2::projector_right().scale_re(s.spin.x0_plus));
        assert!((first.e[0][0].re - s.omega * s.t_ops.er11).abs() < 1e-10);
        assert!((first.e[0][1] - s.t_ops.er12.scale(s.omega)).norm() < 1e-10);
        assert!(first.e[1][1].norm() < 1e-10);
        // And the reflected-side (2,2) and (1,2) elements.
        let sandwich_l = s0.mul(&povm.e_l_plus).mul(&s0.adjoint());
        let first_l = sandwich_l.sub(&Mat2::projector_left().scale_re(s.spin.x0_plus));
        assert!((first_l.e[1][1].re - s.omega * s.t_ops.el22).abs() < 1e-10);
        assert!((first_l.e[0][1] - s.t_ops.el12.scale(s.omega)).norm() < 1e-10);
    }

    #[test]
    fn square_barrier_cvs_depend_only_on_spin() {
        let b = square_3pi();
        let spin = fig_spin();
        let mut values = Vec::new();
        for frac in [0.2, 0.5, 0.8] {
            let s = stack(&b, frac * b.k0(), spin);
            let cvs = solve_cvs_linear(&s.t_ops, &spin, s.omega).unwrap();
            assert!(
                cvs.alpha0_r.abs() < 1e-8 * (cvs.alpha1_r / s.omega).abs(),
                "alpha0_r = {}",
                cvs.alpha0_r
            );
            assert!(cvs.alpha0_l.abs() < 1e-8 * (cvs.alpha1_l / s.omega).abs());
            values.push(s.omega * cvs.alpha_r_plus);
        }
        let spread = values.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x))
            - values.iter().fold(f64::INFINITY, |a, &x| a.min(x));
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        assert!(spread.abs() < 1e-6 * mean.abs(), "spread {spread}");
        // Closed-form value: -x0_minus / Im x1, and f_r = 1/Im x1.
        let expect = -spin.x0_minus / spin.x1.im;
        assert!((values[0] - expect).abs() < 1e-6 * expect.abs());
    }

    #[test]
    fn square_barrier_f_functions() {
        let b = square_3pi();
        let spin = fig_spin();
        let s = stack(&b, 0.5 * b.k0(), spin);
        let cvs = cvs_closed_form(&s.t_ops, &s.dwell, &s.amps, &s.times, &spin, s.omega).unwrap();
        let expect = 1.0 / spin.x1.im;
        assert!((cvs.f_r - expect).abs() < 1e-6 * expect.abs());
        assert!((cvs.f_l + expect).abs() < 1e-6 * expect.abs());
    }

    #[test]
    fn sign_structure_square_barrier() {
        let b = square_3pi();
        let spin = fig_spin();
        assert!(spin.x1.im > 0.0);
        let s = stack(&b, 0.4 * b.k0(), spin);
        let cvs = solve_cvs_linear(&s.t_ops, &spin, s.omega).unwrap();
        assert!(cvs.alpha_r_plus < 0.0);
        assert!(cvs.alpha_r_minus > 0.0);
    }

    #[test]
    fn dual_route_agreement_on_presets() {
        let u = UnitSystem::default();
        let k0 = 3.0 * PI;
        let barriers = [
            BarrierSpec::square(k0 * k0, 1.0, u).unwrap(),
            BarrierSpec::quadratic(k0 * k0, k0 * k0, 1.0, u).unwrap(),
            BarrierSpec::trapezoid(k0 * k0, 0.5 * k0 * k0, 1.0, u).unwrap(),
        ];
        let spin = fig_spin();
        for b in &barriers {
            for frac in [0.3, 0.7] {
                let s = stack(b, frac * b.k0(), spin);
                let lin = solve_cvs_linear(&s.t_ops, &spin, s.omega).unwrap();
                let cf =
                    cvs_closed_form(&s.t_ops, &s.dwell, &s.amps, &s.times, &spin, s.omega).unwrap();
                for (a, bb) in [
                    (lin.alpha_r_plus, cf.alpha_r_plus),
                    (lin.alpha_r_minus, cf.alpha_r_minus),
                    (lin.alpha_l_plus, cf.alpha_l_plus),
                    (lin.alpha_l_minus, cf.alpha_l_minus),
                ] {
                    assert!((a - bb).abs() < 1e-8 * a.abs().max(1.0), "{a} vs {bb}");
                }
            }
        }
    }

    #[test]
    fn decomposition_reconstructs_dwell_operator() {
        let b = BarrierSpec::trapezoid(
            (3.0 * PI).powi(2),
            0.5 * (3.0 * PI).powi(2),
            1.0,
            UnitSystem::default(),
        )
        .unwrap();
        let spin = fig_spin();
        let s = stack(&b, 0.55 * b.k0(), spin);
        let cvs = solve_cvs_linear(&s.t_ops, &spin, s.omega).unwrap();
        let m_ops = measurement_operators(&s.amps, &s.times, &s.spin, s.omega);
        let povm = povm_elements(&m_ops, s.omega);
        let mut sum = Mat2::zero();
        for p in SIDES {
            for m in SPIN_OUTCOMES {
                sum = sum.add(&povm.element(p, m).scale_re(cvs.value(p, m)));
            }
        }
        let target = s.dwell.matrix();
        let scale = target.max_abs();
        assert!(
            sum.max_abs_diff(&target) < 1e-8 * scale,
            "residual {}",
            sum.max_abs_diff(&target) / scale
        );
    }

    #[test]
    fn divergence_scaling_in_omega() {
        let b = square_3pi();
        let spin = fig_spin();
        let s = stack(&b, 0.5 * b.k0(), spin);
        let cv1 = solve_cvs_linear(&s.t_ops, &spin, s.omega).unwrap();
        let cv2 = solve_cvs_linear(&s.t_ops, &spin, 2.0 * s.omega).unwrap();
        let d1 = cv1.alpha_r_plus - cv1.alpha0_r;
        let d2 = cv2.alpha_r_plus - cv2.alpha0_r;
        assert!((d1 - 2.0 * d2).abs() < 1e-12 * d1.abs());
    }

    #[test]
    fn singular_contexts_rejected_by_both_routes() {
        let b = square_3pi();
        let xy = postselection_overlaps(PI / 2.0, PI / 2.0).unwrap();
        let xz = postselection_overlaps(0.3, 1e-13).unwrap();
        for spin in [xy, xz] {
            let s = stack(&b, 0.5 * b.k0(), spin);
            let lin = solve_cvs_linear(&s.t_ops, &spin, s.omega);
            let cf = cvs_closed_form(&s.t_ops, &s.dwell, &s.amps, &s.times, &spin, s.omega);
            assert!(matches!(lin, Err(Error::SingularContext(_))));
            assert!(matches!(cf, Err(Error::SingularContext(_))));
        }
    }

    #[test]
    fn beta_cvs_symmetric_barrier() {
        let b = BarrierSpec::quadratic(
            (3.0 * PI).powi(2),
            (3.0 * PI).powi(2),
            1.0,
            UnitSystem::default(),
        )
        .unwrap();
        let spin = fig_spin();
        let s = stack(&b, 0.5 * b.k0(), spin);
        let sq = squared_matrix(&s.dwell);
        let beta = second_moment_cvs(&sq, &s.amps, &s.times, &spin, s.omega).unwrap();
        let alpha = solve_cvs_linear(&s.t_ops, &spin, s.omega).unwrap();
        // Symmetric barrier: beta_{r,m} = beta_{l,m}.
        assert!((beta.alpha_r_plus - beta.alpha_l_plus).abs() < 1e-6 * beta.alpha_r_plus.abs());
        assert!((beta.alpha_r_minus - beta.alpha_l_minus).abs() < 1e-6 * beta.alpha_r_minus.abs());
        // beta is not alpha^2.
        assert!(
            (beta.alpha_r_plus - alpha.alpha_r_plus * alpha.alpha_r_plus).abs()
                > 1e-3 * beta.alpha_r_plus.abs()
        );
    }
}
