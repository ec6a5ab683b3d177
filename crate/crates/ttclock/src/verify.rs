//! Numerical certification of the orthonormality identities and an
//! aggregated report over every cross-module identity the toolkit relies on.
//!
//! Identities are evaluated with the 1/sqrt(2 pi) delta-normalization
//! reinstated, the one place that factor matters.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{KPoint, Scenario};
use crate::contextual::{cvs_closed_form, detect_singular_context, ContextClass};
use crate::error::Result;
use crate::estimators::{conditioned_average_closed_form, expectation_via_cvs, InitialSystemState};
use crate::linalg::{i, Mat2};
use crate::potential::{BarrierKind, BarrierSpec};
use crate::quad::simpson_uniform_complex;
use crate::scattering::{
    check_unitarity, interior_from_amplitudes, solve_amplitudes, ScatteringAmplitudes,
    SolverOptions,
};
use crate::spin_meter::{postselection_overlaps, Side, SIDES, SPIN_OUTCOMES};

/// Outcome of one identity check; `passed` is residual <= tolerance, and
/// skipped checks record why they could not run.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
    pub abs_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl IdentityReport {
    fn new(name: &str, lhs: Complex64, rhs: Complex64, tolerance: f64) -> Self {
        let abs_residual = (lhs - rhs).norm();
        Self {
            name: name.to_string(),
            lhs: (lhs.re, lhs.im),
            rhs: (rhs.re, rhs.im),
            abs_residual,
            tolerance,
            passed: abs_residual <= tolerance,
            skipped: None,
        }
    }

    fn from_residual(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs: (residual, 0.0),
            rhs: (0.0, 0.0),
            abs_residual: residual,
            tolerance,
            passed: residual <= tolerance,
            skipped: None,
        }
    }

    fn skipped(name: &str, reason: String) -> Self {
        Self {
            name: name.to_string(),
            lhs: (0.0, 0.0),
            rhs: (0.0, 0.0),
            abs_residual: 0.0,
            tolerance: 0.0,
            passed: true,
            skipped: Some(reason),
        }
    }
}

/// Probability-conservation and S-matrix unitarity residuals as a report
/// pair; exposed so faults can be injected in tests.
pub fn unitarity_reports(amps: &ScatteringAmplitudes) -> (IdentityReport, IdentityReport) {
    let (prob, smat) = check_unitarity(amps);
    (
        IdentityReport::from_residual("unitarity_probability", prob, 1e-8),
        IdentityReport::from_residual("unitarity_smatrix", smat, 1e-8),
    )
}

fn amplitude_derivatives(
    barrier: &BarrierSpec,
    k: f64,
    opts: &SolverOptions,
) -> Result<[Complex64; 3]> {
    let h = 1e-5 * k;
    let f = |kk: f64| solve_amplitudes(barrier, kk, 0.0, opts);
    let m2 = f(k - 2.0 * h)?;
    let m1 = f(k - h)?;
    let p1 = f(k + h)?;
    let p2 = f(k + 2.0 * h)?;
    let stencil = |a: Complex64, b: Complex64, c: Complex64, d: Complex64| {
        (a - b * 8.0 + c * 8.0 - d) / (12.0 * h)
    };
    Ok([
        stencil(m2.t, m1.t, p1.t, p2.t),
        stencil(m2.r_left, m1.r_left, p1.r_left, p2.r_left),
        stencil(m2.r_right, m1.r_right, p1.r_right, p2.r_right),
    ])
}

/// Normalization identity for the left scattering state: the barrier-region
/// norm equals a boundary expression in the amplitudes and their
/// k-derivatives.
pub fn normalization_identity(
    barrier: &BarrierSpec,
    k: f64,
    opts: &SolverOptions,
) -> Result<IdentityReport> {
    use std::f64::consts::PI;
    let amps = solve_amplitudes(barrier, k, 0.0, opts)?;
    let wave = interior_from_amplitudes(barrier, &amps, opts)?;
    let a = barrier.half_width();
    let norm = 1.0 / (2.0 * PI);

    let vals: Vec<Complex64> = wave
        .phi_left
        .iter()
        .map(|z| Complex64::new(z.norm_sqr(), 0.0))
        .collect();
    let lhs = simpson_uniform_complex(wave.step(), &vals).scale(norm);

    let [dt, drl, _] = amplitude_derivatives(barrier, k, opts)?;
    let e2 = (i() * 2.0 * k * a).exp();
    let rhs = Complex64::new(a / PI, 0.0)
        + (amps.r_left * e2 - amps.r_left.conj() * e2.conj()) / (i() * 4.0 * PI * k)
        - i() / (2.0 * PI) * (amps.r_left.conj() * drl + amps.t.conj() * dt);

    Ok(IdentityReport::new(
        "appendix_b_normalization",
        lhs,
        rhs,
        1e-6,
    ))
}

/// Orthogonality identity between the left and right scattering states: the
/// barrier-region overlap equals the boundary expression.
pub fn orthogonality_identity(
    barrier: &BarrierSpec,
    k: f64,
    opts: &SolverOptions,
) -> Result<IdentityReport> {
    use std::f64::consts::PI;
    let amps = solve_amplitudes(barrier, k, 0.0, opts)?;
    let wave = interior_from_amplitudes(barrier, &amps, opts)?;
    let a = barrier.half_width();
    let norm = 1.0 / (2.0 * PI);

    let vals: Vec<Complex64> = wave
        .phi_left
        .iter()
        .zip(&wave.phi_right)
        .map(|(l, r)| l.conj() * r)
        .collect();
    let lhs = simpson_uniform_complex(wave.step(), &vals).scale(norm);

    let [dt, _, drr] = amplitude_derivatives(barrier, k, opts)?;
    let e2 = (i() * 2.0 * k * a).exp();
    let rhs = -i() / (2.0 * PI) * (amps.r_left.conj() * dt + amps.t.conj() * drr)
        + i() / (4.0 * PI * k) * (amps.t.conj() * e2.conj() - amps.t * e2);

    Ok(IdentityReport::new(
        "appendix_b_orthogonality",
        lhs,
        rhs,
        1e-6,
    ))
}

struct Worst {
    residual: f64,
    lhs: Complex64,
    rhs: Complex64,
}

impl Worst {
    fn new() -> Self {
        Self {
            residual: -1.0,
            lhs: Complex64::new(0.0, 0.0),
            rhs: Complex64::new(0.0, 0.0),
        }
    }

    fn update(&mut self, lhs: Complex64, rhs: Complex64) {
        let r = (lhs - rhs).norm();
        if r > self.residual {
            self.residual = r;
            self.lhs = lhs;
            self.rhs = rhs;
        }
    }

    fn update_re(&mut self, lhs: f64, rhs: f64) {
        self.update(Complex64::new(lhs, 0.0), Complex64::new(rhs, 0.0));
    }

    fn report(&self, name: &str, tolerance: f64) -> IdentityReport {
        IdentityReport::new(name, self.lhs, self.rhs, tolerance)
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Runs every cross-module identity over the k-grid and returns one ordered
/// report per identity (worst point over the grid). Failures to evaluate a
/// point are themselves reported; singular contexts skip the CV-dependent
/// checks with a reason.
pub fn run_all_identities(scenario: &Scenario, ks: &[f64], seed: u64) -> Vec<IdentityReport> {
    let mut reports = Vec::new();
    let mut points: Vec<KPoint> = Vec::new();
    for &k in ks {
        match scenario.at_k(k) {
            Ok(p) => points.push(p),
            Err(e) => {
                reports.push(IdentityReport {
                    name: "point_evaluation".into(),
                    lhs: (k, 0.0),
                    rhs: (k, 0.0),
                    abs_residual: f64::INFINITY,
                    tolerance: 0.0,
                    passed: false,
                    skipped: Some(format!("evaluation failed at k = {k}: {e}")),
                });
            }
        }
    }
    if points.is_empty() {
        return reports;
    }
    let context = detect_singular_context(&scenario.spin);
    let singular_reason = match context {
        ContextClass::Regular => None,
        c => Some(format!("singular context: {c}")),
    };

    // 1-2: unitarity residuals.
    let mut w_prob = Worst::new();
    let mut w_smat = Worst::new();
    for p in &points {
        let (pr, sr) = check_unitarity(&p.amps);
        w_prob.update_re(pr, 0.0);
        w_smat.update_re(sr, 0.0);
    }
    reports.push(w_prob.report("unitarity_probability", 1e-8));
    reports.push(w_smat.report("unitarity_smatrix", 1e-8));

    // 3: reciprocity (|r^l| = |r^r|; t is shared by construction).
    let mut w = Worst::new();
    for p in &points {
        w.update_re(p.amps.r_left.norm(), p.amps.r_right.norm());
    }
    reports.push(w.report("reciprocity", 1e-10));

    // 4: Hermiticity of the dwell matrix by independent integration.
    let mut w = Worst::new();
    for p in &points {
        let pref = p.units.mass / (p.units.hbar * p.k);
        let vals: Vec<Complex64> = p
            .wave
            .phi_left
            .iter()
            .zip(&p.wave.phi_right)
            .map(|(l, r)| l.conj() * r)
            .collect();
        let c_lr = simpson_uniform_complex(p.wave.step(), &vals).scale(pref);
        w.update(c_lr, p.dwell.c_rl.conj());
    }
    reports.push(w.report("dwell_hermiticity", 1e-10));

    // 5-6: square-barrier dwell-Larmor relations.
    let any_clock = points.iter().any(|p| p.clock.is_ok());
    if scenario.barrier.kind == BarrierKind::Square && any_clock {
        let mut w_tau = Worst::new();
        let mut w_crl = Worst::new();
        let mut scale_tau: f64 = 0.0;
        let mut scale_crl: f64 = 0.0;
        for p in &points {
            if let Ok(c) = p.clock() {
                w_tau.update_re(p.dwell.c_ll, c.times.tau_yt);
                scale_tau = scale_tau.max(c.times.tau_yt.abs());
                let expect = (p.amps.transmission / p.amps.reflection).sqrt() * c.times.tau_zt;
                w_crl.update(p.dwell.c_rl, re(expect));
                scale_crl = scale_crl.max(expect.abs());
            }
        }
        reports.push(w_tau.report("dwell_larmor_tau_d", 1e-4 * scale_tau));
        reports.push(w_crl.report("dwell_larmor_c_rl", 1e-4 * scale_crl));
    } else {
        let why = if any_clock {
            "square-barrier relation only".to_string()
        } else {
            "Larmor response unavailable".to_string()
        };
        reports.push(IdentityReport::skipped("dwell_larmor_tau_d", why.clone()));
        reports.push(IdentityReport::skipped("dwell_larmor_c_rl", why));
    }

    // Clock-dependent identities need the Larmor response; skip them with
    // the reason when no point could build it (free or opaque barriers).
    let clock_reason = points
        .iter()
        .all(|p| p.clock.is_err())
        .then(|| match points[0].clock() {
            Err(e) => format!("Larmor response unavailable: {e}"),
            Ok(_) => unreachable!(),
        });

    if let Some(reason) = &clock_reason {
        for name in [
            "delta_tau_conjugation",
            "response_bilinear_identity",
            "transform_diagonal_swap",
            "povm_completeness",
            "probability_normalization",
        ] {
            reports.push(IdentityReport::skipped(name, reason.clone()));
        }
    } else {
        // 7: delta tau conjugation.
        let mut w = Worst::new();
        for p in &points {
            if let Ok(c) = p.clock() {
                let lhs = c.times.tau_t - c.times.tau_r_left;
                let rhs = (c.times.tau_t - c.times.tau_r_right).conj();
                w.update(lhs, rhs);
            }
        }
        reports.push(w.report("delta_tau_conjugation", 1e-8));

        // 7b: first-order response bilinears. The spin-split times equal
        // i (m / hbar k) integrals of phi-pair products divided by the
        // matching amplitude; this is the identity that makes the CVs
        // depend on the detector geometry alone.
        let mut w = Worst::new();
        let mut scale: f64 = 0.0;
        for p in &points {
            if let Ok(c) = p.clock() {
                let pref = p.units.mass / (p.units.hbar * p.k);
                let h = p.wave.step();
                let n = p.wave.grid.len();
                let bilinear = |f: &dyn Fn(usize) -> Complex64| {
                    let vals: Vec<Complex64> = (0..n).map(f).collect();
                    simpson_uniform_complex(h, &vals).scale(pref)
                };
                let j_t = bilinear(&|j| p.wave.phi_right[j] * p.wave.phi_left[j]);
                let j_l = bilinear(&|j| p.wave.phi_left[j] * p.wave.phi_left[j]);
                let j_r = bilinear(&|j| p.wave.phi_right[j] * p.wave.phi_right[j]);
                w.update(c.times.tau_t, i() * j_t / p.amps.t);
                w.update(c.times.tau_r_left, i() * j_l / p.amps.r_left);
                w.update(c.times.tau_r_right, i() * j_r / p.amps.r_right);
                scale = scale.max(c.times.max_magnitude());
            }
        }
        reports.push(w.report("response_bilinear_identity", 1e-6 * scale));

        // 7c: the transformed diagonal swaps the dwell times exactly,
        // T11 = C_rr and T22 = C_ll (a consequence of S-matrix unitarity
        // and the response bilinears).
        let mut w = Worst::new();
        let mut scale: f64 = 0.0;
        for p in &points {
            if let Ok(c) = p.clock() {
                w.update_re(c.t_ops.t11, p.dwell.c_rr);
                w.update_re(c.t_ops.t22, p.dwell.c_ll);
                scale = scale.max(p.dwell.c_rr.abs().max(p.dwell.c_ll.abs()));
            }
        }
        reports.push(w.report("transform_diagonal_swap", 1e-8 * scale));

        // 8: POVM completeness at first order.
        let mut w = Worst::new();
        let mut tol = 0.0_f64;
        for p in &points {
            if let Ok(c) = p.clock() {
                let res = c.povm.sum().max_abs_diff(&Mat2::identity());
                w.update_re(res, 0.0);
                tol = tol.max(10.0 * p.omega * p.omega * c.times.max_magnitude().powi(2));
            }
        }
        reports.push(w.report("povm_completeness", tol.max(1e-12)));

        // 9: probability normalization for the left-incoming state.
        let mut w = Worst::new();
        for p in &points {
            if let Ok(c) = p.clock() {
                let rho = InitialSystemState::left_incoming().density();
                let mut total = 0.0;
                for pp in SIDES {
                    for m in SPIN_OUTCOMES {
                        total += c.povm.element(pp, m).mul(&rho).trace().re;
                    }
                }
                w.update_re(total, 1.0);
            }
        }
        reports.push(w.report("probability_normalization", 1e-10));
    }

    // CV-dependent identities.
    let cv_reason = singular_reason.clone().or(clock_reason.clone());
    match &cv_reason {
        Some(reason) => {
            for name in [
                "cv_decomposition",
                "cv_dual_route",
                "expectation_context_invariance",
                "conditioned_sum_rule",
                "conditioned_route_equality",
                "disturbance_route_equality",
                "second_moment_consistency",
            ] {
                reports.push(IdentityReport::skipped(name, reason.clone()));
            }
        }
        None => {
            // 10: CV decomposition reconstructs the dwell operator.
            let mut w = Worst::new();
            let mut scale: f64 = 0.0;
            for p in &points {
                if let (Ok(c), Ok(cvs)) = (p.clock(), p.cvs()) {
                    let mut sum = Mat2::zero();
                    for pp in SIDES {
                        for m in SPIN_OUTCOMES {
                            sum = sum.add(&c.povm.element(pp, m).scale_re(cvs.value(pp, m)));
                        }
                    }
                    w.update_re(sum.max_abs_diff(&p.dwell.matrix()), 0.0);
                    scale = scale.max(p.dwell.matrix().max_abs());
                }
            }
            reports.push(w.report("cv_decomposition", 1e-8 * scale));

            // 11: linear solve equals closed form.
            let mut w = Worst::new();
            let mut scale: f64 = 0.0;
            for p in &points {
                let Ok(c) = p.clock() else { continue };
                if let (Ok(lin), Ok(cf)) = (
                    p.cvs(),
                    cvs_closed_form(&c.t_ops, &p.dwell, &p.amps, &c.times, &p.spin, p.omega),
                ) {
                    for (a, b) in [
                        (lin.alpha_r_plus, cf.alpha_r_plus),
                        (lin.alpha_r_minus, cf.alpha_r_minus),
                        (lin.alpha_l_plus, cf.alpha_l_plus),
                        (lin.alpha_l_minus, cf.alpha_l_minus),
                    ] {
                        w.update_re(a, b);
                        scale = scale.max(a.abs());
                    }
                }
            }
            reports.push(w.report("cv_dual_route", 1e-8 * scale));

            // 12: the unconditioned CV average is context independent and
            // equals the quantum expectation for random states/contexts.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w = Worst::new();
            let mut scale: f64 = 0.0;
            let p = &points[points.len() / 2];
            for _ in 0..12 {
                let spin = loop {
                    let theta = rng.gen_range(0.05..std::f64::consts::PI - 0.05);
                    let phi = rng.gen_range(0.05..2.0 * std::f64::consts::PI - 0.05);
                    let s = postselection_overlaps(theta, phi).unwrap();
                    if detect_singular_context(&s) == ContextClass::Regular {
                        break s;
                    }
                };
                let sc = Scenario {
                    spin,
                    ..scenario.clone()
                };
                let Ok(pp) = sc.at_k(p.k) else { continue };
                let Ok(clock) = pp.clock() else { continue };
                let Ok(cvs) = pp.cvs() else { continue };
                let state = InitialSystemState::superposition(
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
                .unwrap();
                let got = expectation_via_cvs(cvs, &clock.povm, &state);
                let want = pp.dwell.expectation(state.amp_left, state.amp_right);
                w.update_re(got, want);
                scale = scale.max(want.abs());
            }
            reports.push(w.report("expectation_context_invariance", 1e-8 * scale.max(1e-12)));

            // 13: T <tau>_t + R <tau>_r = tau_d.
            let mut w = Worst::new();
            let mut scale: f64 = 0.0;
            for p in &points {
                if let (Ok(t), Ok(r)) = (
                    p.conditioned(Side::Transmitted),
                    p.conditioned(Side::Reflected),
                ) {
                    let total = t.conditioned_avg * t.transmitted_prob
                        + r.conditioned_avg * r.transmitted_prob;
                    w.update_re(total, p.dwell.c_ll);
                    scale = scale.max(p.dwell.c_ll.abs());
                }
            }
            reports.push(w.report("conditioned_sum_rule", 1e-9 * scale));

            // 14: probability route equals the closed form.
            let mut w = Worst::new();
            let mut scale: f64 = 0.0;
            for p in &points {
                let Ok(c) = p.clock() else { continue };
                if let (Ok(res), Ok(cvs)) = (p.conditioned(Side::Transmitted), p.cvs()) {
                    let closed = conditioned_average_closed_form(
                        c.t_ops.t11,
                        p.amps.reflection,
                        &c.times,
                        &p.spin,
                        cvs,
                    );
                    w.update_re(res.conditioned_avg, closed);
                    scale = scale.max(closed.abs().max(1.0));
                }
            }
            reports.push(w.report("conditioned_route_equality", 1e-9 * scale));

            // 15: commutator-route disturbance equals cond - Re(weak value).
            let mut w = Worst::new();
            let mut scale: f64 = 0.0;
            for p in &points {
                if let (Ok(res), Ok(direct)) = (
                    p.conditioned(Side::Transmitted),
                    p.disturbance_direct(Side::Transmitted),
                ) {
                    w.update_re(direct, res.disturbance);
                    scale = scale.max(direct.abs().max(1.0));
                }
            }
            reports.push(w.report("disturbance_route_equality", 1e-9 * scale));

            // 16: beta-weighted second moment equals Cbar_11 and the
            // spectral value.
            let mut w = Worst::new();
            let mut scale: f64 = 0.0;
            for p in &points {
                if let Ok((m2, _)) = p.moments() {
                    w.update_re(m2, p.squared.c11);
                    let e = &p.eigen;
                    let w_plus = e.state_plus[0].norm_sqr();
                    let w_minus = e.state_minus[0].norm_sqr();
                    let spectral = w_plus * e.lambda_plus * e.lambda_plus
                        + w_minus * e.lambda_minus * e.lambda_minus;
                    w.update_re(m2, spectral);
                    scale = scale.max(p.squared.c11.abs());
                }
            }
            reports.push(w.report("second_moment_consistency", 1e-6 * scale));
        }
    }

    // 17-18: Appendix B identities on a thinned grid (each point needs four
    // extra finite-difference solves).
    let stride = (ks.len() / 10).max(1);
    let mut w_norm = Worst::new();
    let mut w_orth = Worst::new();
    for p in points.iter().step_by(stride) {
        if let Ok(rep) = normalization_identity(&scenario.barrier, p.k, &scenario.solver) {
            w_norm.update(
                Complex64::new(rep.lhs.0, rep.lhs.1),
                Complex64::new(rep.rhs.0, rep.rhs.1),
            );
        }
        if let Ok(rep) = orthogonality_identity(&scenario.barrier, p.k, &scenario.solver) {
            w_orth.update(
                Complex64::new(rep.lhs.0, rep.lhs.1),
                Complex64::new(rep.rhs.0, rep.rhs.1),
            );
        }
    }
    reports.push(w_norm.report("appendix_b_normalization", 1e-6));
    reports.push(w_orth.report("appendix_b_orthogonality", 1e-6));

    reports
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::UnitSystem;
    use std::f64::consts::PI;

    fn units() -> UnitSystem {
        UnitSystem::default()
    }

    #[test]
    fn normalization_free_particle() {
        let b = BarrierSpec::square(0.0, 1.0, units()).unwrap();
        let rep = normalization_identity(&b, 2.0, &SolverOptions::with_slices(400)).unwrap();
        // Both sides reduce to d/(2 pi) = a/pi. The residual floor is the
        // finite-difference noise of the (analytically zero) k-derivatives,
        // eps/h ~ 1e-11.
        assert!(rep.passed);
        assert!(rep.abs_residual < 1e-9, "residual {}", rep.abs_residual);
        assert!((rep.lhs.0 - 0.5 / PI).abs() < 1e-12);
    }

    #[test]
    fn orthogonality_free_particle() {
        let b = BarrierSpec::square(0.0, 1.0, units()).unwrap();
        let k = 2.0;
        let rep = orthogonality_identity(&b, k, &SolverOptions::with_slices(400)).unwrap();
        assert!(rep.passed);
        assert!(rep.abs_residual < 1e-9);
        let expect = (2.0 * k * 0.5).sin() / (2.0 * PI * k);
        assert!((rep.lhs.0 - expect).abs() < 1e-9);
    }

    #[test]
    fn identities_on_square_barrier() {
        let b = BarrierSpec::square((3.0 * PI).powi(2), 1.0, units()).unwrap();
        for frac in [0.3, 0.5, 0.8] {
            let rep = normalization_identity(&b, frac * b.k0(), &SolverOptions::default()).unwrap();
            assert!(rep.passed, "norm at {frac}: residual {}", rep.abs_residual);
            let rep = orthogonality_identity(&b, frac * b.k0(), &SolverOptions::default()).unwrap();
            assert!(rep.passed, "orth at {frac}: residual {}", rep.abs_residual);
        }
    }

    #[test]
    fn identities_on_trapezoid() {
        let k0 = 3.0 * PI;
        let b = BarrierSpec::trapezoid(k0 * k0, 0.5 * k0 * k0, 1.0, units()).unwrap();
        let rep = normalization_identity(&b, 0.5 * b.k0(), &SolverOptions::default()).unwrap();
        assert!(rep.passed, "residual {}", rep.abs_residual);
        let rep = orthogonality_identity(&b, 0.7 * b.k0(), &SolverOptions::default()).unwrap();
        assert!(rep.passed, "residual {}", rep.abs_residual);
    }

    #[test]
    fn tampered_amplitudes_fail_unitarity() {
        let b = BarrierSpec::square((3.0 * PI).powi(2), 1.0, units()).unwrap();
        // Near the top of the barrier T is large enough that a 1% fault in
        // t moves the probability residual far above tolerance.
        let mut amps = solve_amplitudes(&b, 0.9 * b.k0(), 0.0, &SolverOptions::default()).unwrap();
        amps.t *= 1.01;
        let (prob, _) = unitarity_reports(&amps);
        assert!(!prob.passed);
    }

    #[test]
    fn full_suite_passes_on_square_preset() {
        let b = BarrierSpec::square((3.0 * PI).powi(2), 1.0, units()).unwrap();
        let spin = postselection_overlaps(PI / 2.0 - PI / 8.0, PI / 4.0).unwrap();
        let sc = Scenario::new(b, spin);
        let k0 = sc.barrier.k0();
        let ks: Vec<f64> = crate::linspace(0.1 * k0, 0.9 * k0, 7);
        let reports = run_all_identities(&sc, &ks, 42);
        for r in &reports {
            assert!(
                r.passed,
                "{} failed: residual {:.3e} tol {:.3e}",
                r.name, r.abs_residual, r.tolerance
            );
            assert!(r.skipped.is_none(), "{} skipped unexpectedly", r.name);
        }
        assert!(reports.len() >= 15);
    }

    #[test]
    fn singular_context_skips_cv_checks() {
        let b = BarrierSpec::square((3.0 * PI).powi(2), 1.0, units()).unwrap();
        let spin = postselection_overlaps(PI / 2.0, PI / 2.0).unwrap();
        let sc = Scenario::new(b, spin);
        let k0 = sc.barrier.k0();
        let ks: Vec<f64> = crate::linspace(0.3 * k0, 0.7 * k0, 3);
        let reports = run_all_identities(&sc, &ks, 1);
        let skipped: Vec<&IdentityReport> =
            reports.iter().filter(|r| r.skipped.is_some()).collect();
        assert!(skipped.iter().any(|r| r.name == "cv_decomposition"));
        // Context-free checks still pass.
        for r in reports.iter().filter(|r| r.skipped.is_none()) {
            assert!(r.passed, "{} failed", r.name);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let b = BarrierSpec::trapezoid((3.0 * PI).powi(2), 0.5 * (3.0 * PI).powi(2), 1.0, units())
            .unwrap();
        let spin = postselection_overlaps(PI / 2.0 - PI / 8.0, PI / 4.0).unwrap();
        let sc = Scenario::new(b, spin);
        let ks: Vec<f64> = crate::linspace(0.3 * sc.barrier.k0(), 0.7 * sc.barrier.k0(), 3);
        let a = run_all_identities(&sc, &ks, 9);
        let b2 = run_all_identities(&sc, &ks, 9);
        for (x, y) in a.iter().zip(&b2) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.abs_residual.to_bits(), y.abs_residual.to_bits());
        }
    }
}
