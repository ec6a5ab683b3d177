//! The momentum-resolved dwell-time operator: matrix elements, eigensystem,
//! square, and the wave-packet-averaged dwell time.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::potential::BarrierSpec;
use crate::quad::{adaptive_simpson, simpson_uniform, simpson_uniform_complex};
use crate::scattering::{interior_wavefunctions, InteriorWave, SolverOptions};

/// The 2x2 Hermitian dwell-time operator at fixed k in the scattering basis
/// {|phi_l>, |phi_r>}. Only C_{r,l} is stored; C_{l,r} is its conjugate.
#[derive(Debug, Clone, Copy)]
pub struct DwellMatrix {
    pub k: f64,
    /// C_{l,l}(k) = tau_d(k), the left-incidence dwell time.
    pub c_ll: f64,
    /// C_{r,r}(k), the right-incidence dwell time.
    pub c_rr: f64,
    /// C_{r,l}(k) = (m / hbar k) * integral of conj(phi_r) phi_l.
    pub c_rl: Complex64,
}

impl DwellMatrix {
    pub fn c_lr(&self) -> Complex64 {
        self.c_rl.conj()
    }

    /// tau_d(k), identified with C_{l,l}.
    pub fn tau_d(&self) -> f64 {
        self.c_ll
    }

    /// Matrix in the momentum basis {|k>, |-k>} (rows/cols l, r).
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            Complex64::new(self.c_ll, 0.0),
            self.c_rl.conj(),
            self.c_rl,
            Complex64::new(self.c_rr, 0.0),
        )
    }

    /// <psi| T_d |psi> for psi = alpha |k_l> + beta |k_r>.
    pub fn expectation(&self, alpha: Complex64, beta: Complex64) -> f64 {
        self.c_ll * alpha.norm_sqr()
            + self.c_rr * beta.norm_sqr()
            + 2.0 * (alpha * beta.conj() * self.c_rl).re
    }
}

/// Eigenvalues and normalized eigenvectors of the dwell matrix, states in
/// the {|k_l>, |k_r>} basis.
#[derive(Debug, Clone, Copy)]
pub struct DwellEigensystem {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub state_plus: [Complex64; 2],
    pub state_minus: [Complex64; 2],
}

/// Elements of T_d^2, same basis conventions as DwellMatrix.
#[derive(Debug, Clone, Copy)]
pub struct DwellSquared {
    pub c11: f64,
    pub c22: f64,
    /// The (2,1) element, conjugate of the (1,2) one.
    pub c21: Complex64,
}

impl DwellSquared {
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            Complex64::new(self.c11, 0.0),
            self.c21.conj(),
            self.c21,
            Complex64::new(self.c22, 0.0),
        )
    }
}

/// Gaussian momentum amplitude restricted to k > 0, normalized so that the
/// weight |A(k)|^2 integrates to one.
#[derive(Debug, Clone, Copy)]
pub struct WavePacket {
    pub k_center: f64,
    pub k_sigma: f64,
}

impl WavePacket {
    /// Rejects packets whose k <= 0 tail mass exceeds ~1e-12
    /// (k_center < 7.04 k_sigma).
    pub fn new(k_center: f64, k_sigma: f64) -> Result<Self> {
        if k_sigma <= 0.0 || !k_center.is_finite() || !k_sigma.is_finite() {
            return Err(Error::Domain(format!(
                "invalid wave packet (k_c = {k_center}, sigma = {k_sigma})"
            )));
        }
        let z = k_center / k_sigma;
        if z < 7.04 {
            return Err(Error::PacketBelowZero(z));
        }
        Ok(Self { k_center, k_sigma })
    }

    /// |A(k)|^2, a unit-mass normal density in k.
    pub fn weight(&self, k: f64) -> f64 {
        let z = (k - self.k_center) / self.k_sigma;
        (-0.5 * z * z).exp() / (self.k_sigma * (2.0 * std::f64::consts::PI).sqrt())
    }
}

/// Builds the dwell matrix from interior states by composite Simpson on the
/// interior grid.
pub fn dwell_matrix(wave: &InteriorWave, barrier: &BarrierSpec) -> Result<DwellMatrix> {
    if wave.grid.len() < 3 {
        return Err(Error::GridTooCoarse(wave.grid.len()));
    }
    let h = wave.step();
    let units = barrier.units;
    let pref = units.mass / (units.hbar * wave.k);

    let abs_l: Vec<f64> = wave.phi_left.iter().map(|z| z.norm_sqr()).collect();
    let abs_r: Vec<f64> = wave.phi_right.iter().map(|z| z.norm_sqr()).collect();
    let cross: Vec<Complex64> = wave
        .phi_right
        .iter()
        .zip(&wave.phi_left)
        .map(|(r, l)| r.conj() * l)
        .collect();

    Ok(DwellMatrix {
        k: wave.k,
        c_ll: pref * simpson_uniform(h, &abs_l),
        c_rr: pref * simpson_uniform(h, &abs_r),
        c_rl: simpson_uniform_complex(h, &cross).scale(pref),
    })
}

/// Eigenvalues lambda_+- and normalized eigenvectors of the 2x2 Hermitian
/// dwell matrix.
pub fn dwell_eigensystem(m: &DwellMatrix) -> DwellEigensystem {
    let half_sum = 0.5 * (m.c_rr + m.c_ll);
    let diff = m.c_ll - m.c_rr;
    let s = (diff * diff + 4.0 * m.c_rl.norm_sqr()).sqrt();
    let lambda_plus = half_sum + 0.5 * s;
    let lambda_minus = half_sum - 0.5 * s;

    let head = Complex64::new(diff + s, 0.0);
    let v_plus = [head, m.c_rl * 2.0];
    let v_minus = [m.c_rl.conj() * 2.0, -head];
    let scale = s.max(m.c_ll.abs()).max(m.c_rr.abs()).max(1e-300);
    let norm_plus = (v_plus[0].norm_sqr() + v_plus[1].norm_sqr()).sqrt();

    let (state_plus, state_minus) = if norm_plus > 1e-14 * scale {
        let norm_minus = (v_minus[0].norm_sqr() + v_minus[1].norm_sqr()).sqrt();
        (
            [v_plus[0] / norm_plus, v_plus[1] / norm_plus],
            [v_minus[0] / norm_minus, v_minus[1] / norm_minus],
        )
    } else {
        // Degenerate branch: C_rl ~ 0 with C_ll <= C_rr, eigenvectors are
        // the basis states with lambda_+ on |k_r>.
        (
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        )
    };

    DwellEigensystem {
        lambda_plus,
        lambda_minus,
        state_plus,
        state_minus,
    }
}

/// Elements of T_d^2 in closed form (no matrix product needed).
pub fn squared_matrix(m: &DwellMatrix) -> DwellSquared {
    let off = m.c_rl.norm_sqr();
    DwellSquared {
        c11: m.c_ll * m.c_ll + off,
        c22: m.c_rr * m.c_rr + off,
        c21: m.c_rl * (m.c_ll + m.c_rr),
    }
}

/// Wave-packet-averaged dwell time tau_D = integral |A(k)|^2 tau_d(k) dk,
/// by adaptive quadrature over +-6 sigma around the packet center.
pub fn wavepacket_dwell(
    barrier: &BarrierSpec,
    packet: &WavePacket,
    opts: &SolverOptions,
) -> Result<f64> {
    let lo = packet.k_center - 6.0 * packet.k_sigma;
    let hi = packet.k_center + 6.0 * packet.k_sigma;
    if lo <= 0.0 {
        return Err(Error::PacketBelowZero(packet.k_center / packet.k_sigma));
    }
    // Propagate solver failures eagerly by probing the endpoints first.
    for k in [lo, packet.k_center, hi] {
        let wave = interior_wavefunctions(barrier, k, opts)?;
        dwell_matrix(&wave, barrier)?;
    }
    let tau = |k: f64| -> f64 {
        let wave = interior_wavefunctions(barrier, k, opts).expect("probed range");
        let m = dwell_matrix(&wave, barrier).expect("grid checked");
        packet.weight(k) * m.c_ll
    };
    let scale = {
        let wave = interior_wavefunctions(barrier, packet.k_center, opts)?;
        dwell_matrix(&wave, barrier)?.c_ll.abs().max(1e-12)
    };
    Ok(adaptive_simpson(&tau, lo, hi, 1e-10 * scale))
}
