//! Barrier potentials confined to [-d/2, d/2], plus the spin-shifted
//! potentials seen by the Larmor probe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// hbar and particle mass. Defaults reproduce the figure convention
/// hbar = 1, m = 1/2 (so E = k^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 0.5,
        }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if hbar <= 0.0 || !hbar.is_finite() {
            return Err(Error::InvalidBarrier(format!(
                "hbar must be > 0, got {hbar}"
            )));
        }
        if mass <= 0.0 || !mass.is_finite() {
            return Err(Error::InvalidBarrier(format!(
                "mass must be > 0, got {mass}"
            )));
        }
        Ok(Self { hbar, mass })
    }

    /// Kinetic energy at wavenumber k.
    pub fn energy(&self, k: f64) -> f64 {
        self.hbar * self.hbar * k * k / (2.0 * self.mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKind {
    Square,
    QuadraticSymmetric,
    Trapezoid,
    Sampled,
}

/// A validated barrier V(x) supported on [-d/2, d/2] and identically zero
/// outside.
///
/// Shapes: Square is V0; QuadraticSymmetric is V0 + a x^2; Trapezoid is
/// V0 + eps (1/2 + x/d); Sampled is piecewise constant on midpoint cells
/// around the provided (x, V) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub kind: BarrierKind,
    /// Base height V0. For Sampled barriers this is the maximum sample.
    pub v0: f64,
    /// Quadratic coefficient a (QuadraticSymmetric only).
    pub quad_coeff: f64,
    /// Total rise eps across the barrier (Trapezoid only).
    pub slope_total: f64,
    /// Barrier extent d.
    pub width: f64,
    /// (x, V) pairs with strictly increasing x inside the barrier
    /// (Sampled only).
    pub samples: Option<Vec<(f64, f64)>>,
    pub units: UnitSystem,
}

impl BarrierSpec {
    pub fn square(v0: f64, width: f64, units: UnitSystem) -> Result<Self> {
        Self {
            kind: BarrierKind::Square,
            v0,
            quad_coeff: 0.0,
            slope_total: 0.0,
            width,
            samples: None,
            units,
        }
        .validated()
    }

    pub fn quadratic(v0: f64, quad_coeff: f64, width: f64, units: UnitSystem) -> Result<Self> {
        Self {
            kind: BarrierKind::QuadraticSymmetric,
            v0,
            quad_coeff,
            slope_total: 0.0,
            width,
            samples: None,
            units,
        }
        .validated()
    }

    pub fn trapezoid(v0: f64, slope_total: f64, width: f64, units: UnitSystem) -> Result<Self> {
        Self {
            kind: BarrierKind::Trapezoid,
            v0,
            quad_coeff: 0.0,
            slope_total,
            width,
            samples: None,
            units,
        }
        .validated()
    }

    pub fn sampled(samples: Vec<(f64, f64)>, width: f64, units: UnitSystem) -> Result<Self> {
        let v0 = samples.iter().map(|&(_, v)| v).fold(f64::NAN, f64::max);
        Self {
            kind: BarrierKind::Sampled,
            v0,
            quad_coeff: 0.0,
            slope_total: 0.0,
            width,
            samples: Some(samples),
            units,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.width <= 0.0 || !self.width.is_finite() {
            return Err(Error::InvalidBarrier(format!(
                "width must be > 0, got {}",
                self.width
            )));
        }
        if self.v0 < 0.0 || !self.v0.is_finite() {
            return Err(Error::InvalidBarrier(format!(
                "V0 must be >= 0 (wells are out of scope), got {}",
                self.v0
            )));
        }
        let a = self.half_width();
        match self.kind {
            BarrierKind::Square => {}
            BarrierKind::QuadraticSymmetric => {
                if !self.quad_coeff.is_finite() {
                    return Err(Error::InvalidBarrier(
                        "quadratic coefficient not finite".into(),
                    ));
                }
                if self.v0 + self.quad_coeff * a * a < 0.0 {
                    return Err(Error::InvalidBarrier(
                        "quadratic barrier dips below zero inside the support".into(),
                    ));
                }
            }
            BarrierKind::Trapezoid => {
                if !self.slope_total.is_finite() {
                    return Err(Error::InvalidBarrier("trapezoid slope not finite".into()));
                }
                if self.v0 + self.slope_total.min(0.0) < 0.0 {
                    return Err(Error::InvalidBarrier(
                        "trapezoid barrier dips below zero inside the support".into(),
                    ));
                }
            }
            BarrierKind::Sampled => {
                let samples = self.samples.as_ref().ok_or_else(|| {
                    Error::InvalidBarrier("sampled barrier without samples".into())
                })?;
                if samples.is_empty() {
                    return Err(Error::InvalidBarrier("sample list is empty".into()));
                }
                let slack = 1e-12 * self.width;
                for pair in samples.windows(2) {
                    if pair[1].0 <= pair[0].0 {
                        return Err(Error::InvalidBarrier(
                            "sample positions must be strictly increasing".into(),
                        ));
                    }
                }
                for &(x, v) in samples {
                    if !x.is_finite() || !v.is_finite() {
                        return Err(Error::InvalidBarrier("sample not finite".into()));
                    }
                    if x < -a - slack || x > a + slack {
                        return Err(Error::InvalidBarrier(format!(
                            "sample position {x} outside [-d/2, d/2]"
                        )));
                    }
                    if v < 0.0 {
                        return Err(Error::InvalidBarrier(
                            "sampled barrier dips below zero (wells are out of scope)".into(),
                        ));
                    }
                }
            }
        }
        Ok(self)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.width
    }

    /// k0 = sqrt(2 m V0) / hbar, the wavenumber matching the base height.
    pub fn k0(&self) -> f64 {
        (2.0 * self.units.mass * self.v0).sqrt() / self.units.hbar
    }

    /// Wavenumber matching the lowest point of the barrier; incident k above
    /// this leaves the everywhere-tunneling regime.
    pub fn k0_min(&self) -> f64 {
        (2.0 * self.units.mass * self.min_height()).sqrt() / self.units.hbar
    }

    fn min_height(&self) -> f64 {
        let a = self.half_width();
        match self.kind {
            BarrierKind::Square => self.v0,
            BarrierKind::QuadraticSymmetric => {
                if self.quad_coeff >= 0.0 {
                    self.v0
                } else {
                    self.v0 + self.quad_coeff * a * a
                }
            }
            BarrierKind::Trapezoid => self.v0 + self.slope_total.min(0.0),
            BarrierKind::Sampled => self
                .samples
                .as_ref()
                .map(|s| s.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min))
                .unwrap_or(self.v0),
        }
    }

    /// V(x) + spin_shift inside the barrier, exactly zero outside.
    ///
    /// The shift models the -/+ hbar omega_L / 2 potential offset felt by the
    /// two spin components; it is never applied outside the support.
    pub fn evaluate(&self, x: f64, spin_shift: f64) -> f64 {
        let a = self.half_width();
        if x.abs() > a {
            return 0.0;
        }
        let bare = match self.kind {
            BarrierKind::Square => self.v0,
            BarrierKind::QuadraticSymmetric => self.v0 + self.quad_coeff * x * x,
            BarrierKind::Trapezoid => self.v0 + self.slope_total * (0.5 + x / self.width),
            BarrierKind::Sampled => {
                let samples = self.samples.as_ref().expect("validated");
                let idx = samples.partition_point(|&(xs, _)| {
                    // cell boundary halfway to the next sample
                    xs < x
                });
                // idx is the first sample with xs >= x; pick the nearer of
                // idx-1 and idx (midpoint cells).
                if idx == 0 {
                    samples[0].1
                } else if idx == samples.len() {
                    samples[idx - 1].1
                } else {
                    let (xl, vl) = samples[idx - 1];
                    let (xr, vr) = samples[idx];
                    if x - xl <= xr - x {
                        vl
                    } else {
                        vr
                    }
                }
            }
        };
        bare + spin_shift
    }
}

/// Generic constructor used by the CLI; prefer the shape-specific
/// constructors in library code.
pub fn make_barrier(
    kind: BarrierKind,
    v0: f64,
    quad_coeff: f64,
    slope_total: f64,
    width: f64,
    samples: Option<Vec<(f64, f64)>>,
    units: UnitSystem,
) -> Result<BarrierSpec> {
    match kind {
        BarrierKind::Square => BarrierSpec::square(v0, width, units),
        BarrierKind::QuadraticSymmetric => BarrierSpec::quadratic(v0, quad_coeff, width, units),
        BarrierKind::Trapezoid => BarrierSpec::trapezoid(v0, slope_total, width, units),
        BarrierKind::Sampled => BarrierSpec::sampled(
            samples
                .ok_or_else(|| Error::InvalidBarrier("sampled barrier requires samples".into()))?,
            width,
            units,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_k0_matches_figure_setting() {
        let b = BarrierSpec::square((3.0 * PI).powi(2), 1.0, UnitSystem::default()).unwrap();
        assert!((b.k0() - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn zero_height_square_is_free() {
        let b = BarrierSpec::square(0.0, 1.0, UnitSystem::default()).unwrap();
        for x in [-0.49, 0.0, 0.2, 0.73] {
            assert_eq!(b.evaluate(x, 0.0), 0.0);
        }
        assert_eq!(b.k0(), 0.0);
    }

    #[test]
    fn trapezoid_endpoints() {
        let k0 = 3.0 * PI;
        let v0 = k0 * k0;
        let eps = 0.5 * k0 * k0;
        let b = BarrierSpec::trapezoid(v0, eps, 1.0, UnitSystem::default()).unwrap();
        assert!((b.evaluate(-0.5, 0.0) - v0).abs() < 1e-10);
        assert!((b.evaluate(0.5, 0.0) - (v0 + eps)).abs() < 1e-10);
    }

    #[test]
    fn trapezoid_midpoint_value() {
        let b = BarrierSpec::trapezoid(10.0, 4.0, 2.0, UnitSystem::default()).unwrap();
        assert!((b.evaluate(0.0, 0.0) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn shift_suppressed_outside() {
        let b = BarrierSpec::square(10.0, 2.0, UnitSystem::default()).unwrap();
        assert_eq!(b.evaluate(0.0, 0.0), 10.0);
        assert_eq!(b.evaluate(1.5, -0.01), 0.0);
        assert_eq!(b.evaluate(-1.0001, 5.0), 0.0);
    }

    #[test]
    fn symmetric_kinds_are_even() {
        let u = UnitSystem::default();
        let sq = BarrierSpec::square(7.0, 1.3, u).unwrap();
        let qu = BarrierSpec::quadratic(7.0, 2.0, 1.3, u).unwrap();
        for x in [0.1, 0.3, 0.64, 0.649] {
            assert_eq!(sq.evaluate(x, 0.0), sq.evaluate(-x, 0.0));
            assert_eq!(qu.evaluate(x, 0.0), qu.evaluate(-x, 0.0));
        }
    }

    #[test]
    fn trapezoid_reflection_sum() {
        let v0 = 5.0;
        let eps = 2.0;
        let b = BarrierSpec::trapezoid(v0, eps, 1.0, UnitSystem::default()).unwrap();
        for x in [0.05, 0.2, 0.45] {
            let s = b.evaluate(x, 0.0) + b.evaluate(-x, 0.0);
            assert!((s - (2.0 * v0 + eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_midpoint_cells() {
        let b = BarrierSpec::sampled(
            vec![(-0.3, 1.0), (0.0, 2.0), (0.3, 3.0)],
            1.0,
            UnitSystem::default(),
        )
        .unwrap();
        assert_eq!(b.evaluate(-0.4, 0.0), 1.0);
        assert_eq!(b.evaluate(-0.2, 0.0), 1.0);
        assert_eq!(b.evaluate(-0.1, 0.0), 2.0);
        assert_eq!(b.evaluate(0.1, 0.0), 2.0);
        assert_eq!(b.evaluate(0.2, 0.0), 3.0);
        assert_eq!(b.evaluate(0.45, 0.0), 3.0);
        assert_eq!(b.v0, 3.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let u = UnitSystem::default();
        assert!(BarrierSpec::square(1.0, 0.0, u).is_err());
        assert!(BarrierSpec::square(-1.0, 1.0, u).is_err());
        assert!(BarrierSpec::sampled(vec![], 1.0, u).is_err());
        assert!(BarrierSpec::sampled(vec![(0.2, 1.0), (0.1, 1.0)], 1.0, u).is_err());
        assert!(BarrierSpec::sampled(vec![(0.9, 1.0)], 1.0, u).is_err());
    }
}
