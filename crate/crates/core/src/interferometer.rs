//! Nulling Mach–Zehnder screen composition.
//!
//! The object arm carries the exit wave through the aberrated system; the
//! reference arm carries a copy of the unscattered plane wave with a phase
//! bias. At the screen the two are summed. With the reference blocked this is
//! bright-field imaging; with a bias of π the unscattered wave is nulled and
//! only the (aberrated) scattered wave remains.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::aberrations::AberrationSet;
use crate::error::{Error, Result};
use crate::field_grid::{intensity, ComplexField, RealImage};
use crate::propagator::Propagator;

#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerConfig {
    pub reference_blocked: bool,
    /// Constant phase added to the reference arm, radians.
    pub phase_bias: f64,
    pub aberration_set: AberrationSet,
    /// Amplitude factor on the reference arm (beam splitters, mirrors).
    pub reference_amplitude: f64,
}

impl InterferometerConfig {
    /// Reference arm blocked.
    pub fn bright_field(aberration_set: AberrationSet) -> Self {
        InterferometerConfig {
            reference_blocked: true,
            phase_bias: 0.0,
            aberration_set,
            reference_amplitude: 1.0,
        }
    }

    /// Reference arm open with a bias of π.
    pub fn dark_field(aberration_set: AberrationSet) -> Self {
        InterferometerConfig {
            reference_blocked: false,
            phase_bias: PI,
            aberration_set,
            reference_amplitude: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.phase_bias.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "phase bias must be finite, got {}",
                self.phase_bias
            )));
        }
        if !(self.reference_amplitude.is_finite() && self.reference_amplitude >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference amplitude must be >= 0, got {}",
                self.reference_amplitude
            )));
        }
        Ok(())
    }
}

/// Field at the screen: the propagated exit wave plus the biased reference.
pub fn screen_field(
    exit: &ComplexField,
    psi0: &ComplexField,
    cfg: &InterferometerConfig,
) -> Result<ComplexField> {
    let propagator = Propagator::new(exit.spec(), &cfg.aberration_set)?;
    screen_field_with(&propagator, exit, psi0, cfg)
}

/// As [`screen_field`] with a prepared propagator; `cfg.aberration_set` is not
/// consulted.
pub fn screen_field_with(
    propagator: &Propagator,
    exit: &ComplexField,
    psi0: &ComplexField,
    cfg: &InterferometerConfig,
) -> Result<ComplexField> {
    cfg.validate()?;
    check_reference(exit, psi0)?;
    let object_arm = propagator.apply(exit)?;
    if cfg.reference_blocked {
        return Ok(object_arm);
    }
    // bias applied through the reduced angle so that Φ and Φ + 2π give identical fields
    let bias = Complex64::from_polar(cfg.reference_amplitude, cfg.phase_bias.rem_euclid(2.0 * PI));
    object_arm.add(&psi0.scale(bias)?)
}

/// Intensity with the reference arm blocked.
pub fn bright_field_image(exit: &ComplexField, set: &AberrationSet) -> Result<RealImage> {
    let propagated = Propagator::new(exit.spec(), set)?.apply(exit)?;
    Ok(intensity(&propagated))
}

/// Intensity of the aberrated scattered wave, `|propagate(exit) - psi0|²`.
///
/// The reference is taken as exactly `-psi0`, so the unscattered wave cancels
/// identically rather than through `exp(iπ)` rounding.
pub fn dark_field_image(
    exit: &ComplexField,
    psi0: &ComplexField,
    set: &AberrationSet,
) -> Result<RealImage> {
    let propagator = Propagator::new(exit.spec(), set)?;
    dark_field_image_with(&propagator, exit, psi0)
}

pub fn dark_field_image_with(
    propagator: &Propagator,
    exit: &ComplexField,
    psi0: &ComplexField,
) -> Result<RealImage> {
    check_reference(exit, psi0)?;
    let scattered = propagator.apply(exit)?.sub(psi0)?;
    Ok(intensity(&scattered))
}

/// Aberration-free dark-field intensity of a pure phase shift, `|e^{iφ} - 1|² = 2(1 - cos φ)`.
pub fn analytic_phase_null(phi: f64) -> f64 {
    2.0 * (1.0 - phi.cos())
}

fn check_reference(exit: &ComplexField, psi0: &ComplexField) -> Result<()> {
    if exit.spec() != psi0.spec() {
        return Err(Error::GridMismatch);
    }
    if !psi0.is_constant() {
        return Err(Error::InvalidParameter(
            "unscattered wave must be a constant plane wave".into(),
        ));
    }
    Ok(())
}
