//! Frequency-domain application of an aberrated linear shift-invariant system.

use num_complex::Complex64;

use crate::aberrations::{AberrationSet, DEFAULT_AMPLIFICATION_LIMIT};
use crate::error::{Error, Result};
use crate::field_grid::{frequency_coords, ComplexField, Fft2, GridSpec};

/// Transfer function `χ` sampled on the DFT bins of a grid.
#[derive(Debug, Clone)]
pub struct TransferFunction {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl TransferFunction {
    pub fn new(spec: &GridSpec, set: &AberrationSet) -> Result<Self> {
        Self::with_limit(spec, set, DEFAULT_AMPLIFICATION_LIMIT)
    }

    pub fn with_limit(spec: &GridSpec, set: &AberrationSet, limit: f64) -> Result<Self> {
        let (kx, ky) = frequency_coords(spec);
        let mut values = Vec::with_capacity(spec.len());
        for &ky in &ky {
            for &kx in &kx {
                values.push(set.chi_with_limit(kx, ky, limit)?);
            }
        }
        Ok(TransferFunction {
            spec: *spec,
            values,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Row-major samples, row index over `ky`, column index over `kx`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `χ(0, 0)`, the gain applied to a normally incident plane wave.
    pub fn dc_gain(&self) -> Complex64 {
        self.values[0]
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// A system ready to propagate fields on one grid: transform plans plus the
/// precomputed transfer function.
#[derive(Debug, Clone)]
pub struct Propagator {
    fft: Fft2,
    transfer: TransferFunction,
}

impl Propagator {
    pub fn new(spec: &GridSpec, set: &AberrationSet) -> Result<Self> {
        Ok(Propagator {
            fft: Fft2::for_spec(spec),
            transfer: TransferFunction::new(spec, set)?,
        })
    }

    pub fn with_transfer(transfer: TransferFunction) -> Self {
        Propagator {
            fft: Fft2::for_spec(transfer.spec()),
            transfer,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.transfer.spec()
    }

    pub fn transfer(&self) -> &TransferFunction {
        &self.transfer
    }

    /// Forward transform, multiply each bin by `χ`, inverse transform.
    pub fn apply(&self, field: &ComplexField) -> Result<ComplexField> {
        if field.spec() != self.spec() {
            return Err(Error::GridMismatch);
        }
        let mut data = field.data().to_vec();
        self.fft.forward_in_place(&mut data);
        for (z, chi) in data.iter_mut().zip(self.transfer.values()) {
            *z *= chi;
        }
        self.fft.inverse_in_place(&mut data);
        ComplexField::new(*field.spec(), data)
    }

    /// Outgoing Green function: the inverse unitary transform of `χ`.
    pub fn green_function(&self) -> ComplexField {
        let mut data = self.transfer.values().to_vec();
        self.fft.inverse_in_place(&mut data);
        ComplexField::from_raw(*self.spec(), data)
    }
}

/// Propagates `field` through the system described by `set`.
pub fn propagate(field: &ComplexField, set: &AberrationSet) -> Result<ComplexField> {
    Propagator::new(field.spec(), set)?.apply(field)
}

/// Propagates only the scattered part `exit - psi0` of an exit wave.
pub fn propagate_scattered(
    exit: &ComplexField,
    psi0: &ComplexField,
    set: &AberrationSet,
) -> Result<ComplexField> {
    if !psi0.is_constant() {
        return Err(Error::InvalidParameter(
            "unscattered wave must be a constant plane wave".into(),
        ));
    }
    let scattered = exit.sub(psi0)?;
    propagate(&scattered, set)
}

/// Real-space kernel of the system; `propagate(f)` is the circular convolution
/// of `f` with `green_function / √(nx·ny)`.
pub fn green_function(spec: &GridSpec, set: &AberrationSet) -> Result<ComplexField> {
    Ok(Propagator::new(spec, set)?.green_function())
}
