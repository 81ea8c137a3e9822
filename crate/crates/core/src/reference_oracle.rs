//! Brute-force DFT and propagation for small grids.
//!
//! Deliberately slow and independent of the FFT path: every bin is an explicit
//! double sum. Only the transfer function `χ` is shared with the fast path.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::aberrations::AberrationSet;
use crate::error::{Error, Result};
use crate::field_grid::{frequency_coords, ComplexField};

/// Largest grid (in samples) the direct transform accepts.
pub const MAX_DIRECT_SAMPLES: usize = 4096;

/// Unitary DFT by direct summation, same ordering and normalization as
/// [`crate::field_grid::forward_transform`] (or its inverse).
pub fn dft_direct(field: &ComplexField, inverse: bool) -> Result<ComplexField> {
    let spec = *field.spec();
    let (nx, ny) = (spec.nx(), spec.ny());
    if nx * ny > MAX_DIRECT_SAMPLES {
        return Err(Error::GridTooLarge {
            nx,
            ny,
            max: MAX_DIRECT_SAMPLES,
        });
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles = |n: usize| -> Vec<Complex64> {
        (0..n)
            .map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * j as f64 / n as f64))
            .collect()
    };
    let wx = twiddles(nx);
    let wy = twiddles(ny);
    let norm = 1.0 / ((nx * ny) as f64).sqrt();

    let mut out = Vec::with_capacity(nx * ny);
    for v in 0..ny {
        for u in 0..nx {
            let mut acc = Complex64::new(0.0, 0.0);
            // index products are reduced mod n so every twiddle comes from the table
            for r in 0..ny {
                let wr = wy[(v * r) % ny];
                for c in 0..nx {
                    acc += field.get(r, c) * wr * wx[(u * c) % nx];
                }
            }
            out.push(acc * norm);
        }
    }
    ComplexField::new(spec, out)
}

/// Direct-DFT propagation: transform, multiply by `χ` bin by bin, transform back.
pub fn propagate_direct(field: &ComplexField, set: &AberrationSet) -> Result<ComplexField> {
    let spectrum = dft_direct(field, false)?;
    let (kx, ky) = frequency_coords(field.spec());
    let spec = *field.spec();
    let mut data = spectrum.into_data();
    for (r, &ky) in ky.iter().enumerate() {
        for (c, &kx) in kx.iter().enumerate() {
            data[r * spec.nx() + c] *= set.chi(kx, ky)?;
        }
    }
    dft_direct(&ComplexField::new(spec, data)?, true)
}
