//! Sampled field geometry, complex-field storage and unitary 2-D transforms.
//!
//! Fields are stored row-major: element `(row, col)` lives at `row * nx + col`,
//! rows run along `y` and columns along `x`. The grid is periodic (a torus)
//! because every frequency-domain operation goes through the DFT.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of a sampled 2-D field. Lengths are in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    width: f64,
    height: f64,
    wavelength: f64,
}

impl GridSpec {
    /// Both pixel counts must be even and at least 2; all lengths positive and finite.
    pub fn new(nx: usize, ny: usize, width: f64, height: f64, wavelength: f64) -> Result<Self> {
        if nx < 2 || ny < 2 || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "pixel counts must be even and >= 2, got {nx}x{ny}"
            )));
        }
        for (name, v) in [
            ("width", width),
            ("height", height),
            ("wavelength", wavelength),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(GridSpec {
            nx,
            ny,
            width,
            height,
            wavelength,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Pixel pitch along x.
    pub fn dx(&self) -> f64 {
        self.width / self.nx as f64
    }

    /// Pixel pitch along y.
    pub fn dy(&self) -> f64 {
        self.height / self.ny as f64
    }

    /// Vacuum wavenumber `2π/λ`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Area of one pixel, `dx * dy`.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }
}

/// Angular frequencies of a DFT axis in standard ordering (DC first, Nyquist at `n/2` as negative).
pub fn axis_frequencies(n: usize, pitch: f64) -> Vec<f64> {
    let step = 2.0 * PI / (n as f64 * pitch);
    (0..n)
        .map(|i| {
            let j = if i < n / 2 {
                i as f64
            } else {
                i as f64 - n as f64
            };
            step * j
        })
        .collect()
}

/// Frequency coordinates `(kx, ky)` in rad/m for the bins of `spec`.
pub fn frequency_coords(spec: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    (
        axis_frequencies(spec.nx, spec.dx()),
        axis_frequencies(spec.ny, spec.dy()),
    )
}

/// Row-major complex amplitudes on a [`GridSpec`]. Every element is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    spec: GridSpec,
    data: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(spec: GridSpec, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(Error::InvalidParameter(format!(
                "field data has {} samples, grid needs {}",
                data.len(),
                spec.len()
            )));
        }
        if let Some(i) = data
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "non-finite field sample at index {i}"
            )));
        }
        Ok(ComplexField { spec, data })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        ComplexField {
            spec,
            data: vec![Complex64::new(0.0, 0.0); spec.len()],
        }
    }

    /// Builds a field from `f(row, col)`.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(spec.len());
        for row in 0..spec.ny {
            for col in 0..spec.nx {
                data.push(f(row, col));
            }
        }
        ComplexField::new(spec, data)
    }

    /// Internal constructor for data already known to be finite.
    pub(crate) fn from_raw(spec: GridSpec, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), spec.len());
        ComplexField { spec, data }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.spec.nx + col]
    }

    fn zip_with(
        &self,
        other: &ComplexField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<ComplexField> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| op(a, b))
            .collect();
        ComplexField::new(self.spec, data)
    }

    pub fn add(&self, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, factor: Complex64) -> Result<ComplexField> {
        ComplexField::new(self.spec, self.data.iter().map(|&z| z * factor).collect())
    }

    /// Periodic shift: output `(r, c)` takes input `(r - drow, c - dcol)` modulo the grid.
    pub fn circshift(&self, drow: isize, dcol: isize) -> ComplexField {
        let (nx, ny) = (self.spec.nx as isize, self.spec.ny as isize);
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..ny {
            let src_r = (r - drow).rem_euclid(ny);
            for c in 0..nx {
                let src_c = (c - dcol).rem_euclid(nx);
                data.push(self.data[(src_r * nx + src_c) as usize]);
            }
        }
        ComplexField::from_raw(self.spec, data)
    }

    /// Largest pointwise `|a - b|`; infinite when the grids differ.
    pub fn max_abs_diff(&self, other: &ComplexField) -> f64 {
        if self.spec != other.spec {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Whether every sample has the same value.
    pub fn is_constant(&self) -> bool {
        let first = self.data[0];
        self.data.iter().all(|&z| z == first)
    }
}

/// Row-major non-negative intensities on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    spec: GridSpec,
    data: Vec<f64>,
}

impl RealImage {
    pub fn new(spec: GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(Error::InvalidParameter(format!(
                "image data has {} samples, grid needs {}",
                data.len(),
                spec.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "image sample {i} is negative or non-finite"
            )));
        }
        Ok(RealImage { spec, data })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.spec.nx + col]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Constant field `amplitude * exp(i * phase)`.
pub fn plane_wave(spec: GridSpec, amplitude: f64, phase: f64) -> Result<ComplexField> {
    if !(amplitude.is_finite() && amplitude >= 0.0) || !phase.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "plane wave needs finite amplitude >= 0 and finite phase, got ({amplitude}, {phase})"
        )));
    }
    let value = Complex64::from_polar(amplitude, phase);
    Ok(ComplexField::from_raw(spec, vec![value; spec.len()]))
}

/// Pointwise `|ψ|²`.
pub fn intensity(field: &ComplexField) -> RealImage {
    RealImage {
        spec: field.spec,
        data: field.data.iter().map(|z| z.norm_sqr()).collect(),
    }
}

/// `Σ|ψ|² · dx · dy`, in m².
pub fn total_power(field: &ComplexField) -> f64 {
    field.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * field.spec.cell_area()
}

/// Planned unitary 2-D DFT for a fixed grid size.
///
/// Rows are transformed in place, then the array is transposed so the column
/// transforms also run over contiguous memory.
#[derive(Clone)]
pub struct Fft2 {
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    norm: f64,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
            norm: 1.0 / ((nx * ny) as f64).sqrt(),
        }
    }

    pub fn for_spec(spec: &GridSpec) -> Self {
        Fft2::new(spec.nx, spec.ny)
    }

    fn run(&self, data: &mut [Complex64], rows: &dyn Fft<f64>, cols: &dyn Fft<f64>) {
        assert_eq!(data.len(), self.nx * self.ny, "buffer does not match plan");
        let scratch_len = rows
            .get_inplace_scratch_len()
            .max(cols.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];

        rows.process_with_scratch(data, &mut scratch);

        let mut transposed = vec![Complex64::new(0.0, 0.0); data.len()];
        transpose(data, &mut transposed, self.nx, self.ny);
        cols.process_with_scratch(&mut transposed, &mut scratch);
        transpose(&transposed, data, self.ny, self.nx);

        for z in data.iter_mut() {
            *z *= self.norm;
        }
    }

    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.run(data, self.row_fwd.as_ref(), self.col_fwd.as_ref());
    }

    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.run(data, self.row_inv.as_ref(), self.col_inv.as_ref());
    }
}

/// `src` is `rows x cols` row-major; `dst` receives the `cols x rows` transpose.
fn transpose(src: &[Complex64], dst: &mut [Complex64], cols: usize, rows: usize) {
    const BLOCK: usize = 32;
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Unitary forward DFT, `F[u,v] = (1/√N) Σ f[r,c] exp(-2πi(uc/nx + vr/ny))`, DC at `(0, 0)`.
pub fn forward_transform(field: &ComplexField) -> ComplexField {
    let mut data = field.data.clone();
    Fft2::for_spec(&field.spec).forward_in_place(&mut data);
    ComplexField::from_raw(field.spec, data)
}

/// Unitary inverse DFT; exact inverse of [`forward_transform`].
pub fn inverse_transform(field: &ComplexField) -> ComplexField {
    let mut data = field.data.clone();
    Fft2::for_spec(&field.spec).inverse_in_place(&mut data);
    ComplexField::from_raw(field.spec, data)
}
