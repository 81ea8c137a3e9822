//! Thin single-material specimens under the projection approximation.
//!
//! A binary raster gives the normalized projected thickness `T ∈ [0, 1]`,
//! optionally smoothed with a periodic Gaussian. Two material constants turn
//! it into the exit-surface wave `ψ = exp(-μT/2) · exp(iκT)`.

use std::f64::consts::PI;
use std::path::Path;

use image::ImageReader;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field_grid::{ComplexField, Fft2, GridSpec};

/// Normalized projected thickness, row-major, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThicknessMap {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ThicknessMap {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidParameter(format!(
                "thickness map has {} samples, grid needs {}",
                values.len(),
                spec.len()
            )));
        }
        if let Some(i) = values
            .iter()
            .position(|t| !(t.is_finite() && (0.0..=1.0).contains(t)))
        {
            return Err(Error::InvalidParameter(format!(
                "thickness sample {i} = {} lies outside [0, 1]",
                values[i]
            )));
        }
        Ok(ThicknessMap { spec, values })
    }

    /// An empty object (`T ≡ 0`).
    pub fn vacuum(spec: GridSpec) -> Self {
        ThicknessMap {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        for row in 0..spec.ny() {
            for col in 0..spec.nx() {
                values.push(f(row, col));
            }
        }
        ThicknessMap::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.spec.nx() + col]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Material constants per unit normalized thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialCalibration {
    /// Intensity attenuation, `I = exp(-mu·T)`.
    pub mu: f64,
    /// Phase shift in radians, `φ = kappa·T`; stands for `k(n-1)·T_max`.
    pub kappa: f64,
}

impl MaterialCalibration {
    pub fn vacuum() -> Self {
        MaterialCalibration {
            mu: 0.0,
            kappa: 0.0,
        }
    }
}

/// Chooses `mu` and `kappa` so that full thickness gives the requested
/// intensity and phase.
pub fn calibrate(target_min_intensity: f64, target_max_phase: f64) -> Result<MaterialCalibration> {
    if !(target_min_intensity > 0.0 && target_min_intensity <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "minimum intensity must lie in (0, 1], got {target_min_intensity}"
        )));
    }
    if !target_max_phase.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "maximum phase must be finite, got {target_max_phase}"
        )));
    }
    Ok(MaterialCalibration {
        mu: -target_min_intensity.ln(),
        kappa: target_max_phase,
    })
}

/// Reads a grayscale PGM or PNG raster and thresholds it into a binary map.
///
/// A pixel is object (`T = 1`) when its value is at least `threshold` times the
/// format's full-scale value. Raster row 0 becomes field row 0.
pub fn load_binary_image(path: &Path, spec: GridSpec, threshold: f64) -> Result<ThicknessMap> {
    let raster_err = |reason: String| Error::Raster {
        path: path.to_path_buf(),
        reason,
    };
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let img = ImageReader::open(path)
        .map_err(|e| raster_err(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| raster_err(e.to_string()))?
        .decode()
        .map_err(|e| raster_err(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if (w, h) != (spec.nx(), spec.ny()) {
        return Err(raster_err(format!(
            "raster is {w}x{h}, grid is {}x{}",
            spec.nx(),
            spec.ny()
        )));
    }
    // 8-bit data is widened by 257, so full scale is always u16::MAX here
    let gray = img.into_luma16();
    let cut = threshold * f64::from(u16::MAX);
    let values = gray
        .pixels()
        .map(|p| if f64::from(p.0[0]) >= cut { 1.0 } else { 0.0 })
        .collect();
    ThicknessMap::new(spec, values)
}

/// Standard deviation in pixels of a Gaussian with the given full width at half maximum.
pub fn fwhm_to_sigma(fwhm_px: f64) -> f64 {
    fwhm_px / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// Periodic convolution with a sampled Gaussian normalized to unit sum,
/// evaluated in the frequency domain. The result is clamped to `[0, 1]`.
pub fn gaussian_smooth(map: &ThicknessMap, fwhm_px: f64) -> Result<ThicknessMap> {
    if !(fwhm_px.is_finite() && fwhm_px >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothing FWHM must be >= 0, got {fwhm_px}"
        )));
    }
    if fwhm_px == 0.0 {
        return Ok(map.clone());
    }
    let smoothed = smooth_unclamped(map, fwhm_px);
    let values = smoothed.into_iter().map(|t| t.clamp(0.0, 1.0)).collect();
    ThicknessMap::new(map.spec, values)
}

pub(crate) fn smooth_unclamped(map: &ThicknessMap, fwhm_px: f64) -> Vec<f64> {
    let sigma = fwhm_to_sigma(fwhm_px);
    let spec = map.spec;
    let hx = gaussian_kernel_spectrum(spec.nx(), sigma);
    let hy = gaussian_kernel_spectrum(spec.ny(), sigma);

    let mut data: Vec<Complex64> = map.values.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    let fft = Fft2::for_spec(&spec);
    fft.forward_in_place(&mut data);
    for (row, gain_y) in data.chunks_exact_mut(spec.nx()).zip(&hy) {
        for (z, gain_x) in row.iter_mut().zip(&hx) {
            *z *= gain_x * gain_y;
        }
    }
    fft.inverse_in_place(&mut data);
    data.into_iter().map(|z| z.re).collect()
}

/// Unnormalized DFT of the unit-sum periodic Gaussian along one axis. The
/// kernel is even, so the spectrum is real.
fn gaussian_kernel_spectrum(n: usize, sigma: f64) -> Vec<f64> {
    let kernel: Vec<f64> = (0..n)
        .map(|i| {
            let d = if i <= n / 2 {
                i as f64
            } else {
                i as f64 - n as f64
            };
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = kernel.iter().sum();
    (0..n)
        .map(|u| {
            kernel
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let idx = (i * u) % n;
                    g / sum * (2.0 * PI * idx as f64 / n as f64).cos()
                })
                .sum()
        })
        .collect()
}

/// Exit-surface wave `exp(-μT/2) · exp(iκT)`; vacuum pixels are exactly `1 + 0i`.
pub fn exit_wave(map: &ThicknessMap, calib: &MaterialCalibration) -> ComplexField {
    let data = map
        .values
        .iter()
        .map(|&t| Complex64::from_polar((-calib.mu * t / 2.0).exp(), calib.kappa * t))
        .collect();
    ComplexField::from_raw(map.spec, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn spec(n: usize) -> GridSpec {
        GridSpec::new(n, n, n as f64 * 1e-5, n as f64 * 1e-5, 632.8e-9).unwrap()
    }

    fn write_pgm8(path: &Path, w: usize, h: usize, pixels: &[u8]) {
        let mut f = std::fs::File::create(path).unwrap();
        write!(f, "P5\n{w} {h}\n255\n").unwrap();
        f.write_all(pixels).unwrap();
    }

    #[test]
    fn calibration_values() {
        let c = calibrate(0.998, 3.6 * PI).unwrap();
        assert!((c.mu - 2.0020026706730793e-3).abs() < 1e-15);
        assert!((c.kappa - 11.309733552923255).abs() < 1e-12);
        assert_eq!(calibrate(1.0, 0.0).unwrap(), MaterialCalibration::vacuum());
        let c = calibrate((-1.0_f64).exp(), PI).unwrap();
        assert!((c.mu - 1.0).abs() < 1e-15);
        assert!(calibrate(0.0, 1.0).is_err());
        assert!(calibrate(-0.5, 1.0).is_err());
        assert!(calibrate(1.5, 1.0).is_err());
    }

    #[test]
    fn exit_wave_values() {
        let s = spec(2);
        let map = ThicknessMap::new(s, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let calib = calibrate(0.998, 3.6 * PI).unwrap();
        let psi = exit_wave(&map, &calib);
        assert_eq!(psi.get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(psi.get(1, 1), Complex64::new(1.0, 0.0));
        let z = psi.get(0, 1);
        assert!((z.norm() - 0.998_f64.sqrt()).abs() < 1e-15);
        assert!((z.norm() - 0.99900).abs() < 1e-5);
        assert!((z.arg().rem_euclid(2.0 * PI) - 5.026548245743669).abs() < 1e-12);

        let phase_only = MaterialCalibration { mu: 0.0, kappa: PI };
        let z = exit_wave(&map, &phase_only).get(0, 1);
        assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fwhm_conversion() {
        assert!((fwhm_to_sigma(1.5) - 0.6369913502160143).abs() < 1e-15);
        assert!((fwhm_to_sigma(1.5) - 0.63702).abs() < 1e-4);
        assert_eq!(fwhm_to_sigma(0.0), 0.0);
    }

    #[test]
    fn smoothing_zero_width_is_identity() {
        let s = spec(8);
        let map = ThicknessMap::from_fn(s, |r, c| ((r + c) % 2) as f64).unwrap();
        assert_eq!(gaussian_smooth(&map, 0.0).unwrap(), map);
        assert!(gaussian_smooth(&map, -1.0).is_err());
    }

    #[test]
    fn smoothing_preserves_constants() {
        let s = spec(32);
        let map = ThicknessMap::from_fn(s, |_, _| 0.37).unwrap();
        let out = gaussian_smooth(&map, 1.5).unwrap();
        assert!(out.values().iter().all(|t| (t - 0.37).abs() < 1e-12));
    }

    #[test]
    fn smoothing_matches_direct_periodic_convolution() {
        let s = GridSpec::new(16, 8, 1.0, 1.0, 1.0).unwrap();
        let map = ThicknessMap::from_fn(s, |r, c| {
            if (3..6).contains(&r) && c > 9 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let fwhm = 2.5;
        let sigma = fwhm_to_sigma(fwhm);
        let weight = |d: isize, n: usize| {
            let n = n as isize;
            let d = d.rem_euclid(n);
            let d = if d <= n / 2 { d } else { d - n } as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        };
        let sum_x: f64 = (0..16).map(|d| weight(d, 16)).sum();
        let sum_y: f64 = (0..8).map(|d| weight(d, 8)).sum();
        let out = gaussian_smooth(&map, fwhm).unwrap();
        for r in 0..8 {
            for c in 0..16 {
                let mut acc = 0.0;
                for rr in 0..8 {
                    for cc in 0..16 {
                        acc += map.get(rr, cc)
                            * weight(r as isize - rr as isize, 8)
                            * weight(c as isize - cc as isize, 16);
                    }
                }
                acc /= sum_x * sum_y;
                assert!((out.get(r, c) - acc.clamp(0.0, 1.0)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn load_checkerboard_and_constants() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(2);
        let p = dir.path().join("check.pgm");
        write_pgm8(&p, 2, 2, &[255, 0, 0, 255]);
        let map = load_binary_image(&p, s, 0.5).unwrap();
        assert_eq!(map.values(), &[1.0, 0.0, 0.0, 1.0]);

        let p = dir.path().join("black.pgm");
        write_pgm8(&p, 2, 2, &[0; 4]);
        assert!(load_binary_image(&p, s, 0.5)
            .unwrap()
            .values()
            .iter()
            .all(|&t| t == 0.0));

        let p = dir.path().join("white.pgm");
        write_pgm8(&p, 2, 2, &[255; 4]);
        assert!(load_binary_image(&p, s, 0.5)
            .unwrap()
            .values()
            .iter()
            .all(|&t| t == 1.0));
    }

    #[test]
    fn load_sixteen_bit_pgm_and_png() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(2);
        let p = dir.path().join("deep.pgm");
        let mut f = std::fs::File::create(&p).unwrap();
        write!(f, "P5\n2 2\n65535\n").unwrap();
        for v in [65535u16, 40000, 30000, 0] {
            f.write_all(&v.to_be_bytes()).unwrap();
        }
        drop(f);
        let map = load_binary_image(&p, s, 0.5).unwrap();
        assert_eq!(map.values(), &[1.0, 1.0, 0.0, 0.0]);

        let p = dir.path().join("img.png");
        image::GrayImage::from_raw(2, 2, vec![0, 200, 10, 255])
            .unwrap()
            .save(&p)
            .unwrap();
        let map = load_binary_image(&p, s, 0.5).unwrap();
        assert_eq!(map.values(), &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(4);
        let missing = load_binary_image(&dir.path().join("nope.pgm"), s, 0.5);
        assert!(matches!(missing, Err(Error::Raster { .. })));

        let p = dir.path().join("small.pgm");
        write_pgm8(&p, 2, 2, &[0; 4]);
        assert!(matches!(
            load_binary_image(&p, s, 0.5),
            Err(Error::Raster { .. })
        ));

        let p = dir.path().join("junk.pgm");
        std::fs::write(&p, b"P5\n4 4\n255\nxx").unwrap();
        assert!(matches!(
            load_binary_image(&p, s, 0.5),
            Err(Error::Raster { .. })
        ));
    }

    #[test]
    fn vacuum_pipeline_gives_unit_plane_wave() {
        let s = spec(64);
        let map = gaussian_smooth(&ThicknessMap::vacuum(s), 1.5).unwrap();
        let psi = exit_wave(&map, &calibrate(0.998, 3.6 * PI).unwrap());
        assert!(psi.data().iter().all(|&z| z == Complex64::new(1.0, 0.0)));
    }
}
