//! Image and field files.
//!
//! Intensities are written as 16-bit binary PGM (P5, maxval 65535, samples
//! big-endian as Netpbm requires) with a JSON sidecar `<path>.meta.json`
//! recording the mapping. Complex fields are raw little-endian `f64` pairs
//! `(re, im)`, row-major, with a JSON sidecar describing the grid.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::Normalization;
use crate::error::{Error, Result};
use crate::field_grid::{ComplexField, GridSpec, RealImage};

pub const FIELD_LAYOUT: &str = "row_major_re_im_f64le";

/// `<path>.meta.json`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub nx: usize,
    pub ny: usize,
    pub width_m: f64,
    pub height_m: f64,
}

impl From<&GridSpec> for GridMeta {
    fn from(s: &GridSpec) -> Self {
        GridMeta {
            nx: s.nx(),
            ny: s.ny(),
            width_m: s.width(),
            height_m: s.height(),
        }
    }
}

/// Sidecar of an intensity image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityMeta {
    /// Intensity mapped to level 0.
    pub min: f64,
    /// Intensity mapped to level 65535.
    pub max: f64,
    pub normalization: Normalization,
    pub grid: GridMeta,
    pub wavelength: f64,
    /// Smallest and largest intensity actually present.
    pub data_min: f64,
    pub data_max: f64,
}

/// Sidecar of a complex-field dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub nx: usize,
    pub ny: usize,
    pub width_m: f64,
    pub height_m: f64,
    pub wavelength_m: f64,
    pub layout: String,
}

/// Maps intensities to 16-bit levels. A degenerate `minmax` range (constant
/// image) maps every pixel to 0.
pub fn quantize(image: &RealImage, normalization: Normalization) -> (Vec<u16>, f64, f64) {
    let (lo, hi) = match normalization {
        Normalization::FixedRange([lo, hi]) => (lo, hi),
        Normalization::Minmax => (image.min(), image.max()),
    };
    let span = hi - lo;
    let levels = image
        .data()
        .iter()
        .map(|&v| {
            if !(span > 0.0) {
                return 0;
            }
            let t = ((v - lo) / span).clamp(0.0, 1.0);
            (t * f64::from(u16::MAX)).round() as u16
        })
        .collect();
    (levels, lo, hi)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        )
    })
}

/// Writes a 16-bit PGM plus its `.meta.json` sidecar.
pub fn write_intensity(image: &RealImage, path: &Path, normalization: Normalization) -> Result<()> {
    let spec = image.spec();
    let (levels, lo, hi) = quantize(image, normalization);
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = Vec::with_capacity(levels.len() * 2 + 32);
    write!(body, "P5\n{} {}\n65535\n", spec.nx(), spec.ny()).expect("write to Vec");
    for level in levels {
        body.extend_from_slice(&level.to_be_bytes());
    }
    w.write_all(&body)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))?;

    let meta = IntensityMeta {
        min: lo,
        max: hi,
        normalization,
        grid: spec.into(),
        wavelength: spec.wavelength(),
        data_min: image.min(),
        data_max: image.max(),
    };
    write_json(&sidecar_path(path), &meta)
}

/// Reads a binary 16-bit PGM written by [`write_intensity`]: `(width, height, levels)`.
pub fn read_pgm16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |why: &str| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, why.to_string()),
        )
    };
    // header: four whitespace-separated tokens, then exactly one whitespace byte
    let mut tokens = Vec::new();
    let mut pos = 0;
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if tokens[0] != "P5" || tokens[3] != "65535" {
        return Err(bad("expected P5 with maxval 65535"));
    }
    let w: usize = tokens[1].parse().map_err(|_| bad("bad width"))?;
    let h: usize = tokens[2].parse().map_err(|_| bad("bad height"))?;
    let payload = bytes.get(pos..).ok_or_else(|| bad("missing payload"))?;
    if payload.len() != w * h * 2 {
        return Err(bad("payload size does not match header"));
    }
    let levels = payload
        .chunks_exact(2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]))
        .collect();
    Ok((w, h, levels))
}

pub fn read_intensity_meta(path: &Path) -> Result<IntensityMeta> {
    read_json(&sidecar_path(path))
}

/// Writes raw `(re, im)` f64 little-endian pairs plus a `.meta.json` sidecar.
pub fn write_field(field: &ComplexField, path: &Path) -> Result<()> {
    let mut payload = Vec::with_capacity(field.data().len() * 16);
    for z in field.data() {
        payload.extend_from_slice(&z.re.to_le_bytes());
        payload.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(path, payload).map_err(|e| Error::io(path, e))?;
    let s = field.spec();
    let meta = FieldMeta {
        nx: s.nx(),
        ny: s.ny(),
        width_m: s.width(),
        height_m: s.height(),
        wavelength_m: s.wavelength(),
        layout: FIELD_LAYOUT.to_string(),
    };
    write_json(&sidecar_path(path), &meta)
}

/// Restores a field written by [`write_field`], bit for bit.
pub fn read_field(path: &Path) -> Result<ComplexField> {
    let meta: FieldMeta = read_json(&sidecar_path(path))?;
    let invalid = |why: String| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, why),
        )
    };
    if meta.layout != FIELD_LAYOUT {
        return Err(invalid(format!("unsupported layout {:?}", meta.layout)));
    }
    let spec = GridSpec::new(
        meta.nx,
        meta.ny,
        meta.width_m,
        meta.height_m,
        meta.wavelength_m,
    )
    .map_err(|e| invalid(e.to_string()))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != spec.len() * 16 {
        return Err(invalid(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            spec.len() * 16
        )));
    }
    let data = bytes
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    ComplexField::new(spec, data).map_err(|e| invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(nx: usize, ny: usize) -> GridSpec {
        GridSpec::new(nx, ny, 1e-3, 2e-3, 632.8e-9).unwrap()
    }

    #[test]
    fn constant_image_fixed_range() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("one.pgm");
        let img = RealImage::new(spec(4, 2), vec![1.0; 8]).unwrap();
        write_intensity(&img, &p, Normalization::FixedRange([0.0, 1.0])).unwrap();
        let (w, h, levels) = read_pgm16(&p).unwrap();
        assert_eq!((w, h), (4, 2));
        assert!(levels.iter().all(|&l| l == 65535));
        let bytes = std::fs::read(&p).unwrap();
        assert!(bytes.starts_with(b"P5\n4 2\n65535\n"));
        assert_eq!(bytes.len(), 13 + 16);
    }

    #[test]
    fn constant_image_minmax_is_zero() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("flat.pgm");
        let img = RealImage::new(spec(2, 2), vec![0.7; 4]).unwrap();
        write_intensity(&img, &p, Normalization::Minmax).unwrap();
        assert!(read_pgm16(&p).unwrap().2.iter().all(|&l| l == 0));
        let meta = read_intensity_meta(&p).unwrap();
        assert_eq!(meta.min, meta.max);
        assert_eq!(meta.min, 0.7);
        assert_eq!(meta.normalization, Normalization::Minmax);
        assert_eq!(meta.grid.nx, 2);
        assert_eq!(meta.wavelength, 632.8e-9);
    }

    #[test]
    fn fixed_range_clamps() {
        let img = RealImage::new(spec(2, 2), vec![0.0, 2.0, 0.5, 0.25]).unwrap();
        let (levels, _, _) = quantize(&img, Normalization::FixedRange([0.0, 1.0]));
        assert_eq!(levels, vec![0, 65535, 32768, 16384]);
        let (levels, lo, hi) = quantize(&img, Normalization::Minmax);
        assert_eq!((lo, hi), (0.0, 2.0));
        assert_eq!(levels, vec![0, 65535, 16384, 8192]);
    }

    #[test]
    fn sidecar_json_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("img.pgm");
        let img = RealImage::new(spec(2, 2), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        write_intensity(&img, &p, Normalization::Minmax).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path(&p)).unwrap()).unwrap();
        for key in ["min", "max", "normalization", "grid", "wavelength"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["max"], 3.0);
    }

    #[test]
    fn field_payload_format() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.bin");
        let f = ComplexField::new(spec(2, 2), vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        write_field(&f, &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(bytes.len(), 64);
        for (i, chunk) in bytes.chunks_exact(8).enumerate() {
            let v = f64::from_le_bytes(chunk.try_into().unwrap());
            assert_eq!(v, if i % 2 == 0 { 1.0 } else { 0.0 });
        }
        let meta: FieldMeta = read_json(&sidecar_path(&p)).unwrap();
        assert_eq!(meta.layout, FIELD_LAYOUT);
        assert_eq!((meta.nx, meta.ny), (2, 2));
    }

    #[test]
    fn demo_grid_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("field.bin");
        let s = GridSpec::new(512, 512, 5.12e-3, 5.12e-3, 632.8e-9).unwrap();
        write_field(&ComplexField::zeros(s), &p).unwrap();
        let meta: FieldMeta = read_json(&sidecar_path(&p)).unwrap();
        assert_eq!((meta.nx, meta.ny), (512, 512));
        assert_eq!(meta.width_m, 5.12e-3);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let img = RealImage::new(spec(2, 2), vec![0.0; 4]).unwrap();
        let p = Path::new("/nonexistent-dir/x/y.pgm");
        assert!(matches!(
            write_intensity(&img, p, Normalization::Minmax),
            Err(Error::Io { .. })
        ));
        assert!(matches!(
            write_field(&ComplexField::zeros(spec(2, 2)), p),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn field_round_trip_is_bitwise(values in prop::collection::vec((-1e300..1e300f64, -1e-300..1e-300f64), 24)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("rt.bin");
            let f = ComplexField::new(
                spec(6, 4),
                values.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
            ).unwrap();
            write_field(&f, &p).unwrap();
            let back = read_field(&p).unwrap();
            prop_assert_eq!(back.spec(), f.spec());
            for (a, b) in back.data().iter().zip(f.data()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}
