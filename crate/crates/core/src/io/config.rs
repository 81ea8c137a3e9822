//! JSON simulation configs.
//!
//! Lengths are strings with a unit suffix (`"632.8nm"`, `"5.12mm"`, `"3um"`)
//! or bare numbers in meters. Angles are radians, or strings in units of π
//! (`"3.6pi"`, `"0.5π"`).

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

use crate::aberrations::{AberrationCoefficient, AberrationSet};
use crate::error::{Error, Result};
use crate::field_grid::GridSpec;
use num_complex::Complex64;

/// A length in meters.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Length(pub f64);

impl Length {
    pub fn meters(self) -> f64 {
        self.0
    }
}

/// Parses `"<number><unit>"` with unit one of m, mm, um, µm, nm. A bare number is meters.
pub fn parse_length(text: &str) -> Result<f64> {
    let s = text.trim();
    let split = s
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .unwrap_or(s.len());
    let (number, unit) = s.split_at(split);
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse length {text:?}")))?;
    let scale = match unit.trim() {
        "" | "m" => 1.0,
        "mm" => 1e-3,
        "um" | "µm" | "μm" => 1e-6,
        "nm" => 1e-9,
        other => {
            return Err(Error::Config(format!(
                "unknown length unit {other:?} in {text:?} (use m, mm, um, µm or nm)"
            )))
        }
    };
    let meters = value * scale;
    if !meters.is_finite() {
        return Err(Error::Config(format!("length {text:?} is not finite")));
    }
    Ok(meters)
}

/// Parses radians, or a multiple of π written `"<number>pi"` / `"<number>π"`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s = text.trim();
    let (number, times_pi) = if let Some(n) = s.strip_suffix("pi") {
        (n, true)
    } else if let Some(n) = s.strip_suffix('π') {
        (n, true)
    } else {
        (s, false)
    };
    let number = number.trim();
    let value: f64 = if times_pi && number.is_empty() {
        1.0
    } else {
        number
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse angle {text:?}")))?
    };
    let radians = if times_pi { value * PI } else { value };
    if !radians.is_finite() {
        return Err(Error::Config(format!("angle {text:?} is not finite")));
    }
    Ok(radians)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberOrText {
    Number(f64),
    Text(String),
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NumberOrText::deserialize(d)? {
            NumberOrText::Number(v) => Ok(Length(v)),
            NumberOrText::Text(s) => parse_length(&s).map(Length).map_err(de::Error::custom),
        }
    }
}

/// An angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NumberOrText::deserialize(d)? {
            NumberOrText::Number(v) => Ok(Angle(v)),
            NumberOrText::Text(s) => parse_angle(&s).map(Angle).map_err(de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub width: Length,
    pub height: Length,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    /// Relative paths resolve against the config file's directory.
    pub raster_path: PathBuf,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub smooth_fwhm_px: f64,
}

fn default_threshold() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContrastConfig {
    pub min_intensity: f64,
    pub max_phase: Angle,
}

impl Default for ContrastConfig {
    fn default() -> Self {
        ContrastConfig {
            min_intensity: 1.0,
            max_phase: Angle(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PresetEntry {
    Defocus { z: Length },
    Tilt { amplitude: Length, alpha: Angle },
    Spherical { cs: Length },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEntry {
    pub m: u32,
    pub n: u32,
    /// Real (coherent) part, units m^(m+n).
    #[serde(default)]
    pub re: f64,
    /// Imaginary (incoherent) part, units m^(m+n).
    #[serde(default)]
    pub im: f64,
}

/// One entry of the `aberrations` list: a preset (has a `kind`) or a raw coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum AberrationEntry {
    Preset(PresetEntry),
    Raw(RawEntry),
}

impl<'de> Deserialize<'de> for AberrationEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        if value.get("kind").is_some() {
            serde_json::from_value(value)
                .map(AberrationEntry::Preset)
                .map_err(de::Error::custom)
        } else {
            serde_json::from_value(value)
                .map(AberrationEntry::Raw)
                .map_err(de::Error::custom)
        }
    }
}

impl AberrationEntry {
    pub fn to_set(&self, k0: f64) -> Result<AberrationSet> {
        match *self {
            AberrationEntry::Preset(PresetEntry::Defocus { z }) => AberrationSet::defocus(z.0, k0),
            AberrationEntry::Preset(PresetEntry::Tilt { amplitude, alpha }) => {
                AberrationSet::tilt(amplitude.0, alpha.0)
            }
            AberrationEntry::Preset(PresetEntry::Spherical { cs }) => {
                AberrationSet::spherical(cs.0, k0)
            }
            AberrationEntry::Raw(RawEntry { m, n, re, im }) => {
                AberrationSet::from_coefficients([AberrationCoefficient {
                    m,
                    n,
                    value: Complex64::new(re, im),
                }])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Bright,
    Dark,
    Custom,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Bright => "bright",
            Mode::Dark => "dark",
            Mode::Custom => "custom",
        })
    }
}

/// How intensities map onto 16-bit output levels.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `[lo, hi]` maps to `[0, 65535]`, values outside are clamped.
    FixedRange([f64; 2]),
    /// The image's own `[min, max]` maps to `[0, 65535]`.
    Minmax,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub intensity_path: PathBuf,
    #[serde(default)]
    pub field_path: Option<PathBuf>,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
}

fn default_normalization() -> Normalization {
    Normalization::Minmax
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub grid: GridConfig,
    pub wavelength: Length,
    /// Absent means an empty object (`T ≡ 0`).
    #[serde(default)]
    pub object: Option<ObjectConfig>,
    #[serde(default)]
    pub contrast: ContrastConfig,
    #[serde(default)]
    pub aberrations: Vec<AberrationEntry>,
    pub mode: Mode,
    /// Custom mode only.
    #[serde(default)]
    pub phase_bias: Option<Angle>,
    /// Custom mode only.
    #[serde(default)]
    pub reference_blocked: Option<bool>,
    /// Custom mode only; defaults to 1.
    #[serde(default)]
    pub reference_amplitude: Option<f64>,
    /// Feature size used for the Fresnel-number report.
    #[serde(default)]
    pub fresnel_feature_size: Option<Length>,
    pub outputs: OutputConfig,
}

impl SimulationConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimulationConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        SimulationConfig::from_json(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_prefix(&e))))
    }

    fn validate(&self) -> Result<()> {
        self.grid_spec()?;
        let custom_fields = self.phase_bias.is_some()
            || self.reference_blocked.is_some()
            || self.reference_amplitude.is_some();
        match self.mode {
            Mode::Custom => {
                if self.phase_bias.is_none() || self.reference_blocked.is_none() {
                    return Err(Error::Config(
                        "custom mode needs phase_bias and reference_blocked".into(),
                    ));
                }
            }
            Mode::Bright | Mode::Dark if custom_fields => {
                return Err(Error::Config(format!(
                    "phase_bias / reference_blocked / reference_amplitude only apply to custom mode, not {}",
                    self.mode
                )));
            }
            _ => {}
        }
        if let Some(obj) = &self.object {
            if !(obj.threshold > 0.0 && obj.threshold < 1.0) {
                return Err(Error::Config(format!(
                    "object.threshold must lie in (0, 1), got {}",
                    obj.threshold
                )));
            }
            if !(obj.smooth_fwhm_px.is_finite() && obj.smooth_fwhm_px >= 0.0) {
                return Err(Error::Config("object.smooth_fwhm_px must be >= 0".into()));
            }
        }
        let c = &self.contrast;
        if !(c.min_intensity > 0.0 && c.min_intensity <= 1.0) {
            return Err(Error::Config(format!(
                "contrast.min_intensity must lie in (0, 1], got {}",
                c.min_intensity
            )));
        }
        if let Normalization::FixedRange([lo, hi]) = self.outputs.normalization {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::Config(format!(
                    "fixed_range needs lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        if let Some(a) = self.fresnel_feature_size {
            if !(a.0 > 0.0) {
                return Err(Error::Config(
                    "fresnel_feature_size must be positive".into(),
                ));
            }
        }
        self.aberration_set()?;
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(
            self.grid.nx,
            self.grid.ny,
            self.grid.width.0,
            self.grid.height.0,
            self.wavelength.0,
        )
        .map_err(|e| Error::Config(strip_prefix(&e)))
    }

    /// All entries merged into one set by coefficient addition.
    pub fn aberration_set(&self) -> Result<AberrationSet> {
        let k0 = 2.0 * PI / self.wavelength.0;
        self.aberrations
            .iter()
            .try_fold(AberrationSet::empty(), |acc, entry| {
                Ok(acc.add(&entry.to_set(k0)?))
            })
            .map_err(|e: Error| Error::Config(strip_prefix(&e)))
    }

    /// Total defocus distance of the `defocus` presets, if any are present.
    pub fn defocus_distance(&self) -> Option<f64> {
        let mut total = None;
        for entry in &self.aberrations {
            if let AberrationEntry::Preset(PresetEntry::Defocus { z }) = entry {
                *total.get_or_insert(0.0) += z.0;
            }
        }
        total
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}
