//! End-to-end runs driven by a [`SimulationConfig`].

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Mode, SimulationConfig};
use super::output::{write_field, write_intensity};
use crate::aberrations::AberrationSet;
use crate::error::{Error, Result};
use crate::field_grid::{intensity, plane_wave, total_power, ComplexField, GridSpec, RealImage};
use crate::interferometer::{screen_field_with, InterferometerConfig};
use crate::propagator::Propagator;
use crate::reference_oracle::propagate_direct;
use crate::specimen::{calibrate, exit_wave, gaussian_smooth, load_binary_image, ThicknessMap};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Base for relative output paths; the working directory when `None`.
    pub output_dir: Option<PathBuf>,
}

impl RunOptions {
    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.output_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}

/// In-memory result of a simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub spec: GridSpec,
    pub thickness: ThicknessMap,
    pub exit: ComplexField,
    pub screen: ComplexField,
    pub image: RealImage,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub mode: Mode,
    pub input_power: f64,
    pub output_power: f64,
    pub dc_gain: Complex64,
    pub max_chi_modulus: f64,
    pub defocus_distance: Option<f64>,
    pub feature_size: Option<f64>,
    pub wavelength: f64,
}

impl Diagnostics {
    /// `a² / (λ z)` when both a defocus preset and a feature size are configured.
    pub fn fresnel_number(&self) -> Option<f64> {
        match (self.defocus_distance, self.feature_size) {
            (Some(z), Some(a)) if z != 0.0 => Some(a * a / (self.wavelength * z.abs())),
            _ => None,
        }
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode              {}", self.mode)?;
        writeln!(f, "input power       {:.9e} m^2", self.input_power)?;
        writeln!(f, "output power      {:.9e} m^2", self.output_power)?;
        writeln!(
            f,
            "chi(0,0)          {:.15} {:+.3e}i",
            self.dc_gain.re, self.dc_gain.im
        )?;
        write!(f, "max |chi|         {:.9}", self.max_chi_modulus)?;
        if let Some(z) = self.defocus_distance {
            writeln!(f)?;
            match self.fresnel_number() {
                Some(nf) => write!(
                    f,
                    "Fresnel number    {nf:.4} (a = {:.3e} m, z = {z:.3e} m)",
                    self.feature_size.unwrap_or_default()
                )?,
                None => write!(
                    f,
                    "Fresnel number    not computed (set fresnel_feature_size), z = {z:.3e} m"
                )?,
            }
        }
        Ok(())
    }
}

/// Files written by [`run`] or [`psf`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub diagnostics: Diagnostics,
    pub intensity_path: PathBuf,
    pub field_path: Option<PathBuf>,
}

fn config_dir(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
}

/// Builds the specimen: raster (relative to `base_dir`) → smoothing → exit wave.
pub fn build_specimen(
    cfg: &SimulationConfig,
    base_dir: &Path,
) -> Result<(ThicknessMap, ComplexField)> {
    let spec = cfg.grid_spec()?;
    let map = match &cfg.object {
        None => ThicknessMap::vacuum(spec),
        Some(obj) => {
            let path = base_dir.join(&obj.raster_path);
            let binary = load_binary_image(&path, spec, obj.threshold)?;
            gaussian_smooth(&binary, obj.smooth_fwhm_px)?
        }
    };
    let calib = calibrate(cfg.contrast.min_intensity, cfg.contrast.max_phase.0)
        .map_err(|e| Error::Config(e.to_string()))?;
    let exit = exit_wave(&map, &calib);
    Ok((map, exit))
}

/// Runs the configured pipeline without touching the output files.
pub fn simulate(cfg: &SimulationConfig, base_dir: &Path) -> Result<Simulation> {
    let spec = cfg.grid_spec()?;
    let (thickness, exit) = build_specimen(cfg, base_dir)?;
    let set = cfg.aberration_set()?;
    let propagator = Propagator::new(&spec, &set)?;
    let psi0 = plane_wave(spec, 1.0, 0.0)?;

    let screen = match cfg.mode {
        Mode::Bright => propagator.apply(&exit)?,
        // -psi0 exactly, rather than psi0·exp(iπ)
        Mode::Dark => propagator.apply(&exit)?.sub(&psi0)?,
        Mode::Custom => {
            let interferometer = InterferometerConfig {
                reference_blocked: cfg.reference_blocked.unwrap_or(true),
                phase_bias: cfg.phase_bias.map_or(0.0, |a| a.0),
                aberration_set: set.clone(),
                reference_amplitude: cfg.reference_amplitude.unwrap_or(1.0),
            };
            screen_field_with(&propagator, &exit, &psi0, &interferometer)?
        }
    };
    let image = intensity(&screen);
    let transfer = propagator.transfer();
    let diagnostics = Diagnostics {
        mode: cfg.mode,
        input_power: total_power(&exit),
        output_power: total_power(&screen),
        dc_gain: transfer.dc_gain(),
        max_chi_modulus: transfer.max_modulus(),
        defocus_distance: cfg.defocus_distance(),
        feature_size: cfg.fresnel_feature_size.map(|a| a.0),
        wavelength: spec.wavelength(),
    };
    Ok(Simulation {
        spec,
        thickness,
        exit,
        screen,
        image,
        diagnostics,
    })
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

/// Loads the config, simulates, and writes the requested files.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunReport> {
    let cfg = SimulationConfig::load(config_path)?;
    let sim = simulate(&cfg, &config_dir(config_path))?;

    let intensity_path = opts.resolve(&cfg.outputs.intensity_path);
    ensure_parent(&intensity_path)?;
    write_intensity(&sim.image, &intensity_path, cfg.outputs.normalization)?;
    let field_path = match &cfg.outputs.field_path {
        Some(p) => {
            let p = opts.resolve(p);
            ensure_parent(&p)?;
            write_field(&sim.screen, &p)?;
            Some(p)
        }
        None => None,
    };
    Ok(RunReport {
        diagnostics: sim.diagnostics,
        intensity_path,
        field_path,
    })
}

/// Writes the system's Green function (intensity and, if configured, the
/// complex field) in place of the simulated image.
pub fn psf(config_path: &Path, opts: &RunOptions) -> Result<RunReport> {
    let cfg = SimulationConfig::load(config_path)?;
    let spec = cfg.grid_spec()?;
    let propagator = Propagator::new(&spec, &cfg.aberration_set()?)?;
    let green = propagator.green_function();
    let transfer = propagator.transfer();

    let intensity_path = opts.resolve(&cfg.outputs.intensity_path);
    ensure_parent(&intensity_path)?;
    write_intensity(
        &intensity(&green),
        &intensity_path,
        cfg.outputs.normalization,
    )?;
    let field_path = match &cfg.outputs.field_path {
        Some(p) => {
            let p = opts.resolve(p);
            ensure_parent(&p)?;
            write_field(&green, &p)?;
            Some(p)
        }
        None => None,
    };
    let power = total_power(&green);
    Ok(RunReport {
        diagnostics: Diagnostics {
            mode: cfg.mode,
            input_power: power,
            output_power: power,
            dc_gain: transfer.dc_gain(),
            max_chi_modulus: transfer.max_modulus(),
            defocus_distance: cfg.defocus_distance(),
            feature_size: cfg.fresnel_feature_size.map(|a| a.0),
            wavelength: spec.wavelength(),
        },
        intensity_path,
        field_path,
    })
}

/// Parameters for the preset summary.
#[derive(Debug, Clone, Copy)]
pub struct PresetParameters {
    pub wavelength: f64,
    pub defocus: f64,
    pub tilt_amplitude: f64,
    pub tilt_angle: f64,
    pub spherical: f64,
}

impl Default for PresetParameters {
    fn default() -> Self {
        PresetParameters {
            wavelength: 632.8e-9,
            defocus: 10e-3,
            tilt_amplitude: 3e-6,
            tilt_angle: PI / 2.0,
            spherical: 5e-3,
        }
    }
}

/// Human-readable preset formulas evaluated at `p`.
pub fn describe_presets(p: &PresetParameters) -> Result<String> {
    let k0 = 2.0 * PI / p.wavelength;
    let defocus = AberrationSet::defocus(p.defocus, k0)?;
    let tilt = AberrationSet::tilt(p.tilt_amplitude, p.tilt_angle)?;
    let spherical = AberrationSet::spherical(p.spherical, k0)?;
    Ok(format!(
        "wavelength {:.4e} m, k0 = {k0:.6e} rad/m\n\
         defocus    C20 = C02 = -z/(2 k0)            z  = {:.4e} m\n  {defocus}\n\
         tilt       C10 = i A cos(a), C01 = i A sin(a)  A = {:.4e} m, a = {:.6} rad\n  {tilt}\n\
         spherical  C40 = C04 = C22/2 = -Cs/(8 k0^3)  Cs = {:.4e} m\n  {spherical}",
        p.wavelength, p.defocus, p.tilt_amplitude, p.tilt_angle, p.spherical
    ))
}

/// Outcome of one oracle comparison.
#[derive(Debug, Clone)]
pub struct SelftestCase {
    pub grid: usize,
    pub preset: &'static str,
    pub seeds: usize,
    pub max_abs_diff: f64,
}

/// Tolerance for fast-vs-direct propagation.
pub const SELFTEST_TOLERANCE: f64 = 1e-10;

/// Random fields with components uniform in `[-1, 1)`.
pub fn random_field(spec: GridSpec, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField::from_fn(spec, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
    .expect("finite samples")
}

/// The three presets at their reference parameters for a given grid.
pub fn reference_presets(spec: &GridSpec) -> Vec<(&'static str, AberrationSet)> {
    let p = PresetParameters::default();
    let k0 = spec.k0();
    vec![
        (
            "defocus",
            AberrationSet::defocus(p.defocus, k0).expect("valid preset"),
        ),
        (
            "tilt",
            AberrationSet::tilt(p.tilt_amplitude, p.tilt_angle).expect("valid preset"),
        ),
        (
            "spherical",
            AberrationSet::spherical(p.spherical, k0).expect("valid preset"),
        ),
    ]
}

/// Compares FFT propagation against the direct-DFT oracle on random fields,
/// at a 10 µm pixel pitch.
pub fn selftest(seeds: usize, grids: &[usize]) -> Result<Vec<SelftestCase>> {
    let mut cases = Vec::new();
    for &n in grids {
        let extent = n as f64 * 10e-6;
        let spec = GridSpec::new(n, n, extent, extent, 632.8e-9)?;
        for (name, set) in reference_presets(&spec) {
            let propagator = Propagator::new(&spec, &set)?;
            let mut worst: f64 = 0.0;
            for seed in 0..seeds as u64 {
                let f = random_field(spec, seed);
                let fast = propagator.apply(&f)?;
                let slow = propagate_direct(&f, &set)?;
                worst = worst.max(fast.max_abs_diff(&slow));
            }
            cases.push(SelftestCase {
                grid: n,
                preset: name,
                seeds,
                max_abs_diff: worst,
            });
        }
    }
    Ok(cases)
}
