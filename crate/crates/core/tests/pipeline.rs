use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use darkfield::field_grid::{intensity, plane_wave};
use darkfield::interferometer::{dark_field_image, screen_field, InterferometerConfig};
use darkfield::io::runner::reference_presets;
use darkfield::io::{read_field, run, simulate, RunOptions, SimulationConfig};
use darkfield::propagator::propagate_scattered;
use darkfield::specimen::{calibrate, exit_wave, ThicknessMap};
use darkfield::{AberrationSet, GridSpec};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn disk_specimen(spec: GridSpec) -> ThicknessMap {
    let c = spec.nx() as f64 / 2.0;
    ThicknessMap::from_fn(spec, |r, col| {
        let d = ((r as f64 - c).powi(2) + (col as f64 - c).powi(2)).sqrt();
        (1.0 - (d - 10.0).max(0.0) / 3.0).clamp(0.0, 1.0)
    })
    .unwrap()
}

#[test]
fn dark_field_pipelines_agree() {
    let spec = GridSpec::new(128, 128, 1.28e-3, 1.28e-3, 632.8e-9).unwrap();
    let exit = exit_wave(&disk_specimen(spec), &calibrate(0.9, 2.0 * PI).unwrap());
    let psi0 = plane_wave(spec, 1.0, 0.0).unwrap();
    for (name, set) in reference_presets(&spec) {
        let direct = dark_field_image(&exit, &psi0, &set).unwrap();
        let scattered = intensity(&propagate_scattered(&exit, &psi0, &set).unwrap());
        let via_bias = intensity(
            &screen_field(&exit, &psi0, &InterferometerConfig::dark_field(set.clone())).unwrap(),
        );
        for i in 0..spec.len() {
            assert!(
                (direct.data()[i] - scattered.data()[i]).abs() < 1e-12,
                "{name}"
            );
            assert!(
                (direct.data()[i] - via_bias.data()[i]).abs() < 1e-12,
                "{name}"
            );
        }
    }
}

#[test]
fn aberration_free_dark_field_vanishes_off_the_object() {
    let spec = GridSpec::new(64, 64, 6.4e-4, 6.4e-4, 632.8e-9).unwrap();
    let map = disk_specimen(spec);
    let exit = exit_wave(&map, &calibrate(0.95, 3.0).unwrap());
    let psi0 = plane_wave(spec, 1.0, 0.0).unwrap();
    let img = dark_field_image(&exit, &psi0, &AberrationSet::empty()).unwrap();
    for (t, i) in map.values().iter().zip(img.data()) {
        if *t == 0.0 {
            assert!(*i < 1e-20);
        } else {
            assert!(*i > 0.0);
        }
    }
}

#[test]
fn bright_field_preserves_mean_intensity() {
    let spec = GridSpec::new(128, 128, 1.28e-3, 1.28e-3, 632.8e-9).unwrap();
    let exit = exit_wave(&disk_specimen(spec), &calibrate(0.998, 3.6 * PI).unwrap());
    let before = intensity(&exit).mean();
    for (name, set) in reference_presets(&spec) {
        let after = intensity(&darkfield::propagator::propagate(&exit, &set).unwrap()).mean();
        if set.is_coherent() {
            assert!((after - before).abs() < 1e-12, "{name}");
        }
    }
}

#[test]
fn simulate_is_deterministic_and_run_writes_what_simulate_computes() {
    let path = configs().join("fig4b.json");
    let cfg = SimulationConfig::load(&path).unwrap();
    let a = simulate(&cfg, &configs()).unwrap();
    let b = simulate(&cfg, &configs()).unwrap();
    assert_eq!(a.screen, b.screen);

    let tmp = tempfile::tempdir().unwrap();
    let report = run(
        &path,
        &RunOptions {
            output_dir: Some(tmp.path().to_path_buf()),
        },
    )
    .unwrap();
    let dumped = read_field(report.field_path.as_ref().unwrap()).unwrap();
    assert_eq!(dumped, a.screen);
    assert_eq!(report.diagnostics, a.diagnostics);
}
