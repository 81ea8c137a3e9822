use darkfield::field_grid::{forward_transform, inverse_transform, total_power};
use darkfield::io::runner::{random_field, reference_presets};
use darkfield::propagator::{green_function, propagate};
use darkfield::reference_oracle::propagate_direct;
use darkfield::{AberrationSet, ComplexField, GridSpec, Propagator};
use num_complex::Complex64;

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, n, n as f64 * 10e-6, n as f64 * 10e-6, 632.8e-9).unwrap()
}

#[test]
fn round_trip_1024() {
    let spec = grid(1024);
    let f = random_field(spec, 7);
    let back = inverse_transform(&forward_transform(&f));
    assert!(back.max_abs_diff(&f) < 1e-12);
}

#[test]
fn rectangular_grid_round_trip_and_oracle() {
    let spec = GridSpec::new(16, 8, 1.6e-4, 0.8e-4, 5e-7).unwrap();
    let f = random_field(spec, 3);
    assert!(inverse_transform(&forward_transform(&f)).max_abs_diff(&f) < 1e-13);
    let set = AberrationSet::defocus(1e-3, spec.k0())
        .unwrap()
        .add(&AberrationSet::tilt(1e-6, 0.3).unwrap());
    let fast = propagate(&f, &set).unwrap();
    let slow = propagate_direct(&f, &set).unwrap();
    assert!(fast.max_abs_diff(&slow) < 1e-12);
}

#[test]
fn oracle_agrees_on_small_grids() {
    for n in [8, 16] {
        let spec = grid(n);
        for (name, set) in reference_presets(&spec) {
            for seed in 0..5 {
                let f = random_field(spec, seed);
                let d = propagate(&f, &set)
                    .unwrap()
                    .max_abs_diff(&propagate_direct(&f, &set).unwrap());
                assert!(d < 1e-10, "{name} n={n} seed={seed}: {d:e}");
            }
        }
    }
}

#[test]
fn linearity() {
    let spec = grid(64);
    let (f, g) = (random_field(spec, 1), random_field(spec, 2));
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(-2.0, 0.5));
    for (name, set) in reference_presets(&spec) {
        let p = Propagator::new(&spec, &set).unwrap();
        let lhs = p
            .apply(&f.scale(a).unwrap().add(&g.scale(b).unwrap()).unwrap())
            .unwrap();
        let rhs = p
            .apply(&f)
            .unwrap()
            .scale(a)
            .unwrap()
            .add(&p.apply(&g).unwrap().scale(b).unwrap())
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12, "{name}");
    }
}

#[test]
fn shift_invariance() {
    let spec = grid(64);
    let f = random_field(spec, 4);
    for (name, set) in reference_presets(&spec) {
        let p = Propagator::new(&spec, &set).unwrap();
        let a = p.apply(&f.circshift(5, -9)).unwrap();
        let b = p.apply(&f).unwrap().circshift(5, -9);
        assert!(a.max_abs_diff(&b) < 1e-12, "{name}");
    }
}

#[test]
fn composition_matches_sequential_application() {
    let spec = grid(128);
    let f = random_field(spec, 5);
    let k0 = spec.k0();
    let d5 = AberrationSet::defocus(5e-3, k0).unwrap();
    let d10 = AberrationSet::defocus(10e-3, k0).unwrap();
    let twice = propagate(&propagate(&f, &d5).unwrap(), &d5).unwrap();
    assert!(twice.max_abs_diff(&propagate(&f, &d10).unwrap()) < 1e-10);

    let presets: Vec<_> = reference_presets(&spec)
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    let combined = presets
        .iter()
        .fold(AberrationSet::empty(), |acc, s| acc.add(s));
    let mut seq = f.clone();
    for s in &presets {
        seq = propagate(&seq, s).unwrap();
    }
    assert!(seq.max_abs_diff(&propagate(&f, &combined).unwrap()) < 1e-10);
}

#[test]
fn coherent_presets_conserve_power() {
    let spec = grid(256);
    let f = random_field(spec, 6);
    let before = total_power(&f);
    for (name, set) in reference_presets(&spec) {
        let after = total_power(&propagate(&f, &set).unwrap());
        if set.is_coherent() {
            assert!(((after - before) / before).abs() < 1e-12, "{name}");
        } else {
            assert!(((after - before) / before).abs() > 1e-6, "{name}");
        }
    }
}

#[test]
fn green_functions_have_quarter_turn_symmetry() {
    let spec = grid(64);
    let n = spec.nx();
    let k0 = spec.k0();
    let mut greens = Vec::new();
    for set in [
        AberrationSet::defocus(10e-3, k0).unwrap(),
        AberrationSet::spherical(5e3, k0).unwrap(),
    ] {
        let g = green_function(&spec, &set).unwrap();
        let peak = g.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let rotated = ComplexField::from_fn(spec, |r, c| g.get(c, (n - r) % n)).unwrap();
        assert!(rotated.max_abs_diff(&g) < 1e-12 * peak);
        greens.push(g);
    }
    assert!(greens[0].max_abs_diff(&greens[1]) > 1e-3);

    let delta = green_function(&spec, &AberrationSet::empty()).unwrap();
    assert!((delta.get(0, 0).re - n as f64).abs() < 1e-12);
    assert!(delta.data()[1..].iter().all(|z| z.norm() < 1e-12));
}
