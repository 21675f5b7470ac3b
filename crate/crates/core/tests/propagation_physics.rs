use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use qfo_core::propagation::{output_fields, Propagator, PupilModel, SceneParams, Source};
use qfo_core::{
    angular_spectrum_step, circulant_from_pupil, propagate_density, propagate_scene, thin_lens,
    Element, Grid, ModeWindow, PhotonicState, PupilProfile,
};

const WL: f64 = 650e-9;

fn peak_amplitude(params: &SceneParams) -> f64 {
    (2.0 / (PI * params.waist * params.waist)).powf(0.25)
}

/// `‖a - e^{iθ} b‖ / ‖b‖` minimized over θ.
fn aligned_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let err: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum();
    let norm: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (err / norm).sqrt()
}

fn second_moment_width(grid: &Grid, u: &[Complex64]) -> f64 {
    let xs = grid.xs();
    let p: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let mean: f64 = xs.iter().zip(u).map(|(x, z)| x * z.norm_sqr()).sum::<f64>() / p;
    (xs.iter()
        .zip(u)
        .map(|(x, z)| (x - mean).powi(2) * z.norm_sqr())
        .sum::<f64>()
        / p)
        .sqrt()
}

fn local_maxima(values: &[f64], floor: f64) -> Vec<usize> {
    (1..values.len() - 1)
        .filter(|&j| values[j] > floor && values[j] >= values[j - 1] && values[j] > values[j + 1])
        .collect()
}

#[test]
fn gaussian_width_grows_by_sqrt2_over_rayleigh_range() {
    let grid = Grid::new(4096, 3.2e-3).unwrap();
    let w = 20e-6;
    let u = Source {
        label: 0,
        center: 0.0,
        waist: w,
    }
    .field(&grid);
    let zr = PI * w * w / WL;
    let v = angular_spectrum_step(&u, zr, WL, &grid).unwrap();
    let ratio = second_moment_width(&grid, &v) / second_moment_width(&grid, &u);
    assert!((ratio - 2f64.sqrt()).abs() < 1e-4, "{ratio}");
}

#[test]
fn lens_focuses_to_the_aperture_transform() {
    let grid = Grid::new(2048, 3.2e-3).unwrap();
    let f = 0.2;
    let k = 2.0 * PI / WL;
    let aperture = Source {
        label: 0,
        center: 0.0,
        waist: 3e-4,
    }
    .field(&grid);
    let mut u = thin_lens(&aperture, f, WL, &grid).unwrap();
    u = angular_spectrum_step(&u, f, WL, &grid).unwrap();
    // Fraunhofer oracle by direct summation
    let xs = grid.xs();
    let dx = grid.dx();
    let mut worst: f64 = 0.0;
    let peak = u.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    for j in (grid.points / 2 - 200..grid.points / 2 + 200).step_by(7) {
        let xi = xs[j];
        let ft: Complex64 = xs
            .iter()
            .zip(&aperture)
            .map(|(x, a)| a * Complex64::from_polar(1.0, -k * x * xi / f))
            .sum::<Complex64>()
            * dx;
        let expected = ft.norm_sqr() / (WL * f);
        worst = worst.max((u[j].norm_sqr() - expected).abs() / peak);
    }
    assert!(worst < 1e-3, "{worst}");
    let centre = grid.points / 2;
    assert!(u[centre].norm_sqr() >= peak * (1.0 - 1e-9));
}

#[test]
fn flat_four_f_mirrors_the_input() {
    let params = SceneParams::default();
    let prop = Propagator::new(params.grid, WL).unwrap();
    let a = Source {
        label: 0,
        center: 1.3e-4,
        waist: 1e-5,
    }
    .field(&params.grid);
    let b = Source {
        label: 0,
        center: -2.1e-4,
        waist: 1.4e-5,
    }
    .field(&params.grid);
    let input: Vec<Complex64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| x + Complex64::new(0.3, 0.4) * y)
        .collect();
    let mut u = input.clone();
    for e in params.four_f(&PupilProfile::flat(1), &ModeWindow::new(16).unwrap()) {
        prop.apply_thin(&mut u, &e).unwrap();
    }
    let n = params.grid.points;
    // x_j ↦ -x_j is j ↦ N - j on this grid
    let mirrored: Vec<Complex64> = (0..n).map(|j| input[(n - j) % n]).collect();
    let err = aligned_error(&u, &mirrored);
    assert!(err < 1e-3, "{err}");
}

#[test]
fn output_spot_spacing_follows_pupil_frequency() {
    for scale in [1.0, 1.5] {
        let params = SceneParams::default();
        let pupil = PupilProfile::new(vec![1.0], vec![0.0])
            .unwrap()
            .with_kappa(params.kappa_x() * scale);
        let window = ModeWindow::new(16).unwrap();
        let scene = params.four_f_scene(&pupil, &window);
        let u = &output_fields(&scene, &[1]).unwrap()[0];
        let intensity: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
        let max = intensity.iter().cloned().fold(0.0, f64::max);
        let peaks = local_maxima(&intensity, 0.01 * max);
        assert!(peaks.len() >= 3);
        let xs = params.grid.xs();
        let expected = params.output_pitch(&pupil);
        assert!((expected - scale * params.pitch).abs() < 1e-12);
        for w in peaks.windows(2) {
            let spacing = xs[w[1]] - xs[w[0]];
            assert!(
                (spacing - expected).abs() <= params.grid.dx(),
                "{spacing} vs {expected}"
            );
        }
        // zeroth order sits at the mirror image of the source
        let brightest = (0..intensity.len())
            .max_by(|&a, &b| intensity[a].total_cmp(&intensity[b]))
            .unwrap();
        assert!((xs[brightest] + params.pitch).abs() <= params.grid.dx());
    }
}

#[test]
fn lattice_samples_match_circulant_layer() {
    let params = SceneParams {
        z_samples: 1,
        ..SceneParams::default()
    };
    let window = ModeWindow::new(16).unwrap();
    let profile = PupilProfile::new(vec![0.4, 0.0, 0.1], vec![0.0, 0.3, 0.0]).unwrap();
    let t = circulant_from_pupil(&profile, 16).unwrap();
    let scene = params.four_f_scene(&profile, &window);
    let inputs = [-2i64, 0, 1, 3];
    let fields = output_fields(&scene, &inputs).unwrap();
    let amp = peak_amplitude(&params);
    let mut sampled = Vec::new();
    let mut expected = Vec::new();
    for (&n, u) in inputs.iter().zip(&fields) {
        for l in window.labels() {
            sampled.push(u[params.grid.nearest(l as f64 * params.pitch)] / amp);
            expected.push(t.get(window.index(n).unwrap(), window.index(l).unwrap()));
        }
    }
    let err = aligned_error(&sampled, &expected);
    assert!(err < 0.02, "{err}");
}

#[test]
fn density_maps_conserve_power_per_plane() {
    let params = SceneParams {
        z_samples: 8,
        ..SceneParams::default()
    };
    let window = ModeWindow::new(16).unwrap();
    let profile = PupilProfile::new(vec![0.7, -0.2], vec![0.1, 0.5]).unwrap();
    let scene = params.four_f_scene(&profile, &window);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let state = PhotonicState::from_terms(
        16,
        [
            (window.index(0).unwrap(), Complex64::new(s, 0.0)),
            (window.index(1).unwrap(), Complex64::new(0.0, s)),
        ]
        .map(|(i, a)| (qfo_core::OccupationPattern::from_indices(16, &[i]), a)),
    )
    .unwrap();
    let map = propagate_scene(&scene, &state, &window).unwrap();
    assert_eq!(map.z.len(), 1 + 4 * 8);
    for row in 0..map.z.len() {
        assert!(
            (map.power(row) - 1.0).abs() < 1e-9,
            "plane {row}: {}",
            map.power(row)
        );
    }
    assert!((map.z.last().unwrap() - 4.0 * params.focal_length).abs() < 1e-15);
}

#[test]
fn free_space_only_scene_spreads_and_conserves() {
    let params = SceneParams {
        z_samples: 16,
        ..SceneParams::default()
    };
    let window = ModeWindow::new(16).unwrap();
    let mut scene = params.scene(vec![Element::FreeSpace { dz: 0.02 }], &window);
    scene.sources.retain(|s| s.label == 0);
    let mut rho = Array2::zeros((16, 16));
    rho[[8, 8]] = Complex64::new(1.0, 0.0);
    let map = propagate_density(&scene, &rho, &window).unwrap();
    let centre = params.grid.points / 2;
    for row in 0..map.z.len() {
        assert!((map.power(row) - 1.0).abs() < 1e-9);
        if row > 0 {
            assert!(map.intensity[[row, centre]] < map.intensity[[row - 1, centre]]);
        }
    }
}

#[test]
fn scene_json_round_trip() {
    let params = SceneParams::default();
    let window = ModeWindow::new(8).unwrap();
    let scene = params.four_f_scene(&PupilProfile::flat(2), &window);
    let text = serde_json::to_string(&scene).unwrap();
    assert!(text.contains("\"type\":\"thin_lens\""));
    let back: qfo_core::PropagationScene = serde_json::from_str(&text).unwrap();
    assert_eq!(back, scene);
}

#[test]
fn sampled_pupil_reproduces_unwrapped_orders_of_a_strong_pupil() {
    let window = ModeWindow::new(16).unwrap();
    let profile: PupilProfile =
        serde_json::from_str(include_str!("fixtures/hadamard/pupil.json")).unwrap();
    let params = SceneParams {
        z_samples: 1,
        pupil_model: PupilModel::Sampled,
        grid: Grid::new(8192, 6.4e-3).unwrap(),
        ..SceneParams::default()
    };
    let t = circulant_from_pupil(&profile, 16).unwrap();
    let scene = params.four_f_scene(&profile, &window);
    let inputs = [-2i64, -1, 0, 1, 2, 3];
    let fields = output_fields(&scene, &inputs).unwrap();
    let amp = peak_amplitude(&params);
    let mut sampled = Vec::new();
    let mut expected = Vec::new();
    for (&n, u) in inputs.iter().zip(&fields) {
        // order n + l lands on label l without cyclic wrap only for |n + l| < M/2
        for l in window.labels().filter(|l| (n + l).abs() < 8) {
            sampled.push(u[params.grid.nearest(l as f64 * params.pitch)] / amp);
            expected.push(t.get(window.index(n).unwrap(), window.index(l).unwrap()));
        }
    }
    let err = aligned_error(&sampled, &expected);
    assert!(err < 0.02, "{err}");
}
