//! Paraxial scalar propagation of lattice-mode fields through lens, pupil
//! and modulator trains.
//!
//! Every occupied lattice mode `l` is launched as a normalized Gaussian
//! spot and propagated on its own. Intensity maps combine the mode fields
//! with the one-photon density matrix,
//! `I(x, z) = Σ ρ[l][l'] u_l(x, z) conj(u_l'(x, z))`.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{QfoError, Result};
use crate::evolution::reduced_one_photon_density;
use crate::layers::{fourier_coeffs, DiagonalPhases, PupilProfile};
use crate::mode::{ModeWindow, PhotonicState};
use crate::synthesis::Profiles;

pub const DEFAULT_Z_SAMPLES: usize = 64;
/// Cells at each edge watched by the aliasing guard.
pub const GUARD_CELLS: usize = 2;
pub const ALIASING_LIMIT: f64 = 1e-6;
pub const PARAXIAL_LIMIT: f64 = 0.01;
/// Spectral energy fraction that defines `κ_max`.
const SPECTRAL_CONTAINMENT: f64 = 1.0 - 1e-6;

/// Uniform 1D grid, `x_j = (j - N/2) dx` with `dx = extent / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub points: usize,
    /// Physical width in metres.
    pub extent: f64,
}

impl Grid {
    pub fn new(points: usize, extent: f64) -> Result<Self> {
        if points < 8 || !(extent > 0.0) {
            return Err(QfoError::InvalidScene(format!(
                "grid needs at least 8 points and a positive extent (got {points}, {extent})"
            )));
        }
        Ok(Self { points, extent })
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.points / 2) as f64) * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Angular spatial frequency of FFT bin `j`.
    pub fn kx(&self, j: usize) -> f64 {
        let n = self.points as i64;
        let j = j as i64;
        let signed = if j < (n + 1) / 2 { j } else { j - n };
        2.0 * PI * signed as f64 / self.extent
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let j = (x / self.dx()).round() as i64 + (self.points / 2) as i64;
        j.clamp(0, self.points as i64 - 1) as usize
    }
}

/// Gaussian spot `∝ exp(-(x - x₀)²/w²)` for lattice mode `label`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub label: i64,
    pub center: f64,
    pub waist: f64,
}

impl Source {
    /// Unit-power field sampled on `grid`.
    pub fn field(&self, grid: &Grid) -> Vec<Complex64> {
        let mut u: Vec<Complex64> = grid
            .xs()
            .iter()
            .map(|&x| {
                let d = (x - self.center) / self.waist;
                Complex64::new((-d * d).exp(), 0.0)
            })
            .collect();
        normalize(&mut u, grid.dx());
        u
    }
}

fn sample_pupil_unchecked(profile: &PupilProfile, modes: usize) -> Vec<Complex64> {
    (0..modes)
        .map(|j| Complex64::from_polar(1.0, -profile.phase_at_fraction(j as f64 / modes as f64)))
        .collect()
}

fn power(u: &[Complex64], dx: f64) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
}

fn normalize(u: &mut [Complex64], dx: f64) {
    let p = power(u, dx).sqrt();
    if p > 0.0 {
        for z in u.iter_mut() {
            *z /= p;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Element {
    FreeSpace {
        dz: f64,
    },
    ThinLens {
        f: f64,
    },
    /// Fourier-plane mask; `profile.kappa_x` sets its period. With
    /// `samples = Some(M)` the transmission is the band-limited interpolant
    /// of `M` samples of `exp(-iφ)` instead of `exp(-iφ)` itself.
    Pupil {
        profile: PupilProfile,
        #[serde(default)]
        samples: Option<usize>,
    },
    /// Lattice modulator: phase `phi[index(l)]` over the cell of label `l`,
    /// zero outside the window.
    Modulator {
        phases: DiagonalPhases,
        window: ModeWindow,
        pitch: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationScene {
    pub grid: Grid,
    pub wavelength: f64,
    pub elements: Vec<Element>,
    pub sources: Vec<Source>,
    /// Sample planes per free-space segment.
    #[serde(default = "default_z_samples")]
    pub z_samples: usize,
}

fn default_z_samples() -> usize {
    DEFAULT_Z_SAMPLES
}

impl PropagationScene {
    pub fn validate(&self) -> Result<()> {
        Grid::new(self.grid.points, self.grid.extent)?;
        if !(self.wavelength > 0.0) {
            return Err(QfoError::InvalidScene("wavelength must be positive".into()));
        }
        if self.z_samples == 0 {
            return Err(QfoError::InvalidScene("z_samples must be positive".into()));
        }
        let half = self.grid.extent / 2.0;
        for s in &self.sources {
            if !(s.waist > 0.0) {
                return Err(QfoError::InvalidScene(format!(
                    "source {} has a non-positive waist",
                    s.label
                )));
            }
            if s.center.abs() + 4.0 * s.waist > half {
                return Err(QfoError::InvalidScene(format!(
                    "source {} at {} m does not fit the grid with 4 waists of margin",
                    s.label, s.center
                )));
            }
        }
        for e in &self.elements {
            match e {
                Element::FreeSpace { dz } if !(*dz >= 0.0) => {
                    return Err(QfoError::InvalidScene("negative free-space step".into()))
                }
                Element::ThinLens { f } if *f == 0.0 || !f.is_finite() => {
                    return Err(QfoError::InvalidScene(
                        "lens focal length must be finite and non-zero".into(),
                    ))
                }
                Element::Pupil { profile, .. } if profile.kappa_x == 0.0 => {
                    return Err(QfoError::InvalidScene(
                        "pupil needs a non-zero kappa_x".into(),
                    ))
                }
                Element::Pupil {
                    samples: Some(m), ..
                } if *m == 0 => {
                    return Err(QfoError::InvalidScene(
                        "sampled pupil needs at least one sample".into(),
                    ))
                }
                Element::Modulator {
                    phases,
                    window,
                    pitch,
                } => {
                    if phases.len() != window.modes {
                        return Err(QfoError::DimensionMismatch {
                            expected: window.modes,
                            got: phases.len(),
                        });
                    }
                    if !(*pitch > 0.0) {
                        return Err(QfoError::InvalidScene(
                            "modulator pitch must be positive".into(),
                        ));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Total length along z.
    pub fn length(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match e {
                Element::FreeSpace { dz } => *dz,
                _ => 0.0,
            })
            .sum()
    }

    fn source(&self, label: i64) -> Option<&Source> {
        self.sources.iter().find(|s| s.label == label)
    }
}

/// FFT-backed field operators on a fixed grid and wavelength.
pub struct Propagator {
    grid: Grid,
    k: f64,
    kx: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl Propagator {
    pub fn new(grid: Grid, wavelength: f64) -> Result<Self> {
        let grid = Grid::new(grid.points, grid.extent)?;
        if !(wavelength > 0.0) {
            return Err(QfoError::InvalidScene("wavelength must be positive".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid,
            k: 2.0 * PI / wavelength,
            kx: (0..grid.points).map(|j| grid.kx(j)).collect(),
            fft: planner.plan_fft_forward(grid.points),
            ifft: planner.plan_fft_inverse(grid.points),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    fn spectrum(&self, field: &[Complex64]) -> Vec<Complex64> {
        let mut s = field.to_vec();
        self.fft.process(&mut s);
        s
    }

    fn field_at(&self, spectrum: &[Complex64], dz: f64) -> Vec<Complex64> {
        let n = self.grid.points as f64;
        let mut u: Vec<Complex64> = spectrum
            .iter()
            .zip(&self.kx)
            .map(|(a, kx)| a * Complex64::from_polar(1.0 / n, -kx * kx * dz / (2.0 * self.k)))
            .collect();
        self.ifft.process(&mut u);
        u
    }

    /// Fraction of power within [`GUARD_CELLS`] of either edge.
    pub fn boundary_fraction(&self, field: &[Complex64]) -> f64 {
        let total: f64 = field.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let n = field.len();
        let edge: f64 = field[..GUARD_CELLS]
            .iter()
            .chain(&field[n - GUARD_CELLS..])
            .map(|z| z.norm_sqr())
            .sum();
        edge / total
    }

    fn guard(&self, field: &[Complex64]) -> Result<()> {
        let frac = self.boundary_fraction(field);
        if frac >= ALIASING_LIMIT {
            return Err(QfoError::Aliasing(frac));
        }
        Ok(())
    }

    /// Paraxial transfer `exp(-i k_x² Δz / 2k)`.
    pub fn free_space(&self, field: &mut [Complex64], dz: f64) -> Result<()> {
        if !(dz >= 0.0) {
            return Err(QfoError::InvalidScene("negative free-space step".into()));
        }
        let out = self.field_at(&self.spectrum(field), dz);
        self.guard(&out)?;
        field.copy_from_slice(&out);
        Ok(())
    }

    /// Quadratic phase `exp(-i k x² / 2f)`.
    pub fn thin_lens(&self, field: &mut [Complex64], f: f64) {
        for (j, z) in field.iter_mut().enumerate() {
            let x = self.grid.x(j);
            *z *= Complex64::from_polar(1.0, -self.k * x * x / (2.0 * f));
        }
    }

    /// Pupil mounted mirrored, transmission `P(-ξ)` with `P = exp(-iφ)`, so
    /// that lattice sampling matches the circulant layer convention.
    pub fn pupil(&self, field: &mut [Complex64], profile: &PupilProfile) {
        for (j, z) in field.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, -profile.phase(-self.grid.x(j)));
        }
    }

    /// Mirrored pupil whose transmission is the trigonometric interpolant of
    /// `exp(-iφ)` sampled at `modes` points per period. It carries only the
    /// diffraction orders `-M/2..=M/2` of the circulant layer.
    pub fn sampled_pupil(
        &self,
        field: &mut [Complex64],
        profile: &PupilProfile,
        modes: usize,
    ) -> Result<()> {
        let coeffs = fourier_coeffs(&sample_pupil_unchecked(profile, modes));
        let half = modes / 2;
        for (j, z) in field.iter_mut().enumerate() {
            let t = -self.grid.x(j) * profile.kappa_x / (2.0 * PI);
            let mut p = Complex64::new(0.0, 0.0);
            for (k, c) in coeffs.iter().enumerate() {
                if modes.is_multiple_of(2) && k == half {
                    p += c * (PI * modes as f64 * t).cos();
                    continue;
                }
                let order = if k <= half {
                    k as f64
                } else {
                    k as f64 - modes as f64
                };
                p += c * Complex64::from_polar(1.0, -2.0 * PI * order * t);
            }
            *z *= p;
        }
        Ok(())
    }

    /// Step-function modulator `exp(-i φ_r)` over each lattice cell.
    pub fn modulator(
        &self,
        field: &mut [Complex64],
        phases: &DiagonalPhases,
        window: &ModeWindow,
        pitch: f64,
    ) {
        for (j, z) in field.iter_mut().enumerate() {
            let label = (self.grid.x(j) / pitch).round() as i64;
            if let Ok(i) = window.index(label) {
                *z *= Complex64::from_polar(1.0, -phases.phi[i]);
            }
        }
    }

    /// `(κ_max / k)²`, with `κ_max` enclosing all but 1e-6 of the spectral power.
    pub fn paraxial_ratio(&self, field: &[Complex64]) -> f64 {
        let spec = self.spectrum(field);
        let mut bins: Vec<(f64, f64)> = spec
            .iter()
            .zip(&self.kx)
            .map(|(a, kx)| (kx.abs(), a.norm_sqr()))
            .collect();
        bins.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = bins.iter().map(|b| b.1).sum();
        let mut acc = 0.0;
        let mut kmax = 0.0;
        for (kx, p) in bins {
            acc += p;
            kmax = kx;
            if acc >= SPECTRAL_CONTAINMENT * total {
                break;
            }
        }
        (kmax / self.k).powi(2)
    }

    fn check_paraxial(&self, field: &[Complex64]) -> Result<()> {
        let r = self.paraxial_ratio(field);
        if r >= PARAXIAL_LIMIT {
            return Err(QfoError::Paraxial(r));
        }
        Ok(())
    }

    /// Apply a thin element (no z advance).
    pub fn apply_thin(&self, field: &mut [Complex64], element: &Element) -> Result<()> {
        match element {
            Element::FreeSpace { dz } => self.free_space(field, *dz)?,
            Element::ThinLens { f } => self.thin_lens(field, *f),
            Element::Pupil {
                profile,
                samples: None,
            } => self.pupil(field, profile),
            Element::Pupil {
                profile,
                samples: Some(m),
            } => self.sampled_pupil(field, profile, *m)?,
            Element::Modulator {
                phases,
                window,
                pitch,
            } => self.modulator(field, phases, window, *pitch),
        }
        Ok(())
    }
}

/// One free-space step on a standalone field.
pub fn angular_spectrum_step(
    field: &[Complex64],
    dz: f64,
    wavelength: f64,
    grid: &Grid,
) -> Result<Vec<Complex64>> {
    let p = Propagator::new(*grid, wavelength)?;
    let mut u = field.to_vec();
    p.free_space(&mut u, dz)?;
    Ok(u)
}

pub fn thin_lens(
    field: &[Complex64],
    f: f64,
    wavelength: f64,
    grid: &Grid,
) -> Result<Vec<Complex64>> {
    if f == 0.0 {
        return Err(QfoError::InvalidScene(
            "lens focal length must be non-zero".into(),
        ));
    }
    let p = Propagator::new(*grid, wavelength)?;
    let mut u = field.to_vec();
    p.thin_lens(&mut u, f);
    Ok(u)
}

/// Intensity samples `I[z][x]` with their axes in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub intensity: Array2<f64>,
}

impl IntensityMap {
    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// `∫ I dx` at plane `row`.
    pub fn power(&self, row: usize) -> f64 {
        self.intensity.row(row).sum() * self.dx()
    }

    /// Index of the sample plane nearest to `z`.
    pub fn nearest_plane(&self, z: f64) -> usize {
        self.z
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - z).abs().total_cmp(&(b.1 - z).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Intensity at plane `row`, linearly interpolated at `x`.
    pub fn sample(&self, row: usize, x: f64) -> f64 {
        let dx = self.dx();
        let t = (x - self.x[0]) / dx;
        let j = (t.floor().max(0.0) as usize).min(self.x.len() - 2);
        let frac = (t - j as f64).clamp(0.0, 1.0);
        let r = self.intensity.row(row);
        r[j] * (1.0 - frac) + r[j + 1] * frac
    }

    /// CSV with an axis header: first row `z\x,x_0,...`, then `z,I...` per plane.
    pub fn write_csv<W: Write>(&self, mut w: W, x_stride: usize) -> io::Result<()> {
        let stride = x_stride.max(1);
        write!(w, "z\\x")?;
        for x in self.x.iter().step_by(stride) {
            write!(w, ",{x:.16e}")?;
        }
        writeln!(w)?;
        for (i, z) in self.z.iter().enumerate() {
            write!(w, "{z:.16e}")?;
            for v in self.intensity.row(i).iter().step_by(stride) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Binary 8-bit PGM, one row per plane, normalized to the global maximum.
    pub fn write_pgm<W: Write>(&self, mut w: W, x_stride: usize) -> io::Result<()> {
        let stride = x_stride.max(1);
        let width = self.x.len().div_ceil(stride);
        let max = self.intensity.iter().cloned().fold(0.0, f64::max);
        write!(w, "P5\n{} {}\n255\n", width, self.z.len())?;
        let mut row = Vec::with_capacity(width);
        for i in 0..self.z.len() {
            row.clear();
            for v in self.intensity.row(i).iter().step_by(stride) {
                let level = if max > 0.0 {
                    (v / max * 255.0).round()
                } else {
                    0.0
                };
                row.push(level.clamp(0.0, 255.0) as u8);
            }
            w.write_all(&row)?;
        }
        Ok(())
    }
}

fn occupied(rho: &Array2<Complex64>) -> Vec<usize> {
    (0..rho.nrows())
        .filter(|&l| rho.row(l).iter().any(|z| z.norm_sqr() > 0.0))
        .collect()
}

fn combine(rho: &Array2<Complex64>, modes: &[usize], fields: &[Vec<Complex64>], out: &mut [f64]) {
    out.fill(0.0);
    for (a, &l) in modes.iter().enumerate() {
        for (b, &lp) in modes.iter().enumerate() {
            let r = rho[[l, lp]];
            if r.norm_sqr() == 0.0 {
                continue;
            }
            for (o, (u, v)) in out.iter_mut().zip(fields[a].iter().zip(&fields[b])) {
                *o += (r * u * v.conj()).re;
            }
        }
    }
}

/// Propagate one field per occupied mode of `rho` (indexed by `window`) and
/// record the density-weighted intensity at every sample plane.
pub fn propagate_density(
    scene: &PropagationScene,
    rho: &Array2<Complex64>,
    window: &ModeWindow,
) -> Result<IntensityMap> {
    scene.validate()?;
    if rho.dim() != (window.modes, window.modes) {
        return Err(QfoError::DimensionMismatch {
            expected: window.modes,
            got: rho.nrows(),
        });
    }
    let prop = Propagator::new(scene.grid, scene.wavelength)?;
    let modes = occupied(rho);
    let mut fields = Vec::with_capacity(modes.len());
    for &i in &modes {
        let label = window.label(i);
        let src = scene.source(label).ok_or(QfoError::Unsourced(label))?;
        let u = src.field(&scene.grid);
        prop.check_paraxial(&u)?;
        fields.push(u);
    }

    let n_planes = 1 + scene
        .elements
        .iter()
        .filter(|e| matches!(e, Element::FreeSpace { .. }))
        .count()
        * scene.z_samples;
    let mut intensity = Array2::zeros((n_planes, scene.grid.points));
    let mut zs = Vec::with_capacity(n_planes);
    let mut row = vec![0.0; scene.grid.points];
    combine(rho, &modes, &fields, &mut row);
    intensity
        .row_mut(0)
        .assign(&ndarray::ArrayView1::from(&row));
    zs.push(0.0);

    let mut z = 0.0;
    for element in &scene.elements {
        match element {
            Element::FreeSpace { dz } => {
                let spectra: Vec<Vec<Complex64>> =
                    fields.par_iter().map(|u| prop.spectrum(u)).collect();
                for s in 1..=scene.z_samples {
                    let step = dz * s as f64 / scene.z_samples as f64;
                    let planes: Vec<Vec<Complex64>> = spectra
                        .par_iter()
                        .map(|sp| prop.field_at(sp, step))
                        .collect();
                    for u in &planes {
                        prop.guard(u)?;
                    }
                    combine(rho, &modes, &planes, &mut row);
                    intensity
                        .row_mut(zs.len())
                        .assign(&ndarray::ArrayView1::from(&row));
                    zs.push(z + step);
                    if s == scene.z_samples {
                        fields = planes;
                    }
                }
                z += dz;
            }
            thin => {
                fields
                    .par_iter_mut()
                    .try_for_each(|u| prop.apply_thin(u, thin))?;
                for u in &fields {
                    prop.check_paraxial(u)?;
                }
            }
        }
    }
    Ok(IntensityMap {
        z: zs,
        x: scene.grid.xs(),
        intensity,
    })
}

/// [`propagate_density`] with the one-photon density of `state`.
pub fn propagate_scene(
    scene: &PropagationScene,
    state: &PhotonicState,
    window: &ModeWindow,
) -> Result<IntensityMap> {
    propagate_density(scene, &reduced_one_photon_density(state)?, window)
}

/// Output-plane field of each listed source after the whole element train.
pub fn output_fields(scene: &PropagationScene, labels: &[i64]) -> Result<Vec<Vec<Complex64>>> {
    scene.validate()?;
    let prop = Propagator::new(scene.grid, scene.wavelength)?;
    labels
        .iter()
        .map(|&label| {
            let src = scene.source(label).ok_or(QfoError::Unsourced(label))?;
            let mut u = src.field(&scene.grid);
            for e in &scene.elements {
                prop.apply_thin(&mut u, e)?;
            }
            Ok(u)
        })
        .collect()
}

/// Physical parameters of a lattice processor scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneParams {
    pub grid: Grid,
    pub wavelength: f64,
    pub focal_length: f64,
    /// Lattice pitch `l_x`.
    pub pitch: f64,
    pub waist: f64,
    pub z_samples: usize,
    pub pupil_model: PupilModel,
}

/// How pupils are rendered in scenes built from [`SceneParams`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PupilModel {
    /// Phase-only mask `exp(-iφ)`.
    #[default]
    Phase,
    /// Band-limited interpolant of the lattice samples of `exp(-iφ)`.
    Sampled,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            grid: Grid {
                points: 4096,
                extent: 3.2e-3,
            },
            wavelength: 650e-9,
            focal_length: 2.5e-2,
            pitch: 100e-6,
            waist: 10e-6,
            z_samples: DEFAULT_Z_SAMPLES,
            pupil_model: PupilModel::Phase,
        }
    }
}

impl SceneParams {
    /// Pupil fundamental `κ_x = k l_x / f`, which reproduces the input pitch
    /// at the output.
    pub fn kappa_x(&self) -> f64 {
        2.0 * PI / self.wavelength * self.pitch / self.focal_length
    }

    /// Output spot spacing `f κ_x / k` for a given pupil.
    pub fn output_pitch(&self, profile: &PupilProfile) -> f64 {
        self.focal_length * profile.kappa_x * self.wavelength / (2.0 * PI)
    }

    pub fn sources(&self, window: &ModeWindow) -> Vec<Source> {
        window
            .labels()
            .map(|label| Source {
                label,
                center: label as f64 * self.pitch,
                waist: self.waist,
            })
            .collect()
    }

    /// `f - lens - f - pupil - f - lens - f`.
    pub fn four_f(&self, pupil: &PupilProfile, window: &ModeWindow) -> Vec<Element> {
        let f = self.focal_length;
        let mut profile = pupil.clone();
        if profile.kappa_x == 0.0 {
            profile.kappa_x = self.kappa_x();
        }
        vec![
            Element::FreeSpace { dz: f },
            Element::ThinLens { f },
            Element::FreeSpace { dz: f },
            Element::Pupil {
                profile,
                samples: match self.pupil_model {
                    PupilModel::Phase => None,
                    PupilModel::Sampled => Some(window.modes),
                },
            },
            Element::FreeSpace { dz: f },
            Element::ThinLens { f },
            Element::FreeSpace { dz: f },
        ]
    }

    pub fn scene(&self, elements: Vec<Element>, window: &ModeWindow) -> PropagationScene {
        PropagationScene {
            grid: self.grid,
            wavelength: self.wavelength,
            elements,
            sources: self.sources(window),
            z_samples: self.z_samples,
        }
    }

    pub fn four_f_scene(&self, pupil: &PupilProfile, window: &ModeWindow) -> PropagationScene {
        self.scene(self.four_f(pupil, window), window)
    }

    /// Two 4f relays with the lattice modulator at the shared image plane.
    pub fn eight_f_scene(&self, profiles: &Profiles, window: &ModeWindow) -> PropagationScene {
        let mut elements = self.four_f(&profiles.pupil, window);
        elements.push(Element::Modulator {
            phases: profiles.modulator.clone(),
            window: *window,
            pitch: self.pitch,
        });
        elements.extend(self.four_f(
            profiles.second_pupil.as_ref().unwrap_or(&profiles.pupil),
            window,
        ));
        self.scene(elements, window)
    }
}
