//! Circulant layers from periodic phase-only pupils, diagonal layers from
//! lattice phase modulators, and their ordered products.
//!
//! Matrices follow the creation-operator row convention: a photon entering
//! internal mode `n` leaves in mode `l` with amplitude `T[n][l]`, so a
//! cascade `A` then `B` composes as the product `A · B`.
//!
//! A pupil sampled at `d_j = exp(-i φ(j·period/M))` yields the coefficients
//! `P_k = (1/M) Σ_j d_j ω^{jk}` with `ω = exp(2πi/M)` and the layer
//! `T[n][r] = P_{(n+r) mod M}`, i.e. `T = F · diag(d) · F` with `F` the
//! unitary DFT. The more common `F · diag(d) · F†` differs from this by the
//! index reversal `r → -r`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QfoError, Result};

const UNIMODULAR_TOL: f64 = 1e-12;

/// Periodic pupil phase `φ(x) = Σ_n S_n sin(nκx) + C_n cos(nκx)`, `n = 1..=R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PupilProfile {
    #[serde(rename = "R")]
    pub harmonics: usize,
    #[serde(rename = "sin")]
    pub sin_coeffs: Vec<f64>,
    #[serde(rename = "cos")]
    pub cos_coeffs: Vec<f64>,
    /// Fundamental spatial angular frequency in rad/m. Informational for the
    /// lattice model; the propagation engine uses it to place the pupil.
    #[serde(default)]
    pub kappa_x: f64,
}

impl PupilProfile {
    pub fn new(sin_coeffs: Vec<f64>, cos_coeffs: Vec<f64>) -> Result<Self> {
        if sin_coeffs.len() != cos_coeffs.len() {
            return Err(QfoError::DimensionMismatch {
                expected: sin_coeffs.len(),
                got: cos_coeffs.len(),
            });
        }
        Ok(Self {
            harmonics: sin_coeffs.len(),
            sin_coeffs,
            cos_coeffs,
            kappa_x: 0.0,
        })
    }

    /// Zero phase with `harmonics` (zero) coefficients.
    pub fn flat(harmonics: usize) -> Self {
        Self {
            harmonics,
            sin_coeffs: vec![0.0; harmonics],
            cos_coeffs: vec![0.0; harmonics],
            kappa_x: 0.0,
        }
    }

    pub fn with_kappa(mut self, kappa_x: f64) -> Self {
        self.kappa_x = kappa_x;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.sin_coeffs.len() != self.harmonics || self.cos_coeffs.len() != self.harmonics {
            return Err(QfoError::DimensionMismatch {
                expected: self.harmonics,
                got: self.sin_coeffs.len().min(self.cos_coeffs.len()),
            });
        }
        Ok(())
    }

    /// Phase at `t = x / period`.
    pub fn phase_at_fraction(&self, t: f64) -> f64 {
        self.sin_coeffs
            .iter()
            .zip(&self.cos_coeffs)
            .enumerate()
            .map(|(i, (s, c))| {
                let arg = 2.0 * PI * (i + 1) as f64 * t;
                s * arg.sin() + c * arg.cos()
            })
            .sum()
    }

    /// Phase at physical coordinate `x` (metres); needs `kappa_x`.
    pub fn phase(&self, x: f64) -> f64 {
        self.phase_at_fraction(x * self.kappa_x / (2.0 * PI))
    }
}

/// Per-mode phases `φ_r` of a lattice phase modulator, indexed internally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalPhases {
    pub phi: Vec<f64>,
}

impl DiagonalPhases {
    pub fn new(phi: Vec<f64>) -> Self {
        Self { phi }
    }

    pub fn zeros(modes: usize) -> Self {
        Self {
            phi: vec![0.0; modes],
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Circulant,
    Diagonal,
    Composite,
}

/// One optical layer of a stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Pupil(PupilProfile),
    Modulator(DiagonalPhases),
}

impl Layer {
    fn is_circulant(&self) -> bool {
        matches!(self, Layer::Pupil(_))
    }

    pub fn transform(&self, modes: usize) -> Result<ModeTransform> {
        match self {
            Layer::Pupil(p) => circulant_from_pupil(p, modes),
            Layer::Modulator(d) => {
                if d.len() != modes {
                    return Err(QfoError::DimensionMismatch {
                        expected: modes,
                        got: d.len(),
                    });
                }
                Ok(diagonal_transform(d))
            }
        }
    }
}

/// A linear map on `M` lattice modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    matrix: Array2<Complex64>,
    kind: TransformKind,
    provenance: Vec<Layer>,
}

impl ModeTransform {
    /// Wrap an arbitrary square matrix as a composite transform.
    pub fn from_matrix(matrix: Array2<Complex64>) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c {
            return Err(QfoError::NotSquare { rows: r, cols: c });
        }
        Ok(Self {
            matrix,
            kind: TransformKind::Composite,
            provenance: Vec::new(),
        })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            matrix: Array2::eye(modes),
            kind: TransformKind::Diagonal,
            provenance: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.matrix
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn provenance(&self) -> &[Layer] {
        &self.provenance
    }

    pub fn get(&self, input: usize, output: usize) -> Complex64 {
        self.matrix[[input, output]]
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ModeTransform) -> Result<ModeTransform> {
        if self.dim() != next.dim() {
            return Err(QfoError::DimensionMismatch {
                expected: self.dim(),
                got: next.dim(),
            });
        }
        let mut provenance = self.provenance.clone();
        provenance.extend(next.provenance.iter().cloned());
        Ok(ModeTransform {
            matrix: self.matrix.dot(&next.matrix),
            kind: TransformKind::Composite,
            provenance,
        })
    }

    /// `max |T†T - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.matrix.t().mapv(|z| z.conj()).dot(&self.matrix);
        gram.indexed_iter()
            .map(|((i, j), z)| {
                let target = if i == j { 1.0 } else { 0.0 };
                (z - target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest spread of entries within an `(n + r) mod M` class.
    pub fn anti_circulant_defect(&self) -> f64 {
        let m = self.dim();
        let mut worst = 0.0f64;
        for n in 0..m {
            for r in 0..m {
                let reference = self.matrix[[0, (n + r) % m]];
                worst = worst.max((self.matrix[[n, r]] - reference).norm());
            }
        }
        worst
    }
}

/// Sample `exp(-i φ)` at `x_j = j·period/M`.
pub fn sample_pupil(profile: &PupilProfile, modes: usize) -> Result<Vec<Complex64>> {
    profile.validate()?;
    let needed = 2 * profile.harmonics + 1;
    if modes < needed || modes < 2 {
        return Err(QfoError::BelowNyquist {
            modes,
            harmonics: profile.harmonics,
            needed,
        });
    }
    Ok((0..modes)
        .map(|j| {
            let phi = profile.phase_at_fraction(j as f64 / modes as f64);
            Complex64::from_polar(1.0, -phi)
        })
        .collect())
}

/// `P_k = (1/M) Σ_j d_j ω^{jk}`.
pub fn fourier_coeffs(samples: &[Complex64]) -> Vec<Complex64> {
    let m = samples.len();
    let scale = 1.0 / m as f64;
    (0..m)
        .map(|k| {
            samples
                .iter()
                .enumerate()
                .map(|(j, d)| {
                    let angle = 2.0 * PI * ((j * k) % m) as f64 / m as f64;
                    d * Complex64::from_polar(1.0, angle)
                })
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Layer with `T[n][r] = P_{(n+r) mod M}` from precomputed coefficients.
pub fn circulant_from_coeffs(coeffs: &[Complex64]) -> ModeTransform {
    let m = coeffs.len();
    ModeTransform {
        matrix: Array2::from_shape_fn((m, m), |(n, r)| coeffs[(n + r) % m]),
        kind: TransformKind::Circulant,
        provenance: Vec::new(),
    }
}

pub fn circulant_from_samples(samples: &[Complex64]) -> Result<ModeTransform> {
    if samples.len() < 2 {
        return Err(QfoError::WindowTooSmall(samples.len()));
    }
    if let Some((index, d)) = samples
        .iter()
        .enumerate()
        .find(|(_, d)| (d.norm() - 1.0).abs() > UNIMODULAR_TOL)
    {
        return Err(QfoError::NotUnimodular {
            index,
            modulus: d.norm(),
        });
    }
    Ok(circulant_from_coeffs(&fourier_coeffs(samples)))
}

/// Circulant layer of a 4f system with the given pupil.
pub fn circulant_from_pupil(profile: &PupilProfile, modes: usize) -> Result<ModeTransform> {
    let mut t = circulant_from_samples(&sample_pupil(profile, modes)?)?;
    t.provenance.push(Layer::Pupil(profile.clone()));
    Ok(t)
}

/// `D[r][r] = exp(-i φ_r)`.
pub fn diagonal_transform(phases: &DiagonalPhases) -> ModeTransform {
    let m = phases.len();
    let mut matrix = Array2::zeros((m, m));
    for (r, &phi) in phases.phi.iter().enumerate() {
        matrix[[r, r]] = Complex64::from_polar(1.0, -phi);
    }
    ModeTransform {
        matrix,
        kind: TransformKind::Diagonal,
        provenance: vec![Layer::Modulator(phases.clone())],
    }
}

/// 8f processor: pupil, lattice modulator, pupil; `Λ₁ · D · Λ₂`.
pub fn compose_8f(
    first: &PupilProfile,
    modulator: &DiagonalPhases,
    second: &PupilProfile,
    modes: usize,
) -> Result<ModeTransform> {
    layered_stack(
        &[
            Layer::Pupil(first.clone()),
            Layer::Modulator(modulator.clone()),
            Layer::Pupil(second.clone()),
        ],
        modes,
    )
}

/// Ordered product of an alternating circulant/diagonal sequence.
pub fn layered_stack(layers: &[Layer], modes: usize) -> Result<ModeTransform> {
    let Some(first) = layers.first() else {
        return Err(QfoError::EmptyStack);
    };
    for (i, pair) in layers.windows(2).enumerate() {
        if pair[0].is_circulant() == pair[1].is_circulant() {
            return Err(QfoError::NotAlternating(i + 1));
        }
    }
    let mut acc = first.transform(modes)?;
    for layer in &layers[1..] {
        acc = acc.then(&layer.transform(modes)?)?;
    }
    if layers.len() > 1 {
        acc.kind = TransformKind::Composite;
    }
    Ok(acc)
}
