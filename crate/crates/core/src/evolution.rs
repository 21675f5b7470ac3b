//! Fock-state evolution through mode transforms, coincidence post-selection
//! and gate-operator extraction.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QfoError, Result};
use crate::layers::ModeTransform;
use crate::mode::{OccupationPattern, PhotonicState, QubitLayout};

/// Largest matrix accepted by [`permanent`].
pub const MAX_PERMANENT_DIM: usize = 12;

/// Matrix permanent by Ryser's formula with Gray-code subset updates.
pub fn permanent(a: &Array2<Complex64>) -> Result<Complex64> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(QfoError::NotSquare { rows, cols });
    }
    let n = rows;
    if n > MAX_PERMANENT_DIM {
        return Err(QfoError::PermanentTooLarge(n));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    // per(A) = (-1)^n Σ_{S ≠ ∅} (-1)^{|S|} Π_i Σ_{j∈S} a_ij
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray = 0usize;
    for k in 1..(1usize << n) {
        let next = k ^ (k >> 1);
        let flipped = (gray ^ next).trailing_zeros() as usize;
        let sign = if next & (1 << flipped) != 0 {
            1.0
        } else {
            -1.0
        };
        for (i, s) in row_sums.iter_mut().enumerate() {
            *s += a[[i, flipped]] * sign;
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        total = -total;
    }
    Ok(total)
}

/// `⟨out| U_T |in⟩` for occupation patterns of equal photon number.
pub fn transition_amplitude(
    input: &OccupationPattern,
    output: &OccupationPattern,
    t: &ModeTransform,
) -> Result<Complex64> {
    let m = t.dim();
    for p in [input, output] {
        if p.modes() != m {
            return Err(QfoError::DimensionMismatch {
                expected: m,
                got: p.modes(),
            });
        }
    }
    let (ni, no) = (input.photon_number(), output.photon_number());
    if ni != no {
        return Err(QfoError::PhotonNumberMismatch {
            expected: ni,
            got: no,
        });
    }
    let rows = input.indices();
    let cols = output.indices();
    let sub = Array2::from_shape_fn((ni, ni), |(i, j)| t.get(rows[i], cols[j]));
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(permanent(&sub)? / norm)
}

/// Push a state through `t` by substituting `a†_n → Σ_l T[n][l] a†_l` and
/// re-expanding the product of creation operators.
pub fn evolve(state: &PhotonicState, t: &ModeTransform) -> Result<PhotonicState> {
    let m = t.dim();
    if state.modes() != m {
        return Err(QfoError::DimensionMismatch {
            expected: m,
            got: state.modes(),
        });
    }
    let mut out: BTreeMap<OccupationPattern, Complex64> = BTreeMap::new();
    for (pattern, &amp) in state.terms() {
        let inputs = pattern.indices();
        // monomials keyed by the sorted list of output modes
        let mut poly: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        poly.insert(Vec::new(), amp / pattern.factorial_product().sqrt());
        for &n in &inputs {
            let mut next: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
            for (modes, coeff) in &poly {
                for l in 0..m {
                    let w = t.get(n, l);
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut key = modes.clone();
                    let pos = key.partition_point(|&x| x <= l);
                    key.insert(pos, l);
                    *next.entry(key).or_default() += coeff * w;
                }
            }
            poly = next;
        }
        for (modes, coeff) in poly {
            let p = OccupationPattern::from_indices(m, &modes);
            let norm = p.factorial_product().sqrt();
            *out.entry(p).or_default() += coeff * norm;
        }
    }
    Ok(PhotonicState::from_map(m, state.photon_number(), out))
}

/// Keeps outcomes with exactly one photon in each of two mode pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceProjector {
    pub control_pair: (usize, usize),
    pub target_pair: (usize, usize),
}

impl CoincidenceProjector {
    pub fn new(control_pair: (usize, usize), target_pair: (usize, usize)) -> Result<Self> {
        let all = [control_pair.0, control_pair.1, target_pair.0, target_pair.1];
        for i in 0..4 {
            for j in i + 1..4 {
                if all[i] == all[j] {
                    return Err(QfoError::OverlappingPairs);
                }
            }
        }
        Ok(Self {
            control_pair,
            target_pair,
        })
    }

    /// Projector on the dual-rail pairs of qubits `control` and `target`.
    pub fn for_qubits(layout: &QubitLayout, control: i64, target: i64) -> Result<Self> {
        Self::new(layout.mode_indices(control)?, layout.mode_indices(target)?)
    }

    pub fn accepts(&self, pattern: &OccupationPattern) -> bool {
        let c = pattern.counts();
        c[self.control_pair.0] + c[self.control_pair.1] == 1
            && c[self.target_pair.0] + c[self.target_pair.1] == 1
    }
}

/// Sub-normalized projection; `norm²` of the result is the success
/// probability for this input.
pub fn coincidence_project(
    state: &PhotonicState,
    proj: &CoincidenceProjector,
) -> Result<PhotonicState> {
    if state.photon_number() != 2 {
        return Err(QfoError::PhotonNumberMismatch {
            expected: 2,
            got: state.photon_number(),
        });
    }
    let kept: BTreeMap<_, _> = state
        .terms()
        .filter(|(p, _)| proj.accepts(p))
        .map(|(p, a)| (p.clone(), *a))
        .collect();
    Ok(PhotonicState::from_map(state.modes(), 2, kept))
}

/// Truncated gate matrix acting on qubit amplitude column vectors.
///
/// Basis order is `⇑, ⇓` for one qubit and `⇑⇑, ⇑⇓, ⇓⇑, ⇓⇓` for two.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOperator {
    pub matrix: Array2<Complex64>,
}

impl GateOperator {
    pub fn new(matrix: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(QfoError::NotSquare { rows, cols });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis_labels(&self) -> Vec<String> {
        match self.dim() {
            2 => vec!["up".into(), "down".into()],
            4 => ["up,up", "up,down", "down,up", "down,down"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            d => (0..d).map(|i| i.to_string()).collect(),
        }
    }

    /// `O · v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct PolarEntry {
    mag: f64,
    phase: f64,
}

#[derive(Serialize, Deserialize)]
struct GateOperatorJson {
    dim: usize,
    basis: Vec<String>,
    entries: Vec<Vec<PolarEntry>>,
}

impl Serialize for GateOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GateOperatorJson {
            dim: self.dim(),
            basis: self.basis_labels(),
            entries: self
                .matrix
                .rows()
                .into_iter()
                .map(|row| {
                    row.iter()
                        .map(|z| PolarEntry {
                            mag: z.norm(),
                            phase: z.arg(),
                        })
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GateOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = GateOperatorJson::deserialize(d)?;
        if raw.entries.len() != raw.dim || raw.entries.iter().any(|r| r.len() != raw.dim) {
            return Err(D::Error::custom("gate operator entries do not match dim"));
        }
        let matrix = Array2::from_shape_fn((raw.dim, raw.dim), |(i, j)| {
            let e = &raw.entries[i][j];
            Complex64::from_polar(e.mag, e.phase)
        });
        Ok(GateOperator { matrix })
    }
}

/// 2×2 block of `t` on qubit `b`; entry `(out, in)` is `T[in][out]`.
pub fn extract_single_qubit_operator(
    t: &ModeTransform,
    layout: &QubitLayout,
    b: i64,
) -> Result<GateOperator> {
    let (down, up) = layout.mode_indices(b)?;
    if down.max(up) >= t.dim() {
        return Err(QfoError::DimensionMismatch {
            expected: layout.window.modes,
            got: t.dim(),
        });
    }
    let basis = [up, down];
    GateOperator::new(Array2::from_shape_fn((2, 2), |(o, i)| {
        t.get(basis[i], basis[o])
    }))
}

/// Coincidence-basis 4×4 operator for control `b` and target `b2`.
///
/// Entry `(out, in)` for input photons at `(n, m)` and output photons at
/// `(i, j)` is `T[n][i]·T[m][j] + T[n][j]·T[m][i]`.
pub fn extract_two_qubit_operator(
    t: &ModeTransform,
    layout: &QubitLayout,
    control: i64,
    target: i64,
) -> Result<GateOperator> {
    if control == target {
        return Err(QfoError::OverlappingPairs);
    }
    let (cd, cu) = layout.mode_indices(control)?;
    let (td, tu) = layout.mode_indices(target)?;
    if [cd, cu, td, tu].iter().any(|&i| i >= t.dim()) {
        return Err(QfoError::DimensionMismatch {
            expected: layout.window.modes,
            got: t.dim(),
        });
    }
    let basis = [(cu, tu), (cu, td), (cd, tu), (cd, td)];
    GateOperator::new(Array2::from_shape_fn((4, 4), |(o, i)| {
        let (n, m) = basis[i];
        let (a, b) = basis[o];
        t.get(n, a) * t.get(m, b) + t.get(n, b) * t.get(m, a)
    }))
}

/// `ρ[l][l'] = ⟨a†_{l'} a_l⟩`.
pub fn reduced_one_photon_density(state: &PhotonicState) -> Result<Array2<Complex64>> {
    if state.photon_number() == 0 {
        return Err(QfoError::Vacuum);
    }
    let m = state.modes();
    let mut rho = Array2::zeros((m, m));
    for (p, &amp) in state.terms() {
        let counts = p.counts();
        for l in 0..m {
            if counts[l] == 0 {
                continue;
            }
            let lowered = (counts[l] as f64).sqrt();
            for lp in 0..m {
                let mut q = counts.to_vec();
                q[l] -= 1;
                q[lp] += 1;
                let raised = (q[lp] as f64).sqrt();
                let other = state.amplitude(&OccupationPattern(q));
                if other.norm_sqr() == 0.0 {
                    continue;
                }
                rho[[l, lp]] += other.conj() * amp * lowered * raised;
            }
        }
    }
    Ok(rho)
}
