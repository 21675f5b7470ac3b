//! Lattice-mode index space, dual-rail qubit layout and few-photon Fock
//! states.
//!
//! Modes carry two names. The *label* is the signed lattice-site number
//! (…, -2, -1, 0, 1, 2, …) and the *index* is the position `0..M` used for
//! all matrix work. They are related by `label = index - offset`. Mode
//! arithmetic is cyclic modulo `M`, so with the default `offset = M / 2`
//! the image inversion of a flat 4f system maps label `l` to label `-l`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QfoError, Result};

/// Default cap on the total photon number of a state.
pub const DEFAULT_MAX_PHOTONS: usize = 3;

/// Amplitudes with modulus below this are dropped from state maps.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

const NORMALIZATION_TOL: f64 = 1e-9;

fn default_max_photons() -> usize {
    DEFAULT_MAX_PHOTONS
}

/// A window of `modes` consecutive lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeWindow {
    pub modes: usize,
    pub offset: i64,
    #[serde(default = "default_max_photons")]
    pub max_photons: usize,
}

impl ModeWindow {
    /// Window of `modes` sites centred on label 0 (`offset = modes / 2`).
    pub fn new(modes: usize) -> Result<Self> {
        Self::with_offset(modes, (modes / 2) as i64)
    }

    pub fn with_offset(modes: usize, offset: i64) -> Result<Self> {
        if modes < 2 {
            return Err(QfoError::WindowTooSmall(modes));
        }
        Ok(Self {
            modes,
            offset,
            max_photons: DEFAULT_MAX_PHOTONS,
        })
    }

    pub fn with_max_photons(mut self, max_photons: usize) -> Self {
        self.max_photons = max_photons;
        self
    }

    /// Internal index of a lattice label; errors if the label is outside the window.
    pub fn index(&self, label: i64) -> Result<usize> {
        let idx = label + self.offset;
        if idx < 0 || idx >= self.modes as i64 {
            return Err(QfoError::ModeOutOfWindow {
                label,
                modes: self.modes,
            });
        }
        Ok(idx as usize)
    }

    pub fn label(&self, index: usize) -> i64 {
        index as i64 - self.offset
    }

    /// Cyclic index of any label (mode arithmetic on Z_M).
    pub fn wrap(&self, label: i64) -> usize {
        (label + self.offset).rem_euclid(self.modes as i64) as usize
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.modes).map(|i| self.label(i))
    }
}

/// Photon counts per internal mode index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationPattern(pub Vec<u32>);

impl OccupationPattern {
    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    /// Pattern with one photon in each listed index (repeats stack).
    pub fn from_indices(modes: usize, indices: &[usize]) -> Self {
        let mut counts = vec![0; modes];
        for &i in indices {
            counts[i] += 1;
        }
        Self(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn photon_number(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    /// Occupied indices with multiplicity, ascending.
    pub fn indices(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
            .collect()
    }

    /// Product of `n_l!` over modes.
    pub fn factorial_product(&self) -> f64 {
        self.0
            .iter()
            .map(|&c| (1..=c as u64).product::<u64>() as f64)
            .product()
    }
}

/// An `n`-photon pure state as a sparse map from occupation patterns to
/// amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicState {
    modes: usize,
    photon_number: usize,
    amplitudes: BTreeMap<OccupationPattern, Complex64>,
}

impl PhotonicState {
    /// Build from `(pattern, amplitude)` terms. Terms on the same pattern add
    /// up. No normalization is imposed, so projected (sub-normalized)
    /// states are representable.
    pub fn from_terms<I>(modes: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationPattern, Complex64)>,
    {
        let mut amplitudes: BTreeMap<OccupationPattern, Complex64> = BTreeMap::new();
        let mut photon_number = None;
        for (pattern, amp) in terms {
            if pattern.modes() != modes {
                return Err(QfoError::DimensionMismatch {
                    expected: modes,
                    got: pattern.modes(),
                });
            }
            let n = pattern.photon_number();
            match photon_number {
                None => photon_number = Some(n),
                Some(expected) if expected != n => {
                    return Err(QfoError::PhotonNumberMismatch { expected, got: n })
                }
                _ => {}
            }
            *amplitudes.entry(pattern).or_default() += amp;
        }
        amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        Ok(Self {
            modes,
            photon_number: photon_number.unwrap_or(0),
            amplitudes,
        })
    }

    pub(crate) fn from_map(
        modes: usize,
        photon_number: usize,
        mut amplitudes: BTreeMap<OccupationPattern, Complex64>,
    ) -> Self {
        amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        Self {
            modes,
            photon_number,
            amplitudes,
        }
    }

    /// Single photon with amplitude `coeffs[i]` in internal mode `i`.
    pub fn single_photon(coeffs: &[Complex64]) -> Self {
        let modes = coeffs.len();
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(i, &a)| (OccupationPattern::from_indices(modes, &[i]), a));
        Self::from_terms(modes, terms).expect("uniform single-photon terms")
    }

    /// Basis state with photons at the given lattice labels.
    pub fn basis(window: &ModeWindow, labels: &[i64]) -> Result<Self> {
        if labels.len() > window.max_photons {
            return Err(QfoError::PhotonCapExceeded {
                got: labels.len(),
                cap: window.max_photons,
            });
        }
        let idx = labels
            .iter()
            .map(|&l| window.index(l))
            .collect::<Result<Vec<_>>>()?;
        let pattern = OccupationPattern::from_indices(window.modes, &idx);
        Self::from_terms(window.modes, [(pattern, Complex64::new(1.0, 0.0))])
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photon_number(&self) -> usize {
        self.photon_number
    }

    pub fn amplitude(&self, pattern: &OccupationPattern) -> Complex64 {
        self.amplitudes.get(pattern).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationPattern, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Modes holding a photon in at least one term.
    pub fn support(&self) -> Vec<usize> {
        let mut occupied = vec![false; self.modes];
        for p in self.amplitudes.keys() {
            for (i, &c) in p.0.iter().enumerate() {
                occupied[i] |= c > 0;
            }
        }
        (0..self.modes).filter(|&i| occupied[i]).collect()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(p, &a)| (p.clone(), a * factor))
            .collect();
        Self::from_map(self.modes, self.photon_number, amplitudes)
    }

    /// `⟨ψ|φ⟩`.
    pub fn inner(&self, other: &PhotonicState) -> Complex64 {
        self.amplitudes
            .iter()
            .map(|(p, a)| a.conj() * other.amplitude(p))
            .sum()
    }
}

/// Qubits encoded dual-rail on neighbouring sites: qubit `b` occupies label
/// `2b` (down) and `2b + 1` (up).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub window: ModeWindow,
    pub qubits: Vec<i64>,
}

impl QubitLayout {
    pub fn new(window: ModeWindow, qubits: &[i64]) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &b in qubits {
            for label in [2 * b, 2 * b + 1] {
                window.index(label)?;
                if !seen.insert(label) {
                    return Err(QfoError::OverlappingQubits(label));
                }
            }
        }
        Ok(Self {
            window,
            qubits: qubits.to_vec(),
        })
    }

    pub fn contains(&self, b: i64) -> bool {
        self.qubits.contains(&b)
    }

    /// `(down, up)` labels of qubit `b`.
    pub fn mode_labels(&self, b: i64) -> Result<(i64, i64)> {
        if !self.contains(b) {
            return Err(QfoError::UnknownQubit(b));
        }
        Ok((2 * b, 2 * b + 1))
    }

    /// `(down, up)` internal indices of qubit `b`.
    pub fn mode_indices(&self, b: i64) -> Result<(usize, usize)> {
        let (d, u) = self.mode_labels(b)?;
        Ok((self.window.index(d)?, self.window.index(u)?))
    }
}

/// Single-photon qubit state `ξ_down |⇓⟩_b + ξ_up |⇑⟩_b`.
pub fn make_qubit_state(
    layout: &QubitLayout,
    b: i64,
    down: Complex64,
    up: Complex64,
) -> Result<PhotonicState> {
    let norm = down.norm_sqr() + up.norm_sqr();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(QfoError::NotNormalized(norm));
    }
    let (d, u) = layout.mode_indices(b)?;
    let m = layout.window.modes;
    PhotonicState::from_terms(
        m,
        [
            (OccupationPattern::from_indices(m, &[d]), down),
            (OccupationPattern::from_indices(m, &[u]), up),
        ],
    )
}

/// Tensor product of states living on pairwise-disjoint mode supports.
pub fn product_state(factors: &[PhotonicState]) -> Result<PhotonicState> {
    let Some(first) = factors.first() else {
        return Err(QfoError::Vacuum);
    };
    let modes = first.modes;
    let mut used = vec![false; modes];
    let mut total = 0;
    for f in factors {
        if f.modes != modes {
            return Err(QfoError::DimensionMismatch {
                expected: modes,
                got: f.modes,
            });
        }
        for i in f.support() {
            if used[i] {
                return Err(QfoError::OverlappingSupport(i));
            }
            used[i] = true;
        }
        total += f.photon_number;
    }
    if total > DEFAULT_MAX_PHOTONS {
        return Err(QfoError::PhotonCapExceeded {
            got: total,
            cap: DEFAULT_MAX_PHOTONS,
        });
    }

    let mut acc: BTreeMap<OccupationPattern, Complex64> = BTreeMap::new();
    acc.insert(OccupationPattern::vacuum(modes), Complex64::new(1.0, 0.0));
    for f in factors {
        let mut next = BTreeMap::new();
        for (p, a) in &acc {
            for (q, b) in f.terms() {
                let counts = p.0.iter().zip(&q.0).map(|(x, y)| x + y).collect();
                *next.entry(OccupationPattern(counts)).or_default() += a * b;
            }
        }
        acc = next;
    }
    Ok(PhotonicState::from_map(modes, total, acc))
}

/// Expected photon number `⟨n̂_l⟩` per internal mode.
pub fn mode_intensities(state: &PhotonicState) -> Vec<f64> {
    let mut out = vec![0.0; state.modes];
    for (p, a) in state.terms() {
        let w = a.norm_sqr();
        for (o, &c) in out.iter_mut().zip(&p.0) {
            *o += w * c as f64;
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    pattern: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    n: usize,
    terms: Vec<TermJson>,
}

impl Serialize for PhotonicState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson {
            n: self.photon_number,
            terms: self
                .amplitudes
                .iter()
                .map(|(p, a)| TermJson {
                    pattern: p.0.clone(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhotonicState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = StateJson::deserialize(d)?;
        let modes = raw
            .terms
            .first()
            .map(|t| t.pattern.len())
            .ok_or_else(|| D::Error::custom("state has no terms"))?;
        let state = PhotonicState::from_terms(
            modes,
            raw.terms
                .into_iter()
                .map(|t| (OccupationPattern(t.pattern), Complex64::new(t.re, t.im))),
        )
        .map_err(D::Error::custom)?;
        if state.photon_number != raw.n {
            return Err(D::Error::custom(format!(
                "declared n = {} but patterns hold {} photons",
                raw.n, state.photon_number
            )));
        }
        Ok(state)
    }
}
