use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qfo_core::{
    make_qubit_state, product_state, DiagonalPhases, ModeWindow, PhotonicState, Profiles,
    PupilProfile, QubitLayout, SceneParams, SynthesisProblem,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Profile files of an 8f stack.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilePaths {
    pub pupil: PathBuf,
    pub diag: PathBuf,
    #[serde(default)]
    pub pupil2: Option<PathBuf>,
}

impl ProfilePaths {
    pub fn load(&self, base: &Path) -> Result<Profiles, CliError> {
        Ok(Profiles {
            pupil: read_json::<PupilProfile>(&resolve(base, &self.pupil))?,
            modulator: read_json::<DiagonalPhases>(&resolve(base, &self.diag))?,
            second_pupil: self
                .pupil2
                .as_ref()
                .map(|p| read_json::<PupilProfile>(&resolve(base, p)))
                .transpose()?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub problem: SynthesisProblem,
    pub pupil: PathBuf,
    pub diag: PathBuf,
    #[serde(default)]
    pub pupil2: Option<PathBuf>,
}

impl EvalConfig {
    pub fn profile_paths(&self) -> ProfilePaths {
        ProfilePaths {
            pupil: self.pupil.clone(),
            diag: self.diag.clone(),
            pupil2: self.pupil2.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StackConfig {
    EightF {
        pupil: PathBuf,
        diag: PathBuf,
        #[serde(default)]
        pupil2: Option<PathBuf>,
    },
    FourF {
        pupil: PathBuf,
    },
    FreeSpace {
        length: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedQubit {
    Plus,
    Minus,
    Up,
    Down,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QubitValue {
    Named(NamedQubit),
    Amplitudes { down: [f64; 2], up: [f64; 2] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitInput {
    pub b: i64,
    pub state: QubitValue,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub control: i64,
    pub target: i64,
}

fn default_modes() -> usize {
    16
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    #[serde(default)]
    pub optics: SceneParams,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub offset: Option<i64>,
    pub stack: StackConfig,
    pub qubits: Vec<QubitInput>,
    /// Post-select on one photon per listed qubit and render the projected
    /// output from the output plane.
    #[serde(default)]
    pub project: Option<ProjectConfig>,
    /// Free space after the output plane, metres.
    #[serde(default)]
    pub tail: Option<f64>,
    #[serde(default = "default_stride")]
    pub x_stride: usize,
}

impl PropagateConfig {
    pub fn window(&self) -> Result<ModeWindow, CliError> {
        Ok(match self.offset {
            Some(o) => ModeWindow::with_offset(self.modes, o)?,
            None => ModeWindow::new(self.modes)?,
        })
    }

    pub fn state(&self, window: &ModeWindow) -> Result<PhotonicState, CliError> {
        if self.qubits.is_empty() {
            return Err(CliError::Config("no input qubits".into()));
        }
        let bs: Vec<i64> = self.qubits.iter().map(|q| q.b).collect();
        let layout = QubitLayout::new(*window, &bs)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let factors = self
            .qubits
            .iter()
            .map(|q| {
                let (down, up) = match &q.state {
                    QubitValue::Named(NamedQubit::Plus) => ([s, 0.0], [s, 0.0]),
                    QubitValue::Named(NamedQubit::Minus) => ([-s, 0.0], [s, 0.0]),
                    QubitValue::Named(NamedQubit::Up) => ([0.0, 0.0], [1.0, 0.0]),
                    QubitValue::Named(NamedQubit::Down) => ([1.0, 0.0], [0.0, 0.0]),
                    QubitValue::Amplitudes { down, up } => (*down, *up),
                };
                make_qubit_state(
                    &layout,
                    q.b,
                    Complex64::new(down[0], down[1]),
                    Complex64::new(up[0], up[1]),
                )
            })
            .collect::<qfo_core::Result<Vec<_>>>()?;
        Ok(product_state(&factors)?)
    }
}
