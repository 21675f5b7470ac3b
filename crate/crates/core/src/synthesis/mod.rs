//! Two-stage phase-profile synthesis of target gates on an 8f processor.
//!
//! The free variables are the pupil harmonics `S_n, C_n` (one shared pupil
//! by default, or two) and the `M` lattice-modulator phases. Stage one
//! maximizes the fidelity from a random start. Stage two raises the success
//! probability by maximizing `F + μS - λ Σ max(0, F_floor - F_b)²` for each
//! `μ` in the schedule, continuing from the previous optimum. Restarts run
//! in parallel; each is seeded from `(seed, restart index)` and is
//! deterministic on its own.

pub mod optimize;

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QfoError, Result};
use crate::evolution::{extract_single_qubit_operator, extract_two_qubit_operator, GateOperator};
use crate::layers::{
    compose_8f, layered_stack, DiagonalPhases, Layer, ModeTransform, PupilProfile,
};
use crate::metrics::{self, GateScore};
use crate::mode::{ModeWindow, QubitLayout};

use optimize::{bfgs, nelder_mead};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedGate {
    Identity,
    Hadamard,
    PauliX,
    Cnot,
    Cz,
}

/// A target gate: a named gate or an explicit matrix of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateSpec {
    Named(NamedGate),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl GateSpec {
    pub fn matrix(&self) -> Result<Array2<Complex64>> {
        match self {
            GateSpec::Named(g) => Ok(match g {
                NamedGate::Identity => Array2::eye(2),
                NamedGate::Hadamard => metrics::hadamard(),
                NamedGate::PauliX => metrics::pauli_x(),
                NamedGate::Cnot => metrics::cnot(),
                NamedGate::Cz => metrics::cz(),
            }),
            GateSpec::Matrix(rows) => {
                let d = rows.len();
                if d == 0 || rows.iter().any(|r| r.len() != d) {
                    return Err(QfoError::InvalidProblem(
                        "gate matrix must be square".into(),
                    ));
                }
                Ok(Array2::from_shape_fn((d, d), |(i, j)| {
                    Complex64::new(rows[i][j][0], rows[i][j][1])
                }))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateTarget {
    /// The same single-qubit gate applied in parallel on every listed qubit.
    SingleQubit { gate: GateSpec, qubits: Vec<i64> },
    /// A post-selected two-qubit gate in the coincidence basis.
    TwoQubit {
        gate: GateSpec,
        control: i64,
        target: i64,
    },
}

impl GateTarget {
    pub fn qubits(&self) -> Vec<i64> {
        match self {
            GateTarget::SingleQubit { qubits, .. } => qubits.clone(),
            GateTarget::TwoQubit {
                control, target, ..
            } => vec![*control, *target],
        }
    }

    fn gate(&self) -> &GateSpec {
        match self {
            GateTarget::SingleQubit { gate, .. } | GateTarget::TwoQubit { gate, .. } => gate,
        }
    }

    fn dim(&self) -> usize {
        match self {
            GateTarget::SingleQubit { .. } => 2,
            GateTarget::TwoQubit { .. } => 4,
        }
    }
}

fn default_modes() -> usize {
    16
}
fn default_harmonics() -> usize {
    7
}
fn default_true() -> bool {
    true
}
fn default_mu() -> Vec<f64> {
    vec![0.1, 0.3, 1.0]
}
fn default_restarts() -> usize {
    16
}
fn default_floor() -> f64 {
    0.9999
}
fn default_tolerance() -> f64 {
    1e-10
}
fn default_penalty() -> f64 {
    1e3
}
fn default_simplex_evals() -> usize {
    4000
}
fn default_polish_iters() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisProblem {
    pub target: GateTarget,
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Internal index of label 0; defaults to `modes / 2`.
    #[serde(default)]
    pub offset: Option<i64>,
    #[serde(rename = "R", default = "default_harmonics")]
    pub harmonics: usize,
    #[serde(default = "default_true")]
    pub share_pupils: bool,
    #[serde(default = "default_mu")]
    pub mu_schedule: Vec<f64>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Stage-one fidelity floor, also the constraint level in stage two.
    #[serde(default = "default_floor")]
    pub fidelity_floor: f64,
    /// Stage-two convergence tolerance.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Weight `λ` of the fidelity-deficit penalty.
    #[serde(default = "default_penalty")]
    pub penalty: f64,
    /// Return each stage-two optimum to the unit-fidelity manifold by a
    /// fidelity-only polish.
    #[serde(default = "default_true")]
    pub retract: bool,
    #[serde(default = "default_simplex_evals")]
    pub simplex_evals: usize,
    #[serde(default = "default_polish_iters")]
    pub polish_iters: usize,
}

impl SynthesisProblem {
    pub fn new(target: GateTarget) -> Self {
        Self {
            target,
            modes: default_modes(),
            offset: None,
            harmonics: default_harmonics(),
            share_pupils: true,
            mu_schedule: default_mu(),
            restarts: default_restarts(),
            seed: 0,
            fidelity_floor: default_floor(),
            tolerance: default_tolerance(),
            penalty: default_penalty(),
            retract: true,
            simplex_evals: default_simplex_evals(),
            polish_iters: default_polish_iters(),
        }
    }

    pub fn window(&self) -> Result<ModeWindow> {
        match self.offset {
            Some(o) => ModeWindow::with_offset(self.modes, o),
            None => ModeWindow::new(self.modes),
        }
    }

    pub fn layout(&self) -> Result<QubitLayout> {
        QubitLayout::new(self.window()?, &self.target.qubits())
    }

    pub fn validate(&self) -> Result<()> {
        if self.harmonics < 1 {
            return Err(QfoError::InvalidProblem("R must be at least 1".into()));
        }
        if self.modes < 2 * self.harmonics + 1 {
            return Err(QfoError::BelowNyquist {
                modes: self.modes,
                harmonics: self.harmonics,
                needed: 2 * self.harmonics + 1,
            });
        }
        if self.restarts == 0 {
            return Err(QfoError::InvalidProblem("restarts must be positive".into()));
        }
        let g = self.target.gate().matrix()?;
        if g.nrows() != self.target.dim() {
            return Err(QfoError::InvalidProblem(format!(
                "gate is {}x{} but the target kind needs {}x{}",
                g.nrows(),
                g.nrows(),
                self.target.dim(),
                self.target.dim()
            )));
        }
        if let GateTarget::SingleQubit { qubits, .. } = &self.target {
            if qubits.is_empty() {
                return Err(QfoError::InvalidProblem("no qubits listed".into()));
            }
        }
        if let GateTarget::TwoQubit {
            control, target, ..
        } = &self.target
        {
            if control == target {
                return Err(QfoError::OverlappingPairs);
            }
        }
        self.layout()?;
        Ok(())
    }

    pub fn param_len(&self) -> usize {
        let pupils = if self.share_pupils { 1 } else { 2 };
        pupils * 2 * self.harmonics + self.modes
    }

    /// Split a flat parameter vector into layer profiles.
    pub fn decode(&self, params: &[f64]) -> Result<Profiles> {
        if params.len() != self.param_len() {
            return Err(QfoError::ParameterLength {
                expected: self.param_len(),
                got: params.len(),
            });
        }
        let r = self.harmonics;
        let pupil_at = |start: usize| PupilProfile {
            harmonics: r,
            sin_coeffs: params[start..start + r].to_vec(),
            cos_coeffs: params[start + r..start + 2 * r].to_vec(),
            kappa_x: 0.0,
        };
        let pupil = pupil_at(0);
        let (second_pupil, diag_start) = if self.share_pupils {
            (None, 2 * r)
        } else {
            (Some(pupil_at(2 * r)), 4 * r)
        };
        Ok(Profiles {
            pupil,
            modulator: DiagonalPhases::new(params[diag_start..].to_vec()),
            second_pupil,
        })
    }

    pub fn encode(&self, profiles: &Profiles) -> Result<Vec<f64>> {
        let mut v = Vec::with_capacity(self.param_len());
        v.extend(&profiles.pupil.sin_coeffs);
        v.extend(&profiles.pupil.cos_coeffs);
        if !self.share_pupils {
            let p2 = profiles.second_pupil.as_ref().unwrap_or(&profiles.pupil);
            v.extend(&p2.sin_coeffs);
            v.extend(&p2.cos_coeffs);
        }
        v.extend(&profiles.modulator.phi);
        if v.len() != self.param_len() {
            return Err(QfoError::ParameterLength {
                expected: self.param_len(),
                got: v.len(),
            });
        }
        Ok(v)
    }
}

/// Phase profiles of an 8f processor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub pupil: PupilProfile,
    pub modulator: DiagonalPhases,
    /// Second pupil when it differs from the first.
    #[serde(default)]
    pub second_pupil: Option<PupilProfile>,
}

impl Profiles {
    pub fn transform(&self, modes: usize) -> Result<ModeTransform> {
        let second = self.second_pupil.as_ref().unwrap_or(&self.pupil);
        compose_8f(&self.pupil, &self.modulator, second, modes)
    }
}

/// Extracted operators and scores of one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Mean fidelity over the gates.
    pub fidelity: f64,
    /// Mean success probability over the gates.
    pub success: f64,
    pub min_fidelity: f64,
    pub gates: Vec<GateEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateEntry {
    pub qubits: Vec<i64>,
    pub operator: GateOperator,
    pub score: GateScore,
}

fn safe_score(op: &GateOperator, target: &Array2<Complex64>) -> Result<GateScore> {
    let success = metrics::success_probability(op)?;
    let fidelity = match metrics::fidelity(op, target) {
        Ok(f) => f,
        Err(QfoError::ZeroOperator) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(GateScore {
        fidelity,
        success,
        d: op.dim(),
    })
}

/// Score a mode transform against the problem's target.
pub fn evaluate_transform(problem: &SynthesisProblem, t: &ModeTransform) -> Result<Evaluation> {
    let layout = problem.layout()?;
    let target = problem.target.gate().matrix()?;
    let gates = match &problem.target {
        GateTarget::SingleQubit { qubits, .. } => qubits
            .iter()
            .map(|&b| {
                let operator = extract_single_qubit_operator(t, &layout, b)?;
                let score = safe_score(&operator, &target)?;
                Ok(GateEntry {
                    qubits: vec![b],
                    operator,
                    score,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        GateTarget::TwoQubit {
            control,
            target: tq,
            ..
        } => {
            let operator = extract_two_qubit_operator(t, &layout, *control, *tq)?;
            let score = safe_score(&operator, &target)?;
            vec![GateEntry {
                qubits: vec![*control, *tq],
                operator,
                score,
            }]
        }
    };
    let n = gates.len() as f64;
    Ok(Evaluation {
        fidelity: gates.iter().map(|g| g.score.fidelity).sum::<f64>() / n,
        success: gates.iter().map(|g| g.score.success).sum::<f64>() / n,
        min_fidelity: gates
            .iter()
            .map(|g| g.score.fidelity)
            .fold(f64::INFINITY, f64::min),
        gates,
    })
}

/// Decode `params`, compose the 8f transform and score it.
pub fn objective(params: &[f64], problem: &SynthesisProblem) -> Result<Evaluation> {
    let profiles = problem.decode(params)?;
    let t = profiles.transform(problem.modes)?;
    evaluate_transform(problem, &t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisStatus {
    Success,
    /// No restart reached the fidelity floor; the report holds the best point found.
    Stage1Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartStats {
    pub index: usize,
    pub stage1_fidelity: f64,
    pub fidelity: f64,
    pub success: f64,
    pub feasible: bool,
    /// Penalty weight of the selected stage-two point, if any.
    pub mu: Option<f64>,
    pub evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub status: SynthesisStatus,
    pub score: GateScore,
    pub min_fidelity: f64,
    pub gates: Vec<GateEntry>,
    pub profiles: Profiles,
    pub params: Vec<f64>,
    pub problem: SynthesisProblem,
    pub restarts: Vec<RestartStats>,
    pub best_restart: Option<usize>,
}

impl GateReport {
    fn from_evaluation(
        problem: &SynthesisProblem,
        params: Vec<f64>,
        eval: Evaluation,
        status: SynthesisStatus,
    ) -> Result<Self> {
        let d = problem.target.dim();
        Ok(Self {
            status,
            score: GateScore {
                fidelity: eval.fidelity,
                success: eval.success,
                d,
            },
            min_fidelity: eval.min_fidelity,
            gates: eval.gates,
            profiles: problem.decode(&params)?,
            params,
            problem: problem.clone(),
            restarts: Vec::new(),
            best_restart: None,
        })
    }

    /// Recompose the stack from the stored profiles and score it again.
    pub fn recompute(&self) -> Result<Evaluation> {
        evaluate_transform(&self.problem, &self.profiles.transform(self.problem.modes)?)
    }
}

/// Score persisted profiles without optimizing.
pub fn evaluate(problem: &SynthesisProblem, profiles: &Profiles) -> Result<GateReport> {
    problem.validate()?;
    let params = problem.encode(profiles)?;
    let eval = objective(&params, problem)?;
    let status = if eval.min_fidelity >= problem.fidelity_floor {
        SynthesisStatus::Success
    } else {
        SynthesisStatus::Stage1Failure
    };
    let mut report = GateReport::from_evaluation(problem, params, eval, status)?;
    report.profiles = profiles.clone();
    Ok(report)
}

struct Candidate {
    params: Vec<f64>,
    eval: Evaluation,
    feasible: bool,
    mu: Option<f64>,
}

impl Candidate {
    /// Feasible beats infeasible; then higher success; then higher fidelity.
    fn better_than(&self, other: &Candidate) -> bool {
        if self.feasible != other.feasible {
            return self.feasible;
        }
        if self.feasible {
            if self.eval.success != other.eval.success {
                return self.eval.success > other.eval.success;
            }
            return self.eval.min_fidelity > other.eval.min_fidelity;
        }
        self.eval.min_fidelity > other.eval.min_fidelity
    }
}

const MAX_PENALTY_GROWTH: usize = 6;

fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_restart(problem: &SynthesisProblem, index: usize) -> (Candidate, RestartStats) {
    let mut rng = restart_rng(problem.seed, index);
    let x0: Vec<f64> = (0..problem.param_len())
        .map(|_| rng.random_range(-PI..PI))
        .collect();
    let eval = |x: &[f64]| objective(x, problem).ok();
    let floor = problem.fidelity_floor;
    let tol = problem.tolerance;
    let mut evals = 0;

    let stage1 = |x: &[f64]| eval(x).map_or(1.0, |e| 1.0 - e.fidelity);
    let m = nelder_mead(&stage1, &x0, 0.5, problem.simplex_evals, tol);
    evals += m.evals;
    let m = bfgs(&stage1, &m.x, problem.polish_iters, tol);
    evals += m.evals;
    let e1 = eval(&m.x).expect("decoded parameters evaluate");
    let stage1_fidelity = e1.min_fidelity;

    let mut best = Candidate {
        feasible: e1.min_fidelity >= floor,
        params: m.x,
        eval: e1,
        mu: None,
    };
    if best.feasible {
        let mut x = best.params.clone();
        for &mu in &problem.mu_schedule {
            let stage2 = |lambda: f64| {
                move |x: &[f64]| {
                    eval(x).map_or(f64::INFINITY, |e| {
                        let deficit: f64 = e
                            .gates
                            .iter()
                            .map(|g| (floor - g.score.fidelity).max(0.0).powi(2))
                            .sum();
                        -(e.fidelity + mu * e.success) + lambda * deficit
                    })
                }
            };
            let mut lambda = problem.penalty;
            let m = nelder_mead(&stage2(lambda), &x, 0.05, problem.simplex_evals / 4, tol);
            evals += m.evals;
            let mut m = bfgs(&stage2(lambda), &m.x, problem.polish_iters, tol);
            evals += m.evals;
            let mut e = eval(&m.x).expect("decoded parameters evaluate");
            // tighten the penalty until the deficit clears the floor
            for _ in 0..MAX_PENALTY_GROWTH {
                if e.min_fidelity >= floor {
                    break;
                }
                lambda *= 10.0;
                m = bfgs(&stage2(lambda), &m.x, problem.polish_iters, tol);
                evals += m.evals;
                e = eval(&m.x).expect("decoded parameters evaluate");
            }
            if problem.retract && e.min_fidelity >= floor {
                let r = bfgs(&stage1, &m.x, problem.polish_iters, tol);
                evals += r.evals;
                m = r;
                e = eval(&m.x).expect("decoded parameters evaluate");
            }
            let cand = Candidate {
                feasible: e.min_fidelity >= floor,
                params: m.x,
                eval: e,
                mu: Some(mu),
            };
            if cand.feasible {
                x = cand.params.clone();
            }
            if cand.better_than(&best) {
                best = cand;
            }
        }
    }
    let stats = RestartStats {
        index,
        stage1_fidelity,
        fidelity: best.eval.min_fidelity,
        success: best.eval.success,
        feasible: best.feasible,
        mu: best.mu,
        evals,
    };
    (best, stats)
}

/// Run the two-stage optimization over all restarts and keep the best.
///
/// A problem whose restarts all miss the fidelity floor still yields a
/// report, with status [`SynthesisStatus::Stage1Failure`].
pub fn synthesize(problem: &SynthesisProblem) -> Result<GateReport> {
    problem.validate()?;
    let runs: Vec<(Candidate, RestartStats)> = (0..problem.restarts)
        .into_par_iter()
        .map(|i| run_restart(problem, i))
        .collect();

    let mut best_index = 0;
    for (i, (cand, _)) in runs.iter().enumerate().skip(1) {
        if cand.better_than(&runs[best_index].0) {
            best_index = i;
        }
    }
    let mut stats = Vec::with_capacity(runs.len());
    let mut chosen = None;
    for (i, (cand, st)) in runs.into_iter().enumerate() {
        stats.push(st);
        if i == best_index {
            chosen = Some(cand);
        }
    }
    let best = chosen.expect("at least one restart");
    let status = if best.feasible {
        SynthesisStatus::Success
    } else {
        SynthesisStatus::Stage1Failure
    };
    let mut report = GateReport::from_evaluation(problem, best.params, best.eval, status)?;
    report.restarts = stats;
    report.best_restart = Some(best_index);
    Ok(report)
}

/// Result of fitting an alternating stack to a unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct StackFit {
    pub layers: Vec<Layer>,
    /// `min_θ ‖S - e^{iθ} U‖_F`.
    pub distance: f64,
}

/// Phase-insensitive Frobenius distance between two square matrices.
pub fn phase_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    (na + nb - 2.0 * overlap.norm()).max(0.0).sqrt()
}

/// Fit `depth` alternating layers (pupil first and last, so `depth` is odd)
/// to an `M×M` target by multi-start optimization of all phases.
pub fn fit_unitary(
    target: &Array2<Complex64>,
    depth: usize,
    harmonics: usize,
    restarts: usize,
    seed: u64,
) -> Result<StackFit> {
    let m = target.nrows();
    if depth.is_multiple_of(2) {
        return Err(QfoError::InvalidProblem("stack depth must be odd".into()));
    }
    if m < 2 * harmonics + 1 {
        return Err(QfoError::BelowNyquist {
            modes: m,
            harmonics,
            needed: 2 * harmonics + 1,
        });
    }
    let pupils = depth.div_ceil(2);
    let modulators = depth / 2;
    let n_params = pupils * 2 * harmonics + modulators * m;
    let decode = |x: &[f64]| -> Vec<Layer> {
        let mut layers = Vec::with_capacity(depth);
        let mut p = 0;
        for k in 0..depth {
            if k % 2 == 0 {
                layers.push(Layer::Pupil(PupilProfile {
                    harmonics,
                    sin_coeffs: x[p..p + harmonics].to_vec(),
                    cos_coeffs: x[p + harmonics..p + 2 * harmonics].to_vec(),
                    kappa_x: 0.0,
                }));
                p += 2 * harmonics;
            } else {
                layers.push(Layer::Modulator(DiagonalPhases::new(x[p..p + m].to_vec())));
                p += m;
            }
        }
        layers
    };
    let loss = |x: &[f64]| {
        layered_stack(&decode(x), m)
            .map(|s| phase_distance(s.matrix(), target).powi(2))
            .unwrap_or(f64::INFINITY)
    };
    let best = (0..restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = restart_rng(seed, i);
            let x0: Vec<f64> = (0..n_params).map(|_| rng.random_range(-PI..PI)).collect();
            let s = nelder_mead(&loss, &x0, 0.5, 2000, 1e-12);
            bfgs(&loss, &s.x, 500, 1e-10)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one restart");
    Ok(StackFit {
        layers: decode(&best.x),
        distance: best.value.max(0.0).sqrt(),
    })
}
