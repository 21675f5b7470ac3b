//! Simulation and synthesis toolkit for multiport quantum Fourier-optical
//! processors.
//!
//! Periodic phase-only pupils in 4f relays act on a lattice of spatial
//! modes as circulant unitaries; lattice phase modulators act as diagonal
//! unitaries. Alternating stacks of the two are evolved on few-photon Fock
//! states ([`evolution`]), scored against target gates ([`metrics`]),
//! optimized to realize those gates ([`synthesis`]), and rendered as
//! continuous scalar fields ([`propagation`]).

pub mod error;
pub mod evolution;
pub mod layers;
pub mod metrics;
pub mod mode;
pub mod propagation;
pub mod synthesis;

pub use error::{QfoError, Result};
pub use evolution::{
    coincidence_project, evolve, extract_single_qubit_operator, extract_two_qubit_operator,
    permanent, reduced_one_photon_density, transition_amplitude, CoincidenceProjector,
    GateOperator,
};
pub use layers::{
    circulant_from_coeffs, circulant_from_pupil, circulant_from_samples, compose_8f,
    diagonal_transform, fourier_coeffs, layered_stack, sample_pupil, DiagonalPhases, Layer,
    ModeTransform, PupilProfile, TransformKind,
};
pub use metrics::{fidelity, success_probability, GateScore};
pub use mode::{
    make_qubit_state, mode_intensities, product_state, ModeWindow, OccupationPattern,
    PhotonicState, QubitLayout,
};
pub use propagation::{
    angular_spectrum_step, propagate_density, propagate_scene, thin_lens, Element, Grid,
    IntensityMap, PropagationScene, SceneParams, Source,
};
pub use synthesis::{
    evaluate, fit_unitary, objective, synthesize, GateReport, GateSpec, GateTarget, NamedGate,
    Profiles, SynthesisProblem, SynthesisStatus,
};
