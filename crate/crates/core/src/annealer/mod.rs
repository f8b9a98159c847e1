//! Chimera hardware graph and a phenomenological noisy-annealer bit source.
//!
//! Every job samples the all-zero Ising problem, so an ideal device would
//! return independent fair coins. The model adds one switchable knob per
//! named noise source: static qubit bias, spin-bath temporal correlation,
//! coupler cross-talk and slow sinusoidal drift.

mod chimera;
mod model;
mod reference;
mod sampler;

use thiserror::Error;

pub use chimera::{ChimeraGraph, DEVICE_GRID_SIZE, DEVICE_INACTIVE_QUBITS, DEVICE_SHORE_SIZE};
pub use model::{
    apply_postprocess_model, config_digest, effective_noise, AnnealerConfig, GraphSpec, InactiveQubits, NoiseModel,
    QubitBias, SimulatorSpec, CANONICAL_ANNEAL_TIMES_US, DEFAULT_POSTPROCESS_ATTENUATION,
};
pub use reference::{reference_by_name, reference_generator, ReferenceKind};
pub use sampler::{generate_stream, sample_anneal};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("active mask has {found} entries, graph has {expected} qubits")]
    MaskLength { expected: usize, found: usize },
    #[error("previous sample has {found} spins, graph has {expected} active qubits")]
    PrevLength { expected: usize, found: usize },
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
    #[error("unknown reference generator {0:?}")]
    UnknownKind(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
