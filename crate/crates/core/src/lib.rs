//! Streaming randomness audit for bit streams harvested from quantum-annealer
//! readout cycles.
//!
//! The crate is organized bottom-up:
//!
//! - [`bitstream`]: packed bit sequences, spin-to-bit conversion, `.bits` files
//!   and spin CSV ingestion.
//! - [`annealer`]: Chimera hardware graph and a noisy annealer bit source, plus
//!   reference generators used for calibration.
//! - [`stats`]: special functions, GF(2) rank, Berlekamp-Massey and DFT moduli.
//! - [`nist`]: the fifteen SP 800-22 tests as bounded-memory passes.
//! - [`experiment`]: dataset registry, checkpointed runs and the result matrix.
//! - [`report`]: markdown, CSV and plain-text rendering of result matrices.
//! - [`cli`]: the `qrng-audit` command line.

pub mod annealer;
pub mod bitstream;
pub mod cli;
pub mod experiment;
mod fsutil;
pub mod nist;
pub mod report;
pub mod stats;

pub use annealer::{AnnealerConfig, ChimeraGraph, NoiseModel, ReferenceKind};
pub use bitstream::{AnnealSample, BitSequence, StreamMetadata};
pub use experiment::{DatasetRecord, ExperimentMatrix};
pub use nist::{SuiteConfig, TestKind, TestResult, Verdict};
pub use stats::PValue;
