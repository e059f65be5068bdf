//! Simulation and verification toolkit for six-photon symmetric Dicke-state
//! experiments.
//!
//! The crate models the full chain of such an experiment in one place:
//!
//! * exact dense linear algebra for up to eight polarization qubits
//!   ([`qcore`]): composition, projection, partial trace, fidelity and
//!   Schmidt spectra;
//! * named state constructors and their identities ([`states`]): Dicke, GHZ
//!   and W states and the one-parameter five-qubit projection family;
//! * collective spin operators, Mermin operators and a Dicke-tailored Bell
//!   operator with its classical and GHZ reference values ([`collective`]);
//! * entanglement witnesses, the see-saw biseparable-bound optimizer and the
//!   measurement-settings decomposition for fidelity estimation ([`witness`]);
//! * a bosonic model of the collinear type-II SPDC source, the beam-splitter
//!   distribution tree, photon loss and sixfold post-selection ([`photonics`]);
//! * local measurement settings, exact outcome distributions and Poissonian
//!   sampling of coincidence histograms ([`measure`]);
//! * the estimation pipeline from count histograms to correlations, moments,
//!   witness values, fidelities and Bell values with propagated or
//!   bootstrapped error bars ([`analysis`]);
//! * serializable run configurations, histogram documents and reports for the
//!   `dicke6` command-line binary ([`cli`]).
//!
//! All state vectors use the convention that qubit 0 is the most significant
//! bit of the basis index and that `|H>` is `|0>`.

use thiserror::Error;

pub mod analysis;
pub mod cli;
pub mod collective;
mod linalg;
pub mod measure;
pub mod photonics;
pub mod qcore;
pub mod states;
pub mod witness;

/// Largest register size supported by the dense representation.
pub const MAX_QUBITS: usize = 8;

/// Common absolute tolerance for exactness checks on states and operators.
pub const ATOL: f64 = 1e-10;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register of {qubits} qubits exceeds the supported maximum of {max}")]
    Capacity { qubits: usize, max: usize },
    #[error("dimension mismatch: {left}-qubit object combined with {right}-qubit object")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operator is not Hermitian (largest entry deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("projection outcome has probability {prob:.3e}; the post-measurement state is degenerate")]
    DegenerateOutcome { prob: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("optimizer did not converge within the restart budget (best value {best})")]
    NoConvergence { best: f64 },
    #[error("no settings decomposition within budget {budget}: best residual {residual:.3e}")]
    DecompositionBudget { budget: usize, residual: f64 },
    #[error("histogram contains no counts")]
    EmptyHistogram,
    #[error("missing measurement settings: {0}")]
    MissingSettings(String),
    #[error("zero probability: {0}")]
    ZeroProbability(String),
}

pub type Result<T> = std::result::Result<T, Error>;
