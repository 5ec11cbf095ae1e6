//! Gains, photon-number statistics and quantum noise figures of multi-mode
//! fiber parametric amplifiers described by linear input-output transfer
//! matrices, plus a truncated Fock-space oracle to check them against.

pub mod cli;
pub mod error;
pub mod fock;
pub mod mode_algebra;
pub mod models;
pub mod moments;
pub mod noise_figure;
pub mod numeric;

pub use error::{Error, Result};
pub use fock::{oracle_moments, prepare_coherent, FockConfig, FockState, OracleReport};
pub use mode_algebra::{
    validate_symplectic, InputState, Ladder, LadderSignature, PairKind, TransferMatrix, ValidationReport,
};
pub use models::{build_four_mode, build_two_mode, ModelId, NonlinearPhase};
pub use moments::{moments_general, moments_pia, Method, ModeMoments, MomentReport};
pub use noise_figure::{
    gain_pia, gain_psa, gain_psa_general, nf_from_moments, nf_pia, nf_psa_general, nf_psa_two_injected,
    NoiseEntry, NoiseReport, PhaseConfig, Regime,
};
