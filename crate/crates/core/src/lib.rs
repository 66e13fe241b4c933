//! Steady-state thermodynamics of two two-level ensembles coupled to a hot
//! and a cold oscillator bath.
//!
//! The crate covers three routes to the same currents: closed-form spin
//! expectations on the Lindblad steady state ([`thermo`]), a
//! double-commutator evaluation with explicit ancillas ([`thermo::oracle`]),
//! and a discrete collision model ([`collision`]).

pub mod collision;
pub mod liouvillian;
pub mod model;
pub mod qmat;
pub mod thermo;

pub use model::config::ConfigError;
pub use model::{Bath, DissipationMode, EnsembleSpec, Interaction, RateTable, Scenario};
pub use qmat::{CMatrix, DensityMatrix, HilbertLayout};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("site {site} out of range for a layout with {len} factors")]
    SiteOutOfRange { site: usize, len: usize },
    #[error("matrix is not Hermitian (max |A - A^dag| = {0:e})")]
    NotHermitian(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("operation requires {expected} mode, scenario is {actual}")]
    WrongMode {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not converged: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
