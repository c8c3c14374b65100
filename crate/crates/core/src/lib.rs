//! Decide which spatio-temporal symmetry pairs (H, K) of a finite cyclic (or
//! two-factor abelian) permutation action are realizable by generic Hopf
//! bifurcation, and demonstrate each admissible pair constructively: synthesize
//! an equivariant polynomial ODE, integrate it, and measure the symmetries of
//! the resulting periodic orbit.
//!
//! The static layers (`group`, `representation`, `admissibility`) work in exact
//! rational arithmetic; `vecfield` synthesizes exact rational vector fields;
//! `dynamics` integrates them in floating point and measures orbits.

pub mod admissibility;
pub mod cli;
pub mod dynamics;
pub mod group;
pub mod linalg;
pub mod representation;
pub mod vecfield;

use thiserror::Error;

/// Crate-wide error type. The CLI maps these onto process exit codes.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid group specification: {0}")]
    InvalidGroup(String),
    #[error("subgroups are not nested: {0}")]
    NotNested(String),
    #[error("{0} is not an isotropy subgroup")]
    NotIsotropy(String),
    #[error("matrix does not commute with the isotropy element {0}")]
    NonCommuting(String),
    #[error("interpolation nodes must be pairwise distinct")]
    DuplicateNodes,
    #[error("pair is not cyclic-Hopf admissible: {0}")]
    Inadmissible(String),
    #[error("no periodic orbit found: {0}")]
    NoOrbit(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
