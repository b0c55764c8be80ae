//! Certificate-game complexity for explicitly given Boolean functions.
//!
//! The crate computes game values for the zero-communication certificate game
//! (non-signaling, public-coin and private-coin variants), the classical
//! complexity measures they are sandwiched by (sensitivity, block sensitivity,
//! certificate complexity and its fractional/expectational relaxations,
//! spectral sensitivity, classical adversary), simulates the explicit
//! shared-randomness strategies that witness the upper bounds, and verifies
//! the hypergeometric concentration facts used in the Hamming-ball analysis.
//!
//! Everything is desk-scale: functions are stored as explicit (partial) truth
//! tables of arity at most 24, linear programs are solved by a dense simplex
//! with an exact-rational mode, and all randomized components are driven by
//! explicit seeds.

pub mod boolfn;
pub mod games;
pub mod hamming;
pub mod linprog;
pub mod measures;
pub mod report;
pub(crate) mod rng;
pub mod strategies;

pub use boolfn::BoolFn;
pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;

/// Library-level error type; modules with richer error surfaces define their
/// own and convert into this one.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    BoolFn(#[from] boolfn::BoolFnError),
    #[error(transparent)]
    Lp(#[from] linprog::LpError),
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
