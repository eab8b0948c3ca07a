//! Partitioned unitary quantum cellular automata (PUQCA) on a periodic
//! chain of qubits, applied to the density classification task: decide
//! whether a binary ring configuration holds more 1s or more 0s by reading
//! a single site after `t` brick-wall update steps.
//!
//! The toolkit has four legs:
//!
//! * [`statevector`] — exact dense simulation of the two-layer brick-wall
//!   circuit, plus a Hamming-weight-sector fast path (the circuit conserves
//!   particle number, so nothing ever leaves the input's weight sector).
//! * [`dct`] — the classification task itself: majority labels, the
//!   guessing function, exact fitness over all non-half-density inputs,
//!   and the closed-form classical baseline.
//! * [`fermion`] — the classically simulable regime (gates with unit-
//!   determinant middle block), evolved through free-fermion momentum
//!   blocks in polynomial time and cross-validated against the dense path.
//! * [`ga`] — seeded evolutionary search over gate angles with roulette
//!   selection and Gaussian mutation.
//!
//! ```
//! use puqca::model::{Configuration, PUQCARule};
//! use puqca::statevector::{evolve, excitation_probability};
//!
//! let rule = PUQCARule::identity();
//! let b = Configuration::parse_bits("1000").unwrap();
//! let psi = evolve(&b, &rule, 3);
//! assert_eq!(excitation_probability(&psi, 0), 1.0);
//! ```

pub mod cli;
pub mod dct;
pub mod dicke;
pub mod fermion;
pub mod ga;
pub mod model;
pub mod statevector;
pub mod tables;
pub mod verify;

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice size must be even and at least 2, got {0}")]
    OddSize(usize),
    #[error("lattice size {0} exceeds the supported cap of {1}")]
    SizeCap(usize, usize),
    #[error("site index {0} out of range for {1} sites")]
    SiteRange(usize, usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("rule file: {0}")]
    RuleFile(String),
    #[error("not classically simulable: {0}")]
    NotSimulable(String),
    #[error("matrix is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("empty configuration set")]
    EmptySet,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Probabilities within this distance of 1/2 are treated as exact ties
/// when the guessing margin is zero.
pub const TIE_TOLERANCE: f64 = 1e-12;
