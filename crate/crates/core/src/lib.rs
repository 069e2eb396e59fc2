//! Simulation and analysis of a qubit undergoing repeated Haar-random
//! collisions with a two-qubit environment.
//!
//! The crate is organised bottom-up:
//!
//! - [`qlinalg`]: small dense complex linear algebra (Kronecker products,
//!   partial traces, Jacobi eigensolvers, Wootters concurrence spectra).
//! - [`haar`]: seeded, splittable random streams and two independent
//!   Haar samplers on U(4) (Hurwitz rotations and Ginibre QR).
//! - [`engine`]: the three-qubit state, pair embeddings and trajectories.
//! - [`observables`]: purity, pairwise tangles, one-vs-rest tangles and the
//!   three-tangle of a pure three-qubit state.
//! - [`stats`]: time and ensemble averages, exponential fits, histograms and
//!   the random-state reference oracle.
//! - [`markov`]: the 64-state Pauli-weight Markov chain and its spectrum.
//!
//! Qubit 0 is the system and the most significant bit of every
//! computational-basis index; qubits 1 and 2 form the environment.

pub mod engine;
mod error;
pub mod haar;
pub mod markov;
pub mod observables;
pub mod qlinalg;
pub mod stats;

pub use engine::{CollisionPolicy, Pair, StateVector, Trajectory};
pub use error::{Error, Result};
pub use haar::{Sampler, Seed, Unitary4};
pub use observables::ObservableRecord;
pub use qlinalg::{CMatrix, Complex, HermSpectrum};
