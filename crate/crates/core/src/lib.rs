//! Estimation of linear functions `q = α·θ` of Hamiltonian parameters in
//! qubit sensor networks, including networks with unknown interactions.
//!
//! The pipeline:
//!
//! 1. [`pauli`]: bit-mask algebra for Z-strings and Pauli strings, and the
//!    stabilizer-average projection that reduces an interacting Hamiltonian
//!    to its diagonal part.
//! 2. [`l1`]: the linear program giving the optimal precision bound
//!    `||a||_1^2 / (4 t^2)` and the sparse optimal vector `a`, with a
//!    brute-force oracle and closed forms for independent and
//!    photon-number generators.
//! 3. [`protocol`]: compile `a` into a switching schedule between
//!    GHZ-like superpositions, predict the accumulated phase
//!    `φ = 2 t q / ||a||_1`, and decompose switches into controlled flips.
//! 4. [`dynamics`]: exact branch/dense simulators, the randomized
//!    Trotterization that implements the projection physically, and
//!    benchmarks for its bias and concentration.
//! 5. [`estimation`]: Monte Carlo estimation of `q` from simulated
//!    measurements, compared against the bound and the baseline protocols.

pub mod dynamics;
pub mod estimation;
pub mod l1;
pub mod linalg;
pub mod pauli;
pub mod protocol;
pub mod rng;
