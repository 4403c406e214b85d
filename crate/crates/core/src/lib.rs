//! Hybrid continuous-variable/qubit linear combination of Hamiltonian simulation.
//!
//! A non-unitary evolution `e^{−At}` with `A = L + iH` and `L ⪰ 0` is written
//! as an integral over unitaries `e^{−it(kL+H)}` weighted by a kernel `g(k)`.
//! The crate encodes that kernel in a squeezed oscillator, couples the
//! oscillator position to a qubit register, and recovers the evolved state
//! by postselecting on a more strongly squeezed vacuum.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coeffs;
pub mod dv_baseline;
pub mod error;
pub mod hybrid_sim;
pub mod kernel;
pub mod linalg;
pub mod metrics;
pub mod oscillator;
pub mod parallel;
pub mod pauli_heat;
pub mod quadrature;
pub mod special;
pub mod stateprep;
pub mod trotter_compile;

pub use error::{Error, Result};
pub use parallel::Exec;
