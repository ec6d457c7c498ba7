//! Deterministic quantization as a verifiable computation.
//!
//! Starting from autonomous first-order dynamics `q̇ = f(q)`, the crate builds
//! the doubled Hamiltonian system `H = Σ p_a f_a`, runs the Dirac–Bergmann
//! constraint analysis with an information-loss constraint, gauge-fixes,
//! reduces to the physical surface and emits the emergent Hamiltonian. Every
//! symbolic step is exact; numerical modules cross-check trajectories,
//! determinant identities, BRST invariance and spectra.

pub mod phasespace;
pub mod dirac;
pub(crate) mod linalg;
pub mod gauge;
pub mod catalog;
pub mod ghost;
pub mod dynamics;
pub mod spectra;
pub mod report;
pub mod suite;
