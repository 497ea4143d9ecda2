//! Deterministic simulator of a blockchain stored in a temporal GHZ state.
//!
//! Classical two-bit records are encoded as temporal Bell pairs, fused one at a
//! time into a growing GHZ chain, and decoded by a GHZ-basis projection. Photons
//! of the chain are created and absorbed on a discrete timeline, so only the
//! newest photon is ever reachable by an attacker. New blocks are admitted by a
//! θ-protocol round over a simulated network, and a SHA-256 hash chain serves as
//! the classical point of comparison.
//!
//! Every random choice flows through a seeded [`RandomSource`], so a seed fully
//! determines a run.

pub mod bits;
pub mod classical;
pub mod consensus;
pub mod network;
pub mod qchain;
pub mod qsim;
pub mod rng;
pub mod scenario;
pub mod timeline;

pub use bits::BitString;
pub use rng::RandomSource;
