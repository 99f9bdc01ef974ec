//! Numerics for catalytic quantum communication.
//!
//! Two catalyst constructions are implemented end to end:
//!
//! - **Convex-split catalysts** ([`convexsplit`]): n − 1 copies of a state
//!   τ = pφ⁺ + (1 − p)ζ, with the copy count driven by the max-relative
//!   entropy of the channel's Choi state with respect to τ.
//! - **Embezzling-state catalysts** ([`embezzle`]): the universal family
//!   |τ^E⟩ ∝ Σ_j j^{−1/2}|jj⟩, from which a maximally entangled state is
//!   borrowed by a local permutation unitary.
//!
//! Supporting modules provide dense linear algebra ([`qmat`]), state
//! distinguishability ([`distinguish`]), qubit channels ([`channels`]),
//! the superdense-coding and entanglement-distribution applications
//! ([`tasks`]), and the seeded experiment harness behind the `catlab` CLI
//! ([`experiment`]).
//!
//! All logarithms are base 2 except the natural-log distance thresholds
//! in [`tasks`].

pub mod channels;
pub mod convexsplit;
pub mod distinguish;
pub mod embezzle;
mod error;
pub mod exec;
pub mod experiment;
pub mod qmat;
pub mod tasks;

pub use error::{Error, Result};
pub use exec::Exec;
