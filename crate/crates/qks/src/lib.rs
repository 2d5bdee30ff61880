//! Homogeneous quaternionic Kähler structures on a flat model space.
//!
//! The crate works on `V = ℍ^n` stored as `ℝ^{4n}`. Each quaternion
//! occupies four consecutive real slots in the order `(1, i, j, k)`, so a
//! vector reads `(x⁰, y⁰, z⁰, w⁰, x¹, …)`. Every module uses this layout.
//!
//! * [`quaternion`]: quaternions, quaternionic matrices, `sp(n,1)`, seeded `Sp(n)` samples.
//! * [`qh_space`]: the triple `J₁, J₂, J₃` and the `Sp(n)Sp(1)` action.
//! * [`tensor3`]: rank-3 tensors antisymmetric in the last two slots.
//! * [`classification`]: membership in `𝒱` and the five-way split.
//! * [`curvature`]: algebraic curvature tensors.
//! * [`homogeneous`]: the solvable model and the `𝒬𝒦3` family of `HH(n)`.
//! * [`ball`]: the ball model with finite-difference geometry.

pub mod ball;
pub mod batch;
pub mod classification;
pub mod curvature;
mod error;
pub mod homogeneous;
pub mod qh_space;
pub mod quaternion;
pub mod tensor3;

pub use error::{QksError, Result};
