//! Anisotropic tensor brushlet bases.
//!
//! This crate builds explicit orthonormal bases of `L_2(R^d)` adapted to an
//! anisotropy vector and an α-parameter: an explicit covering of the
//! frequency plane by rectangles, smooth bell windows over those rectangles,
//! tensor-product local cosine (brushlet) functions, the associated
//! analysis/synthesis operators, sequence-space norms, and greedy m-term
//! approximation experiments that exercise the direct and inverse rate
//! estimates.

pub mod anisotropy;
pub mod approx_rates;
pub mod brushlet1d;
pub mod covering;
pub mod error;
pub mod grid;
pub mod quad;
pub mod runner;
pub mod seqnorm;
pub mod tensor_basis;
pub mod transform;

pub use anisotropy::Anisotropy;
pub use covering::{Covering, CoveringSpec, CutInterval, FreqRect, IntervalKind};
pub use error::{Error, Result};
