//! Finite-dimensional frames, Bessel multipliers and their certificates.
//!
//! Vectors live in ℂⁿ with the inner product `⟨f, g⟩ = Σ f_i · conj(g_i)`.
//! A family (ψ_k) has analysis matrix C (rows conj(ψ_k)), synthesis matrix
//! D = C* and frame operator S = D·C. All randomness is seeded ChaCha8.

pub mod error;
pub mod generators;
pub mod linalg;
pub mod multiplier;
pub mod perturbation;
pub mod sequences;
pub mod tolerance;

pub use error::{Error, Result};
pub use linalg::{CVector, LinOperator, NormKind, Norms, C64};
pub use multiplier::{BoundCertificate, MultiplierSpec, Symbol};
pub use sequences::{FrameReport, VectorFamily};
pub use tolerance::Tolerances;
