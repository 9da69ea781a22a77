//! Spectral almost-Hermitian geometry on the flat 4-torus.
//!
//! Forms are sampled on a uniform periodic lattice and differentiated with
//! FFTs. On top of that sit almost complex structures compatible with
//! `ω₀ = e12 + e34`, their Hodge stars and `J`/`g` splittings, Lejmi's
//! operator `P ψ = P_J^-(d δ_g ψ)` on `J`-anti-invariant 2-forms, and a
//! seeded block Lanczos eigensolver that turns its kernel into the integer
//! `h_J^-`.

pub mod catalog;
pub mod error;
pub mod exterior;
pub mod grid;
pub mod hermitian;
pub mod lab;
pub mod pointwise;
pub mod reduce;
pub mod spectral;

pub use error::{Error, Result};
