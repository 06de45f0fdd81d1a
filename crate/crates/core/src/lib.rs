//! Numerical laboratory for the weighted two-phase thin free boundary problem
//!
//! ```text
//! J(u) = ∫_D |x₂|^a |∇u|² + ∫_{D ∩ {x₂ = 0}} λ⁺ χ{u > 0} + λ⁻ χ{u < 0}
//! ```
//!
//! on `D = [-1, 1]²`, together with the monotonicity, blow-up, spectral and
//! symmetrization diagnostics used to study its minimizers.

pub mod energy;
pub mod blowup;
pub mod error;
pub mod fields;
pub mod mesh;
pub mod monotonicity;
pub mod quadrature;
pub mod solver;
pub mod spherical;
pub mod symmetrization;

pub use error::{Error, Result};
