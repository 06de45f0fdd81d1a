//! Weighted Dirichlet solves, minimization of `J` and the lattice combination.

mod aharmonic;
mod boundary;
pub mod cg;
mod fast;
mod lattice;
mod minimize;

pub use aharmonic::{solve_aharmonic, solve_aharmonic_with, Pinned, SolveOptions};
pub use boundary::{slit_profile, BoundaryData, BoundaryKind, SlitSide};
pub use fast::{TensorSolver, ThinReduction};
pub use lattice::{lattice_combine, LatticeCombination};
pub use minimize::{minimize, minimize_with, MinimizeOptions, MinimizerResult, StageReport};
