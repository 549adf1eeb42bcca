//! Discretised normal sections, the Jacobi operator `Δ − ρ_∇` as a sparse
//! symmetric matrix, and its low spectrum.

pub mod assembly;
pub mod eigen;
pub mod jacobi;

pub use assembly::{assemble_jacobi, assemble_scalar_laplacian, JacobiMatrix, SectionSpace};
pub use eigen::{smallest_eigenpairs, EigenPairs};
pub use jacobi::{rayleigh_quotient, second_variation_fd, spectrum, stability_identity_gap, SpectrumReport};
