//! Numerical workbench for harmonic Riemannian foliations: normal-bundle
//! connection and curvature, Jacobi operator spectra, locally conformal
//! Kähler structure checks, and Euclidean-submanifold instability criteria.

pub mod catalog;
pub mod config;
pub mod error;
pub mod foliation;
pub mod geometry;
pub mod instability;
pub mod lck;
pub mod report;
pub mod manifolds;
pub mod spectral;
pub mod suites;

pub use error::{FolstabError, Result};
