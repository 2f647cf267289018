//! Crystalline measures: exact lattices and model sets, finite-window point
//! set analysis, Fourier pairing and spectral-gap certificates, and the
//! decomposition of measures into trigonometric polynomials on lattice cosets.

pub mod decompose;
pub mod exactnum;
pub mod fourier;
pub mod lattice;
pub mod linalg;
pub mod measure;
pub mod modelset;
pub mod pointset;
