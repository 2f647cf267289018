//! Fourier analysis of atomic measures: pairings `⟨μ̂, φ⟩`, Poisson summation
//! checks, tapered diffraction scans, spectral-gap probes and gap
//! certificates.
//!
//! The transform is `φ̂(t) = ∫ φ(x) e^{−2πi⟨t,x⟩} dx`.

use num_complex::Complex64;
use serde::ser::SerializeTuple;
use serde::Serializer;
use thiserror::Error;

mod gapcert;
mod gaptest;
mod pairing;
mod poisson;
mod scan;
mod testfn;

pub use gapcert::{gap_certificate, gap_certificate_unchecked, CertificateReport, GapCertificate};
pub use gaptest::{gap_test, GapReport, Probe, GAP_THRESHOLD};
pub use pairing::{pair_spectrum, pair_unchecked, tree_sum, Pairing};
pub use poisson::{poisson_verify, PoissonReport};
pub use scan::{diffraction_scan, golden_min, tapered_transform, GridSpec, Peak, SpectrumScan};
pub use testfn::{bump_integral, bump_profile, radial_tail, BandlimitedBump, BumpFactor, Gaussian, TestFunction};

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("truncation tail {bound:.3e} exceeds tolerance {tol:.3e}; increase R_trunc")]
    Tail { bound: f64, tol: f64 },
    #[error("radius {radius} too small: neglected mass {tail:.3e} exceeds tolerance {tol:.3e}")]
    Truncation { radius: f64, tail: f64, tol: f64 },
    #[error("measure has no atoms")]
    EmptyMeasure,
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("density condition violated: {0}")]
    Density(String),
    #[error("invalid certificate input: {0}")]
    Certificate(String),
    #[error(transparent)]
    Measure(#[from] crate::measure::MeasureError),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    Exact(#[from] crate::exactnum::ExactError),
}

/// Complex numbers as `[re, im]`.
pub(crate) fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}
