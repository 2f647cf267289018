use num_complex::Complex64;
use serde::Serialize;

use super::pairing::tree_sum;
use super::testfn::{radial_tail, Gaussian, TestFunction};
use super::FourierError;
use crate::lattice::{Lattice, DEFAULT_CAP};

#[derive(Clone, Debug, Serialize)]
pub struct PoissonReport {
    #[serde(serialize_with = "super::ser_complex")]
    pub lhs: Complex64,
    #[serde(serialize_with = "super::ser_complex")]
    pub rhs: Complex64,
    pub abs_error: f64,
    /// Estimated neglected mass on both sides beyond the radius.
    pub tail_bound: f64,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    pub det: f64,
}

/// `Σ_{λ ∈ L ∩ B_R} f(λ)` against `(1/|det L|) Σ_{s ∈ L* ∩ B_R} f̂(s)` for the
/// Gaussian `f` shifted by `x₀` and modulated by `ω₀`.
pub fn poisson_verify(
    l: &Lattice,
    f: &Gaussian,
    shift: &[f64],
    modulation: &[f64],
    radius: f64,
    tol: f64,
) -> Result<PoissonReport, FourierError> {
    let n = l.dim();
    if f.dim() != n || shift.len() != n || modulation.len() != n {
        return Err(FourierError::Dimension(n, f.dim()));
    }
    let g = TestFunction::Gaussian(f.shifted(shift).modulated(modulation));
    let det = l.det().to_f64().abs();
    let dual = l.dual()?;

    let lhs_pts = l.enumerate_in_ball(&[], radius, DEFAULT_CAP)?;
    let rhs_pts = dual.enumerate_in_ball(&[], radius, DEFAULT_CAP)?;
    let lhs_terms: Vec<Complex64> = lhs_pts.iter().map(|p| g.value(&p.point.to_f64())).collect();
    let rhs_terms: Vec<Complex64> = rhs_pts.iter().map(|p| g.transform(&p.point.to_f64())).collect();
    let lhs = tree_sum(&lhs_terms);
    let rhs = tree_sum(&rhs_terms) / det;

    // L has density 1/det and L* has density det
    let tail_l = radial_tail(n, radius, g.value_scale(), |r| g.value_envelope(r)) / det;
    let tail_r = radial_tail(n, radius, g.transform_scale(), |r| g.transform_envelope(r));
    let tail_bound = tail_l + tail_r;
    if tail_bound > tol {
        return Err(FourierError::Truncation { radius, tail: tail_bound, tol });
    }
    Ok(PoissonReport {
        lhs,
        rhs,
        abs_error: (lhs - rhs).norm(),
        tail_bound,
        lhs_terms: lhs_pts.len(),
        rhs_terms: rhs_pts.len(),
        det,
    })
}
