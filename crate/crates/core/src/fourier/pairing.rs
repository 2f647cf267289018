use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::testfn::{radial_tail, TestFunction};
use super::FourierError;
use crate::measure::AtomicMeasure;
use crate::pointset::ball_volume;

/// Terms per parallel chunk; partial sums are combined in a fixed binary tree
/// so results do not depend on the thread count.
const CHUNK: usize = 512;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Pairing {
    #[serde(serialize_with = "super::ser_complex")]
    pub value: Complex64,
    /// `Σ |μ(λ)|·|φ̂(λ)|` over the truncation.
    pub abs_sum: f64,
    /// Estimated contribution of atoms beyond `R_trunc`.
    pub tail_bound: f64,
}

/// Deterministic sum: sequential within chunks of [`CHUNK`] terms, then a
/// pairwise tree over the chunk sums.
pub fn tree_sum(terms: &[Complex64]) -> Complex64 {
    let partial: Vec<Complex64> = terms.par_chunks(CHUNK).map(|c| c.iter().sum()).collect();
    pairwise(&partial)
}

fn pairwise(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        n => pairwise(&xs[..n / 2]) + pairwise(&xs[n / 2..]),
    }
}

/// `⟨μ̂, φ⟩ = ⟨μ, φ̂⟩ = Σ_λ μ(λ) φ̂(λ)` over the truncation, with an estimate of
/// the contribution from `|λ| > R_trunc`: atom density × sup weight × the
/// radial tail of `|φ̂|`. Fails when that estimate exceeds `tol`.
pub fn pair_spectrum(mu: &AtomicMeasure, phi: &TestFunction, tol: f64) -> Result<Pairing, FourierError> {
    let p = pair_unchecked(mu, phi)?;
    if p.tail_bound > tol {
        return Err(FourierError::Tail {
            bound: p.tail_bound,
            tol,
        });
    }
    Ok(p)
}

/// [`pair_spectrum`] without the tail check.
pub fn pair_unchecked(mu: &AtomicMeasure, phi: &TestFunction) -> Result<Pairing, FourierError> {
    if mu.is_empty() {
        return Err(FourierError::EmptyMeasure);
    }
    if phi.dim() != mu.dim() {
        return Err(FourierError::Dimension(mu.dim(), phi.dim()));
    }
    let atoms: Vec<(&[f64], Complex64)> = mu.atoms().map(|(_, x, w)| (x, w)).collect();
    let terms: Vec<(Complex64, f64)> = atoms
        .par_iter()
        .map(|(x, w)| {
            let t = w * phi.transform(x);
            (t, t.norm())
        })
        .collect();
    let values: Vec<Complex64> = terms.iter().map(|t| t.0).collect();
    let abs: Vec<Complex64> = terms.iter().map(|t| Complex64::new(t.1, 0.0)).collect();
    Ok(Pairing {
        value: tree_sum(&values),
        abs_sum: tree_sum(&abs).re,
        tail_bound: tail_estimate(mu, phi),
    })
}

fn tail_estimate(mu: &AtomicMeasure, phi: &TestFunction) -> f64 {
    let n = mu.dim();
    let r = mu.r_trunc();
    let density = mu.len() as f64 / ball_volume(n, r);
    let sup = mu.weights().iter().map(|w| w.norm()).fold(0.0, f64::max);
    density * sup * radial_tail(n, r, phi.transform_scale(), |s| phi.transform_envelope(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{ExactVector, RealBasis};
    use crate::lattice::Lattice;
    use num_traits::One;

    #[test]
    fn theta_series_at_one() {
        let mu = AtomicMeasure::on_lattice(&Lattice::integer(1), 30.0, |_, _| Complex64::one()).unwrap();
        let p = pair_spectrum(&mu, &TestFunction::gaussian(1, 1.0), 1e-12).unwrap();
        // Σ e^{−πn²} with f64 terms summed largest last
        let mut oracle = 0.0;
        for k in (1..30).rev() {
            oracle += 2.0 * (-std::f64::consts::PI * (k * k) as f64).exp();
        }
        oracle += 1.0;
        assert!((p.value.re - oracle).abs() < 1e-15);
        assert!((p.value.re - 1.086_434_811_213_308).abs() < 1e-14);
        assert!(p.value.im.abs() < 1e-300);
    }

    #[test]
    fn single_atom_gives_transform_at_origin() {
        let b = RealBasis::rational();
        let mu = AtomicMeasure::from_atoms(vec![ExactVector::zero(&b, 1)], vec![Complex64::one()], 1.0, "δ0").unwrap();
        let phi = TestFunction::gaussian(1, 0.5);
        let p = pair_unchecked(&mu, &phi).unwrap();
        assert_eq!(p.value, phi.transform(&[0.0]));
    }

    #[test]
    fn alternating_comb_vanishes_on_central_bump() {
        let mu = AtomicMeasure::on_lattice(&Lattice::integer(1), 400.0, |k, _| {
            Complex64::new(if k[0] % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
        .unwrap();
        let phi = TestFunction::spectral_bump(&[-0.45], &[0.45], 400.0);
        let p = pair_spectrum(&mu, &phi, 1e-10).unwrap();
        assert!(p.value.norm() < 1e-10, "{}", p.value);
        assert!(p.abs_sum > 0.1);
    }

    #[test]
    fn tree_sum_is_thread_independent() {
        let xs: Vec<Complex64> = (0..10_000).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let a = tree_sum(&xs);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| tree_sum(&xs));
        assert_eq!(a, b);
    }
}
