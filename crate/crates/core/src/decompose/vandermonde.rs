use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::separate::weighted;
use super::{coset_split, verify_separating, CosetDecomposition, DecomposeError};
use crate::exactnum::{ExactError, ExactVector, RealBasis};
use crate::fourier::{pair_unchecked, Gaussian, SpectrumScan, TestFunction};
use crate::lattice::Coords;
use crate::measure::{cis_exact, AtomicMeasure};

/// Largest acceptable condition number of the Vandermonde matrix.
pub const MAX_CONDITION: f64 = 1e6;

#[derive(Clone, Debug, Serialize)]
pub struct VandermondeReport {
    pub t: Vec<f64>,
    pub m: Vec<i64>,
    /// The dual-lattice step `k₁ = B*m`; samples are taken at `t − p·k₁`.
    pub step: Vec<f64>,
    pub probe_width: f64,
    pub condition: f64,
    #[serde(serialize_with = "ser_vec")]
    pub samples: Vec<Complex64>,
    #[serde(serialize_with = "ser_vec")]
    pub recovered: Vec<Complex64>,
    #[serde(serialize_with = "ser_vec")]
    pub predicted: Vec<Complex64>,
    /// `max_j |recovered − predicted| / max_j |predicted|`.
    pub max_relative_error: f64,
}

fn ser_vec<S: serde::Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// A tenth of the smallest distance between scanned peaks.
pub fn probe_width_from_scan(scan: &SpectrumScan) -> Option<f64> {
    scan.min_peak_gap().map(|g| 0.1 * g)
}

/// Samples the smoothed `μ̂` at `t − p·k₁` for `p = 0..s−1`, solves
/// `μ̂(t − p·k₁) = Σⱼ e^{2πi p⟨θⱼ,k₁⟩} αⱼ(t)` for the `αⱼ` and compares them
/// with `αⱼ(t) = e^{−2πi⟨θⱼ,t⟩} μ̂ⱼ(t)` computed from the coset split.
///
/// Smoothing is by a Gaussian probe of the given spectral width, which
/// weights atoms by `wⁿ e^{−πw²|λ|²}`. `m` defaults to the certificate.
pub fn vandermonde_consistency(
    mu: &AtomicMeasure,
    d: &CosetDecomposition,
    m: Option<&[i64]>,
    t: &[f64],
    probe_width: f64,
) -> Result<VandermondeReport, DecomposeError> {
    let n = d.lattice.dim();
    if t.len() != n || mu.dim() != n {
        return Err(DecomposeError::Dimension(t.len(), n));
    }
    let thetas = d.thetas();
    let cert = match m {
        Some(m) => verify_separating(&d.lattice, &thetas, m)?,
        None => d.certificate.clone().ok_or(DecomposeError::MissingCertificate)?,
    };
    let s = thetas.len();

    // ⟨θⱼ, k₁⟩ = ⟨cⱼ, m⟩ with cⱼ the lattice coordinates of θⱼ
    let mut bases = vec![d.lattice.field()];
    bases.extend(thetas.iter().map(ExactVector::basis));
    let target = RealBasis::union(&bases)?;
    let mut inner = Vec::with_capacity(s);
    for th in &thetas {
        let c = match d.lattice.coords(&th.embed(&target)?)? {
            Coords::Exact(c) => c,
            Coords::Numeric(_) => return Err(ExactError::NoMultiplicationTable(target.tags().to_vec()).into()),
        };
        inner.push(weighted(&c, &cert.m)?);
    }
    let dual = d.lattice.dual()?;
    let step = dual.point(&cert.m).to_f64();

    let mut v = DMatrix::<Complex64>::zeros(s, s);
    for p in 0..s {
        for (j, x) in inner.iter().enumerate() {
            v[(p, j)] = cis_exact(&x.scale_int(p as i64));
        }
    }
    let sv = v.clone().singular_values();
    let condition = sv.max() / sv.min();
    if !(condition <= MAX_CONDITION) {
        return Err(DecomposeError::IllConditioned(condition));
    }

    let probe = |u: &[f64]| TestFunction::Gaussian(Gaussian::centered(n, probe_width).shifted(u));
    let mut samples = Vec::with_capacity(s);
    for p in 0..s {
        let u: Vec<f64> = t.iter().zip(&step).map(|(a, k)| a - p as f64 * k).collect();
        samples.push(pair_unchecked(mu, &probe(&u))?.value);
    }
    let recovered: Vec<Complex64> = v
        .lu()
        .solve(&DVector::from_vec(samples.clone()))
        .ok_or(DecomposeError::IllConditioned(f64::INFINITY))?
        .iter()
        .copied()
        .collect();

    let split = coset_split(mu, &d.lattice, &thetas)?;
    let g = Gaussian::centered(n, probe_width);
    let mut predicted = Vec::with_capacity(s);
    for (seq, th) in split.iter().zip(&thetas) {
        let th_f = th.to_f64();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in seq.sorted_keys() {
            let base = d.lattice.point(&k).to_f64();
            let x: Vec<f64> = base.iter().zip(&th_f).map(|(a, b)| a + b).collect();
            // taper at the atom, phase of the lattice part only
            let taper = g.transform(&x).re;
            let phase: f64 = base.iter().zip(t).map(|(a, b)| a * b).sum();
            acc += seq.weights[&k] * taper * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * phase);
        }
        let theta_t: f64 = th_f.iter().zip(t).map(|(a, b)| a * b).sum();
        predicted.push(Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * theta_t) * acc);
    }
    let scale = predicted.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_relative_error = recovered
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale;

    Ok(VandermondeReport {
        t: t.to_vec(),
        m: cert.m,
        step,
        probe_width,
        condition,
        samples,
        recovered,
        predicted,
        max_relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{synthesize, CosetPart, TrigPolynomial};
    use crate::exactnum::parse_vector;
    use crate::lattice::Lattice;

    fn decomposition(b: &std::sync::Arc<RealBasis>, n: usize, parts: &[(&str, f64)]) -> CosetDecomposition {
        let l = Lattice::integer(n);
        let parts = parts
            .iter()
            .map(|(th, c)| CosetPart {
                theta: parse_vector(th, b).unwrap(),
                poly: TrigPolynomial::constant(Complex64::new(*c, 0.0), n),
            })
            .collect();
        CosetDecomposition::new(l, parts).unwrap().certify().unwrap()
    }

    #[test]
    fn single_coset_is_identity() {
        let b = RealBasis::sqrt2();
        let d = decomposition(&b, 1, &[("0", 1.0)]);
        let mu = synthesize(&d, 100.0).unwrap();
        let r = vandermonde_consistency(&mu, &d, None, &[0.0], 0.05).unwrap();
        assert_eq!(r.condition, 1.0);
        assert_eq!(r.recovered[0], r.samples[0]);
        assert!(r.max_relative_error < 1e-12);
    }

    #[test]
    fn two_cosets_at_origin() {
        let b = RealBasis::sqrt2();
        let d = decomposition(&b, 1, &[("0", 1.0), ("sqrt2", 2.0)]);
        let mu = synthesize(&d, 200.0).unwrap();
        let r = vandermonde_consistency(&mu, &d, None, &[0.0], 0.05).unwrap();
        assert!(r.max_relative_error < 1e-6, "{}", r.max_relative_error);
        // on the comb the smoothed transform at 0 is about the coset density times the weight
        assert!((r.recovered[1].norm() / r.recovered[0].norm() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn three_planar_cosets() {
        let b = RealBasis::from_tags(&["1", "sqrt2", "sqrt3"]).unwrap();
        let d = decomposition(&b, 2, &[("sqrt2, 0", 1.0), ("0, sqrt3", 0.5), ("0, 0", 2.0)]);
        let mu = synthesize(&d, 30.0).unwrap();
        let r = vandermonde_consistency(&mu, &d, None, &[0.0, 0.0], 0.2).unwrap();
        assert_eq!(r.m, vec![1, 1]);
        assert!(r.condition < MAX_CONDITION);
        assert!(r.max_relative_error < 1e-5, "{}", r.max_relative_error);
    }
}
