use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{coset_split, dual_point, find_separating_vector, CosetDecomposition, CosetPart, CosetSequence, DecomposeError, TrigPolynomial};
use crate::exactnum::ExactVector;
use crate::lattice::{Lattice, DEFAULT_CAP};
use crate::measure::{unit_phase, AtomicMeasure};

/// Largest block side tried when doubling `K`.
pub const MAX_K: usize = 1024;

/// A coset passes when its residual is at most this times the sup weight.
pub const RESIDUAL_FACTOR: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct CosetFit {
    pub k: usize,
    pub block_start: Vec<i64>,
    pub terms: usize,
    /// `max |Pⱼ(λ) − μ(λ)|` over coset points of the truncation outside the
    /// block (over all points when the block covers the truncation).
    pub residual: f64,
    pub held_out: usize,
}

#[derive(Clone, Debug)]
pub struct Recovery {
    pub decomposition: CosetDecomposition,
    pub fits: Vec<CosetFit>,
    pub residual: f64,
    pub sup_weight: f64,
}

/// Recovers `Pⱼ` on every coset `L + θⱼ` from the block `k₀ + [0,K)ⁿ` of
/// lattice coordinates, `k₀` being the coset point nearest the origin, by a DFT, keeping coefficients above `eps`. `K` is
/// doubled up to [`MAX_K`] (or the largest block the truncation holds) until
/// the held-out residual is at most `10⁻⁶·sup|μ|`.
///
/// Frequencies are reported in the fundamental domain `[0,1)ⁿ` of `L*`.
pub fn recover_polynomials(
    mu: &AtomicMeasure,
    l: &Lattice,
    offsets: &[ExactVector],
    k: usize,
    eps: f64,
) -> Result<Recovery, DecomposeError> {
    if k == 0 {
        return Err(DecomposeError::Truncation { coset: 0, k });
    }
    let split = coset_split(mu, l, offsets)?;
    let sup_weight = mu.weights().iter().map(|w| w.norm()).fold(0.0, f64::max);
    let limit = RESIDUAL_FACTOR * sup_weight;
    let dual = l.dual()?;
    let fits: Vec<Result<(TrigPolynomial, CosetFit), DecomposeError>> = split
        .par_iter()
        .enumerate()
        .map(|(j, seq)| fit_coset(j, seq, l, &dual, mu.r_trunc(), k, eps, limit))
        .collect();
    let mut parts = Vec::with_capacity(fits.len());
    let mut reports = Vec::with_capacity(fits.len());
    for (seq, f) in split.iter().zip(fits) {
        let (poly, fit) = f?;
        parts.push(CosetPart {
            theta: seq.theta.clone(),
            poly,
        });
        reports.push(fit);
    }
    let residual = reports.iter().map(|f| f.residual).fold(0.0, f64::max);
    let mut decomposition = CosetDecomposition::new(l.clone(), parts)?;
    if decomposition.parts.len() > 1 {
        decomposition.certificate = find_separating_vector(l, &decomposition.thetas()).ok();
    }
    Ok(Recovery {
        decomposition,
        fits: reports,
        residual,
        sup_weight,
    })
}

#[allow(clippy::too_many_arguments)]
fn fit_coset(
    coset: usize,
    seq: &CosetSequence,
    l: &Lattice,
    dual: &Lattice,
    r_trunc: f64,
    k0: usize,
    eps: f64,
    limit: f64,
) -> Result<(TrigPolynomial, CosetFit), DecomposeError> {
    let n = l.dim();
    let all = l.enumerate_in_ball(std::slice::from_ref(&seq.theta), r_trunc, DEFAULT_CAP)?;
    let theta_f = seq.theta.to_f64();
    let origin: Vec<i64> = l.numeric_coords(&theta_f).iter().map(|c| (-c).round() as i64).collect();

    let mut best: Option<(TrigPolynomial, CosetFit)> = None;
    let mut k = k0;
    while k <= MAX_K.max(k0) {
        let start = origin.clone();
        if !block_inside(l, &theta_f, &start, k, r_trunc) {
            if best.is_none() {
                return Err(DecomposeError::Truncation { coset, k });
            }
            break;
        }
        let coeffs = block_dft(seq, &start, k, n);
        let kept: Vec<(usize, Complex64)> = coeffs.iter().copied().enumerate().filter(|(_, a)| a.norm() > eps).collect();

        // residual through Pⱼ(Bk + θ) = Σ_ν a_ν e^{2πi⟨ν,k⟩}
        let table: Vec<Complex64> = (0..k).map(|r| root_of_unity(r, k)).collect();
        let mut residual: f64 = 0.0;
        let mut held_out = 0;
        let mut block_residual: f64 = 0.0;
        for p in &all {
            let inside = p.k.iter().zip(&start).all(|(x, s)| *x >= *s && *x < s + k as i64);
            let mut val = Complex64::new(0.0, 0.0);
            for &(flat, a) in &kept {
                let mut phase = 0i64;
                let mut rem = flat;
                for x in &p.k {
                    let nu = (rem % k) as i64;
                    rem /= k;
                    phase = (phase + nu * x.rem_euclid(k as i64)) % k as i64;
                }
                val += a * table[phase as usize];
            }
            let actual = seq.weights.get(&p.k).copied().unwrap_or_default();
            let e = (val - actual).norm();
            if inside {
                block_residual = block_residual.max(e);
            } else {
                residual = residual.max(e);
                held_out += 1;
            }
        }
        if held_out == 0 {
            residual = block_residual;
        }

        let better = best.as_ref().is_none_or(|(_, f)| residual < f.residual);
        if better || residual <= limit {
            let poly = polynomial(&kept, &seq.theta, dual, k, n)?;
            let fit = CosetFit {
                k,
                block_start: start,
                terms: kept.len(),
                residual,
                held_out,
            };
            if residual <= limit {
                return Ok((poly, fit));
            }
            best = Some((poly, fit));
        }
        if k >= MAX_K {
            break;
        }
        k *= 2;
    }
    let (_, fit) = best.expect("at least one block was fitted");
    Err(DecomposeError::NotTrigPolynomial {
        coset,
        k: fit.k,
        residual: fit.residual,
        limit,
    })
}

/// `e^{2πi r/K}`, exact at multiples of a quarter turn.
fn root_of_unity(r: usize, k: usize) -> Complex64 {
    if (4 * r) % k == 0 {
        return match 4 * r / k {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * PI * r as f64 / k as f64)
}

fn block_inside(l: &Lattice, theta: &[f64], start: &[i64], k: usize, r: f64) -> bool {
    let n = start.len();
    (0..1usize << n).all(|mask| {
        let corner: Vec<i64> = (0..n)
            .map(|d| start[d] + if mask >> d & 1 == 1 { k as i64 - 1 } else { 0 })
            .collect();
        let x = l.point(&corner).to_f64();
        x.iter().zip(theta).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt() <= r
    })
}

/// `a_ν = K⁻ⁿ Σ_{k ∈ block} μ(k) e^{−2πi⟨ν,k⟩}` for `ν ∈ {0, 1/K, …}ⁿ`, indexed
/// with the first coordinate fastest.
fn block_dft(seq: &CosetSequence, start: &[i64], k: usize, n: usize) -> Vec<Complex64> {
    let total = k.pow(n as u32);
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    for (flat, slot) in data.iter_mut().enumerate() {
        let mut rem = flat;
        let key: Vec<i64> = start
            .iter()
            .map(|s| {
                let j = (rem % k) as i64;
                rem /= k;
                s + j
            })
            .collect();
        if let Some(w) = seq.weights.get(&key) {
            *slot = *w;
        }
    }
    let fft = FftPlanner::new().plan_fft_forward(k);
    let mut line = vec![Complex64::new(0.0, 0.0); k];
    for axis in 0..n {
        let stride = k.pow(axis as u32);
        for base in 0..total {
            if (base / stride) % k != 0 {
                continue;
            }
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[base + j * stride] = *v;
            }
        }
    }
    let norm = 1.0 / total as f64;
    for (flat, v) in data.iter_mut().enumerate() {
        // undo the block offset: e^{−2πi⟨ν,start⟩}
        let mut rem = flat;
        let mut phase = 0i64;
        for s in start {
            let nu = (rem % k) as i64;
            rem /= k;
            phase = (phase + nu * s.rem_euclid(k as i64)) % k as i64;
        }
        *v = *v * norm * root_of_unity(phase as usize, k).conj();
    }
    data
}

/// `Pⱼ` from block coefficients: `c_ω = a_ν e^{−2πi⟨ω,θ⟩}` with `ω = B*ν`.
fn polynomial(
    kept: &[(usize, Complex64)],
    theta: &ExactVector,
    dual: &Lattice,
    k: usize,
    n: usize,
) -> Result<TrigPolynomial, DecomposeError> {
    let mut terms = Vec::with_capacity(kept.len());
    for &(flat, a) in kept {
        let mut rem = flat;
        let nu: Vec<BigRational> = (0..n)
            .map(|_| {
                let q = (rem % k) as i64;
                rem /= k;
                BigRational::new(q.into(), (k as i64).into())
            })
            .collect();
        let omega = dual_point(dual, &nu)?;
        terms.push((omega.clone(), a * unit_phase(&omega, theta)?.conj()));
    }
    Ok(TrigPolynomial::new(terms)?)
}
