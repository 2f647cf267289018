//! Measures `μ = Σⱼ Pⱼ Σ_{λ ∈ L+θⱼ} δ_λ` with trigonometric polynomials `Pⱼ`:
//! synthesis, splitting by cosets, separating vectors for the offsets, the
//! Vandermonde inversion of the shifted transforms, and recovery of the `Pⱼ`
//! from atom data.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{decode_vectors, ExactError, ExactVector, RealBasis, RealWire, VectorWire};
use crate::fourier::FourierError;
use crate::lattice::{CosetSystem, Lattice, LatticeError, LatticeWire, DEFAULT_CAP};
use crate::measure::{unit_phase, AtomicMeasure, MeasureError, PRUNE_TOL};

mod recover;
mod separate;
mod vandermonde;

pub use recover::{recover_polynomials, CosetFit, Recovery, MAX_K, RESIDUAL_FACTOR};
pub use separate::{find_separating_vector, verify_separating, SeparatingVector};
pub use vandermonde::{probe_width_from_scan, vandermonde_consistency, VandermondeReport, MAX_CONDITION};

/// Offenders listed in full up to this many; the count is always exact.
const MAX_LISTED: usize = 20;

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error("{count} atoms outside L + F: {}", .listed.join("; "))]
    OffCoset { count: usize, listed: Vec<String> },
    #[error("atom {point} lies in cosets {first} and {second}")]
    Ambiguous { point: String, first: usize, second: usize },
    #[error("θ_{0} − θ_{1} is rational; apply refine_lattice first")]
    RationalDifference(usize, usize),
    #[error("decomposition has no separating-vector certificate")]
    MissingCertificate,
    #[error("Vandermonde condition number {0:.3e} exceeds the limit; try a different m")]
    IllConditioned(f64),
    #[error("weights are not trigonometric-polynomial on coset {coset} at resolution K ≤ {k}: residual {residual:.3e} (limit {limit:.3e})")]
    NotTrigPolynomial { coset: usize, k: usize, residual: f64, limit: f64 },
    #[error("coset {coset}: truncation holds no complete {k}-block of lattice coordinates")]
    Truncation { coset: usize, k: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
}

/// `P(x) = Σ c_ω e^{2πi⟨ω,x⟩}` with distinct frequencies and nonzero
/// coefficients, sorted by frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    terms: Vec<(ExactVector, Complex64)>,
}

impl TrigPolynomial {
    /// Merges repeated frequencies and drops zero coefficients.
    pub fn new(terms: Vec<(ExactVector, Complex64)>) -> Result<Self, ExactError> {
        let rational = RealBasis::rational();
        let mut bases: Vec<_> = terms.iter().map(|(w, _)| w.basis()).collect();
        bases.push(&rational);
        let target = if terms.iter().all(|(w, _)| w.is_rational()) {
            rational.clone()
        } else {
            RealBasis::union(&bases)?
        };
        let mut merged: Vec<(ExactVector, Complex64)> = Vec::new();
        let mut index: HashMap<ExactVector, usize> = HashMap::new();
        for (w, c) in terms {
            let w = w.embed(&target)?;
            match index.get(&w) {
                Some(&i) => merged[i].1 += c,
                None => {
                    index.insert(w.clone(), merged.len());
                    merged.push((w, c));
                }
            }
        }
        merged.retain(|(_, c)| *c != Complex64::new(0.0, 0.0));
        merged.sort_by(|a, b| a.0.cmp_numeric(&b.0));
        Ok(TrigPolynomial { terms: merged })
    }

    pub fn constant(c: Complex64, n: usize) -> Self {
        let zero = ExactVector::zero(&RealBasis::rational(), n);
        TrigPolynomial::new(vec![(zero, c)]).expect("rational frequencies")
    }

    pub fn terms(&self) -> &[(ExactVector, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `P(x)` with each phase reduced mod 1 exactly where possible.
    pub fn eval(&self, x: &ExactVector) -> Result<Complex64, ExactError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, c) in &self.terms {
            acc += c * unit_phase(w, x)?;
        }
        Ok(acc)
    }

    /// The same function on `L + θ` with every frequency moved into the
    /// half-open fundamental domain `[0,1)ⁿ` of `L*` in dual coordinates.
    ///
    /// Moving `ω` by `κ ∈ L*` multiplies the term by `e^{2πi⟨κ,θ⟩}` on the
    /// coset, so the coefficient absorbs that phase.
    pub fn canonical_on(&self, l: &Lattice, theta: &ExactVector) -> Result<Self, DecomposeError> {
        let dual = l.dual()?;
        let mut out = Vec::with_capacity(self.terms.len());
        for (w, c) in &self.terms {
            let (rep, _) = dual.reduce(w)?;
            let target = RealBasis::union(&[w.basis(), rep.basis()])?;
            let kappa = w.embed(&target)?.try_sub(&rep.embed(&target)?)?;
            out.push((rep, c * unit_phase(&kappa, theta)?));
        }
        Ok(TrigPolynomial::new(out)?)
    }
}

impl fmt::Display for TrigPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(w, c)| format!("({c})·e[{w}]")).collect();
        write!(f, "{}", if parts.is_empty() { "0".to_string() } else { parts.join(" + ") })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosetPart {
    pub theta: ExactVector,
    pub poly: TrigPolynomial,
}

#[derive(Clone, Debug)]
pub struct CosetDecomposition {
    pub lattice: Lattice,
    pub parts: Vec<CosetPart>,
    pub certificate: Option<SeparatingVector>,
}

impl CosetDecomposition {
    pub fn new(lattice: Lattice, parts: Vec<CosetPart>) -> Result<Self, DecomposeError> {
        for p in &parts {
            if p.theta.dim() != lattice.dim() {
                return Err(DecomposeError::Dimension(p.theta.dim(), lattice.dim()));
            }
            for (w, _) in p.poly.terms() {
                if w.dim() != lattice.dim() {
                    return Err(DecomposeError::Dimension(w.dim(), lattice.dim()));
                }
            }
        }
        CosetSystem::new(lattice.clone(), parts.iter().map(|p| p.theta.clone()).collect())?;
        Ok(CosetDecomposition {
            lattice,
            parts,
            certificate: None,
        })
    }

    pub fn thetas(&self) -> Vec<ExactVector> {
        self.parts.iter().map(|p| p.theta.clone()).collect()
    }

    /// Attaches a separating vector for the offsets.
    pub fn certify(mut self) -> Result<Self, DecomposeError> {
        self.certificate = Some(find_separating_vector(&self.lattice, &self.thetas())?);
        Ok(self)
    }

    pub fn to_wire(&self) -> DecompositionWire {
        DecompositionWire {
            lattice: self.lattice.to_wire(),
            parts: self
                .parts
                .iter()
                .map(|p| PartWire {
                    theta: vector_wire(&p.theta),
                    poly: PolyWire {
                        terms: p
                            .poly
                            .terms()
                            .iter()
                            .map(|(w, c)| TermWire {
                                freq: vector_wire(w),
                                re: c.re,
                                im: c.im,
                            })
                            .collect(),
                    },
                })
                .collect(),
            certificate: self.certificate.as_ref().map(|c| c.m.clone()),
        }
    }

    pub fn from_wire(w: &DecompositionWire) -> Result<Self, DecomposeError> {
        let lattice = Lattice::from_wire(&w.lattice)?;
        let mut parts = Vec::with_capacity(w.parts.len());
        for p in &w.parts {
            let theta = decode_vectors(std::slice::from_ref(&p.theta))?.remove(0);
            let freqs: Vec<VectorWire> = p.poly.terms.iter().map(|t| t.freq.clone()).collect();
            let freqs = decode_vectors(&freqs)?;
            let terms = freqs
                .into_iter()
                .zip(&p.poly.terms)
                .map(|(f, t)| (f, Complex64::new(t.re, t.im)))
                .collect();
            parts.push(CosetPart {
                theta,
                poly: TrigPolynomial::new(terms)?,
            });
        }
        let mut d = CosetDecomposition::new(lattice, parts)?;
        if let Some(m) = &w.certificate {
            d.certificate = Some(verify_separating(&d.lattice, &d.thetas(), m)?);
        }
        Ok(d)
    }
}

fn vector_wire(v: &ExactVector) -> VectorWire {
    v.entries().iter().map(RealWire::from).collect()
}

/// JSON form `{"lattice": …, "parts": [{"theta": [...], "poly": {"terms":
/// [{"freq": [...], "re": f, "im": f}]}}], "certificate": [m…]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionWire {
    pub lattice: LatticeWire,
    pub parts: Vec<PartWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartWire {
    pub theta: VectorWire,
    pub poly: PolyWire,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyWire {
    pub terms: Vec<TermWire>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermWire {
    pub freq: VectorWire,
    pub re: f64,
    pub im: f64,
}

/// Atoms `Pⱼ(λ) δ_λ` for `λ ∈ (L + θⱼ) ∩ B_R`, dropping vanishing weights.
pub fn synthesize(d: &CosetDecomposition, radius: f64) -> Result<AtomicMeasure, DecomposeError> {
    let thetas = d.thetas();
    CosetSystem::new(d.lattice.clone(), thetas.clone())?;
    let pts = d.lattice.enumerate_in_ball(&thetas, radius, DEFAULT_CAP)?;
    let mut points = Vec::with_capacity(pts.len());
    let mut weights = Vec::with_capacity(pts.len());
    for p in pts {
        let w = d.parts[p.coset].poly.eval(&p.point)?;
        if w.norm() > PRUNE_TOL {
            points.push(p.point);
            weights.push(w);
        }
    }
    Ok(AtomicMeasure::from_atoms(points, weights, radius, "synthesized decomposition")?)
}

/// The weights of `μ` on one coset `L + θ`, keyed by lattice coordinates.
#[derive(Clone, Debug)]
pub struct CosetSequence {
    pub theta: ExactVector,
    pub weights: HashMap<Vec<i64>, Complex64>,
}

impl CosetSequence {
    /// Coordinates in a fixed order.
    pub fn sorted_keys(&self) -> Vec<Vec<i64>> {
        let mut keys: Vec<Vec<i64>> = self.weights.keys().cloned().collect();
        keys.sort();
        keys
    }
}

/// Splits `μ = Σⱼ μⱼ(· − θⱼ)` with `μⱼ(k) = μ(Bk + θⱼ)`. Every atom must lie
/// in exactly one coset; the error lists the atoms that lie in none.
pub fn coset_split(
    mu: &AtomicMeasure,
    l: &Lattice,
    offsets: &[ExactVector],
) -> Result<Vec<CosetSequence>, DecomposeError> {
    let mut bases = vec![l.field()];
    bases.extend(offsets.iter().map(ExactVector::basis));
    if let Some(b) = mu.support().basis() {
        bases.push(b);
    }
    let target = RealBasis::union(&bases)?;
    let thetas: Vec<ExactVector> = offsets.iter().map(|t| t.embed(&target)).collect::<Result<_, _>>()?;
    for t in &thetas {
        if t.dim() != l.dim() {
            return Err(DecomposeError::Dimension(t.dim(), l.dim()));
        }
    }
    let mut out: Vec<CosetSequence> = thetas
        .iter()
        .map(|t| CosetSequence {
            theta: t.clone(),
            weights: HashMap::new(),
        })
        .collect();
    let mut offenders = Vec::new();
    let mut count = 0;
    for (p, _, w) in mu.atoms() {
        let p = p.embed(&target)?;
        let mut found: Option<(usize, Vec<i64>)> = None;
        for (j, t) in thetas.iter().enumerate() {
            if let Some(k) = l.lattice_coords(&p.try_sub(t)?)? {
                if let Some((first, _)) = &found {
                    return Err(DecomposeError::Ambiguous {
                        point: p.to_string(),
                        first: *first,
                        second: j,
                    });
                }
                found = Some((j, k));
            }
        }
        match found {
            Some((j, k)) => {
                out[j].weights.insert(k, w);
            }
            None => {
                count += 1;
                if offenders.len() < MAX_LISTED {
                    offenders.push(p.to_string());
                }
            }
        }
    }
    if count > 0 {
        return Err(DecomposeError::OffCoset { count, listed: offenders });
    }
    Ok(out)
}

/// `ω ∈ L*` with dual coordinates `ν`, exactly.
pub(crate) fn dual_point(dual: &Lattice, nu: &[BigRational]) -> Result<ExactVector, ExactError> {
    let v = ExactVector::from_rationals(dual.field(), nu);
    dual.basis_matrix().try_mul_vec(&v)
}
