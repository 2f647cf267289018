//! Atomic measures `μ = Σ μ(λ) δ_λ` on a truncated uniformly discrete support.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use twofloat::TwoFloat;

use crate::exactnum::{decode_vectors, ExactError, ExactVector, RealBasis, RealWire};
use crate::lattice::{Lattice, LatticeError};
use crate::pointset::{norm, ExactLookup, PointSet, PointSetError};

/// Weights at most this large after a sum are treated as exact zeros.
pub const PRUNE_TOL: f64 = 1e-13;

/// Largest imaginary residue tolerated by the positivity check.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// A fitted growth exponent at most this large counts as bounded.
pub const BOUNDED_EXPONENT: f64 = 0.1;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    PointSet(#[from] PointSetError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("{points} points but {weights} weights")]
    Length { points: usize, weights: usize },
    #[error("zero weight at {0}")]
    ZeroWeight(String),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("Λ_h is empty for h = {0} after edge correction")]
    EmptyAutocorrelation(String),
    #[error("measure is empty")]
    Empty,
}

/// Atoms `μ(λ) δ_λ` with nonzero complex weights, stored parallel to the
/// points of the support.
#[derive(Clone, Debug)]
pub struct AtomicMeasure {
    support: PointSet,
    weights: Vec<Complex64>,
}

impl AtomicMeasure {
    pub fn new(support: PointSet, weights: Vec<Complex64>) -> Result<Self, MeasureError> {
        if support.len() != weights.len() {
            return Err(MeasureError::Length {
                points: support.len(),
                weights: weights.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| w.is_zero() || !w.is_finite()) {
            return Err(MeasureError::ZeroWeight(support.points()[i].to_string()));
        }
        Ok(AtomicMeasure { support, weights })
    }

    pub fn from_atoms(
        points: Vec<ExactVector>,
        weights: Vec<Complex64>,
        r_trunc: f64,
        provenance: &str,
    ) -> Result<Self, MeasureError> {
        AtomicMeasure::new(PointSet::new(points, r_trunc, provenance)?, weights)
    }

    /// Unit atoms on a point set.
    pub fn counting(support: PointSet) -> Self {
        let weights = vec![Complex64::one(); support.len()];
        AtomicMeasure { support, weights }
    }

    /// `Σ_{λ ∈ L ∩ B_R} w(λ) δ_λ`, dropping atoms where `w` vanishes.
    pub fn on_lattice(
        l: &Lattice,
        r: f64,
        w: impl Fn(&[i64], &ExactVector) -> Complex64,
    ) -> Result<Self, MeasureError> {
        let pts = l.enumerate_in_ball(&[], r, crate::lattice::DEFAULT_CAP)?;
        let mut points = Vec::with_capacity(pts.len());
        let mut weights = Vec::with_capacity(pts.len());
        for p in pts {
            let v = w(&p.k, &p.point);
            if v.norm() > PRUNE_TOL {
                points.push(p.point);
                weights.push(v);
            }
        }
        AtomicMeasure::from_atoms(points, weights, r, "lattice measure")
    }

    pub fn support(&self) -> &PointSet {
        &self.support
    }

    pub fn points(&self) -> &[ExactVector] {
        self.support.points()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn r_trunc(&self) -> f64 {
        self.support.r_trunc()
    }

    pub fn weight_at(&self, x: &ExactVector) -> Option<Complex64> {
        self.support.position(x).map(|i| self.weights[i])
    }

    /// Total variation `Σ |μ(λ)|` of the truncation.
    pub fn mass(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).sum()
    }

    /// Atoms in order, with numeric positions.
    pub fn atoms(&self) -> impl Iterator<Item = (&ExactVector, &[f64], Complex64)> {
        self.support
            .points()
            .iter()
            .zip(self.support.numeric())
            .zip(&self.weights)
            .map(|((p, x), w)| (p, x.as_slice(), *w))
    }

    /// `μ(· − t₀)`: atoms move by `t₀`; atoms leaving `B(R_trunc − |t₀|)` are
    /// dropped.
    pub fn shift(&self, t0: &ExactVector) -> Result<Self, MeasureError> {
        self.check_dim(t0)?;
        let r = self.r_trunc() - t0.norm_f64();
        let mut bases: Vec<&Arc<RealBasis>> = vec![t0.basis()];
        bases.extend(self.support.basis());
        let target = RealBasis::union(&bases)?;
        let t0 = t0.embed(&target)?;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (p, w) in self.points().iter().zip(&self.weights) {
            let q = p.embed(&target)?.try_add(&t0)?;
            if q.norm_f64() <= r {
                points.push(q);
                weights.push(*w);
            }
        }
        AtomicMeasure::from_atoms(points, weights, r.max(0.0), self.support.provenance())
    }

    /// `e^{2πi⟨ω,x⟩} μ`.
    pub fn modulate(&self, omega: &ExactVector) -> Result<Self, MeasureError> {
        self.check_dim(omega)?;
        let weights = self
            .points()
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| Ok(w * unit_phase(omega, p)?))
            .collect::<Result<Vec<_>, ExactError>>()?;
        AtomicMeasure::new(self.support.clone(), weights)
    }

    /// `c·μ`; `c = 0` gives an error since the zero measure has no atoms.
    pub fn scale(&self, c: Complex64) -> Result<Self, MeasureError> {
        AtomicMeasure::new(self.support.clone(), self.weights.iter().map(|w| w * c).collect())
    }

    /// `μ + ν` on `B(min R_trunc)`, with cancelled atoms removed.
    pub fn add(&self, other: &AtomicMeasure) -> Result<Self, MeasureError> {
        if !self.is_empty() && !other.is_empty() && self.dim() != other.dim() {
            return Err(MeasureError::Dimension(self.dim(), other.dim()));
        }
        let r = self.r_trunc().min(other.r_trunc());
        let mut bases: Vec<&Arc<RealBasis>> = Vec::new();
        bases.extend(self.support.basis());
        bases.extend(other.support.basis());
        let target = if bases.is_empty() {
            RealBasis::rational()
        } else {
            RealBasis::union(&bases)?
        };
        let mut order: Vec<ExactVector> = Vec::new();
        let mut acc: HashMap<ExactVector, Complex64> = HashMap::new();
        for m in [self, other] {
            for ((p, x), w) in m.points().iter().zip(m.support.numeric()).zip(&m.weights) {
                if norm(x) > r {
                    continue;
                }
                let p = p.embed(&target)?;
                match acc.get_mut(&p) {
                    Some(v) => *v += w,
                    None => {
                        acc.insert(p.clone(), *w);
                        order.push(p);
                    }
                }
            }
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for p in order {
            let w = acc[&p];
            if w.norm() > PRUNE_TOL {
                points.push(p);
                weights.push(w);
            }
        }
        AtomicMeasure::from_atoms(points, weights, r, "sum")
    }

    pub fn transform(&self, t: &Transform) -> Result<Self, MeasureError> {
        match t {
            Transform::Shift(v) => self.shift(v),
            Transform::Modulate(w) => self.modulate(w),
            Transform::Scale(c) => self.scale(*c),
            Transform::Add(m) => self.add(m),
        }
    }

    fn check_dim(&self, v: &ExactVector) -> Result<(), MeasureError> {
        if !self.is_empty() && v.dim() != self.dim() {
            return Err(MeasureError::Dimension(self.dim(), v.dim()));
        }
        Ok(())
    }

    pub fn to_wire(&self) -> MeasureWire {
        MeasureWire {
            atoms: self
                .atoms()
                .map(|(p, _, w)| AtomWire {
                    point: p.entries().iter().map(Into::into).collect(),
                    re: w.re,
                    im: w.im,
                })
                .collect(),
            r_trunc: self.r_trunc(),
        }
    }

    pub fn from_wire(w: &MeasureWire, provenance: &str) -> Result<Self, MeasureError> {
        let pts: Vec<Vec<RealWire>> = w.atoms.iter().map(|a| a.point.clone()).collect();
        let points = decode_vectors(&pts)?;
        let weights = w.atoms.iter().map(|a| Complex64::new(a.re, a.im)).collect();
        AtomicMeasure::from_atoms(points, weights, w.r_trunc, provenance)
    }
}

/// One of the operations under which measures of the form `Σ Pⱼ Σ δ_{L+θⱼ}`
/// are closed.
#[derive(Clone, Debug)]
pub enum Transform {
    Shift(ExactVector),
    Modulate(ExactVector),
    Scale(Complex64),
    Add(AtomicMeasure),
}

pub fn transform(mu: &AtomicMeasure, t: &Transform) -> Result<AtomicMeasure, MeasureError> {
    mu.transform(t)
}

/// JSON form `{"atoms": [{"point": [...], "re": f, "im": f}], "R_trunc": f}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureWire {
    pub atoms: Vec<AtomWire>,
    #[serde(rename = "R_trunc")]
    pub r_trunc: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomWire {
    pub point: Vec<RealWire>,
    pub re: f64,
    pub im: f64,
}

/// `⟨ω, x⟩ mod 1` in `[0, 1)`: exact when the inner product can be formed
/// exactly, otherwise in double-double.
pub fn phase_fraction(omega: &ExactVector, x: &ExactVector) -> Result<PhaseFraction, ExactError> {
    if omega.dim() != x.dim() {
        return Err(ExactError::DimensionMismatch(omega.dim(), x.dim()));
    }
    if omega.is_rational() || x.is_rational() {
        let (q, v) = if omega.is_rational() { (omega, x) } else { (x, omega) };
        let mut d = crate::exactnum::ExactReal::zero(v.basis());
        for (a, b) in q.entries().iter().zip(v.entries()) {
            d = d.try_add(&b.scale(a.rational_part()))?;
        }
        return Ok(reduce_phase(&d));
    }
    let target = RealBasis::union(&[omega.basis(), x.basis()])?;
    if target.has_table() {
        let d = omega.embed(&target)?.try_dot(&x.embed(&target)?)?;
        return Ok(reduce_phase(&d));
    }
    let mut acc = TwoFloat::from(0.0);
    for (a, b) in omega.entries().iter().zip(x.entries()) {
        acc += a.to_twofloat() * b.to_twofloat();
    }
    Ok(PhaseFraction::Real(wrap(acc)))
}

fn reduce_phase(d: &crate::exactnum::ExactReal) -> PhaseFraction {
    if d.is_rational() {
        let q = d.rational_part();
        return PhaseFraction::Rational(q - BigRational::from_integer(q.floor().to_integer()));
    }
    let (frac, _) = d.reduce_mod_one();
    PhaseFraction::Real(wrap(frac.to_twofloat()))
}

fn wrap(x: TwoFloat) -> f64 {
    let f = x - x.floor();
    let v = f64::from(f);
    if v >= 1.0 {
        0.0
    } else {
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PhaseFraction {
    Rational(BigRational),
    Real(f64),
}

impl PhaseFraction {
    /// `e^{2πi·frac}`, exact at multiples of `1/4`.
    pub fn cis(&self) -> Complex64 {
        match self {
            PhaseFraction::Rational(q) => {
                let four = q * BigRational::from_integer(4.into());
                if four.is_integer() {
                    return match num_traits::ToPrimitive::to_i64(&four.to_integer()).unwrap_or(0) {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    };
                }
                let f = crate::exactnum::rational_to_twofloat(q);
                Complex64::from_polar(1.0, 2.0 * PI * f64::from(f))
            }
            PhaseFraction::Real(f) => Complex64::from_polar(1.0, 2.0 * PI * f),
        }
    }
}

/// `e^{2πi·x}` with `x` reduced mod 1 exactly before rounding.
pub fn cis_exact(x: &crate::exactnum::ExactReal) -> Complex64 {
    reduce_phase(x).cis()
}

/// `e^{2πi⟨ω,x⟩}` with the phase reduced mod 1 before rounding.
pub fn unit_phase(omega: &ExactVector, x: &ExactVector) -> Result<Complex64, ExactError> {
    Ok(phase_fraction(omega, x)?.cis())
}

/// `μ_h = Σ_{λ ∈ Λ_h} μ(λ) conj(μ(λ+h)) δ_λ` on `B(R_trunc − |h|)`.
pub fn autocorrelation_measure(mu: &AtomicMeasure, h: &ExactVector) -> Result<AtomicMeasure, MeasureError> {
    if mu.is_empty() {
        return Err(MeasureError::Empty);
    }
    mu.check_dim(h)?;
    let r = (mu.r_trunc() - h.norm_f64()).max(0.0);
    let lookup = ExactLookup::new(&mu.support, h)?;
    let mut keep = Vec::new();
    let mut weights = Vec::new();
    for (i, x) in mu.support.numeric().iter().enumerate() {
        if norm(x) > r * (1.0 + 1e-12) {
            continue;
        }
        if let Some(j) = lookup.shifted_index(i) {
            keep.push(i);
            weights.push(mu.weights[i] * mu.weights[j].conj());
        }
    }
    if keep.is_empty() {
        return Err(MeasureError::EmptyAutocorrelation(h.to_string()));
    }
    let support = mu.support.subset(&keep, r, format!("Λ_h, h = {h}"));
    AtomicMeasure::new(support, weights)
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub is_positive: bool,
    pub sup_weight: f64,
    /// `(C, N)` from the least-squares fit `log|μ(λ)| ≈ log C + N log(1+|λ|)`.
    pub growth_fit: (f64, f64),
    pub bounded: bool,
    pub atoms: usize,
}

pub fn validate(mu: &AtomicMeasure) -> ValidationReport {
    let is_positive = mu.weights.iter().all(|w| w.re >= 0.0 && w.im.abs() <= POSITIVITY_TOL);
    let sup_weight = mu.weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let xs: Vec<f64> = mu.support.numeric().iter().map(|x| (1.0 + norm(x)).ln()).collect();
    let ys: Vec<f64> = mu.weights.iter().map(|w| w.norm().ln()).collect();
    let (a, n) = least_squares(&xs, &ys);
    ValidationReport {
        is_positive,
        sup_weight,
        growth_fit: (a.exp(), n),
        bounded: n <= BOUNDED_EXPONENT,
        atoms: mu.len(),
    }
}

/// Intercept and slope of the least-squares line; slope 0 when `x` is
/// constant.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let k = x.len() as f64;
    if x.is_empty() {
        return (0.0, 0.0);
    }
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 1e-300 {
        return (my, 0.0);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
