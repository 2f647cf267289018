use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{ExactError, ExactReal, RealBasis};

/// A point of ℝⁿ with [`ExactReal`] coordinates over one shared basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactVector(Vec<ExactReal>);

impl ExactVector {
    pub fn new(entries: Vec<ExactReal>) -> Result<Self, ExactError> {
        let first = entries
            .first()
            .ok_or_else(|| ExactError::Parse {
                input: String::new(),
                reason: "vector must have dimension ≥ 1".into(),
            })?
            .basis()
            .clone();
        for e in &entries[1..] {
            if !e.basis().same_as(&first) {
                return Err(ExactError::BasisMismatch {
                    left: first.tags().to_vec(),
                    right: e.basis().tags().to_vec(),
                });
            }
        }
        Ok(ExactVector(entries))
    }

    pub fn zero(basis: &Arc<RealBasis>, dim: usize) -> Self {
        ExactVector(vec![ExactReal::zero(basis); dim])
    }

    pub fn from_integers(basis: &Arc<RealBasis>, ints: &[i64]) -> Self {
        ExactVector(ints.iter().map(|&k| ExactReal::from_integer(basis, k)).collect())
    }

    pub fn from_rationals(basis: &Arc<RealBasis>, qs: &[BigRational]) -> Self {
        ExactVector(
            qs.iter()
                .map(|q| ExactReal::from_rational(basis, q.clone()))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn basis(&self) -> &Arc<RealBasis> {
        self.0[0].basis()
    }

    pub fn entries(&self) -> &[ExactReal] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<ExactReal> {
        self.0
    }

    pub fn get(&self, i: usize) -> &ExactReal {
        &self.0[i]
    }

    fn check(&self, other: &ExactVector) -> Result<(), ExactError> {
        if self.dim() != other.dim() {
            return Err(ExactError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &ExactVector) -> Result<Self, ExactError> {
        self.check(other)?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.try_add(b))
            .collect::<Result<_, _>>()
            .map(ExactVector)
    }

    pub fn try_sub(&self, other: &ExactVector) -> Result<Self, ExactError> {
        self.check(other)?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.try_sub(b))
            .collect::<Result<_, _>>()
            .map(ExactVector)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        ExactVector(self.0.iter().map(|x| x.scale(q)).collect())
    }

    pub fn neg(&self) -> Self {
        ExactVector(self.0.iter().map(|x| -x).collect())
    }

    /// `⟨self, m⟩` for an integer vector; never needs a product table.
    pub fn dot_int(&self, m: &[i64]) -> Result<ExactReal, ExactError> {
        if m.len() != self.dim() {
            return Err(ExactError::DimensionMismatch(self.dim(), m.len()));
        }
        let mut acc = ExactReal::zero(self.basis());
        for (x, &k) in self.0.iter().zip(m) {
            if k != 0 {
                acc = acc.try_add(&x.scale(&BigRational::from_integer(BigInt::from(k))))?;
            }
        }
        Ok(acc)
    }

    /// `⟨self, other⟩`; needs a product table unless one side is rational.
    pub fn try_dot(&self, other: &ExactVector) -> Result<ExactReal, ExactError> {
        self.check(other)?;
        let mut acc = ExactReal::zero(self.basis());
        for (a, b) in self.0.iter().zip(&other.0) {
            acc = acc.try_add(&a.try_mul(b)?)?;
        }
        Ok(acc)
    }

    pub fn is_rational(&self) -> bool {
        self.0.iter().all(ExactReal::is_rational)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(ExactReal::is_integer)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(ExactReal::is_zero)
    }

    pub fn embed(&self, target: &Arc<RealBasis>) -> Result<Self, ExactError> {
        self.0
            .iter()
            .map(|x| x.embed(target))
            .collect::<Result<_, _>>()
            .map(ExactVector)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(ExactReal::to_f64).collect()
    }

    pub fn norm_f64(&self) -> f64 {
        self.to_f64().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Numeric lexicographic order with an exact tie-break, used to make
    /// outputs deterministic.
    pub fn cmp_numeric(&self, other: &ExactVector) -> Ordering {
        let a = self.to_f64();
        let b = other.to_f64();
        for (x, y) in a.iter().zip(&b) {
            match x.partial_cmp(y) {
                Some(Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        for (x, y) in self.0.iter().zip(&other.0) {
            match x.try_cmp(y) {
                Ok(Ordering::Equal) | Err(_) => continue,
                Ok(o) => return o,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Debug for ExactVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExactVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}
