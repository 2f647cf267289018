use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

use super::{ExactError, RealBasis};

/// A real number `Σ qᵢ βᵢ` with rational coefficients over a declared basis.
#[derive(Clone)]
pub struct ExactReal {
    basis: Arc<RealBasis>,
    coeffs: Vec<BigRational>,
}

impl ExactReal {
    pub fn zero(basis: &Arc<RealBasis>) -> Self {
        ExactReal {
            basis: basis.clone(),
            coeffs: vec![BigRational::zero(); basis.dim()],
        }
    }

    pub fn from_rational(basis: &Arc<RealBasis>, q: BigRational) -> Self {
        let mut x = Self::zero(basis);
        x.coeffs[0] = q;
        x
    }

    pub fn from_integer(basis: &Arc<RealBasis>, n: i64) -> Self {
        Self::from_rational(basis, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(basis: &Arc<RealBasis>, num: i64, den: i64) -> Self {
        Self::from_rational(basis, ratio(num, den))
    }

    /// The generator with index `i` (coefficient 1, all others 0).
    pub fn generator(basis: &Arc<RealBasis>, i: usize) -> Self {
        let mut x = Self::zero(basis);
        x.coeffs[i] = BigRational::one();
        x
    }

    /// Generator looked up by tag, e.g. `"sqrt2"`.
    pub fn tagged(basis: &Arc<RealBasis>, tag: &str) -> Result<Self, ExactError> {
        let i = basis
            .index_of(tag)
            .ok_or_else(|| ExactError::UnknownTag(tag.to_string()))?;
        Ok(Self::generator(basis, i))
    }

    pub fn from_coeffs(
        basis: &Arc<RealBasis>,
        coeffs: Vec<BigRational>,
    ) -> Result<Self, ExactError> {
        if coeffs.len() != basis.dim() {
            return Err(ExactError::DimensionMismatch(coeffs.len(), basis.dim()));
        }
        Ok(ExactReal {
            basis: basis.clone(),
            coeffs,
        })
    }

    pub fn basis(&self) -> &Arc<RealBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    fn check_basis(&self, other: &ExactReal) -> Result<(), ExactError> {
        if self.basis.same_as(&other.basis) {
            Ok(())
        } else {
            Err(ExactError::BasisMismatch {
                left: self.basis.tags().to_vec(),
                right: other.basis.tags().to_vec(),
            })
        }
    }

    pub fn try_add(&self, other: &ExactReal) -> Result<Self, ExactError> {
        self.check_basis(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &ExactReal) -> Result<Self, ExactError> {
        self.check_basis(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(
        &self,
        other: &ExactReal,
        f: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Self {
        ExactReal {
            basis: self.basis.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        ExactReal {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact product. Succeeds without a product table when either factor
    /// is rational.
    pub fn try_mul(&self, other: &ExactReal) -> Result<Self, ExactError> {
        self.check_basis(other)?;
        if self.is_rational() {
            return Ok(other.scale(&self.coeffs[0]));
        }
        if other.is_rational() {
            return Ok(self.scale(&other.coeffs[0]));
        }
        let table = self
            .basis
            .table()
            .ok_or_else(|| ExactError::NoMultiplicationTable(self.basis.tags().to_vec()))?;
        let g = self.basis.dim();
        let mut out = vec![BigRational::zero(); g];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, t) in table[i][j].iter().enumerate() {
                    if !t.is_zero() {
                        out[k] += &ab * t;
                    }
                }
            }
        }
        Ok(ExactReal {
            basis: self.basis.clone(),
            coeffs: out,
        })
    }

    /// Exact multiplicative inverse. Irrational values need a product table;
    /// the inverse is found by solving `M_x · y = e₀` over ℚ.
    pub fn try_inv(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(Self::from_rational(&self.basis, self.coeffs[0].recip()));
        }
        let table = self
            .basis
            .table()
            .ok_or_else(|| ExactError::NoMultiplicationTable(self.basis.tags().to_vec()))?;
        let g = self.basis.dim();
        // column j of M is x·β_j
        let mut m = vec![vec![BigRational::zero(); g]; g];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for j in 0..g {
                for (k, t) in table[i][j].iter().enumerate() {
                    if !t.is_zero() {
                        m[k][j] += a * t;
                    }
                }
            }
        }
        let mut rhs = vec![BigRational::zero(); g];
        rhs[0] = BigRational::one();
        let y = crate::linalg::solve_rational(m, rhs).ok_or(ExactError::DivisionByZero)?;
        Ok(ExactReal {
            basis: self.basis.clone(),
            coeffs: y,
        })
    }

    pub fn try_div(&self, other: &ExactReal) -> Result<Self, ExactError> {
        self.try_mul(&other.try_inv()?)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.coeffs[0].is_integer()
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.coeffs[0]
    }

    /// The value with its rational coefficient removed.
    pub fn irrational_part(&self) -> Self {
        let mut x = self.clone();
        x.coeffs[0] = BigRational::zero();
        x
    }

    /// Subtracts `floor` of the rational coefficient: the result has rational
    /// part in `[0, 1)` and differs from `self` by an integer.
    pub fn reduce_mod_one(&self) -> (Self, BigInt) {
        let fl = self.coeffs[0].floor().to_integer();
        let mut x = self.clone();
        x.coeffs[0] -= BigRational::from_integer(fl.clone());
        (x, fl)
    }

    /// Re-expresses the value over a basis that contains all generators with
    /// nonzero coefficient.
    pub fn embed(&self, target: &Arc<RealBasis>) -> Result<Self, ExactError> {
        if self.basis.same_as(target) {
            return Ok(self.clone());
        }
        let mut out = Self::zero(target);
        for (tag, c) in self.basis.tags().iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let j = target
                .index_of(tag)
                .ok_or_else(|| ExactError::UnknownTag(tag.clone()))?;
            out.coeffs[j] = c.clone();
        }
        Ok(out)
    }

    pub fn to_twofloat(&self) -> TwoFloat {
        let mut acc = TwoFloat::from(0.0);
        for (c, v) in self.coeffs.iter().zip(self.basis.values()) {
            if c.is_zero() {
                continue;
            }
            acc += rational_to_twofloat(c) * *v;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        let t = self.to_twofloat();
        t.hi() + t.lo()
    }

    /// Exact sign: zero iff every coefficient vanishes; otherwise the sign of
    /// the high-precision value.
    pub fn signum(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        let t = self.to_twofloat();
        if t.hi() != 0.0 {
            return t.hi().partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        }
        log::warn!("nonzero exact value {self} evaluates to 0 in double-double precision");
        t.lo().partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }

    pub fn try_cmp(&self, other: &ExactReal) -> Result<Ordering, ExactError> {
        Ok(self.try_sub(other)?.signum())
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }
}

pub(crate) fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn bigint_to_twofloat(n: &BigInt) -> TwoFloat {
    let hi = n.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() {
        return TwoFloat::from(hi);
    }
    // hi is integer valued, so the remainder is exact
    let rem = n - BigInt::from_f64(hi).unwrap_or_else(BigInt::zero);
    TwoFloat::new_add(hi, rem.to_f64().unwrap_or(0.0))
}

pub fn rational_to_twofloat(q: &BigRational) -> TwoFloat {
    if q.is_integer() {
        return bigint_to_twofloat(q.numer());
    }
    bigint_to_twofloat(q.numer()) / bigint_to_twofloat(q.denom())
}

impl PartialEq for ExactReal {
    fn eq(&self, other: &Self) -> bool {
        self.basis.same_as(&other.basis) && self.coeffs == other.coeffs
    }
}

impl Eq for ExactReal {}

impl Hash for ExactReal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl fmt::Debug for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, tag) in self.coeffs.iter().zip(self.basis.tags()) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if tag == "1" {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{tag}")?;
            } else {
                write!(f, "{mag}*{tag}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Neg for &ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        ExactReal {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        -&self
    }
}

/// Panics on basis mismatch; use [`ExactReal::try_add`] at API boundaries.
impl Add for &ExactReal {
    type Output = ExactReal;
    fn add(self, rhs: &ExactReal) -> ExactReal {
        self.try_add(rhs).expect("ExactReal addition across bases")
    }
}

/// Panics on basis mismatch; use [`ExactReal::try_sub`] at API boundaries.
impl Sub for &ExactReal {
    type Output = ExactReal;
    fn sub(self, rhs: &ExactReal) -> ExactReal {
        self.try_sub(rhs).expect("ExactReal subtraction across bases")
    }
}
