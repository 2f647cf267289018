//! Full-rank lattices `L = B·ℤⁿ` with exact basis matrices.

mod enumerate;
mod refine;

pub(crate) use enumerate::{ball_line_interval, norm_sq_twofloat};
pub use enumerate::{enumerate_region, BallRegion, LatticePoint, Region, DEFAULT_CAP};
pub use refine::{independence_witness, refine_lattice, Refinement};

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use twofloat::TwoFloat;

use crate::exactnum::{decode_vectors, ExactError, ExactReal, ExactVector, RealBasis, RealWire};
use crate::linalg::{ExactMatrix, NumMatrix};

/// Coordinate tolerance for membership tests on numeric-fallback lattices.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("basis matrix is singular (|det| = {0:e})")]
    Singular(f64),
    #[error("basis matrix must be square and nonempty, got {0}×{1}")]
    Shape(usize, usize),
    #[error("enumeration exceeds the cap of {cap} points")]
    CapExceeded { cap: usize },
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("offsets {0} and {1} differ by a lattice vector")]
    DuplicateCoset(usize, usize),
    #[error("offset {index} has dimension {got}, lattice has {want}")]
    OffsetDimension { index: usize, got: usize, want: usize },
    #[error("cannot parse lattice `{0}`")]
    Spec(String),
}

/// Determinant, exact when elimination over the basis field is possible.
#[derive(Clone, Debug)]
pub struct LatticeDet {
    pub exact: Option<ExactReal>,
    pub value: TwoFloat,
}

impl LatticeDet {
    pub fn to_f64(&self) -> f64 {
        self.value.hi() + self.value.lo()
    }
}

/// Coordinates of a point with respect to a lattice basis.
#[derive(Clone, Debug)]
pub enum Coords {
    Exact(ExactVector),
    Numeric(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct Lattice {
    basis: ExactMatrix,
    inverse: Option<ExactMatrix>,
    num_inverse: NumMatrix,
    det: LatticeDet,
    inexact: bool,
}

impl Lattice {
    /// Lattice whose generators are the columns of `basis`.
    pub fn new(basis: ExactMatrix) -> Result<Self, LatticeError> {
        Self::build(basis, false)
    }

    fn build(basis: ExactMatrix, inexact: bool) -> Result<Self, LatticeError> {
        let n = basis.nrows();
        if n == 0 || basis.ncols() != n {
            return Err(LatticeError::Shape(n, basis.ncols()));
        }
        let num = basis.to_twofloat();
        let (det, inverse) = match basis.try_det() {
            Ok(d) => {
                if d.is_zero() {
                    return Err(LatticeError::Singular(0.0));
                }
                let inv = basis.try_inverse()?;
                let d = d.abs();
                let value = d.to_twofloat();
                (
                    LatticeDet {
                        exact: Some(d),
                        value,
                    },
                    Some(inv),
                )
            }
            Err(ExactError::NoMultiplicationTable(_)) => {
                let value = num.det().abs();
                if f64::from(value) <= 1e-9 {
                    return Err(LatticeError::Singular(value.into()));
                }
                (LatticeDet { exact: None, value }, None)
            }
            Err(e) => return Err(e.into()),
        };
        let num_inverse = match &inverse {
            Some(inv) => inv.to_twofloat(),
            None => num.inverse().ok_or(LatticeError::Singular(0.0))?,
        };
        Ok(Lattice {
            basis,
            inverse,
            num_inverse,
            det,
            inexact,
        })
    }

    pub fn from_columns(cols: &[ExactVector]) -> Result<Self, LatticeError> {
        Self::new(ExactMatrix::from_columns(cols)?)
    }

    /// `ℤⁿ`.
    pub fn integer(n: usize) -> Self {
        Self::new(ExactMatrix::identity(&RealBasis::rational(), n)).expect("identity")
    }

    /// Diagonal lattice `diag(d₁,…,dₙ)·ℤⁿ`.
    pub fn diagonal(diag: &[BigRational]) -> Result<Self, LatticeError> {
        let b = RealBasis::rational();
        let n = diag.len();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            ExactReal::from_rational(&b, diag[i].clone())
                        } else {
                            ExactReal::zero(&b)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(ExactMatrix::from_rows(rows)?)
    }

    /// The golden projection lattice with generators `(1,1)` and `(τ,1−τ)`.
    pub fn fibonacci() -> Self {
        let g = RealBasis::golden();
        let one = ExactReal::from_integer(&g, 1);
        let tau = ExactReal::tagged(&g, "tau").expect("tau");
        let rows = vec![vec![one.clone(), tau.clone()], vec![one.clone(), &one - &tau]];
        Self::new(ExactMatrix::from_rows(rows).expect("2x2")).expect("fibonacci lattice")
    }

    /// Parses `Zn` (`Z`, `Z2`, …), `diag:2,3` or `fib`.
    pub fn from_spec(spec: &str) -> Result<Self, LatticeError> {
        let bad = || LatticeError::Spec(spec.to_string());
        let s = spec.trim();
        if s == "fib" {
            return Ok(Self::fibonacci());
        }
        if let Some(rest) = s.strip_prefix("diag:") {
            let d = rest
                .split(',')
                .map(crate::exactnum::parse_rational)
                .collect::<Result<Vec<_>, _>>()?;
            return Self::diagonal(&d);
        }
        if let Some(rest) = s.strip_prefix('Z') {
            let n = if rest.is_empty() {
                1
            } else {
                rest.parse::<usize>().map_err(|_| bad())?
            };
            if n == 0 {
                return Err(bad());
            }
            return Ok(Self::integer(n));
        }
        Err(bad())
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn field(&self) -> &Arc<RealBasis> {
        self.basis.basis()
    }

    pub fn basis_matrix(&self) -> &ExactMatrix {
        &self.basis
    }

    pub fn generators(&self) -> Vec<ExactVector> {
        self.basis.columns()
    }

    pub fn det(&self) -> &LatticeDet {
        &self.det
    }

    /// Whether the entries are approximations (numeric dual of a lattice
    /// over a table-less basis).
    pub fn is_inexact(&self) -> bool {
        self.inexact
    }

    pub fn exact_inverse(&self) -> Option<&ExactMatrix> {
        self.inverse.as_ref()
    }

    pub fn numeric_inverse(&self) -> &NumMatrix {
        &self.num_inverse
    }

    /// `B·k`.
    pub fn point(&self, k: &[i64]) -> ExactVector {
        self.basis.mul_int(k)
    }

    /// Dual lattice: basis `B⁻ᵀ`. Falls back to a rational approximation of
    /// the numeric inverse when no exact inverse is available.
    pub fn dual(&self) -> Result<Lattice, LatticeError> {
        match &self.inverse {
            Some(inv) => Self::build(inv.transpose(), self.inexact),
            None => Self::build(self.num_inverse.to_exact().transpose(), true),
        }
    }

    /// `q·L` for a nonzero rational `q`.
    pub fn scaled(&self, q: &BigRational) -> Result<Lattice, LatticeError> {
        Self::build(self.basis.scale(q), self.inexact)
    }

    /// Coordinates `B⁻¹x`, exact when possible.
    pub fn coords(&self, x: &ExactVector) -> Result<Coords, LatticeError> {
        if x.dim() != self.dim() {
            return Err(ExactError::DimensionMismatch(x.dim(), self.dim()).into());
        }
        if let Some(inv) = &self.inverse {
            let target = RealBasis::union(&[inv.basis(), x.basis()])?;
            let inv = inv.embed(&target)?;
            match inv.try_mul_vec(&x.embed(&target)?) {
                Ok(c) => return Ok(Coords::Exact(c)),
                Err(ExactError::NoMultiplicationTable(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(Coords::Numeric(self.numeric_coords(&x.to_f64())))
    }

    pub fn numeric_coords(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = TwoFloat::from(0.0);
                for (j, xj) in x.iter().enumerate() {
                    acc += self.num_inverse.get(i, j) * *xj;
                }
                f64::from(acc)
            })
            .collect()
    }

    /// Integer coordinates of `x` if it is a lattice vector.
    pub fn lattice_coords(&self, x: &ExactVector) -> Result<Option<Vec<i64>>, LatticeError> {
        Ok(match self.coords(x)? {
            Coords::Exact(c) => {
                if c.is_integral() {
                    Some(
                        c.entries()
                            .iter()
                            .map(|e| e.rational_part().to_integer().to_i64().unwrap_or(i64::MAX))
                            .collect(),
                    )
                } else {
                    None
                }
            }
            Coords::Numeric(c) => {
                if c.iter().all(|v| (v - v.round()).abs() < MEMBERSHIP_TOL) {
                    Some(c.iter().map(|v| v.round() as i64).collect())
                } else {
                    None
                }
            }
        })
    }

    pub fn contains(&self, x: &ExactVector) -> Result<bool, LatticeError> {
        Ok(self.lattice_coords(x)?.is_some())
    }

    /// Canonical representative of `θ + L`: exact L-coordinates have their
    /// rational parts reduced to `[0,1)`. Returns the representative and the
    /// integer shift removed.
    pub fn reduce(&self, theta: &ExactVector) -> Result<(ExactVector, Vec<i64>), LatticeError> {
        match self.coords(theta)? {
            Coords::Exact(c) => {
                let shift: Vec<i64> = c
                    .entries()
                    .iter()
                    .map(|x| x.reduce_mod_one().1.to_i64().unwrap_or(0))
                    .collect();
                let rep = theta.embed(&RealBasis::union(&[theta.basis(), self.field()])?)?;
                let lat = self.point(&shift).embed(rep.basis())?;
                Ok((rep.try_sub(&lat)?, shift))
            }
            Coords::Numeric(c) => {
                let shift: Vec<i64> = c.iter().map(|v| (v + MEMBERSHIP_TOL).floor() as i64).collect();
                let target = RealBasis::union(&[theta.basis(), self.field()])?;
                let rep = theta.embed(&target)?;
                let lat = self.point(&shift).embed(&target)?;
                Ok((rep.try_sub(&lat)?, shift))
            }
        }
    }

    /// Ball enumeration of `∪ⱼ (L + θⱼ)`; `offsets` empty means the origin
    /// coset only.
    pub fn enumerate_in_ball(
        &self,
        offsets: &[ExactVector],
        radius: f64,
        cap: usize,
    ) -> Result<Vec<LatticePoint>, LatticeError> {
        if !(radius > 0.0) {
            return Err(LatticeError::BadRadius(radius));
        }
        let origin = [ExactVector::zero(self.field(), self.dim())];
        let offsets = if offsets.is_empty() { &origin[..] } else { offsets };
        enumerate_region(self, offsets, &BallRegion::new(radius), cap)
    }

    pub fn to_wire(&self) -> LatticeWire {
        LatticeWire {
            basis: self
                .basis
                .columns()
                .iter()
                .map(|c| c.entries().iter().map(RealWire::from).collect())
                .collect(),
        }
    }

    pub fn from_wire(w: &LatticeWire) -> Result<Self, LatticeError> {
        Self::from_columns(&decode_vectors(&w.basis)?)
    }
}

impl PartialEq for Lattice {
    /// Equal basis matrices (not merely equal point sets).
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis
    }
}

/// JSON form `{"basis": [[ExactReal,…],…]}`; each inner list is a generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeWire {
    pub basis: Vec<Vec<RealWire>>,
}

/// Lattice plus coset offsets that are pairwise inequivalent mod the lattice.
#[derive(Clone, Debug)]
pub struct CosetSystem {
    lattice: Lattice,
    offsets: Vec<ExactVector>,
}

impl CosetSystem {
    pub fn new(lattice: Lattice, offsets: Vec<ExactVector>) -> Result<Self, LatticeError> {
        for (i, t) in offsets.iter().enumerate() {
            if t.dim() != lattice.dim() {
                return Err(LatticeError::OffsetDimension {
                    index: i,
                    got: t.dim(),
                    want: lattice.dim(),
                });
            }
        }
        for i in 0..offsets.len() {
            for j in 0..i {
                let target = RealBasis::union(&[offsets[i].basis(), offsets[j].basis()])?;
                let d = offsets[i].embed(&target)?.try_sub(&offsets[j].embed(&target)?)?;
                if lattice.contains(&d)? {
                    return Err(LatticeError::DuplicateCoset(j, i));
                }
            }
        }
        Ok(CosetSystem { lattice, offsets })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn offsets(&self) -> &[ExactVector] {
        &self.offsets
    }

    /// Offsets replaced by their canonical representatives.
    pub fn canonical(&self) -> Result<Self, LatticeError> {
        let offsets = self
            .offsets
            .iter()
            .map(|t| self.lattice.reduce(t).map(|(r, _)| r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CosetSystem {
            lattice: self.lattice.clone(),
            offsets,
        })
    }
}
