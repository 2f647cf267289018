//! Small dense linear algebra: exact over ℚ and over a tabled basis, and a
//! double-double fallback for bases without a product table.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use twofloat::TwoFloat;

use crate::exactnum::{ExactError, ExactReal, ExactVector, RealBasis};

/// Solves `m · x = rhs` over ℚ; `None` when `m` is singular.
pub fn solve_rational(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].recip();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
            let t = &f * &rhs[col];
            rhs[r] -= t;
        }
    }
    Some((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// Row-reduced echelon form over ℚ. Returns the reduced rows (zero rows
/// dropped) and the pivot column of each.
pub fn rref(mut rows: Vec<Vec<BigRational>>) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in c..ncols {
                    let t = &f * &rows[r][k];
                    rows[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Square or rectangular matrix of exact reals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactReal>,
}

impl ExactMatrix {
    pub fn from_rows(rows: Vec<Vec<ExactReal>>) -> Result<Self, ExactError> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if nr == 0 || nc == 0 {
            return Err(ExactError::DimensionMismatch(nr, nc));
        }
        let basis = rows[0][0].basis().clone();
        let mut data = Vec::with_capacity(nr * nc);
        for row in rows {
            if row.len() != nc {
                return Err(ExactError::DimensionMismatch(row.len(), nc));
            }
            for x in row {
                data.push(x.embed(&basis)?);
            }
        }
        Ok(ExactMatrix {
            rows: nr,
            cols: nc,
            data,
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[ExactVector]) -> Result<Self, ExactError> {
        let n = cols.first().map_or(0, ExactVector::dim);
        let rows = (0..n)
            .map(|i| cols.iter().map(|c| c.get(i).clone()).collect())
            .collect();
        Self::from_rows(rows)
    }

    pub fn identity(basis: &Arc<RealBasis>, n: usize) -> Self {
        let mut data = vec![ExactReal::zero(basis); n * n];
        for i in 0..n {
            data[i * n + i] = ExactReal::from_integer(basis, 1);
        }
        ExactMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn basis(&self) -> &Arc<RealBasis> {
        self.data[0].basis()
    }

    pub fn get(&self, i: usize, j: usize) -> &ExactReal {
        &self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> ExactVector {
        ExactVector::new((0..self.rows).map(|i| self.get(i, j).clone()).collect())
            .expect("shared basis")
    }

    pub fn columns(&self) -> Vec<ExactVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row(&self, i: usize) -> &[ExactReal] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        ExactMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.scale(q)).collect(),
        }
    }

    pub fn embed(&self, target: &Arc<RealBasis>) -> Result<Self, ExactError> {
        Ok(ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|x| x.embed(target))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn is_rational(&self) -> bool {
        self.data.iter().all(ExactReal::is_rational)
    }

    pub fn try_mul(&self, other: &ExactMatrix) -> Result<ExactMatrix, ExactError> {
        if self.cols != other.rows {
            return Err(ExactError::DimensionMismatch(self.cols, other.rows));
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = ExactReal::zero(self.basis());
                for k in 0..self.cols {
                    acc = acc.try_add(&self.get(i, k).try_mul(other.get(k, j))?)?;
                }
                data.push(acc);
            }
        }
        Ok(ExactMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// `self · v` for an integer vector; never needs a product table.
    pub fn mul_int(&self, k: &[i64]) -> ExactVector {
        let entries = (0..self.rows)
            .map(|i| {
                let mut acc = ExactReal::zero(self.basis());
                for (j, &kj) in k.iter().enumerate() {
                    if kj != 0 {
                        acc = &acc + &self.get(i, j).scale_int(kj);
                    }
                }
                acc
            })
            .collect();
        ExactVector::new(entries).expect("shared basis")
    }

    /// `self · v`; needs a product table unless one side is rational.
    pub fn try_mul_vec(&self, v: &ExactVector) -> Result<ExactVector, ExactError> {
        if v.dim() != self.cols {
            return Err(ExactError::DimensionMismatch(v.dim(), self.cols));
        }
        let v = v.embed(self.basis())?;
        let entries = (0..self.rows)
            .map(|i| {
                let mut acc = ExactReal::zero(self.basis());
                for j in 0..self.cols {
                    acc = acc.try_add(&self.get(i, j).try_mul(v.get(j))?)?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>, ExactError>>()?;
        ExactVector::new(entries)
    }

    /// Exact determinant by Gaussian elimination; needs
    /// exact division, so a product table for irrational entries.
    pub fn try_det(&self) -> Result<ExactReal, ExactError> {
        if self.rows != self.cols {
            return Err(ExactError::DimensionMismatch(self.rows, self.cols));
        }
        let n = self.rows;
        let mut a: Vec<Vec<ExactReal>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut det = ExactReal::from_integer(self.basis(), 1);
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return Ok(ExactReal::zero(self.basis()));
            };
            if piv != col {
                a.swap(col, piv);
                det = -det;
            }
            let inv = a[col][col].try_inv()?;
            det = det.try_mul(&a[col][col])?;
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].try_mul(&inv)?;
                for c in col..n {
                    let t = f.try_mul(&a[col][c])?;
                    a[r][c] = a[r][c].try_sub(&t)?;
                }
            }
        }
        Ok(det)
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn try_inverse(&self) -> Result<ExactMatrix, ExactError> {
        if self.rows != self.cols {
            return Err(ExactError::DimensionMismatch(self.rows, self.cols));
        }
        let n = self.rows;
        let b = self.basis().clone();
        let mut a: Vec<Vec<ExactReal>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut inv: Vec<Vec<ExactReal>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| ExactReal::from_integer(&b, i64::from(i == j)))
                    .collect()
            })
            .collect();
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(ExactError::DivisionByZero)?;
            a.swap(col, piv);
            inv.swap(col, piv);
            let p = a[col][col].try_inv()?;
            for c in 0..n {
                a[col][c] = a[col][c].try_mul(&p)?;
                inv[col][c] = inv[col][c].try_mul(&p)?;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..n {
                    let t = f.try_mul(&a[col][c])?;
                    a[r][c] = a[r][c].try_sub(&t)?;
                    let t = f.try_mul(&inv[col][c])?;
                    inv[r][c] = inv[r][c].try_sub(&t)?;
                }
            }
        }
        ExactMatrix::from_rows(inv)
    }

    pub fn to_twofloat(&self) -> NumMatrix {
        NumMatrix {
            n: self.rows,
            m: self.cols,
            data: self.data.iter().map(ExactReal::to_twofloat).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(ExactReal::to_f64).collect())
            .collect()
    }
}

/// Double-double matrix used when exact elimination is unavailable.
#[derive(Clone, Debug)]
pub struct NumMatrix {
    n: usize,
    m: usize,
    data: Vec<TwoFloat>,
}

impl NumMatrix {
    pub fn get(&self, i: usize, j: usize) -> TwoFloat {
        self.data[i * self.m + j]
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.m).map(|j| f64::from(self.get(i, j))).collect())
            .collect()
    }

    fn rows(&self) -> Vec<Vec<TwoFloat>> {
        (0..self.n)
            .map(|i| (0..self.m).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Determinant by partial-pivoting elimination.
    pub fn det(&self) -> TwoFloat {
        let n = self.n;
        let mut a = self.rows();
        let mut det = TwoFloat::from(1.0);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| {
                    a[x][col]
                        .abs()
                        .partial_cmp(&a[y][col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a[piv][col] == TwoFloat::from(0.0) {
                return TwoFloat::from(0.0);
            }
            if piv != col {
                a.swap(col, piv);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    let t = f * a[col][c];
                    a[r][c] -= t;
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan with partial pivoting; `None` if singular.
    pub fn inverse(&self) -> Option<NumMatrix> {
        let n = self.n;
        let mut a = self.rows();
        let mut inv: Vec<Vec<TwoFloat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| TwoFloat::from(if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| {
                a[x][col]
                    .abs()
                    .partial_cmp(&a[y][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[piv][col] == TwoFloat::from(0.0) {
                return None;
            }
            a.swap(col, piv);
            inv.swap(col, piv);
            let p = a[col][col];
            for c in 0..n {
                a[col][c] /= p;
                inv[col][c] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r][col];
                for c in 0..n {
                    let t = f * a[col][c];
                    a[r][c] -= t;
                    let t = f * inv[col][c];
                    inv[r][c] -= t;
                }
            }
        }
        Some(NumMatrix {
            n,
            m: n,
            data: inv.into_iter().flatten().collect(),
        })
    }

    /// Converts every entry to the exact rational value of its double-double
    /// representation, over the rational basis.
    pub fn to_exact(&self) -> ExactMatrix {
        let b = RealBasis::rational();
        let rows = (0..self.n)
            .map(|i| {
                (0..self.m)
                    .map(|j| ExactReal::from_rational(&b, twofloat_to_rational(self.get(i, j))))
                    .collect()
            })
            .collect();
        ExactMatrix::from_rows(rows).expect("nonempty")
    }
}

pub fn twofloat_to_rational(x: TwoFloat) -> BigRational {
    let hi = BigRational::from_float(x.hi()).unwrap_or_else(BigRational::zero);
    let lo = BigRational::from_float(x.lo()).unwrap_or_else(BigRational::zero);
    hi + lo
}

/// Least common multiple of the denominators.
pub fn lcm_denominators<'a>(qs: impl IntoIterator<Item = &'a BigRational>) -> num_bigint::BigInt {
    use num_integer::Integer;
    qs.into_iter()
        .fold(num_bigint::BigInt::from(1), |acc, q| acc.lcm(q.denom()))
}

/// Largest absolute numerator, a crude size measure for rational data.
pub fn max_abs(qs: &[BigRational]) -> BigRational {
    qs.iter().map(|q| q.abs()).max().unwrap_or_else(BigRational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{parse_real, ratio};

    #[test]
    fn rational_solve_and_rref() {
        let m = vec![
            vec![ratio(2, 1), ratio(1, 1)],
            vec![ratio(1, 1), ratio(3, 1)],
        ];
        let x = solve_rational(m, vec![ratio(3, 1), ratio(5, 1)]).unwrap();
        assert_eq!(x, vec![ratio(4, 5), ratio(7, 5)]);
        let singular = vec![vec![ratio(1, 1), ratio(2, 1)], vec![ratio(2, 1), ratio(4, 1)]];
        assert!(solve_rational(singular.clone(), vec![ratio(1, 1), ratio(1, 1)]).is_none());
        let (r, piv) = rref(singular);
        assert_eq!(r.len(), 1);
        assert_eq!(piv, vec![0]);
    }

    #[test]
    fn golden_matrix_det_and_inverse() {
        let g = RealBasis::golden();
        let e = |s: &str| parse_real(s, &g).unwrap();
        let b = ExactMatrix::from_rows(vec![vec![e("1"), e("tau")], vec![e("1"), e("1-tau")]]).unwrap();
        let det = b.try_det().unwrap();
        assert_eq!(det, e("1-2*tau"));
        let inv = b.try_inverse().unwrap();
        assert_eq!(b.try_mul(&inv).unwrap(), ExactMatrix::identity(&g, 2));
        let num = b.to_twofloat();
        assert!((f64::from(num.det()) + 5f64.sqrt()).abs() < 1e-15);
        let ninv = num.inverse().unwrap();
        assert!((f64::from(ninv.get(0, 0)) - inv.get(0, 0).to_f64()).abs() < 1e-15);
    }
}
