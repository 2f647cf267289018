//! Exact real arithmetic over a declared finite ℚ-basis.

mod basis;
mod parse;
mod real;
mod vector;
mod wire;

pub use basis::{MulTable, RealBasis};
pub use parse::{infer_basis, parse_rational, parse_real, parse_terms, parse_vector};
pub use real::{rational_to_twofloat, ExactReal};
pub use vector::ExactVector;
pub use wire::{decode_vectors, RealWire, VectorWire};

#[cfg(test)]
pub(crate) use real::ratio;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("basis mismatch: {left:?} vs {right:?}")]
    BasisMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },
    #[error("basis {0:?} has no multiplication table; evaluate numerically instead")]
    NoMultiplicationTable(Vec<String>),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("unknown generator tag `{0}`")]
    UnknownTag(String),
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Computes `⟨θ, m⟩` exactly and reports whether it is an integer.
pub fn inner_is_integer(theta: &ExactVector, m: &[i64]) -> Result<(bool, ExactReal), ExactError> {
    let v = theta.dot_int(m)?;
    Ok((v.is_integer(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_product_integrality() {
        let b = RealBasis::sqrt2_sqrt3();
        let theta = parse_vector("sqrt2, 1/2", &b).unwrap();
        let (ok, v) = inner_is_integer(&theta, &[0, 2]).unwrap();
        assert!(ok);
        assert_eq!(v, ExactReal::from_integer(&b, 1));
        let (ok, v) = inner_is_integer(&theta, &[1, 0]).unwrap();
        assert!(!ok);
        assert_eq!(v, ExactReal::tagged(&b, "sqrt2").unwrap());

        let theta = parse_vector("sqrt2, sqrt3", &b).unwrap();
        let (ok, v) = inner_is_integer(&theta, &[1, 1]).unwrap();
        assert!(!ok);
        assert_eq!(v, parse_real("sqrt2+sqrt3", &b).unwrap());
        assert!(inner_is_integer(&theta, &[1]).is_err());
    }
}
