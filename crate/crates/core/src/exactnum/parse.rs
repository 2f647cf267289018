//! Text form of exact reals: `1/3+sqrt2`, `-2*tau`, `0.5 sqrt3`, `7`.

use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{ExactError, ExactReal, ExactVector, RealBasis};

fn parse_err(input: &str, reason: impl Into<String>) -> ExactError {
    ExactError::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Parses a rational literal: integer, `p/q`, or a finite decimal.
pub fn parse_rational(s: &str) -> Result<BigRational, ExactError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(parse_err(s, "empty number"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| parse_err(s, e.to_string()))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| parse_err(s, e.to_string()))?;
        if q.is_zero() {
            return Err(parse_err(s, "zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let mut n = BigInt::from_str(&digits).map_err(|e| parse_err(s, e.to_string()))?;
        if neg {
            n = -n;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(n, den));
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|e| parse_err(s, e.to_string()))
}

/// Splits `text` into `(tag, coefficient)` terms without resolving a basis.
pub fn parse_terms(text: &str) -> Result<Vec<(String, BigRational)>, ExactError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(parse_err(text, "empty expression"));
    }
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = compact.as_bytes();
    for i in 1..=bytes.len() {
        let boundary = i == bytes.len()
            || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'/' && bytes[i - 1] != b'*');
        if boundary {
            terms.push(parse_term(text, &compact[start..i])?);
            start = i;
        }
    }
    let mut merged: Vec<(String, BigRational)> = Vec::new();
    for (tag, c) in terms {
        match merged.iter_mut().find(|(t, _)| *t == tag) {
            Some((_, acc)) => *acc += c,
            None => merged.push((tag, c)),
        }
    }
    Ok(merged)
}

fn parse_term(full: &str, term: &str) -> Result<(String, BigRational), ExactError> {
    let (sign, body) = match term.as_bytes().first() {
        Some(b'-') => (-BigRational::one(), &term[1..]),
        Some(b'+') => (BigRational::one(), &term[1..]),
        _ => (BigRational::one(), term),
    };
    if body.is_empty() {
        return Err(parse_err(full, "dangling sign"));
    }
    match body.find(|c: char| c.is_ascii_alphabetic()) {
        None => Ok(("1".to_string(), sign * parse_rational(body)?)),
        Some(pos) => {
            let tag = &body[pos..];
            if !tag.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(parse_err(full, format!("bad generator `{tag}`")));
            }
            let coef = body[..pos].trim_end_matches('*');
            let c = if coef.is_empty() {
                BigRational::one()
            } else {
                parse_rational(coef)?
            };
            Ok((tag.to_string(), sign * c))
        }
    }
}

/// Parses over a given basis; every generator used must belong to it.
pub fn parse_real(text: &str, basis: &Arc<RealBasis>) -> Result<ExactReal, ExactError> {
    let mut coeffs = vec![BigRational::zero(); basis.dim()];
    for (tag, c) in parse_terms(text)? {
        let i = basis
            .index_of(&tag)
            .ok_or_else(|| ExactError::UnknownTag(tag.clone()))?;
        coeffs[i] += c;
    }
    ExactReal::from_coeffs(basis, coeffs)
}

/// Smallest canonical basis able to hold every expression in `texts`.
pub fn infer_basis<S: AsRef<str>>(texts: &[S]) -> Result<Arc<RealBasis>, ExactError> {
    let mut bases = vec![RealBasis::rational()];
    for t in texts {
        for (tag, _) in parse_terms(t.as_ref())? {
            if tag != "1" {
                bases.push(RealBasis::from_tags(&["1", tag.as_str()])?);
            }
        }
    }
    let refs: Vec<&Arc<RealBasis>> = bases.iter().collect();
    RealBasis::union(&refs)
}

/// Parses `a,b,…` as a vector over `basis`.
pub fn parse_vector(text: &str, basis: &Arc<RealBasis>) -> Result<ExactVector, ExactError> {
    let entries = text
        .split(',')
        .map(|t| parse_real(t, basis))
        .collect::<Result<Vec<_>, _>>()?;
    ExactVector::new(entries)
}
