//! JSON encoding: `{"basis": [tags], "coeffs": [["num","den"], …]}`. Input
//! also accepts the expression shorthand `"1/2 - 3*sqrt2"`.

use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ExactError, ExactReal, ExactVector, RealBasis};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealWire {
    pub basis: Vec<String>,
    pub coeffs: Vec<[String; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RealInput {
    Text(String),
    Full { basis: Vec<String>, coeffs: Vec<[String; 2]> },
}

impl<'de> Deserialize<'de> for RealWire {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match RealInput::deserialize(d)? {
            RealInput::Full { basis, coeffs } => Ok(RealWire { basis, coeffs }),
            RealInput::Text(t) => {
                let mut terms = super::parse_terms(&t).map_err(serde::de::Error::custom)?;
                match terms.iter().position(|(tag, _)| tag == "1") {
                    Some(i) => terms.swap(0, i),
                    None => terms.insert(0, ("1".to_string(), BigRational::zero())),
                }
                Ok(RealWire {
                    basis: terms.iter().map(|(tag, _)| tag.clone()).collect(),
                    coeffs: terms
                        .iter()
                        .map(|(_, q)| [q.numer().to_string(), q.denom().to_string()])
                        .collect(),
                })
            }
        }
    }
}

impl RealWire {
    pub fn decode(&self) -> Result<ExactReal, ExactError> {
        let basis = RealBasis::from_tags(&self.basis)?;
        self.decode_in(&basis)
    }

    /// Decodes and re-expresses the value over `target`.
    pub fn decode_in(&self, target: &Arc<RealBasis>) -> Result<ExactReal, ExactError> {
        if self.coeffs.len() != self.basis.len() {
            return Err(ExactError::DimensionMismatch(
                self.coeffs.len(),
                self.basis.len(),
            ));
        }
        let mut out = ExactReal::zero(target);
        let mut coeffs = out.coeffs().to_vec();
        for (tag, [n, d]) in self.basis.iter().zip(&self.coeffs) {
            let bad = |e: num_bigint::ParseBigIntError| ExactError::Parse {
                input: format!("[{n:?},{d:?}]"),
                reason: e.to_string(),
            };
            let n = BigInt::from_str(n).map_err(bad)?;
            let d = BigInt::from_str(d).map_err(bad)?;
            if d.is_zero() {
                return Err(ExactError::DivisionByZero);
            }
            let q = BigRational::new(n, d);
            if q.is_zero() {
                continue;
            }
            let i = target
                .index_of(tag)
                .ok_or_else(|| ExactError::UnknownTag(tag.clone()))?;
            coeffs[i] += q;
        }
        out = ExactReal::from_coeffs(target, coeffs)?;
        Ok(out)
    }
}

impl From<&ExactReal> for RealWire {
    fn from(x: &ExactReal) -> Self {
        RealWire {
            basis: x.basis().tags().to_vec(),
            coeffs: x
                .coeffs()
                .iter()
                .map(|q| [q.numer().to_string(), q.denom().to_string()])
                .collect(),
        }
    }
}

impl Serialize for ExactReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RealWire::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        RealWire::deserialize(d)?
            .decode()
            .map_err(serde::de::Error::custom)
    }
}

/// A vector as a list of encoded reals.
pub type VectorWire = Vec<RealWire>;

/// Decodes a list of vectors onto the smallest common basis.
pub fn decode_vectors(wires: &[VectorWire]) -> Result<Vec<ExactVector>, ExactError> {
    let mut bases: Vec<Arc<RealBasis>> = vec![RealBasis::rational()];
    for v in wires {
        for x in v {
            let b = RealBasis::from_tags(&x.basis)?;
            if !bases.iter().any(|c| c.same_as(&b)) {
                bases.push(b);
            }
        }
    }
    let refs: Vec<&Arc<RealBasis>> = bases.iter().collect();
    let target = RealBasis::union(&refs)?;
    wires
        .iter()
        .map(|v| {
            let entries = v
                .iter()
                .map(|x| x.decode_in(&target))
                .collect::<Result<Vec<_>, _>>()?;
            ExactVector::new(entries)
        })
        .collect()
}

impl Serialize for ExactVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.entries().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = VectorWire::deserialize(d)?;
        decode_vectors(&[wire])
            .map(|mut v| v.remove(0))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::parse_real;

    #[test]
    fn expression_shorthand() {
        let x: ExactReal = serde_json::from_str(r#""1/2 - 3*sqrt2""#).unwrap();
        assert_eq!(x, parse_real("1/2-3sqrt2", &RealBasis::sqrt2()).unwrap());
        let v = decode_vectors(&[serde_json::from_str(r#"["sqrt2", "7/3"]"#).unwrap()]).unwrap();
        assert_eq!(v[0].to_string(), "(sqrt2, 7/3)");
    }

    #[test]
    fn json_round_trip() {
        let b = RealBasis::golden();
        let x = parse_real("123456789012345678901234567891/7 - 3*tau", &b).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert!(s.starts_with(r#"{"basis":["1","tau"],"coeffs":[["123456789012345678901234567891","7"]"#));
        let y: ExactReal = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn mixed_bases_decode_to_union() {
        let a = RealWire {
            basis: vec!["1".into(), "sqrt2".into()],
            coeffs: vec![["0".into(), "1".into()], ["1".into(), "1".into()]],
        };
        let c = RealWire {
            basis: vec!["1".into(), "sqrt3".into()],
            coeffs: vec![["1".into(), "2".into()], ["1".into(), "1".into()]],
        };
        let v = decode_vectors(&[vec![a, c]]).unwrap();
        assert!(Arc::ptr_eq(v[0].basis(), &RealBasis::sqrt2_sqrt3()));
        assert_eq!(v[0].get(1).to_string(), "1/2 + sqrt3");
    }
}
