use num_rational::BigRational;
use serde::Serialize;

use super::DecomposeError;
use crate::exactnum::{inner_is_integer, ExactError, ExactReal, ExactVector, RealBasis};
use crate::lattice::{Coords, Lattice};

/// Shells searched before giving up; existence is guaranteed, so hitting the
/// limit means the offsets were not exact.
const MAX_SHELL: i64 = 64;

/// `m ∈ ℤⁿ` with `⟨cⱼ − c_ℓ, m⟩ ∉ ℤ` for all `j ≠ ℓ`, where `cⱼ` are the
/// lattice coordinates of `θⱼ` (for `L = ℤⁿ`, the offsets themselves).
#[derive(Clone, Debug, Serialize)]
pub struct SeparatingVector {
    pub m: Vec<i64>,
    /// `((j, ℓ), ⟨cⱼ − c_ℓ, m⟩)` for every pair `j < ℓ`.
    #[serde(serialize_with = "ser_values")]
    pub values: Vec<((usize, usize), ExactReal)>,
}

fn ser_values<S: serde::Serializer>(v: &[((usize, usize), ExactReal)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for ((j, l), x) in v {
        seq.serialize_element(&(j, l, x.to_string()))?;
    }
    seq.end()
}

fn coordinate_differences(l: &Lattice, thetas: &[ExactVector]) -> Result<Vec<((usize, usize), ExactVector)>, DecomposeError> {
    let mut bases = vec![l.field()];
    bases.extend(thetas.iter().map(ExactVector::basis));
    let target = RealBasis::union(&bases)?;
    let coords = thetas
        .iter()
        .map(|t| match l.coords(&t.embed(&target)?)? {
            Coords::Exact(c) => Ok(c),
            Coords::Numeric(_) => Err(ExactError::NoMultiplicationTable(target.tags().to_vec()).into()),
        })
        .collect::<Result<Vec<ExactVector>, DecomposeError>>()?;
    let mut out = Vec::new();
    for j in 0..coords.len() {
        for k in j + 1..coords.len() {
            let d = coords[j].try_sub(&coords[k])?;
            if d.is_rational() {
                return Err(DecomposeError::RationalDifference(j, k));
            }
            out.push(((j, k), d));
        }
    }
    Ok(out)
}

fn check(diffs: &[((usize, usize), ExactVector)], m: &[i64]) -> Result<Option<Vec<((usize, usize), ExactReal)>>, ExactError> {
    let mut values = Vec::with_capacity(diffs.len());
    for (pair, d) in diffs {
        let (int, v) = inner_is_integer(d, m)?;
        if int {
            return Ok(None);
        }
        values.push((*pair, v));
    }
    Ok(Some(values))
}

/// Searches `m` with strictly positive entries by increasing sup-norm shell,
/// lexicographically within a shell, and returns the first vector that passes
/// every exact check. Finitely many hyperplanes cannot cover the positive
/// orthant, so the search terminates.
pub fn find_separating_vector(l: &Lattice, thetas: &[ExactVector]) -> Result<SeparatingVector, DecomposeError> {
    let n = l.dim();
    let diffs = coordinate_differences(l, thetas)?;
    for shell in 1..=MAX_SHELL {
        let mut m = vec![1i64; n];
        loop {
            if m.iter().any(|&x| x == shell) {
                if let Some(values) = check(&diffs, &m)? {
                    return Ok(SeparatingVector { m, values });
                }
            }
            if !next_in_box(&mut m, shell) {
                break;
            }
        }
    }
    Err(DecomposeError::Exact(ExactError::Parse {
        input: format!("{} offsets", thetas.len()),
        reason: format!("no separating vector with entries ≤ {MAX_SHELL}"),
    }))
}

/// Advances `m` to the next vector of `[1, hi]ⁿ` in lexicographic order.
fn next_in_box(m: &mut [i64], hi: i64) -> bool {
    for i in (0..m.len()).rev() {
        if m[i] < hi {
            m[i] += 1;
            for x in &mut m[i + 1..] {
                *x = 1;
            }
            return true;
        }
    }
    false
}

/// Re-verifies a given `m` exactly.
pub fn verify_separating(l: &Lattice, thetas: &[ExactVector], m: &[i64]) -> Result<SeparatingVector, DecomposeError> {
    if m.len() != l.dim() {
        return Err(DecomposeError::Dimension(m.len(), l.dim()));
    }
    let diffs = coordinate_differences(l, thetas)?;
    match check(&diffs, m)? {
        Some(values) => Ok(SeparatingVector { m: m.to_vec(), values }),
        None => Err(DecomposeError::Exact(ExactError::Parse {
            input: format!("{m:?}"),
            reason: "some ⟨θⱼ − θ_ℓ, m⟩ is an integer".into(),
        })),
    }
}

/// Integer combination `Σ mᵢ xᵢ` as an exact real, for reporting.
pub(crate) fn weighted(x: &ExactVector, m: &[i64]) -> Result<ExactReal, ExactError> {
    let mut acc = ExactReal::zero(x.basis());
    for (e, &k) in x.entries().iter().zip(m) {
        acc = acc.try_add(&e.scale(&BigRational::from_integer(k.into())))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::parse_vector;

    fn vs(b: &std::sync::Arc<RealBasis>, xs: &[&str]) -> Vec<ExactVector> {
        xs.iter().map(|x| parse_vector(x, b).unwrap()).collect()
    }

    #[test]
    fn one_dimensional() {
        let b = RealBasis::sqrt2();
        let s = find_separating_vector(&Lattice::integer(1), &vs(&b, &["0", "sqrt2"])).unwrap();
        assert_eq!(s.m, vec![1]);
        assert_eq!(s.values[0].1.to_string(), "-sqrt2");
    }

    #[test]
    fn planar_three_offsets() {
        let b = RealBasis::from_tags(&["1", "sqrt2", "sqrt3"]).unwrap();
        let t = vs(&b, &["sqrt2, 0", "0, sqrt3", "0, 0"]);
        let s = find_separating_vector(&Lattice::integer(2), &t).unwrap();
        assert_eq!(s.m, vec![1, 1]);
        assert_eq!(s.values.len(), 3);
    }

    #[test]
    fn engineered_cancellation() {
        let b = RealBasis::sqrt2();
        let t = vs(&b, &["sqrt2, -sqrt2", "0, 0"]);
        assert!(verify_separating(&Lattice::integer(2), &t, &[1, 1]).is_err());
        let s = find_separating_vector(&Lattice::integer(2), &t).unwrap();
        assert_eq!(s.m, vec![1, 2]);
        assert_eq!(s.values[0].1.to_string(), "-sqrt2");
        assert_eq!(weighted(&t[0], &s.m).unwrap().to_string(), "-sqrt2");
    }

    #[test]
    fn rational_difference_is_rejected() {
        let b = RealBasis::sqrt2();
        let t = vs(&b, &["sqrt2", "1/2 + sqrt2"]);
        assert!(matches!(
            find_separating_vector(&Lattice::integer(1), &t),
            Err(DecomposeError::RationalDifference(0, 1))
        ));
    }
}
