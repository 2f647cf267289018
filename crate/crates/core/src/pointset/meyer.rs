use rayon::prelude::*;
use serde::Serialize;

use super::{difference_set, min_gap, PointSet, PointSetError};
use crate::exactnum::ExactVector;

#[derive(Clone, Debug, Serialize)]
pub struct MeyerReport {
    /// Deduplicated residues `h − a`, sorted, with occurrence counts.
    pub residues: Vec<(ExactVector, usize)>,
    /// Residues found on the half-radius truncation.
    pub half_residues: Vec<ExactVector>,
    /// Whether both truncations produced the same residue set.
    pub stable: bool,
    pub differences_scanned: usize,
}

impl MeyerReport {
    pub fn success(&self) -> bool {
        self.stable
    }

    pub fn residue_set(&self) -> Vec<ExactVector> {
        self.residues.iter().map(|(r, _)| r.clone()).collect()
    }
}

/// Greedy cover of `Λ − Λ` by `Λ + F`: every difference `h` with
/// `|h| ≤ R_trunc/2` is assigned its nearest point `a ∈ Λ` and contributes
/// the residue `h − a`. The scan is repeated on the half-radius truncation
/// as a self-consistency check.
pub fn meyer_witness(a: &PointSet, budget: usize) -> Result<MeyerReport, PointSetError> {
    if min_gap(a)? <= 0.0 {
        return Err(PointSetError::Invalid("set is not uniformly discrete".into()));
    }
    let (residues, scanned) = scan_residues(a)?;
    if residues.len() > budget {
        return Err(PointSetError::MeyerBudget {
            budget,
            histogram: residues.iter().map(|(r, c)| (r.to_string(), *c)).collect(),
        });
    }
    let half = a.truncate(a.r_trunc() / 2.0);
    let (half_res, _) = scan_residues(&half)?;
    let half_residues: Vec<ExactVector> = half_res.into_iter().map(|(r, _)| r).collect();
    let stable = half_residues.len() == residues.len()
        && half_residues.iter().all(|r| residues.iter().any(|(s, _)| s == r));
    Ok(MeyerReport {
        residues,
        half_residues,
        stable,
        differences_scanned: scanned,
    })
}

fn scan_residues(a: &PointSet) -> Result<(Vec<(ExactVector, usize)>, usize), PointSetError> {
    let diffs = difference_set(a, a.r_trunc() / 2.0)?;
    let res: Vec<ExactVector> = diffs
        .points()
        .par_iter()
        .zip(diffs.numeric().par_iter())
        .map(|(h, hn)| {
            let (i, _) = a.index().nearest(hn).expect("nonempty");
            let p = a.points()[i].embed(h.basis())?;
            h.try_sub(&p)
        })
        .collect::<Result<_, _>>()?;
    let mut hist: Vec<(ExactVector, usize)> = Vec::new();
    for r in res {
        match hist.iter_mut().find(|(s, _)| *s == r) {
            Some((_, c)) => *c += 1,
            None => hist.push((r, 1)),
        }
    }
    hist.sort_by(|x, y| x.0.cmp_numeric(&y.0));
    Ok((hist, diffs.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{parse_vector, RealBasis};
    use crate::lattice::Lattice;

    #[test]
    fn integers_have_trivial_residue() {
        let pts: Vec<ExactVector> = Lattice::integer(1)
            .enumerate_in_ball(&[], 40.0, 1000)
            .unwrap()
            .into_iter()
            .map(|p| p.point)
            .collect();
        let a = PointSet::new(pts, 40.0, "Z").unwrap();
        let rep = meyer_witness(&a, 3).unwrap();
        assert_eq!(rep.residues.len(), 1);
        assert!(rep.residues[0].0.is_zero());
        assert!(rep.stable);
    }

    #[test]
    fn two_cosets_have_few_residues() {
        let b = RealBasis::sqrt2();
        let offs = vec![parse_vector("0", &b).unwrap(), parse_vector("sqrt2", &b).unwrap()];
        let pts: Vec<ExactVector> = Lattice::integer(1)
            .enumerate_in_ball(&offs, 60.0, 1000)
            .unwrap()
            .into_iter()
            .map(|p| p.point)
            .collect();
        let a = PointSet::new(pts, 60.0, "Z ∪ Z+√2").unwrap();
        let rep = meyer_witness(&a, 3).unwrap();
        assert!(rep.residues.len() <= 3);
        assert!(rep.stable);
        // h = k − √2 is closest to (k−3)+√2, leaving 3 − 2√2
        let expect = parse_vector("3 - 2*sqrt2", &b).unwrap();
        assert!(rep.residue_set().contains(&expect));
        assert!(matches!(meyer_witness(&a, 1), Err(PointSetError::MeyerBudget { .. })));
    }
}
