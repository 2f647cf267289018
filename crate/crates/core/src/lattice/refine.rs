use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{Coords, Lattice, LatticeError};
use crate::exactnum::{ExactError, ExactVector, RealBasis};
use crate::linalg::lcm_denominators;

/// Result of refining `(L, F)` into `(L′, F′)` with `L + F ⊂ L′ + F′`,
/// `L ⊂ L′` and `L′ ∩ ℤ[F′] = {0}`.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub lattice: Lattice,
    pub q: BigInt,
    pub offsets: Vec<ExactVector>,
    /// For each input offset `θⱼ`: its `L′`-coordinates shift `q·rat(cⱼ)`
    /// and the index of `wⱼ` in `offsets`.
    pub mapping: Vec<(Vec<i64>, usize)>,
    /// The split `θⱼ = uⱼ + wⱼ`.
    pub rational_parts: Vec<ExactVector>,
    pub irrational_parts: Vec<ExactVector>,
}

/// Splits every offset into a part in `ℚ·L` and a part whose `L`-coordinates
/// have vanishing rational coefficients, then refines `L` to `(1/q)L`.
pub fn refine_lattice(l: &Lattice, f: &[ExactVector]) -> Result<Refinement, LatticeError> {
    let mut bases = vec![l.field()];
    bases.extend(f.iter().map(ExactVector::basis));
    let target = RealBasis::union(&bases)?;
    let b = l.basis_matrix().embed(&target)?;

    let mut rat_coords = Vec::with_capacity(f.len());
    let mut us = Vec::with_capacity(f.len());
    let mut ws = Vec::with_capacity(f.len());
    for theta in f {
        let theta = theta.embed(&target)?;
        let c = match l.coords(&theta)? {
            Coords::Exact(c) => c,
            Coords::Numeric(_) => {
                return Err(ExactError::NoMultiplicationTable(target.tags().to_vec()).into())
            }
        };
        let rc: Vec<BigRational> = c.entries().iter().map(|x| x.rational_part().clone()).collect();
        let u = b.try_mul_vec(&ExactVector::from_rationals(&target, &rc))?;
        let w = theta.try_sub(&u)?;
        rat_coords.push(rc);
        us.push(u);
        ws.push(w);
    }
    let q = lcm_denominators(rat_coords.iter().flatten());
    let qr = BigRational::from_integer(q.clone());
    let lattice = l.scaled(&qr.recip())?;

    let mut offsets: Vec<ExactVector> = Vec::new();
    let mut mapping = Vec::with_capacity(f.len());
    for (rc, w) in rat_coords.iter().zip(&ws) {
        let shift = rc
            .iter()
            .map(|x| {
                let v = (x * &qr).to_integer();
                v.to_i64().ok_or_else(|| ExactError::Parse {
                    input: v.to_string(),
                    reason: "coset shift overflows i64".into(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let idx = match offsets.iter().position(|o| o == w) {
            Some(i) => i,
            None => {
                offsets.push(w.clone());
                offsets.len() - 1
            }
        };
        mapping.push((shift, idx));
    }
    Ok(Refinement {
        lattice,
        q,
        offsets,
        mapping,
        rational_parts: us,
        irrational_parts: ws,
    })
}

impl Refinement {
    /// Checks `L + F ⊂ L′ + F′` on every point of `L + F` in the ball of
    /// radius `r`; returns the number of points checked.
    pub fn check_inclusion(
        &self,
        l: &Lattice,
        f: &[ExactVector],
        r: f64,
    ) -> Result<usize, LatticeError> {
        let pts = l.enumerate_in_ball(f, r, super::DEFAULT_CAP)?;
        for p in &pts {
            let w = &self.offsets[self.mapping[p.coset].1];
            let target = RealBasis::union(&[p.point.basis(), w.basis()])?;
            let d = p.point.embed(&target)?.try_sub(&w.embed(&target)?)?;
            if !self.lattice.contains(&d)? {
                return Err(LatticeError::Spec(format!(
                    "point {} of coset {} is not in L′ + F′",
                    p.point, p.coset
                )));
            }
        }
        Ok(pts.len())
    }

    /// Checks that no integer combination of `F′` with coefficients in
    /// `[−bound, bound]` lies in `L′` unless it is zero. Returns the number
    /// of combinations tested.
    pub fn check_independence(&self, bound: i64) -> Result<usize, LatticeError> {
        independence_witness(&self.offsets, bound, |v| self.lattice.contains(v))
    }
}

/// Enumerates integer combinations of `vs` with entries in `[−bound, bound]`
/// and fails if a nonzero combination satisfies `in_group`.
pub fn independence_witness(
    vs: &[ExactVector],
    bound: i64,
    mut in_group: impl FnMut(&ExactVector) -> Result<bool, LatticeError>,
) -> Result<usize, LatticeError> {
    if vs.is_empty() {
        return Ok(0);
    }
    let bases: Vec<_> = vs.iter().map(ExactVector::basis).collect();
    let target = RealBasis::union(&bases)?;
    let vs: Vec<ExactVector> = vs.iter().map(|v| v.embed(&target)).collect::<Result<_, _>>()?;
    let s = vs.len();
    let mut coef = vec![-bound; s];
    let mut tested = 0;
    loop {
        if coef.iter().any(|c| *c != 0) {
            let mut acc = ExactVector::zero(&target, vs[0].dim());
            for (v, &c) in vs.iter().zip(&coef) {
                if c != 0 {
                    acc = acc.try_add(&v.scale(&BigRational::from_integer(c.into())))?;
                }
            }
            tested += 1;
            if !acc.is_zero() && in_group(&acc)? {
                return Err(LatticeError::Spec(format!(
                    "combination {coef:?} of offsets lies in the lattice"
                )));
            }
        }
        let mut i = 0;
        loop {
            if i == s {
                return Ok(tested);
            }
            coef[i] += 1;
            if coef[i] <= bound {
                break;
            }
            coef[i] = -bound;
            i += 1;
        }
    }
}
