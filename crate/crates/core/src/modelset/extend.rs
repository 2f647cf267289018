use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{flatten, generate, solve_consistent, CutAndProjectScheme, ModelSetError, Window};
use crate::exactnum::{ExactError, ExactVector, RealBasis};
use crate::lattice::{independence_witness, refine_lattice, DEFAULT_CAP};
use crate::linalg::{lcm_denominators, rref};

/// Data of an extension `(Γ, Ω, F) ↦ (Γ′, Ω′, F′)` with `M + F ⊂ M′ + F′`,
/// `Γ ⊂ Γ′` and `p₁(Γ′) ∩ ℤ[F′] = {0}`.
#[derive(Clone, Debug)]
pub struct Extension {
    pub scheme: CutAndProjectScheme,
    pub window: Window,
    pub offsets: Vec<ExactVector>,
    pub q: BigInt,
    /// `γⱼ ∈ Γ` as integer `Γ`-coordinates, with `uⱼ = p₁(γⱼ/q)`.
    pub gammas: Vec<Vec<i64>>,
    /// For each input offset, the index of `wⱼ` in `offsets`.
    pub mapping: Vec<usize>,
    pub rational_parts: Vec<ExactVector>,
    pub irrational_parts: Vec<ExactVector>,
}

/// Splits each `θⱼ ∈ F` as `uⱼ + wⱼ` with `uⱼ ∈ ℚ·p₁(Γ)` and `wⱼ` in a fixed
/// ℚ-complement, then sets `Γ′ = (1/q)Γ`, `Ω′ = ∪ⱼ (Ω + p₂(γⱼ/q))` and
/// `F′ = {wⱼ}`.
///
/// The complement is spanned by the standard ℚ-coordinate vectors chosen
/// greedily, which makes the split canonical for a given basis.
pub fn extend_scheme(
    scheme: &CutAndProjectScheme,
    window: &Window,
    f: &[ExactVector],
) -> Result<Extension, ModelSetError> {
    super::check_window(scheme, window)?;
    if f.is_empty() {
        return Err(ModelSetError::Undecomposable("empty offset set".into()));
    }
    if let Some(bad) = f.iter().find(|t| t.dim() != scheme.n()) {
        return Err(ModelSetError::Undecomposable(format!("{bad} has the wrong dimension")));
    }
    if scheme.m() == 0 {
        return from_refinement(scheme, f);
    }

    let mut bases = vec![scheme.gamma().field()];
    bases.extend(f.iter().map(ExactVector::basis));
    let target = RealBasis::union(&bases)?;
    let cols = scheme.gamma().generators();
    let s_cols: Vec<Vec<BigRational>> = cols
        .iter()
        .map(|c| flatten(&scheme.p1(c), &target))
        .collect::<Result<_, _>>()?;
    let dim_flat = s_cols[0].len();
    let d = cols.len();
    if rank(&s_cols) < d {
        return Err(ModelSetError::NotInjective("p₁(Γ) generators are ℚ-dependent".into()));
    }
    let complement = greedy_complement(&s_cols, dim_flat);
    let mut all_cols = s_cols.clone();
    for &r in &complement {
        let mut e = vec![BigRational::zero(); dim_flat];
        e[r] = BigRational::from_integer(1.into());
        all_cols.push(e);
    }

    let mut coords = Vec::with_capacity(f.len());
    for theta in f {
        let rhs = flatten(theta, &target)?;
        let sol = solve_consistent(&all_cols, &rhs).ok_or_else(|| ModelSetError::Undecomposable(theta.to_string()))?;
        coords.push(sol[..d].to_vec());
    }
    let q = lcm_denominators(coords.iter().flatten());
    let qr = BigRational::from_integer(q.clone());
    let gamma_prime = scheme.gamma().scaled(&qr.recip())?;
    let gb = scheme.gamma().basis_matrix().embed(&target)?;

    let mut us = Vec::with_capacity(f.len());
    let mut ws = Vec::with_capacity(f.len());
    let mut gammas = Vec::with_capacity(f.len());
    let mut shifts: Vec<ExactVector> = Vec::new();
    for (theta, c) in f.iter().zip(&coords) {
        let g = gb.try_mul_vec(&ExactVector::from_rationals(&target, c))?;
        let u = scheme.p1(&g);
        let w = theta.embed(&target)?.try_sub(&u)?;
        let shift = scheme.p2(&g).expect("m > 0");
        if !shifts.contains(&shift) {
            shifts.push(shift);
        }
        gammas.push(to_i64(c.iter().map(|x| x * &qr))?);
        us.push(u);
        ws.push(w);
    }
    let pieces = shifts.iter().map(|s| window.translate(s)).collect::<Result<Vec<_>, _>>()?;
    let window_prime = if pieces.len() == 1 {
        pieces.into_iter().next().expect("one piece")
    } else {
        Window::Union(pieces)
    };
    let (offsets, mapping) = dedup(&ws);
    Ok(Extension {
        scheme: CutAndProjectScheme::new(gamma_prime, scheme.n(), scheme.m())?,
        window: window_prime,
        offsets,
        q,
        gammas,
        mapping,
        rational_parts: us,
        irrational_parts: ws,
    })
}

fn from_refinement(scheme: &CutAndProjectScheme, f: &[ExactVector]) -> Result<Extension, ModelSetError> {
    let r = refine_lattice(scheme.gamma(), f)?;
    let qr = BigRational::from_integer(r.q.clone());
    let gammas = r
        .rational_parts
        .iter()
        .map(|u| match scheme.gamma().coords(u)? {
            crate::lattice::Coords::Exact(c) => {
                to_i64(c.entries().iter().map(|x| x.rational_part() * &qr))
            }
            crate::lattice::Coords::Numeric(_) => Err(ModelSetError::Undecomposable(u.to_string())),
        })
        .collect::<Result<_, _>>()?;
    Ok(Extension {
        scheme: CutAndProjectScheme::lattice(r.lattice),
        window: Window::Point,
        offsets: r.offsets,
        q: r.q,
        gammas,
        mapping: r.mapping.iter().map(|(_, i)| *i).collect(),
        rational_parts: r.rational_parts,
        irrational_parts: r.irrational_parts,
    })
}

fn to_i64(xs: impl Iterator<Item = BigRational>) -> Result<Vec<i64>, ModelSetError> {
    xs.map(|x| {
        x.to_integer().to_i64().ok_or_else(|| {
            ExactError::Parse {
                input: x.to_string(),
                reason: "lattice coordinate overflows i64".into(),
            }
            .into()
        })
    })
    .collect()
}

fn dedup(ws: &[ExactVector]) -> (Vec<ExactVector>, Vec<usize>) {
    let mut out: Vec<ExactVector> = Vec::new();
    let mut map = Vec::with_capacity(ws.len());
    for w in ws {
        match out.iter().position(|o| o == w) {
            Some(i) => map.push(i),
            None => {
                out.push(w.clone());
                map.push(out.len() - 1);
            }
        }
    }
    (out, map)
}

fn rank(cols: &[Vec<BigRational>]) -> usize {
    let rows: Vec<Vec<BigRational>> = (0..cols[0].len())
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    rref(rows).1.len()
}

/// Standard coordinate indices completing the span of `cols` to all of ℚᴺ.
fn greedy_complement(cols: &[Vec<BigRational>], n: usize) -> Vec<usize> {
    let mut current: Vec<Vec<BigRational>> = cols.to_vec();
    let mut rk = rank(&current);
    let mut chosen = Vec::new();
    for r in 0..n {
        if rk == n {
            break;
        }
        let mut e = vec![BigRational::zero(); n];
        e[r] = BigRational::from_integer(1.into());
        current.push(e);
        let nr = rank(&current);
        if nr > rk {
            rk = nr;
            chosen.push(r);
        } else {
            current.pop();
        }
    }
    chosen
}

impl Extension {
    /// Checks `M + F ⊂ M′ + F′` on all points of `M + F` in the ball of
    /// radius `r`, against an independent enumeration of `M′`. Returns the
    /// number of points checked.
    pub fn check_inclusion(
        &self,
        scheme: &CutAndProjectScheme,
        window: &Window,
        f: &[ExactVector],
        r: f64,
    ) -> Result<usize, ModelSetError> {
        let reach = f.iter().map(ExactVector::norm_f64).fold(0.0, f64::max);
        let wreach = self.offsets.iter().map(ExactVector::norm_f64).fold(0.0, f64::max);
        let m = generate(scheme, window, r + reach + 1.0, DEFAULT_CAP)?;
        let mp = generate(&self.scheme, &self.window, r + wreach + 1.0, DEFAULT_CAP)?;
        let mut checked = 0;
        for p in m.points.points() {
            for (j, theta) in f.iter().enumerate() {
                let t = RealBasis::union(&[p.basis(), theta.basis()])?;
                let lam = p.embed(&t)?.try_add(&theta.embed(&t)?)?;
                if lam.norm_f64() > r {
                    continue;
                }
                let w = &self.offsets[self.mapping[j]];
                let t = RealBasis::union(&[lam.basis(), w.basis()])?;
                let base = lam.embed(&t)?.try_sub(&w.embed(&t)?)?;
                if !mp.points.contains(&base) {
                    return Err(ModelSetError::CheckFailed(format!(
                        "{lam} = {p} + θ{j} is not in M′ + F′"
                    )));
                }
                checked += 1;
            }
        }
        Ok(checked)
    }

    /// Checks `p₁(Γ′) ∩ ℤ[F′] = {0}` on integer combinations with entries in
    /// `[−bound, bound]`.
    pub fn check_independence(&self, bound: i64) -> Result<usize, ModelSetError> {
        let s = &self.scheme;
        Ok(independence_witness(&self.offsets, bound, |v| {
            Ok(match s.p1_preimage(v).map_err(|e| crate::lattice::LatticeError::Spec(e.to_string()))? {
                Some(c) => c.iter().all(|x| x.is_integer()),
                None => false,
            })
        })?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::parse_vector;
    use crate::lattice::Lattice;

    fn v(s: &str, b: &std::sync::Arc<RealBasis>) -> ExactVector {
        parse_vector(s, b).unwrap()
    }

    #[test]
    fn zero_offset_is_identity() {
        let s = CutAndProjectScheme::fibonacci();
        let w = Window::unit_interval();
        let e = extend_scheme(&s, &w, &[v("0", &RealBasis::golden())]).unwrap();
        assert_eq!(e.q, BigInt::from(1));
        assert_eq!(e.scheme, s);
        assert!(e.window.same_as(&w));
        assert!(e.offsets[0].is_zero());
    }

    #[test]
    fn fibonacci_half_offset() {
        let s = CutAndProjectScheme::fibonacci();
        let w = Window::unit_interval();
        let f = [v("1/2", &RealBasis::rational())];
        let e = extend_scheme(&s, &w, &f).unwrap();
        assert_eq!(e.q, BigInt::from(2));
        assert_eq!(e.gammas, vec![vec![1, 0]]);
        assert_eq!(e.offsets.len(), 1);
        assert!(e.offsets[0].is_zero());
        let half = v("1/2", &RealBasis::rational());
        assert!(e.window.same_as(&w.translate(&half).unwrap()));
        assert!(e.check_inclusion(&s, &w, &f, 50.0).unwrap() > 40);
        assert!(e.check_independence(5).is_ok());
    }

    #[test]
    fn irrational_offset_outside_the_field() {
        let s = CutAndProjectScheme::fibonacci();
        let w = Window::unit_interval();
        let b = RealBasis::sqrt2();
        let f = [v("0", &b), v("sqrt2 + 1/3", &b)];
        let e = extend_scheme(&s, &w, &f).unwrap();
        assert_eq!(e.q, BigInt::from(3));
        assert_eq!(e.offsets.len(), 2);
        assert!(e.check_inclusion(&s, &w, &f, 50.0).unwrap() > 80);
        assert!(e.check_independence(5).unwrap() > 0);
    }

    #[test]
    fn degenerate_case_matches_refinement() {
        let z = Lattice::integer(1);
        let s = CutAndProjectScheme::lattice(z.clone());
        let b = RealBasis::sqrt2();
        let f = [v("0", &b), v("1/2", &b), v("sqrt2 + 1/3", &b)];
        let e = extend_scheme(&s, &Window::Point, &f).unwrap();
        let r = refine_lattice(&z, &f).unwrap();
        assert_eq!(e.scheme.gamma(), &r.lattice);
        assert_eq!(e.offsets, r.offsets);
        assert_eq!(e.q, r.q);
        assert_eq!(e.window, Window::Point);
        assert!(e.check_inclusion(&s, &Window::Point, &f, 30.0).unwrap() > 150);
    }

    #[test]
    fn golden_offset_in_the_field() {
        let s = CutAndProjectScheme::fibonacci();
        let w = Window::unit_interval();
        let g = RealBasis::golden();
        let f = [v("1/3*tau", &g), v("1/5 + 2*tau", &g)];
        let e = extend_scheme(&s, &w, &f).unwrap();
        // both offsets lie in ℚ·p₁(Γ) = ℚ(τ)
        assert!(e.offsets.iter().all(ExactVector::is_zero));
        assert_eq!(e.q, BigInt::from(15));
        assert!(e.check_inclusion(&s, &w, &f, 50.0).unwrap() > 80);
    }
}
