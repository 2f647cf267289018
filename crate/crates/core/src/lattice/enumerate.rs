use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use twofloat::TwoFloat;

use super::{Lattice, LatticeError};
use crate::exactnum::{ExactVector, RealBasis};

pub const DEFAULT_CAP: usize = 1_000_000;

/// Slack added to numeric interval ends before the exact membership test.
const SLACK: f64 = 1e-7;

/// A bounded region of ℝᵈ that lattice enumeration can scan.
pub trait Region: Sync {
    /// Per-coordinate bounding box of the region.
    fn bounds(&self, dim: usize) -> Vec<(f64, f64)>;

    /// The `t`-interval on which `a + t·b` may meet the region. A superset is
    /// fine; `None` means the line misses the region.
    fn line_interval(&self, a: &[f64], b: &[f64]) -> Option<(f64, f64)>;

    fn contains(&self, x: &ExactVector) -> bool;
}

/// Closed ball `|x| ≤ R` about the origin.
#[derive(Clone, Copy, Debug)]
pub struct BallRegion {
    pub radius: f64,
}

impl BallRegion {
    pub fn new(radius: f64) -> Self {
        BallRegion { radius }
    }
}

/// Interval of `t` with `|a + t·b|² ≤ r²`.
pub(crate) fn ball_line_interval(a: &[f64], b: &[f64], r: f64) -> Option<(f64, f64)> {
    let bb: f64 = b.iter().map(|v| v * v).sum();
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|v| v * v).sum();
    if bb == 0.0 {
        return if aa <= r * r { Some((f64::NEG_INFINITY, f64::INFINITY)) } else { None };
    }
    let disc = ab * ab - bb * (aa - r * r);
    if disc < -SLACK * r * r * bb {
        return None;
    }
    let s = disc.max(0.0).sqrt();
    Some(((-ab - s) / bb, (-ab + s) / bb))
}

pub(crate) fn norm_sq_twofloat(x: &ExactVector) -> TwoFloat {
    x.entries().iter().fold(TwoFloat::from(0.0), |acc, e| {
        let v = e.to_twofloat();
        acc + v * v
    })
}

impl Region for BallRegion {
    fn bounds(&self, dim: usize) -> Vec<(f64, f64)> {
        vec![(-self.radius, self.radius); dim]
    }

    fn line_interval(&self, a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
        ball_line_interval(a, b, self.radius)
    }

    fn contains(&self, x: &ExactVector) -> bool {
        let r = TwoFloat::from(self.radius);
        norm_sq_twofloat(x) <= r * r
    }
}

/// A point `B·k + θ_coset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePoint {
    pub k: Vec<i64>,
    pub coset: usize,
    pub point: ExactVector,
}

/// Enumerates `(L + θⱼ) ∩ region` for every offset, ordered by integer
/// coordinates then coset index.
///
/// The first `d−1` coordinates range over a box derived from the region's
/// bounding box; the last coordinate is solved as an interval along the line.
pub fn enumerate_region<R: Region + ?Sized>(
    lattice: &Lattice,
    offsets: &[ExactVector],
    region: &R,
    cap: usize,
) -> Result<Vec<LatticePoint>, LatticeError> {
    let d = lattice.dim();
    let mut bases = vec![lattice.field()];
    bases.extend(offsets.iter().map(ExactVector::basis));
    let target = RealBasis::union(&bases)?;
    let bmat = lattice.basis_matrix().embed(&target)?;
    let bnum = bmat.to_f64();
    let inv = lattice.numeric_inverse().to_f64();
    let bounds = region.bounds(d);
    let count = AtomicUsize::new(0);

    let mut out = Vec::new();
    for (j, theta) in offsets.iter().enumerate() {
        if theta.dim() != d {
            return Err(LatticeError::OffsetDimension {
                index: j,
                got: theta.dim(),
                want: d,
            });
        }
        let theta = theta.embed(&target)?;
        let tnum = theta.to_f64();
        // k = B⁻¹(x − θ) over the bounding box, by interval arithmetic
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|i| {
                let (mut lo, mut hi) = (0.0, 0.0);
                for l in 0..d {
                    let c = inv[i][l];
                    let (a, b) = (c * (bounds[l].0 - tnum[l]), c * (bounds[l].1 - tnum[l]));
                    lo += a.min(b);
                    hi += a.max(b);
                }
                ((lo - SLACK).ceil() as i64, (hi + SLACK).floor() as i64)
            })
            .collect();
        let prefix_ranges = &ranges[..d - 1];
        let prefix_total: f64 = prefix_ranges
            .iter()
            .map(|(a, b)| (b - a + 1).max(0) as f64)
            .product();
        if prefix_total > 1e9 {
            return Err(LatticeError::CapExceeded { cap });
        }
        let first: Vec<i64> = if d == 1 {
            vec![0]
        } else {
            (ranges[0].0..=ranges[0].1).collect()
        };
        let last_col: Vec<f64> = (0..d).map(|i| bnum[i][d - 1]).collect();

        let slabs: Vec<Result<Vec<LatticePoint>, LatticeError>> = first
            .par_iter()
            .map(|&k0| {
                let mut pts = Vec::new();
                let mut prefix = vec![0i64; d.saturating_sub(1)];
                if d > 1 {
                    prefix[0] = k0;
                }
                scan_prefix(
                    1.min(d - 1),
                    &mut prefix,
                    prefix_ranges,
                    &mut |prefix| {
                        let mut a = tnum.clone();
                        for (l, &kl) in prefix.iter().enumerate() {
                            for (i, ai) in a.iter_mut().enumerate() {
                                *ai += bnum[i][l] * kl as f64;
                            }
                        }
                        let Some((t0, t1)) = region.line_interval(&a, &last_col) else {
                            return Ok(());
                        };
                        let lo = (t0 - SLACK).ceil().max(ranges[d - 1].0 as f64) as i64;
                        let hi = (t1 + SLACK).floor().min(ranges[d - 1].1 as f64) as i64;
                        for kd in lo..=hi {
                            let mut k = prefix.to_vec();
                            k.push(kd);
                            let p = bmat.mul_int(&k).try_add(&theta)?;
                            if region.contains(&p) {
                                if count.fetch_add(1, Ordering::Relaxed) >= cap {
                                    return Err(LatticeError::CapExceeded { cap });
                                }
                                pts.push(LatticePoint {
                                    k,
                                    coset: j,
                                    point: p,
                                });
                            }
                        }
                        Ok(())
                    },
                )?;
                Ok(pts)
            })
            .collect();
        for s in slabs {
            out.extend(s?);
        }
    }
    out.sort_by(|a, b| a.k.cmp(&b.k).then(a.coset.cmp(&b.coset)));
    Ok(out)
}

fn scan_prefix(
    level: usize,
    prefix: &mut Vec<i64>,
    ranges: &[(i64, i64)],
    f: &mut dyn FnMut(&[i64]) -> Result<(), LatticeError>,
) -> Result<(), LatticeError> {
    if level >= prefix.len() {
        return f(prefix);
    }
    for k in ranges[level].0..=ranges[level].1 {
        prefix[level] = k;
        scan_prefix(level + 1, prefix, ranges, f)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::parse_vector;

    #[test]
    fn small_balls() {
        let z = Lattice::integer(1);
        let pts = z.enumerate_in_ball(&[], 2.5, DEFAULT_CAP).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.point.to_f64()[0]).collect();
        assert_eq!(xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);

        let z2 = Lattice::integer(2);
        let pts = z2.enumerate_in_ball(&[], 1.1, DEFAULT_CAP).unwrap();
        assert_eq!(pts.len(), 5);
        let ks: Vec<Vec<i64>> = pts.iter().map(|p| p.k.clone()).collect();
        assert_eq!(ks, vec![vec![-1, 0], vec![0, -1], vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn boundary_points_are_kept() {
        let z2 = Lattice::integer(2);
        let pts = z2.enumerate_in_ball(&[], 5.0, DEFAULT_CAP).unwrap();
        assert!(pts.iter().any(|p| p.k == vec![3, 4]));
        // Gauss circle count N(5) = 81
        assert_eq!(pts.len(), 81);
    }

    #[test]
    fn cosets_and_cap() {
        let b = RealBasis::sqrt2();
        let z = Lattice::integer(1);
        let offs = vec![parse_vector("0", &b).unwrap(), parse_vector("sqrt2", &b).unwrap()];
        let pts = z.enumerate_in_ball(&offs, 3.0, DEFAULT_CAP).unwrap();
        // ℤ: −3..3 (7 points); ℤ+√2: −4.41..1.41 → k ∈ {−4,…,1} (6 points)
        assert_eq!(pts.iter().filter(|p| p.coset == 0).count(), 7);
        assert_eq!(pts.iter().filter(|p| p.coset == 1).count(), 6);
        assert!(matches!(
            z.enumerate_in_ball(&[], 100.0, 10),
            Err(LatticeError::CapExceeded { cap: 10 })
        ));
    }

    #[test]
    fn fibonacci_ball_count() {
        let f = Lattice::fibonacci();
        let r = 30.0;
        let pts = f.enumerate_in_ball(&[], r, DEFAULT_CAP).unwrap();
        let expect = std::f64::consts::PI * r * r / 5f64.sqrt();
        assert!((pts.len() as f64 - expect).abs() / expect < 0.03);
        for p in &pts {
            assert!(p.point.norm_f64() <= r + 1e-12);
        }
    }
}
