//! Finite truncations of discrete point sets and their geometry.

mod density;
mod index;
mod meyer;

pub(crate) use density::fmt17;
pub use density::{ball_volume, densities, translation_bound, DensityReport};
pub use index::SlabIndex;
pub use meyer::{meyer_witness, MeyerReport};

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{decode_vectors, ExactError, ExactVector, RealBasis, VectorWire};

/// Relative slack on the `|λ| ≤ R_trunc` invariant.
const NORM_SLACK: f64 = 1e-12;

/// Cap on probe centres for grid scans in dimension ≥ 2.
pub const MAX_PROBES: usize = 1 << 22;

#[derive(Debug, Error)]
pub enum PointSetError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("need at least {need} points, have {have}")]
    TooFew { need: usize, have: usize },
    #[error("duplicate point {0}")]
    Duplicate(String),
    #[error("point {point} has norm {norm} > R_trunc = {r_trunc}")]
    OutsideTruncation {
        point: String,
        norm: f64,
        r_trunc: f64,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("radius {radius} exceeds the guard 0.8·R_trunc = {guard}")]
    RadiusTooLarge { radius: f64, guard: f64 },
    #[error("Meyer residues exceed budget {budget}: {histogram:?}")]
    MeyerBudget {
        budget: usize,
        histogram: Vec<(String, usize)>,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Deduplicated points, complete inside the ball of radius `r_trunc`.
#[derive(Clone, Debug)]
pub struct PointSet {
    points: Vec<ExactVector>,
    numeric: Vec<Vec<f64>>,
    r_trunc: f64,
    provenance: String,
    index: SlabIndex,
}

impl PointSet {
    pub fn new(
        points: Vec<ExactVector>,
        r_trunc: f64,
        provenance: impl Into<String>,
    ) -> Result<Self, PointSetError> {
        let points = common_basis(points)?;
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if !seen.insert(p) {
                return Err(PointSetError::Duplicate(p.to_string()));
            }
        }
        if let Some(first) = points.first() {
            if let Some(p) = points.iter().find(|p| p.dim() != first.dim()) {
                return Err(PointSetError::Dimension(first.dim(), p.dim()));
            }
        }
        let numeric: Vec<Vec<f64>> = points.iter().map(ExactVector::to_f64).collect();
        for (p, x) in points.iter().zip(&numeric) {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > r_trunc * (1.0 + NORM_SLACK) {
                return Err(PointSetError::OutsideTruncation {
                    point: p.to_string(),
                    norm,
                    r_trunc,
                });
            }
        }
        let index = SlabIndex::new(&numeric);
        Ok(PointSet {
            points,
            numeric,
            r_trunc,
            provenance: provenance.into(),
            index,
        })
    }

    /// Keeps the points with norm `≤ r` and declares `r` as the new
    /// truncation radius.
    pub fn truncate(&self, r: f64) -> PointSet {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| norm(&self.numeric[i]) <= r * (1.0 + NORM_SLACK))
            .collect();
        self.subset(&keep, r.min(self.r_trunc), format!("{} ∩ B({r})", self.provenance))
    }

    pub(crate) fn subset(&self, keep: &[usize], r_trunc: f64, provenance: String) -> PointSet {
        let numeric: Vec<Vec<f64>> = keep.iter().map(|&i| self.numeric[i].clone()).collect();
        PointSet {
            points: keep.iter().map(|&i| self.points[i].clone()).collect(),
            index: SlabIndex::new(&numeric),
            numeric,
            r_trunc,
            provenance,
        }
    }

    pub fn points(&self) -> &[ExactVector] {
        &self.points
    }

    pub fn numeric(&self) -> &[Vec<f64>] {
        &self.numeric
    }

    pub fn index(&self) -> &SlabIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, ExactVector::dim)
    }

    pub fn basis(&self) -> Option<&Arc<RealBasis>> {
        self.points.first().map(ExactVector::basis)
    }

    pub fn r_trunc(&self) -> f64 {
        self.r_trunc
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Position of an exact point, if present.
    pub fn position(&self, x: &ExactVector) -> Option<usize> {
        let target = self.basis()?;
        let x = x.embed(target).ok()?;
        let cands = self.index.ball(&x.to_f64(), 1e-9 * (1.0 + self.r_trunc));
        cands.into_iter().find(|&i| self.points[i] == x)
    }

    pub fn contains(&self, x: &ExactVector) -> bool {
        self.position(x).is_some()
    }

    /// Every point moved by `v`. Completeness only survives inside
    /// `B(R_trunc − |v|)`, so points outside it are dropped.
    pub fn translate(&self, v: &ExactVector) -> Result<PointSet, PointSetError> {
        let r = self.r_trunc - v.norm_f64();
        if r <= 0.0 {
            return Err(PointSetError::Invalid("translation leaves no complete region".into()));
        }
        let mut bases: Vec<&Arc<RealBasis>> = vec![v.basis()];
        bases.extend(self.basis());
        let target = RealBasis::union(&bases)?;
        let v = v.embed(&target)?;
        let moved = self
            .points
            .iter()
            .map(|p| p.embed(&target)?.try_add(&v))
            .collect::<Result<Vec<_>, _>>()?;
        let moved: Vec<ExactVector> = moved
            .into_iter()
            .filter(|p| p.norm_f64() <= r * (1.0 + NORM_SLACK))
            .collect();
        PointSet::new(moved, r, format!("{} + {}", self.provenance, v))
    }

    pub fn to_wire(&self) -> PointSetWire {
        PointSetWire {
            points: self
                .points
                .iter()
                .map(|p| p.entries().iter().map(Into::into).collect())
                .collect(),
            r_trunc: self.r_trunc,
        }
    }

    pub fn from_wire(w: &PointSetWire, provenance: &str) -> Result<Self, PointSetError> {
        PointSet::new(decode_vectors(&w.points)?, w.r_trunc, provenance)
    }
}

/// JSON form `{"points": [[ExactReal,…],…], "R_trunc": f}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointSetWire {
    pub points: Vec<VectorWire>,
    #[serde(rename = "R_trunc")]
    pub r_trunc: f64,
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn common_basis(points: Vec<ExactVector>) -> Result<Vec<ExactVector>, ExactError> {
    let mut bases: Vec<Arc<RealBasis>> = Vec::new();
    for p in &points {
        if !bases.iter().any(|b| b.same_as(p.basis())) {
            bases.push(p.basis().clone());
        }
    }
    if bases.len() <= 1 {
        return Ok(points);
    }
    let refs: Vec<&Arc<RealBasis>> = bases.iter().collect();
    let target = RealBasis::union(&refs)?;
    points.into_iter().map(|p| p.embed(&target)).collect()
}

/// Minimal pairwise distance.
pub fn min_gap(a: &PointSet) -> Result<f64, PointSetError> {
    if a.len() < 2 {
        return Err(PointSetError::TooFew {
            need: 2,
            have: a.len(),
        });
    }
    Ok(a.index.closest_pair().expect("two points").2)
}

/// Histogram of consecutive gaps of a one-dimensional set, keyed by the
/// exact gap value.
pub fn gap_histogram(a: &PointSet) -> Result<Vec<(ExactVector, usize)>, PointSetError> {
    if a.dim() != 1 {
        return Err(PointSetError::Dimension(1, a.dim()));
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a.points[i].cmp_numeric(&a.points[j]));
    let mut hist: Vec<(ExactVector, usize)> = Vec::new();
    for w in order.windows(2) {
        let g = a.points[w[1]].try_sub(&a.points[w[0]])?;
        match hist.iter_mut().find(|(h, _)| *h == g) {
            Some((_, c)) => *c += 1,
            None => hist.push((g, 1)),
        }
    }
    hist.sort_by(|x, y| x.0.cmp_numeric(&y.0));
    Ok(hist)
}

/// `{a − a′ : |a − a′| ≤ r}`, exact and deduplicated.
pub fn difference_set(a: &PointSet, r: f64) -> Result<PointSet, PointSetError> {
    let diffs: Vec<Vec<ExactVector>> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            a.index
                .ball(&a.numeric[i], r)
                .into_iter()
                .map(|j| a.points[j].try_sub(&a.points[i]))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for d in diffs.into_iter().flatten() {
        if d.norm_f64() <= r && seen.insert(d.clone()) {
            out.push(d);
        }
    }
    out.sort_by(|x, y| x.cmp_numeric(y));
    PointSet::new(out, r, format!("({0}) − ({0}) ∩ B({r})", a.provenance))
}

/// `Λ_h = {λ ∈ A : λ + h ∈ A}` with no edge correction.
pub fn lambda_h(a: &PointSet, h: &ExactVector) -> Result<PointSet, PointSetError> {
    lambda_h_within(a, h, a.r_trunc, a.r_trunc)
}

/// `Λ_h` restricted to `|λ| ≤ R_trunc − |h|`, the region on which it is
/// complete; the result's truncation radius is `R_trunc − |h|`.
pub fn lambda_h_corrected(a: &PointSet, h: &ExactVector) -> Result<PointSet, PointSetError> {
    let r = (a.r_trunc - h.norm_f64()).max(0.0);
    lambda_h_within(a, h, r, r)
}

fn lambda_h_within(
    a: &PointSet,
    h: &ExactVector,
    limit: f64,
    r_trunc: f64,
) -> Result<PointSet, PointSetError> {
    if h.dim() != a.dim() {
        return Err(PointSetError::Dimension(a.dim(), h.dim()));
    }
    let lookup = ExactLookup::new(a, h)?;
    let keep: Vec<usize> = (0..a.len())
        .filter(|&i| norm(&a.numeric[i]) <= limit * (1.0 + NORM_SLACK))
        .filter(|&i| lookup.shifted_index(i).is_some())
        .collect();
    Ok(a.subset(&keep, r_trunc, format!("Λ_h, h = {h}")))
}

/// Exact lookup of `λ + h` among the points of a set.
pub(crate) struct ExactLookup<'a> {
    set: &'a PointSet,
    map: HashMap<ExactVector, usize>,
    h: ExactVector,
    target: Arc<RealBasis>,
}

impl<'a> ExactLookup<'a> {
    pub(crate) fn new(set: &'a PointSet, h: &ExactVector) -> Result<Self, PointSetError> {
        let mut bases: Vec<&Arc<RealBasis>> = vec![h.basis()];
        bases.extend(set.basis());
        let target = RealBasis::union(&bases)?;
        let map = set
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| Ok((p.embed(&target)?, i)))
            .collect::<Result<HashMap<_, _>, ExactError>>()?;
        Ok(ExactLookup {
            set,
            map,
            h: h.embed(&target)?,
            target,
        })
    }

    /// Index of `λᵢ + h` if present.
    pub(crate) fn shifted_index(&self, i: usize) -> Option<usize> {
        let p = self.set.points[i].embed(&self.target).ok()?.try_add(&self.h).ok()?;
        self.map.get(&p).copied()
    }
}

/// Result of a covering-radius probe scan.
#[derive(Clone, Debug, Serialize)]
pub struct CoveringReport {
    pub radius: f64,
    pub pitch: f64,
    pub probe_radius: f64,
    pub half_region_radius: f64,
    pub relatively_dense: bool,
    pub worst_center: Vec<f64>,
}

/// Largest distance from a probe centre to the set, over a grid of pitch
/// `≤ min_gap/4` inside `B(0.8·R_trunc)`.
pub fn covering_radius(a: &PointSet) -> Result<CoveringReport, PointSetError> {
    if a.is_empty() {
        return Err(PointSetError::TooFew { need: 1, have: 0 });
    }
    let n = a.dim();
    let probe_radius = 0.8 * a.r_trunc;
    let gap = if a.len() >= 2 { min_gap(a)? } else { probe_radius };
    let pitch = probe_pitch(n, probe_radius, gap / 4.0);
    let (radius, worst) = covering_scan(a, probe_radius, pitch);
    let (half, _) = covering_scan(a, probe_radius / 2.0, pitch);
    let relatively_dense = !(radius >= 1.5 * half && radius > probe_radius / 4.0);
    Ok(CoveringReport {
        radius,
        pitch,
        probe_radius,
        half_region_radius: half,
        relatively_dense,
        worst_center: worst,
    })
}

/// Grid pitch no larger than `target`, coarsened only if the number of
/// probes in `B(radius)` would exceed [`MAX_PROBES`].
pub(crate) fn probe_pitch(n: usize, radius: f64, target: f64) -> f64 {
    let mut pitch = target;
    while ((2.0 * radius / pitch).floor() + 1.0).powi(n as i32) > MAX_PROBES as f64 {
        pitch *= 1.25;
    }
    if pitch > target {
        log::warn!("probe pitch coarsened from {target} to {pitch} to respect the probe cap");
    }
    pitch
}

/// Grid points `pitch·ℤⁿ ∩ B(radius)`; always contains the origin.
pub(crate) fn grid_centers(n: usize, radius: f64, pitch: f64) -> Vec<Vec<f64>> {
    let k = (radius / pitch).floor() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-k; n];
    loop {
        let c: Vec<f64> = idx.iter().map(|&i| i as f64 * pitch).collect();
        if norm(&c) <= radius {
            out.push(c);
        }
        let mut d = 0;
        loop {
            if d == n {
                return out;
            }
            idx[d] += 1;
            if idx[d] <= k {
                break;
            }
            idx[d] = -k;
            d += 1;
        }
    }
}

fn covering_scan(a: &PointSet, radius: f64, pitch: f64) -> (f64, Vec<f64>) {
    let centers = grid_centers(a.dim(), radius, pitch);
    centers
        .par_iter()
        .map(|c| {
            let d = a.index.nearest(c).map_or(f64::INFINITY, |x| x.1);
            (d, c.clone())
        })
        .reduce(
            || (f64::NEG_INFINITY, Vec::new()),
            |x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{parse_vector, ratio};
    use crate::lattice::Lattice;

    fn z_trunc(r: i64) -> PointSet {
        let b = RealBasis::rational();
        let pts = (-r..=r).map(|k| ExactVector::from_integers(&b, &[k])).collect();
        PointSet::new(pts, r as f64, "Z").unwrap()
    }

    #[test]
    fn construction_invariants() {
        let b = RealBasis::rational();
        let p = ExactVector::from_integers(&b, &[1]);
        assert!(matches!(
            PointSet::new(vec![p.clone(), p.clone()], 2.0, "dup"),
            Err(PointSetError::Duplicate(_))
        ));
        assert!(matches!(
            PointSet::new(vec![ExactVector::from_integers(&b, &[5])], 2.0, "far"),
            Err(PointSetError::OutsideTruncation { .. })
        ));
    }

    #[test]
    fn gaps() {
        assert_eq!(min_gap(&z_trunc(10)).unwrap(), 1.0);
        let b = RealBasis::rational();
        let pts = vec![
            ExactVector::from_integers(&b, &[0]),
            ExactVector::from_rationals(&b, &[ratio(1, 9)]),
            ExactVector::from_integers(&b, &[5]),
        ];
        let s = PointSet::new(pts, 5.0, "three").unwrap();
        assert!((min_gap(&s).unwrap() - 1.0 / 9.0).abs() < 1e-16);
        let one = PointSet::new(vec![ExactVector::from_integers(&b, &[0])], 1.0, "one").unwrap();
        assert!(min_gap(&one).is_err());
    }

    #[test]
    fn differences_and_lambda_h() {
        let b = RealBasis::rational();
        let pts = [0, 1, 3].iter().map(|&k| ExactVector::from_integers(&b, &[k])).collect();
        let a = PointSet::new(pts, 3.0, "013").unwrap();
        let d = difference_set(&a, 10.0).unwrap();
        let got: Vec<f64> = d.numeric().iter().map(|x| x[0]).collect();
        assert_eq!(got, vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);

        let z = z_trunc(10);
        let h = ExactVector::from_integers(&b, &[1]);
        let lh = lambda_h(&z, &h).unwrap();
        let xs: Vec<f64> = lh.numeric().iter().map(|x| x[0]).collect();
        assert_eq!(xs, (-10..=9).map(|k| k as f64).collect::<Vec<_>>());
        let lc = lambda_h_corrected(&z, &h).unwrap();
        assert_eq!(lc.len(), 19);
        assert_eq!(lc.r_trunc(), 9.0);
    }

    #[test]
    fn covering() {
        let rep = covering_radius(&z_trunc(50)).unwrap();
        assert!((rep.radius - 0.5).abs() <= rep.pitch);
        assert!(rep.relatively_dense);

        let b = RealBasis::rational();
        let pts = (-10..=10).map(|k| ExactVector::from_integers(&b, &[k, 0])).collect();
        let line = PointSet::new(pts, 10.0, "Z x 0").unwrap();
        let rep = covering_radius(&line).unwrap();
        assert!((rep.radius - 8.0).abs() < 0.3);
        assert!(!rep.relatively_dense);
    }

    #[test]
    fn translation_and_wire() {
        let g = RealBasis::golden();
        let pts: Vec<ExactVector> = Lattice::integer(1)
            .enumerate_in_ball(&[], 20.0, 1000)
            .unwrap()
            .into_iter()
            .map(|p| p.point)
            .collect();
        let a = PointSet::new(pts, 20.0, "Z").unwrap();
        let t = a.translate(&parse_vector("tau - 1", &g).unwrap()).unwrap();
        assert!((t.r_trunc() - (20.0 - 0.618033988749895)).abs() < 1e-12);
        assert!(t.contains(&parse_vector("tau", &g).unwrap()));
        let s = serde_json::to_string(&t.to_wire()).unwrap();
        let w: PointSetWire = serde_json::from_str(&s).unwrap();
        let back = PointSet::from_wire(&w, "wire").unwrap();
        assert_eq!(back.points(), t.points());
    }
}
