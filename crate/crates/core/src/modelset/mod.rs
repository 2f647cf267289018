//! Cut-and-project schemes `(ℝⁿ × ℝᵐ, Γ)`, windows and the model sets
//! `{p₁(γ) : γ ∈ Γ, p₂(γ) ∈ Ω}`.

mod extend;
mod window;

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{ExactError, ExactReal, ExactVector, RealBasis};
use crate::lattice::{enumerate_region, Lattice, LatticeError, LatticeWire, Region};
use crate::linalg::rref;
use crate::pointset::{PointSet, PointSetError};

pub use extend::{extend_scheme, Extension};
pub use window::{Membership, Window, WindowWire, BOUNDARY_TOL};

#[derive(Debug, Error)]
pub enum ModelSetError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    PointSet(#[from] PointSetError),
    #[error("scheme dimensions n={n}, m={m} do not match a lattice of dimension {dim}")]
    Dimension { n: usize, m: usize, dim: usize },
    #[error("window has dimension {got}, scheme expects {want}")]
    WindowDimension { got: usize, want: usize },
    #[error("p₁ is not injective on the enumerated lattice points: {0}")]
    NotInjective(String),
    #[error("offset {0} cannot be decomposed over the scheme")]
    Undecomposable(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

/// A lattice `Γ ⊂ ℝⁿ⁺ᵐ` with the coordinate projections `p₁` onto the first
/// `n` and `p₂` onto the last `m` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CutAndProjectScheme {
    gamma: Lattice,
    n: usize,
    m: usize,
}

impl CutAndProjectScheme {
    pub fn new(gamma: Lattice, n: usize, m: usize) -> Result<Self, ModelSetError> {
        if n == 0 || n + m != gamma.dim() {
            return Err(ModelSetError::Dimension {
                n,
                m,
                dim: gamma.dim(),
            });
        }
        Ok(CutAndProjectScheme { gamma, n, m })
    }

    /// The degenerate scheme `m = 0`, whose model set is the lattice itself.
    pub fn lattice(l: Lattice) -> Self {
        let n = l.dim();
        CutAndProjectScheme { gamma: l, n, m: 0 }
    }

    /// `Γ = {(a + bτ, a + b(1−τ))}` in `ℝ × ℝ`.
    pub fn fibonacci() -> Self {
        CutAndProjectScheme {
            gamma: Lattice::fibonacci(),
            n: 1,
            m: 1,
        }
    }

    /// `Γ ⊂ ℝ³` spanned by `(1,0,√2)`, `(0,1,√3)`, `(√2,√3,−1)`, projected onto
    /// the plane of the first two coordinates.
    pub fn z3_to_r2() -> Self {
        let b = RealBasis::sqrt2_sqrt3();
        let col = |s: &str| crate::exactnum::parse_vector(s, &b).expect("preset column");
        let gamma = Lattice::from_columns(&[col("1,0,sqrt2"), col("0,1,sqrt3"), col("sqrt2,sqrt3,-1")])
            .expect("preset lattice is regular");
        CutAndProjectScheme { gamma, n: 2, m: 1 }
    }

    pub fn gamma(&self) -> &Lattice {
        &self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p1(&self, x: &ExactVector) -> ExactVector {
        ExactVector::new(x.entries()[..self.n].to_vec()).expect("n ≥ 1")
    }

    /// Internal-space image; `None` when `m = 0`.
    pub fn p2(&self, x: &ExactVector) -> Option<ExactVector> {
        (self.m > 0).then(|| ExactVector::new(x.entries()[self.n..].to_vec()).expect("m ≥ 1"))
    }

    /// Rational `Γ`-coordinates `c` with `p₁(Γc) = v`, if `v ∈ ℚ·p₁(Γ)`.
    ///
    /// Solved over the ℚ-coordinates of the entries, so it is exact for any
    /// basis, tabled or not.
    pub fn p1_preimage(&self, v: &ExactVector) -> Result<Option<Vec<BigRational>>, ModelSetError> {
        let target = RealBasis::union(&[self.gamma.field(), v.basis()])?;
        let cols: Vec<Vec<BigRational>> = self
            .gamma
            .generators()
            .iter()
            .map(|c| flatten(&self.p1(c), &target))
            .collect::<Result<_, _>>()?;
        let rhs = flatten(v, &target)?;
        Ok(solve_consistent(&cols, &rhs))
    }

    pub fn to_wire(&self, window: &Window) -> SchemeWire {
        SchemeWire {
            gamma: self.gamma.to_wire(),
            n: self.n,
            m: self.m,
            window: window.to_wire(),
        }
    }

    pub fn from_wire(w: &SchemeWire) -> Result<(Self, Window), ModelSetError> {
        let s = CutAndProjectScheme::new(Lattice::from_wire(&w.gamma)?, w.n, w.m)?;
        let win = Window::from_wire(&w.window)?;
        check_window(&s, &win)?;
        Ok((s, win))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeWire {
    pub gamma: LatticeWire,
    pub n: usize,
    pub m: usize,
    pub window: WindowWire,
}

/// ℚ-coordinates of a vector, entry-major: `(entry i, generator t) ↦ i·g + t`.
pub(crate) fn flatten(v: &ExactVector, target: &Arc<RealBasis>) -> Result<Vec<BigRational>, ExactError> {
    let v = v.embed(target)?;
    Ok(v.entries().iter().flat_map(|e| e.coeffs().iter().cloned()).collect())
}

/// Unique solution of `Σ cₖ colsₖ = rhs` if the system is consistent and the
/// columns are independent.
pub(crate) fn solve_consistent(cols: &[Vec<BigRational>], rhs: &[BigRational]) -> Option<Vec<BigRational>> {
    let d = cols.len();
    let rows: Vec<Vec<BigRational>> = (0..rhs.len())
        .map(|r| {
            let mut row: Vec<BigRational> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    let (red, pivots) = rref(rows);
    if pivots.contains(&d) || pivots.len() < d {
        return None;
    }
    Some((0..d).map(|i| red[i][d].clone()).collect())
}

fn check_window(s: &CutAndProjectScheme, w: &Window) -> Result<(), ModelSetError> {
    if w.dim() != s.m {
        return Err(ModelSetError::WindowDimension { got: w.dim(), want: s.m });
    }
    Ok(())
}

/// The cylinder `|p₁(x)| ≤ R`, `p₂(x) ∈ Ω`.
struct Cylinder<'a> {
    n: usize,
    radius: f64,
    window: &'a Window,
    bbox: Vec<(f64, f64)>,
    boundary_hits: AtomicUsize,
    failed: AtomicBool,
}

const CYLINDER_SLACK: f64 = 1e-9;

impl Region for Cylinder<'_> {
    fn bounds(&self, dim: usize) -> Vec<(f64, f64)> {
        let mut b = vec![(-self.radius, self.radius); self.n];
        b.extend(self.bbox.iter().copied());
        debug_assert_eq!(b.len(), dim);
        b
    }

    fn line_interval(&self, a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = crate::lattice::ball_line_interval(&a[..self.n], &b[..self.n], self.radius)?;
        for (i, &(wlo, whi)) in self.bbox.iter().enumerate() {
            let (x, v) = (a[self.n + i], b[self.n + i]);
            let (wlo, whi) = (wlo - CYLINDER_SLACK, whi + CYLINDER_SLACK);
            if v == 0.0 {
                if x < wlo || x > whi {
                    return None;
                }
                continue;
            }
            let (t0, t1) = ((wlo - x) / v, (whi - x) / v);
            lo = lo.max(t0.min(t1));
            hi = hi.min(t0.max(t1));
        }
        (lo <= hi).then_some((lo, hi))
    }

    fn contains(&self, x: &ExactVector) -> bool {
        let r = twofloat::TwoFloat::from(self.radius);
        let p1 = ExactVector::new(x.entries()[..self.n].to_vec()).expect("n ≥ 1");
        if crate::lattice::norm_sq_twofloat(&p1) > r * r {
            return false;
        }
        if self.bbox.is_empty() {
            return true;
        }
        let p2 = ExactVector::new(x.entries()[self.n..].to_vec()).expect("m ≥ 1");
        match self.window.contains(&p2) {
            Ok(m) => {
                if m.near_boundary {
                    self.boundary_hits.fetch_add(1, Ordering::Relaxed);
                }
                m.inside
            }
            Err(_) => {
                self.failed.store(true, Ordering::Relaxed);
                false
            }
        }
    }
}

/// A generated model set with the `Γ`-coordinates of each point.
#[derive(Clone, Debug)]
pub struct ModelSet {
    pub points: PointSet,
    pub gamma_coords: Vec<Vec<i64>>,
    /// Lattice points whose internal coordinate fell within
    /// [`BOUNDARY_TOL`] of the window boundary.
    pub boundary_hits: usize,
}

/// All `p₁(γ)` with `|p₁(γ)| ≤ R` and `p₂(γ) ∈ Ω`.
pub fn generate(
    scheme: &CutAndProjectScheme,
    window: &Window,
    radius: f64,
    cap: usize,
) -> Result<ModelSet, ModelSetError> {
    check_window(scheme, window)?;
    if !(radius > 0.0) {
        return Err(LatticeError::BadRadius(radius).into());
    }
    let region = Cylinder {
        n: scheme.n,
        radius,
        window,
        bbox: window.bounding_box(),
        boundary_hits: AtomicUsize::new(0),
        failed: AtomicBool::new(false),
    };
    let origin = ExactVector::zero(scheme.gamma.field(), scheme.gamma.dim());
    let found = enumerate_region(&scheme.gamma, &[origin], &region, cap)?;
    if region.failed.load(Ordering::Relaxed) {
        return Err(ModelSetError::Undecomposable("window test failed on a lattice point".into()));
    }
    let hits = region.boundary_hits.load(Ordering::Relaxed);
    if hits > 0 {
        log::warn!("{hits} lattice points within {BOUNDARY_TOL:e} of the window boundary");
    }
    let mut points = Vec::with_capacity(found.len());
    let mut coords = Vec::with_capacity(found.len());
    for p in found {
        points.push(scheme.p1(&p.point));
        coords.push(p.k);
    }
    let provenance = format!("model set n={} m={} R={radius}", scheme.n, scheme.m);
    let points = match PointSet::new(points, radius, &provenance) {
        Ok(ps) => ps,
        Err(PointSetError::Duplicate(p)) => return Err(ModelSetError::NotInjective(p)),
        Err(e) => return Err(e.into()),
    };
    Ok(ModelSet {
        points,
        gamma_coords: coords,
        boundary_hits: hits,
    })
}

/// `mes(Ω) / det(Γ)`.
pub fn predicted_density(scheme: &CutAndProjectScheme, window: &Window) -> f64 {
    window.measure() / scheme.gamma.det().to_f64().abs()
}

/// Exact `mes(Ω) / |det Γ|` when both are exact and the field has a
/// multiplication table.
pub fn predicted_density_exact(scheme: &CutAndProjectScheme, window: &Window) -> Option<ExactReal> {
    let det = scheme.gamma.det().exact.clone()?.abs();
    let mes = if scheme.m == 0 {
        ExactReal::from_integer(det.basis(), 1)
    } else {
        window.measure_exact()?
    };
    let t = RealBasis::union(&[mes.basis(), det.basis()]).ok()?;
    mes.embed(&t).ok()?.try_div(&det.embed(&t).ok()?).ok()
}

/// Finite ε-net check of the denseness of `p₂(Γ)` in the window: every cell of
/// side `eps` of the window's bounding box whose centre lies in `Ω` must
/// contain some `p₂(γ)` with `|p₁(γ)| ≤ R` and `p₂(γ) ∈ Ω`.
#[derive(Clone, Debug, Serialize)]
pub struct EpsNetReport {
    pub eps: f64,
    pub cells: usize,
    pub hit: usize,
}

impl EpsNetReport {
    pub fn complete(&self) -> bool {
        self.hit == self.cells
    }
}

pub fn p2_density_check(
    scheme: &CutAndProjectScheme,
    window: &Window,
    radius: f64,
    eps: f64,
) -> Result<EpsNetReport, ModelSetError> {
    if scheme.m == 0 {
        return Ok(EpsNetReport { eps, cells: 0, hit: 0 });
    }
    let ms = generate(scheme, window, radius, crate::lattice::DEFAULT_CAP)?;
    let bbox = window.bounding_box();
    let counts: Vec<usize> = bbox.iter().map(|(a, b)| ((b - a) / eps).ceil().max(1.0) as usize).collect();
    let total: usize = counts.iter().product();
    let cell_of = |x: &[f64]| -> Option<usize> {
        let mut idx = 0;
        for d in (0..x.len()).rev() {
            let c = ((x[d] - bbox[d].0) / eps).floor();
            if c < 0.0 || c as usize >= counts[d] {
                return None;
            }
            idx = idx * counts[d] + c as usize;
        }
        Some(idx)
    };
    let mut hit = vec![false; total];
    for k in &ms.gamma_coords {
        let g = scheme.gamma.point(k);
        if let Some(p2) = scheme.p2(&g) {
            if let Some(c) = cell_of(&p2.to_f64()) {
                hit[c] = true;
            }
        }
    }
    let b = RealBasis::rational();
    let mut cells = 0;
    let mut hits = 0;
    for (c, &h) in hit.iter().enumerate() {
        let mut rem = c;
        let centre: Vec<BigRational> = (0..bbox.len())
            .map(|d| {
                let i = rem % counts[d];
                rem /= counts[d];
                BigRational::from_float(bbox[d].0 + (i as f64 + 0.5) * eps).unwrap_or_else(BigRational::zero)
            })
            .collect();
        if window.contains(&ExactVector::from_rationals(&b, &centre))?.inside {
            cells += 1;
            hits += usize::from(h);
        }
    }
    Ok(EpsNetReport { eps, cells, hit: hits })
}

/// Relative deviation of the centred density estimate from the prediction.
pub fn density_error(ms: &ModelSet, predicted: f64, r: f64) -> Result<f64, ModelSetError> {
    let rep = crate::pointset::densities(&ms.points, &[r])?;
    Ok(((rep.d_sharp[0] - predicted) / predicted).abs())
}
