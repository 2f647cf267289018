use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exactnum::{ExactError, ExactReal, ExactVector, RealBasis, RealWire};
use crate::pointset::ball_volume;

/// Points within this distance of a window face count as boundary hits.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Bounded window `Ω ⊂ ℝᵐ`; intervals and boxes are half-open `[lo, hi)`,
/// balls are open.
#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    /// The zero-dimensional window of a lattice (`m = 0`).
    Point,
    Interval { lo: ExactReal, hi: ExactReal },
    Box { lo: Vec<ExactReal>, hi: Vec<ExactReal> },
    Ball { center: Vec<f64>, radius: f64 },
    Union(Vec<Window>),
}

/// Outcome of a window membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Membership {
    pub inside: bool,
    pub near_boundary: bool,
}

impl Window {
    pub fn interval(lo: ExactReal, hi: ExactReal) -> Self {
        Window::Interval { lo, hi }
    }

    /// `[0, 1)` over the rational basis.
    pub fn unit_interval() -> Self {
        let b = RealBasis::rational();
        Window::Interval {
            lo: ExactReal::zero(&b),
            hi: ExactReal::from_integer(&b, 1),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Point => 0,
            Window::Interval { .. } => 1,
            Window::Box { lo, .. } => lo.len(),
            Window::Ball { center, .. } => center.len(),
            Window::Union(ws) => ws.first().map_or(0, Window::dim),
        }
    }

    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            Window::Point => Vec::new(),
            Window::Interval { lo, hi } => vec![(lo.to_f64(), hi.to_f64())],
            Window::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| (a.to_f64(), b.to_f64())).collect(),
            Window::Ball { center, radius } => center.iter().map(|c| (c - radius, c + radius)).collect(),
            Window::Union(ws) => {
                let mut bb: Vec<(f64, f64)> = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim()];
                for w in ws {
                    for (acc, (a, b)) in bb.iter_mut().zip(w.bounding_box()) {
                        acc.0 = acc.0.min(a);
                        acc.1 = acc.1.max(b);
                    }
                }
                bb
            }
        }
    }

    pub fn contains(&self, x: &ExactVector) -> Result<Membership, ExactError> {
        Ok(match self {
            Window::Point => Membership {
                inside: true,
                near_boundary: false,
            },
            Window::Interval { lo, hi } => half_open(x.get(0), lo, hi)?,
            Window::Box { lo, hi } => {
                let mut m = Membership {
                    inside: true,
                    near_boundary: false,
                };
                for i in 0..lo.len() {
                    let c = half_open(x.get(i), &lo[i], &hi[i])?;
                    m.inside &= c.inside;
                    m.near_boundary |= c.near_boundary;
                }
                m
            }
            Window::Ball { center, radius } => {
                let d = x
                    .to_f64()
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                Membership {
                    inside: d < *radius,
                    near_boundary: (d - radius).abs() <= BOUNDARY_TOL * (1.0 + radius),
                }
            }
            Window::Union(ws) => {
                let mut m = Membership {
                    inside: false,
                    near_boundary: false,
                };
                for w in ws {
                    let c = w.contains(x)?;
                    m.inside |= c.inside;
                    m.near_boundary |= c.near_boundary;
                }
                m
            }
        })
    }

    /// `Ω + v`.
    pub fn translate(&self, v: &ExactVector) -> Result<Window, ExactError> {
        Ok(match self {
            Window::Point => Window::Point,
            Window::Interval { lo, hi } => {
                let (a, b) = shift_pair(lo, hi, v.get(0))?;
                Window::Interval { lo: a, hi: b }
            }
            Window::Box { lo, hi } => {
                let mut nl = Vec::with_capacity(lo.len());
                let mut nh = Vec::with_capacity(hi.len());
                for i in 0..lo.len() {
                    let (a, b) = shift_pair(&lo[i], &hi[i], v.get(i))?;
                    nl.push(a);
                    nh.push(b);
                }
                Window::Box { lo: nl, hi: nh }
            }
            Window::Ball { center, radius } => Window::Ball {
                center: center.iter().zip(v.to_f64()).map(|(c, t)| c + t).collect(),
                radius: *radius,
            },
            Window::Union(ws) => Window::Union(ws.iter().map(|w| w.translate(v)).collect::<Result<_, _>>()?),
        })
    }

    /// `a·Ω` for a positive rational factor `a`, about the origin.
    pub fn scale(&self, a: &num_rational::BigRational) -> Window {
        let af = crate::exactnum::rational_to_twofloat(a);
        let af = af.hi() + af.lo();
        match self {
            Window::Point => Window::Point,
            Window::Interval { lo, hi } => Window::Interval {
                lo: lo.scale(a),
                hi: hi.scale(a),
            },
            Window::Box { lo, hi } => Window::Box {
                lo: lo.iter().map(|x| x.scale(a)).collect(),
                hi: hi.iter().map(|x| x.scale(a)).collect(),
            },
            Window::Ball { center, radius } => Window::Ball {
                center: center.iter().map(|c| c * af).collect(),
                radius: radius * af,
            },
            Window::Union(ws) => Window::Union(ws.iter().map(|w| w.scale(a)).collect()),
        }
    }

    /// Lebesgue measure; `1` for the zero-dimensional window.
    pub fn measure(&self) -> f64 {
        match self {
            Window::Point => 1.0,
            Window::Interval { lo, hi } => (hi.to_twofloat() - lo.to_twofloat()).max(0.0.into()).into(),
            Window::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| f64::from((b.to_twofloat() - a.to_twofloat()).max(0.0.into())))
                .product(),
            Window::Ball { center, radius } => ball_volume(center.len(), *radius),
            Window::Union(ws) => union_measure(ws),
        }
    }

    /// Exact measure for intervals and boxes with exact endpoints.
    pub fn measure_exact(&self) -> Option<ExactReal> {
        match self {
            Window::Interval { lo, hi } => hi.try_sub(lo).ok(),
            Window::Box { lo, hi } => {
                let mut acc: Option<ExactReal> = None;
                for (a, b) in lo.iter().zip(hi) {
                    let side = b.try_sub(a).ok()?;
                    acc = Some(match acc {
                        None => side,
                        Some(p) => p.try_mul(&side).ok()?,
                    });
                }
                acc
            }
            Window::Union(ws) if ws.len() == 1 => ws[0].measure_exact(),
            _ => None,
        }
    }

    /// Equality of shapes and endpoint values, regardless of the bases the
    /// endpoints are written over.
    pub fn same_as(&self, other: &Window) -> bool {
        let eq = |a: &ExactReal, b: &ExactReal| common(a, b).map(|(x, y)| x == y).unwrap_or(false);
        match (self, other) {
            (Window::Point, Window::Point) => true,
            (Window::Interval { lo: a, hi: b }, Window::Interval { lo: c, hi: d }) => eq(a, c) && eq(b, d),
            (Window::Box { lo: a, hi: b }, Window::Box { lo: c, hi: d }) => {
                a.len() == c.len()
                    && a.iter().zip(c).all(|(x, y)| eq(x, y))
                    && b.iter().zip(d).all(|(x, y)| eq(x, y))
            }
            (Window::Ball { .. }, Window::Ball { .. }) => self == other,
            (Window::Union(a), Window::Union(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_as(y))
            }
            _ => false,
        }
    }

    /// Flattens nested unions.
    pub fn pieces(&self) -> Vec<&Window> {
        match self {
            Window::Union(ws) => ws.iter().flat_map(Window::pieces).collect(),
            w => vec![w],
        }
    }

    pub fn to_wire(&self) -> WindowWire {
        match self {
            Window::Point => WindowWire::Point,
            Window::Interval { lo, hi } => WindowWire::Interval {
                lo: lo.into(),
                hi: hi.into(),
            },
            Window::Box { lo, hi } => WindowWire::Box {
                lo: lo.iter().map(Into::into).collect(),
                hi: hi.iter().map(Into::into).collect(),
            },
            Window::Ball { center, radius } => WindowWire::Ball {
                center: center.clone(),
                radius: *radius,
            },
            Window::Union(ws) => WindowWire::Union {
                parts: ws.iter().map(Window::to_wire).collect(),
            },
        }
    }

    pub fn from_wire(w: &WindowWire) -> Result<Window, ExactError> {
        Ok(match w {
            WindowWire::Point => Window::Point,
            WindowWire::Interval { lo, hi } => {
                let (lo, hi) = (lo.decode()?, hi.decode()?);
                let t = RealBasis::union(&[lo.basis(), hi.basis()])?;
                Window::Interval {
                    lo: lo.embed(&t)?,
                    hi: hi.embed(&t)?,
                }
            }
            WindowWire::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(ExactError::DimensionMismatch(lo.len(), hi.len()));
                }
                Window::Box {
                    lo: lo.iter().map(RealWire::decode).collect::<Result<_, _>>()?,
                    hi: hi.iter().map(RealWire::decode).collect::<Result<_, _>>()?,
                }
            }
            WindowWire::Ball { center, radius } => Window::Ball {
                center: center.clone(),
                radius: *radius,
            },
            WindowWire::Union { parts } => {
                Window::Union(parts.iter().map(Window::from_wire).collect::<Result<_, _>>()?)
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum WindowWire {
    Point,
    Interval { lo: RealWire, hi: RealWire },
    Box { lo: Vec<RealWire>, hi: Vec<RealWire> },
    Ball { center: Vec<f64>, radius: f64 },
    Union { parts: Vec<WindowWire> },
}

fn common(a: &ExactReal, b: &ExactReal) -> Result<(ExactReal, ExactReal), ExactError> {
    let t: Arc<RealBasis> = RealBasis::union(&[a.basis(), b.basis()])?;
    Ok((a.embed(&t)?, b.embed(&t)?))
}

fn shift_pair(lo: &ExactReal, hi: &ExactReal, t: &ExactReal) -> Result<(ExactReal, ExactReal), ExactError> {
    let (lo, t1) = common(lo, t)?;
    let (hi, t2) = common(hi, t)?;
    Ok((lo.try_add(&t1)?, hi.try_add(&t2)?))
}

fn half_open(x: &ExactReal, lo: &ExactReal, hi: &ExactReal) -> Result<Membership, ExactError> {
    let (x1, lo) = common(x, lo)?;
    let (x2, hi) = common(x, hi)?;
    let dlo = x1.try_sub(&lo)?;
    let dhi = x2.try_sub(&hi)?;
    let inside = dlo.signum() != Ordering::Less && dhi.signum() == Ordering::Less;
    let scale = 1.0 + lo.to_f64().abs().max(hi.to_f64().abs());
    let near = dlo.to_f64().abs() <= BOUNDARY_TOL * scale || dhi.to_f64().abs() <= BOUNDARY_TOL * scale;
    Ok(Membership {
        inside,
        near_boundary: near,
    })
}

/// Measure of a union: exact coordinate compression when every piece is an
/// interval or box, midpoint-grid quadrature otherwise.
fn union_measure(ws: &[Window]) -> f64 {
    let pieces: Vec<&Window> = ws.iter().flat_map(Window::pieces).collect();
    let m = pieces.first().map_or(0, |w| w.dim());
    if m == 0 {
        return 1.0;
    }
    let boxes: Option<Vec<Vec<(f64, f64)>>> = pieces
        .iter()
        .map(|w| match w {
            Window::Interval { .. } | Window::Box { .. } => Some(w.bounding_box()),
            _ => None,
        })
        .collect();
    match boxes {
        Some(bs) => box_union_measure(&bs, m),
        None => grid_measure(&pieces, m),
    }
}

fn box_union_measure(bs: &[Vec<(f64, f64)>], m: usize) -> f64 {
    let cuts: Vec<Vec<f64>> = (0..m)
        .map(|d| {
            let mut c: Vec<f64> = bs.iter().flat_map(|b| [b[d].0, b[d].1]).collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; m];
    if cuts.iter().any(|c| c.len() < 2) {
        return 0.0;
    }
    loop {
        let mid: Vec<f64> = (0..m).map(|d| 0.5 * (cuts[d][idx[d]] + cuts[d][idx[d] + 1])).collect();
        if bs.iter().any(|b| (0..m).all(|d| b[d].0 <= mid[d] && mid[d] < b[d].1)) {
            total += (0..m).map(|d| cuts[d][idx[d] + 1] - cuts[d][idx[d]]).product::<f64>();
        }
        let mut d = 0;
        loop {
            if d == m {
                return total;
            }
            idx[d] += 1;
            if idx[d] + 1 < cuts[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn grid_measure(pieces: &[&Window], m: usize) -> f64 {
    let all = Window::Union(pieces.iter().map(|w| (*w).clone()).collect());
    let bb = all.bounding_box();
    let per = ((4_000_000f64).powf(1.0 / m as f64)).floor().max(2.0) as usize;
    let b = RealBasis::rational();
    let steps: Vec<f64> = bb.iter().map(|(a, c)| (c - a) / per as f64).collect();
    let cell: f64 = steps.iter().product();
    let mut idx = vec![0usize; m];
    let mut hits = 0usize;
    loop {
        let x: Vec<f64> = (0..m).map(|d| bb[d].0 + (idx[d] as f64 + 0.5) * steps[d]).collect();
        let q: Vec<_> = x
            .iter()
            .map(|v| num_rational::BigRational::from_float(*v).unwrap_or_default())
            .collect();
        let xv = ExactVector::from_rationals(&b, &q);
        if pieces.iter().any(|w| w.contains(&xv).map(|c| c.inside).unwrap_or(false)) {
            hits += 1;
        }
        let mut d = 0;
        loop {
            if d == m {
                return hits as f64 * cell;
            }
            idx[d] += 1;
            if idx[d] < per {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{parse_real, parse_vector};

    #[test]
    fn half_open_interval() {
        let w = Window::unit_interval();
        let b = RealBasis::golden();
        let at = |s: &str| w.contains(&parse_vector(s, &b).unwrap()).unwrap();
        assert!(at("0").inside && at("0").near_boundary);
        assert!(!at("1").inside);
        assert!(at("tau - 1").inside);
        assert!(at("2 - tau").inside);
        assert!(!at("-1/1000000").inside);
    }

    #[test]
    fn measures() {
        let b = RealBasis::golden();
        let w = Window::interval(parse_real("0", &b).unwrap(), parse_real("tau", &b).unwrap());
        assert!((w.measure() - 1.618033988749895).abs() < 1e-15);
        assert_eq!(w.measure_exact().unwrap(), parse_real("tau", &b).unwrap());
        let u = Window::Union(vec![Window::unit_interval(), w.clone()]);
        assert!((u.measure() - 1.618033988749895).abs() < 1e-15);
        let half = parse_vector("1/2", &RealBasis::rational()).unwrap();
        let v = Window::Union(vec![Window::unit_interval(), Window::unit_interval().translate(&half).unwrap()]);
        assert!((v.measure() - 1.5).abs() < 1e-15);
        let disk = Window::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let du = Window::Union(vec![disk.clone()]);
        assert!((du.measure() - std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn wire_round_trip() {
        let half = parse_vector("1/2", &RealBasis::rational()).unwrap();
        let w = Window::Union(vec![Window::unit_interval(), Window::unit_interval().translate(&half).unwrap()]);
        let s = serde_json::to_string(&w.to_wire()).unwrap();
        let back = Window::from_wire(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
