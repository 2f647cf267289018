use serde::Serialize;

use super::pairing::pair_unchecked;
use super::testfn::TestFunction;
use super::FourierError;
use crate::measure::AtomicMeasure;

/// Relative threshold below which a pairing counts as zero.
pub const GAP_THRESHOLD: f64 = 1e-9;

/// Probes per dimension are capped so that `n`-dimensional scans stay small.
const MAX_PROBES: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct Probe {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub pairing: f64,
    /// `|pairing| / (Σ|μ(λ)|·∫|φ|)`.
    pub ratio: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub center: Vec<f64>,
    pub radius: f64,
    pub puncture: Option<f64>,
    pub threshold: f64,
    /// `Σ|μ(λ)|`; the probes have unit integral.
    pub mass: f64,
    pub probes: Vec<Probe>,
    pub max_ratio: f64,
    pub gap: bool,
}

/// Pairs `μ̂` against band-limited bumps whose supports tile `B_r(u)`, or
/// `B_r(u) ∖ B_p(u)` with a puncture `p`; reports a gap when every pairing is
/// below `threshold·Σ|μ(λ)|`.
///
/// Adjacent probes overlap by half so every interior point of the tiled
/// region is interior to some probe. In `ℝⁿ` the probes are cubes inside the
/// inscribed cube of the ball.
pub fn gap_test(
    mu: &AtomicMeasure,
    center: &[f64],
    radius: f64,
    probes: usize,
    puncture: Option<f64>,
    threshold: f64,
) -> Result<GapReport, FourierError> {
    if mu.is_empty() {
        return Err(FourierError::EmptyMeasure);
    }
    if center.len() != mu.dim() {
        return Err(FourierError::Dimension(mu.dim(), center.len()));
    }
    if !(radius > 0.0) {
        return Err(FourierError::Grid(format!("ball radius must be positive, got {radius}")));
    }
    let boxes = if center.len() == 1 {
        tile_interval(center[0], radius, probes.max(1), puncture)
    } else {
        tile_ball(center, radius, probes.max(1), puncture)
    };
    let mass: f64 = mu.weights().iter().map(|w| w.norm()).sum();
    let extent = mu.r_trunc();
    let mut out = Vec::with_capacity(boxes.len());
    for (lo, hi) in boxes {
        let phi = TestFunction::spectral_bump(&lo, &hi, extent);
        let p = pair_unchecked(mu, &phi)?;
        let pairing = p.value.norm();
        out.push(Probe {
            lo,
            hi,
            pairing,
            ratio: pairing / mass,
            tail_bound: p.tail_bound,
        });
    }
    let max_ratio = out.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(GapReport {
        center: center.to_vec(),
        radius,
        puncture,
        threshold,
        mass,
        gap: max_ratio < threshold,
        probes: out,
        max_ratio,
    })
}

/// `count` half-overlapping intervals covering `(a, b)`.
fn cover(a: f64, b: f64, count: usize) -> Vec<(f64, f64)> {
    let s = (b - a) / (count + 1) as f64;
    (0..count).map(|j| (a + j as f64 * s, a + (j + 2) as f64 * s)).collect()
}

fn tile_interval(u: f64, r: f64, count: usize, puncture: Option<f64>) -> Vec<(Vec<f64>, Vec<f64>)> {
    let pieces = match puncture {
        None => cover(u - r, u + r, count),
        Some(p) => {
            let left = count / 2;
            let mut v = cover(u - r, u - p, left.max(1));
            v.extend(cover(u + p, u + r, (count - left).max(1)));
            v
        }
    };
    pieces.into_iter().map(|(a, b)| (vec![a], vec![b])).collect()
}

fn tile_ball(u: &[f64], r: f64, count: usize, puncture: Option<f64>) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = u.len();
    let half = r / (n as f64).sqrt();
    let per_axis = ((count.min(MAX_PROBES) as f64).powf(1.0 / n as f64).ceil() as usize).max(1);
    let axis = cover(-half, half, per_axis);
    let total = per_axis.pow(n as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for d in 0..n {
            let (a, b) = axis[c % per_axis];
            c /= per_axis;
            lo.push(u[d] + a);
            hi.push(u[d] + b);
        }
        if let Some(p) = puncture {
            // distance from the centre to the closed cube
            let d2: f64 = (0..n)
                .map(|d| {
                    let g = (lo[d] - u[d]).max(u[d] - hi[d]).max(0.0);
                    g * g
                })
                .sum();
            if d2.sqrt() <= p {
                continue;
            }
        }
        out.push((lo, hi));
    }
    out
}
