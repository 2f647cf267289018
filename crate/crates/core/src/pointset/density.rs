//! Finite-window estimators of the lower, centred and upper densities.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{grid_centers, min_gap, PointSet, PointSetError};

/// Probe-centre cap per radius in dimension ≥ 2; every centre costs a ball
/// count there.
const MAX_DENSITY_CENTERS: usize = 4096;

/// Volume of the Euclidean ball of radius `r` in ℝⁿ.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    // V_n = π^{n/2} rⁿ / Γ(n/2 + 1), via V_n = V_{n−2}·2π/n
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v * r.powi(n as i32)
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub radii: Vec<f64>,
    pub d_minus: Vec<f64>,
    pub d_sharp: Vec<f64>,
    pub d_plus: Vec<f64>,
    pub pitch: Vec<f64>,
    pub centers: Vec<usize>,
    /// Values at the largest radius.
    pub extrapolated: (f64, f64, f64),
    pub min_gap: f64,
    pub dim: usize,
}

impl DensityReport {
    /// CSV ladder with columns `R, d_minus, d_sharp, d_plus`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["R", "d_minus", "d_sharp", "d_plus"])?;
        for i in 0..self.radii.len() {
            wr.write_record([
                fmt17(self.radii[i]),
                fmt17(self.d_minus[i]),
                fmt17(self.d_sharp[i]),
                fmt17(self.d_plus[i]),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Largest deviation of the sliding-window envelope from `target`.
    pub fn envelope_error(&self, i: usize, target: f64) -> f64 {
        (self.d_minus[i] - target).abs().max((self.d_plus[i] - target).abs())
    }
}

pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// For each radius `R`: inf and sup of `#(A ∩ B(x,R)) / |B_R|` over grid
/// centres `x ∈ B(0.8·R_trunc − R)` with pitch `min_gap/4`, and the centred
/// ratio at `x = 0`.
pub fn densities(a: &PointSet, radii: &[f64]) -> Result<DensityReport, PointSetError> {
    let guard = 0.8 * a.r_trunc();
    for &r in radii {
        if !(r > 0.0) || r > guard {
            return Err(PointSetError::RadiusTooLarge { radius: r, guard });
        }
    }
    let n = a.dim();
    let gap = min_gap(a)?;
    let mut rep = DensityReport {
        radii: radii.to_vec(),
        d_minus: Vec::new(),
        d_sharp: Vec::new(),
        d_plus: Vec::new(),
        pitch: Vec::new(),
        centers: Vec::new(),
        extrapolated: (0.0, 0.0, 0.0),
        min_gap: gap,
        dim: n,
    };
    for &r in radii {
        let region = guard - r;
        let pitch = center_pitch(n, region, gap / 4.0);
        let centers = grid_centers(n, region, pitch);
        let vol = ball_volume(n, r);
        let (lo, hi) = centers
            .par_iter()
            .map(|c| {
                let k = a.index().count_ball(c, r);
                (k, k)
            })
            .reduce(|| (usize::MAX, 0), |x, y| (x.0.min(y.0), x.1.max(y.1)));
        let centred = a.index().count_ball(&vec![0.0; n], r);
        rep.d_minus.push(lo as f64 / vol);
        rep.d_sharp.push(centred as f64 / vol);
        rep.d_plus.push(hi as f64 / vol);
        rep.pitch.push(pitch);
        rep.centers.push(centers.len());
    }
    if let Some(i) = radii.len().checked_sub(1) {
        rep.extrapolated = (rep.d_minus[i], rep.d_sharp[i], rep.d_plus[i]);
    }
    Ok(rep)
}

fn center_pitch(n: usize, region: f64, target: f64) -> f64 {
    if n == 1 {
        return super::probe_pitch(n, region, target);
    }
    let mut pitch = target;
    while ((2.0 * region / pitch).floor() + 1.0).powi(n as i32) > MAX_DENSITY_CENTERS as f64 {
        pitch *= 1.25;
    }
    pitch
}

/// Upper bound on how much any estimate at radius `r` can move when the set
/// is translated by a vector of norm `shift`.
///
/// Centres of the translated scan sit within `δ = 2·shift + pitch·√n` of
/// centres of the original scan, so window counts differ by at most the
/// number of points in a shell of width `2δ`; a packing argument with
/// disjoint balls of radius `min_gap/2` bounds that number.
pub fn translation_bound(n: usize, r: f64, pitch: f64, min_gap: f64, shift: f64) -> f64 {
    let delta = 2.0 * shift + pitch * (n as f64).sqrt();
    let g = min_gap / 2.0;
    let shell = ball_volume(n, r + delta + g) - ball_volume(n, (r - delta - g).max(0.0));
    let count = (shell / ball_volume(n, g)).floor();
    count / ball_volume(n, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{ExactVector, RealBasis};

    #[test]
    fn volumes() {
        assert_eq!(ball_volume(1, 2.0), 4.0);
        assert!((ball_volume(2, 1.0) - PI).abs() < 1e-15);
        assert!((ball_volume(3, 1.0) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((ball_volume(4, 1.0) - PI * PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn integer_density() {
        let b = RealBasis::rational();
        let pts = (-100..=100).map(|k| ExactVector::from_integers(&b, &[k])).collect();
        let a = PointSet::new(pts, 100.0, "Z").unwrap();
        let rep = densities(&a, &[10.0, 50.0]).unwrap();
        for i in 0..2 {
            assert!(rep.d_minus[i] <= rep.d_sharp[i] && rep.d_sharp[i] <= rep.d_plus[i]);
            assert!((rep.d_sharp[i] - 1.0).abs() < 0.1);
        }
        assert!((rep.extrapolated.1 - 1.0).abs() < 0.02);
        assert!(densities(&a, &[90.0]).is_err());
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("R,d_minus,d_sharp,d_plus\n1.0"));
    }

    #[test]
    fn gapped_integers_have_split_density() {
        let b = RealBasis::rational();
        let removed = |k: i64| {
            (1..20).any(|e| {
                let s = 1i64 << e;
                k >= s && k < s + s / 2
            })
        };
        let pts = (-3000..=3000)
            .filter(|&k| !removed(k))
            .map(|k| ExactVector::from_integers(&b, &[k]))
            .collect();
        let a = PointSet::new(pts, 3000.0, "gapped").unwrap();
        let rep = densities(&a, &[100.0]).unwrap();
        assert!(rep.d_plus[0] - rep.d_minus[0] >= 0.2);
    }
}
