use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::FourierError;
use crate::measure::AtomicMeasure;
use crate::pointset::fmt17;

/// Peaks must exceed this fraction of the largest value as well as the
/// median-based floor.
pub const RELATIVE_FLOOR: f64 = 1e-3;

/// Multiple of the median `|value|` below which a local maximum is noise.
pub const MEDIAN_FACTOR: f64 = 5.0;

/// A rectangular grid `lo + k·(hi − lo)/(count − 1)` per axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub count: Vec<usize>,
}

impl GridSpec {
    pub fn line(lo: f64, hi: f64, count: usize) -> Self {
        GridSpec {
            lo: vec![lo],
            hi: vec![hi],
            count: vec![count],
        }
    }

    /// Parses `lo:hi:count` with components separated by `;` for ℝⁿ.
    pub fn parse(s: &str) -> Result<Self, FourierError> {
        let mut g = GridSpec {
            lo: Vec::new(),
            hi: Vec::new(),
            count: Vec::new(),
        };
        for part in s.split(';') {
            let f: Vec<&str> = part.split(':').collect();
            let bad = || FourierError::Grid(format!("expected lo:hi:count, got `{part}`"));
            if f.len() != 3 {
                return Err(bad());
            }
            g.lo.push(f[0].trim().parse().map_err(|_| bad())?);
            g.hi.push(f[1].trim().parse().map_err(|_| bad())?);
            g.count.push(f[2].trim().parse().map_err(|_| bad())?);
        }
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), FourierError> {
        for i in 0..self.dim() {
            if self.count[i] < 2 || !(self.hi[i] > self.lo[i]) {
                return Err(FourierError::Grid(format!("axis {i} needs hi > lo and count ≥ 2")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn pitch(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (self.hi[i] - self.lo[i]) / (self.count[i] - 1) as f64)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.count.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn index(&self, flat: usize) -> Vec<usize> {
        let mut rem = flat;
        self.count
            .iter()
            .map(|c| {
                let i = rem % c;
                rem /= c;
                i
            })
            .collect()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.count).rev().fold(0, |acc, (i, c)| acc * c + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let p = self.pitch();
        self.index(flat)
            .iter()
            .enumerate()
            .map(|(d, &k)| self.lo[d] + k as f64 * p[d])
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Peak {
    pub location: Vec<f64>,
    pub amplitude: f64,
    #[serde(serialize_with = "super::ser_complex")]
    pub value: Complex64,
    /// Half width at half maximum of the taper's transform.
    pub width: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumScan {
    pub grid: GridSpec,
    #[serde(skip)]
    pub values: Vec<Complex64>,
    pub taper_width: f64,
    pub noise_floor: f64,
    pub median: f64,
    pub peaks: Vec<Peak>,
    /// Set when the grid pitch is finer than `1/(2·R_trunc)`.
    pub oversampled: bool,
}

impl SpectrumScan {
    /// CSV rows `t_1,…,t_n,re,im,abs`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.grid.dim()).map(|i| format!("t{i}")).collect();
        header.extend(["re", "im", "abs"].map(String::from));
        wr.write_record(&header)?;
        for (k, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.grid.point(k).into_iter().map(fmt17).collect();
            row.extend([fmt17(v.re), fmt17(v.im), fmt17(v.norm())]);
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Smallest distance between two extracted peaks.
    pub fn min_peak_gap(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.peaks.iter().enumerate() {
            for b in &self.peaks[i + 1..] {
                let d = dist(&a.location, &b.location);
                best = Some(best.map_or(d, |x: f64| x.min(d)));
            }
        }
        best
    }

    /// Largest `|value|` over grid points farther than `exclusion` from
    /// every peak.
    pub fn off_peak_max(&self, exclusion: f64) -> f64 {
        (0..self.values.len())
            .filter(|&k| {
                let t = self.grid.point(k);
                self.peaks.iter().all(|p| dist(&p.location, &t) > exclusion)
            })
            .map(|k| self.values[k].norm())
            .fold(0.0, f64::max)
    }
}

/// `(1/σⁿ) Σ_λ μ(λ) e^{−π|λ|²/σ²} e^{−2πi⟨t,λ⟩}`.
///
/// The taper's transform has unit height, so a lattice comb `Σ_{λ∈L} δ_λ`
/// produces peaks of height `1/det L`, the weights of its transform.
pub fn tapered_transform(mu: &AtomicMeasure, sigma: f64, t: &[f64]) -> Complex64 {
    let n = mu.dim() as i32;
    let norm = sigma.powi(n);
    let s: Complex64 = mu
        .atoms()
        .map(|(_, x, w)| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let phase: f64 = x.iter().zip(t).map(|(a, b)| a * b).sum();
            w * (-PI * r2 / (sigma * sigma)).exp() * Complex64::from_polar(1.0, -2.0 * PI * phase)
        })
        .sum();
    s / norm
}

/// Scan of the tapered transform on a grid, with local maxima above
/// `max(5·median, 10⁻³·max)` refined by golden-section search.
pub fn diffraction_scan(
    mu: &AtomicMeasure,
    grid: &GridSpec,
    taper_width: Option<f64>,
) -> Result<SpectrumScan, FourierError> {
    if mu.is_empty() {
        return Err(FourierError::EmptyMeasure);
    }
    if grid.dim() != mu.dim() {
        return Err(FourierError::Dimension(mu.dim(), grid.dim()));
    }
    grid.validate()?;
    let sigma = taper_width.unwrap_or(mu.r_trunc() / 6.0);
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|k| tapered_transform(mu, sigma, &grid.point(k)))
        .collect();
    let mut mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    let floor = (MEDIAN_FACTOR * median).max(RELATIVE_FLOOR * max);
    let pitch = grid.pitch();
    let oversampled = pitch.iter().any(|&p| p < 1.0 / (2.0 * mu.r_trunc()));
    let hwhm = (2f64.ln() / PI).sqrt() / sigma;

    let mut peaks = Vec::new();
    for k in 0..values.len() {
        let a = values[k].norm();
        if a <= floor || !is_local_max(grid, &values, k) {
            continue;
        }
        let mut loc = grid.point(k);
        for d in 0..loc.len() {
            let f = |x: f64| {
                let mut t = loc.clone();
                t[d] = x;
                -tapered_transform(mu, sigma, &t).norm()
            };
            loc[d] = golden_min(f, loc[d] - pitch[d], loc[d] + pitch[d], 1e-12 * (1.0 + loc[d].abs()));
        }
        let v = tapered_transform(mu, sigma, &loc);
        peaks.push(Peak {
            location: loc,
            amplitude: v.norm(),
            value: v,
            width: hwhm,
        });
    }
    Ok(SpectrumScan {
        grid: grid.clone(),
        values,
        taper_width: sigma,
        noise_floor: floor,
        median,
        peaks,
        oversampled,
    })
}

fn is_local_max(grid: &GridSpec, values: &[Complex64], k: usize) -> bool {
    let idx = grid.index(k);
    let a = values[k].norm();
    let n = idx.len();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut nb = idx.clone();
        let mut moved = false;
        let mut inside = true;
        for d in 0..n {
            let step = (c % 3) as i64 - 1;
            c /= 3;
            if step != 0 {
                moved = true;
            }
            let j = nb[d] as i64 + step;
            if j < 0 || j >= grid.count[d] as i64 {
                inside = false;
                break;
            }
            nb[d] = j as usize;
        }
        if !moved || !inside {
            continue;
        }
        let j = grid.flat(&nb);
        let b = values[j].norm();
        // ties go to the lower index
        if b > a || (b == a && j < k) {
            return false;
        }
    }
    true
}

/// Minimiser of a unimodal `f` on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use num_traits::One;

    #[test]
    fn comb_peaks_at_integers() {
        let mu = AtomicMeasure::on_lattice(&Lattice::integer(1), 200.0, |_, _| Complex64::one()).unwrap();
        let scan = diffraction_scan(&mu, &GridSpec::line(-3.3, 3.3, 661), None).unwrap();
        let locs: Vec<f64> = scan.peaks.iter().map(|p| p.location[0]).collect();
        assert_eq!(locs.len(), 7, "{locs:?}");
        for (p, k) in scan.peaks.iter().zip(-3..=3) {
            assert!((p.location[0] - k as f64).abs() < 1e-6);
            assert!((p.amplitude - 1.0).abs() < 1e-2);
        }
        assert!(scan.off_peak_max(0.1) < 1e-3);
    }

    #[test]
    fn alternating_comb_peaks_at_half_integers() {
        let mu = AtomicMeasure::on_lattice(&Lattice::integer(1), 200.0, |k, _| {
            Complex64::new(if k[0] % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        })
        .unwrap();
        let scan = diffraction_scan(&mu, &GridSpec::line(-2.0, 2.0, 401), None).unwrap();
        assert!(scan.peaks.iter().all(|p| p.location[0].abs() >= 0.4));
        let locs: Vec<f64> = scan.peaks.iter().map(|p| p.location[0]).collect();
        for want in [-1.5, -0.5, 0.5, 1.5] {
            assert!(locs.iter().any(|l| (l - want).abs() < 1e-6), "{locs:?}");
        }
    }

    #[test]
    fn grid_parsing() {
        let g = GridSpec::parse("-1:1:5;0:2:3").unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.point(7), vec![0.0, 1.0]);
        assert!(GridSpec::parse("1:0:5").is_err());
    }

    #[test]
    fn golden_section() {
        let x = golden_min(|x| (x - 0.3) * (x - 0.3), -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
    }
}
