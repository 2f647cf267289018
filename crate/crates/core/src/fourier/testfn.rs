//! Test functions with closed-form or quadrature transforms, under
//! `φ̂(t) = ∫ φ(x) e^{−2πi⟨t,x⟩} dx`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::pointset::ball_volume;

/// `A·e^{2πi⟨ω,x⟩}·exp(−π|x−c|²/w²)`, with transform
/// `A·wⁿ·exp(−πw²|t−ω|²)·e^{−2πi⟨t−ω,c⟩}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gaussian {
    pub center: Vec<f64>,
    pub width: f64,
    pub modulation: Vec<f64>,
    #[serde(skip)]
    pub amplitude: Complex64,
}

impl Gaussian {
    /// `exp(−π|x|²/w²)` in ℝⁿ.
    pub fn centered(n: usize, width: f64) -> Self {
        Gaussian {
            center: vec![0.0; n],
            width,
            modulation: vec![0.0; n],
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `f(x − x₀)`.
    pub fn shifted(&self, x0: &[f64]) -> Self {
        let phase = -2.0 * PI * dot(&self.modulation, x0);
        Gaussian {
            center: self.center.iter().zip(x0).map(|(c, s)| c + s).collect(),
            width: self.width,
            modulation: self.modulation.clone(),
            amplitude: self.amplitude * Complex64::from_polar(1.0, phase),
        }
    }

    /// `e^{2πi⟨ω₀,x⟩} f(x)`.
    pub fn modulated(&self, w0: &[f64]) -> Self {
        Gaussian {
            modulation: self.modulation.iter().zip(w0).map(|(a, b)| a + b).collect(),
            ..self.clone()
        }
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        let d2 = dist2(x, &self.center);
        let env = (-PI * d2 / (self.width * self.width)).exp();
        self.amplitude * env * cis(dot(&self.modulation, x))
    }

    pub fn transform(&self, t: &[f64]) -> Complex64 {
        let n = self.dim() as i32;
        let d: Vec<f64> = t.iter().zip(&self.modulation).map(|(a, b)| a - b).collect();
        let d2: f64 = d.iter().map(|v| v * v).sum();
        let env = self.width.powi(n) * (-PI * self.width * self.width * d2).exp();
        self.amplitude * env * cis(-dot(&d, &self.center))
    }

    fn value_envelope(&self, r: f64) -> f64 {
        let c = norm(&self.center);
        let d = (r - c).max(0.0);
        self.amplitude.norm() * (-PI * d * d / (self.width * self.width)).exp()
    }

    fn transform_envelope(&self, r: f64) -> f64 {
        let o = norm(&self.modulation);
        let d = (r - o).max(0.0);
        self.amplitude.norm() * self.width.powi(self.dim() as i32) * (-PI * self.width * self.width * d * d).exp()
    }
}

/// `b(s) = exp(−1/(s(1−s)))` on `(0, 1)`.
pub fn bump_profile(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

/// `∫₀¹ b(s) ds`.
pub fn bump_integral() -> f64 {
    static I: OnceLock<f64> = OnceLock::new();
    *I.get_or_init(|| {
        let n = 1 << 16;
        (0..n).map(|k| bump_profile((k as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64
    })
}

/// One factor of a band-limited bump: `ψ̂` is `b` rescaled to `(u, v)` with
/// unit integral, and `ψ` is the midpoint-rule quadrature of its inverse
/// transform with a fixed node set. The quadrature is itself a positive
/// combination of exponentials with frequencies in `(u, v)`, so `ψ` is
/// exactly band-limited, `ψ(0) = 1` exactly and `|ψ| ≤ 1`. It matches the
/// continuous inverse transform for `|x| ≤ extent`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BumpFactor {
    pub lo: f64,
    pub hi: f64,
    pub extent: f64,
    #[serde(skip)]
    nodes: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
    #[serde(skip)]
    total: f64,
    /// `A` in the decay envelope `A·exp(−2√(π·width·|x|))`.
    #[serde(skip)]
    decay: f64,
}

/// Nodes are re-seeded with a direct `cis` this often in the recurrence.
const RESEED: usize = 32;

impl BumpFactor {
    pub fn new(lo: f64, hi: f64, extent: f64) -> Self {
        assert!(hi > lo, "empty spectrum interval");
        let len = hi - lo;
        let n = 2048 + (16.0 * len * extent.abs()).ceil() as usize;
        let raw: Vec<f64> = (0..n).map(|k| bump_profile((k as f64 + 0.5) / n as f64)).collect();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (k, w) in raw.into_iter().enumerate() {
            if w > 0.0 {
                nodes.push(lo + len * (k as f64 + 0.5) / n as f64);
                weights.push(w);
            }
        }
        // summed in the same order as `value` accumulates, so ψ(0) = 1 exactly
        let total = weights.iter().fold(0.0, |a, w| a + w);
        let mut f = BumpFactor {
            lo,
            hi,
            extent,
            nodes,
            weights,
            total,
            decay: 1.0,
        };
        f.decay = f.fit_decay();
        f
    }

    fn decay_rate(&self, x: f64) -> f64 {
        (-2.0 * (PI * self.width() * x.abs()).sqrt()).exp()
    }

    /// Twice the largest `|ψ(x)| / exp(−2√(π·width·|x|))` over samples
    /// finer than the oscillation, where the exponential is still well above
    /// roundoff.
    fn fit_decay(&self) -> f64 {
        let len = self.width();
        let a = 0.5 / len;
        let b = (42.0 / len).min(self.extent.abs().max(2.0 * a));
        let freq = self.lo.abs().max(self.hi.abs()).max(len);
        let count = (((b - a) * freq / 0.05).ceil() as usize).clamp(16, 8192);
        let fit = (0..=count)
            .map(|k| {
                let x = a + (b - a) * k as f64 / count as f64;
                self.value(x).norm().max(self.value(-x).norm()) / self.decay_rate(x)
            })
            .fold(1.0, f64::max);
        2.0 * fit
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn nodes(&self) -> usize {
        self.nodes.len()
    }

    /// `ψ(x) = Σ wₖ e^{2πi tₖ x} / Σ wₖ`.
    pub fn value(&self, x: f64) -> Complex64 {
        if x == 0.0 {
            return Complex64::new(self.weights.iter().fold(0.0, |a, w| a + w) / self.total, 0.0);
        }
        let step = cis(x * (self.nodes.get(1).copied().unwrap_or(self.lo) - self.nodes[0]));
        let mut acc = Complex64::new(0.0, 0.0);
        let mut z = Complex64::new(0.0, 0.0);
        for (k, (t, w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            z = if k % RESEED == 0 { cis(t * x) } else { z * step };
            acc += z * *w;
        }
        acc / self.total
    }

    /// The continuous density `ψ̂(t)`.
    pub fn transform(&self, t: f64) -> f64 {
        let len = self.width();
        bump_profile((t - self.lo) / len) / (len * bump_integral())
    }

    pub fn transform_sup(&self) -> f64 {
        (-4.0f64).exp() / (self.width() * bump_integral())
    }

    /// Estimated `sup_{|x| ≥ r} |ψ(x)|` for the continuous inverse transform,
    /// from the decay envelope fitted at construction.
    pub fn value_envelope(&self, r: f64) -> f64 {
        (self.decay * self.decay_rate(r)).min(1.0)
    }
}

/// A product of bump factors, one per coordinate: `supp φ̂` is the open box
/// `Π (uᵢ, vᵢ)` and `φ(0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandlimitedBump {
    pub factors: Vec<BumpFactor>,
}

impl BandlimitedBump {
    /// One-dimensional bump with spectrum in `(u, v)`, accurate on `|x| ≤ extent`.
    pub fn interval(u: f64, v: f64, extent: f64) -> Self {
        BandlimitedBump {
            factors: vec![BumpFactor::new(u, v, extent)],
        }
    }

    pub fn boxed(lo: &[f64], hi: &[f64], extent: f64) -> Self {
        BandlimitedBump {
            factors: lo.iter().zip(hi).map(|(a, b)| BumpFactor::new(*a, *b, extent)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        self.factors.iter().zip(x).map(|(f, v)| f.value(*v)).product()
    }

    pub fn transform(&self, t: &[f64]) -> Complex64 {
        Complex64::new(self.factors.iter().zip(t).map(|(f, v)| f.transform(*v)).product(), 0.0)
    }

    fn value_envelope(&self, r: f64) -> f64 {
        let s = r / (self.dim() as f64).sqrt();
        self.factors.iter().map(|f| f.value_envelope(s)).fold(0.0, f64::max)
    }

    fn transform_envelope(&self, r: f64) -> f64 {
        let corner: f64 = self
            .factors
            .iter()
            .map(|f| f.lo.abs().max(f.hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        if r >= corner {
            0.0
        } else {
            self.factors.iter().map(BumpFactor::transform_sup).product()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TestFunction {
    Gaussian(Gaussian),
    Bump(BandlimitedBump),
    /// For an inner `g`: the function `g̃ = ĝ`, so `g̃̂(t) = g(−t)`.
    Transformed(Box<TestFunction>),
}

impl TestFunction {
    pub fn gaussian(n: usize, width: f64) -> Self {
        TestFunction::Gaussian(Gaussian::centered(n, width))
    }

    /// A function whose values form the bump `Π b` on the box `(lo, hi)` and
    /// whose transform is evaluated by quadrature for `|t| ≤ extent`.
    pub fn spectral_bump(lo: &[f64], hi: &[f64], extent: f64) -> Self {
        TestFunction::Transformed(Box::new(TestFunction::Bump(BandlimitedBump::boxed(lo, hi, extent))))
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Gaussian(g) => g.dim(),
            TestFunction::Bump(b) => b.dim(),
            TestFunction::Transformed(g) => g.dim(),
        }
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        match self {
            TestFunction::Gaussian(g) => g.value(x),
            TestFunction::Bump(b) => b.value(x),
            TestFunction::Transformed(g) => g.transform(x),
        }
    }

    pub fn transform(&self, t: &[f64]) -> Complex64 {
        match self {
            TestFunction::Gaussian(g) => g.transform(t),
            TestFunction::Bump(b) => b.transform(t),
            TestFunction::Transformed(g) => {
                let neg: Vec<f64> = t.iter().map(|v| -v).collect();
                g.value(&neg)
            }
        }
    }

    /// Upper estimate of `sup_{|x| ≥ r} |φ(x)|`.
    pub fn value_envelope(&self, r: f64) -> f64 {
        match self {
            TestFunction::Gaussian(g) => g.value_envelope(r),
            TestFunction::Bump(b) => b.value_envelope(r),
            TestFunction::Transformed(g) => g.transform_envelope(r),
        }
    }

    /// Upper estimate of `sup_{|t| ≥ r} |φ̂(t)|`.
    pub fn transform_envelope(&self, r: f64) -> f64 {
        match self {
            TestFunction::Gaussian(g) => g.transform_envelope(r),
            TestFunction::Bump(b) => b.transform_envelope(r),
            TestFunction::Transformed(g) => g.value_envelope(r),
        }
    }

    /// Length over which `φ̂` varies appreciably.
    pub fn transform_scale(&self) -> f64 {
        match self {
            TestFunction::Gaussian(g) => 1.0 / g.width,
            TestFunction::Bump(b) => b.factors.iter().map(BumpFactor::width).fold(f64::INFINITY, f64::min),
            TestFunction::Transformed(g) => g.value_scale(),
        }
    }

    /// Length over which `φ` varies appreciably.
    pub fn value_scale(&self) -> f64 {
        match self {
            TestFunction::Gaussian(g) => g.width,
            TestFunction::Bump(b) => 1.0 / b.factors.iter().map(BumpFactor::width).fold(0.0, f64::max),
            TestFunction::Transformed(g) => g.transform_scale(),
        }
    }
}

/// `∫_{|x| ≥ r} env(|x|) dx` in ℝⁿ by Simpson's rule in the radius, with
/// panels widening geometrically.
pub fn radial_tail(n: usize, r: f64, scale: f64, env: impl Fn(f64) -> f64) -> f64 {
    let sphere = n as f64 * ball_volume(n, 1.0);
    let g = |x: f64| sphere * x.powi(n as i32 - 1) * env(x);
    let mut total = 0.0;
    let mut x = r;
    let mut prev = g(r);
    for k in 1..=20_000 {
        let h = (scale / 32.0).max(x / 256.0);
        let cur = g(x + h);
        total += (prev + 4.0 * g(x + 0.5 * h) + cur) * h / 6.0;
        x += h;
        if cur <= 1e-40 * (1.0 + total) && k > 16 {
            break;
        }
        prev = cur;
    }
    total
}

pub(crate) fn cis(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * turns)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `∫ f(x) e^{−2πitx} dx` by a dense Riemann sum.
    fn numeric_transform(f: impl Fn(f64) -> Complex64, t: f64, half: f64, n: usize) -> Complex64 {
        let h = 2.0 * half / n as f64;
        (0..n)
            .map(|k| {
                let x = -half + (k as f64 + 0.5) * h;
                f(x) * cis(-t * x) * h
            })
            .sum()
    }

    #[test]
    fn gaussian_transform_matches_quadrature() {
        let g = Gaussian {
            center: vec![0.3],
            width: 0.7,
            modulation: vec![0.25],
            amplitude: Complex64::new(1.0, 0.5),
        };
        for t in [-1.0, 0.0, 0.4, 1.3] {
            let num = numeric_transform(|x| g.value(&[x]), t, 12.0, 40_000);
            assert!((num - g.transform(&[t])).norm() < 1e-12, "{t}");
        }
        let s = g.shifted(&[0.5]).modulated(&[-0.1]);
        for x in [-0.7, 0.2, 1.9] {
            let direct = g.value(&[x - 0.5]) * cis(-0.1 * x);
            assert!((direct - s.value(&[x])).norm() < 1e-15);
        }
    }

    #[test]
    fn bump_is_normalised_and_band_limited() {
        let b = BumpFactor::new(0.0, 0.25, 60.0);
        assert_eq!(b.value(0.0), Complex64::new(1.0, 0.0));
        assert!(b.value(7.3).norm() <= 1.0);
        // ψ̂ integrates to one
        let n = 20_000;
        let integral: f64 = (0..n).map(|k| b.transform(0.25 * (k as f64 + 0.5) / n as f64)).sum::<f64>() * 0.25 / n as f64;
        assert!((integral - 1.0).abs() < 1e-12);
        // inverse transform of ψ̂ agrees with the node sum
        for x in [0.5, 3.0, 11.0] {
            let direct: Complex64 = (0..n)
                .map(|k| {
                    let t = 0.25 * (k as f64 + 0.5) / n as f64;
                    cis(t * x) * b.transform(t) * (0.25 / n as f64)
                })
                .sum();
            assert!((direct - b.value(x)).norm() < 1e-12, "{x}");
        }
    }

    #[test]
    fn transformed_swaps_roles() {
        let t = TestFunction::spectral_bump(&[-0.4], &[0.4], 50.0);
        assert!(t.value(&[0.5]).norm() == 0.0);
        assert!(t.value(&[0.1]).norm() > 0.0);
        assert_eq!(t.transform(&[0.0]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tails() {
        let g = TestFunction::gaussian(1, 1.0);
        // ∫_{|x|≥1} e^{−πx²} dx = erfc(√π)
        let t = radial_tail(1, 1.0, 1.0, |r| g.value_envelope(r));
        assert!((t / 0.012_188_882_184_802_895 - 1.0).abs() < 1e-6, "{t}");
    }

    #[test]
    fn bump_envelope_dominates_samples() {
        let b = BumpFactor::new(-0.3, 0.3, 400.0);
        for k in 1..2000 {
            let x = k as f64 * 0.2;
            assert!(b.value(x).norm() <= b.value_envelope(x) + 1e-13, "{x} {}", b.value(x).norm());
        }
        assert!(b.value_envelope(400.0) < 1e-8);
    }
}
