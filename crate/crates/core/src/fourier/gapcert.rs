use std::f64::consts::E;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::testfn::{cis, BumpFactor};
use super::FourierError;

/// Samples of `|ψ|` for `γ`: pitch 0.01 on `[1, 50]`.
const GAMMA_PITCH: f64 = 0.01;
const GAMMA_SPAN: f64 = 50.0;
/// `φ` is sampled until `|ψ(x/R)|^{⌊R⌋+1}` drops below this.
const SAMPLE_FLOOR: f64 = 1e-30;
const MAX_SAMPLES: usize = 1 << 22;

/// A function `φ` with `φ(0) = 1`, `φ = 0` on `Λ`, spectrum in `(0, a)` and
/// `|φ| ≤ 1` off `(−R, R)`:
/// `φ(x) = P(e^{iπx/R})·ψ(x/R)^{⌊R⌋+1}` with
/// `P(z) = Π_λ (z − e^{iπλ/R})/(1 − e^{iπλ/R})` and `spec ψ ⊂ (0, a/4)`.
#[derive(Clone, Debug, Serialize)]
pub struct GapCertificate {
    /// `Λ` after padding to even cardinality.
    pub lambda: Vec<f64>,
    pub padded: bool,
    pub r: f64,
    pub delta: f64,
    pub a: f64,
    /// Half of `#Λ`.
    pub n: usize,
    /// `n / R`.
    pub eps: f64,
    /// Measured `sup_{|x| ≥ 1} |ψ(x)|`.
    pub gamma: f64,
    /// `γ·(e/(δε))^{2ε}`; the construction is guaranteed when this is below 1.
    pub smallness: f64,
    pub power: u32,
    pub psi: BumpFactor,
    #[serde(skip)]
    roots: Vec<Complex64>,
    #[serde(skip)]
    denominator: Complex64,
    pub report: CertificateReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    #[serde(serialize_with = "super::ser_complex")]
    pub phi_at_zero: Complex64,
    pub max_on_lambda: f64,
    /// Fraction of `∫|φ̂|` outside `(0, a)` from an FFT of samples.
    pub spectral_mass_outside: f64,
    pub samples: usize,
    /// `max_{|z|=1} |P(z)|` by dense sampling of the circle.
    pub max_p: f64,
    /// `Π R/|λ|`.
    pub p_product_bound: f64,
    /// `(eR/(δn))^{2n}`.
    pub p_bound: f64,
    /// `sup |φ(x)|` over a grid of `R ≤ |x| ≤` the sampling span.
    pub sup_outside: f64,
}

impl CertificateReport {
    /// The four properties of `φ` and the bound on `P`, at the given
    /// tolerances.
    pub fn passes(&self, zero_tol: f64, mass_tol: f64) -> bool {
        self.phi_at_zero == Complex64::new(1.0, 0.0)
            && self.max_on_lambda < zero_tol
            && self.spectral_mass_outside < mass_tol
            && self.sup_outside <= 1.0
            && self.max_p <= self.p_bound * (1.0 + 1e-9)
    }
}

impl GapCertificate {
    pub fn value(&self, x: f64) -> Complex64 {
        let z = cis(x / (2.0 * self.r));
        let num = self.roots.iter().fold(Complex64::new(1.0, 0.0), |acc, zeta| acc * (z - zeta));
        let p = num / self.denominator;
        p * self.psi.value(x / self.r).powu(self.power)
    }

    fn p_at(&self, z: Complex64) -> Complex64 {
        self.roots.iter().fold(Complex64::new(1.0, 0.0), |acc, zeta| acc * (z - zeta)) / self.denominator
    }
}

/// Builds the certificate, failing when the density condition
/// `γ·(e/(δε))^{2ε} < 1`, `ε < a/2` does not hold.
pub fn gap_certificate(lambda: &[f64], r: f64, delta: f64, a: f64) -> Result<GapCertificate, FourierError> {
    let c = gap_certificate_unchecked(lambda, r, delta, a)?;
    if !(c.smallness < 1.0) || !(c.eps < a / 2.0) {
        return Err(FourierError::Density(format!(
            "#Λ/(2R) = {:.4} too large: γ·(e/(δε))^(2ε) = {:.4}, ε = {:.4}, a/2 = {:.4}",
            c.n as f64 / r,
            c.smallness,
            c.eps,
            a / 2.0
        )));
    }
    Ok(c)
}

/// [`gap_certificate`] without the density condition; the report shows which
/// properties survive.
pub fn gap_certificate_unchecked(lambda: &[f64], r: f64, delta: f64, a: f64) -> Result<GapCertificate, FourierError> {
    if !(r >= 1.0) || !(delta > 0.0) || !(a > 0.0) {
        return Err(FourierError::Certificate(format!("need R ≥ 1, δ > 0, a > 0 (R={r}, δ={delta}, a={a})")));
    }
    let mut pts = lambda.to_vec();
    for &l in &pts {
        if !(l.abs() >= delta && l.abs() < r) {
            return Err(FourierError::Certificate(format!("{l} outside (−R, R) ∖ (−δ, δ)")));
        }
    }
    pts.sort_by(f64::total_cmp);
    if let Some(w) = pts.windows(2).find(|w| w[1] - w[0] < delta) {
        return Err(FourierError::Certificate(format!("{} and {} closer than δ", w[0], w[1])));
    }
    let padded = pts.len() % 2 == 1;
    if padded {
        let extra = padding_point(&pts, r, delta)
            .ok_or_else(|| FourierError::Certificate("no room to pad Λ to even size".into()))?;
        pts.push(extra);
        pts.sort_by(f64::total_cmp);
    }
    let n = pts.len() / 2;
    let eps = n as f64 / r;
    let power = r.floor() as u32 + 1;

    let probe = BumpFactor::new(0.0, a / 4.0, GAMMA_SPAN);
    let span_s = decay_span(&probe, power);
    let psi = if span_s > GAMMA_SPAN {
        BumpFactor::new(0.0, a / 4.0, span_s)
    } else {
        probe
    };
    let gamma = measure_gamma(&psi);
    let growth = if n == 0 { 1.0 } else { (E / (delta * eps)).powf(2.0 * eps) };

    let roots: Vec<Complex64> = pts.iter().map(|l| cis(l / (2.0 * r))).collect();
    let denominator = roots.iter().fold(Complex64::new(1.0, 0.0), |acc, zeta| acc * (Complex64::new(1.0, 0.0) - zeta));
    let mut cert = GapCertificate {
        lambda: pts,
        padded,
        r,
        delta,
        a,
        n,
        eps,
        gamma,
        smallness: gamma * growth,
        power,
        psi,
        roots,
        denominator,
        report: CertificateReport {
            phi_at_zero: Complex64::new(0.0, 0.0),
            max_on_lambda: 0.0,
            spectral_mass_outside: 0.0,
            samples: 0,
            max_p: 0.0,
            p_product_bound: 0.0,
            p_bound: 0.0,
            sup_outside: 0.0,
        },
    };
    cert.report = verify(&cert, span_s * r);
    Ok(cert)
}

/// A point of `(−R, R) ∖ (−δ, δ)` at distance `≥ δ` from all of `pts`.
fn padding_point(pts: &[f64], r: f64, delta: f64) -> Option<f64> {
    let mut k = 1.0;
    while k * delta < r {
        for x in [k * delta, -k * delta] {
            if pts.iter().all(|p| (p - x).abs() >= delta) {
                return Some(x);
            }
        }
        k += 1.0;
    }
    None
}

/// Smallest `s` with `envelope(s)^power` below [`SAMPLE_FLOOR`].
fn decay_span(psi: &BumpFactor, power: u32) -> f64 {
    let target = SAMPLE_FLOOR.powf(1.0 / power as f64);
    let mut s = 1.0;
    while psi.value_envelope(s) >= target {
        s *= 1.25;
    }
    s
}

fn measure_gamma(psi: &BumpFactor) -> f64 {
    let steps = ((GAMMA_SPAN - 1.0) / GAMMA_PITCH).round() as usize;
    let grid = (0..=steps)
        .map(|k| {
            let x = 1.0 + k as f64 * GAMMA_PITCH;
            psi.value(x).norm().max(psi.value(-x).norm())
        })
        .fold(0.0, f64::max);
    grid.max(psi.value_envelope(GAMMA_SPAN))
}

fn verify(c: &GapCertificate, span: f64) -> CertificateReport {
    let phi_at_zero = c.value(0.0);
    let max_on_lambda = c.lambda.iter().map(|&l| c.value(l).norm()).fold(0.0, f64::max);

    // circle samples: several per oscillation of the degree-2n polynomial
    let count = (64 * (2 * c.n + 1)).max(4096);
    let max_p = (0..count)
        .map(|k| c.p_at(cis(k as f64 / count as f64)).norm())
        .fold(0.0, f64::max);
    let p_product_bound = c.lambda.iter().map(|l| c.r / l.abs()).product();
    let p_bound = if c.n == 0 {
        1.0
    } else {
        (E * c.r / (c.delta * c.n as f64)).powi(2 * c.n as i32)
    };

    // samples at pitch 1/(4a) resolve the band (−2a, 2a) ⊃ (0, a)
    let mut h = 1.0 / (4.0 * c.a);
    let mut m = ((2.0 * span / h).ceil() as usize).next_power_of_two();
    if m > MAX_SAMPLES {
        m = MAX_SAMPLES;
        h = 2.0 * span / m as f64;
    }
    let x0 = -(m as f64 / 2.0) * h;
    let mut buf: Vec<Complex64> = (0..m).map(|j| c.value(x0 + j as f64 * h)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let df = 1.0 / (m as f64 * h);
    let (mut inside, mut outside) = (0.0, 0.0);
    for (k, v) in buf.iter().enumerate() {
        let f = if k < m / 2 { k as f64 * df } else { (k as f64 - m as f64) * df };
        let mag = v.norm() * h;
        if f > 0.0 && f < c.a {
            inside += mag;
        } else {
            outside += mag;
        }
    }
    let spectral_mass_outside = outside / (inside + outside);

    let pitch = (1.0 / (16.0 * c.a)).min(0.05).max((span - c.r) / 2_000_000.0);
    let steps = ((span - c.r).max(0.0) / pitch).ceil() as usize;
    let sup_outside = (0..=steps)
        .map(|k| {
            let x = c.r + k as f64 * pitch;
            c.value(x).norm().max(c.value(-x).norm())
        })
        .fold(0.0, f64::max);

    CertificateReport {
        phi_at_zero,
        max_on_lambda,
        spectral_mass_outside,
        samples: m,
        max_p,
        p_product_bound,
        p_bound,
        sup_outside,
    }
}
