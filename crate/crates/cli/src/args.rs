use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Construct, analyze and verify crystalline measures.
#[derive(Debug, Parser, Serialize)]
#[command(name = "quasitool", version, about)]
pub struct Cli {
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true, env = "QUASITOOL_THREADS")]
    pub threads: Option<usize>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output JSON path; standard output when omitted.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Generate lattices, cut-and-project model sets, presets, or a measure
    /// synthesized from a coset decomposition.
    #[command(subcommand)]
    Gen(Gen),
    /// Density estimates D⁻, D₍#₎, D⁺, the Meyer witness Λ−Λ ⊂ Λ+F and the
    /// Delone parameters of a point set.
    Analyze(Analyze),
    /// Tapered Fourier transform of an atomic measure on a frequency grid
    /// with peak detection (diffraction spectrum).
    Diffract(Diffract),
    /// Poisson summation Σ f(λ) = |det L|⁻¹ Σ f̂(s) over L and its dual L*.
    Poisson(Poisson),
    /// Spectral-gap certificate: a test function vanishing on a finite
    /// δ-separated Λ with spectrum in (0, a) and φ(0) = 1.
    Gapcert(Gapcert),
    /// Autocorrelation measure μ_h = Σ μ(λ)·conj(μ(λ+h))·δ_λ, optionally
    /// followed by a spectral-gap test of its transform on B_a ∖ {0}.
    Autocorr(Autocorr),
    /// Split a measure over the cosets L + θⱼ and recover the
    /// trigonometric-polynomial weights Pⱼ on each coset.
    Decompose(Decompose),
    /// Run the invariant suite: duality, Poisson summation, model-set
    /// density, density ordering, separating vectors, decomposition round
    /// trip and negative controls.
    Verify(Verify),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gen {
    /// Points of a lattice L (`Zn`, `diag:a,b`, `fib`) in a ball.
    Lattice(GenLattice),
    /// Cut-and-project model set p₁(γ) with p₂(γ) ∈ Ω.
    Modelset(GenModelset),
    /// Named presets: the Fibonacci chain or the alternating comb Σ(−1)ⁿδₙ.
    Preset(GenPreset),
    /// Measure Σⱼ Σ_{λ ∈ L+θⱼ} Pⱼ(λ)δ_λ from a decomposition JSON.
    Synth(GenSynth),
}

#[derive(Debug, Args, Serialize)]
pub struct GenLattice {
    #[arg(long, default_value = "Z")]
    pub lattice: String,
    /// Truncation radius.
    #[arg(long = "R")]
    pub r: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct GenModelset {
    /// `fib`, `lattice:<spec>` or a scheme JSON file.
    #[arg(long, default_value = "fib")]
    pub scheme: String,
    /// Interval window `lo:hi` overriding the scheme's window (m = 1 only).
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long = "R")]
    pub r: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    /// Fibonacci chain, window [0,1).
    Fib,
    /// Σ(−1)ⁿδₙ on ℤ.
    Altsign,
}

#[derive(Debug, Args, Serialize)]
pub struct GenPreset {
    pub name: PresetName,
    #[arg(long = "R")]
    pub r: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct GenSynth {
    #[arg(long)]
    pub decomposition: PathBuf,
    #[arg(long = "R")]
    pub r: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Analyze {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated ball radii; defaults to 0.1, 0.2, 0.4 × R_trunc.
    #[arg(long)]
    pub radii: Option<String>,
    /// Maximum number of differences scanned by the Meyer witness.
    #[arg(long, default_value_t = 200_000)]
    pub meyer_budget: usize,
    /// Also write the density ladder as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Diffract {
    #[arg(long)]
    pub input: PathBuf,
    /// `lo:hi:count` per dimension, separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Gaussian taper width; defaults to R_trunc/6.
    #[arg(long)]
    pub taper: Option<f64>,
    /// Report only peaks with amplitude at least this fraction of the largest.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Also write the scan as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Poisson {
    #[arg(long, default_value = "Z")]
    pub lattice: String,
    /// Test function `gauss:<width>`.
    #[arg(long = "f", default_value = "gauss:1")]
    pub f: String,
    #[arg(long = "R", default_value_t = 30.0)]
    pub r: f64,
    /// Comma-separated shift x₀.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<String>,
    /// Comma-separated modulation ω₀.
    #[arg(long, allow_hyphen_values = true)]
    pub modulation: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Gapcert {
    /// Comma-separated points of Λ.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: String,
    #[arg(long = "R")]
    pub r: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub a: f64,
    /// Build φ even when the density condition fails.
    #[arg(long)]
    pub unchecked: bool,
    #[arg(long, default_value_t = 1e-12)]
    pub zero_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub mass_tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Autocorr {
    #[arg(long)]
    pub input: PathBuf,
    /// Exact shift h, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub h: String,
    /// Radius of the ball B_a tested for a spectral gap.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub probes: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Decompose {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "Z")]
    pub lattice: String,
    /// Coset offsets: `,`-separated in dimension 1, `;`-separated vectors
    /// otherwise.
    #[arg(long, allow_hyphen_values = true)]
    pub offsets: String,
    #[arg(long = "K", default_value_t = 64)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    /// Decomposition JSON the recovered coefficients must match.
    #[arg(long)]
    pub expect: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Verify {
    /// Random instances per randomized check.
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
}
