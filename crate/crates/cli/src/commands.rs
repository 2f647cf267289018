use std::cmp::Ordering;
use std::fmt::Display;
use std::fs::File;
use std::path::Path;

use num_complex::Complex64;
use quasi_core::decompose::{recover_polynomials, synthesize, CosetDecomposition, DecompositionWire};
use quasi_core::exactnum::{infer_basis, parse_real, parse_vector, ExactVector};
use quasi_core::fourier::{diffraction_scan, gap_certificate, gap_certificate_unchecked, gap_test, poisson_verify, Gaussian, GridSpec};
use quasi_core::lattice::Lattice;
use quasi_core::measure::{autocorrelation_measure, AtomicMeasure};
use quasi_core::modelset::{generate, predicted_density, CutAndProjectScheme, SchemeWire, Window};
use quasi_core::pointset::{covering_radius, densities, meyer_witness, min_gap, PointSet};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::io::{emit, floats, load_measure, load_pointset, read_file};
use crate::{CliError, Header};

/// Maps a library error to a validation failure.
pub(crate) trait Invalid<T> {
    fn invalid(self) -> Result<T, CliError>;
}

impl<T, E: Display> Invalid<T> for Result<T, E> {
    fn invalid(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Invalid(e.to_string()))
    }
}

#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    header: &'a Header<'a>,
    #[serde(flatten)]
    body: T,
}

/// Runs the parsed command; `Ok(false)` means the artifact was written but a
/// check failed.
pub fn run(cli: &Cli, header: &Header) -> Result<bool, CliError> {
    let out = cli.output.as_deref();
    let write = |body: Value| emit(&Output { header, body }, out);
    match &cli.command {
        Command::Gen(g) => gen(g, &write).map(|_| true),
        Command::Analyze(a) => analyze(a, &write).map(|_| true),
        Command::Diffract(d) => diffract(d, &write).map(|_| true),
        Command::Poisson(p) => poisson(p, &write),
        Command::Gapcert(g) => gapcert(g, &write),
        Command::Autocorr(a) => autocorr(a, &write),
        Command::Decompose(d) => decompose(d, &write),
        Command::Verify(v) => {
            let (pass, checks) = crate::verify::suite(cli.seed, v.instances);
            write(json!({ "pass": pass, "checks": checks }))?;
            Ok(pass)
        }
    }
}

fn lattice(spec: &str) -> Result<Lattice, CliError> {
    Lattice::from_spec(spec).map_err(|e| CliError::Usage(e.to_string()))
}

fn pointset_body(ps: &PointSet, density: f64) -> Value {
    json!({ "pointset": ps.to_wire(), "count": ps.len(), "density": density })
}

fn gen(g: &Gen, write: &dyn Fn(Value) -> Result<(), CliError>) -> Result<(), CliError> {
    match g {
        Gen::Lattice(a) => {
            let l = lattice(&a.lattice)?;
            let origin = ExactVector::zero(l.field(), l.dim());
            let pts = l.enumerate_in_ball(&[origin], a.r, quasi_core::lattice::DEFAULT_CAP).invalid()?;
            let ps = PointSet::new(pts.into_iter().map(|p| p.point).collect(), a.r, format!("lattice {}", a.lattice)).invalid()?;
            write(pointset_body(&ps, 1.0 / l.det().to_f64().abs()))
        }
        Gen::Modelset(a) => {
            let (scheme, mut window) = scheme(&a.scheme)?;
            if let Some(w) = &a.window {
                let (lo, hi) = w.split_once(':').ok_or_else(|| CliError::Usage(format!("window `{w}` is not lo:hi")))?;
                let b = scheme.gamma().field();
                window = Window::interval(parse_real(lo, b).invalid()?, parse_real(hi, b).invalid()?);
            }
            modelset(&scheme, &window, a.r, write)
        }
        Gen::Preset(a) => match a.name {
            PresetName::Fib => modelset(&CutAndProjectScheme::fibonacci(), &Window::unit_interval(), a.r, write),
            PresetName::Altsign => {
                let mu = AtomicMeasure::on_lattice(&Lattice::integer(1), a.r, |k, _| {
                    Complex64::new(if k[0].rem_euclid(2) == 0 { 1.0 } else { -1.0 }, 0.0)
                })
                .invalid()?;
                write(json!({ "measure": mu.to_wire(), "count": mu.len() }))
            }
        },
        Gen::Synth(a) => {
            let w: DecompositionWire = read_file(&a.decomposition)?;
            let d = CosetDecomposition::from_wire(&w).invalid()?;
            let mu = synthesize(&d, a.r).invalid()?;
            write(json!({ "measure": mu.to_wire(), "count": mu.len() }))
        }
    }
}

fn scheme(spec: &str) -> Result<(CutAndProjectScheme, Window), CliError> {
    if spec == "fib" {
        return Ok((CutAndProjectScheme::fibonacci(), Window::unit_interval()));
    }
    if let Some(l) = spec.strip_prefix("lattice:") {
        return Ok((CutAndProjectScheme::lattice(lattice(l)?), Window::Point));
    }
    let w: SchemeWire = read_file(Path::new(spec))?;
    CutAndProjectScheme::from_wire(&w).invalid()
}

fn modelset(
    scheme: &CutAndProjectScheme,
    window: &Window,
    r: f64,
    write: &dyn Fn(Value) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let ms = generate(scheme, window, r, quasi_core::lattice::DEFAULT_CAP).invalid()?;
    let mut body = pointset_body(&ms.points, predicted_density(scheme, window));
    body["boundary_hits"] = json!(ms.boundary_hits);
    write(body)
}

fn analyze(a: &Analyze, write: &dyn Fn(Value) -> Result<(), CliError>) -> Result<(), CliError> {
    let ps = load_pointset(&a.input)?;
    let radii = match &a.radii {
        Some(r) => floats(r)?,
        None => [0.1, 0.2, 0.4].iter().map(|f| f * ps.r_trunc()).collect(),
    };
    let dens = densities(&ps, &radii).invalid()?;
    if let Some(p) = &a.csv {
        let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        dens.write_csv(f).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let meyer = match meyer_witness(&ps, a.meyer_budget) {
        Ok(m) => json!({ "success": m.success(), "report": m }),
        Err(e) => json!({ "success": false, "error": e.to_string() }),
    };
    let gap = min_gap(&ps).invalid()?;
    let cover = covering_radius(&ps).invalid()?;
    write(json!({
        "count": ps.len(),
        "densities": dens,
        "meyer": meyer,
        "delone": { "min_gap": gap, "uniformly_discrete": gap > 0.0, "covering": cover },
    }))
}

fn diffract(d: &Diffract, write: &dyn Fn(Value) -> Result<(), CliError>) -> Result<(), CliError> {
    let mu = load_measure(&d.input)?;
    let grid = GridSpec::parse(&d.grid).map_err(|e| CliError::Usage(e.to_string()))?;
    let scan = diffraction_scan(&mu, &grid, d.taper).invalid()?;
    if let Some(p) = &d.csv {
        let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        scan.write_csv(f).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let top = scan.peaks.iter().map(|p| p.amplitude).fold(0.0, f64::max);
    let peaks: Vec<_> = scan.peaks.iter().filter(|p| p.amplitude >= d.threshold * top).collect();
    write(json!({
        "taper_width": scan.taper_width,
        "noise_floor": scan.noise_floor,
        "median": scan.median,
        "oversampled": scan.oversampled,
        "min_peak_gap": scan.min_peak_gap(),
        "peaks": peaks,
    }))
}

fn gaussian(spec: &str, n: usize) -> Result<Gaussian, CliError> {
    let w = spec
        .strip_prefix("gauss:")
        .and_then(|w| w.parse::<f64>().ok())
        .filter(|w| *w > 0.0)
        .ok_or_else(|| CliError::Usage(format!("test function `{spec}` is not gauss:<width>")))?;
    Ok(Gaussian::centered(n, w))
}

fn vector_or_zero(text: &Option<String>, n: usize) -> Result<Vec<f64>, CliError> {
    match text {
        None => Ok(vec![0.0; n]),
        Some(t) => {
            let v = floats(t)?;
            if v.len() != n {
                return Err(CliError::Usage(format!("expected {n} components, got {}", v.len())));
            }
            Ok(v)
        }
    }
}

fn poisson(p: &Poisson, write: &dyn Fn(Value) -> Result<(), CliError>) -> Result<bool, CliError> {
    let l = lattice(&p.lattice)?;
    let n = l.dim();
    let f = gaussian(&p.f, n)?;
    let shift = vector_or_zero(&p.shift, n)?;
    let modulation = vector_or_zero(&p.modulation, n)?;
    let rep = poisson_verify(&l, &f, &shift, &modulation, p.r, p.tol).invalid()?;
    let pass = rep.abs_error < p.tol;
    write(json!({ "pass": pass, "report": rep }))?;
    Ok(pass)
}

fn gapcert(g: &Gapcert, write: &dyn Fn(Value) -> Result<(), CliError>) -> Result<bool, CliError> {
    let lambda = floats(&g.lambda)?;
    let cert = if g.unchecked {
        gap_certificate_unchecked(&lambda, g.r, g.delta, g.a)
    } else {
        gap_certificate(&lambda, g.r, g.delta, g.a)
    }
    .invalid()?;
    let pass = cert.report.passes(g.zero_tol, g.mass_tol);
    write(json!({ "pass": pass, "certificate": cert }))?;
    Ok(pass)
}

fn autocorr(a: &Autocorr, write: &dyn Fn(Value) -> Result<(), CliError>) -> Result<bool, CliError> {
    let mu = load_measure(&a.input)?;
    let basis = mu.support().basis().cloned().unwrap_or_else(quasi_core::exactnum::RealBasis::rational);
    let h = parse_vector(&a.h, &basis).invalid()?;
    let muh = autocorrelation_measure(&mu, &h).invalid()?;
    let mut body = json!({ "measure": muh.to_wire(), "count": muh.len() });
    let mut pass = true;
    if let Some(r) = a.a {
        let centre = vec![0.0; muh.dim()];
        let rep = gap_test(&muh, &centre, r, a.probes, Some(0.0), a.threshold).invalid()?;
        pass = rep.gap;
        body["gap_test"] = serde_json::to_value(&rep).map_err(|e| CliError::Io(e.to_string()))?;
    }
    write(body)?;
    Ok(pass)
}

/// `,`-separated scalars in dimension 1, otherwise `;`-separated vectors.
fn offsets(text: &str, n: usize) -> Result<Vec<ExactVector>, CliError> {
    let items: Vec<&str> = if n == 1 && !text.contains(';') {
        text.split(',').collect()
    } else {
        text.split(';').collect()
    };
    let scalars: Vec<&str> = items.iter().flat_map(|s| s.split(',')).collect();
    let basis = infer_basis(&scalars).map_err(|e| CliError::Usage(e.to_string()))?;
    items
        .iter()
        .map(|s| parse_vector(s.trim().trim_matches(|c| c == '(' || c == ')'), &basis).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn decompose(d: &Decompose, write: &dyn Fn(Value) -> Result<(), CliError>) -> Result<bool, CliError> {
    let mu = load_measure(&d.input)?;
    let l = lattice(&d.lattice)?;
    let thetas = offsets(&d.offsets, l.dim())?;
    let rec = recover_polynomials(&mu, &l, &thetas, d.k, d.eps).invalid()?;
    let mut body = json!({
        "decomposition": rec.decomposition.to_wire(),
        "fits": rec.fits,
        "residual": rec.residual,
        "sup_weight": rec.sup_weight,
    });
    let mut pass = true;
    if let Some(p) = &d.expect {
        let w: DecompositionWire = read_file(p)?;
        let want = CosetDecomposition::from_wire(&w).invalid()?;
        let err = coefficient_error(&rec.decomposition, &want)?;
        pass = err.is_some_and(|e| e < d.tol);
        body["comparison"] = json!({ "matched": err.is_some(), "max_coefficient_error": err, "pass": pass });
    }
    write(body)?;
    Ok(pass)
}

/// Largest coefficient difference after reducing both sides to the
/// fundamental domain; `None` when offsets or frequency sets differ.
pub(crate) fn coefficient_error(got: &CosetDecomposition, want: &CosetDecomposition) -> Result<Option<f64>, CliError> {
    if got.parts.len() != want.parts.len() {
        return Ok(None);
    }
    let mut worst: f64 = 0.0;
    for (g, w) in got.parts.iter().zip(&want.parts) {
        if g.theta.cmp_numeric(&w.theta) != Ordering::Equal {
            return Ok(None);
        }
        let a = g.poly.canonical_on(&got.lattice, &g.theta).invalid()?;
        let b = w.poly.canonical_on(&want.lattice, &w.theta).invalid()?;
        if a.len() != b.len() {
            return Ok(None);
        }
        for ((fa, ca), (fb, cb)) in a.terms().iter().zip(b.terms()) {
            if fa.cmp_numeric(fb) != Ordering::Equal {
                return Ok(None);
            }
            worst = worst.max((ca - cb).norm());
        }
    }
    Ok(Some(worst))
}
