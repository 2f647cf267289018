use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use quasi_core::decompose::{
    find_separating_vector, recover_polynomials, synthesize, verify_separating, CosetDecomposition, CosetPart,
    DecomposeError, TrigPolynomial,
};
use quasi_core::exactnum::{ExactReal, ExactVector, RealBasis};
use quasi_core::fourier::{poisson_verify, Gaussian};
use quasi_core::lattice::Lattice;
use quasi_core::measure::AtomicMeasure;
use quasi_core::modelset::{density_error, generate, predicted_density, CutAndProjectScheme, Window};
use quasi_core::pointset::densities;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::commands::coefficient_error;

fn check(name: &str, result: Result<(bool, String), String>) -> Value {
    match result {
        Ok((pass, detail)) => json!({ "name": name, "pass": pass, "detail": detail }),
        Err(e) => json!({ "name": name, "pass": false, "detail": e }),
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `a + b√2 + c√3` over the basis `(1, √2, √3, √6)`.
fn surd(a: BigRational, b: BigRational, c: BigRational) -> ExactReal {
    let basis = RealBasis::sqrt2_sqrt3();
    ExactReal::from_coeffs(&basis, vec![a, b, c, q(0, 1)]).expect("four coefficients")
}

pub fn suite(seed: u64, instances: usize) -> (bool, Vec<Value>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        check("duality", duality()),
        check("poisson", poisson()),
        check("fibonacci_density", fib_density()),
        check("density_ordering", ordering()),
    ];
    checks.push(check("separating_vectors", separating(&mut rng, instances)));
    checks.push(check("decomposition_round_trip", round_trip(&mut rng, instances)));
    checks.push(check("negative_control", negative_control()));
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    (pass, checks)
}

fn duality() -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for spec in ["Z", "Z2", "diag:2,3", "fib"] {
        let l = Lattice::from_spec(spec).map_err(|e| e.to_string())?;
        let d = l.dual().map_err(|e| e.to_string())?;
        exact &= d.dual().map_err(|e| e.to_string())? == l;
        worst = worst.max((l.det().to_f64() * d.det().to_f64()).abs() - 1.0).abs();
    }
    Ok((exact && worst < 1e-12, format!("dual(dual(L)) = L: {exact}; max |det L·det L* − 1| = {worst:e}")))
}

fn poisson() -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for spec in ["Z", "diag:2", "Z2", "fib"] {
        let l = Lattice::from_spec(spec).map_err(|e| e.to_string())?;
        let n = l.dim();
        let r = poisson_verify(&l, &Gaussian::centered(n, 1.0), &vec![0.0; n], &vec![0.0; n], 30.0, 1e-10)
            .map_err(|e| e.to_string())?;
        worst = worst.max(r.abs_error);
    }
    Ok((worst < 1e-10, format!("max |lhs − rhs| = {worst:e}")))
}

fn fib_density() -> Result<(bool, String), String> {
    let s = CutAndProjectScheme::fibonacci();
    let w = Window::unit_interval();
    let ms = generate(&s, &w, 250.0, 1_000_000).map_err(|e| e.to_string())?;
    let err = density_error(&ms, predicted_density(&s, &w), 200.0).map_err(|e| e.to_string())?;
    Ok((err < 0.02, format!("relative error at R = 200: {err:e}")))
}

fn ordering() -> Result<(bool, String), String> {
    let ms = generate(&CutAndProjectScheme::fibonacci(), &Window::unit_interval(), 250.0, 1_000_000)
        .map_err(|e| e.to_string())?;
    let rep = densities(&ms.points, &[25.0, 50.0, 100.0]).map_err(|e| e.to_string())?;
    let ok = (0..rep.radii.len())
        .all(|i| rep.d_minus[i] <= rep.d_sharp[i] + 1e-12 && rep.d_sharp[i] <= rep.d_plus[i] + 1e-12);
    Ok((ok, format!("{} radii checked", rep.radii.len())))
}

fn separating(rng: &mut ChaCha8Rng, instances: usize) -> Result<(bool, String), String> {
    let l = Lattice::integer(1);
    for _ in 0..instances {
        let thetas: Vec<ExactVector> = (0..3)
            .map(|j| {
                let x = surd(q(rng.gen_range(-9..=9), rng.gen_range(1..=6)), q(j + 1, 1), q(rng.gen_range(-3..=3), rng.gen_range(1..=4)));
                ExactVector::new(vec![x]).expect("one entry")
            })
            .collect();
        let sv = find_separating_vector(&l, &thetas).map_err(|e| e.to_string())?;
        verify_separating(&l, &thetas, &sv.m).map_err(|e| e.to_string())?;
    }
    Ok((true, format!("{instances} families certified and re-verified")))
}

fn round_trip(rng: &mut ChaCha8Rng, instances: usize) -> Result<(bool, String), String> {
    let l = Lattice::integer(1);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let thetas = [surd(q(0, 1), q(0, 1), q(0, 1)), surd(q(rng.gen_range(0..4), 4), q(1, 1), q(0, 1))];
        let parts: Vec<CosetPart> = thetas
            .iter()
            .map(|t| {
                let terms = (0..rng.gen_range(1..=3))
                    .map(|_| {
                        let f = ExactVector::new(vec![surd(q(rng.gen_range(0..8), 8), q(0, 1), q(0, 1))]).expect("one entry");
                        (f, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    })
                    .collect();
                CosetPart {
                    theta: ExactVector::new(vec![t.clone()]).expect("one entry"),
                    poly: TrigPolynomial::new(terms).expect("rational frequencies"),
                }
            })
            .collect();
        let d = CosetDecomposition::new(l.clone(), parts).map_err(|e| e.to_string())?;
        let mu = synthesize(&d, 40.0).map_err(|e| e.to_string())?;
        let rec = recover_polynomials(&mu, &l, &d.thetas(), 8, 1e-12).map_err(|e| e.to_string())?;
        match coefficient_error(&rec.decomposition, &d).map_err(|e| e.to_string())? {
            Some(e) => worst = worst.max(e),
            None => return Ok((false, "recovered frequencies or offsets differ".into())),
        }
    }
    Ok((worst < 1e-9, format!("max coefficient error {worst:e}")))
}

fn negative_control() -> Result<(bool, String), String> {
    let mu = AtomicMeasure::on_lattice(&Lattice::integer(1), 100.0, |k, _| {
        Complex64::new(1.0 / (1.0 + (k[0] * k[0]) as f64), 0.0)
    })
    .map_err(|e| e.to_string())?;
    let zero = ExactVector::zero(&RealBasis::rational(), 1);
    match recover_polynomials(&mu, &Lattice::integer(1), &[zero], 16, 1e-12) {
        Err(DecomposeError::NotTrigPolynomial { residual, k, .. }) => {
            Ok((residual > 0.01, format!("1/(1+n²) rejected at K = {k} with residual {residual:e}")))
        }
        Err(e) => Err(e.to_string()),
        Ok(_) => Ok((false, "1/(1+n²) was accepted".into())),
    }
}
