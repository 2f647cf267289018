use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;
use quasi_core::decompose::{
    find_separating_vector, recover_polynomials, synthesize, verify_separating, CosetDecomposition, CosetPart,
    TrigPolynomial,
};
use quasi_core::exactnum::{ExactReal, ExactVector, RealBasis};
use quasi_core::fourier::{poisson_verify, tapered_transform, Gaussian};
use quasi_core::lattice::Lattice;
use quasi_core::measure::AtomicMeasure;
use quasi_core::pointset::densities;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn surd(c: (i64, i64, i64, i64)) -> ExactReal {
    ExactReal::from_coeffs(&RealBasis::sqrt2_sqrt3(), vec![q(c.0, 4), q(c.1, 3), q(c.2, 2), q(c.3, 5)]).unwrap()
}

fn coeffs() -> impl Strategy<Value = (i64, i64, i64, i64)> {
    (-20i64..=20, -20i64..=20, -20i64..=20, -20i64..=20)
}

fn scalar(x: ExactReal) -> ExactVector {
    ExactVector::new(vec![x]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_operations_are_exact(a in coeffs(), b in coeffs()) {
        let (x, y) = (surd(a), surd(b));
        prop_assert_eq!(x.try_add(&y).unwrap().try_sub(&y).unwrap(), x.clone());
        prop_assert_eq!(x.try_mul(&y).unwrap(), y.try_mul(&x).unwrap());
        if !y.is_zero() {
            prop_assert_eq!(x.try_mul(&y).unwrap().try_div(&y).unwrap(), x.clone());
        }
        let approx = x.to_f64() * y.to_f64();
        prop_assert!((x.try_mul(&y).unwrap().to_f64() - approx).abs() <= 1e-12 * (1.0 + approx.abs()));
    }

    #[test]
    fn dual_is_an_involution(a in 1i64..9, b in -9i64..9, c in -9i64..9, d in 1i64..9, den in 1i64..5) {
        prop_assume!(a * d != b * c * den * den);
        let rat = RealBasis::rational();
        let cols = [
            ExactVector::from_rationals(&rat, &[q(a, den), q(c, 1)]),
            ExactVector::from_rationals(&rat, &[q(b, 1), q(d, den)]),
        ];
        let l = Lattice::from_columns(&cols).unwrap();
        let dual = l.dual().unwrap();
        prop_assert_eq!(&dual.dual().unwrap(), &l);
        prop_assert!((l.det().to_f64() * dual.det().to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_holds_under_shift_and_modulation(
        width in 0.6f64..1.5, x0 in -1.0f64..1.0, w0 in -1.0f64..1.0
    ) {
        let r = poisson_verify(&Lattice::integer(1), &Gaussian::centered(1, width), &[x0], &[w0], 30.0, 1e-10).unwrap();
        prop_assert!(r.abs_error < 1e-10, "{}", r.abs_error);
    }

    #[test]
    fn transform_is_linear_and_modulation_covariant(
        c in -3.0f64..3.0, w in -0.5f64..0.5, t in -2.0f64..2.0
    ) {
        let z = Lattice::integer(1);
        let base = AtomicMeasure::on_lattice(&z, 40.0, |k, _| Complex64::new(1.0 / (1.0 + k[0].abs() as f64), 0.0)).unwrap();
        let scaled = AtomicMeasure::on_lattice(&z, 40.0, |k, _| Complex64::new(c / (1.0 + k[0].abs() as f64), 0.0)).unwrap();
        let modulated = AtomicMeasure::on_lattice(&z, 40.0, |k, _| {
            Complex64::from_polar(1.0 / (1.0 + k[0].abs() as f64), 2.0 * PI * w * k[0] as f64)
        })
        .unwrap();
        let sigma = 8.0;
        let f = tapered_transform(&base, sigma, &[t]);
        prop_assert!((tapered_transform(&scaled, sigma, &[t]) - f * c).norm() < 1e-12 * (1.0 + f.norm() * c.abs()));
        let g = tapered_transform(&base, sigma, &[t - w]);
        prop_assert!((tapered_transform(&modulated, sigma, &[t]) - g).norm() < 1e-12);
    }

    #[test]
    fn canonical_form_agrees_on_the_coset(
        theta in coeffs(), ks in prop::collection::vec((-12i64..12, 1i64..6), 1..4), n in -30i64..30
    ) {
        let z = Lattice::integer(1);
        let th = scalar(surd(theta));
        let terms: Vec<(ExactVector, Complex64)> = ks
            .iter()
            .enumerate()
            .map(|(i, &(k, d))| (scalar(ExactReal::from_ratio(&RealBasis::rational(), k, d)), Complex64::new(1.0 + i as f64, -0.5)))
            .collect();
        let p = TrigPolynomial::new(terms).unwrap();
        let c = p.canonical_on(&z, &th).unwrap();
        prop_assert_eq!(&c.canonical_on(&z, &th).unwrap(), &c);
        let x = th.try_add(&ExactVector::from_integers(th.basis(), &[n])).unwrap();
        prop_assert!((p.eval(&x).unwrap() - c.eval(&x).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn separating_vectors_re_verify(
        rows in prop::collection::vec((coeffs(), coeffs()), 2..5)
    ) {
        let z2 = Lattice::integer(2);
        let thetas: Vec<ExactVector> = rows
            .iter()
            .enumerate()
            .map(|(j, &(a, b))| ExactVector::new(vec![surd((a.0, j as i64 + 1, a.2, a.3)), surd(b)]).unwrap())
            .collect();
        let sv = find_separating_vector(&z2, &thetas).unwrap();
        prop_assert!(verify_separating(&z2, &thetas, &sv.m).is_ok());
    }

    #[test]
    fn density_estimates_are_ordered(step in 1i64..4, den in 1i64..4, r in 10.0f64..40.0) {
        let l = Lattice::diagonal(&[q(step, den)]).unwrap();
        let set = AtomicMeasure::on_lattice(&l, 4.0 * r, |_, _| Complex64::new(1.0, 0.0)).unwrap().support().clone();
        let rep = densities(&set, &[r / 2.0, r]).unwrap();
        for i in 0..2 {
            prop_assert!(rep.d_minus[i] <= rep.d_sharp[i] && rep.d_sharp[i] <= rep.d_plus[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn recovery_inverts_synthesis(
        theta in coeffs(), ks in prop::collection::btree_set(0i64..8, 1..5), re in -1.0f64..1.0
    ) {
        let z = Lattice::integer(1);
        let terms = ks
            .iter()
            .map(|&k| (scalar(ExactReal::from_ratio(&RealBasis::rational(), k, 8)), Complex64::new(re, k as f64 / 8.0)))
            .collect();
        let parts = vec![CosetPart { theta: scalar(surd((theta.0, 0, 0, 0))), poly: TrigPolynomial::new(terms).unwrap() }];
        let d = CosetDecomposition::new(z.clone(), parts).unwrap();
        let mu = synthesize(&d, 30.0).unwrap();
        let rec = recover_polynomials(&mu, &z, &d.thetas(), 8, 1e-12).unwrap();
        let got = rec.decomposition.parts[0].poly.canonical_on(&z, &d.parts[0].theta).unwrap();
        let want = d.parts[0].poly.canonical_on(&z, &d.parts[0].theta).unwrap();
        prop_assert_eq!(got.len(), want.len());
        for ((_, a), (_, b)) in got.terms().iter().zip(want.terms()) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }
}

/// Dual basis from a floating-point inverse transpose, independent of the
/// exact elimination.
#[test]
fn golden_dual_matches_float_inverse() {
    let l = Lattice::fibonacci();
    let b = l.basis_matrix().to_f64();
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let inv_t = [[b[1][1] / det, -b[1][0] / det], [-b[0][1] / det, b[0][0] / det]];
    let dual = l.dual().unwrap().basis_matrix().to_f64();
    for i in 0..2 {
        for j in 0..2 {
            assert!((dual[i][j] - inv_t[i][j]).abs() < 1e-14, "{dual:?} vs {inv_t:?}");
        }
    }
}

/// `Σₙ e^{−πn²/σ²}/σ = Σₖ e^{−πσ²k²}`; frozen values of the right side.
#[test]
fn tapered_comb_at_zero_matches_theta_function() {
    let comb = AtomicMeasure::on_lattice(&Lattice::integer(1), 60.0, |_, _| Complex64::new(1.0, 0.0)).unwrap();
    for (sigma, want) in [(1.0, 1.086_434_811_213_308), (2.0, 1.000_006_974_684_712), (0.5, 2.000_013_949_369_425)] {
        let got = tapered_transform(&comb, sigma, &[0.0]);
        assert!((got.re - want).abs() < 1e-13, "σ = {sigma}: {got} vs {want}");
        assert!(got.im.abs() < 1e-15);
    }
}
