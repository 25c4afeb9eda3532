use perturbkit::corpus::{self, EXAMPLE6_ALPHAS};
use perturbkit::eigen::{
    dual_pair, eigen_condition, find_eigenvalues, inverse_problem, verify_eigen, PerturbationClass, Region,
};
use perturbkit::krein::Alpha;
use perturbkit::spectral::{classify_regularity, l2_norm, Regularity};
use perturbkit::{OperatorModel, ScaleVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn relative_distance(op: &OperatorModel, found: &ScaleVector, expect: &ScaleVector) -> f64 {
    let unit = expect.clone().scaled(c(1.0 / l2_norm(op, expect).unwrap(), 0.0));
    let d = found.clone().plus(c(-1.0, 0.0), unit);
    l2_norm(op, &d).unwrap()
}

/// Search a small box around `lambda`; embedded eigenvalues are reached from
/// a seed just above the axis.
fn region_around(op: &OperatorModel, lambda: C64) -> (Region, Vec<C64>) {
    if lambda.im == 0.0 && lambda.re < op.lower_bound() {
        let hi = (lambda.re + 0.3).min(0.5 * (lambda.re + op.lower_bound()));
        (Region::Interval { lo: lambda.re - 0.3, hi }, Vec::new())
    } else {
        let r = Region::Rectangle {
            re: (lambda.re - 0.2, lambda.re + 0.2),
            im: (lambda.im + 0.01, lambda.im + 0.2),
        };
        (r, vec![lambda + c(0.0, 0.05)])
    }
}

fn round_trip(op: &OperatorModel, lambda: C64, phi: &ScaleVector, psi: &ScaleVector) -> (f64, f64) {
    let sol = inverse_problem(op, lambda, phi, psi).unwrap();
    let (region, seeds) = region_around(op, lambda);
    let found = find_eigenvalues(&sol.spec, &region, &seeds).unwrap();
    let pair = found
        .iter()
        .min_by(|a, b| (a.lambda - lambda).norm().total_cmp(&(b.lambda - lambda).norm()))
        .expect("eigenvalue recovered");
    ((pair.lambda - lambda).norm(), relative_distance(op, &pair.phi, phi))
}

#[test]
fn example2_has_both_partners() {
    let spec = corpus::example2_pair().unwrap().spec;
    let found = find_eigenvalues(&spec, &Region::Interval { lo: -2.0, hi: -0.01 }, &[]).unwrap();
    let mut got: Vec<f64> = found.iter().map(|p| p.lambda.re).collect();
    got.sort_by(f64::total_cmp);
    assert_eq!(got.len(), 2, "{got:?}");
    assert!((got[0] + 1.0).abs() < 1e-8);
    assert!((got[1] + 1.0 / 13.0).abs() < 1e-8);
    for p in &found {
        let dev = verify_eigen(&spec, p, &[c(-3.0, 0.0), c(0.5, 1.0), c(-0.5, -0.7)]).unwrap();
        assert!(dev < 1e-7, "{}: {dev:e}", p.lambda);
    }
}

#[test]
fn example6_bound_state_for_each_coupling() {
    for alpha in EXAMPLE6_ALPHAS {
        let spec = corpus::example6_spec(alpha).unwrap();
        let expect = -alpha * alpha / 4.0;
        let region = Region::Rectangle {
            re: (expect.re - 0.5, expect.re + 0.5),
            im: (expect.im - 0.5, expect.im + 0.5),
        };
        let region = match region {
            Region::Rectangle { re, im } if im.0 <= 0.0 && im.1 >= 0.0 => Region::Interval {
                lo: re.0,
                hi: re.1.min(-0.01),
            },
            r => r,
        };
        let found = find_eigenvalues(&spec, &region, &[expect + c(0.05, 0.02)]).unwrap();
        assert_eq!(found.len(), 1, "alpha = {alpha}");
        assert!((found[0].lambda - expect).norm() < 1e-8, "alpha = {alpha}: {}", found[0].lambda);
    }
}

#[test]
fn repulsive_point_interaction_has_no_bound_state() {
    let spec = corpus::example6_spec(c(1.5, 0.0)).unwrap();
    let found = find_eigenvalues(&spec, &Region::Interval { lo: -10.0, hi: -0.01 }, &[]).unwrap();
    assert!(found.is_empty());
}

#[test]
fn unperturbed_operator_has_no_new_eigenvalues() {
    let spec = corpus::example_spec(2).unwrap().with_alpha(Alpha::Zero);
    let found = find_eigenvalues(&spec, &Region::Interval { lo: -2.0, hi: -0.01 }, &[]).unwrap();
    assert!(found.is_empty());
    assert!(eigen_condition(&spec, c(-1.0, 0.0)).unwrap().re.is_infinite());
}

#[test]
fn region_touching_the_spectrum_is_rejected() {
    let spec = corpus::example_spec(2).unwrap();
    let err = find_eigenvalues(&spec, &Region::Interval { lo: -1.0, hi: 0.5 }, &[]).unwrap_err();
    assert_eq!(err.name(), "RegionTouchesSpectrum");
}

#[test]
fn example1_zero_is_an_eigenvalue() {
    let spec = corpus::example1_spec().unwrap();
    assert!(eigen_condition(&spec, c(0.0, 0.0)).unwrap().norm() < 1e-8);
    let found = find_eigenvalues(&spec, &Region::Interval { lo: -1.0, hi: 1.0 }, &[]).unwrap();
    assert!(found.iter().any(|p| p.lambda.norm() < 1e-8));
}

#[test]
fn inverse_round_trip_on_corpus_pairs() {
    for pair in [corpus::example4_pair().unwrap(), corpus::example5_pair().unwrap()] {
        let op = &pair.spec.op;
        let (dl, dphi) = round_trip(op, pair.lambda, &pair.phi_lambda, &pair.psi_lambda);
        assert!(dl < 1e-8, "lambda {}: {dl:e}", pair.lambda);
        assert!(dphi < 1e-6, "phi at {}: {dphi:e}", pair.lambda);
    }
}

#[test]
fn inverse_round_trip_on_random_finite_energy_vectors() {
    let op = OperatorModel::power_on_half_line(2.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..3 {
        let p = rng.random_range(1.6..2.4);
        let q = rng.random_range(1.6..2.4);
        let lambda = c(rng.random_range(-3.0..0.3), 0.0);
        let phi = ScaleVector::power_law(-p);
        let psi = ScaleVector::power_law(-q);
        assert_eq!(classify_regularity(&op, &phi).unwrap(), Regularity::PlusOne);
        let (dl, dphi) = round_trip(&op, lambda, &phi, &psi);
        assert!(dl < 1e-8, "p = {p}, q = {q}, lambda = {lambda}: {dl:e}");
        assert!(dphi < 1e-6, "p = {p}, q = {q}: {dphi:e}");
    }
}

#[test]
fn inverse_problem_classes() {
    let op = OperatorModel::power_on_half_line(2.0, 1.0).unwrap();
    let sol4 = inverse_problem(&op, c(2.0, 0.0), &ScaleVector::power_law(-4.0 / 3.0), &ScaleVector::power_law(-5.0 / 3.0))
        .unwrap();
    assert_eq!(sol4.class, PerturbationClass::Parametric);
    let sol5 = inverse_problem(&op, c(1.5, 0.0), &ScaleVector::power_law(-7.0 / 3.0), &ScaleVector::power_law(-8.0 / 3.0))
        .unwrap();
    assert_eq!(sol5.class, PerturbationClass::Regular);
    let Alpha::Value(a) = sol5.spec.alpha else { unreachable!() };
    assert!((a - c(-8.0, 0.0)).norm() < 1e-9);
}

#[test]
fn inverse_problem_rejects_eigenvectors_out_of_range() {
    let op = OperatorModel::power_on_half_line(2.0, 1.0).unwrap();
    let smooth = ScaleVector::power_law(-3.0);
    let err = inverse_problem(&op, c(-1.0, 0.0), &smooth, &smooth).unwrap_err();
    assert_eq!(err.name(), "RegularityViolation");
    let rough = ScaleVector::power_law(-0.4);
    let err = inverse_problem(&op, c(-1.0, 0.0), &rough, &smooth).unwrap_err();
    assert_eq!(err.name(), "RegularityViolation");
}

#[test]
fn dual_pair_closes() {
    let pair = dual_pair(
        &OperatorModel::power_on_half_line(2.0, 1.0).unwrap(),
        c(-0.5, 0.0),
        &ScaleVector::power_law(-2.0),
        &ScaleVector::power_law(-1.8),
    )
    .unwrap();
    assert!(pair.closure_residual < 1e-10);
    assert!(pair.condition_mu < 1e-8, "{:e}", pair.condition_mu);
    assert!(pair.condition_lambda < 1e-8, "{:e}", pair.condition_lambda);
}
