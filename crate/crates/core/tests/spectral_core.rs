use std::f64::consts::PI;

use perturbkit::spectral::{
    classify_regularity, eta, evaluate, evaluate_3d, inner, pairing, resolvent_apply, Regularity,
};
use perturbkit::{Error, OperatorModel, RationalFn, ScaleVector, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn cz(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn x2_from(a: f64) -> OperatorModel {
    OperatorModel::power_on_half_line(2.0, a).unwrap()
}

#[test]
fn power_law_pairings_match_antiderivatives() {
    let op = x2_from(1.0);
    let f = ScaleVector::power_law(-7.0 / 3.0);
    let g = ScaleVector::power_law(-8.0 / 3.0);
    let tol = 10.0 * op.quadrature.abs_tol;
    let v = pairing(&op, &f, &g, &RationalFn::one()).unwrap();
    assert!((v - c(0.25)).norm() < tol, "{v}");
    let v = pairing(&op, &f, &g, &RationalFn::resolvent(c(0.0))).unwrap();
    assert!((v - c(1.0 / 6.0)).norm() < tol, "{v}");
}

#[test]
fn zero_weight_gives_zero() {
    let op = x2_from(1.0);
    let f = ScaleVector::power_law(3.0);
    let v = pairing(&op, &f, &f, &RationalFn::zero()).unwrap();
    assert_eq!(v, c(0.0));
}

#[test]
fn inverse_pairing_of_shifted_reciprocals() {
    // 1/(x²(x²-1)) = 1/(x²-1) - 1/x² integrates to (ln 3 - 1)/2 over [2, ∞)
    let op = x2_from(2.0);
    let f = ScaleVector::shifted_power_law(-1.0, 1.0);
    let g = ScaleVector::shifted_power_law(-1.0, -1.0);
    let v = pairing(&op, &f, &g, &RationalFn::resolvent(c(0.0))).unwrap();
    let expect = (3f64.ln() - 1.0) / 2.0;
    assert!((v - c(expect)).norm() < 1e-9, "{v} vs {expect}");
}

#[test]
fn line_resolvent_of_exponentials() {
    let op = OperatorModel::laplace_line();
    let phi = ScaleVector::exp_abs(1.0, 1.0);
    let psi = ScaleVector::exp_abs(1.0, -1.0);
    let r = resolvent_apply(&op, c(-1.0), &phi).unwrap();
    let v = inner(&op, &r, &psi).unwrap();
    let expect = 13.0 / 4.0 * (-2f64).exp();
    assert!((v - c(expect)).norm() < 1e-12, "{v}");
    // (φ, ψ) = 3e⁻²
    let v = inner(&op, &phi, &psi).unwrap();
    assert!((v - c(3.0 * (-2f64).exp())).norm() < 1e-13);
    // the resolved vector is a genuine function: value at x = 1 is
    // ∫ e^{-|1-y|} e^{-|y-1|}/2 dy = 1/2
    let v = evaluate(&op, &r, 1.0).unwrap();
    assert!((v - c(0.5)).norm() < 1e-13, "{v}");
}

#[test]
fn division_by_the_symbol() {
    let op = x2_from(1.0);
    let v = resolvent_apply(&op, c(0.0), &ScaleVector::power_law(-4.0 / 3.0)).unwrap();
    for x in [1.0, 2.5, 40.0] {
        let got = evaluate(&op, &v, x).unwrap();
        assert!((got.re - x.powf(-10.0 / 3.0)).abs() < 1e-15 * (1.0 + got.re));
    }
}

#[test]
fn space_resolvent_between_point_masses() {
    let op = OperatorModel::laplace_3d();
    let d0 = ScaleVector::delta_3d([0.0; 3]);
    let d1 = ScaleVector::delta_3d([1.0, 0.0, 0.0]);
    let r = resolvent_apply(&op, c(-1.0), &d0).unwrap();
    let v = inner(&op, &r, &d1).unwrap();
    assert!((v - c((-1f64).exp() / (4.0 * PI))).norm() < 1e-15);
    let v = evaluate_3d(&op, &r, [0.0, 1.0, 0.0]).unwrap();
    assert!((v - c((-1f64).exp() / (4.0 * PI))).norm() < 1e-15);
}

#[test]
fn resolvent_rejects_the_spectrum() {
    let op = x2_from(1.0);
    let r = resolvent_apply(&op, c(4.0), &ScaleVector::power_law(-1.0));
    assert!(matches!(r, Err(Error::PoleOnSpectrum(_))));
    let lap = OperatorModel::laplace_line();
    let r = resolvent_apply(&lap, c(-1.0), &ScaleVector::power_law(-1.0));
    assert!(matches!(r, Err(Error::UnrepresentableConvolution(_))));
}

#[test]
fn regularity_of_catalog_vectors() {
    let op = x2_from(2.0);
    // 1/(x ± 1) is square integrable on [2, ∞) but x/(x+1) is not
    let v = ScaleVector::shifted_power_law(-1.0, 1.0);
    assert_eq!(classify_regularity(&op, &v).unwrap(), Regularity::Zero);

    let op = x2_from(1.0);
    let two = c(2.0);
    let w1 = ScaleVector::power_law(1.0 / 3.0).plus(-two, ScaleVector::power_law(-5.0 / 3.0));
    assert_eq!(classify_regularity(&op, &w1).unwrap(), Regularity::MinusOne);
    let w2 = ScaleVector::power_law(2.0 / 3.0).plus(-two, ScaleVector::power_law(-4.0 / 3.0));
    assert_eq!(classify_regularity(&op, &w2).unwrap(), Regularity::MinusTwo);
    let phi = ScaleVector::power_law(-7.0 / 3.0);
    assert_eq!(classify_regularity(&op, &phi).unwrap(), Regularity::PlusOne);
    let big = ScaleVector::power_law(2.0);
    assert_eq!(classify_regularity(&op, &big).unwrap(), Regularity::Outside);
}

#[test]
fn regularity_of_point_masses() {
    let line = OperatorModel::laplace_line();
    let d = ScaleVector::delta_line(0.3);
    assert_eq!(classify_regularity(&line, &d).unwrap(), Regularity::MinusOne);
    let e = ScaleVector::exp_abs(2.0, 0.0);
    assert_eq!(classify_regularity(&line, &e).unwrap(), Regularity::PlusOne);
    let space = OperatorModel::laplace_3d();
    let d = ScaleVector::delta_3d([0.0; 3]);
    assert_eq!(classify_regularity(&space, &d).unwrap(), Regularity::MinusTwo);
    let r = resolvent_apply(&space, c(-1.0), &d).unwrap();
    assert_eq!(classify_regularity(&space, &r).unwrap(), Regularity::Zero);
}

#[test]
fn tabulated_tails_are_undecidable() {
    let op = x2_from(1.0);
    let v = ScaleVector::tabulated(vec![1.0, 2.0, 3.0], vec![c(1.0), c(2.0), c(1.0)]).unwrap();
    assert!(matches!(classify_regularity(&op, &v), Err(Error::Undecidable(_))));
    let v = ScaleVector::tabulated(vec![1.0, 2.0, 3.0], vec![c(1.0), c(2.0), c(0.0)]).unwrap();
    assert_eq!(classify_regularity(&op, &v).unwrap(), Regularity::PlusTwo);
    // ∫ of the hat function squared: 1 + 7/3 + 4/3
    let v = ScaleVector::tabulated(vec![1.0, 2.0, 3.0], vec![c(1.0), c(2.0), c(0.0)]).unwrap();
    let n = inner(&op, &v, &v).unwrap();
    assert!((n.re - (7.0 / 3.0 + 4.0 / 3.0)).abs() < 1e-10, "{n}");
}

#[test]
fn eta_divides_by_the_symbol() {
    let op = x2_from(2.0);
    let w = ScaleVector::shifted_power_law(-1.0, -1.0);
    let e = eta(&op, &w).unwrap();
    for x in [2.0, 3.0, 10.0] {
        let got = evaluate(&op, &e, x).unwrap();
        assert!((got.re - 1.0 / (x * x * (x - 1.0))).abs() < 1e-15);
    }
    let zero = eta(&op, &ScaleVector::zero()).unwrap();
    assert_eq!(evaluate(&op, &zero, 3.0).unwrap(), c(0.0));

    let op = x2_from(1.0);
    let w1 = ScaleVector::power_law(1.0 / 3.0).plus(c(-2.0), ScaleVector::power_law(-5.0 / 3.0));
    let e = eta(&op, &w1).unwrap();
    for x in [1.0, 1.7, 9.0] {
        let got = evaluate(&op, &e, x).unwrap();
        let expect = (x * x - 2.0) / x.powf(11.0 / 3.0);
        assert!((got.re - expect).abs() < 1e-14);
    }
    let line = OperatorModel::laplace_line();
    assert!(matches!(
        eta(&line, &ScaleVector::delta_line(0.0)),
        Err(Error::PoleOnSpectrum(_))
    ));
}

#[test]
fn divergent_pairings_are_refused() {
    let op = x2_from(1.0);
    let w2 = ScaleVector::power_law(2.0 / 3.0).plus(c(-2.0), ScaleVector::power_law(-4.0 / 3.0));
    let w1 = ScaleVector::power_law(1.0 / 3.0).plus(c(-2.0), ScaleVector::power_law(-5.0 / 3.0));
    let r = pairing(&op, &w2, &w1, &RationalFn::tau_weight());
    assert!(matches!(r, Err(Error::NonIntegrable(_))), "{r:?}");
    let r = pairing(&op, &w2, &w1, &RationalFn::regularized_resolvent(cz(-1.0, 0.0)));
    assert!(r.is_ok());
}

#[test]
fn resolvent_identity_on_probes() {
    let op = x2_from(1.0);
    let v = ScaleVector::power_law(-0.4);
    let g = ScaleVector::power_law(-1.2);
    let (z, xi) = (cz(-1.0, 0.5), cz(0.3, -2.0));
    let lhs = inner(&op, &resolvent_apply(&op, z, &v).unwrap(), &g).unwrap()
        - inner(&op, &resolvent_apply(&op, xi, &v).unwrap(), &g).unwrap();
    let both = resolvent_apply(&op, z, &resolvent_apply(&op, xi, &v).unwrap()).unwrap();
    let rhs = (z - xi) * inner(&op, &both, &g).unwrap();
    assert!((lhs - rhs).norm() < 10.0 * op.quadrature.abs_tol);
}

#[test]
fn norms_of_vanishing_resolvent_combinations_are_tiny() {
    // R_z δ - R_ξ δ - (z - ξ) R_z R_ξ δ = 0 exactly; the norm must not carry
    // the √ε floor of an expanded quadratic form
    for op in [OperatorModel::laplace_line(), OperatorModel::laplace_3d()] {
        let d = if op.backend() == &perturbkit::Backend::LaplaceLine {
            ScaleVector::delta_line(0.3)
        } else {
            ScaleVector::delta_3d([0.0, 0.3, 0.0])
        };
        let (z, xi) = (cz(-1.2, 0.0), cz(-0.45, 0.2));
        let rz = resolvent_apply(&op, z, &d).unwrap();
        let rxi = resolvent_apply(&op, xi, &d).unwrap();
        let nested = resolvent_apply(&op, z, &rxi).unwrap();
        let res = rz.plus(c(-1.0), rxi).plus(-(z - xi), nested);
        let n = perturbkit::spectral::l2_norm(&op, &res).unwrap();
        assert!(n < 1e-13, "{n:e}");
    }
}
