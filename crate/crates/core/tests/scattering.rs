use perturbkit::corpus::{self, EXAMPLE6_ALPHAS};
use perturbkit::krein::Alpha;
use perturbkit::scattering::{boundary_value, smatrix, smatrix_grid, smatrix_with, BoundaryMethod, SValue};

mod common;
use common::{c, grid, point_interaction_s, symmetric_spec};

#[test]
fn symmetric_perturbations_scatter_unitarily() {
    for spec in [symmetric_spec(), corpus::example6_spec(c(-2.5, 0.0)).unwrap()] {
        let lo = spec.op.lower_bound() + 0.5;
        for p in smatrix_grid(&spec, &grid(lo, lo + 60.0, 50)) {
            let p = p.unwrap();
            let s = p.value().unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-7, "|S({})| = {}", p.lambda, s.norm());
        }
    }
}

#[test]
fn plemelj_agrees_with_eta_extrapolation() {
    let ex1 = corpus::example1_spec().unwrap();
    for (spec, lambda) in [(&ex1, 9.0), (&ex1, 20.0), (&symmetric_spec(), 3.0)] {
        let a = boundary_value(spec, lambda, BoundaryMethod::Plemelj).unwrap();
        let b = boundary_value(spec, lambda, BoundaryMethod::EtaExtrapolation).unwrap();
        let dev = (a.f_plus - b.f_plus).norm().max((a.f_minus - b.f_minus).norm());
        assert!(dev < 1e-5, "lambda = {lambda}: {dev:e}");
        assert_eq!(b.eta_ladder.len(), 4);
    }
}

#[test]
fn point_interaction_matches_kernel_ratio() {
    for alpha in EXAMPLE6_ALPHAS.into_iter().chain([c(0.8, 0.3)]) {
        let spec = corpus::example6_spec(alpha).unwrap();
        for lambda in [0.3, 1.0, 7.5] {
            let s = smatrix(&spec, lambda).unwrap().value().unwrap();
            let expect = point_interaction_s(alpha, lambda);
            assert!((s - expect).norm() < 1e-6, "alpha = {alpha}, lambda = {lambda}: {s} vs {expect}");
        }
    }
}

#[test]
fn scattering_fades_at_high_energy() {
    let spec = corpus::example1_spec().unwrap();
    let d3 = (smatrix(&spec, 1e3).unwrap().value().unwrap() - 1.0).norm();
    let d4 = (smatrix(&spec, 1e4).unwrap().value().unwrap() - 1.0).norm();
    assert!(d4 < d3, "{d3:e} then {d4:e}");
    assert!(d4 < 0.1, "{d4:e}");
}

#[test]
fn unperturbed_scattering_is_trivial() {
    let spec = symmetric_spec().with_alpha(Alpha::Zero);
    let p = smatrix_with(&spec, 5.0, BoundaryMethod::EtaExtrapolation).unwrap();
    assert_eq!(p.s, SValue::Finite(c(1.0, 0.0)));
}

#[test]
fn energies_off_the_continuum_are_rejected() {
    let spec = corpus::example1_spec().unwrap();
    for lambda in [4.0, 1.0, f64::NAN] {
        assert_eq!(smatrix(&spec, lambda).unwrap_err().name(), "OnSpectrumEdge");
    }
}

#[test]
fn laplace_backends_use_closed_form_boundary_values() {
    let spec = corpus::example6_spec(c(-1.0, 0.0)).unwrap();
    let bv = boundary_value(&spec, 2.0, BoundaryMethod::Plemelj).unwrap();
    // F(λ + i0) for δ₀: i/(2k) minus the real regularization
    assert!((bv.f_plus.im - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12);
    assert!((bv.f_plus - bv.f_minus.conj()).norm() < 1e-12);
}
