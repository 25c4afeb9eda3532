use perturbkit::corpus;
use perturbkit::eigen::{dual_pair, eigen_condition};
use perturbkit::krein::{self, adjoint_spec, Alpha, PerturbationSpec, TauPolicy};
use perturbkit::scattering::smatrix;
use perturbkit::spectral::pairing;
use perturbkit::{OperatorModel, RationalFn, ScaleVector, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn half_line() -> OperatorModel {
    OperatorModel::power_on_half_line(2.0, 1.0).unwrap()
}

fn off_axis() -> impl Strategy<Value = C64> {
    (-5.0..5.0f64, 0.2..4.0f64, any::<bool>()).prop_map(|(re, im, up)| c(re, if up { im } else { -im }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pairing_is_sesquilinear(p in 0.6..3.0f64, q in 0.6..3.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64, z in off_axis()) {
        let op = half_line();
        let f = ScaleVector::power_law(-p);
        let g = ScaleVector::power_law(-q);
        let w = RationalFn::resolvent(z);
        let k = c(a, b);
        let base = pairing(&op, &f, &g, &w).unwrap();
        let left = pairing(&op, &f.clone().scaled(k), &g, &w).unwrap();
        let right = pairing(&op, &f, &g.clone().scaled(k), &w).unwrap();
        prop_assert!((left - k * base).norm() < 1e-9 * (1.0 + base.norm()));
        prop_assert!((right - k.conj() * base).norm() < 1e-9 * (1.0 + base.norm()));
    }

    #[test]
    fn cocycle_holds_off_the_axis(z in off_axis(), xi in off_axis(), tau in -3.0..3.0f64) {
        let spec = corpus::example4_pair().unwrap().spec.with_tau(TauPolicy::Explicit(c(tau, 0.0)));
        prop_assert!(krein::cocycle_residual(&spec, z, xi).unwrap() < 1e-8);
    }

    #[test]
    fn adjoint_coefficient_is_conjugate(z in off_axis()) {
        let spec = corpus::example1_spec().unwrap();
        let adj = adjoint_spec(&spec);
        let b = krein::b_of_z(&spec, z).unwrap().finite().unwrap();
        let b_adj = krein::b_of_z(&adj, z.conj()).unwrap().finite().unwrap();
        prop_assert!((b.conj() - b_adj).norm() < 1e-9 * (1.0 + b.norm()));
    }

    #[test]
    fn attractive_point_interaction_binds_at_minus_alpha_squared_over_four(a in 0.2..6.0f64) {
        let spec = corpus::example6_spec(c(-a, 0.0)).unwrap();
        let g = eigen_condition(&spec, c(-a * a / 4.0, 0.0)).unwrap();
        prop_assert!(g.norm() < 1e-9 * (1.0 + 1.0 / a));
    }

    #[test]
    fn symmetric_scattering_is_unitary(a in -4.0..4.0f64, lambda in 1.2..200.0f64, p in 0.2..0.45f64) {
        prop_assume!(a.abs() > 1e-3);
        let v = ScaleVector::power_law(-p);
        let spec = PerturbationSpec::new(half_line(), v.clone(), v, Alpha::new(c(a, 0.0)), TauPolicy::Auto).unwrap();
        let s = smatrix(&spec, lambda).unwrap().value().unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-7, "|S| = {}", s.norm());
    }

    #[test]
    fn dual_pairs_close(p in 1.6..2.4f64, q in 1.6..2.4f64, mu in -3.0..0.5f64) {
        let pair = dual_pair(&half_line(), c(mu, 0.0), &ScaleVector::power_law(-p), &ScaleVector::power_law(-q)).unwrap();
        prop_assert!(pair.closure_residual < 1e-10);
        prop_assert!(pair.condition_mu < 1e-8, "{:e}", pair.condition_mu);
    }
}
