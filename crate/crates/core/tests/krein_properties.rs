use perturbkit::corpus::{self, EXAMPLE_IDS};
use perturbkit::krein::{self, adjoint_spec, krein_apply, Alpha, PerturbationSpec};
use perturbkit::spectral::{inner, l2_norm};
use perturbkit::{OperatorModel, ScaleVector};

mod common;
use common::{c, probes, regular_pairs};

fn diff_norm(op: &OperatorModel, a: ScaleVector, b: ScaleVector) -> f64 {
    l2_norm(op, &a.plus(c(-1.0, 0.0), b)).unwrap()
}

#[test]
fn hilbert_identity_and_cocycle_on_every_corpus_spec() {
    for id in EXAMPLE_IDS {
        let spec = corpus::example_spec(id).unwrap();
        let op = &spec.op;
        let mut worst_hilbert: f64 = 0.0;
        let mut worst_cocycle: f64 = 0.0;
        for (z, xi) in regular_pairs(&spec, 10, 17 + id as u64) {
            worst_cocycle = worst_cocycle.max(krein::cocycle_residual(&spec, z, xi).unwrap());
            for f in probes(op) {
                let rz = krein_apply(&spec, z, &f).unwrap();
                let rxi = krein_apply(&spec, xi, &f).unwrap();
                let nested = krein_apply(&spec, z, &rxi).unwrap();
                let lhs = rz.plus(c(-1.0, 0.0), rxi);
                let r = diff_norm(op, lhs, nested.scaled(z - xi)) / l2_norm(op, &f).unwrap();
                worst_hilbert = worst_hilbert.max(r);
            }
        }
        assert!(worst_hilbert < 1e-7, "example {id}: Hilbert residual {worst_hilbert:e}");
        assert!(worst_cocycle < 1e-8, "example {id}: cocycle residual {worst_cocycle:e}");
    }
}

#[test]
fn adjoint_pairing_identity() {
    for id in EXAMPLE_IDS {
        let spec = corpus::example_spec(id).unwrap();
        let adj = adjoint_spec(&spec);
        let op = &spec.op;
        let ps = probes(op);
        for (z, _) in regular_pairs(&spec, 3, 5 + id as u64) {
            let lhs = inner(op, &krein_apply(&spec, z, &ps[0]).unwrap(), &ps[1]).unwrap();
            let rhs = inner(op, &ps[0], &krein_apply(&adj, z.conj(), &ps[1]).unwrap()).unwrap();
            let dev = (lhs - rhs).norm();
            assert!(dev < 1e-8, "example {id} at {z}: {dev:e}");
        }
    }
}

#[test]
fn resolvent_is_invariant_under_rescaling_omega1() {
    for id in EXAMPLE_IDS {
        let spec = corpus::example_spec(id).unwrap();
        let Alpha::Value(alpha) = spec.alpha else {
            unreachable!()
        };
        let tau = krein::tau_value(&spec).unwrap();
        let op = &spec.op;
        let f = &probes(op)[1];
        let z = regular_pairs(&spec, 1, 99).pop().unwrap().0;
        let base = krein_apply(&spec, z, f).unwrap();
        for a in [c(2.0, 0.0), c(-1.0, 0.0), c(1.0, 1.0)] {
            // τ is linear in conj(a) as well
            let scaled = PerturbationSpec {
                omega1: spec.omega1.clone().scaled(a),
                alpha: Alpha::Value(alpha / a.conj()),
                tau: krein::TauPolicy::Explicit(tau * a.conj()),
                ..spec.clone()
            };
            let r = krein_apply(&scaled, z, f).unwrap();
            let dev = diff_norm(op, r, base.clone()) / l2_norm(op, f).unwrap();
            assert!(dev < 1e-8, "example {id}, a = {a}: {dev:e}");
        }
    }
}

#[test]
fn unperturbed_resolvent_when_alpha_vanishes() {
    let spec = corpus::example_spec(1).unwrap().with_alpha(Alpha::Zero);
    let f = ScaleVector::shifted_power_law(-1.0, 1.0);
    let z = c(-1.0, 0.5);
    let r = krein_apply(&spec, z, &f).unwrap();
    let plain = perturbkit::spectral::resolvent_apply(&spec.op, z, &f).unwrap();
    assert!(diff_norm(&spec.op, r, plain) < 1e-14);
    assert_eq!(krein::b_of_z(&spec, z).unwrap(), krein::Coefficient::Finite(c(0.0, 0.0)));
}

#[test]
fn spectrum_points_are_rejected() {
    let spec = corpus::example_spec(4).unwrap();
    let err = krein::b_of_z(&spec, c(5.0, 0.0)).unwrap_err();
    assert_eq!(err.name(), "PoleOnSpectrum");
}

#[test]
fn b_is_infinite_at_an_eigenvalue() {
    let spec = corpus::example6_spec(c(-2.0, 0.0)).unwrap();
    assert_eq!(krein::b_of_z(&spec, c(-1.0, 0.0)).unwrap(), krein::Coefficient::Infinity);
    let err = krein_apply(&spec, c(-1.0, 0.0), &ScaleVector::exp_abs(1.0, 0.0)).unwrap_err();
    assert_eq!(err.name(), "PerturbedEigenvalue");
}
