use perturbkit::approx::{
    build_matching_step, build_sequence, default_probes, resolvent_gap, spectral_truncate, WindowPolicy,
};
use perturbkit::corpus;
use perturbkit::krein::TauPolicy;
use perturbkit::{OperatorModel, ScaleVector, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const CUTOFFS: [f64; 4] = [1e2, 1e3, 1e4, 1e5];

#[test]
fn every_step_reproduces_tau() {
    let spec = corpus::example4_pair().unwrap().spec;
    for tau in [0.0, 1.0, -2.0] {
        for step in build_sequence(&spec.op, &spec.omega1, &spec.omega2, c(tau), &CUTOFFS, &WindowPolicy::default()) {
            let step = step.unwrap();
            assert!((step.realized - tau).abs() < 1e-8, "n = {}: {}", step.n, step.realized);
            assert!(step.eps1.abs() <= 1.0 && step.eps2.abs() <= 1.0);
            assert!((step.eps1 * step.eps2 * step.b_n - (tau - step.a_n)).abs() < 1e-10);
            assert!(step.window.0 >= step.n);
        }
    }
}

#[test]
fn gap_shrinks_along_the_sequence() {
    let limit = corpus::example4_pair().unwrap().spec.with_tau(TauPolicy::Explicit(c(1.0)));
    let probes = default_probes(&limit.op);
    let mut last = f64::INFINITY;
    for n in CUTOFFS {
        let step = build_matching_step(&limit.op, &limit.omega1, &limit.omega2, c(1.0), n, &WindowPolicy::default())
            .unwrap();
        let g = resolvent_gap(&step.spec(&limit), &limit, c(-1.0), &probes).unwrap();
        assert!(g.gap < last, "n = {n}: {} after {last}", g.gap);
        last = g.gap;
    }
}

#[test]
fn convergent_pairings_need_no_approximation() {
    let spec = corpus::example5_pair().unwrap().spec;
    let err = build_matching_step(&spec.op, &spec.omega1, &spec.omega2, c(0.0), 1e3, &WindowPolicy::default())
        .unwrap_err();
    assert_eq!(err.name(), "RegularityViolation");
}

#[test]
fn complex_tau_and_laplace_backends_are_refused() {
    let spec = corpus::example4_pair().unwrap().spec;
    let err = build_matching_step(&spec.op, &spec.omega1, &spec.omega2, C64::new(0.0, 1.0), 1e3, &WindowPolicy::default())
        .unwrap_err();
    assert_eq!(err.name(), "ComplexTauUnsupported");
    let line = OperatorModel::laplace_line();
    let err = spectral_truncate(&line, &ScaleVector::delta_line(0.0), (0.0, 1.0)).unwrap_err();
    assert_eq!(err.name(), "UnsupportedBackend");
}

#[test]
fn window_search_can_run_out() {
    let spec = corpus::example4_pair().unwrap().spec;
    let policy = WindowPolicy { max_doublings: 1 };
    let err = build_matching_step(&spec.op, &spec.omega1, &spec.omega2, c(1e6), 1e2, &policy).unwrap_err();
    assert_eq!(err.name(), "WindowNotFound");
}
