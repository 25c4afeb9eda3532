#![allow(dead_code)]

use perturbkit::krein::{self, Alpha, PerturbationSpec, TauPolicy};
use perturbkit::{Backend, OperatorModel, RationalFn, ScaleVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Three square-integrable probes suited to the backend.
pub fn probes(op: &OperatorModel) -> Vec<ScaleVector> {
    let bottom = op.lower_bound();
    match op.backend() {
        Backend::LaplaceSpace3D => vec![
            ScaleVector::delta_3d([0.0; 3]).apply(RationalFn::resolvent(c(-1.0, 0.0))),
            ScaleVector::delta_3d([0.5, 0.0, 0.0]).apply(RationalFn::resolvent(c(-2.0, 0.0))),
            ScaleVector::delta_3d([0.0, 1.0, 0.0])
                .apply(RationalFn::resolvent(c(-0.5, 0.0)).mul(&RationalFn::resolvent(c(-3.0, 0.0)))),
        ],
        Backend::LaplaceLine => vec![
            ScaleVector::exp_abs(1.0, 0.0),
            ScaleVector::exp_abs(2.0, 0.7),
            ScaleVector::exp_abs(0.5, -1.5),
        ],
        Backend::Multiplication { .. } => vec![
            ScaleVector::shifted_power_law(-1.0, 1.0),
            ScaleVector::shifted_power_law(-2.0, 0.0).windowed(bottom, bottom + 50.0, c(1.0, 0.0)),
            ScaleVector::shifted_power_law(-1.5, 2.0).scaled(c(0.3, -0.8)),
        ],
    }
}

/// Regular points: off the real axis or real below the spectrum, and away
/// from the perturbed eigenvalues.
pub fn regular_pairs(spec: &PerturbationSpec, count: usize, seed: u64) -> Vec<(C64, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bottom = spec.op.lower_bound();
    let draw = |rng: &mut ChaCha8Rng| loop {
        let z = if rng.random_bool(0.25) {
            c(bottom - rng.random_range(0.3..4.0), 0.0)
        } else {
            let im = rng.random_range(0.3..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            c(bottom + rng.random_range(-3.0..6.0), im)
        };
        if let Ok(krein::Coefficient::Finite(b)) = krein::b_of_z(spec, z) {
            if b.norm() < 1e3 {
                return z;
            }
        }
    };
    (0..count).map(|_| (draw(&mut rng), draw(&mut rng))).collect()
}

/// One vector on both sides with a real coupling.
pub fn symmetric_spec() -> PerturbationSpec {
    PerturbationSpec::new(
        OperatorModel::power_on_half_line(2.0, 1.0).unwrap(),
        ScaleVector::power_law(-1.0 / 3.0),
        ScaleVector::power_law(-1.0 / 3.0),
        Alpha::new(c(-0.7, 0.0)),
        TauPolicy::Auto,
    )
    .unwrap()
}

/// `c(k) = α/(2k(2k + iα))` multiplies `e^{ik(|x| + |ξ|)}` in the kernel
/// correction of the point interaction; `S = (1 - 2ik c(k)) / (1 + 2ik c(-k))`.
pub fn point_interaction_s(alpha: C64, lambda: f64) -> C64 {
    let k = lambda.sqrt();
    let i = c(0.0, 1.0);
    let coef = |k: f64| alpha / (2.0 * k * (2.0 * k + i * alpha));
    (1.0 - 2.0 * i * k * coef(k)) / (1.0 + 2.0 * i * k * coef(-k))
}

pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
