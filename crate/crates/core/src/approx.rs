//! Regular approximations `ω_{i,n}` of singular vectors that reproduce a
//! prescribed `τ`, and the resulting norm-resolvent gap.
//!
//! With `W = A(A² + 1)⁻¹`, `a_n = ⟨E_{[0,n]}ω₂, Wω₁⟩` and
//! `b_n = ⟨E_{[c,d]}ω₂, Wω₁⟩`, the vectors
//! `ω_{i,n} = E_{[0,n]}ω_i + ε_i E_{[c,d]}ω_i` give
//! `⟨ω_{2,n}, Wω_{1,n}⟩ = a_n + ε₁ε₂ b_n` as long as `[c, d]` does not overlap
//! `[0, n]`; choosing `ε₁ε₂ = (τ - a_n)/b_n` hits `τ` exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::krein::{self, PerturbationSpec, TauPolicy};
use crate::operator::OperatorModel;
use crate::rational::RationalFn;
use crate::spectral;
use crate::vector::ScaleVector;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxSequenceStep {
    pub n: f64,
    pub omega1_n: ScaleVector,
    pub omega2_n: ScaleVector,
    pub a_n: f64,
    pub b_n: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// `[c_n, d_n]` in the spectral variable.
    pub window: (f64, f64),
    /// `⟨ω_{2,n}, A(A² + 1)⁻¹ω_{1,n}⟩`, computed from the built vectors.
    pub realized: f64,
}

impl ApproxSequenceStep {
    /// The regular perturbation this step stands for.
    pub fn spec(&self, limit: &PerturbationSpec) -> PerturbationSpec {
        PerturbationSpec {
            op: limit.op.clone(),
            omega1: self.omega1_n.clone(),
            omega2: self.omega2_n.clone(),
            alpha: limit.alpha,
            tau: TauPolicy::Auto,
        }
    }
}

/// How `[c_n, d_n] = [n, n·2^j]` is searched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPolicy {
    pub max_doublings: u32,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy { max_doublings: 64 }
    }
}

fn require_multiplication(op: &OperatorModel) -> Result<()> {
    if op.is_laplace() {
        return Err(Error::UnsupportedBackend(
            "spectral windows need the multiplication backend".into(),
        ));
    }
    Ok(())
}

/// `E_{[u,v]} ω`.
pub fn spectral_truncate(op: &OperatorModel, omega: &ScaleVector, window: (f64, f64)) -> Result<ScaleVector> {
    require_multiplication(op)?;
    let (u, v) = window;
    if !(u <= v) || u.is_nan() {
        return Err(Error::InvalidInput(format!("window [{u}, {v}] is empty")));
    }
    omega.validate()?;
    Ok(omega.clone().windowed(u, v, C64::new(1.0, 0.0)))
}

/// The window construction is real; complex pairings cannot be matched.
fn real_part(v: C64) -> Result<f64> {
    if v.im.abs() > 1e-9 * (1.0 + v.norm()) {
        return Err(Error::ComplexTauUnsupported);
    }
    Ok(v.re)
}

/// One member of the approximating sequence at cutoff `n`.
pub fn build_matching_step(
    op: &OperatorModel,
    omega1: &ScaleVector,
    omega2: &ScaleVector,
    tau: C64,
    n: f64,
    policy: &WindowPolicy,
) -> Result<ApproxSequenceStep> {
    require_multiplication(op)?;
    if tau.im != 0.0 {
        return Err(Error::ComplexTauUnsupported);
    }
    if !(n > op.lower_bound()) || !n.is_finite() {
        return Err(Error::InvalidInput(format!(
            "cutoff {n} must exceed the spectrum bottom {}",
            op.lower_bound()
        )));
    }
    let w = RationalFn::tau_weight();
    match spectral::check_pairing(op, omega2, omega1, &w) {
        Ok(()) => {
            return Err(Error::RegularityViolation(
                "<omega2, A(A^2+1)^-1 omega1> converges; the approximation is trivial".into(),
            ))
        }
        Err(Error::NonIntegrable(_)) => {}
        Err(e) => return Err(e),
    }
    let tau = tau.re;
    let base = (0.0, n);
    let t1 = spectral_truncate(op, omega1, base)?;
    let t2 = spectral_truncate(op, omega2, base)?;
    let a_n = real_part(spectral::pairing(op, &t2, omega1, &w)?)?;
    let gap = tau - a_n;

    let (window, b_n, eps1, eps2) = if gap == 0.0 {
        ((n, n), 0.0, 0.0, 0.0)
    } else {
        let mut found = None;
        for j in 1..=policy.max_doublings {
            let d = n * 2f64.powi(j as i32);
            let e2 = spectral_truncate(op, omega2, (n, d))?;
            let b = real_part(spectral::pairing(op, &e2, omega1, &w)?)?;
            if b.abs() > gap.abs() {
                found = Some(((n, d), b));
                break;
            }
        }
        let (window, b) = found.ok_or(Error::WindowNotFound(n))?;
        let eps1 = (gap.abs() / b.abs()).sqrt();
        let eps2 = gap.signum() * b.signum() * eps1;
        (window, b, eps1, eps2)
    };

    let extend = |t: ScaleVector, omega: &ScaleVector, eps: f64| -> Result<ScaleVector> {
        if eps == 0.0 {
            return Ok(t);
        }
        let extra = spectral_truncate(op, omega, window)?;
        Ok(t.plus(C64::new(eps, 0.0), extra))
    };
    let omega1_n = extend(t1, omega1, eps1)?;
    let omega2_n = extend(t2, omega2, eps2)?;
    let realized = real_part(spectral::pairing(op, &omega2_n, &omega1_n, &w)?)?;
    Ok(ApproxSequenceStep {
        n,
        omega1_n,
        omega2_n,
        a_n,
        b_n,
        eps1,
        eps2,
        window,
        realized,
    })
}

/// Steps for several cutoffs, built in parallel.
pub fn build_sequence(
    op: &OperatorModel,
    omega1: &ScaleVector,
    omega2: &ScaleVector,
    tau: C64,
    ns: &[f64],
    policy: &WindowPolicy,
) -> Vec<Result<ApproxSequenceStep>> {
    ns.par_iter()
        .map(|&n| build_matching_step(op, omega1, omega2, tau, n, policy))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventGap {
    /// `max_f ‖(R̃_{n,z} - R̃_z) f‖ / ‖f‖` over the probes.
    pub gap: f64,
    /// `‖(A - z)⁻¹(ω_{i,n} - ω_i)‖` for `i = 1, 2`.
    pub defect_norms: [f64; 2],
    /// `|b_{n,z}⁻¹ - b_z⁻¹|`: how far `τ_n + F_n(z)` is from `τ + F(z)`.
    pub pairing_gap: f64,
}

/// Ten `(x + 1)^{-q}` probes cut to growing spectral windows above the
/// spectrum bottom.
pub fn default_probes(op: &OperatorModel) -> Vec<ScaleVector> {
    let bottom = op.lower_bound();
    (0..10)
        .map(|k| {
            let q = 0.6 + 0.15 * k as f64;
            let top = bottom + 10.0 * 4f64.powi(k);
            ScaleVector::shifted_power_law(-q, 1.0).windowed(bottom, top, C64::new(1.0, 0.0))
        })
        .collect()
}

fn denominator_of(spec: &PerturbationSpec, z: C64) -> Result<C64> {
    krein::denominator(spec, z)?.ok_or_else(|| {
        Error::InvalidInput("the unperturbed operator has no Krein denominator".into())
    })
}

/// Norm-resolvent distance between an approximating and the limiting
/// perturbation, estimated on `probes`.
pub fn resolvent_gap(
    spec_n: &PerturbationSpec,
    spec_limit: &PerturbationSpec,
    z: C64,
    probes: &[ScaleVector],
) -> Result<ResolventGap> {
    let op = &spec_limit.op;
    let gaps = probes
        .par_iter()
        .map(|f| -> Result<f64> {
            let a = krein::krein_apply(spec_n, z, f)?;
            let b = krein::krein_apply(spec_limit, z, f)?;
            let diff = a.plus(C64::new(-1.0, 0.0), b);
            let norm_f = spectral::l2_norm(op, f)?;
            Ok(spectral::l2_norm(op, &diff)? / norm_f)
        })
        .collect::<Result<Vec<_>>>()?;
    let gap = gaps.into_iter().fold(0.0, f64::max);
    let defect = |wn: &ScaleVector, w: &ScaleVector| -> Result<f64> {
        let d = wn.clone().plus(C64::new(-1.0, 0.0), w.clone());
        spectral::l2_norm(op, &spectral::resolvent_apply(op, z, &d)?)
    };
    let defect_norms = [
        defect(&spec_n.omega1, &spec_limit.omega1)?,
        defect(&spec_n.omega2, &spec_limit.omega2)?,
    ];
    let pairing_gap = (denominator_of(spec_n, z)? - denominator_of(spec_limit, z)?).norm();
    Ok(ResolventGap {
        gap,
        defect_norms,
        pairing_gap,
    })
}
