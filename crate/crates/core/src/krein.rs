//! The perturbed resolvent `R̃_z = R_z + b_z (·, n_z̄) m_z`.
//!
//! With `n_z = R_z ω₁`, `m_z = R_z ω₂` and
//! `b_z = -1 / (α⁻¹ + τ + F(z))`, where `F` is the regularized pairing
//! `F(z) = ⟨ω₂, ω₁⟩` weighted by `(1 + z s)/((s - z)(s² + 1))` and `τ` stands
//! in for `⟨ω₂, A(A² + 1)⁻¹ ω₁⟩` (computed when it converges, supplied when
//! it does not). Since `1/(s - z)` splits as `s/(s² + 1)` plus the
//! regularized weight, `τ + F(z) = ⟨R_z ω₂, ω₁⟩` whenever the latter exists.

use crate::error::{Error, Result};
use crate::operator::OperatorModel;
use crate::rational::RationalFn;
use crate::spectral::{self, classify_regularity, Regularity};
use crate::vector::ScaleVector;
use crate::C64;

/// Coupling constant; `Zero` is the unperturbed operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Zero,
    Value(C64),
}

impl Alpha {
    pub fn new(a: C64) -> Self {
        if a.norm() == 0.0 {
            Alpha::Zero
        } else {
            Alpha::Value(a)
        }
    }

    pub fn inverse(&self) -> Option<C64> {
        match self {
            Alpha::Zero => None,
            Alpha::Value(a) => Some(a.inv()),
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Alpha::Zero => Alpha::Zero,
            Alpha::Value(a) => Alpha::Value(a.conj()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauPolicy {
    /// `τ = ⟨ω₂, A(A² + 1)⁻¹ ω₁⟩`; fails when that pairing diverges.
    Auto,
    Explicit(C64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub op: OperatorModel,
    pub omega1: ScaleVector,
    pub omega2: ScaleVector,
    pub alpha: Alpha,
    pub tau: TauPolicy,
}

/// `b_z`, which is infinite exactly at eigenvalues of the perturbed operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Finite(C64),
    Infinity,
}

impl Coefficient {
    pub fn finite(self) -> Option<C64> {
        match self {
            Coefficient::Finite(b) => Some(b),
            Coefficient::Infinity => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KreinData {
    pub z: C64,
    pub n_z: ScaleVector,
    pub m_z: ScaleVector,
    pub b_z: Coefficient,
    pub f_value: C64,
    pub tau: C64,
}

impl PerturbationSpec {
    /// Builds a spec after checking that both vectors lie in `H₋₂`.
    pub fn new(
        op: OperatorModel,
        omega1: ScaleVector,
        omega2: ScaleVector,
        alpha: Alpha,
        tau: TauPolicy,
    ) -> Result<Self> {
        let spec = PerturbationSpec {
            op,
            omega1,
            omega2,
            alpha,
            tau,
        };
        let (r1, r2) = spec.regularity()?;
        for (name, r) in [("omega1", r1), ("omega2", r2)] {
            if r == Regularity::Outside {
                return Err(Error::RegularityViolation(format!("{name} is not in H-2")));
            }
        }
        Ok(spec)
    }

    pub fn regularity(&self) -> Result<(Regularity, Regularity)> {
        Ok((
            classify_regularity(&self.op, &self.omega1)?,
            classify_regularity(&self.op, &self.omega2)?,
        ))
    }

    pub fn with_alpha(&self, alpha: Alpha) -> Self {
        PerturbationSpec {
            alpha,
            ..self.clone()
        }
    }

    pub fn with_tau(&self, tau: TauPolicy) -> Self {
        PerturbationSpec {
            tau,
            ..self.clone()
        }
    }
}

/// `⟨ω₂, A(A² + 1)⁻¹ ω₁⟩`.
pub fn tau_auto(spec: &PerturbationSpec) -> Result<C64> {
    spectral::pairing(&spec.op, &spec.omega2, &spec.omega1, &RationalFn::tau_weight())
}

pub fn tau_value(spec: &PerturbationSpec) -> Result<C64> {
    match spec.tau {
        TauPolicy::Auto => tau_auto(spec),
        TauPolicy::Explicit(t) => Ok(t),
    }
}

/// `F(z) = ⟨(A - z)⁻¹ ω₂, (1 + z̄A)(A² + 1)⁻¹ ω₁⟩`.
pub fn regularized_f(spec: &PerturbationSpec, z: C64) -> Result<C64> {
    spectral::pairing(
        &spec.op,
        &spec.omega2,
        &spec.omega1,
        &RationalFn::regularized_resolvent(z),
    )
}

fn check_regular(spec: &PerturbationSpec, z: C64) -> Result<()> {
    if spec.op.in_spectrum(z) {
        return Err(Error::PoleOnSpectrum(format!("{z}")));
    }
    Ok(())
}

/// `α⁻¹ + τ + F(z)`, i.e. `-b_z⁻¹`; `None` for the unperturbed operator.
pub fn denominator(spec: &PerturbationSpec, z: C64) -> Result<Option<C64>> {
    Ok(denominator_parts(spec, z)?.map(|(a, t, f)| a + t + f))
}

fn denominator_parts(spec: &PerturbationSpec, z: C64) -> Result<Option<(C64, C64, C64)>> {
    check_regular(spec, z)?;
    let ainv = match spec.alpha.inverse() {
        None => return Ok(None),
        Some(a) => a,
    };
    Ok(Some((ainv, tau_value(spec)?, regularized_f(spec, z)?)))
}

/// `α⁻¹ + τ + F(z)` counts as zero when it is below what the quadrature can
/// resolve in its terms.
fn coefficient_from(spec: &PerturbationSpec, ainv: C64, tau: C64, f: C64) -> Coefficient {
    let q = &spec.op.quadrature;
    let d = ainv + tau + f;
    let tol = 10.0 * (q.abs_tol + q.rel_tol * (ainv.norm() + tau.norm() + f.norm()));
    if d.norm() <= tol {
        Coefficient::Infinity
    } else {
        Coefficient::Finite(-d.inv())
    }
}

pub fn b_of_z(spec: &PerturbationSpec, z: C64) -> Result<Coefficient> {
    match denominator_parts(spec, z)? {
        None => Ok(Coefficient::Finite(C64::new(0.0, 0.0))),
        Some((a, t, f)) => Ok(coefficient_from(spec, a, t, f)),
    }
}

pub fn krein_data(spec: &PerturbationSpec, z: C64) -> Result<KreinData> {
    check_regular(spec, z)?;
    let tau = tau_value(spec)?;
    let f_value = regularized_f(spec, z)?;
    let b_z = match spec.alpha.inverse() {
        None => Coefficient::Finite(C64::new(0.0, 0.0)),
        Some(ainv) => coefficient_from(spec, ainv, tau, f_value),
    };
    Ok(KreinData {
        z,
        n_z: spectral::resolvent_apply(&spec.op, z, &spec.omega1)?,
        m_z: spectral::resolvent_apply(&spec.op, z, &spec.omega2)?,
        b_z,
        f_value,
        tau,
    })
}

/// `(f, n_z̄) = ∫ f conj(ω₁) / (m - z)`.
pub fn defect_pairing(spec: &PerturbationSpec, z: C64, f: &ScaleVector) -> Result<C64> {
    spectral::pairing(&spec.op, f, &spec.omega1, &RationalFn::resolvent(z))
}

/// `R̃_z f`.
pub fn krein_apply(spec: &PerturbationSpec, z: C64, f: &ScaleVector) -> Result<ScaleVector> {
    let one = C64::new(1.0, 0.0);
    let rf = spectral::resolvent_apply(&spec.op, z, f)?;
    let b = match b_of_z(spec, z)? {
        Coefficient::Infinity => return Err(Error::PerturbedEigenvalue(format!("{z}"))),
        Coefficient::Finite(b) => b,
    };
    if b.norm() == 0.0 {
        return Ok(rf);
    }
    let m_z = spectral::resolvent_apply(&spec.op, z, &spec.omega2)?;
    let coef = b * defect_pairing(spec, z, f)?;
    Ok(ScaleVector::linear_combination(vec![(one, rf), (coef, m_z)]))
}

/// `|b_z⁻¹ - b_ξ⁻¹ - (ξ - z)(m_ξ, n_z̄)|`; zero for the unperturbed operator.
pub fn cocycle_residual(spec: &PerturbationSpec, z: C64, xi: C64) -> Result<f64> {
    let (dz, dxi) = match (denominator(spec, z)?, denominator(spec, xi)?) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(0.0),
    };
    let w = RationalFn::resolvent(xi).mul(&RationalFn::resolvent(z));
    let cross = spectral::pairing(&spec.op, &spec.omega2, &spec.omega1, &w)?;
    Ok(((-dz) - (-dxi) - (xi - z) * cross).norm())
}

/// The adjoint perturbation: vectors swapped, `α` and `τ` conjugated.
pub fn adjoint_spec(spec: &PerturbationSpec) -> PerturbationSpec {
    PerturbationSpec {
        op: spec.op.clone(),
        omega1: spec.omega2.clone(),
        omega2: spec.omega1.clone(),
        alpha: spec.alpha.conj(),
        tau: match spec.tau {
            TauPolicy::Auto => TauPolicy::Auto,
            TauPolicy::Explicit(t) => TauPolicy::Explicit(t.conj()),
        },
    }
}

/// `Ã⁻¹ = A⁻¹ + b₀ (·, n₀) m₀`.
pub fn inverse_at_zero(spec: &PerturbationSpec) -> Result<KreinData> {
    let z = C64::new(0.0, 0.0);
    let data = krein_data(spec, z)?;
    if data.b_z == Coefficient::Infinity {
        return Err(Error::PerturbedEigenvalue("0".into()));
    }
    Ok(data)
}
