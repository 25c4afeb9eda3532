//! Boundary values `F(λ ± i0)` on the absolutely continuous spectrum and the
//! one-dimensional scattering coefficient
//! `S(λ) = (1 + α(τ + F(λ - i0))) / (1 + α(τ + F(λ + i0)))`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::krein::{self, PerturbationSpec};
use crate::rational::RationalFn;
use crate::spectral;
use crate::C64;

/// Largest `η` of the extrapolation ladder.
pub const ETA_START: f64 = 1e-2;
pub const ETA_LEVELS: usize = 4;
/// Offset standing in for `±i0` in closed-form kernels.
const INFINITESIMAL: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMethod {
    /// `F(λ ± iη)` on a halving ladder of `η`, Richardson-extrapolated to 0.
    EtaExtrapolation,
    /// Principal value plus `±iπ` times the spectral density; closed-form
    /// Green kernels under the Laplace backends.
    Plemelj,
}

impl BoundaryMethod {
    pub fn label(self) -> &'static str {
        match self {
            BoundaryMethod::EtaExtrapolation => "eta-extrapolation",
            BoundaryMethod::Plemelj => "plemelj",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValue {
    pub lambda: f64,
    pub f_plus: C64,
    pub f_minus: C64,
    pub method: BoundaryMethod,
    /// `η` values used, empty for Plemelj.
    pub eta_ladder: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SValue {
    Finite(C64),
    /// Spectral singularity: `1 + α(τ + F(λ + i0))` vanishes.
    Infinity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringPoint {
    pub lambda: f64,
    pub s: SValue,
    /// `1 + α(τ + F(λ + i0))`, the amplitude of `W₊`.
    pub amplitude_plus: C64,
    /// `1 + α(τ + F(λ - i0))`, the amplitude of `W₋`.
    pub amplitude_minus: C64,
    pub boundary: BoundaryValue,
}

impl ScatteringPoint {
    pub fn value(&self) -> Result<C64> {
        match self.s {
            SValue::Finite(s) => Ok(s),
            SValue::Infinity => Err(Error::SpectralSingularity(self.lambda)),
        }
    }
}

fn check_interior(spec: &PerturbationSpec, lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda <= spec.op.lower_bound() {
        return Err(Error::OnSpectrumEdge(lambda));
    }
    Ok(())
}

fn plemelj(spec: &PerturbationSpec, lambda: f64) -> Result<BoundaryValue> {
    let (f_plus, f_minus) = if spec.op.is_laplace() {
        let at = |im: f64| krein::regularized_f(spec, C64::new(lambda, im));
        (at(INFINITESIMAL)?, at(-INFINITESIMAL)?)
    } else {
        let (pv, density) = spectral::plemelj_parts(
            &spec.op,
            &spec.omega2,
            &spec.omega1,
            &RationalFn::regularized_numerator(C64::new(lambda, 0.0)),
            lambda,
        )?;
        let jump = C64::new(0.0, std::f64::consts::PI) * density;
        (pv + jump, pv - jump)
    };
    Ok(BoundaryValue {
        lambda,
        f_plus,
        f_minus,
        method: BoundaryMethod::Plemelj,
        eta_ladder: Vec::new(),
    })
}

/// Richardson table for samples at `h, h/2, h/4, …` of a function smooth in
/// `h`; returns the last two diagonal entries.
fn richardson(samples: &[C64]) -> (C64, C64) {
    let mut table: Vec<Vec<C64>> = Vec::with_capacity(samples.len());
    for (k, &s) in samples.iter().enumerate() {
        let mut row = vec![s];
        for j in 1..=k {
            let f = 2f64.powi(j as i32);
            let prev = &table[k - 1];
            row.push((f * row[j - 1] - prev[j - 1]) / (f - 1.0));
        }
        table.push(row);
    }
    let n = samples.len();
    (table[n - 1][n - 1], table[n - 1][n - 2])
}

fn extrapolated(spec: &PerturbationSpec, lambda: f64) -> Result<BoundaryValue> {
    let ladder: Vec<f64> = (0..ETA_LEVELS)
        .map(|k| ETA_START / 2f64.powi(k as i32))
        .collect();
    let side = |sign: f64| -> Result<C64> {
        let samples = ladder
            .par_iter()
            .map(|&eta| krein::regularized_f(spec, C64::new(lambda, sign * eta)))
            .collect::<Result<Vec<_>>>()?;
        let (best, prev) = richardson(&samples);
        let gap = (best - prev).norm();
        if gap > 1e-4 * (1.0 + best.norm()) {
            return Err(Error::ExtrapolationNotCauchy(gap));
        }
        Ok(best)
    };
    Ok(BoundaryValue {
        lambda,
        f_plus: side(1.0)?,
        f_minus: side(-1.0)?,
        method: BoundaryMethod::EtaExtrapolation,
        eta_ladder: ladder,
    })
}

/// `F(λ ± i0)` by the requested method.
pub fn boundary_value(spec: &PerturbationSpec, lambda: f64, method: BoundaryMethod) -> Result<BoundaryValue> {
    check_interior(spec, lambda)?;
    match method {
        BoundaryMethod::Plemelj => plemelj(spec, lambda),
        BoundaryMethod::EtaExtrapolation => extrapolated(spec, lambda),
    }
}

/// Plemelj where the density allows it, extrapolation otherwise.
pub fn boundary_value_auto(spec: &PerturbationSpec, lambda: f64) -> Result<BoundaryValue> {
    match boundary_value(spec, lambda, BoundaryMethod::Plemelj) {
        Err(Error::DensityNondifferentiable(_)) => {
            boundary_value(spec, lambda, BoundaryMethod::EtaExtrapolation)
        }
        other => other,
    }
}

fn assemble(spec: &PerturbationSpec, boundary: BoundaryValue) -> Result<ScatteringPoint> {
    let one = C64::new(1.0, 0.0);
    let lambda = boundary.lambda;
    let (amplitude_plus, amplitude_minus) = match spec.alpha.inverse() {
        None => (one, one),
        Some(ainv) => {
            let alpha = ainv.inv();
            let tau = krein::tau_value(spec)?;
            (
                one + alpha * (tau + boundary.f_plus),
                one + alpha * (tau + boundary.f_minus),
            )
        }
    };
    let q = &spec.op.quadrature;
    let floor = 10.0 * (q.abs_tol + q.rel_tol * (1.0 + (amplitude_plus - one).norm()));
    let s = if amplitude_plus.norm() <= floor {
        SValue::Infinity
    } else {
        SValue::Finite(amplitude_minus / amplitude_plus)
    };
    Ok(ScatteringPoint {
        lambda,
        s,
        amplitude_plus,
        amplitude_minus,
        boundary,
    })
}

/// `S(λ)` with the default boundary-value method.
pub fn smatrix(spec: &PerturbationSpec, lambda: f64) -> Result<ScatteringPoint> {
    let bv = boundary_value_auto(spec, lambda)?;
    assemble(spec, bv)
}

pub fn smatrix_with(spec: &PerturbationSpec, lambda: f64, method: BoundaryMethod) -> Result<ScatteringPoint> {
    let bv = boundary_value(spec, lambda, method)?;
    assemble(spec, bv)
}

/// `S` over an energy grid, evaluated in parallel, one result per energy.
pub fn smatrix_grid(spec: &PerturbationSpec, lambdas: &[f64]) -> Vec<Result<ScatteringPoint>> {
    lambdas.par_iter().map(|&l| smatrix(spec, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_polynomial_error() {
        let f = |h: f64| C64::new(2.0 + 3.0 * h - h * h + 0.5 * h * h * h, h);
        let samples: Vec<C64> = (0..4).map(|k| f(0.1 / 2f64.powi(k))).collect();
        let (best, _) = richardson(&samples);
        assert!((best - C64::new(2.0, 0.0)).norm() < 1e-13, "{best}");
    }
}
