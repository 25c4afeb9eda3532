//! The unperturbed operator `A` in computable form.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;

/// Where the multiplication variable lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `[a, ∞)` with `a ≥ 0`.
    HalfLine(f64),
    /// `ℝ`; the symbol is `|x|^p`.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    /// `A` acts as multiplication by `m(x) = |x|^power` on `L²(domain)`.
    Multiplication { power: f64, domain: Domain },
    /// `-d²/dx²` on `L²(ℝ)`.
    LaplaceLine,
    /// `-Δ` on `L²(ℝ³)`.
    LaplaceSpace3D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorModel {
    backend: Backend,
    lower_bound: f64,
    pub quadrature: QuadratureConfig,
}

impl OperatorModel {
    pub fn multiplication(power: f64, domain: Domain) -> Result<Self> {
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidInput(format!(
                "symbol power must be positive, got {power}"
            )));
        }
        let lower_bound = match domain {
            Domain::HalfLine(a) => {
                if !(a >= 0.0) || !a.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "half-line start must be finite and >= 0, got {a}"
                    )));
                }
                a.powf(power)
            }
            Domain::Line => 0.0,
        };
        Ok(OperatorModel {
            backend: Backend::Multiplication { power, domain },
            lower_bound,
            quadrature: QuadratureConfig::default(),
        })
    }

    /// Shorthand for `x^p` on `[a, ∞)`.
    pub fn power_on_half_line(power: f64, a: f64) -> Result<Self> {
        Self::multiplication(power, Domain::HalfLine(a))
    }

    pub fn laplace_line() -> Self {
        OperatorModel {
            backend: Backend::LaplaceLine,
            lower_bound: 0.0,
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn laplace_3d() -> Self {
        OperatorModel {
            backend: Backend::LaplaceSpace3D,
            lower_bound: 0.0,
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn with_quadrature(mut self, cfg: QuadratureConfig) -> Self {
        self.quadrature = cfg;
        self
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// The constant `c` with `A ≥ c`; also the bottom of the spectrum.
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// `σ(A) = [lower_bound, ∞)` for every backend.
    pub fn spectrum(&self) -> (f64, f64) {
        (self.lower_bound, f64::INFINITY)
    }

    pub fn in_spectrum(&self, z: crate::C64) -> bool {
        z.im == 0.0 && z.re >= self.lower_bound
    }

    pub fn is_laplace(&self) -> bool {
        !matches!(self.backend, Backend::Multiplication { .. })
    }

    /// Symbol value `m(x)`; only meaningful for the multiplication backend.
    pub fn symbol(&self, x: f64) -> f64 {
        match self.backend {
            Backend::Multiplication { power, .. } => x.abs().powf(power),
            _ => f64::NAN,
        }
    }

    pub fn symbol_derivative(&self, x: f64) -> f64 {
        match self.backend {
            Backend::Multiplication { power, .. } => {
                power * x.abs().powf(power - 1.0) * x.signum()
            }
            _ => f64::NAN,
        }
    }

    /// Points of the domain mapped to `λ` by the symbol.
    pub fn preimages(&self, lambda: f64) -> Vec<f64> {
        match self.backend {
            Backend::Multiplication { power, domain } => {
                if !(lambda >= 0.0) {
                    return Vec::new();
                }
                let r = lambda.powf(1.0 / power);
                match domain {
                    Domain::HalfLine(a) => {
                        if r >= a {
                            vec![r]
                        } else {
                            Vec::new()
                        }
                    }
                    Domain::Line => {
                        if r == 0.0 {
                            vec![0.0]
                        } else {
                            vec![-r, r]
                        }
                    }
                }
            }
            _ => Vec::new(),
        }
    }

    pub(crate) fn power(&self) -> Option<f64> {
        match self.backend {
            Backend::Multiplication { power, .. } => Some(power),
            _ => None,
        }
    }

    pub(crate) fn domain(&self) -> Option<Domain> {
        match self.backend {
            Backend::Multiplication { domain, .. } => Some(domain),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_bottom_is_the_essential_range() {
        let op = OperatorModel::power_on_half_line(2.0, 2.0).unwrap();
        assert_eq!(op.lower_bound(), 4.0);
        assert_eq!(op.preimages(9.0), vec![3.0]);
        assert!(op.preimages(1.0).is_empty());
        let line = OperatorModel::multiplication(2.0, Domain::Line).unwrap();
        assert_eq!(line.preimages(4.0), vec![-2.0, 2.0]);
    }

    #[test]
    fn rejects_negative_domain_start() {
        assert!(OperatorModel::power_on_half_line(2.0, -1.0).is_err());
        assert!(OperatorModel::power_on_half_line(0.0, 1.0).is_err());
    }
}
