use thiserror::Error;

/// Everything that can go wrong while building or evaluating a perturbation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pairing does not converge: {0}")]
    NonIntegrable(String),
    #[error("pole on the spectrum of A at {0}")]
    PoleOnSpectrum(String),
    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("vector cannot be convolved with the closed-form kernel: {0}")]
    UnrepresentableConvolution(String),
    #[error("regularity class cannot be decided: {0}")]
    Undecidable(String),
    #[error("point {0} is an eigenvalue of the perturbed operator")]
    PerturbedEigenvalue(String),
    #[error("root iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("search region touches the spectrum of A")]
    RegionTouchesSpectrum,
    #[error("regularity requirement violated: {0}")]
    RegularityViolation(String),
    #[error("vector is an eigenvector of A")]
    EigenvectorOfA,
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),
    #[error("no admissible window at n = {0}")]
    WindowNotFound(f64),
    #[error("complex tau is not supported by the window construction")]
    ComplexTauUnsupported,
    #[error("operation not supported for this backend: {0}")]
    UnsupportedBackend(String),
    #[error("energy {0} is not in the interior of the absolutely continuous spectrum")]
    OnSpectrumEdge(f64),
    #[error("spectral density is not smooth at {0}")]
    DensityNondifferentiable(f64),
    #[error("extrapolated boundary values are not Cauchy (spread {0:e})")]
    ExtrapolationNotCauchy(f64),
    #[error("scattering denominator vanishes at {0}")]
    SpectralSingularity(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable identifier used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonIntegrable(_) => "NonIntegrable",
            Error::PoleOnSpectrum(_) => "PoleOnSpectrum",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::UnrepresentableConvolution(_) => "UnrepresentableConvolution",
            Error::Undecidable(_) => "Undecidable",
            Error::PerturbedEigenvalue(_) => "PerturbedEigenvalue",
            Error::NoConvergence(_) => "NoConvergence",
            Error::RegionTouchesSpectrum => "RegionTouchesSpectrum",
            Error::RegularityViolation(_) => "RegularityViolation",
            Error::EigenvectorOfA => "EigenvectorOfA",
            Error::DegenerateDenominator(_) => "DegenerateDenominator",
            Error::WindowNotFound(_) => "WindowNotFound",
            Error::ComplexTauUnsupported => "ComplexTauUnsupported",
            Error::UnsupportedBackend(_) => "UnsupportedBackend",
            Error::OnSpectrumEdge(_) => "OnSpectrumEdge",
            Error::DensityNondifferentiable(_) => "DensityNondifferentiable",
            Error::ExtrapolationNotCauchy(_) => "ExtrapolationNotCauchy",
            Error::SpectralSingularity(_) => "SpectralSingularity",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
